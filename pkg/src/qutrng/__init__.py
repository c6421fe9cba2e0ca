"""Single-qutrit quantum random number generator simulator."""

__version__ = "0.1.0"
