"""Qutrit states and spin-1 observables.

States are written over the basis ``|+>, |0>, |->``. Spin observables carry
their spectral data explicitly, built from closed-form eigenvectors; no
numerical eigensolver is involved anywhere in this module.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from qutrng import linalg

ZETA = cmath.exp(1j * math.pi / 4)
SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)

# outcome -> trit: +1 -> 0, 0 -> 1, -1 -> 2
OUTCOME_TRIT = {1: 0, 0: 1, -1: 2}
TRIT_OUTCOME = {0: 1, 1: 0, 2: -1}

RAY_ATOL = 1e-9
DRIFT_TOL = 1e-9


class VerificationFailure(Exception):
    """A numerical verification did not reproduce the expected structure."""

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class QutritState:
    alpha: complex
    beta: complex
    gamma: complex
    renormalized: bool = field(default=False, compare=False)

    def __post_init__(self):
        amps = (complex(self.alpha), complex(self.beta), complex(self.gamma))
        if not all(cmath.isfinite(a) for a in amps):
            raise ValueError("non-finite amplitude")
        n2 = sum(abs(a) ** 2 for a in amps)
        if abs(n2 - 1.0) > linalg.ATOL:
            raise ValueError(f"state is not normalized (squared norm {n2!r}); use make_state")
        object.__setattr__(self, "alpha", amps[0])
        object.__setattr__(self, "beta", amps[1])
        object.__setattr__(self, "gamma", amps[2])

    @property
    def vector(self) -> np.ndarray:
        return linalg.vector([self.alpha, self.beta, self.gamma])

    def same_ray(self, other: "QutritState", atol: float = RAY_ATOL) -> bool:
        """True when the two states differ only by a global phase."""
        return abs(abs(linalg.inner(self.vector, other.vector)) - 1.0) <= atol


def make_state(alpha: complex, beta: complex, gamma: complex) -> QutritState:
    """Normalized state ``alpha|+> + beta|0> + gamma|->``."""
    v = np.array([alpha, beta, gamma], dtype=np.complex128)
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite amplitude")
    n = float(np.sqrt(np.sum(np.abs(v) ** 2)))
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    v = v / n
    return QutritState(complex(v[0]), complex(v[1]), complex(v[2]), renormalized=abs(n - 1.0) > DRIFT_TOL)


def state_from_vector(v) -> QutritState:
    return make_state(*np.asarray(v, dtype=np.complex128))


PLUS = QutritState(1, 0, 0)
ZERO = QutritState(0, 1, 0)
MINUS = QutritState(0, 0, 1)


def unbiased_state(k: int) -> QutritState:
    """One of the four states giving probability 1/3 to every outcome of S_Z, S_X, S_Y.

    ``k = 0, 1`` are ``(zeta, +-1, zeta^3)/sqrt3``, ``k = 2, 3`` are
    ``(zeta^3, +-1, zeta)/sqrt3``.
    """
    if k not in (0, 1, 2, 3):
        raise IndexError(f"unbiased state index must be 0..3, got {k}")
    sign = 1 if k % 2 == 0 else -1
    outer_a, outer_c = (ZETA, ZETA**3) if k < 2 else (ZETA**3, ZETA)
    return make_state(outer_a / SQRT3, sign / SQRT3, outer_c / SQRT3)


@dataclass(frozen=True)
class SpinDirection:
    """Direction parameters ``c = cos(chi)``, ``s = sin(chi)``, ``theta = exp(i phi)``.

    The observable built from it is ``c S_Z + s S_theta``, so the spatial axis
    it measures along is ``(s cos phi, s sin phi, c)``. When ``s == 0`` the
    value of ``phi`` is irrelevant and the observable is ``+-S_Z``.
    """

    chi: float
    phi: float

    @property
    def c(self) -> float:
        return math.cos(self.chi)

    @property
    def s(self) -> float:
        return math.sin(self.chi)

    @property
    def theta(self) -> complex:
        return cmath.exp(1j * self.phi)

    def axis(self) -> tuple[float, float, float]:
        return (self.s * math.cos(self.phi), self.s * math.sin(self.phi), self.c)

    @classmethod
    def from_axis(cls, x: float, y: float, z: float) -> "SpinDirection":
        r = math.sqrt(x * x + y * y + z * z)
        if r == 0.0:
            raise ValueError("zero axis")
        x, y, z = x / r, y / r, z / r
        s = math.hypot(x, y)
        phi = math.atan2(y, x) if s > 0 else 0.0
        return cls(chi=math.atan2(s, z), phi=phi)


class OutcomeDistribution(NamedTuple):
    p_plus: float
    p_zero: float
    p_minus: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p_plus, self.p_zero, self.p_minus])


@dataclass(frozen=True)
class SpinObservable:
    matrix: np.ndarray
    # (eigenvalue, unit eigenvector) in the fixed order +1, 0, -1
    spectrum: tuple[tuple[int, np.ndarray], ...]
    label: str = ""

    def eigenvector(self, value: int) -> np.ndarray:
        for ev, vec in self.spectrum:
            if ev == value:
                return vec
        raise KeyError(value)

    def eigen_residual(self) -> float:
        return max(linalg.max_abs_diff(self.matrix @ v, ev * v) for ev, v in self.spectrum)

    def orthonormality_residual(self) -> float:
        vecs = np.array([v for _, v in self.spectrum])
        return linalg.max_abs_diff(vecs.conj() @ vecs.T, np.eye(3))

    def reconstruct(self) -> np.ndarray:
        return sum(ev * np.outer(v, v.conj()) for ev, v in self.spectrum)

    def squared(self) -> np.ndarray:
        return linalg.matmul(self.matrix, self.matrix)


def _observable(m, plus, zero, minus, label: str) -> SpinObservable:
    return SpinObservable(
        matrix=linalg.matrix(m),
        spectrum=((1, linalg.vector(plus)), (0, linalg.vector(zero)), (-1, linalg.vector(minus))),
        label=label,
    )


def spin_basic(axis: str) -> SpinObservable:
    axis = axis.upper()
    r = 1 / SQRT2
    if axis == "Z":
        return _observable(np.diag([1, 0, -1]), [1, 0, 0], [0, 1, 0], [0, 0, 1], "Z")
    if axis == "X":
        return _observable(
            [[0, r, 0], [r, 0, r], [0, r, 0]],
            [0.5, r, 0.5],
            [r, 0, -r],
            [0.5, -r, 0.5],
            "X",
        )
    if axis == "Y":
        return _observable(
            [[0, -1j * r, 0], [1j * r, 0, -1j * r], [0, 1j * r, 0]],
            [0.5, 1j * r, -0.5],
            [r, 0, r],
            [0.5, -1j * r, -0.5],
            "Y",
        )
    raise ValueError(f"unknown axis {axis!r}")


def spin_general(d: SpinDirection, label: str = "") -> SpinObservable:
    """``c S_Z + s S_theta`` with its closed-form eigenvectors."""
    c, s, t = d.c, d.s, d.theta
    tc = t.conjugate()
    m = [
        [c, s * tc / SQRT2, 0],
        [s * t / SQRT2, 0, s * tc / SQRT2],
        [0, s * t / SQRT2, -c],
    ]
    zero = [-s * tc / SQRT2, c, s * t / SQRT2]
    plus = [0.5 * (1 + c) * tc, 0.5 * s * SQRT2, 0.5 * (1 - c) * t]
    minus = [0.5 * (1 - c) * tc, -0.5 * s * SQRT2, 0.5 * (1 + c) * t]
    return _observable(m, plus, zero, minus, label)


def check_direction() -> SpinDirection:
    """Direction with ``c = 1/sqrt3`` and ``theta = zeta^3``."""
    return SpinDirection(chi=math.acos(1 / SQRT3), phi=3 * math.pi / 4)


def check_observable() -> SpinObservable:
    """The observable whose 0-eigenvector is ``unbiased_state(0)``."""
    return spin_general(check_direction(), label="CHECK")


def check_observable_squared() -> np.ndarray:
    return check_observable().squared()


def born(state: QutritState, obs: SpinObservable) -> OutcomeDistribution:
    psi = state.vector
    p = [abs(linalg.inner(obs.eigenvector(v), psi)) ** 2 for v in (1, 0, -1)]
    return OutcomeDistribution(*p)


def concurrence(state: QutritState) -> float:
    return abs(state.beta**2 - 2 * state.alpha * state.gamma)


def expectation(state: QutritState, m: np.ndarray) -> float:
    if not linalg.is_hermitian(m):
        raise ValueError("expectation requires a Hermitian matrix")
    z = linalg.expect(m, state.vector)
    if abs(z.imag) > linalg.ATOL:
        raise ValueError(f"expectation has imaginary part {z.imag!r}")
    return z.real


def fidelity_to_unbiased(state: QutritState) -> float:
    """``|<psi_0|state>|^2`` for ``psi_0 = unbiased_state(0)``."""
    z = state.alpha * ZETA.conjugate() + state.beta - state.gamma * ZETA
    return abs(z) ** 2 / 3


# --- uniqueness of the unbiased states ---------------------------------------

MAX_SEARCH_TOLERANCE = 1 / 6


def nine_probabilities(alpha, beta, gamma) -> np.ndarray:
    """Outcome probabilities of S_Z, S_X, S_Y, vectorised over amplitude arrays.

    Returns shape ``(9, ...)`` in the order Z(+,0,-), X(+,0,-), Y(+,0,-).
    """
    alpha, beta, gamma = np.broadcast_arrays(alpha, beta, gamma)
    out = []
    for obs in (spin_basic("Z"), spin_basic("X"), spin_basic("Y")):
        for _, v in obs.spectrum:
            vc = v.conj()
            out.append(np.abs(vc[0] * alpha + vc[1] * beta + vc[2] * gamma) ** 2)
    return np.array(out)


@dataclass
class UnbiasedSearch:
    resolution: int
    tolerance: float
    amplitudes: np.ndarray  # (n, 3) qualifying grid cells
    deviation: np.ndarray  # (n,) max |p - 1/3| per cell
    labels: np.ndarray  # (n,) cluster index per cell
    n_clusters: int
    matches: dict[int, int]  # unbiased index -> cluster index
    failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    @property
    def states(self) -> list[QutritState]:
        return [state_from_vector(a) for a in self.amplitudes]

    def representatives(self) -> list[QutritState]:
        """Lowest-deviation cell of each cluster."""
        reps = []
        for c in range(self.n_clusters):
            idx = np.flatnonzero(self.labels == c)
            reps.append(state_from_vector(self.amplitudes[idx[np.argmin(self.deviation[idx])]]))
        return reps


def _grid_mask(resolution: int, tol: float) -> np.ndarray:
    R = resolution
    phases = np.exp(2j * np.pi * np.arange(R) / R)
    mask = np.zeros((R + 1, R + 1, R, R), dtype=bool)
    for i in range(R + 1):
        j = np.arange(R + 1 - i)
        a = math.sqrt(i / R) * phases[None, :, None]
        b = np.sqrt(j / R)[:, None, None]
        g = np.sqrt(np.maximum(R - i - j, 0) / R)[:, None, None] * phases[None, None, :]
        dev = np.max(np.abs(nine_probabilities(a, b, g) - 1 / 3), axis=0)
        mask[i, : R + 1 - i] = dev < tol
    return mask


def _periodic_components(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """Connected components of ``mask`` with the two phase axes periodic."""
    R = mask.shape[2]
    padded = np.pad(mask, ((0, 0), (0, 0), (1, 1), (1, 1)), mode="wrap")
    lab, n = ndimage.label(padded, structure=np.ones((3, 3, 3, 3), dtype=bool))
    # map each padded position to its interior twin and merge the two labels
    wrap = (np.arange(R + 2) - 1) % R + 1
    twin = lab[:, :, wrap][:, :, :, wrap]
    sel = lab > 0
    graph = coo_matrix((np.ones(sel.sum()), (lab[sel], twin[sel])), shape=(n + 1, n + 1))
    _, comp = connected_components(graph, directed=False)
    interior = lab[:, :, 1:-1, 1:-1]
    cells = interior[interior > 0]
    roots, labels = np.unique(comp[cells], return_inverse=True)
    full = np.full(mask.shape, -1, dtype=np.int64)
    full[mask] = labels
    return full, len(roots)


def search_unbiased(grid_resolution: int, *, strict: bool = True) -> UnbiasedSearch:
    """Exhaustive grid scan for states with all nine probabilities near 1/3.

    Pure states are parameterised by ``|alpha|^2 = i/R`` and ``|beta|^2 = j/R``
    on a triangle, ``beta`` real and non-negative, and the phases of ``alpha``
    and ``gamma`` on uniform grids of ``R`` points. A cell qualifies when every
    probability is within ``min(10/R, 1/6)`` of 1/3. Qualifying cells are
    clustered (phase axes periodic) and each cluster must contain exactly one
    of the four unbiased states.

    With ``strict`` a structure other than four matched clusters raises
    :class:`VerificationFailure`; the partial result is attached to it.
    """
    R = int(grid_resolution)
    if R < 16:
        raise ValueError(f"grid resolution must be >= 16, got {R}")
    tol = min(10 / R, MAX_SEARCH_TOLERANCE)
    mask = _grid_mask(R, tol)
    full, n_clusters = _periodic_components(mask)

    idx = np.argwhere(mask)
    phases = np.exp(2j * np.pi * np.arange(R) / R)
    amps = np.stack(
        [
            np.sqrt(idx[:, 0] / R) * phases[idx[:, 2]],
            np.sqrt(idx[:, 1] / R).astype(np.complex128),
            np.sqrt(np.maximum(R - idx[:, 0] - idx[:, 1], 0) / R) * phases[idx[:, 3]],
        ],
        axis=1,
    )
    dev = np.max(np.abs(nine_probabilities(amps[:, 0], amps[:, 1], amps[:, 2]) - 1 / 3), axis=0)
    labels = full[mask]

    result = UnbiasedSearch(R, tol, amps, dev, labels, n_clusters, {})
    if len(amps) == 0:
        result.failure = "no grid cell qualifies"
    elif n_clusters != 4:
        result.failure = f"expected 4 clusters, found {n_clusters}"
    else:
        for k in range(4):
            fid = np.abs(amps @ unbiased_state(k).vector.conj()) ** 2
            best = int(np.argmax(fid))
            if 1 - fid[best] > tol:
                result.failure = f"unbiased state {k} not covered by any cell"
                break
            result.matches[k] = int(labels[best])
        else:
            if sorted(result.matches.values()) != [0, 1, 2, 3]:
                result.failure = f"clusters do not match unbiased states one-to-one: {result.matches}"
    if strict and result.failure:
        raise VerificationFailure(result.failure, result)
    return result
