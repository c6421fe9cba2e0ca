"""Complex vector and matrix kernels for dimensions 2, 3 and 4.

Everything here is a thin, dimension-checked layer over numpy ``complex128``
arrays. Arrays returned by the constructors are read-only so they can be
shared freely.
"""
from __future__ import annotations

import numpy as np

ATOL = 1e-12
DIMS = (2, 3, 4)


class DimensionError(ValueError):
    pass


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def scalar(re: float, im: float = 0.0) -> complex:
    z = complex(re, im)
    if not np.isfinite(z):
        raise ValueError(f"non-finite scalar {z!r}")
    return z


def vector(entries) -> np.ndarray:
    v = np.array(entries, dtype=np.complex128)
    if v.ndim != 1 or v.shape[0] not in DIMS:
        raise DimensionError(f"expected a vector of length 2, 3 or 4, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return _freeze(v)


def matrix(entries) -> np.ndarray:
    m = np.array(entries, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in DIMS:
        raise DimensionError(f"expected a 2x2, 3x3 or 4x4 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return _freeze(m)


def identity(n: int) -> np.ndarray:
    if n not in DIMS:
        raise DimensionError(f"unsupported dimension {n}")
    return _freeze(np.eye(n, dtype=np.complex128))


def _same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two 2x2 matrices; the left factor is the slow index."""
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise DimensionError(f"tensor expects two 2x2 matrices, got {a.shape} and {b.shape}")
    return _freeze(np.kron(a, b))


def tensor_vec(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != (2,) or b.shape != (2,):
        raise DimensionError(f"tensor_vec expects two qubit vectors, got {a.shape} and {b.shape}")
    return _freeze(np.kron(a, b))


def apply(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    _same_dim(m, v)
    return _freeze(m @ v)


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    _same_dim(a, b)
    return complex(np.vdot(a, b))


def norm(v: np.ndarray) -> float:
    return float(np.sqrt(inner(v, v).real))


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _same_dim(a, b)
    return _freeze(a @ b)


def commutator(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    _same_dim(u, v)
    return _freeze(u @ v - v @ u)


def adjoint(m: np.ndarray) -> np.ndarray:
    return _freeze(m.conj().T.copy())


def trace(m: np.ndarray) -> complex:
    return complex(np.trace(m))


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _same_dim(a, b)
    return _freeze(a + b)


def scale(z: complex, m: np.ndarray) -> np.ndarray:
    return _freeze(z * m)


def outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``|a><b|``."""
    _same_dim(a, b)
    return _freeze(np.outer(a, b.conj()))


def is_hermitian(m: np.ndarray, atol: float = ATOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T)) <= atol)


def expect(m: np.ndarray, v: np.ndarray) -> complex:
    """``<v|m|v>`` without normalising ``v``."""
    return inner(v, apply(m, v))


def max_abs_diff(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
