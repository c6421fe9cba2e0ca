"""Biphoton (symmetric two-qubit) picture of a qutrit and the CHSH machinery.

Two-qubit basis order is ``|00>, |01>, |10>, |11>``; the qutrit basis
``|+>, |0>, |->`` is identified with ``|00>, (|01>+|10>)/sqrt2, |11>``.
"""
from __future__ import annotations

import math

import numpy as np

from qutrng import linalg
from qutrng.qutrit import QutritState

SQRT2 = math.sqrt(2.0)

I2 = linalg.identity(2)
I4 = linalg.identity(4)
PAULI_X = linalg.matrix([[0, 1], [1, 0]])
PAULI_Y = linalg.matrix([[0, -1j], [1j, 0]])
PAULI_Z = linalg.matrix([[1, 0], [0, -1]])

# the standard maximally violating settings
A1 = PAULI_Z
A2 = PAULI_X
B1 = linalg.scale(1 / SQRT2, linalg.add(A1, A2))
B2 = linalg.scale(1 / SQRT2, A1 - A2)

# columns: |00>, (|01>+|10>)/sqrt2, |11>
ISOMETRY = linalg._freeze(
    np.array(
        [[1, 0, 0], [0, 1 / SQRT2, 0], [0, 1 / SQRT2, 0], [0, 0, 1]],
        dtype=np.complex128,
    )
)
SINGLET = linalg.vector([0, 1 / SQRT2, -1 / SQRT2, 0])
SWAP = linalg.matrix([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
BELL_PHI_PLUS = linalg.vector([1 / SQRT2, 0, 0, 1 / SQRT2])


class NotObservableError(ValueError):
    pass


class SymmetryError(ValueError):
    pass


def is_involution(u: np.ndarray, atol: float = linalg.ATOL) -> bool:
    """``u`` is a Hermitian {+-1}-valued observable."""
    return linalg.is_hermitian(u, atol) and linalg.max_abs_diff(u @ u, np.eye(u.shape[0])) <= atol


def _require_observables(*ops: np.ndarray) -> None:
    for op in ops:
        if op.shape != (2, 2):
            raise linalg.DimensionError(f"expected a 2x2 qubit operator, got {op.shape}")
        if not is_involution(op):
            raise NotObservableError("CHSH settings must be Hermitian and square to the identity")


def gamma(u: np.ndarray) -> np.ndarray:
    """``(U x I + I x U) / 2``."""
    return linalg.scale(0.5, linalg.add(linalg.tensor(u, I2), linalg.tensor(I2, u)))


def sym_embed(q: QutritState) -> np.ndarray:
    return linalg._freeze(ISOMETRY @ q.vector)


def sym_restrict(op: np.ndarray, atol: float = linalg.ATOL) -> np.ndarray:
    """Compress a swap-symmetric two-qubit operator to the qutrit space."""
    if op.shape != (4, 4):
        raise linalg.DimensionError(f"expected a 4x4 operator, got {op.shape}")
    if linalg.max_abs_diff(linalg.commutator(SWAP, op), 0) > atol:
        raise SymmetryError("operator does not commute with the qubit swap")
    return linalg.matrix(ISOMETRY.conj().T @ op @ ISOMETRY)


def chsh_operator(a1, a2, b1, b2) -> np.ndarray:
    """``A1 x B1 + A1 x B2 + A2 x B1 - A2 x B2``."""
    _require_observables(a1, a2, b1, b2)
    t = linalg.tensor
    return linalg.matrix(t(a1, b1) + t(a1, b2) + t(a2, b1) - t(a2, b2))


def chsh_symmetrized(a1, a2, b1, b2) -> np.ndarray:
    """Same combination with every factor replaced by its symmetrized image."""
    _require_observables(a1, a2, b1, b2)
    ga1, ga2, gb1, gb2 = (gamma(x) for x in (a1, a2, b1, b2))
    return linalg.matrix(ga1 @ gb1 + ga1 @ gb2 + ga2 @ gb1 - ga2 @ gb2)


def chsh_spin(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``U(U+V)/sqrt2 + U(U-V)/sqrt2 + V(U+V)/sqrt2 - V(U-V)/sqrt2``.

    Algebraically this is ``sqrt2 (U^2 + V^2)``; the expanded form is kept so
    that the identity can be checked rather than assumed.
    """
    if not (linalg.is_hermitian(u) and linalg.is_hermitian(v)):
        raise ValueError("chsh_spin requires Hermitian operators")
    p = (u + v) / SQRT2
    m = (u - v) / SQRT2
    return linalg.matrix(u @ p + u @ m + v @ p - v @ m)


def _eigvec(u: np.ndarray, eps: int) -> np.ndarray | None:
    proj = 0.5 * (I2 + eps * u)
    col = proj[:, int(np.argmax(np.linalg.norm(proj, axis=0)))]
    n = np.linalg.norm(col)
    return None if n < 0.5 else col / n


def gamma_eigenpair(u: np.ndarray) -> list[tuple[float, np.ndarray]]:
    """Product eigenvectors ``|v_e> x |v_h>`` of ``gamma(u)`` with eigenvalue ``(e+h)/2``.

    Order: (+,+), (+,-), (-,+), (-,-). If ``u = +-I`` one eigenspace is the
    whole qubit space and the computational basis is used for it.
    """
    _require_observables(u)
    vecs = {1: _eigvec(u, 1), -1: _eigvec(u, -1)}
    basis = [np.array([1, 0], dtype=np.complex128), np.array([0, 1], dtype=np.complex128)]
    pairs = []
    if vecs[1] is None or vecs[-1] is None:
        eps = 1 if vecs[-1] is None else -1
        for a in basis:
            for b in basis:
                pairs.append((float(eps), linalg.tensor_vec(a, b)))
        return pairs
    for e in (1, -1):
        for h in (1, -1):
            pairs.append(((e + h) / 2, linalg.tensor_vec(vecs[e], vecs[h])))
    return pairs


def chsh_values(q: QutritState, a1=A1, a2=A2, b1=B1, b2=B2) -> tuple[float, float, float]:
    """Qubit-pair CHSH, symmetrized CHSH, and the restricted (qutrit) form for ``q``."""
    psi = sym_embed(q)
    pair = linalg.expect(chsh_operator(a1, a2, b1, b2), psi).real
    sym_op = chsh_symmetrized(a1, a2, b1, b2)
    sym = linalg.expect(sym_op, psi).real
    spin = linalg.expect(sym_restrict(sym_op), q.vector).real
    return pair, sym, spin
