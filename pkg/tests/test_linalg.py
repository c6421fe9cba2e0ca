import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qutrng import biphoton, linalg, qutrit

S2 = math.sqrt(2)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)


def mat2():
    return st.lists(cplx, min_size=4, max_size=4).map(lambda xs: np.array(xs).reshape(2, 2))


def vec(n):
    return st.lists(cplx, min_size=n, max_size=n).map(np.array)


def test_tensor_identity():
    assert linalg.max_abs_diff(linalg.tensor(np.eye(2), np.eye(2)), np.eye(4)) == 0


def test_tensor_diagonal_left_factor_is_slow_index():
    t = linalg.tensor(np.diag([1, -1]), np.eye(2))
    assert linalg.max_abs_diff(t, np.diag([1, 1, -1, -1])) == 0


def test_tensor_a1_b1_on_bell_state():
    # direct arithmetic: <ZZ> = 1 and <ZX> = 0 on (|00>+|11>)/sqrt2, so <Z (Z+X)/sqrt2> = 1/sqrt2
    t = linalg.tensor(biphoton.A1, biphoton.B1)
    assert abs(linalg.expect(t, biphoton.BELL_PHI_PLUS) - 1 / S2) <= 1e-12


def test_tensor_rejects_wrong_dims():
    with pytest.raises(linalg.DimensionError):
        linalg.tensor(np.eye(3), np.eye(2))


def test_apply_examples():
    v = linalg.vector([1, 2j, 3])
    assert linalg.max_abs_diff(linalg.apply(np.eye(3), v), v) == 0
    sz, sx = qutrit.spin_basic("Z").matrix, qutrit.spin_basic("X").matrix
    assert linalg.max_abs_diff(linalg.apply(sz, linalg.vector([0, 1, 0])), 0) == 0
    assert linalg.max_abs_diff(linalg.apply(sx, linalg.vector([1, 0, -1]) / S2), 0) <= 1e-15


def test_apply_dimension_mismatch():
    with pytest.raises(linalg.DimensionError):
        linalg.apply(np.eye(3), linalg.vector([1, 0]))


def test_inner_examples():
    e = np.eye(3, dtype=complex)
    assert linalg.inner(e[0], e[1]) == 0
    v = linalg.vector([1, 1j, 2])
    assert linalg.inner(v, v) == pytest.approx(6)
    a, b = qutrit.unbiased_state(0), qutrit.unbiased_state(1)
    # (zeta, 1, zeta^3) vs (zeta, -1, zeta^3): (1 - 1 + 1)/3
    assert abs(abs(linalg.inner(a.vector, b.vector)) - 1 / 3) <= 1e-12


def test_inner_dimension_mismatch():
    with pytest.raises(linalg.DimensionError):
        linalg.inner(linalg.vector([1, 0]), linalg.vector([1, 0, 0]))


def test_commutator_examples():
    u = np.array([[1, 2j], [3, 4]])
    assert linalg.max_abs_diff(linalg.commutator(u, u), 0) == 0
    sx, sy, sz = (qutrit.spin_basic(a).matrix for a in "XYZ")
    assert linalg.max_abs_diff(linalg.commutator(sx, sy), 1j * sz) <= 1e-12
    assert linalg.max_abs_diff(linalg.commutator(biphoton.A1, biphoton.A2), 2j * biphoton.PAULI_Y) <= 1e-12


def test_adjoint_trace_matmul():
    sy, sz = qutrit.spin_basic("Y").matrix, qutrit.spin_basic("Z").matrix
    assert linalg.max_abs_diff(linalg.adjoint(sy), sy) == 0
    assert linalg.trace(sz) == 0
    assert linalg.max_abs_diff(linalg.matmul(sz, sz), np.diag([1, 0, 1])) == 0


def test_constructors_reject_non_finite_and_bad_shapes():
    with pytest.raises(ValueError):
        linalg.vector([1, np.nan])
    with pytest.raises(ValueError):
        linalg.scalar(np.inf)
    with pytest.raises(linalg.DimensionError):
        linalg.vector([1] * 5)
    with pytest.raises(linalg.DimensionError):
        linalg.matrix(np.eye(5))


def test_constructed_arrays_are_read_only():
    v = linalg.vector([1, 0, 0])
    with pytest.raises(ValueError):
        v[0] = 2


@settings(max_examples=50)
@given(mat2(), mat2(), mat2(), mat2())
def test_tensor_mixed_product(u, v, u2, v2):
    lhs = linalg.tensor(u, v) @ linalg.tensor(u2, v2)
    rhs = linalg.tensor(u @ u2, v @ v2)
    assert linalg.max_abs_diff(lhs, rhs) <= 1e-12 * max(1.0, np.abs(rhs).max())


@given(st.sampled_from([2, 3, 4]).flatmap(lambda n: st.tuples(vec(n), vec(n))))
def test_inner_conjugate_symmetry(pair):
    a, b = pair
    assert abs(linalg.inner(a, b) - linalg.inner(b, a).conjugate()) <= 1e-12


@given(st.sampled_from([2, 3, 4]).flatmap(lambda n: st.tuples(vec(n * n), vec(n))))
def test_hermitian_trace_and_expectation_are_real(pair):
    flat, v = pair
    n = v.shape[0]
    m = flat.reshape(n, n)
    h = (m + m.conj().T) / 2
    assert abs(linalg.trace(h).imag) <= 1e-12
    assert abs(linalg.expect(h, v).imag) <= 1e-12 * max(1.0, abs(linalg.expect(h, v)))
