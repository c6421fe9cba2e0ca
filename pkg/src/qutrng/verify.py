"""Numerical reproduction of the closed-form identities the generator relies on."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from qutrng import biphoton, linalg, qutrit

TSIRELSON = 2 * math.sqrt(2)
SEED = 20240611


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}  ({self.detail})"


# --- seeded random inputs -----------------------------------------------------


def random_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    m = random_matrix(rng, n)
    return (m + m.conj().T) / 2


def random_observable2(rng: np.random.Generator) -> np.ndarray:
    """Sign of the spectrum of a random 2x2 Hermitian matrix, in closed form."""
    h = random_hermitian(rng, 2)
    a0 = np.trace(h).real / 2
    a = np.array([h[0, 1].real, -h[0, 1].imag, (h[0, 0] - h[1, 1]).real / 2])
    r = np.linalg.norm(a)
    if r <= abs(a0):
        return np.sign(a0) * np.eye(2, dtype=np.complex128)
    return (a[0] * biphoton.PAULI_X + a[1] * biphoton.PAULI_Y + a[2] * biphoton.PAULI_Z) / r


def random_state(rng: np.random.Generator) -> qutrit.QutritState:
    return qutrit.make_state(*(rng.normal(size=3) + 1j * rng.normal(size=3)))


def random_direction(rng: np.random.Generator) -> qutrit.SpinDirection:
    return qutrit.SpinDirection.from_axis(*rng.normal(size=3))


def random_orthogonal_triple(rng: np.random.Generator) -> list[qutrit.SpinDirection]:
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    return [qutrit.SpinDirection.from_axis(*q[:, k]) for k in range(3)]


# --- checks -------------------------------------------------------------------


def _basic():
    return {a: qutrit.spin_basic(a) for a in "ZXY"}


def check_spin_eigenstructure(rng):
    err = 0.0
    for obs in _basic().values():
        err = max(
            err,
            obs.eigen_residual(),
            obs.orthonormality_residual(),
            linalg.max_abs_diff(obs.reconstruct(), obs.matrix),
            0.0 if linalg.is_hermitian(obs.matrix) else 1.0,
        )
    return err <= 1e-12, f"max residual {err:.2e}"


def check_spin_commutation(rng):
    s = _basic()
    err = max(
        linalg.max_abs_diff(linalg.commutator(s["X"].matrix, s["Y"].matrix), 1j * s["Z"].matrix),
        linalg.max_abs_diff(linalg.commutator(s["Y"].matrix, s["Z"].matrix), 1j * s["X"].matrix),
        linalg.max_abs_diff(linalg.commutator(s["Z"].matrix, s["X"].matrix), 1j * s["Y"].matrix),
    )
    return err <= 1e-12, f"max residual {err:.2e}"


def check_casimir(rng):
    s = _basic()
    err = linalg.max_abs_diff(sum(o.squared() for o in s.values()), 2 * np.eye(3))
    for _ in range(100):
        triple = [qutrit.spin_general(d).squared() for d in random_orthogonal_triple(rng)]
        err = max(err, linalg.max_abs_diff(sum(triple), 2 * np.eye(3)))
    return err <= 1e-12, f"basic + 100 random triples, max residual {err:.2e}"


def check_nine_probabilities(rng):
    s = _basic()
    err = max(
        abs(p - 1 / 3)
        for k in range(4)
        for obs in s.values()
        for p in qutrit.born(qutrit.unbiased_state(k), obs)
    )
    return err <= 1e-12, f"4 states x 3 bases, max |p - 1/3| {err:.2e}"


def check_unbiased_concurrence(rng):
    err = max(abs(qutrit.concurrence(qutrit.unbiased_state(k)) - 1) for k in range(4))
    return err <= 1e-12, f"max |C - 1| {err:.2e}"


def check_gamma_spin(rng):
    s = _basic()
    err = max(
        linalg.max_abs_diff(biphoton.sym_restrict(biphoton.gamma(biphoton.A1)), s["Z"].matrix),
        linalg.max_abs_diff(biphoton.sym_restrict(biphoton.gamma(biphoton.A2)), s["X"].matrix),
    )
    return err <= 1e-12, f"max residual {err:.2e}"


def check_gamma_product(rng):
    t, g = linalg.tensor, biphoton.gamma
    err = 0.0
    pairs = [(biphoton.A1, biphoton.A2)] + [(random_matrix(rng, 2), random_matrix(rng, 2)) for _ in range(100)]
    for u, v in pairs:
        rhs = 2 * g(u) @ g(v) - 0.5 * (t(u, v) + t(v, u))
        err = max(err, linalg.max_abs_diff(g(u @ v), rhs))
    return err <= 1e-12, f"101 pairs, max residual {err:.2e}"


def check_gamma_commutator(rng):
    g = biphoton.gamma
    err = 0.0
    pairs = [(biphoton.A1, biphoton.A2)] + [(random_matrix(rng, 2), random_matrix(rng, 2)) for _ in range(100)]
    for u, v in pairs:
        err = max(err, linalg.max_abs_diff(g(linalg.commutator(u, v)), 2 * linalg.commutator(g(u), g(v))))
    return err <= 1e-12, f"101 pairs, max residual {err:.2e}"


def check_gamma_commuting(rng):
    g = biphoton.gamma
    ok = True
    for _ in range(50):
        u = random_hermitian(rng, 2)
        v = 0.7 * u + 0.3 * u @ u  # commutes with u
        w = random_hermitian(rng, 2)
        ok &= np.max(np.abs(linalg.commutator(g(u), g(v)))) <= 1e-12
        ok &= (np.max(np.abs(linalg.commutator(u, w))) > 1e-6) == (np.max(np.abs(linalg.commutator(g(u), g(w)))) > 1e-6)
    return bool(ok), "50 commuting and 50 generic pairs"


def check_chsh_spin(rng):
    s = _basic()
    err = linalg.max_abs_diff(
        biphoton.chsh_spin(s["Z"].matrix, s["X"].matrix), math.sqrt(2) * (2 * np.eye(3) - s["Y"].squared())
    )
    for _ in range(100):
        u, v = random_hermitian(rng, 3), random_hermitian(rng, 3)
        err = max(err, linalg.max_abs_diff(biphoton.chsh_spin(u, v), math.sqrt(2) * (u @ u + v @ v)))
    return err <= 1e-12, f"fixed + 100 random pairs, max residual {err:.2e}"


def check_tsirelson(rng):
    op = biphoton.chsh_operator(biphoton.A1, biphoton.A2, biphoton.B1, biphoton.B2)
    val = linalg.expect(op, biphoton.BELL_PHI_PLUS).real
    return abs(val - TSIRELSON) <= 1e-12, f"value {val:.15f}"


def check_chsh_symmetrized_max(rng):
    args = (biphoton.A1, biphoton.A2, biphoton.B1, biphoton.B2)
    op = biphoton.chsh_symmetrized(*args)
    best = qutrit.make_state(1, 0, 1)
    at_max = linalg.expect(op, biphoton.sym_embed(best)).real
    restricted = biphoton.sym_restrict(op)

    def value(q):
        return linalg.expect(restricted, q.vector).real

    samples = [value(random_state(rng)) for _ in range(10_000)]

    def neg(x):
        return -value(qutrit.make_state(x[0] + 1j * x[1], x[2] + 1j * x[3], x[4] + 1j * x[5]))

    found = -min(
        minimize(neg, rng.normal(size=6), method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14}).fun
        for _ in range(5)
    )
    ok = abs(at_max - TSIRELSON) <= 1e-12 and max(samples) <= TSIRELSON + 1e-9 and abs(found - TSIRELSON) <= 1e-6
    return ok, f"at maximizer {at_max:.15f}, random max {max(samples):.12f}, local search {found:.12f}"


def check_general_spin(rng):
    err = conc = 0.0
    for _ in range(100):
        obs = qutrit.spin_general(random_direction(rng))
        err = max(err, obs.eigen_residual(), obs.orthonormality_residual(), linalg.max_abs_diff(obs.reconstruct(), obs.matrix))
        for ev, v in obs.spectrum:
            c = qutrit.concurrence(qutrit.QutritState(*v))
            conc = max(conc, abs(c - (1.0 if ev == 0 else 0.0)))
    return err <= 1e-10 and conc <= 1e-10, f"100 directions, eigen residual {err:.2e}, concurrence residual {conc:.2e}"


def check_check_observable(rng):
    obs = qutrit.check_observable()
    z = qutrit.ZETA
    expected = np.array([[1, -z, 0], [-z.conjugate(), 0, -z], [0, -z.conjugate(), -1]]) / math.sqrt(3)
    err = linalg.max_abs_diff(obs.matrix, expected)
    ray = qutrit.unbiased_state(0).same_ray(qutrit.QutritState(*obs.eigenvector(0)))
    return err <= 1e-12 and ray, f"matrix residual {err:.2e}, 0-eigenvector is unbiased0: {ray}"


def check_state_test(rng):
    s2 = qutrit.check_observable_squared()
    at = qutrit.expectation(qutrit.unbiased_state(0), s2)
    bad = 0
    for _ in range(10_000):
        q = random_state(rng)
        if qutrit.fidelity_to_unbiased(q) > 1 - 1e-9:
            continue
        bad += qutrit.expectation(q, s2) <= 1e-12
    return abs(at) <= 1e-12 and bad == 0, f"<S^2> at unbiased0 {at:.2e}, non-positive among 10^4 others: {bad}"


def check_fidelity_formula(rng):
    ref = qutrit.unbiased_state(0).vector
    err = 0.0
    for _ in range(1000):
        q = random_state(rng)
        err = max(err, abs(qutrit.fidelity_to_unbiased(q) - abs(linalg.inner(ref, q.vector)) ** 2))
    return err <= 1e-12, f"1000 states, max residual {err:.2e}"


CHECKS: list[tuple[str, Callable]] = [
    ("spin observables eigenstructure", check_spin_eigenstructure),
    ("spin commutation relations", check_spin_commutation),
    ("Casimir = 2I", check_casimir),
    ("nine probabilities = 1/3", check_nine_probabilities),
    ("unbiased concurrence = 1", check_unbiased_concurrence),
    ("Gamma(A1) = S_Z, Gamma(A2) = S_X", check_gamma_spin),
    ("Gamma product rule", check_gamma_product),
    ("Gamma commutator rule", check_gamma_commutator),
    ("Gamma commutes iff operators commute", check_gamma_commuting),
    ("CHSH(U,V) = sqrt2 (U^2 + V^2)", check_chsh_spin),
    ("CHSH Tsirelson value = 2sqrt2", check_tsirelson),
    ("CHSH symmetrized max = 2sqrt2", check_chsh_symmetrized_max),
    ("general spin eigenvectors", check_general_spin),
    ("check observable", check_check_observable),
    ("state test <S^2> = 0 only at unbiased0", check_state_test),
    ("fidelity formula = overlap", check_fidelity_formula),
]


def run_checks(resolution: int = 64, seed: int = SEED) -> list[CheckResult]:
    results = []
    for k, (name, fn) in enumerate(CHECKS):
        rng = np.random.default_rng([seed, k])
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a broken identity may surface as any error
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail))
    results.append(check_uniqueness(resolution))
    return results


def check_uniqueness(resolution: int) -> CheckResult:
    name = f"unbiased states unique (grid {resolution})"
    try:
        res = qutrit.search_unbiased(resolution)
    except qutrit.VerificationFailure as exc:
        return CheckResult(name, False, str(exc))
    worst = max(1 - qutrit.concurrence(s) for s in res.states)
    ok = worst <= 10 / resolution
    return CheckResult(
        name,
        ok,
        f"{res.n_clusters} clusters, {len(res.amplitudes)} cells, tolerance {res.tolerance:.4f}, max |C - 1| {worst:.3f}",
    )
