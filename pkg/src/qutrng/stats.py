"""Trit-stream statistics and an empirical check of the fidelity estimator."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from qutrng import qutrit
from qutrng.generator import required_check_count
from qutrng.sampler import RandomStream, SourceModel, outcome_probabilities, sample_trits

# chi-square critical value, 2 degrees of freedom, 1% significance
CHI2_CRITICAL = 9.21
LOG2_3 = math.log2(3)


@dataclass(frozen=True)
class StreamStats:
    n: int
    counts: tuple[int, int, int]
    frequencies: tuple[float, float, float]
    entropy_bits: float
    chi2: float
    chi2_pass: bool

    def to_dict(self) -> dict:
        return asdict(self)


def entropy_from_counts(counts) -> float:
    """Plug-in Shannon entropy in bits, with ``0 log 0 = 0``."""
    c = np.asarray(counts, dtype=float)
    f = c[c > 0] / c.sum()
    return float(max(0.0, -np.sum(f * np.log2(f))))


def analyze(stream) -> StreamStats:
    s = np.asarray(stream)
    if s.size == 0:
        raise ValueError("cannot analyze an empty stream")
    if s.min() < 0 or s.max() > 2:
        raise ValueError("stream must contain trits 0, 1, 2")
    counts = np.bincount(s.astype(np.intp), minlength=3)
    n = int(s.size)
    expected = n / 3
    chi2 = float(np.sum((counts - expected) ** 2) / expected)
    return StreamStats(
        n=n,
        counts=tuple(int(c) for c in counts),
        frequencies=tuple(float(c / n) for c in counts),
        entropy_bits=entropy_from_counts(counts),
        chi2=chi2,
        chi2_pass=chi2 < CHI2_CRITICAL,
    )


def perturbed_source(F_target: float) -> SourceModel:
    """Ensemble of the unbiased state (weight F) and an orthogonal state (weight 1 - F).

    The orthogonal state is the +1-eigenvector of the check observable, so the
    mixture fidelity is exactly ``F_target``.
    """
    if not 0 <= F_target <= 1:
        raise ValueError("F_target must lie in [0, 1]")
    ortho = qutrit.state_from_vector(qutrit.check_observable().eigenvector(1))
    comps = [(w, s) for w, s in ((F_target, qutrit.unbiased_state(0)), (1 - F_target, ortho)) if w > 0]
    if len(comps) == 1:
        return SourceModel.fixed(comps[0][1])
    return SourceModel.ensemble(comps)


def validate_estimator(F_target: float, epsilon: float, delta: float, trials: int, rng: RandomStream) -> float:
    """Fraction of check campaigns whose estimate misses ``F_target`` by more than ``epsilon``.

    Each trial measures ``required_check_count(epsilon, delta)`` states drawn
    from :func:`perturbed_source` with the check observable.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    ell = required_check_count(epsilon, delta)
    src = perturbed_source(F_target)
    check = qutrit.check_observable()
    probs = np.array([outcome_probabilities(s, check) for s in src.states])
    cum = np.cumsum(src.weights)
    cum[-1] = 1.0
    zero_trit = qutrit.OUTCOME_TRIT[0]
    failures = 0
    for t in range(trials):
        sub = rng.split(t)
        comp = np.minimum(np.searchsorted(cum, sub.split("source").uniform(ell), side="right"), len(cum) - 1)
        trits = sample_trits(probs[comp], sub.split("measurement").uniform(ell))
        Y = np.count_nonzero(trits == zero_trit) / ell
        failures += abs(Y - F_target) > epsilon
    return failures / trials
