"""The generation protocol: public trits in, certified output trits out.

Emissions are processed in fixed-size blocks. Every block draws its check
decisions, source choices and measurement uniforms from its own substreams
(keyed by role and block index), so a session is bit-identical whatever the
block-processing order or the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from qutrng import qutrit
from qutrng.sampler import RandomStream, SourceModel, outcome_probabilities, sample_trits

BLOCK_SIZE = 1 << 16
CHECK_BASIS = 3  # basis code used for check emissions; 0, 1, 2 are Z, X, Y


class Verdict(str, Enum):
    ACCEPT = "Accept"
    REJECT = "Reject"
    INCONCLUSIVE = "Inconclusive"


def _exact(x: float) -> Fraction:
    # repr round-trips, so 0.05 is read as 1/20 rather than its binary expansion
    return Fraction(repr(float(x)))


def required_check_count(epsilon: float, delta: float) -> int:
    """Number of checks ``ceil(1 / (4 eps^2 delta))``."""
    if not 0 < epsilon <= 0.5:
        raise ValueError(f"epsilon must lie in (0, 0.5], got {epsilon}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    e, d = _exact(epsilon), _exact(delta)
    return math.ceil(1 / (4 * e * e * d))


def chebyshev_failure_bound(F: float, ell: int, epsilon: float) -> float:
    """Chebyshev bound on ``P(|Y - F| >= eps)`` for the mean of ``ell`` checks."""
    if not 0 <= F <= 1:
        raise ValueError("F must lie in [0, 1]")
    if ell < 1 or epsilon <= 0:
        raise ValueError("need ell >= 1 and epsilon > 0")
    return min(1.0, F * (1 - F) / (ell * epsilon**2))


@dataclass(frozen=True)
class GeneratorConfig:
    epsilon: float = 0.05
    delta: float = 0.1
    check_rate: float = 0.1
    target_output: int = 1000
    fidelity_threshold: float = 1.0

    def __post_init__(self):
        if not 0 < self.epsilon <= 0.5:
            raise ValueError(f"epsilon must lie in (0, 0.5], got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0 <= self.check_rate < 1:
            raise ValueError(f"check_rate must lie in [0, 1), got {self.check_rate}")
        if self.target_output < 0:
            raise ValueError("target_output must be non-negative")
        if not 0 < self.fidelity_threshold <= 1:
            raise ValueError(f"fidelity_threshold must lie in (0, 1], got {self.fidelity_threshold}")

    @property
    def required_checks(self) -> int:
        return required_check_count(self.epsilon, self.delta)


@dataclass
class SessionReport:
    emitted: int
    checks: int
    check_zero_count: int
    Y: float | None
    required_checks: int
    verdict: Verdict
    epsilon: float
    delta: float
    check_rate: float
    threshold: float
    seed: int
    target_output: int
    output_count: int
    public_consumed: int
    discarded: int
    public_exhausted: bool
    public_seed: int | None = None
    stats: dict | None = field(default=None)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        if d["stats"] is None:
            del d["stats"]
        return d


@dataclass
class _Block:
    index: int
    n: int  # emissions used from this block
    is_check: np.ndarray  # (n,) bool
    is_output: np.ndarray  # (n,) bool; generation emissions past the target are neither
    basis: np.ndarray  # (n,) int: public trit for outputs, CHECK_BASIS for checks


def _plan(public: np.ndarray, cfg: GeneratorConfig, rng: RandomStream, block_size: int):
    """Walk the check-selection substream block by block and decide where to stop."""
    ell = cfg.required_checks
    checks = outputs = emitted = 0
    exhausted = False
    blocks = []
    sel = rng.split("check-selection")
    b = 0
    while True:
        if outputs >= cfg.target_output and (checks >= ell or cfg.check_rate == 0):
            break
        u = sel.split(b).uniform(block_size)
        is_check = u < cfg.check_rate
        gen = ~is_check
        cum_checks = checks + np.cumsum(is_check)
        cum_gen = outputs + np.cumsum(gen)
        is_output = gen & (cum_gen <= cfg.target_output)
        cum_out = np.minimum(cum_gen, cfg.target_output)
        done = (cum_out >= cfg.target_output) & (cum_checks >= ell)
        if cfg.check_rate == 0:
            done |= cum_out >= cfg.target_output
        stop = int(np.argmax(done)) + 1 if done.any() else block_size
        short = is_output & (cum_gen > len(public))
        if short[:stop].any():
            stop = int(np.argmax(short))
            exhausted = True
        is_check, is_output = is_check[:stop], is_output[:stop]
        basis = np.full(stop, CHECK_BASIS, dtype=np.intp)
        n_out = int(is_output.sum())
        basis[is_output] = public[outputs : outputs + n_out]
        blocks.append(_Block(b, stop, is_check, is_output, basis))
        checks += int(is_check.sum())
        outputs += n_out
        emitted += stop
        b += 1
        if exhausted or stop < block_size:
            break
    return blocks, exhausted


def _measure_block(block: _Block, src: SourceModel, table: np.ndarray, rng: RandomStream):
    comp = np.zeros(block.n, dtype=np.intp)
    if len(src.components) > 1:
        cum = np.cumsum(src.weights)
        cum[-1] = 1.0
        u_src = rng.split("source").split(block.index).uniform(block.n)
        comp = np.minimum(np.searchsorted(cum, u_src, side="right"), len(cum) - 1)
    u = rng.split("measurement").split(block.index).uniform(block.n)
    trits = sample_trits(table[comp, block.basis], u)
    return trits[block.is_output], trits[block.is_check]


def probability_table(src: SourceModel) -> np.ndarray:
    """``table[component, basis]`` = outcome probabilities for bases Z, X, Y, CHECK."""
    observables = [qutrit.spin_basic("Z"), qutrit.spin_basic("X"), qutrit.spin_basic("Y"), qutrit.check_observable()]
    return np.array([[outcome_probabilities(s, o) for o in observables] for s in src.states])


def run_session(
    src: SourceModel,
    public,
    cfg: GeneratorConfig,
    rng: RandomStream,
    *,
    block_size: int = BLOCK_SIZE,
    jobs: int = 1,
) -> tuple[np.ndarray, SessionReport]:
    """Run one generation session.

    Each emission is a check with probability ``cfg.check_rate`` (measured with
    the check observable; the 0-outcome counts as a success) or otherwise a
    generation emission that consumes the next public trit ``r`` and measures
    S_Z, S_X or S_Y for ``r = 0, 1, 2``. Generation emissions arriving after
    the output target is met are discarded unmeasured. The session stops once
    both the output target and the required check count are reached, or the
    public stream runs out.
    """
    public = np.asarray(public, dtype=np.uint8)
    if public.size and public.max() > 2:
        raise ValueError("public stream must contain trits 0, 1, 2")
    blocks, exhausted = _plan(public, cfg, rng, block_size)
    table = probability_table(src)

    def work(block):
        return _measure_block(block, src, table, rng)

    if jobs > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, blocks))
    else:
        results = [work(b) for b in blocks]

    out = np.concatenate([r[0] for r in results]) if results else np.empty(0, np.uint8)
    check_trits = np.concatenate([r[1] for r in results]) if results else np.empty(0, np.uint8)
    checks = int(check_trits.size)
    zeros = int(np.count_nonzero(check_trits == qutrit.OUTCOME_TRIT[0]))
    Y = zeros / checks if checks else None
    ell = cfg.required_checks
    emitted = sum(b.n for b in blocks)

    if checks < ell or exhausted:
        verdict = Verdict.INCONCLUSIVE
    elif Y >= cfg.fidelity_threshold - cfg.epsilon:
        verdict = Verdict.ACCEPT
    else:
        verdict = Verdict.REJECT

    report = SessionReport(
        emitted=emitted,
        checks=checks,
        check_zero_count=zeros,
        Y=Y,
        required_checks=ell,
        verdict=verdict,
        epsilon=cfg.epsilon,
        delta=cfg.delta,
        check_rate=cfg.check_rate,
        threshold=cfg.fidelity_threshold,
        seed=rng.seed,
        target_output=cfg.target_output,
        output_count=int(out.size),
        public_consumed=int(out.size),
        discarded=emitted - checks - int(out.size),
        public_exhausted=exhausted,
    )
    return out.astype(np.uint8), report
