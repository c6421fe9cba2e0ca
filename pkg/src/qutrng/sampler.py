"""Seeded randomness and Born-rule sampling of qutrit measurements."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from qutrng import qutrit
from qutrng.qutrit import QutritState, SpinObservable

MASK64 = (1 << 64) - 1
# probabilities below this are round-off from exact zeros
SNAP = 1e-14


def label_key(label: str | int) -> int:
    if isinstance(label, int):
        if label < 0:
            raise ValueError("integer labels must be non-negative")
        return label
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def parse_seed(text: str) -> int:
    """Decimal or ``0x`` hexadecimal seed in ``[0, 2**64)``."""
    t = text.strip().lower()
    value = int(t, 16) if t.startswith("0x") else int(t, 10)
    if not 0 <= value <= MASK64:
        raise ValueError(f"seed {text!r} outside the 64-bit range")
    return value


class RandomStream:
    """Counter-based (Philox) stream with labelled, non-overlapping substreams.

    ``split(label)`` derives a child keyed on the label path only, so the
    child's output never depends on how much of the parent was consumed.
    Single-owner: do not share one instance between threads.
    """

    def __init__(self, seed: int, path: Sequence[int] = ()):
        if not 0 <= seed <= MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = int(seed)
        self.path = tuple(path)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self._gen = np.random.Generator(np.random.Philox(ss))
        self._trits = np.empty(0, dtype=np.uint8)

    def split(self, label: str | int) -> "RandomStream":
        return RandomStream(self.seed, self.path + (label_key(label),))

    def uniform(self, n: int | None = None):
        return self._gen.random(n)

    def trits(self, n: int) -> np.ndarray:
        """``n`` uniform trits by rejection on 2-bit chunks (value 3 rejected)."""
        while len(self._trits) < n:
            need = n - len(self._trits)
            words = self._gen.integers(0, 1 << 64, size=need // 24 + 1, dtype=np.uint64, endpoint=False)
            chunks = (words[:, None] >> (2 * np.arange(32, dtype=np.uint64))) & np.uint64(3)
            chunks = chunks.ravel().astype(np.uint8)
            self._trits = np.concatenate([self._trits, chunks[chunks < 3]])
        out, self._trits = self._trits[:n], self._trits[n:]
        return out


@dataclass(frozen=True)
class SourceModel:
    """Qutrit emitter: ``ideal``, ``fixed`` or ``ensemble`` of pure states."""

    kind: str
    components: tuple[tuple[float, QutritState], ...]

    def __post_init__(self):
        if self.kind not in ("ideal", "fixed", "ensemble"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if not self.components:
            raise ValueError("source needs at least one component")
        w = np.array([c[0] for c in self.components], dtype=float)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("ensemble weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"ensemble weights sum to {w.sum()!r}, expected 1")

    @classmethod
    def ideal(cls) -> "SourceModel":
        return cls("ideal", ((1.0, qutrit.unbiased_state(0)),))

    @classmethod
    def fixed(cls, state: QutritState) -> "SourceModel":
        return cls("fixed", ((1.0, state),))

    @classmethod
    def ensemble(cls, components: Iterable[tuple[float, QutritState]]) -> "SourceModel":
        return cls("ensemble", tuple((float(w), s) for w, s in components))

    @property
    def weights(self) -> np.ndarray:
        return np.array([c[0] for c in self.components], dtype=float)

    @property
    def states(self) -> list[QutritState]:
        return [c[1] for c in self.components]

    def mixture_fidelity(self) -> float:
        return float(sum(w * qutrit.fidelity_to_unbiased(s) for w, s in self.components))


def draw_indices(src: SourceModel, rng: RandomStream, n: int) -> np.ndarray:
    """Component index for each of ``n`` emissions."""
    if len(src.components) == 1:
        return np.zeros(n, dtype=np.intp)
    cum = np.cumsum(src.weights)
    cum[-1] = 1.0
    idx = np.searchsorted(cum, rng.uniform(n), side="right")
    return np.minimum(idx, len(cum) - 1)


def draw_state(src: SourceModel, rng: RandomStream) -> QutritState:
    return src.components[int(draw_indices(src, rng, 1)[0])][1]


@dataclass(frozen=True)
class MeasurementRecord:
    outcome: int  # trit: 0 <-> +1, 1 <-> 0, 2 <-> -1
    basis_label: str
    probability_used: float

    @property
    def eigenvalue(self) -> int:
        return qutrit.TRIT_OUTCOME[self.outcome]


def outcome_probabilities(state: QutritState, obs: SpinObservable) -> np.ndarray:
    """Born probabilities in order (+1, 0, -1) with round-off zeros snapped to 0."""
    p = np.clip(qutrit.born(state, obs).as_array(), 0.0, None)
    p[p < SNAP] = 0.0
    return p / p.sum()


def sample_trits(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Cumulative comparison in the order (+1, 0, -1); ``probs`` has shape (n, 3)."""
    probs = np.atleast_2d(probs)
    c1 = probs[:, 0]
    c2 = probs[:, 0] + probs[:, 1]
    c2 = np.where(probs[:, 2] == 0.0, np.inf, c2)
    return ((u >= c1).astype(np.uint8) + (u >= c2).astype(np.uint8)).astype(np.uint8)


def measure(state: QutritState, obs: SpinObservable, rng: RandomStream) -> MeasurementRecord:
    p = outcome_probabilities(state, obs)
    trit = int(sample_trits(p[None, :], np.array([rng.uniform()]))[0])
    return MeasurementRecord(trit, obs.label or "?", float(p[trit]))
