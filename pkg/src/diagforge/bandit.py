"""Two-arm best-arm identification with a fixed elimination schedule.

The procedure runs in epochs ``r = 1, 2, ...`` with shrinking tolerance
``eps_r = 2^-r`` and per-epoch confidence ``delta_r = 6*delta / (pi^2 r^2)``
(the shares sum to ``delta``).  Each epoch pulls both arms up to a cumulative
``n_r = ceil(8 ln(2/delta_r) / eps_r^2)`` — a two-sided Hoeffding bound — and
declares the leader as soon as the empirical means differ by more than
``eps_r``.  With a true gap the wrong arm is declared with probability at
most ``delta``; with no gap the procedure usually never declares, so a pull
cap converts non-termination into an explicit ``CapExceeded`` result.

Pure-Bernoulli arms are sampled in bulk with numpy over the same
counter-based stream as scalar draws, so results are identical either way.
Arms backed by a callable (e.g. a verifier invocation) are pulled one at a
time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .lang.rng import GAMMA, MASK64, split_seed

DEFAULT_DELTA = Fraction(1, 100)
DEFAULT_PULL_CAP = 10**6


@dataclass(frozen=True)
class Arm:
    """One Bernoulli-valued arm: either a rational bias sampled from the
    bandit's own seeded stream, or an arbitrary 0/1 callable."""

    bernoulli_q: Fraction | None = None
    sampler: Callable[[], int] | None = None

    def __post_init__(self) -> None:
        if (self.bernoulli_q is None) == (self.sampler is None):
            raise ValueError("an arm is either a Bernoulli bias or a sampler")
        if self.bernoulli_q is not None and not 0 <= self.bernoulli_q <= 1:
            raise ValueError("Bernoulli bias must be in [0, 1]")

    @staticmethod
    def bernoulli(q: Fraction | int) -> "Arm":
        return Arm(bernoulli_q=Fraction(q))

    @staticmethod
    def from_sampler(sampler: Callable[[], int]) -> "Arm":
        return Arm(sampler=sampler)


@dataclass(frozen=True)
class BAIConfig:
    delta: Fraction = DEFAULT_DELTA
    pull_cap: int = DEFAULT_PULL_CAP  # per arm

    def __post_init__(self) -> None:
        if not 0 < self.delta < Fraction(1, 2):
            raise ValueError("confidence delta must lie in (0, 1/2)")
        if self.pull_cap < 1:
            raise ValueError("pull cap must be positive")


@dataclass(frozen=True)
class BAIResult:
    winner: int | None  # 1 or 2; None when the pull cap was exceeded
    total_pulls: int
    final_means: tuple[Fraction, Fraction]
    epochs: int

    @property
    def cap_exceeded(self) -> bool:
        return self.winner is None


def epoch_tolerance(r: int) -> Fraction:
    return Fraction(1, 2**r)


def epoch_pulls(delta: Fraction, r: int) -> int:
    """Cumulative pulls per arm required by epoch ``r``."""
    delta_r = 6.0 * float(delta) / (math.pi**2 * r * r)
    eps_r = float(epoch_tolerance(r))
    return math.ceil(8.0 * math.log(2.0 / delta_r) / (eps_r * eps_r))


class _BernoulliStream:
    """Counter-based stream of exact Bernoulli(q) bits, batch-drawable."""

    def __init__(self, q: Fraction, seed: int):
        self.seed = seed
        self.counter = 0
        # u < threshold  <=>  u * den < num * 2^64, for u in [0, 2^64)
        num, den = q.numerator, q.denominator
        self.threshold = -((-num << 64) // den) if num else 0

    def draw_batch(self, n: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        z = (np.uint64(self.seed) + np.uint64(GAMMA) * idx) & np.uint64(MASK64)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
        if self.threshold >= 1 << 64:
            return np.ones(n, dtype=np.uint8)
        return (z < np.uint64(self.threshold)).astype(np.uint8)


class _ArmState:
    def __init__(self, arm: Arm, seed: int, lane: int):
        self.pulls = 0
        self.ones = 0
        self._sampler = arm.sampler
        self._stream = (
            _BernoulliStream(arm.bernoulli_q, split_seed(seed, lane))
            if arm.bernoulli_q is not None
            else None
        )

    def pull(self, n: int) -> None:
        if n <= 0:
            return
        if self._stream is not None:
            self.ones += int(self._stream.draw_batch(n).sum())
        else:
            assert self._sampler is not None
            for _ in range(n):
                self.ones += 1 if self._sampler() else 0
        self.pulls += n

    def mean(self) -> Fraction:
        return Fraction(self.ones, self.pulls) if self.pulls else Fraction(0)


def identify_best(arm1: Arm, arm2: Arm, cfg: BAIConfig, seed: int) -> BAIResult:
    """Run the elimination schedule until a leader emerges or the per-arm
    pull cap is hit.  Deterministic given the seed (sampler-backed arms must
    themselves be deterministic)."""
    a = _ArmState(arm1, seed, 1)
    b = _ArmState(arm2, seed, 2)
    r = 0
    while True:
        r += 1
        eps_r = epoch_tolerance(r)
        full = epoch_pulls(cfg.delta, r)
        target = min(full, cfg.pull_cap)
        a.pull(target - a.pulls)
        b.pull(target - b.pulls)
        gap = a.mean() - b.mean()
        # a leader is only declared on a completed epoch; a clamped epoch has
        # too few samples for the epoch's confidence share
        if full <= cfg.pull_cap and (gap > eps_r or -gap > eps_r):
            winner = 1 if gap > 0 else 2
            return BAIResult(winner, a.pulls + b.pulls, (a.mean(), b.mean()), r)
        if target >= cfg.pull_cap:
            return BAIResult(None, a.pulls + b.pulls, (a.mean(), b.mean()), r)
