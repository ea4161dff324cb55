"""Deterministic randomness for program runs and verifier answers.

Everything random in this package flows through a single 64-bit splittable
generator (splitmix64, Steele/Lea/Flood constants).  The generator is
counter-based: draw ``i`` of a stream is a pure function of ``(seed, i)``,
which makes streams cheap to fork, replay and batch with numpy without
changing the draw sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

MASK64 = (1 << 64) - 1

# splitmix64 constants, as published.
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit value."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def stream_draw(seed: int, index: int) -> int:
    """Draw ``index`` (0-based) of the stream rooted at ``seed``."""
    return mix64((seed + GAMMA * (index + 1)) & MASK64)


def split_seed(seed: int, lane: int) -> int:
    """Derive an independent child seed; used to give sub-runs their own streams."""
    return mix64((seed ^ GAMMA) + GAMMA * (lane + 1) & MASK64)


@dataclass
class RngState:
    """Position of a stream: hashable identity for machine states."""

    seed: int
    counter: int = 0

    def draw_u64(self) -> int:
        v = stream_draw(self.seed, self.counter)
        self.counter += 1
        return v

    def draw_bit(self, numerator: int, denominator: int) -> int:
        """Bernoulli(numerator/denominator) as one stream draw, integer-exact."""
        u = self.draw_u64()
        return 1 if u * denominator < numerator * (1 << 64) else 0

    def copy(self) -> "RngState":
        return RngState(self.seed, self.counter)

    def identity(self) -> int:
        return mix64(self.seed ^ mix64(self.counter))


class DrawSource:
    """Draw stream for a verifier run, recording draws so the run can be replayed.

    In recording mode draws come from a seeded stream and are logged.  In
    replay mode draws are fed back verbatim from a log; consuming more or
    fewer draws than recorded is a replay failure.
    """

    def __init__(self, seed: int = 0, replay: tuple[int, ...] | None = None):
        self._rng = RngState(seed)
        self._replay = replay
        self._pos = 0
        self.log: list[int] = []

    @property
    def exhausted_ok(self) -> bool:
        """In replay mode, true iff exactly all recorded draws were consumed."""
        return self._replay is None or self._pos == len(self._replay)

    def _next(self, fresh: int) -> int:
        if self._replay is not None:
            if self._pos >= len(self._replay):
                raise ReplayExhausted("verifier consumed more draws than recorded")
            v = self._replay[self._pos]
            self._pos += 1
            return v
        self.log.append(fresh)
        return fresh

    def draw_u64(self) -> int:
        return self._next(self._rng.draw_u64())

    def draw_bit(self, numerator: int = 1, denominator: int = 2) -> int:
        return self._next(self._rng.draw_bit(numerator, denominator))

    def seed_for_sim(self) -> int:
        """Seed for a nested simulation.  Logged like any draw here: a
        standalone verifier's replay must reconstruct the same simulations."""
        return self.draw_u64()


class ReplayExhausted(Exception):
    """A replay consumed draws past the end of the recorded log."""
