"""Verdict vocabulary for halting/behaviour oracles.

A verdict always belongs to one task family, and every family includes the
abstention answer ``dont-know``.  Verdicts serialize as lowercase tokens.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .rng import mix64


class Task(Enum):
    PROG_VERIFICATION = "prog-verification"
    INSTANCE_HALTING = "instance-halting"
    TIME_BOUNDED = "time-bounded"
    RANDOMIZED_HALTING = "randomized-halting"


# Non-abstaining answers per family.
_ANSWERS: dict[Task, tuple[str, ...]] = {
    Task.PROG_VERIFICATION: ("well-behaved", "not-well-behaved"),
    Task.INSTANCE_HALTING: ("halts", "does-not-halt"),
    Task.TIME_BOUNDED: ("halts-within-t", "does-not-halt-within-t"),
    Task.RANDOMIZED_HALTING: (
        "always-halts",
        "halts-on-some-randomness",
        "never-halts",
    ),
}

DONT_KNOW = "dont-know"


def answers_for(task: Task) -> tuple[str, ...]:
    """All legal answer tokens for a family, abstention last."""
    return _ANSWERS[task] + (DONT_KNOW,)


def family_of_answer(code: str) -> Task | None:
    """The unique family owning a non-abstention token, None for dont-know."""
    for task, codes in _ANSWERS.items():
        if code in codes:
            return task
    return None


@dataclass(frozen=True)
class Verdict:
    task: Task
    code: str

    def __post_init__(self) -> None:
        if self.code not in answers_for(self.task):
            raise ValueError(f"{self.code!r} is not a {self.task.value} answer")

    @property
    def is_abstention(self) -> bool:
        return self.code == DONT_KNOW

    def identity(self) -> int:
        h = mix64(len(self.task.value) * 0x9E37 + 0x1D)
        for ch in self.task.value + "|" + self.code:
            h = mix64(h ^ ord(ch))
        return h

    def __str__(self) -> str:
        return self.code


def dont_know(task: Task) -> Verdict:
    return Verdict(task, DONT_KNOW)
