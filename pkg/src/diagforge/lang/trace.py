"""Replayable records of verifier runs.

A trace is valid when re-running its verifier on the subject program, feeding
back the recorded draws, reproduces the recorded observation hashes and the
final verdict.  Traces are ordinary runtime values, so programs can receive
and inspect them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .hashing import h_fold, h_int, h_str
from .nodes import Program
from .verdicts import Verdict


@dataclass(frozen=True, slots=True, eq=False)
class Trace:
    verifier_id: str
    subject_program: Program
    random_draws: tuple[int, ...]
    step_hashes: tuple[int, ...]
    final_verdict: Verdict
    h: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "h",
            h_fold(
                h_str("trace"),
                h_str(self.verifier_id),
                self.subject_program.h,
                h_fold(h_int(len(self.random_draws)), *(h_int(d) for d in self.random_draws)),
                h_fold(h_int(len(self.step_hashes)), *(h_int(d) for d in self.step_hashes)),
                self.final_verdict.identity(),
            ),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            self.h == other.h
            and self.verifier_id == other.verifier_id
            and self.subject_program == other.subject_program
            and self.random_draws == other.random_draws
            and self.step_hashes == other.step_hashes
            and self.final_verdict == other.final_verdict
        )

    def __hash__(self) -> int:
        return self.h
