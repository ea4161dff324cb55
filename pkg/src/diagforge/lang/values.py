"""Runtime values of the DL language.

The value kinds are closed: integers, strings, quoted programs, pairs,
verifier traces and verdicts.  There is no error kind — a type fault halts
the machine with a distinguished string value (see :func:`type_fault`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .hashing import h_fold, h_int, h_str
from .nodes import Program
from .trace import Trace
from .verdicts import Verdict

TYPE_FAULT_PREFIX = "#type-fault:"


class Value:
    __slots__ = ()
    h: int

    def __hash__(self) -> int:
        return self.h


@dataclass(frozen=True, slots=True, eq=False)
class IntVal(Value):
    value: int
    h: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(h_str("v:int"), h_int(self.value)))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IntVal) and other.value == self.value

    def __hash__(self) -> int:
        return self.h


@dataclass(frozen=True, slots=True, eq=False)
class StrVal(Value):
    text: str
    h: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(h_str("v:str"), h_str(self.text)))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, StrVal) and other.text == self.text

    def __hash__(self) -> int:
        return self.h


@dataclass(frozen=True, slots=True, eq=False)
class ProgramVal(Value):
    program: Program
    h: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(h_str("v:prog"), self.program.h))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ProgramVal) and other.program == self.program

    def __hash__(self) -> int:
        return self.h


@dataclass(frozen=True, slots=True, eq=False)
class PairVal(Value):
    left: Value
    right: Value
    h: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(h_str("v:pair"), self.left.h, self.right.h))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PairVal)
            and other.h == self.h
            and other.left == self.left
            and other.right == self.right
        )

    def __hash__(self) -> int:
        return self.h


@dataclass(frozen=True, slots=True, eq=False)
class TraceVal(Value):
    trace: Trace
    h: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(h_str("v:trace"), self.trace.h))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TraceVal) and other.trace == self.trace

    def __hash__(self) -> int:
        return self.h


@dataclass(frozen=True, slots=True, eq=False)
class VerdictVal(Value):
    verdict: Verdict
    h: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(h_str("v:verdict"), self.verdict.identity()))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, VerdictVal) and other.verdict == self.verdict

    def __hash__(self) -> int:
        return self.h


def type_fault(reason: str) -> StrVal:
    """The distinguished halting value produced when a node sees a wrong kind."""
    return StrVal(TYPE_FAULT_PREFIX + " " + reason)


def is_type_fault(value: Value) -> bool:
    return isinstance(value, StrVal) and value.text.startswith(TYPE_FAULT_PREFIX)
