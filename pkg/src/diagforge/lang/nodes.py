"""Abstract syntax of the DL mini-language.

The node set is closed: the constructions in :mod:`diagforge.diagonal` rely on
it having no equality operator and no pair projections, so every branch test
a program can express is baked into a node (oracle target verdicts, expected
trace verdicts).  Programs receive their input through the variables ``x``
(the whole input), and ``x1``/``x2`` (the components when the input is a
pair).

Every node carries a cached structural hash ``h`` computed at construction;
equality is structural and hash-consistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .hashing import h_fold, h_int, h_str
from .verdicts import Task, family_of_answer

I64_MIN = -(1 << 63)
I64_MAX = (1 << 63) - 1

INPUT_VAR = "x"
INPUT_FST = "x1"
INPUT_SND = "x2"


class Node:
    """Base class; concrete nodes are slotted dataclasses with a cached hash."""

    __slots__ = ()
    kind: str = "?"
    h: int

    def children(self) -> tuple["Node", ...]:
        return ()

    def walk(self) -> Iterator["Node"]:
        stack: list[Node] = [self]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children()))

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Node):
            return NotImplemented
        return self.h == other.h and _structural_eq(self, other)

    def __hash__(self) -> int:
        return self.h


def _structural_eq(a: Node, b: Node) -> bool:
    if a.kind != b.kind or a._attrs() != b._attrs():  # type: ignore[attr-defined]
        return False
    ca, cb = a.children(), b.children()
    if len(ca) != len(cb):
        return False
    return all(x.h == y.h and _structural_eq(x, y) for x, y in zip(ca, cb))


def _tag(kind: str) -> int:
    return h_str("node:" + kind)


@dataclass(frozen=True, slots=True, eq=False)
class IntLit(Node):
    value: int
    h: int = field(init=False)
    kind = "int"

    def __post_init__(self) -> None:
        if not (I64_MIN <= self.value <= I64_MAX):
            raise ValueError(f"integer literal out of i64 range: {self.value}")
        object.__setattr__(self, "h", h_fold(_tag(self.kind), h_int(self.value)))

    def _attrs(self) -> tuple:
        return (self.value,)


@dataclass(frozen=True, slots=True, eq=False)
class StrLit(Node):
    text: str
    h: int = field(init=False)
    kind = "str"

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(_tag(self.kind), h_str(self.text)))

    def _attrs(self) -> tuple:
        return (self.text,)


@dataclass(frozen=True, slots=True, eq=False)
class Quote(Node):
    program: "Program"
    h: int = field(init=False)
    kind = "quote"

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(_tag(self.kind), self.program.h))

    def children(self) -> tuple[Node, ...]:
        return (self.program.root,)

    def _attrs(self) -> tuple:
        return ()


@dataclass(frozen=True, slots=True, eq=False)
class Var(Node):
    name: str
    h: int = field(init=False)
    kind = "var"

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(_tag(self.kind), h_str(self.name)))

    def _attrs(self) -> tuple:
        return (self.name,)


@dataclass(frozen=True, slots=True, eq=False)
class Pair(Node):
    left: Node
    right: Node
    h: int = field(init=False)
    kind = "pair"

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(_tag(self.kind), self.left.h, self.right.h))

    def children(self) -> tuple[Node, ...]:
        return (self.left, self.right)

    def _attrs(self) -> tuple:
        return ()


@dataclass(frozen=True, slots=True, eq=False)
class Concat(Node):
    left: Node
    right: Node
    h: int = field(init=False)
    kind = "concat"

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(_tag(self.kind), self.left.h, self.right.h))

    def children(self) -> tuple[Node, ...]:
        return (self.left, self.right)

    def _attrs(self) -> tuple:
        return ()


@dataclass(frozen=True, slots=True, eq=False)
class Let(Node):
    name: str
    bound: Node
    body: Node
    h: int = field(init=False)
    kind = "let"

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "h", h_fold(_tag(self.kind), h_str(self.name), self.bound.h, self.body.h)
        )

    def children(self) -> tuple[Node, ...]:
        return (self.bound, self.body)

    def _attrs(self) -> tuple:
        return (self.name,)


@dataclass(frozen=True, slots=True, eq=False)
class Seq(Node):
    items: tuple[Node, ...]
    h: int = field(init=False)
    kind = "seq"

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(_tag(self.kind), *(n.h for n in self.items)))

    def children(self) -> tuple[Node, ...]:
        return self.items

    def _attrs(self) -> tuple:
        return ()


@dataclass(frozen=True, slots=True, eq=False)
class If(Node):
    cond: Node
    then: Node
    orelse: Node
    h: int = field(init=False)
    kind = "if"

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "h", h_fold(_tag(self.kind), self.cond.h, self.then.h, self.orelse.h)
        )

    def children(self) -> tuple[Node, ...]:
        return (self.cond, self.then, self.orelse)

    def _attrs(self) -> tuple:
        return ()


@dataclass(frozen=True, slots=True, eq=False)
class WhileTrue(Node):
    body: Node
    h: int = field(init=False)
    kind = "while-true"

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(_tag(self.kind), self.body.h))

    def children(self) -> tuple[Node, ...]:
        return (self.body,)

    def _attrs(self) -> tuple:
        return ()


@dataclass(frozen=True, slots=True, eq=False)
class Return(Node):
    value: Node
    h: int = field(init=False)
    kind = "return"

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(_tag(self.kind), self.value.h))

    def children(self) -> tuple[Node, ...]:
        return (self.value,)

    def _attrs(self) -> tuple:
        return ()


@dataclass(frozen=True, slots=True, eq=False)
class Eval(Node):
    program: Node
    input: Node
    h: int = field(init=False)
    kind = "eval"

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(_tag(self.kind), self.program.h, self.input.h))

    def children(self) -> tuple[Node, ...]:
        return (self.program, self.input)

    def _attrs(self) -> tuple:
        return ()


# Oracle query vocabulary.  Verdict queries evaluate to 1 iff the named
# verifier answers exactly that verdict; machine queries step/inspect encoded
# interpreter configurations; best-arm-halts runs a two-arm best-arm
# identification between a fair coin and the verifier claiming "halts".
QUERY_BEST_ARM = "best-arm-halts"
QUERY_STEP = "step"
QUERY_AT_HALT = "at-halt"
QUERY_ADJACENCY = "adjacency"

_VERDICT_QUERY_ARITY = {
    Task.PROG_VERIFICATION: 1,  # program
    Task.INSTANCE_HALTING: 2,  # program, input
    Task.TIME_BOUNDED: 3,  # program, input, time limit
    Task.RANDOMIZED_HALTING: 2,  # program, input
}

_SPECIAL_QUERY_ARITY = {
    QUERY_BEST_ARM: 2,  # program, input
    QUERY_STEP: 2,  # config, move
    QUERY_AT_HALT: 1,  # config
    QUERY_ADJACENCY: 2,  # time bound, vertex
}


def query_arity(query: str) -> int:
    if query in _SPECIAL_QUERY_ARITY:
        return _SPECIAL_QUERY_ARITY[query]
    family = family_of_answer(query)
    if family is None:
        raise ValueError(f"unknown oracle query: {query!r}")
    return _VERDICT_QUERY_ARITY[family]


@dataclass(frozen=True, slots=True, eq=False)
class OracleCall(Node):
    verifier_id: str
    query: str
    args: tuple[Node, ...]
    delta: tuple[int, int] | None = None  # only for best-arm-halts
    h: int = field(init=False)
    kind = "oracle"

    def __post_init__(self) -> None:
        arity = query_arity(self.query)
        if len(self.args) != arity:
            raise ValueError(f"oracle query {self.query!r} takes {arity} args, got {len(self.args)}")
        if (self.query == QUERY_BEST_ARM) != (self.delta is not None):
            raise ValueError("delta is given exactly for best-arm-halts queries")
        if self.delta is not None:
            num, den = self.delta
            if not (den >= 1 and 0 <= num <= den):
                raise ValueError(f"delta must be a probability: {num}/{den}")
        d = self.delta or (0, 0)
        object.__setattr__(
            self,
            "h",
            h_fold(
                _tag(self.kind),
                h_str(self.verifier_id),
                h_str(self.query),
                h_int(d[0]),
                h_int(d[1]),
                *(n.h for n in self.args),
            ),
        )

    def children(self) -> tuple[Node, ...]:
        return self.args

    def _attrs(self) -> tuple:
        return (self.verifier_id, self.query, self.delta)


@dataclass(frozen=True, slots=True, eq=False)
class TraceFinalVerdict(Node):
    expected: str  # verdict token the trace's final verdict is compared against
    trace: Node
    h: int = field(init=False)
    kind = "trace-final-verdict"

    def __post_init__(self) -> None:
        if family_of_answer(self.expected) is None and self.expected != "dont-know":
            raise ValueError(f"unknown verdict token: {self.expected!r}")
        object.__setattr__(
            self, "h", h_fold(_tag(self.kind), h_str(self.expected), self.trace.h)
        )

    def children(self) -> tuple[Node, ...]:
        return (self.trace,)

    def _attrs(self) -> tuple:
        return (self.expected,)


@dataclass(frozen=True, slots=True, eq=False)
class CheckTrace(Node):
    verifier_id: str
    program: Node
    trace: Node
    h: int = field(init=False)
    kind = "check-trace"

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "h",
            h_fold(_tag(self.kind), h_str(self.verifier_id), self.program.h, self.trace.h),
        )

    def children(self) -> tuple[Node, ...]:
        return (self.program, self.trace)

    def _attrs(self) -> tuple:
        return (self.verifier_id,)


@dataclass(frozen=True, slots=True, eq=False)
class TypeCheckInput(Node):
    program: Node
    input: Node
    h: int = field(init=False)
    kind = "typecheck-input"

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(_tag(self.kind), self.program.h, self.input.h))

    def children(self) -> tuple[Node, ...]:
        return (self.program, self.input)

    def _attrs(self) -> tuple:
        return ()


@dataclass(frozen=True, slots=True, eq=False)
class BernoulliDraw(Node):
    numerator: int
    denominator: int
    h: int = field(init=False)
    kind = "bernoulli"

    def __post_init__(self) -> None:
        if self.denominator < 1 or not (0 <= self.numerator <= self.denominator):
            raise ValueError(
                f"bernoulli probability must be in [0,1]: {self.numerator}/{self.denominator}"
            )
        object.__setattr__(
            self, "h", h_fold(_tag(self.kind), h_int(self.numerator), h_int(self.denominator))
        )

    def _attrs(self) -> tuple:
        return (self.numerator, self.denominator)


@dataclass(frozen=True, slots=True, eq=False)
class Program:
    """A complete program: one expression plus the input-variable convention."""

    root: Node
    h: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", h_fold(h_str("program"), self.root.h))

    def node_count(self) -> int:
        return sum(1 for _ in self.root.walk())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Program):
            return NotImplemented
        return self.h == other.h and self.root == other.root

    def __hash__(self) -> int:
        return self.h

    def __str__(self) -> str:
        from .parser import serialize_program

        return serialize_program(self)
