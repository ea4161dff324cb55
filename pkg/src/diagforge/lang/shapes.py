"""Input shapes: what kind of input a program can receive.

A program reads its input through ``x`` (whole input) and ``x1``/``x2``
(pair components), so its input shape can be inferred syntactically: using
``x1``/``x2`` demands a pair, and the node positions an input variable
appears in demand value kinds (an ``eval`` callee must be a program, a
``check-trace`` second argument must be a trace, and so on).  The check is
shallow and total — it looks only at direct variable uses — which keeps the
``typecheck-input`` node decidable at a fixed cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import nodes as N
from . import values as V

INPUT_NAMES = (N.INPUT_VAR, N.INPUT_FST, N.INPUT_SND)

# Value-kind constraint lattice: "any" is top, "conflict" bottom.
ANY = "any"
CONFLICT = "conflict"


class ArityMismatch(Exception):
    """The program's input shape cannot receive the offered value."""


def _meet(a: str, b: str) -> str:
    if a == ANY:
        return b
    if b == ANY or a == b:
        return a
    return CONFLICT


def _kind_of(value: V.Value) -> str:
    if isinstance(value, V.IntVal):
        return "int"
    if isinstance(value, V.StrVal):
        return "str"
    if isinstance(value, V.ProgramVal):
        return "program"
    if isinstance(value, V.PairVal):
        return "pair"
    if isinstance(value, V.TraceVal):
        return "trace"
    return "verdict"


@dataclass
class InputShape:
    needs_pair: bool = False
    whole: str = ANY
    fst: str = ANY
    snd: str = ANY
    uses_input: bool = field(default=False)

    def accepts(self, value: V.Value) -> bool:
        if CONFLICT in (self.whole, self.fst, self.snd):
            return False
        if self.whole not in (ANY, _kind_of(value)):
            return False
        if self.needs_pair:
            if not isinstance(value, V.PairVal):
                return False
            if self.fst not in (ANY, _kind_of(value.left)):
                return False
            if self.snd not in (ANY, _kind_of(value.right)):
                return False
        return True


def _constrain(shape: InputShape, name: str, kind: str) -> None:
    shape.uses_input = True
    if name == N.INPUT_VAR:
        shape.whole = _meet(shape.whole, kind)
    elif name == N.INPUT_FST:
        shape.needs_pair = True
        shape.fst = _meet(shape.fst, kind)
    else:
        shape.needs_pair = True
        shape.snd = _meet(shape.snd, kind)


def _oracle_arg_kinds(node: N.OracleCall) -> tuple[str, ...]:
    if node.query == N.QUERY_STEP:
        return ("str", "str")
    if node.query == N.QUERY_AT_HALT:
        return ("str",)
    if node.query == N.QUERY_ADJACENCY:
        return ("int", ANY)
    if node.query == N.QUERY_BEST_ARM:
        return ("program", ANY)
    # Verdict queries: (program[, input[, time limit]]).
    return ("program", ANY, "int")[: len(node.args)]


def infer_shape(program: N.Program) -> InputShape:
    shape = InputShape()
    _walk(program.root, frozenset(), shape)
    return shape


def _walk(node: N.Node, shadowed: frozenset[str], shape: InputShape) -> None:
    if isinstance(node, N.Var):
        if node.name in INPUT_NAMES and node.name not in shadowed:
            _constrain(shape, node.name, ANY)
        return
    if isinstance(node, N.Quote):
        return  # quoted programs have their own input scope
    if isinstance(node, N.Let):
        _walk(node.bound, shadowed, shape)
        _walk(node.body, shadowed | {node.name}, shape)
        return

    def demand(child: N.Node, kind: str) -> None:
        if (
            isinstance(child, N.Var)
            and child.name in INPUT_NAMES
            and child.name not in shadowed
        ):
            _constrain(shape, child.name, kind)

    if isinstance(node, N.Concat):
        demand(node.left, "str")
        demand(node.right, "str")
    elif isinstance(node, N.If):
        demand(node.cond, "int")
    elif isinstance(node, N.Eval):
        demand(node.program, "program")
    elif isinstance(node, N.CheckTrace):
        demand(node.program, "program")
        demand(node.trace, "trace")
    elif isinstance(node, N.TraceFinalVerdict):
        demand(node.trace, "trace")
    elif isinstance(node, N.TypeCheckInput):
        demand(node.program, "program")
    elif isinstance(node, N.OracleCall):
        for child, kind in zip(node.args, _oracle_arg_kinds(node)):
            demand(child, kind)
    for child in node.children():
        _walk(child, shadowed, shape)


def typecheck_input(program: N.Program, value: V.Value) -> bool:
    """Semantics of the ``typecheck-input`` node: shape-accepts, total."""
    return infer_shape(program).accepts(value)


def apply_self(program: N.Program) -> tuple[N.Program, V.Value]:
    """The (program, input) instance where a program receives its own source."""
    me = V.ProgramVal(program)
    if not infer_shape(program).accepts(me):
        raise ArityMismatch("program input shape cannot receive a program value")
    return program, me
