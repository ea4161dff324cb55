"""Fuel-metered small-step interpreter for DL programs.

Execution model
---------------

The machine is a CEK-style stepper: a control (an expression being evaluated
or a value being returned), a persistent environment, a persistent
continuation chain, and the stream position of the run's randomness.  One
transition costs one step; entering any AST node is one transition.  Oracle
calls cost one step under the ``FREE`` policy and ``1 + stepsUsed`` of the
answering verifier under ``METERED``.

A run always halts with a report:

* ``HALTED`` — a value was produced (type faults halt with a distinguished
  string value rather than raising),
* ``FUEL_EXHAUSTED`` — the step budget ran out,
* ``CYCLE`` — the same machine state recurred, which certifies the run can
  never halt.  State identity covers control, environment, continuation and
  randomness position but not the step counter, so a recurrence really is a
  loop.  Hash hits are confirmed structurally, and a recurrence is only
  possible when no randomness was drawn inside the candidate cycle (the
  stream position is part of the identity).  The hash table is capped; past
  the cap detection degrades gracefully to ``FUEL_EXHAUSTED``.

Oracle calls are not executed by the machine itself.  The machine suspends
mid-transition and hands an :class:`OracleRequest` to the driver, which asks
the oracle binding for a directive: answer immediately, run a nested
simulation (pushed on an explicit stack — no Python recursion, so towers of
verifiers simulating verifiers are fine), fault the caller, or abort the run.
Nested simulations carry a work budget; a simulation that cannot afford to
finish computing a nested answer is truncated, which its owner reports as an
abstention.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Protocol

from . import nodes as N
from . import values as V
from .hashing import h_fold, h_int, h_str
from .rng import RngState
from .shapes import typecheck_input
from .trace import Trace
from .verdicts import Task, Verdict, dont_know

MACHINE_ORACLE_ID = "dl-machine"

DEFAULT_CYCLE_CAP = 200_000
DEFAULT_PULL_CAP = 10**6


class UnboundOracle(KeyError):
    """An oracle call named a verifier the binding cannot resolve."""


class OraclePolicy(Enum):
    METERED = "metered"
    FREE = "free"


@dataclass(frozen=True)
class Fuel:
    max_steps: int
    oracle_policy: OraclePolicy = OraclePolicy.FREE

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("fuel must allow at least one step")


class Outcome(Enum):
    HALTED = "halted"
    FUEL_EXHAUSTED = "fuel-exhausted"
    CYCLE = "cycle"


@dataclass(frozen=True)
class HaltReport:
    outcome: Outcome
    steps: int
    value: V.Value | None = None
    prefix_len: int | None = None
    cycle_len: int | None = None

    @property
    def halted(self) -> bool:
        return self.outcome is Outcome.HALTED

    @property
    def cycled(self) -> bool:
        return self.outcome is Outcome.CYCLE

    @staticmethod
    def halt(value: V.Value, steps: int) -> "HaltReport":
        return HaltReport(Outcome.HALTED, steps, value=value)

    @staticmethod
    def fuel(steps: int) -> "HaltReport":
        return HaltReport(Outcome.FUEL_EXHAUSTED, steps)

    @staticmethod
    def cycle(prefix_len: int, cycle_len: int, steps: int) -> "HaltReport":
        return HaltReport(Outcome.CYCLE, steps, prefix_len=prefix_len, cycle_len=cycle_len)


@dataclass(frozen=True)
class RunResult:
    report: HaltReport
    trace: Trace
    transitions: int
    max_eval_depth: int


# --------------------------------------------------------------------------
# Environments and continuations (persistent, hash-cached).


_H_EMPTY = h_str("empty")


class Env:
    __slots__ = ("name", "value", "parent", "h")

    def __init__(self, name: str, value: V.Value, parent: "Env | None"):
        self.name = name
        self.value = value
        self.parent = parent
        self.h = h_fold(
            h_str("env"), h_str(name), value.h, parent.h if parent is not None else _H_EMPTY
        )

    def lookup(self, name: str) -> V.Value | None:
        e: Env | None = self
        while e is not None:
            if e.name == name:
                return e.value
            e = e.parent
        return None

    def __eq__(self, other: object) -> bool:
        a: Env | None = self
        b = other
        while True:
            if a is b:
                return True
            if not isinstance(a, Env) or not isinstance(b, Env) or a.h != b.h:
                return False
            if a.name != b.name or a.value != b.value:
                return False
            a, b = a.parent, b.parent

    def __hash__(self) -> int:
        return self.h


def bind_input(value: V.Value) -> Env:
    env = Env(N.INPUT_VAR, value, None)
    if isinstance(value, V.PairVal):
        env = Env(N.INPUT_SND, value.right, env)
        env = Env(N.INPUT_FST, value.left, env)
    return env


class Frame:
    __slots__ = ("nxt", "h")
    tag = "?"

    def _parts(self) -> tuple:
        return ()

    def __eq__(self, other: object) -> bool:
        a: Frame | None = self
        b = other
        while True:
            if a is b:
                return True
            if not isinstance(a, Frame) or not isinstance(b, Frame) or a.h != b.h:
                return False
            if a.tag != b.tag or a._parts() != b._parts():
                return False
            a, b = a.nxt, b.nxt

    def __hash__(self) -> int:
        return self.h


def _fh(tag: str, nxt: "Frame | None", *parts: int) -> int:
    return h_fold(h_str("k:" + tag), nxt.h if nxt is not None else _H_EMPTY, *parts)


class KProg(Frame):
    """Program boundary: `return` unwinds to the nearest one."""

    __slots__ = ()
    tag = "prog"

    def __init__(self, nxt: Frame | None):
        self.nxt = nxt
        self.h = _fh(self.tag, nxt)


class KPairL(Frame):
    __slots__ = ("right", "env")
    tag = "pairl"

    def __init__(self, right: N.Node, env: Env, nxt: Frame):
        self.right, self.env, self.nxt = right, env, nxt
        self.h = _fh(self.tag, nxt, right.h, env.h)

    def _parts(self) -> tuple:
        return (self.right, self.env)


class KPairR(Frame):
    __slots__ = ("left",)
    tag = "pairr"

    def __init__(self, left: V.Value, nxt: Frame):
        self.left, self.nxt = left, nxt
        self.h = _fh(self.tag, nxt, left.h)

    def _parts(self) -> tuple:
        return (self.left,)


class KConcatL(Frame):
    __slots__ = ("right", "env")
    tag = "concatl"

    def __init__(self, right: N.Node, env: Env, nxt: Frame):
        self.right, self.env, self.nxt = right, env, nxt
        self.h = _fh(self.tag, nxt, right.h, env.h)

    def _parts(self) -> tuple:
        return (self.right, self.env)


class KConcatR(Frame):
    __slots__ = ("left",)
    tag = "concatr"

    def __init__(self, left: V.Value, nxt: Frame):
        self.left, self.nxt = left, nxt
        self.h = _fh(self.tag, nxt, left.h)

    def _parts(self) -> tuple:
        return (self.left,)


class KLet(Frame):
    __slots__ = ("name", "body", "env")
    tag = "let"

    def __init__(self, name: str, body: N.Node, env: Env, nxt: Frame):
        self.name, self.body, self.env, self.nxt = name, body, env, nxt
        self.h = _fh(self.tag, nxt, h_str(name), body.h, env.h)

    def _parts(self) -> tuple:
        return (self.name, self.body, self.env)


class KSeq(Frame):
    __slots__ = ("rest", "env")
    tag = "seq"

    def __init__(self, rest: tuple[N.Node, ...], env: Env, nxt: Frame):
        self.rest, self.env, self.nxt = rest, env, nxt
        self.h = _fh(self.tag, nxt, h_fold(h_int(len(rest)), *(n.h for n in rest)), env.h)

    def _parts(self) -> tuple:
        return (self.rest, self.env)


class KIf(Frame):
    __slots__ = ("then", "orelse", "env")
    tag = "if"

    def __init__(self, then: N.Node, orelse: N.Node, env: Env, nxt: Frame):
        self.then, self.orelse, self.env, self.nxt = then, orelse, env, nxt
        self.h = _fh(self.tag, nxt, then.h, orelse.h, env.h)

    def _parts(self) -> tuple:
        return (self.then, self.orelse, self.env)


class KWhile(Frame):
    __slots__ = ("body", "env")
    tag = "while"

    def __init__(self, body: N.Node, env: Env, nxt: Frame):
        self.body, self.env, self.nxt = body, env, nxt
        self.h = _fh(self.tag, nxt, body.h, env.h)

    def _parts(self) -> tuple:
        return (self.body, self.env)


class KReturn(Frame):
    __slots__ = ()
    tag = "return"

    def __init__(self, nxt: Frame):
        self.nxt = nxt
        self.h = _fh(self.tag, nxt)


class KEvalFun(Frame):
    __slots__ = ("input", "env")
    tag = "evalf"

    def __init__(self, input_expr: N.Node, env: Env, nxt: Frame):
        self.input, self.env, self.nxt = input_expr, env, nxt
        self.h = _fh(self.tag, nxt, input_expr.h, env.h)

    def _parts(self) -> tuple:
        return (self.input, self.env)


class KEvalArg(Frame):
    __slots__ = ("program",)
    tag = "evala"

    def __init__(self, program: N.Program, nxt: Frame):
        self.program, self.nxt = program, nxt
        self.h = _fh(self.tag, nxt, program.h)

    def _parts(self) -> tuple:
        return (self.program,)


class KOracle(Frame):
    __slots__ = ("node", "done", "rest", "env")
    tag = "oracle"

    def __init__(
        self, node: N.OracleCall, done: tuple[V.Value, ...], rest: tuple[N.Node, ...], env: Env, nxt: Frame
    ):
        self.node, self.done, self.rest, self.env, self.nxt = node, done, rest, env, nxt
        self.h = _fh(
            self.tag,
            nxt,
            node.h,
            h_fold(h_int(len(done)), *(v.h for v in done)),
            h_fold(h_int(len(rest)), *(n.h for n in rest)),
            env.h,
        )

    def _parts(self) -> tuple:
        return (self.node, self.done, self.rest, self.env)


class KTfv(Frame):
    __slots__ = ("node",)
    tag = "tfv"

    def __init__(self, node: N.TraceFinalVerdict, nxt: Frame):
        self.node, self.nxt = node, nxt
        self.h = _fh(self.tag, nxt, node.h)

    def _parts(self) -> tuple:
        return (self.node,)


class KCheck1(Frame):
    __slots__ = ("node", "env")
    tag = "ct1"

    def __init__(self, node: N.CheckTrace, env: Env, nxt: Frame):
        self.node, self.env, self.nxt = node, env, nxt
        self.h = _fh(self.tag, nxt, node.h, env.h)

    def _parts(self) -> tuple:
        return (self.node, self.env)


class KCheck2(Frame):
    __slots__ = ("node", "subject")
    tag = "ct2"

    def __init__(self, node: N.CheckTrace, subject: V.Value, nxt: Frame):
        self.node, self.subject, self.nxt = node, subject, nxt
        self.h = _fh(self.tag, nxt, node.h, subject.h)

    def _parts(self) -> tuple:
        return (self.node, self.subject)


class KTci1(Frame):
    __slots__ = ("input", "env")
    tag = "tci1"

    def __init__(self, input_expr: N.Node, env: Env, nxt: Frame):
        self.input, self.env, self.nxt = input_expr, env, nxt
        self.h = _fh(self.tag, nxt, input_expr.h, env.h)

    def _parts(self) -> tuple:
        return (self.input, self.env)


class KTci2(Frame):
    __slots__ = ("subject",)
    tag = "tci2"

    def __init__(self, subject: V.Value, nxt: Frame):
        self.subject, self.nxt = subject, nxt
        self.h = _fh(self.tag, nxt, subject.h)

    def _parts(self) -> tuple:
        return (self.subject,)


# --------------------------------------------------------------------------
# Oracle requests and driver directives.


@dataclass(frozen=True)
class OracleRequest:
    kind: str  # "oracle" | "check-trace"
    verifier_id: str
    query: str  # oracle query token, or "" for check-trace
    args: tuple[V.Value, ...]
    delta: tuple[int, int] | None = None


class HandlerCtx:
    """What an oracle handler may touch: the asking machine's randomness and
    run-level configuration.  Draws made here are recorded in the asking
    run's trace."""

    def __init__(self, machine: "Machine", pull_cap: int):
        self._m = machine
        self.policy = machine.fuel.oracle_policy
        self.pull_cap = pull_cap

    def draw_u64(self) -> int:
        v = self._m.rng.draw_u64()
        self._m.draws.append(v)
        return v

    def draw_bit(self, numerator: int = 1, denominator: int = 2) -> int:
        v = self._m.rng.draw_bit(numerator, denominator)
        self._m.draws.append(v)
        return v

    def seed_for_sim(self) -> int:
        """Fresh seed for a nested verifier simulation.  Advances the stream
        like a draw but is not recorded as observed randomness: a safe
        nested verifier's conclusions are seed-invariant (it abstains when
        they would not be), so the seed is bookkeeping, not chance the
        simulated program can see."""
        return self._m.rng.draw_u64()


@dataclass
class SimEnd:
    """How a nested simulation finished."""

    report: HaltReport | None  # None when truncated by the work limit
    machine: "Machine"
    truncated: bool
    cap_was_budget: bool  # truncation at the verifier's own budget (genuine)
    work_used: int


@dataclass
class SimTicket:
    program: N.Program
    input_value: V.Value
    fuel: Fuel
    seed: int
    work_budget: int
    on_done: "Callable[[SimEnd], Directive] | None" = None
    capture_hashes: bool = False
    cycle_cap: int = DEFAULT_CYCLE_CAP  # 0 disables cycle detection


@dataclass
class Deliver:
    value: V.Value
    charge: int = 0  # verifier steps charged under METERED
    work_cost: int = 0  # wall work to bill against enclosing simulations


@dataclass
class Spawn:
    ticket: SimTicket


@dataclass
class Fault:
    reason: str


@dataclass
class FailRun:
    """Force the asking machine to report fuel exhaustion (e.g. pull cap hit)."""


Directive = Deliver | Spawn | Fault | FailRun


class OracleBinding(Protocol):
    def handle(self, req: OracleRequest, ctx: HandlerCtx) -> Directive: ...


# --------------------------------------------------------------------------
# The machine.


_H_EV = h_str("mode:eval")
_H_AP = h_str("mode:apply")
_H_FINAL = h_str("mode:final")


class Machine:
    __slots__ = (
        "fuel",
        "expr",
        "env",
        "value",
        "kont",
        "rng",
        "draws",
        "steps",
        "transitions",
        "depth",
        "max_depth",
        "outcome",
        "capture",
        "hashes",
        "detect",
        "cycle_cap",
        "seen",
        "_pending",
    )

    def __init__(
        self,
        program: N.Program,
        input_value: V.Value,
        fuel: Fuel,
        seed: int,
        *,
        capture_hashes: bool = True,
        cycle_cap: int = DEFAULT_CYCLE_CAP,
    ):
        self.fuel = fuel
        self.expr: N.Node | None = program.root
        self.env: Env = bind_input(input_value)
        self.value: V.Value | None = None
        self.kont: Frame = KProg(None)
        self.rng = RngState(seed)
        self.draws: list[int] = []
        self.steps = 0
        self.transitions = 0
        self.depth = 1
        self.max_depth = 1
        self.outcome: HaltReport | None = None
        self.capture = capture_hashes
        self.hashes: array = array("Q")
        self.detect = cycle_cap > 0
        self.cycle_cap = cycle_cap
        self.seen: dict[int, tuple[int, tuple]] = {}
        self._pending: Frame | None = None
        self._note_state()

    @classmethod
    def from_parts(
        cls,
        ctrl: N.Node | V.Value,
        env: Env,
        kont: Frame,
        rng: RngState,
        fuel: Fuel,
        *,
        cycle_cap: int = 0,
        capture_hashes: bool = False,
    ) -> "Machine":
        m = cls.__new__(cls)
        m.fuel = fuel
        if isinstance(ctrl, V.Value):
            m.expr, m.value = None, ctrl
        else:
            m.expr, m.value = ctrl, None
        m.env = env
        m.kont = kont
        m.rng = rng
        m.draws = []
        m.steps = 0
        m.transitions = 0
        m.depth = sum(1 for f in _frames(kont) if isinstance(f, KProg))
        m.max_depth = m.depth
        m.outcome = None
        m.capture = capture_hashes
        m.hashes = array("Q")
        m.detect = cycle_cap > 0
        m.cycle_cap = cycle_cap
        m.seen = {}
        m._pending = None
        m._note_state()
        return m

    # -- state identity ----------------------------------------------------

    def state_identity(self) -> int:
        mode = _H_AP if self.value is not None else _H_EV
        ctrl_h = self.value.h if self.value is not None else self.expr.h  # type: ignore[union-attr]
        return h_fold(mode, ctrl_h, self.env.h, self.kont.h, self.rng.identity())

    def _snapshot(self) -> tuple:
        return (
            self.value if self.value is not None else self.expr,
            self.value is not None,
            self.env,
            self.kont,
            self.rng.seed,
            self.rng.counter,
        )

    def _note_state(self) -> None:
        sid = self.state_identity()
        if self.capture:
            self.hashes.append(sid)
        if self.detect and self.outcome is None:
            prev = self.seen.get(sid)
            if prev is not None:
                p_index, p_snap = prev
                if p_snap == self._snapshot():
                    # A true recurrence: randomness position matched, so no
                    # draw happened inside the cycle.
                    self.outcome = HaltReport.cycle(
                        p_index, self.transitions - p_index, self.steps
                    )
            elif len(self.seen) < self.cycle_cap:
                self.seen[sid] = (self.transitions, self._snapshot())

    # -- helpers -----------------------------------------------------------

    def _halt(self, value: V.Value) -> None:
        self.outcome = HaltReport.halt(value, self.steps)

    def _fault(self, reason: str) -> None:
        self._halt(V.type_fault(reason))

    def _resolve_prog(self, frame: KProg, value: V.Value) -> None:
        if frame.nxt is None:
            self._halt(value)
            return
        self.value = value
        self.expr = None
        self.kont = frame.nxt
        self.depth -= 1

    def force_fuel_exhausted(self) -> None:
        self.outcome = HaltReport.fuel(self.steps)

    # -- stepping ----------------------------------------------------------

    def poll(self) -> HaltReport | None:
        """Zero-cost check whether the run is already decided."""
        if self.outcome is not None:
            return self.outcome
        if self.steps >= self.fuel.max_steps:
            self.outcome = HaltReport.fuel(self.steps)
            return self.outcome
        return None

    def step(self) -> HaltReport | OracleRequest | None:
        done = self.poll()
        if done is not None:
            return done
        if self._pending is not None:
            raise RuntimeError("machine is awaiting an oracle answer")
        if self.value is None:
            self._step_eval()
        else:
            req = self._step_apply()
            if req is not None:
                return req
        if self.outcome is not None and self.outcome.halted:
            # the halting transition itself is counted
            self.steps += 1
            self.transitions += 1
            self.outcome = HaltReport.halt(self.outcome.value, self.steps)  # type: ignore[arg-type]
            if self.capture:
                self.hashes.append(h_fold(_H_FINAL, self.outcome.value.h))
            return self.outcome
        self.steps += 1
        self.transitions += 1
        self._note_state()
        return self.outcome

    def complete_oracle(self, value: V.Value, charge: int) -> None:
        """Finish a suspended oracle transition by delivering its answer."""
        if self._pending is None:
            raise RuntimeError("no oracle call in flight")
        self.value = value
        self.expr = None
        self.kont = self._pending
        self._pending = None
        extra = charge if self.fuel.oracle_policy is OraclePolicy.METERED else 0
        headroom = self.fuel.max_steps - self.steps - 1
        self.steps += 1 + min(extra, max(headroom, 0))
        self.transitions += 1
        self._note_state()

    def fail_oracle(self, reason: str) -> None:
        if self._pending is None:
            raise RuntimeError("no oracle call in flight")
        self._pending = None
        self.steps += 1
        self.transitions += 1
        self._fault(reason)
        if self.capture:
            self.hashes.append(h_fold(_H_FINAL, self.outcome.value.h))  # type: ignore[union-attr]

    def _step_eval(self) -> None:
        node = self.expr
        env = self.env
        if isinstance(node, N.IntLit):
            self.value, self.expr = V.IntVal(node.value), None
        elif isinstance(node, N.StrLit):
            self.value, self.expr = V.StrVal(node.text), None
        elif isinstance(node, N.Quote):
            self.value, self.expr = V.ProgramVal(node.program), None
        elif isinstance(node, N.Var):
            bound = env.lookup(node.name)
            if bound is None:
                self._fault(f"unbound variable {node.name}")
                return
            self.value, self.expr = bound, None
        elif isinstance(node, N.BernoulliDraw):
            bit = self.rng.draw_bit(node.numerator, node.denominator)
            self.draws.append(bit)
            self.value, self.expr = V.IntVal(bit), None
        elif isinstance(node, N.Pair):
            self.kont = KPairL(node.right, env, self.kont)
            self.expr = node.left
        elif isinstance(node, N.Concat):
            self.kont = KConcatL(node.right, env, self.kont)
            self.expr = node.left
        elif isinstance(node, N.Let):
            self.kont = KLet(node.name, node.body, env, self.kont)
            self.expr = node.bound
        elif isinstance(node, N.Seq):
            if not node.items:
                self.value, self.expr = V.IntVal(0), None
            elif len(node.items) == 1:
                self.expr = node.items[0]
            else:
                self.kont = KSeq(node.items[1:], env, self.kont)
                self.expr = node.items[0]
        elif isinstance(node, N.If):
            self.kont = KIf(node.then, node.orelse, env, self.kont)
            self.expr = node.cond
        elif isinstance(node, N.WhileTrue):
            self.kont = KWhile(node.body, env, self.kont)
            self.expr = node.body
        elif isinstance(node, N.Return):
            self.kont = KReturn(self.kont)
            self.expr = node.value
        elif isinstance(node, N.Eval):
            self.kont = KEvalFun(node.input, env, self.kont)
            self.expr = node.program
        elif isinstance(node, N.OracleCall):
            self.kont = KOracle(node, (), node.args[1:], env, self.kont)
            self.expr = node.args[0]
        elif isinstance(node, N.TraceFinalVerdict):
            self.kont = KTfv(node, self.kont)
            self.expr = node.trace
        elif isinstance(node, N.CheckTrace):
            self.kont = KCheck1(node, env, self.kont)
            self.expr = node.program
        elif isinstance(node, N.TypeCheckInput):
            self.kont = KTci1(node.input, env, self.kont)
            self.expr = node.program
        else:  # pragma: no cover - the node set is closed
            raise TypeError(f"unknown node {node!r}")

    def _step_apply(self) -> OracleRequest | None:
        v = self.value
        assert v is not None
        k = self.kont
        if isinstance(k, KProg):
            self._resolve_prog(k, v)
        elif isinstance(k, KPairL):
            self.kont = KPairR(v, k.nxt)
            self.env = k.env
            self.expr, self.value = k.right, None
        elif isinstance(k, KPairR):
            self.value = V.PairVal(k.left, v)
            self.kont = k.nxt
        elif isinstance(k, KConcatL):
            self.kont = KConcatR(v, k.nxt)
            self.env = k.env
            self.expr, self.value = k.right, None
        elif isinstance(k, KConcatR):
            if isinstance(k.left, V.StrVal) and isinstance(v, V.StrVal):
                self.value = V.StrVal(k.left.text + v.text)
                self.kont = k.nxt
            else:
                self._fault("concat expects strings")
        elif isinstance(k, KLet):
            self.env = Env(k.name, v, k.env)
            self.expr, self.value = k.body, None
            self.kont = k.nxt
        elif isinstance(k, KSeq):
            self.env = k.env
            if len(k.rest) == 1:
                self.kont = k.nxt
            else:
                self.kont = KSeq(k.rest[1:], k.env, k.nxt)
            self.expr, self.value = k.rest[0], None
        elif isinstance(k, KIf):
            if not isinstance(v, V.IntVal):
                self._fault("if condition must be an integer")
                return None
            self.env = k.env
            self.expr, self.value = (k.orelse if v.value == 0 else k.then), None
            self.kont = k.nxt
        elif isinstance(k, KWhile):
            # Discard the body value and run the body again; the frame is
            # reused so the machine state genuinely recurs.
            self.env = k.env
            self.expr, self.value = k.body, None
        elif isinstance(k, KReturn):
            f: Frame | None = k.nxt
            while f is not None and not isinstance(f, KProg):
                f = f.nxt
            assert f is not None, "continuation always bottoms out in a program frame"
            self._resolve_prog(f, v)
        elif isinstance(k, KEvalFun):
            if not isinstance(v, V.ProgramVal):
                self._fault("eval expects a program")
                return None
            self.kont = KEvalArg(v.program, k.nxt)
            self.env = k.env
            self.expr, self.value = k.input, None
        elif isinstance(k, KEvalArg):
            self.kont = KProg(k.nxt)
            self.env = bind_input(v)
            self.expr, self.value = k.program.root, None
            self.depth += 1
            if self.depth > self.max_depth:
                self.max_depth = self.depth
        elif isinstance(k, KOracle):
            done = k.done + (v,)
            if k.rest:
                self.kont = KOracle(k.node, done, k.rest[1:], k.env, k.nxt)
                self.env = k.env
                self.expr, self.value = k.rest[0], None
            else:
                self._pending = k.nxt
                self.value = None
                return OracleRequest(
                    "oracle", k.node.verifier_id, k.node.query, done, k.node.delta
                )
        elif isinstance(k, KTfv):
            if not isinstance(v, V.TraceVal):
                self._fault("trace-final-verdict expects a trace")
                return None
            hit = v.trace.final_verdict.code == k.node.expected
            self.value = V.IntVal(1 if hit else 0)
            self.kont = k.nxt
        elif isinstance(k, KCheck1):
            self.kont = KCheck2(k.node, v, k.nxt)
            self.env = k.env
            self.expr, self.value = k.node.trace, None
        elif isinstance(k, KCheck2):
            if not (isinstance(k.subject, V.ProgramVal) and isinstance(v, V.TraceVal)):
                # Malformed evidence is a failed check, not an error.
                self.value = V.IntVal(0)
                self.kont = k.nxt
            else:
                self._pending = k.nxt
                arg_pair = (k.subject, v)
                self.value = None
                return OracleRequest("check-trace", k.node.verifier_id, "", arg_pair)
        elif isinstance(k, KTci1):
            self.kont = KTci2(v, k.nxt)
            self.env = k.env
            self.expr, self.value = k.input, None
        elif isinstance(k, KTci2):
            if not isinstance(k.subject, V.ProgramVal):
                self.value = V.IntVal(0)  # the check is total, never an error
            else:
                ok = typecheck_input(k.subject.program, v)
                self.value = V.IntVal(1 if ok else 0)
            self.kont = k.nxt
        else:  # pragma: no cover
            raise TypeError(f"unknown frame {k!r}")
        return None


def _frames(k: Frame | None):
    while k is not None:
        yield k
        k = k.nxt


# --------------------------------------------------------------------------
# The driver: an explicit stack of (possibly nested) machine runs.


@dataclass
class _RunFrame:
    machine: Machine
    on_done: Callable[[SimEnd], Directive] | None
    limit_abs: int | None
    spawn_work: int
    cap_was_budget: bool


class _Driver:
    def __init__(self, binding: OracleBinding, pull_cap: int):
        self.binding = binding
        self.pull_cap = pull_cap
        self.work = 0
        self.stack: list[_RunFrame] = []

    def push_root(self, machine: Machine) -> None:
        self.stack.append(_RunFrame(machine, None, None, self.work, True))

    def _push(self, ticket: SimTicket, parent_limit: int | None) -> None:
        limit = self.work + ticket.work_budget
        cap_was_budget = True
        if parent_limit is not None and parent_limit < limit:
            limit = parent_limit
            cap_was_budget = False
        machine = Machine(
            ticket.program,
            ticket.input_value,
            ticket.fuel,
            ticket.seed,
            capture_hashes=ticket.capture_hashes,
            cycle_cap=ticket.cycle_cap,
        )
        self.stack.append(_RunFrame(machine, ticket.on_done, limit, self.work, cap_was_budget))

    def _finish_top(self, end: SimEnd) -> SimEnd | None:
        """Pop the top frame; either return the root's end or apply the
        finisher's directive to the parent."""
        fr = self.stack.pop()
        if fr.on_done is None:
            return end
        directive = fr.on_done(end)
        self._apply(directive)
        return None

    def _apply(self, directive: Directive) -> None:
        fr = self.stack[-1]
        if isinstance(directive, Deliver):
            self.work += 1 + directive.work_cost
            fr.machine.complete_oracle(directive.value, directive.charge)
        elif isinstance(directive, Spawn):
            self._push(directive.ticket, fr.limit_abs)
        elif isinstance(directive, Fault):
            fr.machine.fail_oracle(directive.reason)
            self.work += 1
        elif isinstance(directive, FailRun):
            fr.machine._pending = None
            fr.machine.force_fuel_exhausted()
        else:  # pragma: no cover
            raise TypeError(f"unknown directive {directive!r}")

    def _pump_top(self) -> SimEnd | None:
        """Advance the top frame by one action, popping it when finished.
        Returns the final end only when the popped frame had no finisher."""
        fr = self.stack[-1]
        m = fr.machine
        report = m.poll()
        if report is None and fr.limit_abs is not None and self.work >= fr.limit_abs:
            return self._finish_top(
                SimEnd(None, m, True, fr.cap_was_budget, self.work - fr.spawn_work)
            )
        if report is None:
            r = m.step()
            if r is None:
                self.work += 1
                return None
            if isinstance(r, OracleRequest):
                self._apply(self.binding.handle(r, HandlerCtx(m, self.pull_cap)))
                return None
            report = r
        return self._finish_top(
            SimEnd(report, m, False, fr.cap_was_budget, self.work - fr.spawn_work)
        )

    def drive(self) -> SimEnd:
        while True:
            end = self._pump_top()
            if end is not None:
                return end

    def settle_nested(self) -> None:
        """Run any nested simulations down to the root frame."""
        while len(self.stack) > 1:
            self._pump_top()


def drive_sim(binding: OracleBinding, ticket: SimTicket, pull_cap: int = DEFAULT_PULL_CAP) -> SimEnd:
    """Run one simulation ticket to completion (used by verifiers)."""
    driver = _Driver(binding, pull_cap)
    driver.stack.append(
        _RunFrame(
            Machine(
                ticket.program,
                ticket.input_value,
                ticket.fuel,
                ticket.seed,
                capture_hashes=ticket.capture_hashes,
                cycle_cap=ticket.cycle_cap,
            ),
            None,
            driver.work + ticket.work_budget,
            driver.work,
            True,
        )
    )
    return driver.drive()


def run_verdict(report: HaltReport) -> Verdict:
    """The halting claim a finished run certifies about its own instance."""
    if report.halted:
        return Verdict(Task.INSTANCE_HALTING, "halts")
    if report.cycled:
        return Verdict(Task.INSTANCE_HALTING, "does-not-halt")
    return dont_know(Task.INSTANCE_HALTING)


RUN_TRACE_ID = "machine"


def run(
    program: N.Program,
    input_value: V.Value,
    fuel: Fuel,
    seed: int,
    binding: OracleBinding,
    *,
    capture_hashes: bool = True,
    cycle_cap: int = DEFAULT_CYCLE_CAP,
    pull_cap: int = DEFAULT_PULL_CAP,
) -> RunResult:
    """Execute a program on an input.  Always returns; never raises for
    program-level faults (those halt with a distinguished value)."""
    driver = _Driver(binding, pull_cap)
    machine = Machine(
        program, input_value, fuel, seed, capture_hashes=capture_hashes, cycle_cap=cycle_cap
    )
    driver.push_root(machine)
    end = driver.drive()
    assert end.report is not None
    trace = Trace(
        RUN_TRACE_ID,
        program,
        tuple(machine.draws),
        tuple(machine.hashes),
        run_verdict(end.report),
    )
    return RunResult(end.report, trace, machine.transitions, machine.max_depth)


def check_cycle_report(
    program: N.Program,
    input_value: V.Value,
    fuel: Fuel,
    seed: int,
    binding: OracleBinding,
    report: HaltReport,
    *,
    pull_cap: int = DEFAULT_PULL_CAP,
) -> bool:
    """Independently confirm a cycle certificate by replaying the run:
    the state after ``prefix_len`` transitions must recur, structurally,
    after ``cycle_len`` more."""
    if not report.cycled or report.prefix_len is None or report.cycle_len is None:
        return False
    if report.cycle_len < 1 or report.prefix_len < 0:
        return False
    driver = _Driver(binding, pull_cap)
    machine = Machine(program, input_value, fuel, seed, capture_hashes=False, cycle_cap=0)
    driver.push_root(machine)
    first: tuple | None = None
    want_a, want_b = report.prefix_len, report.prefix_len + report.cycle_len
    while machine.transitions < want_b:
        if machine.transitions == want_a and first is None:
            first = machine._snapshot()
        if machine.poll() is not None:
            return False
        r = machine.step()
        if isinstance(r, OracleRequest):
            driver._apply(driver.binding.handle(r, HandlerCtx(machine, pull_cap)))
            driver.settle_nested()
        elif isinstance(r, HaltReport):
            return False
    return first is not None and first == machine._snapshot()
