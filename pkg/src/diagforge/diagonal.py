"""Builders for self-referential instances.

Each builder takes a registered verifier and emits a DL program that
consults that verifier — by id — about the very instance being built, and
then does the opposite of whatever a confident answer would predict.  The
result: a verifier that never makes false claims is forced to abstain on
its own diagonal instance, while any confident answer is refuted by a
machine-checkable certificate (halt witness or cycle).

The program family:

* the trace-conditioned diagonal (``build_godel_program``): halts unless
  handed a genuine trace of the verifier certifying the program
  well-behaved, in which case it evaluates itself and negates the result —
  an unbounded self-evaluation regress;
* the halting diagonal (``build_turing_program``) and its time-bounded
  sibling (``build_turing_T``): loop exactly when the verifier fails to say
  "does not halt";
* the inverted variants (``*_v2``): halt unless the verifier affirms
  halting, so they always halt yet the affirmative answer stays out of a
  safe verifier's reach;
* the randomized diagonal (``build_godel_program_random``): loops exactly
  when best-arm identification decides the verifier claims halting more
  often than a fair coin.

Builders bake the verifier's *id* into the program text — the program
quotes the oracle's name, never its implementation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .lang import machine as M
from .lang import values as V
from .lang.machine import Fuel, HaltReport, OraclePolicy
from .lang.nodes import Program
from .lang.parser import parse_program, serialize_program
from .lang.shapes import ArityMismatch, apply_self, infer_shape
from .lang.trace import Trace
from .lang.verdicts import Task
from . import verifiers as W
from .verifiers import Registry, VerifierSpec, validate_trace

__all__ = [
    "ArityMismatch",
    "BudgetTooSmall",
    "RegressProbe",
    "UnknownVerifier",
    "apply_self",
    "build_godel_program",
    "build_godel_program_random",
    "build_turing_T",
    "build_turing_T_v2",
    "build_turing_program",
    "build_turing_program_v2",
    "godel_self_instance",
    "is_regress_evidence",
    "measure_overhead_c",
    "probe_regress",
    "self_instance",
    "selfify",
    "validate_trace",
]

TURING_T_BUILDER = "turing-t"
TURING_T_V2_BUILDER = "turing-t-v2"


class UnknownVerifier(KeyError):
    """A builder was given a verifier id that is not registered."""


class BudgetTooSmall(ValueError):
    """The requested time limit cannot even cover the dispatch overhead."""


def _resolve(registry: Registry, verifier: VerifierSpec | str, task: Task) -> VerifierSpec:
    vid = verifier.id if isinstance(verifier, VerifierSpec) else verifier
    if not registry.has(vid):
        raise UnknownVerifier(vid)
    spec = registry.get(vid)
    if spec.task is not task:
        raise ValueError(f"verifier {vid!r} answers {spec.task.value}, need {task.value}")
    return spec


def _quote_id(verifier_id: str) -> str:
    return '"' + verifier_id.replace("\\", "\\\\").replace('"', '\\"') + '"'


# --------------------------------------------------------------------------
# The trace-conditioned diagonal.


def build_godel_program(registry: Registry, verifier: VerifierSpec | str) -> Program:
    """A program on inputs ``(P, T)``: if ``T`` is a genuine trace of the
    named verifier certifying ``P`` well-behaved, and ``(P, T)`` is a valid
    input to ``P``, evaluate ``P`` on this very input and return the negated
    result; otherwise return 0.

    Fed itself plus any trace that is invalid or non-affirming, it halts
    immediately; fed a genuine well-behaved certification of itself, it
    self-evaluates without bound — so a verifier with no false claims can
    never issue that certification."""
    spec = _resolve(registry, verifier, Task.PROG_VERIFICATION)
    a = _quote_id(spec.id)
    return parse_program(
        f"(if (check-trace {a} (var x1) (var x2))"
        f" (if (trace-final-verdict well-behaved (var x2))"
        f" (if (typecheck-input (var x1) (var x))"
        f' (return (concat (str "Not ") (eval (var x1) (var x))))'
        f" (return (int 0)))"
        f" (return (int 0)))"
        f" (return (int 0)))"
    )


def godel_self_instance(program: Program, trace: Trace) -> tuple[Program, V.Value]:
    """The diagonal input: the program itself paired with a verifier trace
    about it."""
    return program, V.PairVal(V.ProgramVal(program), V.TraceVal(trace))


# --------------------------------------------------------------------------
# Halting diagonals.


def build_turing_program(registry: Registry, verifier: VerifierSpec | str) -> Program:
    """A program on instances ``(P, I)``: halts iff the named verifier says
    ``(P, I)`` does not halt, loops otherwise."""
    spec = _resolve(registry, verifier, Task.INSTANCE_HALTING)
    a = _quote_id(spec.id)
    return parse_program(
        f"(if (oracle {a} does-not-halt (var x1) (var x2))"
        f" (return (int 0))"
        f" (while-true (seq)))"
    )


def selfify(program: Program) -> Program:
    """Wrap an instance-shaped program ``(P, I) -> …`` into the one-argument
    program ``P -> program(P, P)``, the classic self-application step."""
    shape = infer_shape(program)
    if not shape.needs_pair:
        raise ArityMismatch("program does not take (program, input) instances")
    src = serialize_program(program)
    return parse_program(f"(return (eval (quote {src}) (pair (var x) (var x))))")


def self_instance(program: Program) -> tuple[Program, V.Value]:
    """The diagonal instance of a builder output: the program applied to its
    own source.  Pair-shaped programs are self-applied through
    :func:`selfify`; program-shaped ones directly."""
    shape = infer_shape(program)
    if shape.needs_pair:
        return apply_self(selfify(program))
    return apply_self(program)


def build_turing_program_v2(registry: Registry, verifier: VerifierSpec | str) -> Program:
    """Polarity-inverted halting diagonal: loops iff the named verifier
    affirms the instance always halts, halts otherwise.  The self-instance
    therefore always halts — unless the verifier falsely says so."""
    spec = _resolve(registry, verifier, Task.RANDOMIZED_HALTING)
    a = _quote_id(spec.id)
    return parse_program(
        f"(if (oracle {a} always-halts (var x1) (var x2))"
        f" (while-true (seq))"
        f" (return (int 0)))"
    )


# --------------------------------------------------------------------------
# Time-bounded diagonals.


def _build_turing_t(verifier_id: str, t: int, *, inverted: bool) -> Program:
    a = _quote_id(verifier_id)
    if inverted:
        cond = f"(oracle {a} halts-within-t (var x1) (var x2) (int {t}))"
        return parse_program(f"(if {cond} (while-true (seq)) (return (int 0)))")
    cond = f"(oracle {a} does-not-halt-within-t (var x1) (var x2) (int {t}))"
    return parse_program(f"(if {cond} (return (int 0)) (while-true (seq)))")


def build_turing_T(registry: Registry, verifier: VerifierSpec | str, t: int) -> Program:
    """Time-bounded halting diagonal: asks the named verifier whether its own
    self-instance halts within ``t`` metered steps; halts fast on "does not
    halt within t", loops past ``t`` otherwise."""
    spec = _resolve(registry, verifier, Task.TIME_BOUNDED)
    c = measure_overhead_c(TURING_T_BUILDER)
    if t <= c:
        raise BudgetTooSmall(f"time limit {t} does not cover dispatch overhead {c}")
    return _build_turing_t(spec.id, t, inverted=False)


def build_turing_T_v2(registry: Registry, verifier: VerifierSpec | str, t: int) -> Program:
    """Inverted time-bounded diagonal: loops on "halts within t", halts
    otherwise — so its self-instance halts within ``t + c`` whenever the
    verifier is safe."""
    spec = _resolve(registry, verifier, Task.TIME_BOUNDED)
    c = measure_overhead_c(TURING_T_V2_BUILDER)
    if t <= c:
        raise BudgetTooSmall(f"time limit {t} does not cover dispatch overhead {c}")
    return _build_turing_t(spec.id, t, inverted=True)


# --------------------------------------------------------------------------
# Randomized diagonal.


def build_godel_program_random(
    registry: Registry,
    verifier: VerifierSpec | str,
    delta: Fraction = Fraction(1, 100),
) -> Program:
    """A program on a program input ``x``: run best-arm identification
    between a fair coin and the named verifier's "halts" answers on
    ``(x, x)``; loop iff the verifier's arm wins.  A calibrated-safe
    verifier must keep its halting-claim probability indistinguishable from
    abstention here, or the program's actual behavior refutes the claim."""
    vid = verifier.id if isinstance(verifier, VerifierSpec) else verifier
    if not registry.has(vid):
        raise UnknownVerifier(vid)
    if not 0 < delta < Fraction(1, 2):
        raise ValueError("confidence parameter must be in (0, 1/2)")
    a = _quote_id(vid)
    return parse_program(
        f"(if (oracle {a} best-arm-halts {delta.numerator}/{delta.denominator}"
        f" (var x) (var x))"
        f" (while-true (seq))"
        f" (return (int 0)))"
    )


# --------------------------------------------------------------------------
# Dispatch overhead.

_overhead_cache: dict[str, int] = {}


def measure_overhead_c(construction: str) -> int:
    """The fixed step cost a time-bounded diagonal spends outside the
    verifier: total halting-path steps minus the verifier's metered charge,
    measured with instrumented stub runs.  Verified identical across time
    limits and claimed charges before being reported."""
    if construction in _overhead_cache:
        return _overhead_cache[construction]
    if construction not in (TURING_T_BUILDER, TURING_T_V2_BUILDER):
        raise ValueError(f"unknown construction {construction!r}")
    inverted = construction == TURING_T_V2_BUILDER

    def halting_total(claimed: int, t: int) -> int:
        reg = Registry()
        stub = W.make_stub_verifier(
            reg, Task.TIME_BOUNDED, "does-not-halt-within-t", claimed, "probe"
        )
        prog = _build_turing_t(stub.id, t, inverted=inverted)
        sp, me = self_instance(prog)
        res = M.run(sp, me, Fuel(10**6, OraclePolicy.METERED), 0, reg)
        assert res.report.halted, "stubbed dispatch must halt"
        return res.report.steps

    samples = {
        (claimed, t): halting_total(claimed, t) - claimed
        for claimed in (1, 5)
        for t in (10**3, 10**6)
    }
    values = set(samples.values())
    if len(values) != 1:  # pragma: no cover - instability would be a bug
        raise AssertionError(f"dispatch overhead not stable: {samples}")
    c = values.pop()
    _overhead_cache[construction] = c
    return c


# --------------------------------------------------------------------------
# Regress evidence.


@dataclass(frozen=True)
class RegressProbe:
    fuel: int
    outcome: M.Outcome
    max_eval_depth: int


def probe_regress(
    registry: Registry,
    program: Program,
    input_value: V.Value,
    fuels: tuple[int, ...],
    seed: int = 0,
) -> tuple[RegressProbe, ...]:
    """Evidence that a run is an unbounded self-evaluation regress rather
    than a loop: at every probed fuel it exhausts fuel (no cycle, no halt)
    and the evaluation depth it reached grows with the fuel."""
    probes = []
    for fuel in fuels:
        res = M.run(
            program, input_value, Fuel(fuel, OraclePolicy.FREE), seed, registry,
            capture_hashes=False,
        )
        probes.append(RegressProbe(fuel, res.report.outcome, res.max_eval_depth))
    return tuple(probes)


def is_regress_evidence(probes: tuple[RegressProbe, ...]) -> bool:
    if len(probes) < 2:
        return False
    exhausted = all(p.outcome is M.Outcome.FUEL_EXHAUSTED for p in probes)
    deepening = all(a.max_eval_depth < b.max_eval_depth for a, b in zip(probes, probes[1:]))
    return exhausted and deepening
