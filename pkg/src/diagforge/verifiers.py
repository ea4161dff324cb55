"""Budgeted verifiers: the oracle side of the machine.

A verifier is a registered, metered answerer for one verdict family.  It can
be asked directly (:func:`verify`) or from inside a running DL program
through an ``oracle`` node — the registry is the machine's oracle binding.
Every answer carries the steps charged against the verifier's internal
budget and a replayable trace.

Two kinds of verifier live here:

* *direct* verifiers (stubs, coins, abstainers) compute their verdict
  without running the subject program — useful as forced answers in the
  diagonal experiments;
* *simulating* verifiers run the subject on the machine and only claim what
  a finished run or a cycle certificate witnesses.  Simulation work —
  including the work of any verifiers the subject itself consults — is
  charged against the internal budget, and a simulation that cannot afford
  an answer abstains.  The one dishonest variant (the "liar") simulates
  without cycle detection and converts every inconclusive outcome into the
  family's positive claim.

Nested simulations never recurse in Python: when a simulated program calls
an oracle, the registry hands the machine driver a new simulation frame to
run on the same explicit stack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .lang import configs as C
from .lang import machine as M
from .lang import nodes as N
from .lang import values as V
from .lang.machine import (
    Deliver,
    Directive,
    Fault,
    FailRun,
    Fuel,
    HaltReport,
    HandlerCtx,
    OraclePolicy,
    OracleRequest,
    SimEnd,
    SimTicket,
    Spawn,
    UnboundOracle,
    drive_sim,
)
from .lang.rng import DrawSource, ReplayExhausted, split_seed
from .lang.trace import Trace
from .lang.verdicts import DONT_KNOW, Task, Verdict, dont_know, family_of_answer

HALTS = "halts"
DOES_NOT_HALT = "does-not-halt"
HALTS_WITHIN_T = "halts-within-t"
DOES_NOT_HALT_WITHIN_T = "does-not-halt-within-t"
WELL_BEHAVED = "well-behaved"
NOT_WELL_BEHAVED = "not-well-behaved"
ALWAYS_HALTS = "always-halts"
NEVER_HALTS = "never-halts"

# The positive claim a liar falls back to, per family.
_POSITIVE_CLAIM = {
    Task.PROG_VERIFICATION: WELL_BEHAVED,
    Task.INSTANCE_HALTING: HALTS,
    Task.TIME_BOUNDED: HALTS_WITHIN_T,
    Task.RANDOMIZED_HALTING: ALWAYS_HALTS,
}


class OracleProtocolError(RuntimeError):
    """An oracle call was made with arguments outside the verifier's task."""


@dataclass(frozen=True)
class VerifierSpec:
    id: str
    task: Task
    internal_budget: int
    randomized: bool
    claimed_safe: bool

    def __post_init__(self) -> None:
        if self.internal_budget < 1:
            raise ValueError("internal budget must be positive")
        if not self.id:
            raise ValueError("verifier id must be nonempty")


@dataclass(frozen=True)
class VerifierAnswer:
    verdict: Verdict
    steps_used: int
    trace: Trace


# --------------------------------------------------------------------------
# Behaviors.


class _Behavior:
    """How a verifier computes its verdict.  ``answer`` must be a pure
    function of (registry, program, input, time limit, draw stream)."""

    def answer(
        self,
        registry: "Registry",
        spec: VerifierSpec,
        program: N.Program,
        input_value: V.Value,
        time_limit: int | None,
        draws,
        *,
        capture: bool,
        pull_cap: int,
    ) -> tuple[Verdict, int, tuple[int, ...]]:
        raise NotImplementedError


@dataclass(frozen=True)
class _StubBehavior(_Behavior):
    code: str
    claimed_steps: int

    def answer(self, registry, spec, program, input_value, time_limit, draws, *, capture, pull_cap):
        steps = min(self.claimed_steps, spec.internal_budget)
        return Verdict(spec.task, self.code), steps, ()


@dataclass(frozen=True)
class _BiasedStubBehavior(_Behavior):
    code: str
    prob: Fraction

    def answer(self, registry, spec, program, input_value, time_limit, draws, *, capture, pull_cap):
        hit = draws.draw_bit(self.prob.numerator, self.prob.denominator)
        code = self.code if hit else DONT_KNOW
        return Verdict(spec.task, code), 1, ()


@dataclass(frozen=True)
class _AbstainBehavior(_Behavior):
    def answer(self, registry, spec, program, input_value, time_limit, draws, *, capture, pull_cap):
        return dont_know(spec.task), 1, ()


def _standard_probes(program: N.Program) -> tuple[V.Value, ...]:
    """Inputs a simulating program-verifier tries: plain data, the subject
    itself, and self-application pairs (the shapes the diagonal
    constructions feed)."""
    p = V.ProgramVal(program)
    zero = V.IntVal(0)
    return (zero, V.PairVal(zero, zero), p, V.PairVal(p, zero), V.PairVal(p, p))


@dataclass(frozen=True)
class _SimBehavior(_Behavior):
    cycle_detection: bool = True
    lie_on_inconclusive: bool = False

    def answer(self, registry, spec, program, input_value, time_limit, draws, *, capture, pull_cap):
        state = _SimState(self, spec, program, input_value, time_limit, draws, capture)
        while (ticket := state.next_ticket()) is not None:
            state.feed(drive_sim(registry, ticket, pull_cap))
        assert state.verdict is not None
        return state.verdict, state.steps_used(), tuple(state.obs)


class _SimState:
    """Stepwise execution of a simulating verifier's plan, so the same logic
    serves both standalone :func:`verify` and in-run oracle calls (where the
    driver owns the simulation stack)."""

    def __init__(
        self,
        behavior: _SimBehavior,
        spec: VerifierSpec,
        program: N.Program,
        input_value: V.Value,
        time_limit: int | None,
        draws,
        capture: bool,
    ):
        self.behavior = behavior
        self.spec = spec
        self.program = program
        self.input_value = input_value
        self.time_limit = time_limit
        self.draws = draws
        self.capture = capture
        self.remaining = spec.internal_budget
        self.obs: list[int] = []
        self.verdict: Verdict | None = None
        if spec.task is Task.PROG_VERIFICATION:
            self.probes = list(_standard_probes(program))
        else:
            self.probes = [input_value]

    def steps_used(self) -> int:
        return min(self.spec.internal_budget - self.remaining, self.spec.internal_budget)

    def _conclude(self, code: str) -> None:
        self.verdict = Verdict(self.spec.task, code)

    def _inconclusive(self) -> None:
        if self.behavior.lie_on_inconclusive:
            self._conclude(_POSITIVE_CLAIM[self.spec.task])
        else:
            self.verdict = dont_know(self.spec.task)

    def next_ticket(self) -> SimTicket | None:
        if self.verdict is not None:
            return None
        if not self.probes or self.remaining < 1:
            self._inconclusive()
            return None
        probe = self.probes[0]
        task = self.spec.task
        if task is Task.TIME_BOUNDED:
            assert self.time_limit is not None
            fuel = Fuel(self.time_limit, OraclePolicy.METERED)
        else:
            fuel = Fuel(self.remaining, OraclePolicy.FREE)
        return SimTicket(
            program=self.program,
            input_value=probe,
            fuel=fuel,
            seed=self.draws.seed_for_sim(),
            work_budget=self.remaining,
            on_done=None,
            capture_hashes=self.capture,
            cycle_cap=M.DEFAULT_CYCLE_CAP if self.behavior.cycle_detection else 0,
        )

    def feed(self, end: SimEnd) -> None:
        self.remaining -= min(end.work_used, self.remaining)
        if self.capture:
            self.obs.extend(end.machine.hashes)
        task = self.spec.task
        report = end.report
        if end.truncated and not end.cap_was_budget:
            # The work limit that fired was inherited from an enclosing
            # simulation, not this verifier's own budget: the enclosing
            # verifier is itself out of work, so abstain.
            self._inconclusive()
            return
        # A run that consumed random draws only witnesses its own seed, so
        # halting conclusions below insist the simulation was deterministic.
        drew = bool(end.machine.draws)
        if task is Task.INSTANCE_HALTING:
            if report is not None and report.halted and not drew:
                self._conclude(HALTS)
            elif report is not None and report.cycled and not drew:
                self._conclude(DOES_NOT_HALT)
            else:
                self._inconclusive()
        elif task is Task.TIME_BOUNDED:
            if report is not None and report.halted and not drew:
                self._conclude(HALTS_WITHIN_T)
            elif report is not None and not drew and (
                report.cycled or report.outcome is M.Outcome.FUEL_EXHAUSTED
            ):
                # fuel here is the question's own T: exhausting it *is* the
                # does-not-halt-within-T answer, and a cycle can never halt
                self._conclude(DOES_NOT_HALT_WITHIN_T)
            else:
                self._inconclusive()
        elif task is Task.PROG_VERIFICATION:
            if report is not None and report.cycled:
                self._conclude(NOT_WELL_BEHAVED)
            elif report is not None and report.halted:
                self.probes.pop(0)
                if not self.probes:
                    # every probe halted; that is evidence, not proof
                    self._inconclusive()
            else:
                self._inconclusive()
        elif task is Task.RANDOMIZED_HALTING:
            if report is not None and report.halted and not drew:
                self._conclude(ALWAYS_HALTS)  # deterministic halt
            elif report is not None and report.cycled and not drew:
                self._conclude(NEVER_HALTS)  # deterministic divergence
            else:
                self._inconclusive()
        else:  # pragma: no cover
            raise AssertionError(task)


# --------------------------------------------------------------------------
# Registry: verifier table + the machine's oracle binding.


class Registry:
    """Verifier table addressed by string id; doubles as the oracle binding
    that resolves ``oracle`` and ``check-trace`` transitions."""

    def __init__(self) -> None:
        self._specs: dict[str, VerifierSpec] = {}
        self._behaviors: dict[str, _Behavior] = {}
        # Re-entrancy latch for arm-comparison queries.  A pull of a
        # simulating verifier can reach another arm comparison inside the
        # simulated program, whose pulls reach another, without end — the
        # regress is the construction's, but it must surface as an
        # inconclusive run, not a blown stack.  One active comparison per
        # registry; a nested one fails the run it belongs to, and a bounded
        # simulator sees that as an inconclusive simulation and abstains.
        self._bandit_active = False

    def register(self, spec: VerifierSpec, behavior: _Behavior) -> VerifierSpec:
        if spec.id in self._specs:
            raise ValueError(f"verifier id {spec.id!r} already registered")
        if spec.id == M.MACHINE_ORACLE_ID:
            raise ValueError(f"{spec.id!r} is reserved")
        self._specs[spec.id] = spec
        self._behaviors[spec.id] = behavior
        return spec

    def get(self, verifier_id: str) -> VerifierSpec:
        try:
            return self._specs[verifier_id]
        except KeyError:
            raise UnboundOracle(verifier_id) from None

    def spec_of(self, verifier: "VerifierSpec | str") -> VerifierSpec:
        return verifier if isinstance(verifier, VerifierSpec) else self.get(verifier)

    def has(self, verifier_id: str) -> bool:
        return verifier_id in self._specs

    def ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._specs))

    # -- oracle binding ----------------------------------------------------

    def handle(self, req: OracleRequest, ctx: HandlerCtx) -> Directive:
        if req.kind == "check-trace":
            return self._handle_check_trace(req)
        if req.verifier_id == M.MACHINE_ORACLE_ID:
            return self._handle_machine_query(req, ctx)
        if req.query == N.QUERY_BEST_ARM:
            return self._handle_best_arm(req, ctx)
        return self._handle_verdict_query(req, ctx)

    def _handle_check_trace(self, req: OracleRequest) -> Directive:
        prog_v, trace_v = req.args
        assert isinstance(prog_v, V.ProgramVal) and isinstance(trace_v, V.TraceVal)
        if not self.has(req.verifier_id):
            return Deliver(V.IntVal(0), charge=0, work_cost=1)
        ok, cost = self._replay(req.verifier_id, prog_v.program, trace_v.trace)
        return Deliver(V.IntVal(1 if ok else 0), charge=0, work_cost=cost)

    def _handle_verdict_query(self, req: OracleRequest, ctx: HandlerCtx) -> Directive:
        spec = self.get(req.verifier_id)
        behavior = self._behaviors[req.verifier_id]
        family = family_of_answer(req.query)
        if family is not spec.task:
            raise OracleProtocolError(
                f"verifier {spec.id!r} answers {spec.task.value}, not {req.query!r}"
            )
        subject = req.args[0]
        if not isinstance(subject, V.ProgramVal):
            return Fault("oracle subject must be a program")
        input_value: V.Value = req.args[1] if len(req.args) > 1 else V.IntVal(0)
        time_limit: int | None = None
        if spec.task is Task.TIME_BOUNDED:
            t_arg = req.args[2]
            if not isinstance(t_arg, V.IntVal) or t_arg.value < 1:
                return Fault("time limit must be a positive integer")
            time_limit = t_arg.value

        def to_result(verdict: Verdict) -> V.Value:
            return V.IntVal(1 if verdict.code == req.query else 0)

        if not isinstance(behavior, _SimBehavior):
            verdict, steps, _ = behavior.answer(
                self, spec, subject.program, input_value, time_limit, ctx,
                capture=False, pull_cap=ctx.pull_cap,
            )
            return Deliver(to_result(verdict), charge=steps, work_cost=1)

        state = _SimState(behavior, spec, subject.program, input_value, time_limit, ctx, False)

        def finish(end: SimEnd) -> Directive:
            state.feed(end)
            nxt = state.next_ticket()
            if nxt is not None:
                nxt.on_done = finish
                return Spawn(nxt)
            assert state.verdict is not None
            return Deliver(to_result(state.verdict), charge=state.steps_used(), work_cost=0)

        first = state.next_ticket()
        if first is None:
            assert state.verdict is not None
            return Deliver(to_result(state.verdict), charge=state.steps_used(), work_cost=1)
        first.on_done = finish
        return Spawn(first)

    def _handle_best_arm(self, req: OracleRequest, ctx: HandlerCtx) -> Directive:
        from .bandit import Arm, BAIConfig, identify_best

        spec = self.get(req.verifier_id)
        subject = req.args[0]
        if not isinstance(subject, V.ProgramVal):
            return Fault("oracle subject must be a program")
        input_value = req.args[1]
        assert req.delta is not None
        delta = Fraction(req.delta[0], req.delta[1])

        if self._bandit_active:
            return FailRun()

        def reference_pull() -> int:
            return ctx.draw_bit(1, 2)

        def verifier_pull() -> int:
            seed = ctx.draw_u64()
            ans = verify(self, spec, subject.program, input_value, seed=seed)
            return 1 if ans.verdict.code == HALTS else 0

        self._bandit_active = True
        try:
            result = identify_best(
                Arm.from_sampler(reference_pull),
                Arm.from_sampler(verifier_pull),
                BAIConfig(delta=delta, pull_cap=ctx.pull_cap),
                seed=0,
            )
        finally:
            self._bandit_active = False
        if result.cap_exceeded:
            return FailRun()
        value = V.IntVal(1 if result.winner == 2 else 0)
        return Deliver(value, charge=result.total_pulls, work_cost=result.total_pulls)

    def _handle_machine_query(self, req: OracleRequest, ctx: HandlerCtx) -> Directive:
        def not_allowed() -> Directive:
            return Deliver(V.StrVal(C.NOT_ALLOWED), charge=0, work_cost=1)

        if req.query == N.QUERY_STEP:
            state_v, move_v = req.args
            if not (isinstance(state_v, V.StrVal) and isinstance(move_v, V.StrVal)):
                return Fault("machine step expects (state, move) strings")
            if move_v.text != C.ADVANCE:
                return not_allowed()
            try:
                stepped = C.step_config(state_v.text, self, pull_cap=ctx.pull_cap)
            except C.ConfigError:
                return not_allowed()
            if stepped is None:
                return not_allowed()
            nxt, cost = stepped
            return Deliver(V.StrVal(nxt), charge=cost, work_cost=cost)
        if req.query == N.QUERY_AT_HALT:
            (state_v,) = req.args
            if not isinstance(state_v, V.StrVal):
                return Fault("machine at-halt expects a state string")
            hit = C.is_halted_config(state_v.text)
            return Deliver(V.IntVal(1 if hit else 0), charge=0, work_cost=1)
        if req.query == N.QUERY_ADJACENCY:
            bound_v, vertex = req.args
            if not isinstance(bound_v, V.IntVal):
                return Fault("machine adjacency expects an integer bound")
            try:
                neighbors, cost = self._adjacency(bound_v.value, vertex, ctx.pull_cap)
            except C.ConfigError:
                neighbors, cost = [], 1
            lst: V.Value = V.IntVal(0)
            for item in reversed(neighbors):
                lst = V.PairVal(item, lst)
            return Deliver(lst, charge=cost, work_cost=max(cost, 1))
        raise UnboundOracle(f"{req.verifier_id}:{req.query}")

    def _adjacency(
        self, bound: int, vertex: V.Value, pull_cap: int
    ) -> tuple[list[V.Value], int]:
        """Out-edges of a reachability vertex ``(steps-so-far, config)``;
        halted configurations step to the sink, live ones to their successor
        when the cumulative cost stays within the bound."""
        if isinstance(vertex, V.StrVal) and vertex.text == C.HALT_SINK:
            return [], 1
        if not (
            isinstance(vertex, V.PairVal)
            and isinstance(vertex.left, V.IntVal)
            and isinstance(vertex.right, V.StrVal)
        ):
            return [], 1
        k, cfg = vertex.left.value, vertex.right.text
        if C.is_halted_config(cfg):
            return [V.StrVal(C.HALT_SINK)], 1
        stepped = C.step_config(cfg, self, pull_cap=pull_cap)
        if stepped is None:
            return [], 1
        nxt, cost = stepped
        if k + cost > bound:
            return [], cost
        return [V.PairVal(V.IntVal(k + cost), V.StrVal(nxt))], cost

    # -- replay ------------------------------------------------------------

    def _replay(
        self,
        verifier_id: str,
        program: N.Program,
        trace: Trace,
        input_value: V.Value = V.IntVal(0),
        time_limit: int | None = None,
    ) -> tuple[bool, int]:
        """Re-run a verifier against a trace's recorded draws; genuine traces
        reproduce the hash log and verdict exactly.  Without an explicit
        instance, replay uses the canonical one (input 0, the verifier's own
        budget as the time limit)."""
        spec = self.get(verifier_id)
        behavior = self._behaviors[verifier_id]
        if trace.verifier_id != verifier_id or trace.subject_program != program:
            return False, 1
        if trace.final_verdict.task is not spec.task:
            return False, 1
        if spec.task is Task.TIME_BOUNDED and time_limit is None:
            time_limit = spec.internal_budget
        source = DrawSource(replay=trace.random_draws)
        try:
            verdict, steps, obs = behavior.answer(
                self, spec, program, input_value, time_limit, source,
                capture=True, pull_cap=M.DEFAULT_PULL_CAP,
            )
        except ReplayExhausted:
            return False, 1
        ok = (
            verdict == trace.final_verdict
            and obs == trace.step_hashes
            and source.exhausted_ok
        )
        return ok, max(steps, 1)


# --------------------------------------------------------------------------
# Public operations.


def verify(
    registry: Registry,
    verifier: VerifierSpec | str,
    program: N.Program,
    input_value: V.Value = V.IntVal(0),
    time_limit: int | None = None,
    *,
    seed: int = 0,
    pull_cap: int = M.DEFAULT_PULL_CAP,
) -> VerifierAnswer:
    """Ask a verifier about an instance.  Total: abstains rather than raise,
    and is deterministic given (verifier, program, input, time limit, seed)."""
    vid = verifier.id if isinstance(verifier, VerifierSpec) else verifier
    spec = registry.get(vid)
    behavior = registry._behaviors[vid]
    if spec.task is Task.TIME_BOUNDED:
        if time_limit is None:
            raise ValueError("time-bounded verification needs a time limit")
        if time_limit < 1:
            raise ValueError("time limit must be positive")
    source = DrawSource(seed)
    verdict, steps, obs = behavior.answer(
        registry, spec, program, input_value, time_limit, source,
        capture=True, pull_cap=pull_cap,
    )
    steps = min(steps, spec.internal_budget)
    trace = Trace(spec.id, program, tuple(source.log), obs, verdict)
    return VerifierAnswer(verdict, steps, trace)


def validate_trace(
    registry: Registry, verifier_id: str, program: N.Program, trace: Trace
) -> bool:
    """True iff replaying the named verifier on the program with the trace's
    recorded draws reproduces its hash log and final verdict.  Replays the
    canonical instance; use :func:`validate_trace_with` when the answer was
    about some other input or time limit."""
    if not registry.has(verifier_id):
        return False
    ok, _ = registry._replay(verifier_id, program, trace)
    return ok


def validate_trace_with(
    registry: Registry,
    verifier_id: str,
    program: N.Program,
    trace: Trace,
    input_value: V.Value,
    time_limit: int | None = None,
) -> bool:
    """Trace validation against an explicitly named instance."""
    if not registry.has(verifier_id):
        return False
    ok, _ = registry._replay(verifier_id, program, trace, input_value, time_limit)
    return ok


@dataclass(frozen=True)
class FalseClaim:
    entry_id: str
    claimed: Verdict
    certified: str  # "halts in <n>" | "cycles (<p>,<l>)" description


@dataclass(frozen=True)
class SafetyAuditReport:
    verifier_id: str
    corpus_size: int
    false_claims: tuple[FalseClaim, ...]
    abstentions: int
    undetermined: int

    @property
    def empirically_safe(self) -> bool:
        return not self.false_claims


def _contradicts(claim: Verdict, report: HaltReport, time_limit: int | None) -> bool:
    """One-sided falsification: a claim is false only when a certificate
    (halt witness or cycle) directly contradicts it."""
    code = claim.code
    if code == DONT_KNOW:
        return False
    if code in (HALTS, ALWAYS_HALTS, WELL_BEHAVED):
        # well-behaved / always-halts imply halting on the audited input+seed
        return report.cycled
    if code in (DOES_NOT_HALT, NEVER_HALTS):
        return report.halted
    if code == HALTS_WITHIN_T:
        assert time_limit is not None
        return report.cycled or (report.halted and report.steps > time_limit)
    if code == DOES_NOT_HALT_WITHIN_T:
        assert time_limit is not None
        return report.halted and report.steps <= time_limit
    # not-well-behaved and halts-on-some-randomness assert existentials a
    # single certified run cannot refute
    return False


def audit_safety(
    registry: Registry,
    verifier: VerifierSpec | str,
    corpus: Sequence[tuple[N.Program, V.Value]],
    oracle_budget: int,
    *,
    time_limit: int | None = None,
    seed: int = 0,
) -> SafetyAuditReport:
    """Compare a verifier's claims against machine-certified ground truth.

    Entries whose ground truth cannot be certified within the oracle budget
    are excluded from the false-claim comparison and counted separately.
    """
    spec = registry.spec_of(verifier)
    if spec.task is Task.TIME_BOUNDED and time_limit is None:
        raise ValueError("auditing a time-bounded verifier needs a time limit")
    policy = OraclePolicy.METERED if spec.task is Task.TIME_BOUNDED else OraclePolicy.FREE
    false_claims: list[FalseClaim] = []
    abstentions = 0
    undetermined = 0
    for idx, (program, input_value) in enumerate(corpus):
        entry_seed = split_seed(seed, idx)
        truth = M.run(
            program,
            input_value,
            Fuel(oracle_budget, policy),
            entry_seed,
            registry,
            capture_hashes=False,
        ).report
        answer = verify(
            registry, spec, program, input_value,
            time_limit if spec.task is Task.TIME_BOUNDED else None,
            seed=split_seed(entry_seed, 1),
        )
        if answer.verdict.is_abstention:
            abstentions += 1
            continue
        if truth.outcome is M.Outcome.FUEL_EXHAUSTED:
            undetermined += 1
            continue
        if _contradicts(answer.verdict, truth, time_limit):
            certified = (
                f"halts in {truth.steps}"
                if truth.halted
                else f"cycles ({truth.prefix_len},{truth.cycle_len})"
            )
            false_claims.append(FalseClaim(f"entry-{idx}", answer.verdict, certified))
    return SafetyAuditReport(
        spec.id, len(corpus), tuple(false_claims), abstentions, undetermined
    )


@dataclass(frozen=True)
class ProbEstimate:
    hits: int
    trials: int
    estimate: Fraction
    interval: tuple[float, float]  # Wilson, 95%

    def contains(self, p: float) -> bool:
        return self.interval[0] <= p <= self.interval[1]


def wilson_interval(hits: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    phat = hits / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def estimate_answer_probability(
    registry: Registry,
    verifier: VerifierSpec | str,
    program: N.Program,
    input_value: V.Value,
    target: Verdict | str,
    trials: int,
    seed_base: int,
    *,
    time_limit: int | None = None,
) -> ProbEstimate:
    """Empirical frequency of a target verdict over independent seeds, with
    a 95% Wilson interval."""
    if trials < 1:
        raise ValueError("need at least one trial")
    spec = registry.spec_of(verifier)
    code = target.code if isinstance(target, Verdict) else target
    hits = 0
    for i in range(trials):
        ans = verify(
            registry, spec, program, input_value, time_limit,
            seed=split_seed(seed_base, i),
        )
        if ans.verdict.code == code:
            hits += 1
    return ProbEstimate(hits, trials, Fraction(hits, trials), wilson_interval(hits, trials))


# --------------------------------------------------------------------------
# Factories.


def make_bounded_sim_verifier(
    registry: Registry,
    budget: int,
    task: Task = Task.INSTANCE_HALTING,
    verifier_id: str | None = None,
) -> VerifierSpec:
    """An honest simulator: claims only what a witnessed halt or a cycle
    certificate proves, abstains otherwise.  Safe by construction."""
    vid = verifier_id or f"bsim-{task.value}-{budget}"
    spec = VerifierSpec(
        vid,
        task,
        budget,
        randomized=task is Task.RANDOMIZED_HALTING,
        claimed_safe=True,
    )
    return registry.register(spec, _SimBehavior())


def make_liar_verifier(
    registry: Registry, inner_budget: int, verifier_id: str | None = None
) -> VerifierSpec:
    """An *unsafe* program-verifier: simulates without cycle detection and
    declares well-behaved whenever simulation is inconclusive.  Registered
    with claimed_safe=True — the trust is mistaken, which is the point."""
    vid = verifier_id or f"liar-{inner_budget}"
    spec = VerifierSpec(
        vid, Task.PROG_VERIFICATION, inner_budget, randomized=False, claimed_safe=True
    )
    return registry.register(
        spec, _SimBehavior(cycle_detection=False, lie_on_inconclusive=True)
    )


def make_stub_verifier(
    registry: Registry,
    task: Task,
    code: str,
    claimed_steps: int = 1,
    verifier_id: str | None = None,
) -> VerifierSpec:
    """A forced answer: always the given verdict, reporting the given cost.
    Unsafe in general; the diagonal experiments use stubs to walk every
    branch of the case analyses."""
    if family_of_answer(code) is not task and code != DONT_KNOW:
        raise ValueError(f"{code!r} is not an answer for {task.value}")
    vid = verifier_id or f"stub-{code}-{claimed_steps}"
    spec = VerifierSpec(
        vid, task, max(claimed_steps, 1), randomized=False, claimed_safe=False
    )
    return registry.register(spec, _StubBehavior(code, claimed_steps))


def make_biased_stub_verifier(
    registry: Registry,
    task: Task,
    code: str,
    prob: Fraction,
    verifier_id: str | None = None,
) -> VerifierSpec:
    """Answers the given verdict on a prob-biased draw, otherwise abstains."""
    if family_of_answer(code) is not task:
        raise ValueError(f"{code!r} is not an answer for {task.value}")
    if not 0 <= prob <= 1:
        raise ValueError("probability must be in [0, 1]")
    vid = verifier_id or f"biased-{code}-{prob.numerator}-{prob.denominator}"
    spec = VerifierSpec(vid, task, 1, randomized=True, claimed_safe=False)
    return registry.register(spec, _BiasedStubBehavior(code, prob))


def make_abstain_verifier(
    registry: Registry, task: Task, verifier_id: str | None = None
) -> VerifierSpec:
    """Always abstains.  Trivially safe."""
    vid = verifier_id or f"abstain-{task.value}"
    spec = VerifierSpec(vid, task, 1, randomized=False, claimed_safe=True)
    return registry.register(spec, _AbstainBehavior())
