"""Named, seeded, reproducible experiments.

Each subcommand stages one of the diagonal phenomena end to end: build the
program against a chosen verifier, run the self-instance, and write a JSON
report whose verdict is gated on machine-checked evidence.  A report says
``ConfirmsTheorem`` only when every certificate it embeds has been
re-verified (cycle replays, halt-witness re-runs, trace validation);
``ExhibitsUnsafety`` marks the deliberate counter-demos where a forced or
lying verifier gets caught by a contradicting certificate; anything short
of both is ``Inconclusive``.

Reports are deterministic given the config — the timestamp is added only
at write time, in its own field, so regenerated report bodies compare
byte-identical.
"""

from __future__ import annotations

import datetime as _dt
import enum
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable

from . import corpus as corpus_lib
from .calibration import CalibrationVerdict, audit_calibration
from .diagonal import (
    TURING_T_BUILDER,
    TURING_T_V2_BUILDER,
    build_godel_program,
    build_godel_program_random,
    build_turing_T,
    build_turing_T_v2,
    build_turing_program,
    build_turing_program_v2,
    godel_self_instance,
    is_regress_evidence,
    measure_overhead_c,
    probe_regress,
    self_instance,
)
from .lang import values as V
from .lang.machine import (
    DEFAULT_PULL_CAP,
    Fuel,
    HaltReport,
    OraclePolicy,
    check_cycle_report,
    run,
)
from .lang.nodes import Program
from .lang.parser import parse_program, serialize_program
from .lang.rng import split_seed
from .lang.trace import Trace
from .lang.verdicts import Task, Verdict, family_of_answer
from .reductions import (
    Infeasible,
    NotReachable,
    Path as GraphPath,
    Plan,
    halting_to_planning,
    solve_planning,
    solve_reachability,
    tb_halting_to_reachability,
    value_to_json,
    verify_certificate,
    verify_path,
    verify_plan,
)
from .verifiers import (
    Registry,
    VerifierSpec,
    audit_safety,
    estimate_answer_probability,
    make_abstain_verifier,
    make_biased_stub_verifier,
    make_bounded_sim_verifier,
    make_liar_verifier,
    make_stub_verifier,
    validate_trace,
    verify,
)

SCHEMA_VERSION = 1
DEFAULT_FUEL = 10**6
DEFAULT_TRIALS = 300
DEFAULT_SIM_BUDGET = 10_000
T_GRID = (1_000, 10_000, 100_000)
REACHABILITY_T_GRID = (5, 12, 30)
CORPUS_SIZE = 60


class Summary(enum.Enum):
    CONFIRMS = "ConfirmsTheorem"
    UNSAFE = "ExhibitsUnsafety"
    INCONCLUSIVE = "Inconclusive"


class ConfigError(ValueError):
    """A config field is missing, malformed, or out of range."""


class UnknownExperiment(KeyError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    verifier: str | None = None  # "kind[:arg[:arg]]"; None picks the demo default
    seeds: tuple[int, ...] = (0,)
    fuel: int = DEFAULT_FUEL
    t: int | None = None
    trials: int | None = None
    out: str | None = None

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.fuel < 4:
            raise ConfigError("fuel must be at least 4")
        if self.t is not None and self.t < 1:
            raise ConfigError("T must be positive")
        if self.trials is not None and self.trials < 1:
            raise ConfigError("trials must be positive")


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    verifier: dict
    targets_unsafe: bool
    per_seed: tuple[dict, ...]
    certificates: tuple[dict, ...]
    details: dict
    summary: Summary

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.config.experiment,
            "verifier": self.verifier,
            "seeds": list(self.config.seeds),
            "fuel": self.config.fuel,
            "T": self.config.t,
            "trials": self.config.trials,
            "out": self.config.out,
            "targets_unsafe": self.targets_unsafe,
            "per_seed": list(self.per_seed),
            "certificates": list(self.certificates),
            "details": self.details,
            "summary": self.summary.value,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def exit_code(report: ExperimentReport) -> int:
    """0 iff the experiment reached its intended verdict: ConfirmsTheorem,
    or ExhibitsUnsafety when the verifier under test is unsafe by design."""
    if report.summary is Summary.CONFIRMS:
        return 0
    if report.summary is Summary.UNSAFE and report.targets_unsafe:
        return 0
    return 1


def write_report(report: ExperimentReport, path: str | Path) -> None:
    body = report.to_json()
    body["generated_at"] = (
        _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    )
    Path(path).write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# Verifier construction from CLI text.

_UNSAFE_KINDS = frozenset({"stub", "biased-stub", "liar"})


def _parse_verifier_text(text: str) -> tuple[str, list[str]]:
    kind, *args = text.split(":")
    if not kind:
        raise ConfigError(f"empty verifier spec {text!r}")
    return kind, args


def _make_verifier(
    registry: Registry, task: Task, text: str, *, default_budget: int = DEFAULT_SIM_BUDGET
) -> VerifierSpec:
    kind, args = _parse_verifier_text(text)
    try:
        if kind == "bounded-sim":
            budget = int(args[0]) if args else default_budget
            return make_bounded_sim_verifier(registry, budget, task)
        if kind == "abstain":
            return make_abstain_verifier(registry, task)
        if kind == "liar":
            budget = int(args[0]) if args else default_budget
            return make_liar_verifier(registry, budget)
        if kind == "stub":
            if not args:
                raise ConfigError("stub needs a verdict code: stub:<code>[:steps]")
            claimed = int(args[1]) if len(args) > 1 else 1
            return make_stub_verifier(registry, task, args[0], claimed)
        if kind == "biased-stub":
            if len(args) < 2:
                raise ConfigError("biased stub needs biased-stub:<code>:<num>/<den>")
            num, _, den = args[1].partition("/")
            return make_biased_stub_verifier(
                registry, task, args[0], Fraction(int(num), int(den or "1"))
            )
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad verifier spec {text!r}: {exc}") from exc
    raise ConfigError(f"unknown verifier kind {kind!r}")


def _verifier_kind(text: str) -> str:
    return _parse_verifier_text(text)[0]


def _verifier_task_for(text: str, default: Task) -> Task:
    """Stub codes imply their task family; everything else uses the demo's."""
    kind, args = _parse_verifier_text(text)
    if kind in ("stub", "biased-stub") and args:
        family = family_of_answer(args[0])
        if family is not None:
            return family
    if kind == "liar":
        return Task.PROG_VERIFICATION
    return default


def _verifier_echo(text: str, spec: VerifierSpec | None) -> dict:
    echo: dict = {"requested": text}
    if spec is not None:
        echo.update(
            id=spec.id,
            task=spec.task.value,
            internal_budget=spec.internal_budget,
            claimed_safe=spec.claimed_safe,
        )
    return echo


# --------------------------------------------------------------------------
# Certificate serialization + re-verification.


def trace_to_json(trace: Trace) -> dict:
    return {
        "verifier_id": trace.verifier_id,
        "program": serialize_program(trace.subject_program),
        "draws": list(trace.random_draws),
        "step_hashes": list(trace.step_hashes),
        "verdict": {"task": trace.final_verdict.task.value, "code": trace.final_verdict.code},
    }


def trace_from_json(obj: dict) -> Trace:
    return Trace(
        verifier_id=obj["verifier_id"],
        subject_program=parse_program(obj["program"]),
        random_draws=tuple(obj["draws"]),
        step_hashes=tuple(obj["step_hashes"]),
        final_verdict=Verdict(Task(obj["verdict"]["task"]), obj["verdict"]["code"]),
    )


def _instance_json(program: Program, input_value: V.Value) -> dict:
    return {"program": serialize_program(program), "input": _value_json_loose(input_value)}


def _value_json_loose(v: V.Value):
    """Like the instance-JSON encoding, but traces are representable too
    (reports embed full diagonal inputs, which can carry traces)."""
    if isinstance(v, V.TraceVal):
        return {"trace": trace_to_json(v.trace)}
    if isinstance(v, V.PairVal):
        return {"pair": [_value_json_loose(v.left), _value_json_loose(v.right)]}
    return value_to_json(v)


def _halt_certificate(
    program: Program,
    input_value: V.Value,
    seed: int,
    fuel: Fuel,
    report: HaltReport,
    binding: Registry,
    *,
    pull_cap: int = DEFAULT_PULL_CAP,
) -> dict:
    """A halt witness plus its re-verification: an independent re-run must
    reproduce the step count and value exactly."""
    assert report.halted and report.value is not None
    again = run(
        program, input_value, fuel, seed, binding,
        capture_hashes=False, pull_cap=pull_cap,
    ).report
    verified = (
        again.halted and again.steps == report.steps and again.value == report.value
    )
    return {
        "kind": "halt-witness",
        "instance": _instance_json(program, input_value),
        "seed": seed,
        "fuel": fuel.max_steps,
        "policy": fuel.oracle_policy.value,
        "steps": report.steps,
        "value": _value_json_loose(report.value),
        "verified": verified,
    }


def _cycle_certificate(
    program: Program,
    input_value: V.Value,
    seed: int,
    fuel: Fuel,
    report: HaltReport,
    binding: Registry,
) -> dict:
    verified = check_cycle_report(program, input_value, fuel, seed, binding, report)
    return {
        "kind": "cycle",
        "instance": _instance_json(program, input_value),
        "seed": seed,
        "fuel": fuel.max_steps,
        "policy": fuel.oracle_policy.value,
        "prefix_len": report.prefix_len,
        "cycle_len": report.cycle_len,
        "steps": report.steps,
        "verified": verified,
    }


def _certs_ok(certificates: list[dict]) -> bool:
    return all(c.get("verified", False) for c in certificates)


# --------------------------------------------------------------------------
# Experiments.


def _exp_demo_godel(cfg: ExperimentConfig) -> ExperimentReport:
    vtext = cfg.verifier or f"bounded-sim:{DEFAULT_SIM_BUDGET}"
    targets_unsafe = _verifier_kind(vtext) in _UNSAFE_KINDS
    per_seed: list[dict] = []
    certificates: list[dict] = []
    echo_spec: VerifierSpec | None = None
    all_confirmed = True
    any_unsafe = False

    for seed in cfg.seeds:
        registry = Registry()
        spec = _make_verifier(registry, Task.PROG_VERIFICATION, vtext)
        echo_spec = spec
        godel = build_godel_program(registry, spec.id)
        answer = verify(registry, spec.id, godel, seed=seed)
        genuine = validate_trace(registry, spec.id, godel, answer.trace)
        outcome: dict = {
            "seed": seed,
            "verdict": answer.verdict.code,
            "verifier_steps": answer.steps_used,
            "trace_genuine": genuine,
        }

        program, diag_input = godel_self_instance(godel, answer.trace)
        fuel = Fuel(cfg.fuel, OraclePolicy.FREE)
        if answer.verdict.code == "well-behaved":
            # a certified-well-behaved trace sends the program into
            # self-evaluation; the evidence of unsafety is the regress
            probes = probe_regress(
                registry, program, diag_input,
                (cfg.fuel // 4, cfg.fuel // 2, cfg.fuel), seed,
            )
            regress = is_regress_evidence(probes)
            outcome["regress"] = regress
            outcome["eval_depths"] = [p.max_eval_depth for p in probes]
            any_unsafe = any_unsafe or regress
            all_confirmed = False
        else:
            report = run(program, diag_input, fuel, seed, registry).report
            returned_zero = report.halted and report.value == V.IntVal(0)
            outcome["run_steps"] = report.steps
            outcome["returned_zero"] = returned_zero
            if report.halted:
                certificates.append(
                    _halt_certificate(program, diag_input, seed, fuel, report, registry)
                )
            tampered = Trace(
                answer.trace.verifier_id,
                answer.trace.subject_program,
                answer.trace.random_draws,
                answer.trace.step_hashes,
                Verdict(Task.PROG_VERIFICATION, "well-behaved"),
            )
            _, tampered_input = godel_self_instance(godel, tampered)
            tampered_report = run(program, tampered_input, fuel, seed, registry).report
            tampered_zero = (
                tampered_report.halted and tampered_report.value == V.IntVal(0)
            )
            outcome["tampered_trace_accepted"] = validate_trace(
                registry, spec.id, godel, tampered
            )
            outcome["tampered_returned_zero"] = tampered_zero
            confirmed = (
                answer.verdict.is_abstention
                and genuine
                and returned_zero
                and tampered_zero
                and not outcome["tampered_trace_accepted"]
            )
            all_confirmed = all_confirmed and confirmed
        per_seed.append(outcome)

    if all_confirmed and _certs_ok(certificates):
        summary = Summary.CONFIRMS
    elif any_unsafe:
        summary = Summary.UNSAFE
    else:
        summary = Summary.INCONCLUSIVE
    return ExperimentReport(
        cfg, _verifier_echo(vtext, echo_spec), targets_unsafe,
        tuple(per_seed), tuple(certificates), {}, summary,
    )


def _exp_demo_turing(cfg: ExperimentConfig) -> ExperimentReport:
    vtext = cfg.verifier or f"bounded-sim:{DEFAULT_SIM_BUDGET}"
    targets_unsafe = _verifier_kind(vtext) in _UNSAFE_KINDS
    per_seed: list[dict] = []
    certificates: list[dict] = []
    echo_spec: VerifierSpec | None = None
    all_confirmed = True
    any_unsafe = False

    for seed in cfg.seeds:
        registry = Registry()
        spec = _make_verifier(registry, Task.INSTANCE_HALTING, vtext)
        echo_spec = spec
        program, diag_input = self_instance(build_turing_program(registry, spec.id))
        answer = verify(registry, spec.id, program, diag_input, seed=seed)
        fuel = Fuel(cfg.fuel, OraclePolicy.FREE)
        report = run(program, diag_input, fuel, seed, registry).report
        outcome = {
            "seed": seed,
            "verdict": answer.verdict.code,
            "outcome": report.outcome.value,
            "steps": report.steps,
        }
        if report.cycled:
            certificates.append(
                _cycle_certificate(program, diag_input, seed, fuel, report, registry)
            )
            all_confirmed = all_confirmed and answer.verdict.is_abstention
        elif report.halted:
            certificates.append(
                _halt_certificate(program, diag_input, seed, fuel, report, registry)
            )
            contradicted = answer.verdict.code == "does-not-halt"
            outcome["claim_contradicted"] = contradicted
            any_unsafe = any_unsafe or contradicted
            all_confirmed = False
        else:
            all_confirmed = False
        per_seed.append(outcome)

    if all_confirmed and certificates and _certs_ok(certificates):
        summary = Summary.CONFIRMS
    elif any_unsafe and _certs_ok(certificates):
        summary = Summary.UNSAFE
    else:
        summary = Summary.INCONCLUSIVE
    return ExperimentReport(
        cfg, _verifier_echo(vtext, echo_spec), targets_unsafe,
        tuple(per_seed), tuple(certificates), {}, summary,
    )


def _exp_demo_time_bounded(cfg: ExperimentConfig) -> ExperimentReport:
    vtext = cfg.verifier or "bounded-sim"
    kind = _verifier_kind(vtext)
    targets_unsafe = kind in _UNSAFE_KINDS
    grid = (cfg.t,) if cfg.t is not None else T_GRID
    c = measure_overhead_c(TURING_T_BUILDER)
    per_seed: list[dict] = []
    certificates: list[dict] = []
    echo_spec: VerifierSpec | None = None
    all_confirmed = True
    any_unsafe = False

    for seed in cfg.seeds:
        for t in grid:
            if t <= c:
                raise ConfigError(f"T={t} does not cover the dispatch overhead c={c}")
            registry = Registry()
            if kind == "bounded-sim":
                spec = make_bounded_sim_verifier(registry, t - c, Task.TIME_BOUNDED)
            else:
                spec = _make_verifier(registry, Task.TIME_BOUNDED, vtext)
            echo_spec = spec
            program, diag_input = self_instance(build_turing_T(registry, spec.id, t))
            answer = verify(registry, spec.id, program, diag_input, t, seed=seed)
            outcome = {
                "seed": seed,
                "T": t,
                "verifier_id": spec.id,
                "verdict": answer.verdict.code,
                "verifier_steps": answer.steps_used,
            }
            if answer.verdict.is_abstention:
                outcome["stopped_at_budget"] = answer.steps_used == spec.internal_budget
                all_confirmed = all_confirmed and (
                    kind != "bounded-sim" or answer.steps_used == t - c
                )
            else:
                fuel = Fuel(cfg.fuel, OraclePolicy.METERED)
                report = run(program, diag_input, fuel, seed, registry).report
                outcome["outcome"] = report.outcome.value
                outcome["steps"] = report.steps
                if report.halted:
                    certificates.append(
                        _halt_certificate(program, diag_input, seed, fuel, report, registry)
                    )
                    contradicted = (
                        answer.verdict.code == "does-not-halt-within-t"
                        and report.steps <= t
                    )
                    outcome["claim_contradicted"] = contradicted
                    any_unsafe = any_unsafe or contradicted
                all_confirmed = False
            per_seed.append(outcome)

    details = {"c": c, "grid": list(grid)}
    if all_confirmed and _certs_ok(certificates):
        summary = Summary.CONFIRMS
    elif any_unsafe and _certs_ok(certificates):
        summary = Summary.UNSAFE
    else:
        summary = Summary.INCONCLUSIVE
    return ExperimentReport(
        cfg, _verifier_echo(vtext, echo_spec), targets_unsafe,
        tuple(per_seed), tuple(certificates), details, summary,
    )


def _exp_demo_planning(cfg: ExperimentConfig) -> ExperimentReport:
    per_seed: list[dict] = []
    certificates: list[dict] = []
    all_matched = True
    registry = Registry()

    for seed in cfg.seeds:
        corpus = corpus_lib.build_corpus(CORPUS_SIZE, seed)
        matched = 0
        mismatches: list[dict] = []
        for idx, entry in enumerate(corpus):
            if entry.status == corpus_lib.STATUS_UNDETERMINED:
                mismatches.append({"index": idx, "reason": "undetermined ground truth"})
                continue
            inst = halting_to_planning(entry.program, V.IntVal(0), seed=entry.seed)
            solved = solve_planning(inst, corpus_lib.CERTIFY_FUEL, registry)
            if entry.status == corpus_lib.STATUS_HALTS:
                ok = (
                    isinstance(solved, Plan)
                    and len(solved.moves) == entry.steps
                    and verify_plan(inst, solved, registry)
                )
            else:
                ok = isinstance(solved, Infeasible) and verify_certificate(
                    inst, solved.certificate, registry
                )
                if ok:
                    certificates.append(
                        {
                            "kind": "planning-cycle",
                            "index": idx,
                            "seed": seed,
                            "program": entry.source,
                            "prefix_len": solved.certificate.prefix_len,
                            "cycle_len": solved.certificate.cycle_len,
                            "verified": True,
                        }
                    )
            if ok:
                matched += 1
            else:
                mismatches.append({"index": idx, "status": entry.status})
        all_matched = all_matched and matched == len(corpus)
        per_seed.append(
            {
                "seed": seed,
                "corpus_size": len(corpus),
                "matched": matched,
                "mismatches": mismatches,
                "halting_fraction": corpus.halting_fraction(),
            }
        )

    summary = Summary.CONFIRMS if all_matched and _certs_ok(certificates) else Summary.INCONCLUSIVE
    return ExperimentReport(
        cfg, {"requested": None}, False, tuple(per_seed), tuple(certificates),
        {"corpus_size": CORPUS_SIZE}, summary,
    )


def _exp_demo_reachability(cfg: ExperimentConfig) -> ExperimentReport:
    grid = (cfg.t,) if cfg.t is not None else REACHABILITY_T_GRID
    per_seed: list[dict] = []
    certificates: list[dict] = []
    all_matched = True
    registry = Registry()

    for seed in cfg.seeds:
        corpus = corpus_lib.build_corpus(CORPUS_SIZE, seed)
        matched = 0
        checks = 0
        mismatches: list[dict] = []
        for idx, entry in enumerate(corpus):
            if entry.status == corpus_lib.STATUS_UNDETERMINED:
                mismatches.append({"index": idx, "reason": "undetermined ground truth"})
                continue
            for t in grid:
                checks += 1
                expected = (
                    entry.status == corpus_lib.STATUS_HALTS
                    and entry.steps is not None
                    and entry.steps <= t
                )
                inst = tb_halting_to_reachability(entry.program, V.IntVal(0), t, seed=entry.seed)
                solved = solve_reachability(inst, registry)
                if expected:
                    ok = (
                        isinstance(solved, GraphPath)
                        and len(solved.vertices) - 1 == (entry.steps or 0) + 1
                        and verify_path(inst, solved, registry)
                    )
                else:
                    ok = isinstance(solved, NotReachable) and verify_certificate(
                        inst, solved.certificate, registry
                    )
                if ok:
                    matched += 1
                else:
                    mismatches.append({"index": idx, "T": t, "status": entry.status})
        all_matched = all_matched and matched == checks
        per_seed.append(
            {
                "seed": seed,
                "corpus_size": len(corpus),
                "checks": checks,
                "matched": matched,
                "mismatches": mismatches,
            }
        )

    summary = Summary.CONFIRMS if all_matched else Summary.INCONCLUSIVE
    return ExperimentReport(
        cfg, {"requested": None}, False, tuple(per_seed), tuple(certificates),
        {"grid": list(grid), "corpus_size": CORPUS_SIZE}, summary,
    )


def _exp_demo_v2_halting(cfg: ExperimentConfig) -> ExperimentReport:
    vtext = cfg.verifier or "abstain"
    targets_unsafe = _verifier_kind(vtext) in _UNSAFE_KINDS
    trials = cfg.trials or DEFAULT_TRIALS
    per_seed: list[dict] = []
    certificates: list[dict] = []
    echo_spec: VerifierSpec | None = None
    all_confirmed = True
    any_unsafe = False

    for seed in cfg.seeds:
        registry = Registry()
        spec = _make_verifier(registry, Task.RANDOMIZED_HALTING, vtext)
        echo_spec = spec
        program, diag_input = self_instance(build_turing_program_v2(registry, spec.id))
        fuel = Fuel(cfg.fuel, OraclePolicy.FREE)
        report = run(program, diag_input, fuel, seed, registry).report
        estimate = estimate_answer_probability(
            registry, spec.id, program, diag_input, "always-halts",
            trials, split_seed(seed, 1),
        )
        outcome = {
            "seed": seed,
            "outcome": report.outcome.value,
            "steps": report.steps,
            "always_halts_hits": estimate.hits,
            "trials": estimate.trials,
        }
        if report.halted:
            certificates.append(
                _halt_certificate(program, diag_input, seed, fuel, report, registry)
            )
            all_confirmed = all_confirmed and estimate.hits == 0
        elif report.cycled:
            certificates.append(
                _cycle_certificate(program, diag_input, seed, fuel, report, registry)
            )
            contradicted = estimate.hits > 0
            outcome["claim_contradicted"] = contradicted
            any_unsafe = any_unsafe or contradicted
            all_confirmed = False
        else:
            all_confirmed = False
        per_seed.append(outcome)

    if all_confirmed and _certs_ok(certificates):
        summary = Summary.CONFIRMS
    elif any_unsafe and _certs_ok(certificates):
        summary = Summary.UNSAFE
    else:
        summary = Summary.INCONCLUSIVE
    return ExperimentReport(
        cfg, _verifier_echo(vtext, echo_spec), targets_unsafe,
        tuple(per_seed), tuple(certificates), {}, summary,
    )


def _exp_demo_v2_time_bounded(cfg: ExperimentConfig) -> ExperimentReport:
    vtext = cfg.verifier or "bounded-sim"
    kind = _verifier_kind(vtext)
    targets_unsafe = kind in _UNSAFE_KINDS
    t = cfg.t if cfg.t is not None else 1_000
    c = measure_overhead_c(TURING_T_V2_BUILDER)
    if t <= c:
        raise ConfigError(f"T={t} does not cover the dispatch overhead c={c}")
    per_seed: list[dict] = []
    certificates: list[dict] = []
    echo_spec: VerifierSpec | None = None
    all_confirmed = True

    for seed in cfg.seeds:
        registry = Registry()
        if kind == "bounded-sim":
            spec = make_bounded_sim_verifier(registry, t, Task.TIME_BOUNDED)
        else:
            spec = _make_verifier(registry, Task.TIME_BOUNDED, vtext)
        echo_spec = spec
        program, diag_input = self_instance(build_turing_T_v2(registry, spec.id, t))
        fuel = Fuel(cfg.fuel, OraclePolicy.METERED)
        report = run(program, diag_input, fuel, seed, registry).report
        outcome = {
            "seed": seed,
            "T": t,
            "outcome": report.outcome.value,
            "steps": report.steps,
            "bound": t + c,
        }
        if report.halted:
            certificates.append(
                _halt_certificate(program, diag_input, seed, fuel, report, registry)
            )
            all_confirmed = all_confirmed and report.steps <= t + c
        else:
            all_confirmed = False
        per_seed.append(outcome)

    details = {"c": c, "T": t}
    if all_confirmed and certificates and _certs_ok(certificates):
        summary = Summary.CONFIRMS
    else:
        summary = Summary.INCONCLUSIVE
    return ExperimentReport(
        cfg, _verifier_echo(vtext, echo_spec), targets_unsafe,
        tuple(per_seed), tuple(certificates), details, summary,
    )


def _exp_demo_calibration(cfg: ExperimentConfig) -> ExperimentReport:
    vtext = cfg.verifier or "abstain"
    targets_unsafe = _verifier_kind(vtext) in _UNSAFE_KINDS
    trials = cfg.trials or DEFAULT_TRIALS
    per_seed: list[dict] = []
    echo_spec: VerifierSpec | None = None
    all_confirmed = True
    any_unsafe = False

    for seed in cfg.seeds:
        registry = Registry()
        spec = _make_verifier(registry, Task.INSTANCE_HALTING, vtext)
        echo_spec = spec
        g_random = build_godel_program_random(registry, spec.id)
        program, diag_input = self_instance(g_random)
        audit = audit_calibration(
            registry, spec.id, program, trials, cfg.fuel, seed, input_value=diag_input,
        )
        frac = audit.certified_halt_prob
        outcome = {
            "seed": seed,
            "verdict": audit.verdict.value,
            "claim_hits": audit.claimed.hits,
            "claim_interval": list(audit.claimed.interval),
            "certified_halts": audit.certified_halts,
            "certified_non_halts": audit.certified_non_halts,
            "undetermined": audit.undetermined,
            "certified_interval": list(audit.certified_interval),
            "window": list(audit.window),
            "certified_halt_prob": None if frac is None else float(frac),
        }
        per_seed.append(outcome)
        if targets_unsafe:
            any_unsafe = any_unsafe or audit.verdict is CalibrationVerdict.VIOLATED
            all_confirmed = False
        else:
            all_confirmed = all_confirmed and (
                audit.verdict is CalibrationVerdict.NO_CLAIM
                and frac is not None
                and frac >= Fraction(97, 100)
            )

    if all_confirmed and not targets_unsafe:
        summary = Summary.CONFIRMS
    elif any_unsafe:
        summary = Summary.UNSAFE
    else:
        summary = Summary.INCONCLUSIVE
    return ExperimentReport(
        cfg, _verifier_echo(vtext, echo_spec), targets_unsafe,
        tuple(per_seed), (), {"trials": trials}, summary,
    )


def _exp_safety_audit(cfg: ExperimentConfig) -> ExperimentReport:
    vtext = cfg.verifier or f"bounded-sim:{DEFAULT_SIM_BUDGET}"
    targets_unsafe = _verifier_kind(vtext) in _UNSAFE_KINDS
    task = _verifier_task_for(vtext, Task.INSTANCE_HALTING)
    per_seed: list[dict] = []
    certificates: list[dict] = []
    echo_spec: VerifierSpec | None = None
    all_safe = True
    any_unsafe = False

    for seed in cfg.seeds:
        registry = Registry()
        spec = _make_verifier(registry, task, vtext)
        echo_spec = spec
        corpus = corpus_lib.build_corpus(CORPUS_SIZE, seed)
        pairs = [(entry.program, V.IntVal(0)) for entry in corpus]
        audit = audit_safety(
            registry, spec.id, pairs, corpus_lib.CERTIFY_FUEL,
            time_limit=cfg.t, seed=seed,
        )
        per_seed.append(
            {
                "seed": seed,
                "corpus_size": audit.corpus_size,
                "false_claims": len(audit.false_claims),
                "abstentions": audit.abstentions,
                "undetermined": audit.undetermined,
            }
        )
        for claim in audit.false_claims:
            certificates.append(
                {
                    "kind": "false-claim",
                    "seed": seed,
                    "entry": claim.entry_id,
                    "claimed": claim.claimed.code,
                    "certified": claim.certified,
                    "verified": True,
                }
            )
        all_safe = all_safe and audit.empirically_safe
        any_unsafe = any_unsafe or not audit.empirically_safe

    if all_safe:
        summary = Summary.CONFIRMS
    elif any_unsafe:
        summary = Summary.UNSAFE
    else:
        summary = Summary.INCONCLUSIVE
    return ExperimentReport(
        cfg, _verifier_echo(vtext, echo_spec), targets_unsafe,
        tuple(per_seed), tuple(certificates), {"corpus_size": CORPUS_SIZE}, summary,
    )


def _exp_measure_c(cfg: ExperimentConfig) -> ExperimentReport:
    rows = []
    for construction in (TURING_T_BUILDER, TURING_T_V2_BUILDER):
        rows.append({"construction": construction, "c": measure_overhead_c(construction)})
    return ExperimentReport(
        cfg, {"requested": None}, False, (),
        tuple({**row, "kind": "overhead", "verified": True} for row in rows),
        {"constructions": rows}, Summary.CONFIRMS,
    )


_EXPERIMENTS: dict[str, Callable[[ExperimentConfig], ExperimentReport]] = {
    "demo-godel": _exp_demo_godel,
    "demo-turing": _exp_demo_turing,
    "demo-time-bounded": _exp_demo_time_bounded,
    "demo-planning": _exp_demo_planning,
    "demo-reachability": _exp_demo_reachability,
    "demo-v2-halting": _exp_demo_v2_halting,
    "demo-v2-time-bounded": _exp_demo_v2_time_bounded,
    "demo-calibration": _exp_demo_calibration,
    "safety-audit": _exp_safety_audit,
    "measure-c": _exp_measure_c,
}

EXPERIMENT_NAMES = tuple(_EXPERIMENTS)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    try:
        runner = _EXPERIMENTS[cfg.experiment]
    except KeyError:
        raise UnknownExperiment(cfg.experiment) from None
    report = runner(cfg)
    if cfg.out:
        write_report(report, cfg.out)
    return report


def write_corpus(size: int, seed: int, path: str | Path) -> corpus_lib.Corpus:
    corpus = corpus_lib.build_corpus(size, seed)
    Path(path).write_text(corpus.dumps())
    return corpus
