"""Machine semantics: step accounting, cycle certificates, determinism,
fuel metering, and the oracle cost model.

Step counts below were produced by running the interpreter and are frozen;
they are the contract other layers (reductions, time-bounded diagonals)
build on, so a change here is a breaking change even if everything still
"works".
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diagforge.lang import machine as M
from diagforge.lang import parser as P
from diagforge.lang import values as V
from diagforge.lang.machine import Fuel, OraclePolicy, Outcome, check_cycle_report, run
from diagforge.lang.verdicts import Task
from diagforge.verifiers import Registry, make_bounded_sim_verifier, make_stub_verifier

from conftest import gen_program_source

FREE = OraclePolicy.FREE
METERED = OraclePolicy.METERED
ZERO = V.IntVal(0)


def run_src(source, *, seed=0, fuel=10**6, input_value=ZERO, policy=FREE,
            binding=None, **kw):
    return run(P.parse_program(source), input_value, Fuel(fuel, policy), seed,
               binding if binding is not None else Registry(), **kw)


# -- step accounting --------------------------------------------------------

STEP_TABLE = [
    ("(return (int 0))", 3, V.IntVal(0)),
    ("(seq (return (int 0)))", 4, V.IntVal(0)),
    ("(seq (seq (return (int 0))))", 5, V.IntVal(0)),
    ("(seq (int 1) (return (int 0)))", 6, V.IntVal(0)),
    ("(return (var x))", 3, V.IntVal(0)),
    ("(let y (int 1) (return (var y)))", 6, V.IntVal(1)),
    ('(return (concat (str "a") (str "b")))', 7, V.StrVal("ab")),
    ("(if (int 1) (return (int 7)) (return (int 8)))", 6, V.IntVal(7)),
    ("(if (int 0) (return (int 7)) (return (int 8)))", 6, V.IntVal(8)),
    ("(return (pair (int 1) (int 2)))", 7, V.PairVal(V.IntVal(1), V.IntVal(2))),
    ("(seq (bernoulli 1/2) (return (int 0)))", 6, V.IntVal(0)),
]


@pytest.mark.parametrize("source,steps,value", STEP_TABLE)
def test_frozen_step_counts(source, steps, value):
    report = run_src(source).report
    assert report.halted
    assert report.steps == steps
    assert report.value == value


def test_program_without_return_still_halts():
    report = run_src("(seq (int 1) (int 2))").report
    assert report.halted


# -- cycle certificates ------------------------------------------------------

CYCLE_TABLE = [
    ("(while-true (seq))", 1, 2),
    ("(while-true (seq (int 1) (int 2)))", 1, 5),
    ("(seq (int 5) (while-true (seq)))", 4, 2),
]


@pytest.mark.parametrize("source,prefix,cycle", CYCLE_TABLE)
def test_frozen_cycle_certificates(source, prefix, cycle):
    report = run_src(source).report
    assert report.cycled
    assert (report.prefix_len, report.cycle_len) == (prefix, cycle)


@pytest.mark.parametrize("source,prefix,cycle", CYCLE_TABLE)
def test_cycle_certificates_replay(source, prefix, cycle):
    program = P.parse_program(source)
    reg = Registry()
    fuel = Fuel(10**4, FREE)
    report = run(program, ZERO, fuel, 0, reg).report
    assert check_cycle_report(program, ZERO, fuel, 0, reg, report)


def test_falsified_cycle_certificates_are_rejected():
    program = P.parse_program("(while-true (seq))")
    reg = Registry()
    fuel = Fuel(10**4, FREE)
    report = run(program, ZERO, fuel, 0, reg).report
    for bad_len in (report.cycle_len + 1, report.cycle_len - 1):
        tampered = M.HaltReport(Outcome.CYCLE, report.steps,
                                prefix_len=report.prefix_len, cycle_len=bad_len)
        assert not check_cycle_report(program, ZERO, fuel, 0, reg, tampered)
    halting = P.parse_program("(return (int 0))")
    fake = M.HaltReport(Outcome.CYCLE, 10, prefix_len=1, cycle_len=2)
    assert not check_cycle_report(halting, ZERO, fuel, 0, reg, fake)


def test_cycle_certificate_shifted_into_the_loop_still_verifies():
    # A recurrence observed one step later is the same recurrence; only the
    # period can falsify a certificate, not the anchor point.
    program = P.parse_program("(while-true (seq))")
    reg = Registry()
    fuel = Fuel(10**4, FREE)
    report = run(program, ZERO, fuel, 0, reg).report
    shifted = M.HaltReport(Outcome.CYCLE, report.steps,
                           prefix_len=report.prefix_len + 3, cycle_len=report.cycle_len)
    assert check_cycle_report(program, ZERO, fuel, 0, reg, shifted)


def test_seeded_cycle_certificates_do_not_replay_under_other_seeds():
    source = "(if (bernoulli 1/2) (while-true (seq)) (return (int 0)))"
    program = P.parse_program(source)
    reg = Registry()
    fuel = Fuel(10**4, FREE)
    looping_seed = next(
        s for s in range(50) if run(program, ZERO, fuel, s, reg).report.cycled
    )
    halting_seed = next(
        s for s in range(50) if run(program, ZERO, fuel, s, reg).report.halted
    )
    report = run(program, ZERO, fuel, looping_seed, reg).report
    assert check_cycle_report(program, ZERO, fuel, looping_seed, reg, report)
    assert not check_cycle_report(program, ZERO, fuel, halting_seed, reg, report)


def test_cycle_detection_can_be_disabled():
    report = run_src("(while-true (seq))", fuel=500, cycle_cap=0).report
    assert report.outcome is Outcome.FUEL_EXHAUSTED
    assert report.steps == 500


# -- determinism -------------------------------------------------------------

def test_runs_are_deterministic_given_seed():
    source = "(if (bernoulli 1/2) (return (int 1)) (return (int 0)))"
    first = run_src(source, seed=42)
    second = run_src(source, seed=42)
    assert first.report == second.report
    assert first.trace == second.trace
    assert first.max_eval_depth == second.max_eval_depth


def test_seed_changes_coin_outcomes():
    source = "(if (bernoulli 1/2) (return (int 1)) (return (int 0)))"
    values = {run_src(source, seed=s).report.value for s in range(16)}
    assert values == {V.IntVal(0), V.IntVal(1)}


def test_deterministic_programs_ignore_the_seed():
    reports = {run_src("(seq (int 1) (return (int 0)))", seed=s).report for s in range(5)}
    assert len(reports) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=0, max_value=2**16))
def test_determinism_property_on_generated_programs(gen_seed, run_seed):
    source = gen_program_source(gen_seed, max_depth=3)
    program = P.parse_program(source)
    reg = Registry()
    make_stub_verifier(reg, Task.INSTANCE_HALTING, "halts", verifier_id="v")
    make_stub_verifier(reg, Task.INSTANCE_HALTING, "does-not-halt", verifier_id="aux")
    make_stub_verifier(reg, Task.INSTANCE_HALTING, "halts", verifier_id="with space")
    fuel = Fuel(2_000, FREE)

    def observe():
        # Generated programs may misuse oracles; a raised protocol error is
        # an outcome too, and must be the same one both times.
        try:
            result = run(program, ZERO, fuel, run_seed, reg)
            return (result.report, result.trace)
        except Exception as exc:  # noqa: BLE001 - equality on the error itself
            return (type(exc), str(exc))

    assert observe() == observe()


# -- fuel --------------------------------------------------------------------

def test_fuel_exhaustion_is_not_a_verdict():
    report = run_src("(seq (int 1) (return (int 0)))", fuel=5).report
    assert report.outcome is Outcome.FUEL_EXHAUSTED
    assert not report.halted and not report.cycled
    assert report.value is None


def test_fuel_boundary_is_exact():
    # The six-step program needs exactly its step count, no more.
    assert run_src("(seq (int 1) (return (int 0)))", fuel=6).report.halted
    assert not run_src("(seq (int 1) (return (int 0)))", fuel=5).report.halted


def test_outcome_is_monotone_in_fuel():
    source = "(seq (seq (return (int 0))))"
    exhausted_then_halted = [run_src(source, fuel=f).report.halted for f in range(4, 8)]
    assert exhausted_then_halted == [False, True, True, True]


# -- oracle cost model -------------------------------------------------------

def test_metered_oracle_charges_the_caller():
    reg = Registry()
    ih = make_bounded_sim_verifier(reg, 10_000, Task.INSTANCE_HALTING)
    source = f'(return (oracle "{ih.id}" halts (var x1) (var x2)))'
    subject = V.PairVal(V.ProgramVal(P.parse_program("(return (int 0))")), ZERO)
    free = run_src(source, input_value=subject, binding=reg, policy=FREE, seed=7).report
    metered = run_src(source, input_value=subject, binding=reg, policy=METERED, seed=7).report
    assert free.value == V.IntVal(1)
    assert metered.value == V.IntVal(1)
    assert free.steps == 7  # dispatch only
    assert metered.steps > free.steps  # plus the verifier's charged work


def test_metered_charge_equals_the_claimed_steps():
    reg = Registry()
    make_stub_verifier(reg, Task.INSTANCE_HALTING, "halts", claimed_steps=50, verifier_id="s")
    source = '(return (oracle "s" halts (var x1) (var x2)))'
    subject = V.PairVal(V.ProgramVal(P.parse_program("(return (int 0))")), ZERO)
    free = run_src(source, input_value=subject, binding=reg, policy=FREE).report
    metered = run_src(source, input_value=subject, binding=reg, policy=METERED).report
    assert metered.steps - free.steps == 50


def test_unbound_oracle_raises():
    with pytest.raises(M.UnboundOracle):
        run_src('(return (oracle "nobody" halts (var x1) (var x2)))',
                input_value=V.PairVal(V.ProgramVal(P.parse_program("(seq)")), ZERO))


# -- input shapes ------------------------------------------------------------

def test_pair_shaped_program_rejects_scalar_input():
    from diagforge.lang import typecheck_input

    pair_shaped = P.parse_program("(return (pair (var x1) (var x2)))")
    assert typecheck_input(pair_shaped, V.PairVal(V.IntVal(1), V.IntVal(2)))
    assert not typecheck_input(pair_shaped, V.IntVal(1))
    single = P.parse_program("(return (var x))")
    assert typecheck_input(single, V.IntVal(1))


def test_trace_records_draws_and_hashes():
    result = run_src("(seq (bernoulli 1/2) (bernoulli 1/2) (return (int 0)))", seed=3)
    assert len(result.trace.random_draws) == 2
    assert result.trace.step_hashes  # state hashes captured for replay


def test_capture_hashes_can_be_disabled():
    result = run_src("(return (int 0))", capture_hashes=False)
    assert result.report.halted
    assert result.trace.step_hashes == ()
