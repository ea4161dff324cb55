"""Verifier layer: bounded simulation, stubs, the liar, trace replay,
probability estimation, and safety audits.

The load-bearing behavioral rule here: an honest simulating verifier only
concludes from a simulation that consumed no random draws.  A run that drew
coins witnesses its own seed and nothing else, so the verifier abstains on
randomized programs no matter how they behaved under simulation.
"""

from fractions import Fraction

import pytest

from diagforge.lang import machine as M
from diagforge.lang import parser as P
from diagforge.lang import values as V
from diagforge.lang.machine import Fuel, OraclePolicy
from diagforge.lang.trace import Trace
from diagforge.lang.verdicts import Task, Verdict
from diagforge.corpus import build_corpus
from diagforge.verifiers import (
    Registry,
    audit_safety,
    estimate_answer_probability,
    make_abstain_verifier,
    make_biased_stub_verifier,
    make_bounded_sim_verifier,
    make_liar_verifier,
    make_stub_verifier,
    validate_trace,
    validate_trace_with,
    verify,
    wilson_interval,
)

ZERO = V.IntVal(0)
HALT3 = P.parse_program("(return (int 0))")
HALT6 = P.parse_program("(seq (int 1) (return (int 0)))")
LOOP = P.parse_program("(while-true (seq))")
COIN = P.parse_program("(if (bernoulli 1/2) (return (int 1)) (return (int 0)))")


@pytest.fixture
def reg():
    return Registry()


# -- bounded simulation ------------------------------------------------------

def test_instance_halting_concludes_on_deterministic_programs(reg):
    ih = make_bounded_sim_verifier(reg, 10_000, Task.INSTANCE_HALTING)
    assert verify(reg, ih, HALT3).verdict.code == "halts"
    assert verify(reg, ih, LOOP).verdict.code == "does-not-halt"


def test_budget_exhaustion_means_abstention_at_exactly_the_budget(reg):
    tiny = make_bounded_sim_verifier(reg, 3, Task.INSTANCE_HALTING, verifier_id="tiny")
    answer = verify(reg, tiny, HALT6)
    assert answer.verdict.code == "dont-know"
    assert answer.steps_used == 3


def test_time_bounded_answers_compare_against_the_limit(reg):
    tb = make_bounded_sim_verifier(reg, 10_000, Task.TIME_BOUNDED)
    assert verify(reg, tb, HALT6, time_limit=10).verdict.code == "halts-within-t"
    assert verify(reg, tb, HALT6, time_limit=3).verdict.code == "does-not-halt-within-t"
    assert verify(reg, tb, LOOP, time_limit=50).verdict.code == "does-not-halt-within-t"


def test_program_verification_needs_a_counterexample_to_conclude(reg):
    pv = make_bounded_sim_verifier(reg, 10_000, Task.PROG_VERIFICATION)
    # A looping input is an existential witness; halting probes prove nothing
    # about all the inputs that were never tried.
    assert verify(reg, pv, LOOP).verdict.code == "not-well-behaved"
    assert verify(reg, pv, HALT3).verdict.code == "dont-know"


def test_randomized_halting_concludes_only_without_draws(reg):
    rh = make_bounded_sim_verifier(reg, 10_000, Task.RANDOMIZED_HALTING)
    assert verify(reg, rh, HALT3).verdict.code == "always-halts"
    assert verify(reg, rh, LOOP).verdict.code == "never-halts"
    assert verify(reg, rh, COIN).verdict.code == "dont-know"


def test_simulating_verifiers_abstain_on_coin_programs(reg):
    # Every seeded run of these halts, but the honest verifier must not say
    # so: the simulation it saw only witnesses its own seed.
    ih = make_bounded_sim_verifier(reg, 10_000, Task.INSTANCE_HALTING)
    tb = make_bounded_sim_verifier(reg, 10_000, Task.TIME_BOUNDED)
    drew = P.parse_program("(seq (bernoulli 1/2) (return (int 0)))")
    assert verify(reg, ih, drew).verdict.code == "dont-know"
    assert verify(reg, tb, drew, time_limit=100).verdict.code == "dont-know"


def test_conclusions_are_seed_invariant(reg):
    ih = make_bounded_sim_verifier(reg, 10_000, Task.INSTANCE_HALTING)
    codes = {verify(reg, ih, COIN, seed=s).verdict.code for s in range(8)}
    assert codes == {"dont-know"}
    codes = {verify(reg, ih, HALT3, seed=s).verdict.code for s in range(8)}
    assert codes == {"halts"}


def test_nested_verifier_queries_stay_conclusive(reg):
    # A deterministic program that consults another verifier through the
    # oracle is still deterministic; the outer simulation must conclude.
    ih = make_bounded_sim_verifier(reg, 10_000, Task.INSTANCE_HALTING)
    outer = make_bounded_sim_verifier(reg, 200_000, Task.INSTANCE_HALTING, verifier_id="outer")
    mid = P.parse_program(f'(return (oracle "{ih.id}" halts (var x1) (var x2)))')
    answer = verify(reg, outer, mid, V.PairVal(V.ProgramVal(HALT3), ZERO))
    assert answer.verdict.code == "halts"


# -- stubs and the liar ------------------------------------------------------

def test_stub_answers_its_forced_verdict(reg):
    stub = make_stub_verifier(reg, Task.INSTANCE_HALTING, "does-not-halt", verifier_id="dnh")
    assert verify(reg, stub, HALT3).verdict.code == "does-not-halt"
    assert not stub.claimed_safe


def test_stub_rejects_codes_from_the_wrong_family(reg):
    with pytest.raises(ValueError):
        make_stub_verifier(reg, Task.INSTANCE_HALTING, "well-behaved")


def test_biased_stub_frequency_matches_its_bias(reg):
    fair = make_biased_stub_verifier(reg, Task.INSTANCE_HALTING, "halts",
                                     Fraction(1, 2), verifier_id="fair")
    est = estimate_answer_probability(reg, fair, HALT3, ZERO, "halts", 300, 11)
    assert est.trials == 300
    assert est.hits == 153  # frozen: seeded draws are reproducible
    assert est.contains(0.5)


def test_biased_stub_validates_probability(reg):
    with pytest.raises(ValueError):
        make_biased_stub_verifier(reg, Task.INSTANCE_HALTING, "halts", Fraction(3, 2))


def test_abstainer_abstains(reg):
    ab = make_abstain_verifier(reg, Task.INSTANCE_HALTING)
    assert verify(reg, ab, LOOP).verdict.code == "dont-know"
    est = estimate_answer_probability(reg, ab, LOOP, ZERO, "halts", 200, 0)
    assert est.hits == 0


def test_liar_claims_well_behaved_with_a_replayable_trace(reg):
    liar = make_liar_verifier(reg, 10_000)
    answer = verify(reg, liar, LOOP)
    assert answer.verdict.code == "well-behaved"
    assert validate_trace(reg, liar.id, LOOP, answer.trace)


def test_registry_rejects_duplicate_ids(reg):
    make_stub_verifier(reg, Task.INSTANCE_HALTING, "halts", verifier_id="twin")
    with pytest.raises(ValueError):
        make_stub_verifier(reg, Task.INSTANCE_HALTING, "halts", verifier_id="twin")


def test_verify_with_unknown_id_raises(reg):
    with pytest.raises(M.UnboundOracle):
        verify(reg, "nobody", HALT3)


# -- trace replay ------------------------------------------------------------

def test_genuine_traces_replay(reg):
    ih = make_bounded_sim_verifier(reg, 10_000, Task.INSTANCE_HALTING)
    rh = make_bounded_sim_verifier(reg, 10_000, Task.RANDOMIZED_HALTING)
    for spec, prog in [(ih, HALT3), (ih, LOOP), (rh, COIN)]:
        answer = verify(reg, spec, prog)
        assert validate_trace(reg, spec.id, prog, answer.trace)


def test_tampered_traces_are_rejected(reg):
    ih = make_bounded_sim_verifier(reg, 10_000, Task.INSTANCE_HALTING)
    answer = verify(reg, ih, HALT3)
    t = answer.trace
    flipped = Trace(t.verifier_id, t.subject_program, t.random_draws, t.step_hashes,
                    Verdict(Task.INSTANCE_HALTING, "does-not-halt"))
    assert not validate_trace(reg, ih.id, HALT3, flipped)
    truncated = Trace(t.verifier_id, t.subject_program, t.random_draws,
                      t.step_hashes[:-1], t.final_verdict)
    assert not validate_trace(reg, ih.id, HALT3, truncated)


def test_trace_is_bound_to_its_subject(reg):
    ih = make_bounded_sim_verifier(reg, 10_000, Task.INSTANCE_HALTING)
    answer = verify(reg, ih, HALT3)
    assert not validate_trace(reg, ih.id, HALT6, answer.trace)


def test_time_bounded_traces_replay_with_the_same_input(reg):
    tb = make_bounded_sim_verifier(reg, 10_000, Task.TIME_BOUNDED)
    answer = verify(reg, tb, HALT6, time_limit=10)
    assert validate_trace_with(reg, tb.id, HALT6, answer.trace, ZERO, time_limit=10)


def test_in_run_check_trace_matches_validate(reg):
    ih = make_bounded_sim_verifier(reg, 10_000, Task.INSTANCE_HALTING)
    answer = verify(reg, ih, HALT3)
    prog = P.parse_program(f'(return (check-trace "{ih.id}" (var x1) (var x2)))')
    genuine = V.PairVal(V.ProgramVal(HALT3), V.TraceVal(answer.trace))
    res = M.run(prog, genuine, Fuel(10**6, OraclePolicy.FREE), 7, reg)
    assert res.report.value == V.IntVal(1)
    t = answer.trace
    tampered_trace = Trace(t.verifier_id, t.subject_program, t.random_draws, t.step_hashes,
                           Verdict(Task.INSTANCE_HALTING, "does-not-halt"))
    tampered = V.PairVal(V.ProgramVal(HALT3), V.TraceVal(tampered_trace))
    res = M.run(prog, tampered, Fuel(10**6, OraclePolicy.FREE), 7, reg)
    assert res.report.value == V.IntVal(0)
    malformed = V.PairVal(V.ProgramVal(HALT3), V.IntVal(5))
    res = M.run(prog, malformed, Fuel(10**6, OraclePolicy.FREE), 7, reg)
    assert res.report.value == V.IntVal(0)


# -- estimation --------------------------------------------------------------

def test_wilson_interval_frozen_values():
    lo, hi = wilson_interval(0, 100)
    assert (lo, round(hi, 6)) == (0.0, 0.036995)
    lo, hi = wilson_interval(50, 100)
    assert (round(lo, 6), round(hi, 6)) == (0.40383, 0.59617)
    lo, hi = wilson_interval(100, 100)
    assert round(lo, 6) == 0.963005 and hi == pytest.approx(1.0)
    assert wilson_interval(0, 0) == (0.0, 1.0)


def test_estimates_are_reproducible(reg):
    fair = make_biased_stub_verifier(reg, Task.INSTANCE_HALTING, "halts",
                                     Fraction(1, 2), verifier_id="fair")
    a = estimate_answer_probability(reg, fair, HALT3, ZERO, "halts", 100, 5)
    b = estimate_answer_probability(reg, fair, HALT3, ZERO, "halts", 100, 5)
    assert a == b


# -- safety audits ------------------------------------------------------------

def test_honest_verifier_audits_clean_on_the_frozen_corpus(reg):
    ih = make_bounded_sim_verifier(reg, 10_000, Task.INSTANCE_HALTING)
    pairs = [(e.program, ZERO) for e in build_corpus(60, 2026)]
    report = audit_safety(reg, ih, pairs, 10**5)
    assert report.empirically_safe
    assert report.false_claims == ()
    assert report.abstentions == 9  # the corpus's coin programs
    assert report.undetermined == 0


def test_always_halts_stub_is_caught_on_every_certified_loop(reg):
    stub = make_stub_verifier(reg, Task.INSTANCE_HALTING, "halts", verifier_id="ah")
    pairs = [(e.program, ZERO) for e in build_corpus(60, 2026)]
    report = audit_safety(reg, stub, pairs, 10**5)
    assert not report.empirically_safe
    assert len(report.false_claims) == 19  # one per certified loop
    assert all("cycle" in claim.certified for claim in report.false_claims)
