"""Calibration audits: claim frequency vs certified halting frequency.

The auditor is deliberately conservative.  It widens the claim window by
the claim estimate's own confidence interval before testing disjointness,
counts only certified outcomes (halt witness or cycle certificate), and
treats a verifier that never says "halts" as making no claim at all.
"""

from fractions import Fraction

import pytest

from diagforge.calibration import CalibrationVerdict, audit_calibration
from diagforge.diagonal import build_godel_program_random, self_instance
from diagforge.lang import parser as P
from diagforge.lang.verdicts import Task
from diagforge.verifiers import (
    Registry,
    make_abstain_verifier,
    make_biased_stub_verifier,
    make_bounded_sim_verifier,
    make_stub_verifier,
)

HALT3 = P.parse_program("(return (int 0))")


def diagonal_for(reg, spec):
    program, instance = self_instance(build_godel_program_random(reg, spec.id))
    return program, instance


def test_abstainer_makes_no_claim_and_its_diagonal_always_halts():
    reg = Registry()
    ab = make_abstain_verifier(reg, Task.INSTANCE_HALTING)
    program, instance = diagonal_for(reg, ab)
    report = audit_calibration(reg, ab, program, 100, 10**4, 7, input_value=instance)
    assert report.verdict is CalibrationVerdict.NO_CLAIM
    assert report.claimed.hits == 0
    assert report.certified_halts == 100
    assert report.undetermined == 0
    assert report.certified_halt_prob == Fraction(1)


def test_sure_halts_claim_is_violated_by_a_never_halting_diagonal():
    reg = Registry()
    sure = make_stub_verifier(reg, Task.INSTANCE_HALTING, "halts", verifier_id="sure")
    program, instance = diagonal_for(reg, sure)
    report = audit_calibration(reg, sure, program, 100, 10**5, 11, input_value=instance)
    assert report.verdict is CalibrationVerdict.VIOLATED
    assert report.claimed.hits == 100
    assert (report.certified_halts, report.certified_non_halts) == (0, 100)
    # Disjoint even after widening: certified ceiling sits far below the window.
    assert report.window[0] - report.certified_interval[1] > 0.25


def test_fair_coin_claims_leave_only_undetermined_mass():
    # At zero gap the embedded arm comparison hits its pull cap, so no run
    # certifies anything; the auditor must exclude them all rather than
    # guess, and an all-undetermined audit can never be a violation.
    reg = Registry()
    fair = make_biased_stub_verifier(reg, Task.INSTANCE_HALTING, "halts",
                                     Fraction(1, 2), verifier_id="fair")
    program, instance = diagonal_for(reg, fair)
    report = audit_calibration(reg, fair, program, 100, 10**5, 3,
                               input_value=instance, pull_cap=2_000)
    assert report.claimed.hits == 58
    assert report.determined == 0
    assert report.undetermined == 100
    assert report.verdict is CalibrationVerdict.IN_WINDOW
    assert report.certified_halt_prob is None


def test_true_claim_on_a_halting_program_is_in_window():
    reg = Registry()
    stub = make_stub_verifier(reg, Task.INSTANCE_HALTING, "halts", verifier_id="always-h")
    report = audit_calibration(reg, stub, HALT3, 100, 10**4, 3)
    assert report.verdict is CalibrationVerdict.IN_WINDOW
    assert report.claimed.hits == 100
    assert report.certified_halts == 100


def test_honest_simulator_makes_no_claim_on_its_diagonal():
    reg = Registry()
    ih = make_bounded_sim_verifier(reg, 2_000, Task.INSTANCE_HALTING)
    program, instance = diagonal_for(reg, ih)
    report = audit_calibration(reg, ih, program, 100, 10**4, 5, input_value=instance)
    assert report.verdict is CalibrationVerdict.NO_CLAIM


def test_too_few_trials_is_an_error():
    reg = Registry()
    ab = make_abstain_verifier(reg, Task.INSTANCE_HALTING)
    with pytest.raises(ValueError):
        audit_calibration(reg, ab, HALT3, 99, 10**4, 0)


def test_audits_are_reproducible():
    reg = Registry()
    stub = make_stub_verifier(reg, Task.INSTANCE_HALTING, "halts", verifier_id="always-h")
    a = audit_calibration(reg, stub, HALT3, 100, 10**4, 3)
    b = audit_calibration(reg, stub, HALT3, 100, 10**4, 3)
    assert a == b
