"""Calibration-safety auditing.

A verifier that answers "halts" with probability p implicitly claims the
instance halts with probability within ±1/4 of p.  The auditor measures
both sides of that claim empirically: the verifier's answer frequency over
seeded queries, and the instance's *certified* halting frequency over
seeded runs — only halt witnesses and cycle certificates count, anything
that merely ran out of fuel is excluded and reported as undetermined mass.

Because both sides are estimates, "Violated" is deliberately conservative:
the claim window is first widened by the claim estimate's own confidence
interval, and the verdict fires only when the certified interval is
disjoint from the widened window.  A verifier that never says "halts"
makes no claim, and gets "NoClaim" regardless of the ground truth.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .lang import values as V
from .lang.machine import DEFAULT_PULL_CAP, Fuel, OraclePolicy, run
from .lang.nodes import Program
from .lang.rng import split_seed
from .verifiers import ProbEstimate, Registry, VerifierSpec, estimate_answer_probability, wilson_interval

HALF_WINDOW = Fraction(1, 4)

_CLAIM_LANE = 0
_RUN_LANE = 1


class CalibrationVerdict(enum.Enum):
    IN_WINDOW = "in-window"
    VIOLATED = "violated"
    NO_CLAIM = "no-claim"


@dataclass(frozen=True)
class CalibrationReport:
    verifier_id: str
    trials: int
    claimed: ProbEstimate  # frequency of "halts" answers
    certified_halts: int
    certified_non_halts: int
    undetermined: int  # runs with neither witness nor certificate (excluded)
    certified_interval: tuple[float, float]  # Wilson over determined runs
    window: tuple[float, float]  # claim interval widened by ±1/4, clamped
    verdict: CalibrationVerdict

    @property
    def determined(self) -> int:
        return self.certified_halts + self.certified_non_halts

    @property
    def certified_halt_prob(self) -> Fraction | None:
        if self.determined == 0:
            return None
        return Fraction(self.certified_halts, self.determined)


def audit_calibration(
    registry: Registry,
    verifier: VerifierSpec | str,
    program: Program,
    trials: int,
    fuel_per_run: int,
    seed: int,
    *,
    input_value: V.Value = V.IntVal(0),
    pull_cap: int = DEFAULT_PULL_CAP,
) -> CalibrationReport:
    """Compare a verifier's halting-claim frequency on an instance against
    the instance's certified halting frequency."""
    if trials < 100:
        raise ValueError("calibration needs at least 100 trials")
    spec = registry.spec_of(verifier)
    claimed = estimate_answer_probability(
        registry, spec, program, input_value, "halts",
        trials, split_seed(seed, _CLAIM_LANE),
    )

    run_base = split_seed(seed, _RUN_LANE)
    halts = non_halts = undetermined = 0
    for i in range(trials):
        report = run(
            program,
            input_value,
            Fuel(fuel_per_run, OraclePolicy.FREE),
            split_seed(run_base, i),
            registry,
            capture_hashes=False,
            pull_cap=pull_cap,
        ).report
        if report.halted:
            halts += 1
        elif report.cycled:
            non_halts += 1
        else:
            undetermined += 1

    determined = halts + non_halts
    certified_interval = wilson_interval(halts, determined)
    lo, hi = claimed.interval
    window = (max(0.0, lo - float(HALF_WINDOW)), min(1.0, hi + float(HALF_WINDOW)))

    if claimed.hits == 0:
        verdict = CalibrationVerdict.NO_CLAIM
    elif determined > 0 and (
        certified_interval[1] < window[0] or certified_interval[0] > window[1]
    ):
        verdict = CalibrationVerdict.VIOLATED
    else:
        verdict = CalibrationVerdict.IN_WINDOW

    return CalibrationReport(
        verifier_id=spec.id,
        trials=trials,
        claimed=claimed,
        certified_halts=halts,
        certified_non_halts=non_halts,
        undetermined=undetermined,
        certified_interval=certified_interval,
        window=window,
        verdict=verdict,
    )
