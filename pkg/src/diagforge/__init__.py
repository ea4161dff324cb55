"""diagforge: a laboratory for self-referential programs and the verifiers
that (safely or unsafely) judge them.

The package has three layers:

* :mod:`diagforge.lang` — the DL mini-language: parser, values, and a
  fuel-metered machine whose runs always end in a halt, a fuel report, or a
  cycle certificate.
* :mod:`diagforge.verifiers` — budgeted halting verifiers (honest bounded
  simulation, stubs, coins, and one liar), trace validation, and safety
  audits.
* construction and experiment layers — diagonal program builders
  (:mod:`diagforge.diagonal`), reductions to planning and reachability
  (:mod:`diagforge.reductions`), best-arm identification
  (:mod:`diagforge.bandit`, :mod:`diagforge.calibration`), and the
  experiment harness (:mod:`diagforge.harness`, CLI in
  :mod:`diagforge.cli`).
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
