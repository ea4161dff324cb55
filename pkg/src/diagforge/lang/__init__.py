"""The DL mini-language: syntax, values, and the fuel-metered machine."""

from . import nodes
from .machine import (
    DEFAULT_CYCLE_CAP,
    DEFAULT_PULL_CAP,
    MACHINE_ORACLE_ID,
    RUN_TRACE_ID,
    Fuel,
    HaltReport,
    Machine,
    OraclePolicy,
    OracleRequest,
    Outcome,
    RunResult,
    UnboundOracle,
    check_cycle_report,
    run,
    run_verdict,
)
from .nodes import Program
from .parser import ParseError, parse_program, serialize_node, serialize_program
from .rng import DrawSource, ReplayExhausted, RngState, split_seed, stream_draw
from .shapes import ArityMismatch, InputShape, apply_self, infer_shape, typecheck_input
from .trace import Trace
from .values import (
    IntVal,
    PairVal,
    ProgramVal,
    StrVal,
    TraceVal,
    Value,
    VerdictVal,
    is_type_fault,
    type_fault,
)
from .verdicts import DONT_KNOW, Task, Verdict, answers_for, dont_know, family_of_answer

__all__ = [
    "ArityMismatch",
    "DEFAULT_CYCLE_CAP",
    "DEFAULT_PULL_CAP",
    "DONT_KNOW",
    "DrawSource",
    "Fuel",
    "HaltReport",
    "InputShape",
    "IntVal",
    "MACHINE_ORACLE_ID",
    "Machine",
    "OraclePolicy",
    "OracleRequest",
    "Outcome",
    "PairVal",
    "ParseError",
    "Program",
    "ProgramVal",
    "RUN_TRACE_ID",
    "ReplayExhausted",
    "RngState",
    "RunResult",
    "StrVal",
    "Task",
    "Trace",
    "TraceVal",
    "UnboundOracle",
    "Value",
    "Verdict",
    "VerdictVal",
    "answers_for",
    "apply_self",
    "check_cycle_report",
    "dont_know",
    "family_of_answer",
    "infer_shape",
    "is_type_fault",
    "nodes",
    "parse_program",
    "run",
    "run_verdict",
    "serialize_node",
    "serialize_program",
    "split_seed",
    "stream_draw",
    "type_fault",
    "typecheck_input",
]
