"""Halting → planning and time-bounded halting → reachability reductions.

Both reductions expose the interpreter's configuration graph through DL
programs, so the downstream planning/search instance is itself made of
programs:

* planning: states are configuration strings, one move ("advance") walks a
  configuration to its successor, and the goal predicate recognizes halted
  configurations.  A plan exists iff the encoded run halts, and the plan is
  exactly "advance" repeated once per interpreter step.
* reachability: vertices pair a cumulative step count with a configuration;
  an edge spends the transition's metered cost, edges past the size bound
  are dropped, and halted configurations step to a distinguished sink.  The
  sink is reachable iff the run halts within the bound.

The solvers are deliberately plain — a chain walk and a breadth-first
search — because their role is certified ground truth, not performance.
Positive answers are replay-verified plans/paths; negative answers carry
certificates (a configuration-level cycle, or the exhaustively expanded
frontier) that :func:`verify_certificate` re-checks from scratch.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .lang import configs as C
from .lang import values as V
from .lang.machine import DEFAULT_PULL_CAP, Fuel, OracleBinding, OraclePolicy, run
from .lang.nodes import Program
from .lang.parser import parse_program, serialize_program

_RUN_FUEL = 1 << 40  # instance programs are tiny wrappers; fuel is nominal

NEXT_STATE_SOURCE = '(return (oracle "dl-machine" step (var x1) (var x2)))'
GOAL_SOURCE = '(return (oracle "dl-machine" at-halt (var x)))'


@dataclass(frozen=True)
class PlanningInstance:
    next_state: Program  # (state, move) -> successor state | "#not-allowed"
    start: V.Value
    goal_predicate: Program  # state -> 1 | 0
    move_alphabet: tuple[str, ...] = (C.ADVANCE,)

    def __post_init__(self) -> None:
        if not self.move_alphabet:
            raise ValueError("move alphabet must be nonempty")


@dataclass(frozen=True)
class Plan:
    moves: tuple[str, ...]


@dataclass(frozen=True)
class ConfigCycleCertificate:
    """A recurrence in the single-successor state chain: the state after
    ``prefix_len`` moves recurs after ``cycle_len`` more, and no state up to
    that point is a goal — so no goal is ever reachable."""

    prefix_len: int
    cycle_len: int


@dataclass(frozen=True)
class Infeasible:
    certificate: ConfigCycleCertificate


@dataclass(frozen=True)
class Unknown:
    expansions: int


@dataclass(frozen=True)
class GraphInstance:
    adjacency: Program  # vertex -> cons-list of neighbors
    source: V.Value
    sink: V.Value
    size_bound: int

    def __post_init__(self) -> None:
        if self.size_bound < 1:
            raise ValueError("size bound must be positive")


@dataclass(frozen=True)
class Path:
    vertices: tuple[V.Value, ...]


@dataclass(frozen=True)
class ExhaustiveFrontier:
    """Every reachable vertex, fully expanded: closed under adjacency and
    sink-free, hence a proof of non-reachability."""

    vertices: tuple[V.Value, ...]


@dataclass(frozen=True)
class NotReachable:
    certificate: ExhaustiveFrontier


# --------------------------------------------------------------------------
# Reductions.


def halting_to_planning(
    program: Program, input_value: V.Value, *, seed: int = 0
) -> PlanningInstance:
    """Encode "does this run halt?" as a planning instance over the
    interpreter's own configurations (untimed, so oracle calls cost one
    move like any other transition)."""
    start = V.StrVal(C.initial_config(program, input_value, OraclePolicy.FREE, seed))
    return PlanningInstance(
        next_state=parse_program(NEXT_STATE_SOURCE),
        start=start,
        goal_predicate=parse_program(GOAL_SOURCE),
    )


def tb_halting_to_reachability(
    program: Program, input_value: V.Value, t: int, *, seed: int = 0
) -> GraphInstance:
    """Encode "does this run halt within ``t`` metered steps?" as sink
    reachability in a finite vertex set of at most ``t``+1 configurations
    plus the sink."""
    if t < 1:
        raise ValueError("time bound must be positive")
    start = C.initial_config(program, input_value, OraclePolicy.METERED, seed)
    adjacency = parse_program(
        f'(return (oracle "dl-machine" adjacency (int {t}) (var x)))'
    )
    return GraphInstance(
        adjacency=adjacency,
        source=V.PairVal(V.IntVal(0), V.StrVal(start)),
        sink=V.StrVal(C.HALT_SINK),
        size_bound=t,
    )


# --------------------------------------------------------------------------
# Instance-program evaluation.


def _run_instance_program(
    program: Program, input_value: V.Value, binding: OracleBinding
) -> V.Value:
    res = run(
        program,
        input_value,
        Fuel(_RUN_FUEL, OraclePolicy.FREE),
        0,
        binding,
        capture_hashes=False,
        cycle_cap=0,
        pull_cap=DEFAULT_PULL_CAP,
    )
    if not res.report.halted:
        raise RuntimeError("instance program did not halt")
    assert res.report.value is not None
    return res.report.value


def _next_state(
    inst: PlanningInstance, state: V.Value, move: str, binding: OracleBinding
) -> V.Value | None:
    out = _run_instance_program(
        inst.next_state, V.PairVal(state, V.StrVal(move)), binding
    )
    if isinstance(out, V.StrVal) and out.text == C.NOT_ALLOWED:
        return None
    return out


def _is_goal(inst: PlanningInstance, state: V.Value, binding: OracleBinding) -> bool:
    return _run_instance_program(inst.goal_predicate, state, binding) == V.IntVal(1)


def _neighbors(
    inst: GraphInstance, vertex: V.Value, binding: OracleBinding
) -> list[V.Value]:
    out = _run_instance_program(inst.adjacency, vertex, binding)
    neighbors = []
    while isinstance(out, V.PairVal):
        neighbors.append(out.left)
        out = out.right
    return neighbors


# --------------------------------------------------------------------------
# Solvers.


def solve_planning(
    inst: PlanningInstance, budget: int, binding: OracleBinding
) -> Plan | Infeasible | Unknown:
    """Search for a goal within ``budget`` state expansions.

    Single-move instances walk the deterministic successor chain and can
    *prove* infeasibility when the chain revisits a state before any goal:
    the certificate pins the recurrence.  Multi-move instances breadth-first
    search; with no finiteness guarantee they never claim infeasibility —
    budget exhaustion and dead ends give ``Unknown``."""
    if budget < 1:
        raise ValueError("budget must be positive")
    if len(inst.move_alphabet) == 1:
        return _solve_chain(inst, budget, binding)
    return _solve_bfs(inst, budget, binding)


def _solve_chain(
    inst: PlanningInstance, budget: int, binding: OracleBinding
) -> Plan | Infeasible | Unknown:
    move = inst.move_alphabet[0]
    seen: dict[V.Value, int] = {}
    state = inst.start
    for k in range(budget + 1):
        if _is_goal(inst, state, binding):
            plan = Plan((move,) * k)
            assert verify_plan(inst, plan, binding)
            return plan
        prev = seen.get(state)
        if prev is not None:
            cert = ConfigCycleCertificate(prev, k - prev)
            assert verify_certificate(inst, cert, binding)
            return Infeasible(cert)
        seen[state] = k
        if k == budget:
            break
        nxt = _next_state(inst, state, move, binding)
        if nxt is None:
            return Unknown(k + 1)  # dead end: no goal seen, nothing provable
        state = nxt
    return Unknown(budget)


def _solve_bfs(
    inst: PlanningInstance, budget: int, binding: OracleBinding
) -> Plan | Unknown:
    seen = {inst.start}
    queue: deque[tuple[V.Value, tuple[str, ...]]] = deque([(inst.start, ())])
    expansions = 0
    while queue and expansions < budget:
        state, moves = queue.popleft()
        if _is_goal(inst, state, binding):
            plan = Plan(moves)
            assert verify_plan(inst, plan, binding)
            return plan
        expansions += 1
        for move in inst.move_alphabet:
            nxt = _next_state(inst, state, move, binding)
            if nxt is not None and nxt not in seen:
                seen.add(nxt)
                queue.append((nxt, moves + (move,)))
    return Unknown(expansions)


def solve_reachability(
    inst: GraphInstance, binding: OracleBinding
) -> Path | NotReachable:
    """Breadth-first search from source; total because every edge increases
    the step component and the size bound caps it."""
    parent: dict[V.Value, V.Value | None] = {inst.source: None}
    queue: deque[V.Value] = deque([inst.source])
    while queue:
        vertex = queue.popleft()
        if vertex == inst.sink:
            path = [vertex]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])  # type: ignore[arg-type]
            result = Path(tuple(reversed(path)))
            assert verify_path(inst, result, binding)
            return result
        for nxt in _neighbors(inst, vertex, binding):
            if nxt not in parent:
                parent[nxt] = vertex
                queue.append(nxt)
    cert = ExhaustiveFrontier(tuple(parent))
    assert verify_certificate(inst, cert, binding)
    return NotReachable(cert)


# --------------------------------------------------------------------------
# Verification.


def verify_plan(inst: PlanningInstance, plan: Plan, binding: OracleBinding) -> bool:
    """Replay the moves from the start; every move must be allowed and the
    final state must satisfy the goal."""
    state = inst.start
    for move in plan.moves:
        if move not in inst.move_alphabet:
            return False
        nxt = _next_state(inst, state, move, binding)
        if nxt is None:
            return False
        state = nxt
    return _is_goal(inst, state, binding)


def verify_path(inst: GraphInstance, path: Path, binding: OracleBinding) -> bool:
    if not path.vertices:
        return False
    if path.vertices[0] != inst.source or path.vertices[-1] != inst.sink:
        return False
    for a, b in zip(path.vertices, path.vertices[1:]):
        if b not in _neighbors(inst, a, binding):
            return False
    return True


def verify_certificate(
    inst: PlanningInstance | GraphInstance,
    cert: ConfigCycleCertificate | ExhaustiveFrontier,
    binding: OracleBinding,
) -> bool:
    """Re-check an infeasibility certificate from scratch."""
    if isinstance(inst, PlanningInstance) and isinstance(cert, ConfigCycleCertificate):
        return _check_chain_cycle(inst, cert, binding)
    if isinstance(inst, GraphInstance) and isinstance(cert, ExhaustiveFrontier):
        return _check_frontier(inst, cert, binding)
    return False


def _check_chain_cycle(
    inst: PlanningInstance, cert: ConfigCycleCertificate, binding: OracleBinding
) -> bool:
    if len(inst.move_alphabet) != 1 or cert.prefix_len < 0 or cert.cycle_len < 1:
        return False
    move = inst.move_alphabet[0]
    state = inst.start
    at_prefix: V.Value | None = None
    for k in range(cert.prefix_len + cert.cycle_len):
        if _is_goal(inst, state, binding):
            return False
        if k == cert.prefix_len:
            at_prefix = state
        nxt = _next_state(inst, state, move, binding)
        if nxt is None:
            return False
        state = nxt
    if _is_goal(inst, state, binding):
        return False
    return at_prefix == state


def _check_frontier(
    inst: GraphInstance, cert: ExhaustiveFrontier, binding: OracleBinding
) -> bool:
    vertices = set(cert.vertices)
    if inst.source not in vertices or inst.sink in vertices:
        return False
    for vertex in vertices:
        for nxt in _neighbors(inst, vertex, binding):
            if nxt not in vertices:
                return False
    return True


# --------------------------------------------------------------------------
# JSON round-trips.


def value_to_json(v: V.Value):
    if isinstance(v, V.IntVal):
        return {"int": v.value}
    if isinstance(v, V.StrVal):
        return {"str": v.text}
    if isinstance(v, V.ProgramVal):
        return {"program": serialize_program(v.program)}
    if isinstance(v, V.PairVal):
        return {"pair": [value_to_json(v.left), value_to_json(v.right)]}
    raise ValueError(f"value kind not representable in instance JSON: {v!r}")


def value_from_json(obj) -> V.Value:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError("malformed value JSON")
    (tag, body), = obj.items()
    if tag == "int" and isinstance(body, int):
        return V.IntVal(body)
    if tag == "str" and isinstance(body, str):
        return V.StrVal(body)
    if tag == "program" and isinstance(body, str):
        return V.ProgramVal(parse_program(body))
    if tag == "pair" and isinstance(body, list) and len(body) == 2:
        return V.PairVal(value_from_json(body[0]), value_from_json(body[1]))
    raise ValueError(f"malformed value JSON: {obj!r}")


def planning_to_json(inst: PlanningInstance) -> dict:
    return {
        "next_state": serialize_program(inst.next_state),
        "start": value_to_json(inst.start),
        "goal": serialize_program(inst.goal_predicate),
        "moves": list(inst.move_alphabet),
    }


def planning_from_json(obj: dict) -> PlanningInstance:
    return PlanningInstance(
        next_state=parse_program(obj["next_state"]),
        start=value_from_json(obj["start"]),
        goal_predicate=parse_program(obj["goal"]),
        move_alphabet=tuple(obj.get("moves", (C.ADVANCE,))),
    )


def reachability_to_json(inst: GraphInstance) -> dict:
    return {
        "adjacency": serialize_program(inst.adjacency),
        "source": value_to_json(inst.source),
        "sink": value_to_json(inst.sink),
        "size_bound": inst.size_bound,
    }


def reachability_from_json(obj: dict) -> GraphInstance:
    return GraphInstance(
        adjacency=parse_program(obj["adjacency"]),
        source=value_from_json(obj["source"]),
        sink=value_from_json(obj["sink"]),
        size_bound=int(obj["size_bound"]),
    )
