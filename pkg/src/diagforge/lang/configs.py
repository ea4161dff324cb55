"""Canonical text encoding of machine configurations.

The reductions present a run of the machine as a chain of explicit states, so
a configuration must round-trip through a string: control (the expression or
value in focus), environment, continuation, randomness position, and oracle
cost policy.  Step counts and fuel are deliberately *not* part of a
configuration — they are properties of a run, not of a state — which is what
lets a recurring configuration certify non-halting.

A halting transition produces a distinguished terminal form ``(halted <v>)``
carrying the final value; terminal configurations have no successor.

The grammar (one line, single spaces, same token shapes as DL source):

.. code-block:: text

    config := (cfg <policy> <ctrl> <env> <kont> (rng <seed> <counter>))
            | (halted <value>)
    policy := free | metered
    ctrl   := (ev "<dl-expr>") | (val <value>)
    value  := (vint <n>) | (vstr "<text>") | (vprog "<dl-program>")
            | (vpair <value> <value>) | (vverdict <task> <code>)
            | (vtrace "<id>" "<dl-program>" (draws <n>*) (hashes <n>*) <task> <code>)
    env    := (env (b <name> <value>)*)      -- innermost binding first
    kont   := (kont <frame>*)                -- top frame first

``encode ∘ decode`` is the identity on canonical strings and ``decode ∘
encode`` is the identity on configurations, mirroring the program syntax.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import nodes as N
from . import values as V
from .machine import (
    Env,
    Frame,
    Fuel,
    HandlerCtx,
    KCheck1,
    KCheck2,
    KConcatL,
    KConcatR,
    KEvalArg,
    KEvalFun,
    KIf,
    KLet,
    KOracle,
    KPairL,
    KPairR,
    KProg,
    KReturn,
    KSeq,
    KTci1,
    KTci2,
    KTfv,
    KWhile,
    Machine,
    OracleBinding,
    OraclePolicy,
    OracleRequest,
    _Driver,
)
from .parser import (
    ParseError,
    _quote,
    _tokenize,
    _unquote,
    parse_node,
    parse_program,
    serialize_node,
    serialize_program,
)
from .rng import RngState
from .trace import Trace
from .verdicts import Task, Verdict

NOT_ALLOWED = "#not-allowed"
HALT_SINK = "#halt-sink"
ADVANCE = "advance"

_STEP_FUEL = 1 << 62


class ConfigError(ValueError):
    """A string does not encode a machine configuration."""


# --------------------------------------------------------------------------
# Generic s-expression reading, reusing the DL token shapes.


@dataclass(frozen=True)
class _QStr:
    text: str


def _read_tree(text: str):
    tokens = _tokenize(text)
    pos = 0

    def node():
        nonlocal pos
        if pos >= len(tokens):
            raise ConfigError("unexpected end of configuration")
        kind, tok, at = tokens[pos]
        pos += 1
        if kind == "open":
            items = []
            while True:
                if pos >= len(tokens):
                    raise ConfigError("unclosed parenthesis in configuration")
                if tokens[pos][0] == "close":
                    pos += 1
                    return items
                items.append(node())
        if kind == "close":
            raise ConfigError(f"unexpected ')' at offset {at}")
        if kind == "string":
            return _QStr(_unquote(tok, at))
        if kind == "int":
            return int(tok)
        if kind == "rational":
            num, den = tok.split("/")
            return (int(num), int(den))
        return tok  # atom

    try:
        tree = node()
    except ParseError as exc:
        raise ConfigError(str(exc)) from exc
    if pos != len(tokens):
        raise ConfigError("trailing tokens after configuration")
    return tree


def _expect_list(tree, tag: str) -> list:
    if not isinstance(tree, list) or not tree or tree[0] != tag:
        raise ConfigError(f"expected ({tag} ...)")
    return tree


# --------------------------------------------------------------------------
# Values.


def _emit_value(v: V.Value, out: list[str]) -> None:
    if isinstance(v, V.IntVal):
        out.append(f"(vint {v.value})")
    elif isinstance(v, V.StrVal):
        out.append(f"(vstr {_quote(v.text)})")
    elif isinstance(v, V.ProgramVal):
        out.append(f"(vprog {_quote(serialize_program(v.program))})")
    elif isinstance(v, V.PairVal):
        out.append("(vpair ")
        _emit_value(v.left, out)
        out.append(" ")
        _emit_value(v.right, out)
        out.append(")")
    elif isinstance(v, V.VerdictVal):
        out.append(f"(vverdict {v.verdict.task.value} {v.verdict.code})")
    elif isinstance(v, V.TraceVal):
        t = v.trace
        out.append(f"(vtrace {_quote(t.verifier_id)} ")
        out.append(_quote(serialize_program(t.subject_program)))
        out.append(" (draws")
        for d in t.random_draws:
            out.append(f" {d}")
        out.append(") (hashes")
        for h in t.step_hashes:
            out.append(f" {h}")
        out.append(f") {t.final_verdict.task.value} {t.final_verdict.code})")
    else:  # pragma: no cover - the value set is closed
        raise TypeError(f"unknown value {v!r}")


def encode_value(v: V.Value) -> str:
    out: list[str] = []
    _emit_value(v, out)
    return "".join(out)


def _parse_program_str(q) -> N.Program:
    if not isinstance(q, _QStr):
        raise ConfigError("expected a quoted program")
    return parse_program(q.text)


def _decode_value(tree) -> V.Value:
    if not isinstance(tree, list) or not tree:
        raise ConfigError("expected a value form")
    tag = tree[0]
    if tag == "vint" and len(tree) == 2 and isinstance(tree[1], int):
        return V.IntVal(tree[1])
    if tag == "vstr" and len(tree) == 2 and isinstance(tree[1], _QStr):
        return V.StrVal(tree[1].text)
    if tag == "vprog" and len(tree) == 2:
        return V.ProgramVal(_parse_program_str(tree[1]))
    if tag == "vpair" and len(tree) == 3:
        return V.PairVal(_decode_value(tree[1]), _decode_value(tree[2]))
    if tag == "vverdict" and len(tree) == 3:
        return V.VerdictVal(Verdict(Task(tree[1]), tree[2]))
    if tag == "vtrace" and len(tree) == 7:
        _, vid, prog, draws, hashes, task, code = tree
        if not isinstance(vid, _QStr):
            raise ConfigError("trace verifier id must be a string")
        draws_l = _expect_list(draws, "draws")
        hashes_l = _expect_list(hashes, "hashes")
        return V.TraceVal(
            Trace(
                vid.text,
                _parse_program_str(prog),
                tuple(int(x) for x in draws_l[1:]),
                tuple(int(x) for x in hashes_l[1:]),
                Verdict(Task(task), code),
            )
        )
    raise ConfigError(f"bad value form {tag!r}")


# --------------------------------------------------------------------------
# Environments and continuations.


def _emit_env(env: Env | None, out: list[str]) -> None:
    out.append("(env")
    e = env
    while e is not None:
        out.append(f" (b {e.name} ")
        _emit_value(e.value, out)
        out.append(")")
        e = e.parent
    out.append(")")


def _decode_env(tree) -> Env | None:
    items = _expect_list(tree, "env")
    env: Env | None = None
    for b in reversed(items[1:]):
        if not (isinstance(b, list) and len(b) == 3 and b[0] == "b" and isinstance(b[1], str)):
            raise ConfigError("bad environment binding")
        env = Env(b[1], _decode_value(b[2]), env)
    return env


def _emit_expr(node: N.Node, out: list[str]) -> None:
    out.append(_quote(serialize_node(node)))


def _decode_expr(q) -> N.Node:
    if not isinstance(q, _QStr):
        raise ConfigError("expected a quoted expression")
    return parse_node(q.text)


def _emit_frame(k: Frame, out: list[str]) -> None:
    if isinstance(k, KProg):
        out.append("(kprog)")
    elif isinstance(k, KPairL):
        out.append("(kpairl ")
        _emit_expr(k.right, out)
        out.append(" ")
        _emit_env(k.env, out)
        out.append(")")
    elif isinstance(k, KPairR):
        out.append("(kpairr ")
        _emit_value(k.left, out)
        out.append(")")
    elif isinstance(k, KConcatL):
        out.append("(kconcatl ")
        _emit_expr(k.right, out)
        out.append(" ")
        _emit_env(k.env, out)
        out.append(")")
    elif isinstance(k, KConcatR):
        out.append("(kconcatr ")
        _emit_value(k.left, out)
        out.append(")")
    elif isinstance(k, KLet):
        out.append(f"(klet {k.name} ")
        _emit_expr(k.body, out)
        out.append(" ")
        _emit_env(k.env, out)
        out.append(")")
    elif isinstance(k, KSeq):
        out.append("(kseq (items")
        for item in k.rest:
            out.append(" ")
            _emit_expr(item, out)
        out.append(") ")
        _emit_env(k.env, out)
        out.append(")")
    elif isinstance(k, KIf):
        out.append("(kif ")
        _emit_expr(k.then, out)
        out.append(" ")
        _emit_expr(k.orelse, out)
        out.append(" ")
        _emit_env(k.env, out)
        out.append(")")
    elif isinstance(k, KWhile):
        out.append("(kwhile ")
        _emit_expr(k.body, out)
        out.append(" ")
        _emit_env(k.env, out)
        out.append(")")
    elif isinstance(k, KReturn):
        out.append("(kreturn)")
    elif isinstance(k, KEvalFun):
        out.append("(kevalf ")
        _emit_expr(k.input, out)
        out.append(" ")
        _emit_env(k.env, out)
        out.append(")")
    elif isinstance(k, KEvalArg):
        out.append(f"(kevala {_quote(serialize_program(k.program))})")
    elif isinstance(k, KOracle):
        out.append("(koracle ")
        _emit_expr(k.node, out)
        out.append(" (done")
        for v in k.done:
            out.append(" ")
            _emit_value(v, out)
        out.append(") ")
        _emit_env(k.env, out)
        out.append(")")
    elif isinstance(k, KTfv):
        out.append("(ktfv ")
        _emit_expr(k.node, out)
        out.append(")")
    elif isinstance(k, KCheck1):
        out.append("(kct1 ")
        _emit_expr(k.node, out)
        out.append(" ")
        _emit_env(k.env, out)
        out.append(")")
    elif isinstance(k, KCheck2):
        out.append("(kct2 ")
        _emit_expr(k.node, out)
        out.append(" ")
        _emit_value(k.subject, out)
        out.append(")")
    elif isinstance(k, KTci1):
        out.append("(ktci1 ")
        _emit_expr(k.input, out)
        out.append(" ")
        _emit_env(k.env, out)
        out.append(")")
    elif isinstance(k, KTci2):
        out.append("(ktci2 ")
        _emit_value(k.subject, out)
        out.append(")")
    else:  # pragma: no cover - the frame set is closed
        raise TypeError(f"unknown frame {k!r}")


def _env_or_empty(tree) -> Env:
    env = _decode_env(tree)
    if env is None:
        raise ConfigError("frame environment may not be empty")
    return env


def _decode_frame(tree, nxt: Frame | None) -> Frame:
    items = tree if isinstance(tree, list) and tree else None
    if items is None:
        raise ConfigError("bad continuation frame")
    tag = items[0]
    if tag == "kprog" and len(items) == 1:
        return KProg(nxt)
    if nxt is None:
        raise ConfigError("continuation must bottom out in (kprog)")
    if tag == "kpairl" and len(items) == 3:
        return KPairL(_decode_expr(items[1]), _env_or_empty(items[2]), nxt)
    if tag == "kpairr" and len(items) == 2:
        return KPairR(_decode_value(items[1]), nxt)
    if tag == "kconcatl" and len(items) == 3:
        return KConcatL(_decode_expr(items[1]), _env_or_empty(items[2]), nxt)
    if tag == "kconcatr" and len(items) == 2:
        return KConcatR(_decode_value(items[1]), nxt)
    if tag == "klet" and len(items) == 4 and isinstance(items[1], str):
        return KLet(items[1], _decode_expr(items[2]), _env_or_empty(items[3]), nxt)
    if tag == "kseq" and len(items) == 3:
        rest_l = _expect_list(items[1], "items")
        rest = tuple(_decode_expr(q) for q in rest_l[1:])
        if not rest:
            raise ConfigError("kseq must carry at least one pending item")
        return KSeq(rest, _env_or_empty(items[2]), nxt)
    if tag == "kif" and len(items) == 4:
        return KIf(_decode_expr(items[1]), _decode_expr(items[2]), _env_or_empty(items[3]), nxt)
    if tag == "kwhile" and len(items) == 3:
        return KWhile(_decode_expr(items[1]), _env_or_empty(items[2]), nxt)
    if tag == "kreturn" and len(items) == 1:
        return KReturn(nxt)
    if tag == "kevalf" and len(items) == 3:
        return KEvalFun(_decode_expr(items[1]), _env_or_empty(items[2]), nxt)
    if tag == "kevala" and len(items) == 2:
        return KEvalArg(_parse_program_str(items[1]), nxt)
    if tag == "koracle" and len(items) == 4:
        node = _decode_expr(items[1])
        if not isinstance(node, N.OracleCall):
            raise ConfigError("koracle frame must embed an oracle expression")
        done_l = _expect_list(items[2], "done")
        done = tuple(_decode_value(t) for t in done_l[1:])
        if len(done) >= len(node.args):
            raise ConfigError("koracle progress out of range")
        rest = node.args[len(done) + 1 :]
        return KOracle(node, done, rest, _env_or_empty(items[3]), nxt)
    if tag == "ktfv" and len(items) == 2:
        node = _decode_expr(items[1])
        if not isinstance(node, N.TraceFinalVerdict):
            raise ConfigError("ktfv frame must embed a trace-final-verdict expression")
        return KTfv(node, nxt)
    if tag == "kct1" and len(items) == 3:
        node = _decode_expr(items[1])
        if not isinstance(node, N.CheckTrace):
            raise ConfigError("kct1 frame must embed a check-trace expression")
        return KCheck1(node, _env_or_empty(items[2]), nxt)
    if tag == "kct2" and len(items) == 3:
        node = _decode_expr(items[1])
        if not isinstance(node, N.CheckTrace):
            raise ConfigError("kct2 frame must embed a check-trace expression")
        return KCheck2(node, _decode_value(items[2]), nxt)
    if tag == "ktci1" and len(items) == 3:
        return KTci1(_decode_expr(items[1]), _env_or_empty(items[2]), nxt)
    if tag == "ktci2" and len(items) == 2:
        return KTci2(_decode_value(items[1]), nxt)
    raise ConfigError(f"bad continuation frame {tag!r}")


# --------------------------------------------------------------------------
# Whole configurations.


def encode_machine(m: Machine) -> str:
    """The canonical string for a live machine state."""
    out: list[str] = ["(cfg ", m.fuel.oracle_policy.value, " "]
    if m.value is not None:
        out.append("(val ")
        _emit_value(m.value, out)
        out.append(")")
    else:
        assert m.expr is not None
        out.append("(ev ")
        _emit_expr(m.expr, out)
        out.append(")")
    out.append(" ")
    _emit_env(m.env, out)
    out.append(" (kont")
    k: Frame | None = m.kont
    while k is not None:
        out.append(" ")
        _emit_frame(k, out)
        k = k.nxt
    out.append(f") (rng {m.rng.seed} {m.rng.counter}))")
    return "".join(out)


def encode_halted(value: V.Value) -> str:
    out: list[str] = ["(halted "]
    _emit_value(value, out)
    out.append(")")
    return "".join(out)


def initial_config(
    program: N.Program, input_value: V.Value, policy: OraclePolicy, seed: int
) -> str:
    m = Machine(program, input_value, Fuel(_STEP_FUEL, policy), seed, capture_hashes=False, cycle_cap=0)
    return encode_machine(m)


def is_halted_config(text: str) -> bool:
    try:
        tree = _read_tree(text)
    except ConfigError:
        return False
    return isinstance(tree, list) and len(tree) == 2 and tree[0] == "halted"


def halted_value(text: str) -> V.Value:
    tree = _read_tree(text)
    items = _expect_list(tree, "halted")
    if len(items) != 2:
        raise ConfigError("bad halted configuration")
    return _decode_value(items[1])


def decode_machine(text: str) -> Machine:
    """Rebuild a live machine (step counter zeroed) from its string."""
    tree = _read_tree(text)
    items = _expect_list(tree, "cfg")
    if len(items) != 6:
        raise ConfigError("configuration must have policy, control, env, kont, rng")
    _, policy_tok, ctrl_t, env_t, kont_t, rng_t = items
    try:
        policy = OraclePolicy(policy_tok)
    except ValueError as exc:
        raise ConfigError(f"bad policy {policy_tok!r}") from exc
    if not isinstance(ctrl_t, list) or not ctrl_t:
        raise ConfigError("bad control")
    if ctrl_t[0] == "ev" and len(ctrl_t) == 2:
        ctrl: N.Node | V.Value = _decode_expr(ctrl_t[1])
    elif ctrl_t[0] == "val" and len(ctrl_t) == 2:
        ctrl = _decode_value(ctrl_t[1])
    else:
        raise ConfigError("control must be (ev ...) or (val ...)")
    env = _decode_env(env_t)
    if env is None:
        raise ConfigError("machine environment may not be empty")
    kont_l = _expect_list(kont_t, "kont")
    if len(kont_l) < 2:
        raise ConfigError("continuation may not be empty")
    kont: Frame | None = None
    for frame_t in reversed(kont_l[1:]):
        kont = _decode_frame(frame_t, kont)
    assert kont is not None
    rng_l = _expect_list(rng_t, "rng")
    if len(rng_l) != 3 or not all(isinstance(x, int) for x in rng_l[1:]):
        raise ConfigError("bad rng position")
    rng = RngState(rng_l[1], rng_l[2])
    return Machine.from_parts(ctrl, env, kont, rng, Fuel(_STEP_FUEL, policy))


def step_config(
    text: str, binding: OracleBinding, *, pull_cap: int = 10**6
) -> tuple[str, int] | None:
    """Advance a configuration by one machine transition.

    Returns ``(successor, cost)`` where cost is the step charge of the
    transition under the configuration's own cost policy, or ``None`` when
    the configuration admits no move (already halted, or the transition's
    oracle work cannot complete).
    """
    if is_halted_config(text):
        return None
    m = decode_machine(text)
    driver = _Driver(binding, pull_cap)
    driver.push_root(m)
    r = m.step()
    if isinstance(r, OracleRequest):
        driver._apply(binding.handle(r, HandlerCtx(m, pull_cap)))
        driver.settle_nested()
    report = m.poll()
    if report is not None:
        if report.halted:
            assert report.value is not None
            return encode_halted(report.value), m.steps
        return None  # forced abort (e.g. exploration cap); no legal move
    return encode_machine(m), m.steps
