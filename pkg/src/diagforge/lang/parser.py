"""Concrete s-expression syntax for DL programs.

``parse_program(serialize_program(p)) == p`` for every program, and
``serialize_program(parse_program(s))`` is the canonical spelling of ``s``
(single spaces, lowercase keywords, minimal string escapes).
"""

from __future__ import annotations

import re

from . import nodes as N

# Low enough that the guard fires before CPython's default recursion limit
# does — parse and serialize both descend a few interpreter frames per level.
MAX_NESTING = 200

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<open>\()
  | (?P<close>\))
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<rational>[0-9]+/[0-9]+)
  | (?P<int>-?[0-9]+)
  | (?P<atom>[a-z][a-z0-9-]*)
    """,
    re.VERBOSE,
)

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}


class ParseError(ValueError):
    """Syntax error with the character offset where parsing failed."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at offset {pos})")
        self.pos = pos


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup or ""
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    return out


def _unquote(raw: str, pos: int) -> str:
    body = raw[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            if i + 1 >= len(body) or body[i + 1] not in _UNESCAPES:
                raise ParseError("bad string escape", pos + 1 + i)
            out.append(_UNESCAPES[body[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _quote(text: str) -> str:
    return '"' + "".join(_ESCAPES.get(ch, ch) for ch in text) + '"'


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.end = len(text)

    def _peek(self) -> tuple[str, str, int]:
        if self.i >= len(self.tokens):
            return ("eof", "", self.end)
        return self.tokens[self.i]

    def _take(self, kind: str, what: str) -> tuple[str, int]:
        k, text, pos = self._peek()
        if k != kind:
            raise ParseError(f"expected {what}, found {text or 'end of input'!r}", pos)
        self.i += 1
        return text, pos

    def _take_atom(self, what: str) -> tuple[str, int]:
        return self._take("atom", what)

    def _rational(self) -> tuple[int, int, int]:
        text, pos = self._take("rational", "a rational number/denominator")
        num, den = text.split("/")
        return int(num), int(den), pos

    def expr(self, depth: int = 0) -> N.Node:
        if depth > MAX_NESTING:
            raise ParseError("expression nesting too deep", self._peek()[2])
        _, pos = self._take("open", "'('")
        head, hpos = self._take_atom("a keyword")
        try:
            node = self._form(head, hpos, depth)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), hpos) from exc
        self._take("close", "')'")
        return node

    def _form(self, head: str, hpos: int, depth: int) -> N.Node:
        if head == "int":
            text, _ = self._take("int", "an integer")
            return N.IntLit(int(text))
        if head == "str":
            raw, spos = self._take("string", "a string literal")
            return N.StrLit(_unquote(raw, spos))
        if head == "quote":
            return N.Quote(N.Program(self.expr(depth + 1)))
        if head == "var":
            name, _ = self._take_atom("a variable name")
            return N.Var(name)
        if head == "pair":
            return N.Pair(self.expr(depth + 1), self.expr(depth + 1))
        if head == "concat":
            return N.Concat(self.expr(depth + 1), self.expr(depth + 1))
        if head == "let":
            name, _ = self._take_atom("a variable name")
            return N.Let(name, self.expr(depth + 1), self.expr(depth + 1))
        if head == "seq":
            items = []
            while self._peek()[0] == "open":
                items.append(self.expr(depth + 1))
            return N.Seq(tuple(items))
        if head == "if":
            return N.If(self.expr(depth + 1), self.expr(depth + 1), self.expr(depth + 1))
        if head == "while-true":
            return N.WhileTrue(self.expr(depth + 1))
        if head == "return":
            return N.Return(self.expr(depth + 1))
        if head == "eval":
            return N.Eval(self.expr(depth + 1), self.expr(depth + 1))
        if head == "oracle":
            raw, spos = self._take("string", "a verifier id string")
            vid = _unquote(raw, spos)
            query, _ = self._take_atom("an oracle query")
            delta = None
            if query == N.QUERY_BEST_ARM:
                num, den, _ = self._rational()
                delta = (num, den)
            args = []
            while self._peek()[0] == "open":
                args.append(self.expr(depth + 1))
            return N.OracleCall(vid, query, tuple(args), delta)
        if head == "trace-final-verdict":
            expected, _ = self._take_atom("a verdict token")
            return N.TraceFinalVerdict(expected, self.expr(depth + 1))
        if head == "check-trace":
            raw, spos = self._take("string", "a verifier id string")
            return N.CheckTrace(_unquote(raw, spos), self.expr(depth + 1), self.expr(depth + 1))
        if head == "typecheck-input":
            return N.TypeCheckInput(self.expr(depth + 1), self.expr(depth + 1))
        if head == "bernoulli":
            num, den, _ = self._rational()
            return N.BernoulliDraw(num, den)
        raise ParseError(f"unknown keyword {head!r}", hpos)


def parse_program(text: str) -> N.Program:
    return N.Program(parse_node(text))


def parse_node(text: str) -> N.Node:
    """Parse a single expression; trailing input is an error."""
    p = _Parser(text)
    root = p.expr()
    k, tok, pos = p._peek()
    if k != "eof":
        raise ParseError(f"trailing input {tok!r}", pos)
    return root


def serialize_node(node: N.Node) -> str:
    out: list[str] = []
    _emit(node, out, 0)
    return "".join(out)


def serialize_program(program: N.Program) -> str:
    return serialize_node(program.root)


def _emit(node: N.Node, out: list[str], depth: int) -> None:
    if depth > MAX_NESTING:
        raise ValueError("expression nesting too deep to serialize")
    k = node.kind
    out.append("(")
    out.append(k)
    if isinstance(node, N.IntLit):
        out.append(f" {node.value}")
    elif isinstance(node, N.StrLit):
        out.append(" " + _quote(node.text))
    elif isinstance(node, N.Var):
        out.append(" " + node.name)
    elif isinstance(node, N.Let):
        out.append(" " + node.name)
        for c in node.children():
            out.append(" ")
            _emit(c, out, depth + 1)
        out.append(")")
        return
    elif isinstance(node, N.OracleCall):
        out.append(" " + _quote(node.verifier_id) + " " + node.query)
        if node.delta is not None:
            out.append(f" {node.delta[0]}/{node.delta[1]}")
    elif isinstance(node, N.TraceFinalVerdict):
        out.append(" " + node.expected)
    elif isinstance(node, N.CheckTrace):
        out.append(" " + _quote(node.verifier_id))
    elif isinstance(node, N.BernoulliDraw):
        out.append(f" {node.numerator}/{node.denominator}")
    for c in node.children():
        out.append(" ")
        _emit(c, out, depth + 1)
    out.append(")")
