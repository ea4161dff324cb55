"""Shared fixtures: a grammar-directed random program source generator.

The generator emits source text straight from the surface grammar, one
production per node kind, so round-trip tests exercise every constructor
including the ones the corpus generator never uses (quote, eval, oracle,
trace forms).  It deliberately produces unbound variables and unregistered
oracle ids — parsing and serialization must not care.
"""

from __future__ import annotations

import random

import pytest

LEAF_WORDS = ("a", "b", "ok", "left", "right", 'zig"zag', "back\\slash", "")
VAR_NAMES = ("x", "x1", "x2", "y", "acc")
VERDICT_TOKENS = ("halts", "does-not-halt", "dont-know", "well-behaved")
ORACLE_IDS = ("v", "aux", "dl-machine", "with space")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def gen_expr(rng: random.Random, depth: int) -> str:
    if depth <= 0 or rng.random() < 0.25:
        k = rng.randrange(4)
        if k == 0:
            return f"(int {rng.randrange(-9, 100)})"
        if k == 1:
            return f"(str {_quote(rng.choice(LEAF_WORDS))})"
        if k == 2:
            return f"(var {rng.choice(VAR_NAMES)})"
        return f"(bernoulli {rng.randrange(1, 5)}/{rng.randrange(5, 9)})"
    d = depth - 1
    k = rng.randrange(13)
    if k == 0:
        return f"(return {gen_expr(rng, d)})"
    if k == 1:
        n = rng.randrange(0, 3)
        items = " ".join(gen_expr(rng, d) for _ in range(n))
        return f"(seq {items})" if items else "(seq)"
    if k == 2:
        return f"(pair {gen_expr(rng, d)} {gen_expr(rng, d)})"
    if k == 3:
        return f"(concat {gen_expr(rng, d)} {gen_expr(rng, d)})"
    if k == 4:
        return f"(let {rng.choice(VAR_NAMES)} {gen_expr(rng, d)} {gen_expr(rng, d)})"
    if k == 5:
        return f"(if {gen_expr(rng, d)} {gen_expr(rng, d)} {gen_expr(rng, d)})"
    if k == 6:
        return f"(while-true {gen_expr(rng, d)})"
    if k == 7:
        return f"(quote {gen_expr(rng, d)})"
    if k == 8:
        return f"(eval {gen_expr(rng, d)} {gen_expr(rng, d)})"
    if k == 9:
        vid = _quote(rng.choice(ORACLE_IDS))
        query, arity = rng.choice((("halts", 2), ("does-not-halt", 2), ("at-halt", 1), ("step", 2)))
        args = " ".join(gen_expr(rng, d) for _ in range(arity))
        return f"(oracle {vid} {query} {args})"
    if k == 10:
        vid = _quote(rng.choice(ORACLE_IDS))
        delta = f"{rng.randrange(1, 5)}/{rng.randrange(10, 20)}"
        return f"(oracle {vid} best-arm-halts {delta} {gen_expr(rng, d)} {gen_expr(rng, d)})"
    if k == 11:
        return f"(trace-final-verdict {rng.choice(VERDICT_TOKENS)} {gen_expr(rng, d)})"
    if k == 12:
        vid = _quote(rng.choice(ORACLE_IDS))
        return f"(check-trace {vid} {gen_expr(rng, d)} {gen_expr(rng, d)})"
    return f"(typecheck-input {gen_expr(rng, d)} {gen_expr(rng, d)})"


def gen_program_source(seed: int, max_depth: int = 4) -> str:
    rng = random.Random(seed)
    return gen_expr(rng, rng.randrange(1, max_depth + 1))


@pytest.fixture
def registry():
    from diagforge.verifiers import Registry

    return Registry()
