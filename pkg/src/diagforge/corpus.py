"""Ground-truth program corpus for the reduction experiments.

The generator emits small closed programs in four families — straight-line
value plumbing, certified infinite loops, nested deterministic
conditionals, and coin-flip programs whose branch is fixed by the
per-entry seed — then runs each one and attaches what the run proved: a
halt witness (steps + value), a cycle certificate, or an "undetermined"
tag when fuel ran out first.  Generation is deterministic given the seed
and the corpus JSON is byte-stable, so fixtures can be frozen against it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator

from .lang import values as V
from .lang.machine import Fuel, OraclePolicy, run
from .lang.nodes import Program
from .lang.parser import parse_program, serialize_program
from .lang.rng import split_seed, stream_draw
from .reductions import value_from_json, value_to_json
from .verifiers import Registry

MAX_CORPUS_SIZE = 200
CERTIFY_FUEL = 10_000

STATUS_HALTS = "halts"
STATUS_LOOPS = "does-not-halt"
STATUS_UNDETERMINED = "undetermined"

_CATEGORY_MIX = (
    ("straight-line", 0.40),
    ("loop", 0.25),
    ("nested-if", 0.20),
    ("coin", 0.15),
)


@dataclass(frozen=True)
class CorpusEntry:
    category: str
    source: str  # canonical serialization
    seed: int
    status: str
    steps: int | None = None  # halt witness
    value: V.Value | None = None  # halt witness
    cycle_prefix: int | None = None  # cycle certificate
    cycle_len: int | None = None

    @property
    def program(self) -> Program:
        return parse_program(self.source)

    def to_json(self) -> dict:
        obj: dict = {
            "category": self.category,
            "program": self.source,
            "seed": self.seed,
            "status": self.status,
        }
        if self.status == STATUS_HALTS:
            assert self.steps is not None and self.value is not None
            obj["steps"] = self.steps
            obj["value"] = value_to_json(self.value)
        elif self.status == STATUS_LOOPS:
            obj["certificate"] = {"prefix_len": self.cycle_prefix, "cycle_len": self.cycle_len}
        return obj

    @staticmethod
    def from_json(obj: dict) -> "CorpusEntry":
        status = obj["status"]
        cert = obj.get("certificate") or {}
        return CorpusEntry(
            category=obj["category"],
            source=obj["program"],
            seed=obj["seed"],
            status=status,
            steps=obj.get("steps"),
            value=value_from_json(obj["value"]) if "value" in obj else None,
            cycle_prefix=cert.get("prefix_len"),
            cycle_len=cert.get("cycle_len"),
        )


@dataclass(frozen=True)
class Corpus:
    seed: int
    entries: tuple[CorpusEntry, ...]

    def __iter__(self) -> Iterator[CorpusEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def halting_fraction(self) -> float:
        if not self.entries:
            return 0.0
        return sum(e.status == STATUS_HALTS for e in self.entries) / len(self.entries)

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "seed": self.seed,
            "entries": [e.to_json() for e in self.entries],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_json(obj: dict) -> "Corpus":
        return Corpus(
            seed=obj["seed"],
            entries=tuple(CorpusEntry.from_json(e) for e in obj["entries"]),
        )

    @staticmethod
    def loads(text: str) -> "Corpus":
        return Corpus.from_json(json.loads(text))


# --------------------------------------------------------------------------
# Generation.


class _Gen:
    """Tiny deterministic source of generation choices (not the machine's
    randomness — the per-entry run seed is drawn separately)."""

    def __init__(self, seed: int) -> None:
        self._seed = seed
        self._counter = 0

    def below(self, n: int) -> int:
        word = stream_draw(self._seed, self._counter)
        self._counter += 1
        return word % n

    def pick(self, options):
        return options[self.below(len(options))]

    def chance(self, num: int, den: int) -> bool:
        return self.below(den) < num


_WORDS = ("a", "b", "ok", "left", "right", "loop", "zig", "zag")


def _int_expr(g: _Gen) -> str:
    return f"(int {g.below(100) - 9})"


def _str_expr(g: _Gen, depth: int) -> str:
    if depth > 0 and g.chance(1, 3):
        return f'(concat {_str_expr(g, depth - 1)} {_str_expr(g, depth - 1)})'
    return f'(str "{g.pick(_WORDS)}")'


def _value_expr(g: _Gen, depth: int) -> str:
    roll = g.below(4)
    if roll == 0 and depth > 0:
        return f"(pair {_value_expr(g, depth - 1)} {_value_expr(g, depth - 1)})"
    if roll == 1:
        return _str_expr(g, depth)
    return _int_expr(g)


def _straight_line(g: _Gen) -> str:
    ret = f"(return {_value_expr(g, 2)})"
    for _ in range(g.below(3)):
        if g.chance(1, 2):
            name = g.pick(("y", "z", "w"))
            ret = f"(let {name} {_value_expr(g, 1)} {ret})"
        else:
            ret = f"(seq {_value_expr(g, 1)} {ret})"
    return ret


def _loop(g: _Gen) -> str:
    body = "(seq)" if g.chance(1, 2) else f"(seq {_value_expr(g, 1)})"
    loop = f"(while-true {body})"
    if g.chance(1, 3):
        loop = f"(seq {_value_expr(g, 1)} {loop})"
    return loop


def _branch(g: _Gen, depth: int) -> str:
    roll = g.below(6)
    if roll == 0:
        return _loop(g)
    if roll == 1 and depth > 0:
        return _nested_if(g, depth - 1)
    return f"(return {_value_expr(g, 1)})"


def _nested_if(g: _Gen, depth: int) -> str:
    cond = f"(int {g.below(3)})"
    return f"(if {cond} {_branch(g, depth)} {_branch(g, depth)})"


def _coin(g: _Gen, depth: int = 1) -> str:
    num, den = g.pick(((1, 2), (1, 3), (2, 3), (1, 4)))
    if depth > 0 and g.chance(1, 4):
        a = _coin(g, depth - 1)
    else:
        a = _branch(g, 0)
    b = _branch(g, 0)
    return f"(if (bernoulli {num}/{den}) {a} {b})"


_GENERATORS = {
    "straight-line": lambda g: _straight_line(g),
    "loop": lambda g: _loop(g),
    "nested-if": lambda g: _nested_if(g, 2),
    "coin": lambda g: _coin(g),
}


def _category_counts(size: int) -> list[tuple[str, int]]:
    counts = [(name, int(size * frac)) for name, frac in _CATEGORY_MIX]
    shortfall = size - sum(n for _, n in counts)
    name0, n0 = counts[0]
    return [(name0, n0 + shortfall)] + counts[1:]


def certify(program: Program, seed: int, *, fuel: int = CERTIFY_FUEL) -> CorpusEntry:
    """Run a closed program and record what the run proved."""
    source = serialize_program(program)
    report = run(
        program, V.IntVal(0), Fuel(fuel, OraclePolicy.FREE), seed, Registry(),
        capture_hashes=False,
    ).report
    if report.halted:
        return CorpusEntry(
            category="", source=source, seed=seed, status=STATUS_HALTS,
            steps=report.steps, value=report.value,
        )
    if report.cycled:
        return CorpusEntry(
            category="", source=source, seed=seed, status=STATUS_LOOPS,
            cycle_prefix=report.prefix_len, cycle_len=report.cycle_len,
        )
    return CorpusEntry(category="", source=source, seed=seed, status=STATUS_UNDETERMINED)


def build_corpus(size: int, seed: int) -> Corpus:
    if not 0 <= size <= MAX_CORPUS_SIZE:
        raise ValueError(f"corpus size must be in [0, {MAX_CORPUS_SIZE}]")
    entries = []
    index = 0
    for category, count in _category_counts(size):
        make = _GENERATORS[category]
        for _ in range(count):
            entry_seed = split_seed(seed, index)
            g = _Gen(split_seed(entry_seed, 0))
            run_seed = split_seed(entry_seed, 1)
            program = parse_program(make(g))
            certified = certify(program, run_seed)
            entries.append(
                CorpusEntry(
                    category=category,
                    source=certified.source,
                    seed=run_seed,
                    status=certified.status,
                    steps=certified.steps,
                    value=certified.value,
                    cycle_prefix=certified.cycle_prefix,
                    cycle_len=certified.cycle_len,
                )
            )
            index += 1
    return Corpus(seed=seed, entries=tuple(entries))


def recheck_entry(entry: CorpusEntry) -> bool:
    """Re-derive the entry's certificate from scratch and compare."""
    fresh = certify(entry.program, entry.seed)
    if fresh.status != entry.status:
        return False
    if entry.status == STATUS_HALTS:
        return fresh.steps == entry.steps and fresh.value == entry.value
    if entry.status == STATUS_LOOPS:
        return (
            fresh.cycle_prefix == entry.cycle_prefix
            and fresh.cycle_len == entry.cycle_len
        )
    return True
