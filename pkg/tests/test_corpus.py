"""Ground-truth corpus: deterministic generation, certification, fixtures.

Seed 2026 is the reference corpus.  Its composition and halting statistics
were recorded once from a trusted run and are frozen here; regeneration
must reproduce them bit for bit.
"""

import json
import statistics

import pytest

from diagforge.corpus import (
    CERTIFY_FUEL,
    Corpus,
    CorpusEntry,
    MAX_CORPUS_SIZE,
    STATUS_HALTS,
    STATUS_LOOPS,
    STATUS_UNDETERMINED,
    build_corpus,
    certify,
    recheck_entry,
)
from diagforge.lang import parser as P

FIXTURE_SEED = 2026


@pytest.fixture(scope="module")
def fixture_corpus():
    return build_corpus(60, FIXTURE_SEED)


def test_fixture_composition_is_frozen(fixture_corpus):
    by_category = {}
    for entry in fixture_corpus:
        by_category[entry.category] = by_category.get(entry.category, 0) + 1
    assert by_category == {"straight-line": 24, "loop": 15, "nested-if": 12, "coin": 9}


def test_fixture_statistics_are_frozen(fixture_corpus):
    statuses = [e.status for e in fixture_corpus]
    assert statuses.count(STATUS_HALTS) == 41
    assert statuses.count(STATUS_LOOPS) == 19
    assert statuses.count(STATUS_UNDETERMINED) == 0
    assert fixture_corpus.halting_fraction() == pytest.approx(41 / 60)
    halt_steps = sorted(e.steps for e in fixture_corpus if e.status == STATUS_HALTS)
    assert halt_steps[0] == 3
    assert halt_steps[-1] == 25
    assert statistics.median(halt_steps) == 9


def test_regeneration_is_byte_identical(fixture_corpus):
    again = build_corpus(60, FIXTURE_SEED)
    assert again.dumps() == fixture_corpus.dumps()
    assert again.dumps().encode() == fixture_corpus.dumps().encode()


def test_different_seeds_differ():
    assert build_corpus(20, 1).dumps() != build_corpus(20, 2).dumps()


def test_dumps_loads_round_trip(fixture_corpus):
    blob = fixture_corpus.dumps()
    loaded = Corpus.loads(blob)
    assert loaded == fixture_corpus
    assert loaded.dumps() == blob
    assert json.loads(blob)  # stays plain JSON for other tooling


def test_every_entry_rechecks(fixture_corpus):
    assert all(recheck_entry(entry) for entry in fixture_corpus)


def test_tampered_entries_fail_recheck(fixture_corpus):
    halting = next(e for e in fixture_corpus if e.status == STATUS_HALTS)
    wrong_steps = CorpusEntry(halting.category, halting.source, halting.seed,
                              halting.status, steps=halting.steps + 1, value=halting.value)
    assert not recheck_entry(wrong_steps)
    looping = next(e for e in fixture_corpus if e.status == STATUS_LOOPS)
    flipped = CorpusEntry(looping.category, looping.source, looping.seed,
                          STATUS_HALTS, steps=10, value=None)
    assert not recheck_entry(flipped)


def test_empty_corpus():
    corpus = build_corpus(0, 7)
    assert len(corpus.entries) == 0
    assert Corpus.loads(corpus.dumps()) == corpus


def test_size_is_bounded():
    with pytest.raises(ValueError):
        build_corpus(MAX_CORPUS_SIZE + 1, 0)
    with pytest.raises(ValueError):
        build_corpus(-1, 0)


def test_certify_records_a_halt_witness():
    entry = certify(P.parse_program("(return (int 0))"), seed=5)
    assert entry.status == STATUS_HALTS
    assert entry.steps == 3
    assert recheck_entry(entry)


def test_certify_records_a_cycle():
    entry = certify(P.parse_program("(while-true (seq))"), seed=5)
    assert entry.status == STATUS_LOOPS
    assert (entry.cycle_prefix, entry.cycle_len) == (1, 2)
    assert recheck_entry(entry)


def test_certify_reports_fuel_exhaustion_as_undetermined():
    # A loop too long for the certification budget is recorded honestly.
    slow = P.parse_program("(while-true (seq))")
    entry = certify(slow, seed=0, fuel=2)
    assert entry.status == STATUS_UNDETERMINED
    assert entry.steps is None


def test_small_corpora_are_dominated_by_halting_programs():
    corpus = build_corpus(20, 5)
    assert corpus.halting_fraction() == pytest.approx(0.65)


def test_entry_programs_parse_and_certification_fuel_is_sane(fixture_corpus):
    for entry in fixture_corpus:
        program = P.parse_program(entry.source)
        assert program == entry.program
        if entry.status == STATUS_HALTS:
            assert entry.steps <= CERTIFY_FUEL
