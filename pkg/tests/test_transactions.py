import random

import pytest

from adaptmine import (
    Item,
    Marker,
    Part,
    build_transaction_db,
    build_transactions,
    encode_pair,
    format_cases,
    item_token,
    parse_kb_text,
    read_transactions,
    transaction_stats,
    write_transactions,
)
from adaptmine.mining import TransactionDB
from adaptmine.properties import UniverseMismatchError
from adaptmine.synthetic import default_spec, generate_synthetic
from oracles import random_kb


def _letters_sets(letters_kb):
    fcb = format_cases(letters_kb)
    e1, e2 = fcb.entries
    return fcb, e1, e2


def _tokens(transaction, universe):
    return {item_token(i, universe) for i in transaction.items}


class TestEncodePair:
    def test_reference_example(self, letters_kb):
        fcb, e1, e2 = _letters_sets(letters_kb)
        t = encode_pair(
            e1.problem_set, e2.problem_set, e1.solution_set, e2.solution_set, "k1", "k2"
        )
        assert _tokens(t, fcb.universe) == {
            "a|pb|-",
            "b|pb|=",
            "c|pb|=",
            "d|pb|+",
            "A|sol|-",
            "B|sol|=",
            "C|sol|+",
        }

    def test_identical_sides_all_equal(self, letters_kb):
        fcb, e1, _ = _letters_sets(letters_kb)
        t = encode_pair(e1.problem_set, e1.problem_set, e1.solution_set, e1.solution_set)
        assert all(i.marker is Marker.EQUAL for i in t.items)

    def test_swap_exchanges_minus_and_plus(self, letters_kb):
        fcb, e1, e2 = _letters_sets(letters_kb)
        fwd = encode_pair(e1.problem_set, e2.problem_set, e1.solution_set, e2.solution_set)
        rev = encode_pair(e2.problem_set, e1.problem_set, e2.solution_set, e1.solution_set)
        flip = {Marker.MINUS: Marker.PLUS, Marker.PLUS: Marker.MINUS, Marker.EQUAL: Marker.EQUAL}
        assert {Item(i.ordinal, i.part, flip[i.marker]) for i in fwd.items} == set(rev.items)

    def test_universe_mismatch_rejected(self, letters_kb, worked_kb):
        _, e1, e2 = _letters_sets(letters_kb)
        other = format_cases(worked_kb).entries[0]
        with pytest.raises(UniverseMismatchError):
            encode_pair(e1.problem_set, other.problem_set, e1.solution_set, e2.solution_set)

    def test_partition_per_part(self, letters_kb):
        fcb, e1, e2 = _letters_sets(letters_kb)
        t = encode_pair(e1.problem_set, e2.problem_set, e1.solution_set, e2.solution_set)
        pb_union = e1.problem_set.ordinals | e2.problem_set.ordinals
        by_marker = {m: set() for m in Marker}
        for i in t.items:
            if i.part is Part.PB:
                by_marker[i.marker].add(i.ordinal)
        assert by_marker[Marker.MINUS] | by_marker[Marker.EQUAL] | by_marker[Marker.PLUS] == pb_union
        assert not by_marker[Marker.MINUS] & by_marker[Marker.EQUAL]
        assert not by_marker[Marker.MINUS] & by_marker[Marker.PLUS]
        assert not by_marker[Marker.EQUAL] & by_marker[Marker.PLUS]


class TestPartitionAntisymmetryRandom:
    @pytest.mark.parametrize("seed", range(10))
    def test_random_case_bases(self, seed):
        rng = random.Random(3000 + seed)
        kb = random_kb(rng)
        fcb = format_cases(kb)
        flip = {Marker.MINUS: Marker.PLUS, Marker.PLUS: Marker.MINUS, Marker.EQUAL: Marker.EQUAL}
        for a in fcb.entries:
            for b in fcb.entries:
                fwd = encode_pair(a.problem_set, b.problem_set, a.solution_set, b.solution_set)
                rev = encode_pair(b.problem_set, a.problem_set, b.solution_set, a.solution_set)
                assert {Item(i.ordinal, i.part, flip[i.marker]) for i in fwd.items} == set(
                    rev.items
                )
                for part, left, right in (
                    (Part.PB, a.problem_set, b.problem_set),
                    (Part.SOL, a.solution_set, b.solution_set),
                ):
                    union = left.ordinals | right.ordinals
                    got = {i.ordinal for i in fwd.items if i.part is part}
                    assert got == union


class TestBuildTransactions:
    def test_count_without_filter(self, letters_kb):
        ts = list(build_transactions(format_cases(letters_kb)))
        assert len(ts) == 2  # n(n-1) with n=2
        assert [t.pair for t in ts] == [("k1", "k2"), ("k2", "k1")]

    def test_single_case_empty(self):
        kb = parse_kb_text("[ontology]\n[cases]\nc1 | a | D\n")
        assert list(build_transactions(format_cases(kb))) == []

    def test_count_is_n_times_n_minus_one(self):
        kb, _ = generate_synthetic(default_spec(25, seed=6, prevalence=0.05))
        fcb = format_cases(kb)
        assert len(list(build_transactions(fcb))) == 25 * 24
        assert build_transaction_db(fcb).n_transactions == 25 * 24

    def test_large_k_filters_everything(self, letters_kb):
        ts = list(build_transactions(format_cases(letters_kb), min_overlap=10**6))
        assert ts == []

    def test_overlap_filter_monotone(self):
        rng = random.Random(99)
        kb = random_kb(rng)
        fcb = format_cases(kb)
        previous = None
        for k in range(0, 6):
            pairs = {t.pair for t in build_transactions(fcb, min_overlap=k)}
            if previous is not None:
                assert pairs <= previous
            previous = pairs

    def test_overlap_counts_problem_side_only(self, letters_kb):
        fcb = format_cases(letters_kb)
        # problems share exactly {b, c}
        assert len(list(build_transactions(fcb, min_overlap=2))) == 2
        assert len(list(build_transactions(fcb, min_overlap=3))) == 0


class TestStats:
    def test_single_reference_transaction(self, letters_kb):
        fcb, e1, e2 = _letters_sets(letters_kb)
        t = encode_pair(e1.problem_set, e2.problem_set, e1.solution_set, e2.solution_set)
        stats = transaction_stats([t])
        assert stats.count == 1
        assert len(stats.item_frequencies) == 7
        assert all(v == 1 for v in stats.item_frequencies.values())

    def test_empty(self):
        stats = transaction_stats([])
        assert stats.count == 0 and stats.item_frequencies == {} and stats.density == 0.0

    def test_duplication_doubles(self, letters_kb):
        fcb, e1, e2 = _letters_sets(letters_kb)
        t = encode_pair(e1.problem_set, e2.problem_set, e1.solution_set, e2.solution_set)
        single = transaction_stats([t])
        double = transaction_stats([t, t])
        assert double.count == 2
        assert all(double.item_frequencies[i] == 2 * v for i, v in single.item_frequencies.items())


class TestVerticalDatabase:
    def test_matches_streamed_encoding(self):
        rng = random.Random(4321)
        for _ in range(6):
            kb = random_kb(rng)
            fcb = format_cases(kb)
            db = build_transaction_db(fcb)
            streamed = list(build_transactions(fcb))
            assert db.n_transactions == len(streamed)
            itemsets = [
                frozenset(item_token(i, fcb.universe) for i in t.items) for t in streamed
            ]
            reference = TransactionDB.from_itemsets(itemsets)
            for token in reference.tokens:
                row = db.label_index.get(_token_to_item_lookup(db, token))
                assert row is not None, f"missing item {token}"
            # per-item supports agree
            ref_counts = dict(zip(reference.tokens, reference.item_counts))
            got_counts = dict(zip(db.tokens, db.item_counts))
            assert got_counts == {t: int(c) for t, c in ref_counts.items()}

    def test_k_overlap_column_subset(self):
        rng = random.Random(777)
        kb = random_kb(rng)
        fcb = format_cases(kb)
        full = build_transaction_db(fcb)
        filtered = build_transaction_db(fcb, min_overlap=1)
        assert filtered.n_transactions <= full.n_transactions
        expected = len(list(build_transactions(fcb, min_overlap=1)))
        assert filtered.n_transactions == expected


def _token_to_item_lookup(db, token):
    for label, tok in zip(db.labels, db.tokens):
        if tok == token:
            return label
    return None


class TestExportRoundTrip:
    def test_write_and_read(self, letters_kb):
        fcb = format_cases(letters_kb)
        text = write_transactions(fcb, kb_digest=letters_kb.digest)
        header, rows = read_transactions(text)
        assert header["kb-digest"] == letters_kb.digest
        assert len(rows) == 2
        src, tgt, tokens = rows[0]
        assert (src, tgt) == ("k1", "k2")
        assert tokens == {
            "a|pb|-",
            "b|pb|=",
            "c|pb|=",
            "d|pb|+",
            "A|sol|-",
            "B|sol|=",
            "C|sol|+",
        }

    def test_reloaded_transactions_mine_identically(self, letters_kb):
        from adaptmine import MiningParams, mine_fcis

        fcb = format_cases(letters_kb)
        db = build_transaction_db(fcb)
        original = {
            frozenset(item_token(i, fcb.universe) for i in f.items): f.support_count
            for f in mine_fcis(db, MiningParams(sigma=0.5))
        }
        _, rows = read_transactions(write_transactions(fcb, kb_digest=letters_kb.digest))
        reloaded_db = TransactionDB.from_itemsets([tokens for _, _, tokens in rows])
        reloaded = {
            f.items: f.support_count
            for f in mine_fcis(reloaded_db, MiningParams(sigma=0.5))
        }
        assert reloaded == original

    def test_property_keys_with_spaces_survive(self, worked_kb):
        kb = parse_kb_text(
            """
[ontology]
Age-Over-30 := (age >= 30)
[cases]
c1 | Patient and (age >= 45) | D1
c2 | Patient and (age >= 30) | D2
"""
        )
        fcb = format_cases(kb)
        text = write_transactions(fcb, kb_digest=kb.digest)
        _, rows = read_transactions(text)
        expected = {
            frozenset(item_token(i, fcb.universe) for i in t.items)
            for t in build_transactions(fcb)
        }
        assert {tokens for _, _, tokens in rows} == expected
