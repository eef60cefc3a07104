import json
import random
from dataclasses import asdict

import pytest
from hypothesis import given, strategies as st

from cfgenum import corpus, oracle
from cfgenum.enumerator import (Evaluation, OpCounters, counters_report, evaluate, format_output,
                                preprocess)
from cfgenum.errors import EmptyInput, UnitCycle
from cfgenum.grammar import parse_grammar, to_2nf

from conftest import unambiguous_corpus

seeds = st.integers(min_value=0, max_value=10**6)


def outs(g, w, limit=None):
    return list(evaluate(g, w, limit))


def test_g1_on_aa():
    got = outs(corpus.g1(), "aa")
    assert sorted(got) == sorted([(), ((1, "x"),), ((2, "x"),), ((1, "x"), (2, "x"))])
    assert set(got) == oracle.brute_outputs(corpus.g1(), "aa")


def test_g3_on_ab():
    assert sorted(outs(corpus.g3(), "ab")) == [((1, "x"),), ((2, "y"),)]


def test_unknown_letter_gives_nothing():
    assert outs(corpus.g3(), "z") == []
    assert outs(corpus.g1(), "aza") == []


def test_empty_input():
    assert outs(corpus.g1(), "") == [()]
    assert outs(corpus.g3(), "") == []
    assert outs(corpus.g1(), "", limit=0) == []
    with pytest.raises(EmptyInput):
        preprocess(to_2nf(corpus.g1()), "")


def test_g2_examples():
    assert sorted(outs(corpus.g2(), "()")) == [(), ((1, "m"),)]
    got = outs(corpus.g2(), "(())")
    assert len(got) == 4 and len(set(got)) == 4
    assert set(got) == oracle.brute_outputs(corpus.g2(), "(())")


def test_limit_bounds_enumeration_only():
    ev = Evaluation(corpus.g1(), "aaaa", limit=3)
    assert len(list(ev)) == 3
    assert ev.counters.product_combinations == Evaluation(corpus.g1(), "aaaa").counters.product_combinations


def test_unit_cycle_propagates():
    with pytest.raises(UnitCycle):
        outs(parse_grammar("X -> Y | 'a'\nY -> X | 'b'"), "a")


def test_output_format():
    assert format_output(()) == "[]"
    assert format_output(((1, "x"), (3, "{+v,-v}"))) == '[[1, "x"], [3, "{+v,-v}"]]'


def test_counters_golden_and_fresh():
    assert json.loads(counters_report(OpCounters())) == {
        "base_inits": 0, "d_copies": 0, "endin_appends": 0, "nodes_created": 0,
        "product_combinations": 0}
    c = Evaluation(corpus.g1(), "aa").counters
    assert asdict(c) == {"base_inits": 4, "d_copies": 4, "endin_appends": 7,
                         "nodes_created": 5, "product_combinations": 2}


def test_counters_monotone_on_prefixes():
    for g, unit in ((corpus.g1(), "a"), (corpus.g2(), "()"), (corpus.split_grammar(), "a")):
        prev = None
        for n in range(1, 7):
            c = asdict(Evaluation(g, unit * n).counters)
            if prev is not None:
                assert all(c[k] >= prev[k] for k in c)
            prev = c


def test_rigid_grammars_use_one_split_per_rule():
    for g, w in ((corpus.g1(), "a" * 20), (corpus.g2(), "()(())" * 3)):
        res = preprocess(to_2nf(g), w, record_splits=True)
        assert res.splits
        assert all(len(ks) == 1 for ks in res.splits.values())


def test_non_rigid_grammar_uses_many_splits():
    res = preprocess(to_2nf(corpus.split_grammar()), "a" * 6, record_splits=True)
    assert max(len(ks) for ks in res.splits.values()) > 1


@pytest.mark.parametrize("index", range(30))
def test_matches_oracle_on_random_corpus(index):
    g = unambiguous_corpus(30)[index]
    g2 = to_2nf(g)
    for w in oracle._strings(g.alphabet, 5):
        got = list(Evaluation(g, w, g2=g2))
        assert len(got) == len(set(got))
        assert set(got) == oracle.brute_outputs(g, w)


@given(seeds)
def test_unions_are_disjoint_on_unambiguous_grammars(seed):
    g = unambiguous_corpus(30)[seed % 30]
    g2 = to_2nf(g)
    rng = random.Random(seed)
    letters = sorted(g.alphabet)
    w = "".join(rng.choice(letters) for _ in range(rng.randint(1, 5)))
    preprocess(g2, w, checked=True)


@given(seeds)
def test_positions_stay_inside_their_span(seed):
    g = unambiguous_corpus(30)[seed % 30]
    rng = random.Random(seed)
    w = "".join(rng.choice(sorted(g.alphabet)) for _ in range(rng.randint(1, 6)))
    res = preprocess(to_2nf(g), w, record_splits=True)
    for (i, j, _, _), ks in res.splits.items():
        assert all(i < k < j for k in ks)
    for out in Evaluation(g, w):
        positions = [p for p, _ in out]
        assert positions == sorted(set(positions))
        assert all(1 <= p <= len(w) for p in positions)


def test_cubic_product_bound_on_corpus():
    for g in unambiguous_corpus(30):
        g2 = to_2nf(g)
        size = g2.base.size()
        for n in (4, 8):
            w = (sorted(g.alphabet)[0] * n)
            c = preprocess(g2, w).counters
            assert c.product_combinations <= n ** 3 * size
