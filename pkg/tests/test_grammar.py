import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from cfgenum import corpus, oracle
from cfgenum.errors import FormatError, UnitCycle
from cfgenum.grammar import (Rule, Terminal, build_unit_table, compute_nullable, is_2nf_rule,
                             make_grammar, parse_grammar, render_grammar, to_2nf, trim_useless)

seeds = st.integers(min_value=0, max_value=10**6)


def test_parse_g1_counts():
    g = parse_grammar("start: S\nS -> 'a'@x S | 'a' S | _")
    assert g.nonterminals == ("S",)
    assert len(g.rules) == 3
    assert g.annotations == {"x"}
    assert g.rules[2] == Rule("S", ())


def test_nonterminals_inferred_from_use():
    g = parse_grammar("start: S\nS -> 'a' T")
    assert "T" in g.nonterminals
    assert g.rules_of("T") == []


@pytest.mark.parametrize("text, line", [
    ("S -> 'ab'", 1),
    ("start: S\nstart: S\nS -> 'a'", 2),
    ("S -> 'a' |", 1),
    ("S => 'a'", 1),
    ("S -> 'a'@", 1),
    ("S -> 'a\n", 1),
])
def test_format_errors_carry_position(text, line):
    with pytest.raises(FormatError) as info:
        parse_grammar(text)
    assert info.value.line == line
    assert info.value.column is not None


def test_start_defaults_to_first_lhs_and_comments_are_skipped():
    g = parse_grammar("# header\nA -> 'x' # trailing\nB -> A\n")
    assert g.start == "A"
    assert len(g.rules) == 2


def test_escapes_round_trip():
    text = "start: S\nS -> '\\'' '\\\\' '\\n' '\\t' 'é'@x\n"
    g = parse_grammar(text)
    assert [t.letter for t in g.rules[0].rhs] == ["'", "\\", "\n", "\t", "é"]
    assert render_grammar(g) == text


def test_letters_and_nonterminals_must_be_disjoint():
    with pytest.raises(ValueError):
        make_grammar([Rule("a", (Terminal("a"),))], "a")


@pytest.mark.parametrize("text, expected", [
    ("S -> A B\nA -> _\nB -> 'b'", {"A"}),
    ("S -> A B\nA -> _\nB -> _", {"A", "B", "S"}),
    ("S -> 'a' S | _", {"S"}),
])
def test_compute_nullable(text, expected):
    assert compute_nullable(parse_grammar(text)) == expected


def test_trim_removes_unreachable_and_unproductive():
    g = trim_useless(parse_grammar("S -> 'a'\nX -> X"))
    assert g.rules == (Rule("S", (Terminal("a"),)),)
    assert trim_useless(parse_grammar("S -> A\nA -> A")).rules == ()
    g1 = corpus.g1()
    assert trim_useless(g1).rules == g1.rules


def test_to_2nf_chains_long_rules():
    g2 = to_2nf(parse_grammar("X -> 'a' B 'c'\nB -> 'b'"))
    assert g2.render() == ("start: X\n"
                           "X -> T%a%2 X%1\n"
                           "T%a%2 -> 'a'\n"
                           "X%1 -> B T%c%3\n"
                           "B -> 'b'\n"
                           "T%c%3 -> 'c'\n")


def test_g1_unit_table_has_no_cycle():
    g2 = to_2nf(corpus.g1())
    assert g2.nullable == {"S"}
    assert g2.unit_table["T%a%x%1"] == ("S",)
    assert g2.unit_table["T%a%2"] == ("S",)
    assert g2.unit_table["S"] == ()
    assert g2.topo_order.index("S") > g2.topo_order.index("T%a%x%1")


def test_unit_cycle_rejected():
    with pytest.raises(UnitCycle) as info:
        to_2nf(parse_grammar("X -> Y | 'a'\nY -> X | 'b'"))
    assert set(info.value.cycle) == {"X", "Y"}


def test_build_unit_table_examples():
    unit, topo, crule = build_unit_table(parse_grammar("S -> A B\nA -> _\nB -> 'b'"))
    assert unit["B"] == ("S",) and unit["A"] == ()
    assert crule["B"] == (Rule("S", ("A", "B")),)
    unit, topo, crule = build_unit_table(parse_grammar("X -> Y\nY -> 'a'"))
    assert unit["Y"] == ("X",)
    assert all(not v for v in crule.values())
    unit, topo, crule = build_unit_table(parse_grammar("X -> Y Z\nY -> 'a'\nZ -> 'b'"))
    assert all(not v for v in unit.values())
    assert crule["Z"] == (Rule("X", ("Y", "Z")),)


def test_normalize_is_byte_idempotent():
    for g in (corpus.g1(), corpus.g2(), corpus.g3(), corpus.split_grammar()):
        once = to_2nf(g).render()
        assert to_2nf(parse_grammar(once)).render() == once


@given(seeds)
def test_render_parse_round_trip(seed):
    g = corpus.random_grammar(random.Random(seed))
    if not g.rules:
        return
    text = render_grammar(g)
    again = parse_grammar(text)
    assert Counter(again.rules) == Counter(g.rules) and again.start == g.start
    assert render_grammar(again) == text


@given(seeds)
def test_trim_is_idempotent_and_complete(seed):
    g = make_grammar(corpus.random_grammar(random.Random(seed), max_rules=8).rules or
                     [Rule("S", ())], "N0" if seed % 2 else "S")
    once = trim_useless(g)
    assert trim_useless(once).rules == once.rules
    useful = oracle.useful_nonterminals(g)
    assert {r.lhs for r in once.rules} <= useful


@given(seeds)
def test_2nf_shapes_order_and_semantics(seed):
    g = corpus.random_grammar(random.Random(seed))
    try:
        g2 = to_2nf(g)
    except UnitCycle:
        assert oracle.find_unit_cycle(g)
        return
    assert all(is_2nf_rule(r) for r in g2.base.rules)
    order = {x: k for k, x in enumerate(g2.topo_order)}
    for z, xs in g2.unit_table.items():
        for x in xs:
            assert order[z] < order[x]
    for w in oracle._strings(g.alphabet, 4):
        assert oracle.brute_outputs(g, w) == oracle.brute_outputs(g2.base, w)


@given(seeds)
def test_2nf_preserves_derivation_counts(seed):
    g = corpus.random_grammar(random.Random(seed), max_nonterminals=4, max_rules=8)
    if oracle.find_unit_cycle(g):
        return
    base = to_2nf(g).base
    for w in oracle._strings(g.alphabet, 4):
        left = oracle.OutputOracle(g).output_counts(w)
        assert left == oracle.OutputOracle(base).output_counts(w)


@given(seeds)
def test_nullable_matches_brute_force(seed):
    g = corpus.random_grammar(random.Random(seed))
    nullable = compute_nullable(g)
    for x in g.nonterminals:
        from_x = make_grammar(g.rules, x, g.nonterminals, g.alphabet, g.annotations)
        assert (x in nullable) == bool(oracle.brute_outputs(from_x, ""))
