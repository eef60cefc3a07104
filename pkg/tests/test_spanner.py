import random

import pytest
from hypothesis import given, strategies as st

from cfgenum import corpus, oracle
from cfgenum.enumerator import evaluate
from cfgenum.errors import FormatError, InvalidRefWord, MalformedOutput
from cfgenum.grammar import Terminal
from cfgenum.spanner import (END_MARKER, VarOp, decode_output, encode_out, enumerate_mappings,
                             format_mapping, mapping_key, mapping_of_refword, op_set_name,
                             parse_extraction_grammar, parse_op_set, render_extraction_grammar,
                             translate)

seeds = st.integers(min_value=0, max_value=10**6)
OPEN_X, CLOSE_X, OPEN_Y, CLOSE_Y = VarOp("+", "x"), VarOp("-", "x"), VarOp("+", "y"), VarOp("-", "y")

TWO_SPANS = "vars: x y\nS -> +x 'a' 'a' -x +y 'b' 'b' -y 'b'\n"


def test_mapping_of_refword():
    r = [OPEN_X, "a", "a", CLOSE_X, OPEN_Y, "b", "b", CLOSE_Y, "b"]
    assert mapping_of_refword(r) == {"x": (1, 3), "y": (3, 5)}
    assert mapping_of_refword([OPEN_X, CLOSE_X, "a"]) == {"x": (1, 1)}
    with pytest.raises(InvalidRefWord):
        mapping_of_refword([CLOSE_X, "a", OPEN_X])
    with pytest.raises(InvalidRefWord):
        mapping_of_refword([OPEN_X, "a"], {"x"})
    with pytest.raises(InvalidRefWord):
        mapping_of_refword([OPEN_X, OPEN_X, CLOSE_X])


def test_encode_out_examples():
    assert encode_out({"x": (1, 3), "y": (3, 5)}, "aabbb") == (
        (1, "{+x}"), (3, "{-x,+y}"), (5, "{-y}"))
    assert encode_out({"x": (2, 2)}, "ab") == ((2, "{+x,-x}"),)
    assert encode_out({"x": (1, 3)}, "ab") == ((1, "{+x}"), (3, "{-x}"))
    with pytest.raises(ValueError):
        encode_out({"x": (1, 4)}, "ab")


def test_decode_output_examples():
    out = ((1, "{+x}"), (3, "{-x,+y}"), (5, "{-y}"))
    assert decode_output(out, {"x", "y"}) == {"x": (1, 3), "y": (3, 5)}
    with pytest.raises(MalformedOutput):
        decode_output(((1, "{+x}"),), {"x"})
    with pytest.raises(MalformedOutput):
        decode_output(((1, "{-x}"), (2, "{+x}")), {"x"})
    with pytest.raises(MalformedOutput):
        decode_output(((1, "{+z,-z}"),), {"x"})
    with pytest.raises(MalformedOutput):
        parse_op_set("+x")


def test_op_set_names_are_canonical():
    assert op_set_name([CLOSE_Y, OPEN_X, CLOSE_X]) == "{+x,-x,-y}"
    assert parse_op_set("{+x,-y}") == [OPEN_X, CLOSE_Y]
    assert parse_op_set("{}") == []


@given(seeds)
def test_encode_decode_round_trip(seed):
    rng = random.Random(seed)
    d = "a" * rng.randint(0, 6)
    m = {}
    for v in ("x", "y", "z")[:rng.randint(1, 3)]:
        i = rng.randint(1, len(d) + 1)
        m[v] = (i, rng.randint(i, len(d) + 1))
    assert decode_output(encode_out(m, d), m) == m


def test_parse_extraction_grammar():
    h = parse_extraction_grammar(TWO_SPANS)
    assert h.variables == {"x", "y"}
    assert h.grammar.rules[0].rhs[0] == OPEN_X
    assert parse_extraction_grammar(render_extraction_grammar(h)) == h
    with pytest.raises(FormatError):
        parse_extraction_grammar("vars: x\nS -> +z 'a' -z\n")
    with pytest.raises(FormatError):
        parse_extraction_grammar("vars: x\nS -> +x 'a'@o -x\n")


def test_translate_single_capture():
    h = parse_extraction_grammar("vars: x\nS -> +x 'a' -x\n")
    g = translate(h)
    assert END_MARKER in g.alphabet
    assert set(evaluate(g, "a" + END_MARKER)) == {((1, "{+x}"), (2, "{-x}"))}
    assert oracle.brute_outputs(g, "a" + END_MARKER) == {((1, "{+x}"), (2, "{-x}"))}
    assert not any(isinstance(s, VarOp) for r in g.rules for s in r.rhs)


def test_two_spans_document():
    h = parse_extraction_grammar(TWO_SPANS)
    assert list(enumerate_mappings(h, "aabbb")) == [{"x": (1, 3), "y": (3, 5)}]
    assert list(enumerate_mappings(h, "aabb")) == []


def test_exponential_examples():
    for k, n in ((2, 4), (3, 8)):
        h = corpus.exponential_extraction_grammar(k)
        got = [mapping_key(m) for m in enumerate_mappings(h, "a")]
        assert len(got) == n == len(set(got))
        assert set(got) == oracle.brute_mappings(h, "a").mappings


def test_empty_language_translates_to_empty():
    h = parse_extraction_grammar("vars: x\nS -> +x S -x\n")
    assert translate(h).rules == ()


def test_end_marker_must_be_fresh():
    h = parse_extraction_grammar("vars: x\nS -> +x '#' -x\n")
    with pytest.raises(FormatError):
        translate(h)
    g = translate(h, end_marker="$")
    assert set(evaluate(g, "#$")) == {((1, "{+x}"), (2, "{-x}"))}


def test_mapping_format():
    assert format_mapping({"y": (3, 5), "x": (1, 3)}) == '{"x": [1, 3], "y": [3, 5]}'


@given(seeds)
def test_random_functional_grammars_match_oracle(seed):
    h = corpus.random_extraction_grammar(random.Random(seed))
    if not oracle.check_refword_unambiguous_upto(h, 3).ok:
        return
    g = translate(h)
    for d in oracle._strings(h.alphabet, 3):
        got = [mapping_key(decode_output(o, h.variables)) for o in evaluate(g, d + END_MARKER)]
        assert len(got) == len(set(got))
        assert set(got) == oracle.brute_mappings(h, d).mappings


@given(seeds)
def test_translation_preserves_unambiguity(seed):
    h = corpus.random_extraction_grammar(random.Random(seed))
    if not oracle.check_refword_unambiguous_upto(h, 3).ok:
        return
    assert oracle.check_unambiguous_upto(translate(h), 4).ok


def language_upto(g, limit):
    """Every terminal sequence of length at most ``limit`` derivable from the start symbol."""
    lang = {x: set() for x in g.nonterminals}
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            words = {()}
            for sym in r.rhs:
                parts = lang[sym] if isinstance(sym, str) else {(sym,)}
                words = {u + v for u in words for v in parts if len(u) + len(v) <= limit}
            if not words <= lang[r.lhs]:
                lang[r.lhs] |= words
                changed = True
    return lang[g.start]


def move_operation(word, kappa):
    """Drop ``kappa`` and add it to the operations of the next letter."""
    out, carry = [], False
    for sym in word:
        if sym == kappa:
            carry = True
        elif isinstance(sym, Terminal):
            ops = tuple(sym.annotation or ())
            if carry:
                ops = tuple(sorted(ops + (kappa,), key=VarOp.sort_key))
                carry = False
            out.append(Terminal(sym.letter, ops))
        else:
            out.append(sym)
    return tuple(out)


def normalized(word):
    return tuple(Terminal(s.letter, tuple(s.annotation or ())) if isinstance(s, Terminal) else s
                 for s in word)


@pytest.mark.parametrize("text", [
    "vars: x\nS -> 'b' +x 'a' -x\n",
    "vars: x y\nS -> +x A -x +y B -y\nA -> 'a' A | _\nB -> 'b' | 'a' 'b'\n",
    TWO_SPANS,
], ids=["one-var", "two-vars-star", "two-spans"])
def test_each_pass_moves_one_operation_onto_the_next_letter(text):
    from cfgenum.grammar import Rule, make_grammar
    from cfgenum.spanner import _Names, _attach_pass, _restricted_binary

    h = parse_extraction_grammar(text)
    g = h.grammar
    names = _Names(g.nonterminals)
    top = names.fresh("S")
    g = make_grammar(g.rules + (Rule(top, (g.start, Terminal(END_MARKER))),), top)
    g = _restricted_binary(g, names)
    names.taken.update(g.nonterminals)
    for kappa in h.operations():
        after = _attach_pass(g, kappa, names)
        names.taken.update(after.nonterminals)
        assert not any(s == kappa for r in after.rules for s in r.rhs)
        before = {move_operation(normalized(w), kappa) for w in language_upto(g, 13)}
        moved = {normalized(w) for w in language_upto(after, 12)}
        assert moved == {w for w in before if len(w) <= 12}
        g = after
