"""Extraction grammars and their translation to annotated grammars.

An extraction grammar derives ref-words: documents interleaved with
variable operations ``+x`` (open x) and ``-x`` (close x). A mapping sends
each variable to a span ``(i, j)`` meaning positions i..j-1 of the
document. Mappings are encoded as outputs by grouping, at every position,
the operations that occur right before that letter; an end marker letter is
appended so that operations at the very end have a position too.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from .errors import FormatError, InvalidRefWord, MalformedOutput, NotBinary
from .grammar import (IDENT, AnnotatedGrammar, Rule, Terminal, binarize, is_nonterminal,
                      make_grammar, parse_grammar_lines, render_grammar, trim_useless)

END_MARKER = "#"

Mapping = Dict[str, Tuple[int, int]]


@dataclass(frozen=True)
class VarOp:
    """Open (``+``) or close (``-``) of a variable."""

    kind: str
    var: str

    def __str__(self):
        return self.kind + self.var

    def sort_key(self):
        return (self.var, 0 if self.kind == "+" else 1)


def op_set_name(ops: Iterable[VarOp]) -> str:
    return "{" + ",".join(str(op) for op in sorted(ops, key=VarOp.sort_key)) + "}"


def parse_op_set(text: str) -> List[VarOp]:
    if not (text.startswith("{") and text.endswith("}")):
        raise MalformedOutput(f"not an operation set: {text!r}")
    body = text[1:-1]
    ops = []
    for part in body.split(",") if body else []:
        if len(part) < 2 or part[0] not in "+-" or not IDENT.fullmatch(part[1:]):
            raise MalformedOutput(f"bad operation {part!r} in {text!r}")
        ops.append(VarOp(part[0], part[1:]))
    return ops


@dataclass(frozen=True)
class ExtractionGrammar:
    grammar: AnnotatedGrammar
    variables: FrozenSet[str]

    @property
    def alphabet(self):
        return self.grammar.alphabet

    def operations(self) -> List[VarOp]:
        """All operations in processing order: by variable, open before close."""
        return sorted((VarOp(k, v) for v in self.variables for k in "+-"), key=VarOp.sort_key)


def parse_extraction_grammar(text: str) -> ExtractionGrammar:
    declared: List[str] = []

    def directive(name, sc):
        if name != "vars":
            return False
        while not sc.at_end():
            declared.append(sc.ident("variable name"))
        return True

    def extra(sc):
        ch = sc.peek()
        if ch in "+-" and IDENT.match(sc.text, sc.pos + 1):
            m = IDENT.match(sc.text, sc.pos + 1)
            sc.pos = m.end()
            return VarOp(ch, m.group())
        return None

    g = parse_grammar_lines(text, directive, extra)
    for r in g.rules:
        for s in r.rhs:
            if isinstance(s, Terminal) and s.annotation is not None:
                raise FormatError(f"annotated letters are not allowed in extraction grammars: {r}")
            if isinstance(s, VarOp) and s.var not in declared:
                raise FormatError(f"undeclared variable {s.var!r} in rule {r}")
    return ExtractionGrammar(g, frozenset(declared))


def render_extraction_grammar(h: ExtractionGrammar) -> str:
    return render_grammar(h.grammar, header=["vars: " + " ".join(sorted(h.variables))])


# ---------------------------------------------------------------------------
# Ref-words and encodings

def mapping_of_refword(refword: Sequence, variables: Optional[Iterable[str]] = None) -> Mapping:
    """Spans described by a ref-word given as a sequence of letters and VarOps."""
    opened: Dict[str, int] = {}
    closed: Dict[str, int] = {}
    pos = 1
    for sym in refword:
        if isinstance(sym, VarOp):
            if sym.kind == "+":
                if sym.var in opened:
                    raise InvalidRefWord(f"variable {sym.var} opened twice")
                opened[sym.var] = pos
            else:
                if sym.var not in opened:
                    raise InvalidRefWord(f"variable {sym.var} closed before it is opened")
                if sym.var in closed:
                    raise InvalidRefWord(f"variable {sym.var} closed twice")
                closed[sym.var] = pos
        else:
            pos += 1
    expected = set(opened) if variables is None else set(variables)
    if set(opened) != expected or set(closed) != expected:
        missing = sorted(expected - set(closed))
        raise InvalidRefWord(f"variables not opened and closed exactly once: {missing}")
    return {v: (opened[v], closed[v]) for v in sorted(expected)}


def encode_out(m: Mapping, d: str) -> Tuple[Tuple[int, str], ...]:
    groups: Dict[int, List[VarOp]] = {}
    for var, (i, j) in m.items():
        if not 1 <= i <= j <= len(d) + 1:
            raise ValueError(f"span {(i, j)} of {var} lies outside the document")
        groups.setdefault(i, []).append(VarOp("+", var))
        groups.setdefault(j, []).append(VarOp("-", var))
    return tuple((pos, op_set_name(groups[pos])) for pos in sorted(groups))


def decode_output(out: Sequence[Tuple[int, str]], variables: Iterable[str]) -> Mapping:
    variables = set(variables)
    opened: Dict[str, int] = {}
    closed: Dict[str, int] = {}
    for pos, ann in out:
        for op in parse_op_set(ann):
            if op.var not in variables:
                raise MalformedOutput(f"unknown variable {op.var}")
            seen = opened if op.kind == "+" else closed
            if op.var in seen:
                raise MalformedOutput(f"operation {op} appears twice")
            seen[op.var] = pos
    for v in variables:
        if v not in opened or v not in closed:
            raise MalformedOutput(f"variable {v} is not both opened and closed")
        if opened[v] > closed[v]:
            raise MalformedOutput(f"variable {v} closes before it opens")
    return {v: (opened[v], closed[v]) for v in sorted(variables)}


def mapping_key(m: Mapping) -> Tuple:
    return tuple(sorted(m.items()))


def format_mapping(m: Mapping) -> str:
    return json.dumps({v: list(span) for v, span in sorted(m.items())})


# ---------------------------------------------------------------------------
# Translation

_ROLES = ("o", "i", "l", "m", "r")  # out, in, left, mid, right


class _Names:
    def __init__(self, taken):
        self.taken = set(taken)
        self.counter = 0

    def fresh(self, prefix):
        while True:
            self.counter += 1
            name = f"{prefix}%{self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def _restricted_binary(g: AnnotatedGrammar, names: _Names) -> AnnotatedGrammar:
    """Binary form without unit rules: X -> Y becomes X -> E Y with E -> epsilon."""
    g = binarize(trim_useless(g))
    rules = []
    eps = None
    for r in g.rules:
        if len(r.rhs) == 1 and is_nonterminal(r.rhs[0]):
            if eps is None:
                eps = names.fresh("E")
            rules.append(Rule(r.lhs, (eps, r.rhs[0])))
        else:
            rules.append(r)
    if eps is not None:
        rules.append(Rule(eps, ()))
    return make_grammar(rules, g.start, g.nonterminals, g.alphabet)


def _attach_pass(g: AnnotatedGrammar, kappa: VarOp, names: _Names) -> AnnotatedGrammar:
    """Move ``kappa`` onto the first letter that follows it."""
    def role(x, tag):
        return f"{x}%{tag}"

    rules: List[Rule] = []
    for r in g.rules:
        a = r.lhs
        o, i, l, m, rt = (role(a, t) for t in _ROLES)
        rhs = r.rhs
        if len(rhs) == 2:
            if not all(is_nonterminal(s) for s in rhs):
                raise NotBinary(f"rule is not in binary form: {r}")
            b, c = rhs
            rules += [
                Rule(o, (role(b, "o"), role(c, "o"))),
                Rule(i, (role(b, "i"), role(c, "o"))),
                Rule(i, (role(b, "o"), role(c, "i"))),
                Rule(i, (role(b, "l"), role(c, "r"))),
                Rule(l, (role(b, "o"), role(c, "l"))),
                Rule(l, (role(b, "l"), role(c, "m"))),
                Rule(m, (role(b, "m"), role(c, "m"))),
                Rule(rt, (role(b, "r"), role(c, "o"))),
                Rule(rt, (role(b, "m"), role(c, "r"))),
            ]
        elif len(rhs) == 0:
            rules += [Rule(o, ()), Rule(m, ())]
        elif len(rhs) == 1 and isinstance(rhs[0], Terminal):
            t = rhs[0]
            ops = tuple(t.annotation or ())
            rules += [Rule(o, (t,)),
                      Rule(rt, (Terminal(t.letter, tuple(sorted(ops + (kappa,), key=VarOp.sort_key))),))]
        elif len(rhs) == 1 and isinstance(rhs[0], VarOp):
            if rhs[0] == kappa:
                rules.append(Rule(l, ()))
            else:
                rules += [Rule(o, rhs), Rule(m, rhs)]
        else:
            raise NotBinary(f"rule is not in restricted binary form: {r}")
    start = names.fresh(g.start)
    # The new start covers both the kappa-free and the kappa-carrying derivations.
    for r in list(rules):
        if r.lhs in (role(g.start, "o"), role(g.start, "i")):
            rules.append(Rule(start, r.rhs))
    return trim_useless(make_grammar(rules, start, (), g.alphabet))


def translate(h: ExtractionGrammar, end_marker: str = END_MARKER) -> AnnotatedGrammar:
    """Equivalent annotated grammar whose outputs on ``d + end_marker`` encode the mappings."""
    g = h.grammar
    if end_marker in g.alphabet:
        raise FormatError(f"end marker {end_marker!r} occurs in the grammar's alphabet")
    names = _Names(g.nonterminals)
    top = names.fresh("S")
    g = make_grammar(g.rules + (Rule(top, (g.start, Terminal(end_marker))),), top,
                     g.nonterminals, g.alphabet)
    g = _restricted_binary(g, names)
    names.taken.update(g.nonterminals)
    for kappa in h.operations():
        g = _attach_pass(g, kappa, names)
        names.taken.update(g.nonterminals)
    rules = []
    for r in g.rules:
        rhs = tuple(Terminal(s.letter, op_set_name(s.annotation))
                    if isinstance(s, Terminal) and s.annotation is not None else s
                    for s in r.rhs)
        if any(isinstance(s, VarOp) for s in rhs):
            raise NotBinary(f"operation left unprocessed in {r}")
        rules.append(Rule(r.lhs, rhs))
    return make_grammar(rules, g.start, g.nonterminals, g.alphabet)


def enumerate_mappings(h: ExtractionGrammar, d: str, translated: Optional[AnnotatedGrammar] = None,
                       limit: Optional[int] = None) -> Iterator[Mapping]:
    from .enumerator import evaluate

    g = translated if translated is not None else translate(h)
    for out in evaluate(g, d + END_MARKER, limit):
        yield decode_output(out, h.variables)
