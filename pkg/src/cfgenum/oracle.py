"""Brute-force reference semantics.

Everything here works on the grammar exactly as written (no normal form)
and is meant for small inputs only. The core is a memoised table indexed by
substrings: for each substring ``u`` and nonterminal ``X`` it holds a map
from a "key" describing a derivation of ``u`` from ``X`` to the number of
such derivations. What the key records depends on the question asked:
outputs, nothing at all (plain counting), rule shapes, or placed variable
operations.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from .errors import ScaleLimit
from .grammar import AnnotatedGrammar, Terminal, is_nonterminal, shape
from .spanner import VarOp


class _InfiniteType:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Infinite"


INFINITE = _InfiniteType()
MAX_STRINGS = 200_000


class Verdict(NamedTuple):
    ok: bool
    witness: object
    bound: int


def useful_nonterminals(g: AnnotatedGrammar) -> set:
    productive = set()
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            if r.lhs not in productive and all(
                    not is_nonterminal(s) or s in productive for s in r.rhs):
                productive.add(r.lhs)
                changed = True
    if g.start not in productive:
        return set()
    reach = {g.start}
    todo = [g.start]
    while todo:
        x = todo.pop()
        for r in g.rules:
            if r.lhs == x and all(not is_nonterminal(s) or s in productive for s in r.rhs):
                for s in r.rhs:
                    if is_nonterminal(s) and s not in reach:
                        reach.add(s)
                        todo.append(s)
    return reach


def find_unit_cycle(g: AnnotatedGrammar) -> Optional[List[str]]:
    """A cycle X =>+ X through rules whose other symbols can vanish, or None."""
    useful = useful_nonterminals(g)
    nullable = set()
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            if r.lhs not in nullable and all(s in nullable for s in r.rhs):
                nullable.add(r.lhs)
                changed = True
    edges = defaultdict(set)
    for r in g.rules:
        if r.lhs not in useful or any(is_nonterminal(s) and s not in useful for s in r.rhs):
            continue
        for k, s in enumerate(r.rhs):
            if is_nonterminal(s) and all(t in nullable for t in r.rhs[:k] + r.rhs[k + 1:]):
                edges[r.lhs].add(s)
    colour = {}
    path: List[str] = []

    def visit(x):
        colour[x] = 1
        path.append(x)
        for y in sorted(edges[x]):
            if colour.get(y) == 1:
                return path[path.index(y):] + [y]
            if y not in colour:
                found = visit(y)
                if found:
                    return found
        colour[x] = 2
        path.pop()
        return None

    for x in sorted(useful):
        if x not in colour:
            found = visit(x)
            if found:
                return found
    return None


class SubstringTable:
    """Derivation maps for every (substring, nonterminal), computed on demand.

    ``match(symbol, token)`` returns the key contributed when a terminal
    consumes one token (None when it does not match); ``zero_width(symbol)``
    does the same for terminals that consume nothing. Positions inside keys
    are 1-based and relative to the substring, and ``shift`` relocates them.
    With ``counting`` off the maps only record which keys exist.
    """

    def __init__(self, g: AnnotatedGrammar,
                 match: Callable, zero_width: Callable = lambda s: None,
                 rule_key: Callable = lambda r: (), shift: Callable = None,
                 counting: bool = True, cap: Optional[int] = None):
        self.g = g
        self.names = list(g.nonterminals)
        self.by_lhs: Dict[str, list] = defaultdict(list)
        for r in g.rules:
            self.by_lhs[r.lhs].append(r)
        self.match = match
        self.zero_width = zero_width
        self.rule_key = rule_key
        self.shift = shift or _shift_positions
        self.counting = counting
        self.cap = cap
        self.memo: Dict = {}

    def _add(self, acc, key, count):
        if self.cap is not None and len(key) > self.cap:
            return
        if self.counting:
            acc[key] = acc.get(key, 0) + count
        else:
            acc[key] = 1

    def values(self, u) -> Dict[str, Dict]:
        found = self.memo.get(u)
        if found is not None:
            return found
        current = {x: {} for x in self.names}
        self.memo[u] = current
        rounds = 0
        while True:
            new = {x: {} for x in self.names}
            for x in self.names:
                acc = new[x]
                for r in self.by_lhs[x]:
                    prefix = self.rule_key(r)
                    for key, count in self._sequence(r.rhs, u).items():
                        self._add(acc, prefix + key, count)
            if new == current:
                return current
            current = new
            self.memo[u] = current
            rounds += 1
            if self.counting and rounds > len(self.names) + 2:
                raise RuntimeError("derivation counts diverge (unit cycle)")

    def _sequence(self, rhs, u) -> Dict:
        n = len(u)
        states: Dict[int, Dict] = {0: {(): 1}}
        for sym in rhs:
            nxt: Dict[int, Dict] = defaultdict(dict)
            for p, vals in states.items():
                if is_nonterminal(sym):
                    for q in range(p, n + 1):
                        part = self.values(u[p:q])[sym]
                        if part:
                            self._combine(nxt[q], vals, part, p)
                else:
                    key = self.zero_width(sym)
                    if key is not None:
                        self._combine(nxt[p], vals, {key: 1}, p)
                    if p < n:
                        key = self.match(sym, u[p])
                        if key is not None:
                            self._combine(nxt[p + 1], vals, {key: 1}, p)
            states = nxt
            if not states:
                return {}
        return states.get(n, {})

    def _combine(self, acc, left, right, offset):
        for k2, c2 in right.items():
            k2 = self.shift(k2, offset) if offset else k2
            for k1, c1 in left.items():
                self._add(acc, k1 + k2, c1 * c2)


def _shift_positions(key, offset):
    return tuple((pos + offset, x) for pos, x in key)


def _no_shift(key, offset):
    return key


def _output_match(sym, letter):
    if isinstance(sym, Terminal) and sym.letter == letter:
        return () if sym.annotation is None else ((1, sym.annotation),)
    return None


def _strings(alphabet: Iterable[str], max_len: int):
    letters = sorted(alphabet)
    total = sum(len(letters) ** k for k in range(max_len + 1))
    if total > MAX_STRINGS:
        raise ScaleLimit(f"{total} strings up to length {max_len} exceed the oracle cap")
    for k in range(max_len + 1):
        for t in itertools.product(letters, repeat=k):
            yield "".join(t)


class OutputOracle:
    """Output sets and per-output derivation counts for one grammar, shared over strings."""

    def __init__(self, g: AnnotatedGrammar):
        self.g = g
        self.cycle = find_unit_cycle(g)
        self.sets = SubstringTable(g, _output_match, counting=False)
        self.counts = None if self.cycle else SubstringTable(g, _output_match)

    def outputs(self, w: str) -> set:
        return set(self.sets.values(w)[self.g.start])

    def output_counts(self, w: str):
        """Map each output on ``w`` to its derivation count (INFINITE on unit cycles)."""
        if self.counts is None:
            return {o: INFINITE for o in self.outputs(w)}
        return dict(self.counts.values(w)[self.g.start])


def brute_outputs(g: AnnotatedGrammar, w: str, max_len: int = 12) -> set:
    """Set of outputs of ``g`` on ``w``."""
    if len(w) > max_len:
        raise ScaleLimit(f"string of length {len(w)} exceeds oracle bound {max_len}")
    return OutputOracle(g).outputs(w)


def annotated_string(w: str, output) -> Tuple[Terminal, ...]:
    anns = dict(output)
    return tuple(Terminal(c, anns.get(i)) for i, c in enumerate(w, 1))


def brute_outputs_by_definition(g: AnnotatedGrammar, w: str) -> set:
    """Same as :func:`brute_outputs`, by trying every annotated string."""
    choices = [None] + sorted(g.annotations)
    if len(choices) ** len(w) > MAX_STRINGS:
        raise ScaleLimit("too many annotated strings")
    result = set()
    table = SubstringTable(g, lambda s, t: () if s == t else None, counting=False)
    for combo in itertools.product(choices, repeat=len(w)):
        target = tuple(Terminal(c, a) for c, a in zip(w, combo))
        if table.values(target)[g.start]:
            result.add(tuple((i, a) for i, a in enumerate(combo, 1) if a is not None))
    return result


def count_derivations(g: AnnotatedGrammar, target: Sequence) -> object:
    """Number of leftmost derivations of a terminal sequence, or INFINITE.

    ``target`` may be a plain string (unannotated letters), or a sequence
    of terminal symbols such as :class:`Terminal` or variable operations.
    INFINITE is returned whenever the grammar has a useful unit cycle.
    """
    if isinstance(target, str):
        target = tuple(Terminal(c) for c in target)
    if find_unit_cycle(g):
        return INFINITE
    table = SubstringTable(g, lambda s, t: () if s == t else None)
    return table.values(tuple(target))[g.start].get((), 0)


def check_unambiguous_upto(g: AnnotatedGrammar, max_len: int) -> Verdict:
    """Every annotated string of length at most ``max_len`` has at most one derivation."""
    strings = list(_strings(g.alphabet, max_len))
    cycle = find_unit_cycle(g)
    if cycle:
        return Verdict(False, {"unit_cycle": cycle}, max_len)
    oracle = OutputOracle(g)
    for w in strings:
        for out, count in oracle.output_counts(w).items():
            if count > 1:
                return Verdict(False, annotated_string(w, out), max_len)
    return Verdict(True, None, max_len)


def shape_sequence(rule_shapes: Sequence[str]) -> List[str]:
    """Sentential-form skeletons of a leftmost derivation from its rule shapes."""
    form = "1"
    seq = [form]
    for s in rule_shapes:
        k = form.index("1")
        form = form[:k] + s + form[k + 1:]
        seq.append(form)
    return seq


def check_rigid_upto(g: AnnotatedGrammar, max_len: int) -> Verdict:
    """For every string up to ``max_len``, all derivations share one shape sequence."""
    strings = list(_strings(g.alphabet, max_len))
    cycle = find_unit_cycle(g)
    if cycle:
        return Verdict(False, {"unit_cycle": cycle}, max_len)

    def match(sym, letter):
        return () if isinstance(sym, Terminal) and sym.letter == letter else None

    table = SubstringTable(g, match, rule_key=lambda r: (shape(r.rhs),),
                           shift=_no_shift, counting=False)
    for w in strings:
        seqs = sorted(table.values(w)[g.start])
        if len(seqs) > 1:
            return Verdict(False, {"string": w,
                                   "shapes": [shape_sequence(seqs[0]), shape_sequence(seqs[1])]},
                           max_len)
    return Verdict(True, None, max_len)


# ---------------------------------------------------------------------------
# Extraction grammars

class MappingVerdict(NamedTuple):
    mappings: set
    functional: bool
    witness: object
    bound: int


def _op_match(sym, letter):
    return () if isinstance(sym, Terminal) and sym.letter == letter else None


def _op_zero(sym):
    return ((1, sym),) if isinstance(sym, VarOp) else None


def _span_of(placed, variables):
    """Spans of a ref-word given as (position, op) pairs in order, or None if invalid."""
    opened, closed = {}, {}
    for pos, op in placed:
        if op.var not in variables:
            return None
        if op.kind == "+":
            if op.var in opened:
                return None
            opened[op.var] = pos
        else:
            if op.var not in opened or op.var in closed:
                return None
            closed[op.var] = pos
    if set(closed) != set(variables):
        return None
    return tuple(sorted((v, (opened[v], closed[v])) for v in variables))


def brute_mappings(h, d: str, max_len: int = 6) -> MappingVerdict:
    """Mappings of an extraction grammar on ``d``, plus a bounded functionality check.

    A mapping is returned as a sorted tuple of (variable, (start, end)).
    Functionality is checked on every document of length at most ``len(d)``
    for ref-words with at most ``len(d) + 2 * |variables|`` symbols.
    """
    if len(d) > max_len:
        raise ScaleLimit(f"document of length {len(d)} exceeds oracle bound {max_len}")
    g = h.grammar
    variables = tuple(sorted(h.variables))
    k2 = 2 * len(variables)
    mappings = set()
    table = SubstringTable(g, _op_match, _op_zero, counting=False, cap=k2)
    for placed in table.values(d)[g.start]:
        spans = _span_of(placed, variables)
        if spans is not None:
            mappings.add(spans)
    check = check_functional_upto(h, len(d))
    return MappingVerdict(mappings, check.ok, check.witness, check.bound)


def check_functional_upto(h, max_len: int) -> Verdict:
    """No derivable ref-word over a document of length at most ``max_len`` is invalid.

    Ref-words are searched up to ``max_len + 2 * |variables|`` symbols, which
    includes partial and repeated operation placements.
    """
    variables = tuple(sorted(h.variables))
    budget = max_len + 2 * len(variables)
    for doc in _strings(h.alphabet, max_len):
        table = SubstringTable(h.grammar, _op_match, _op_zero, counting=False,
                               cap=budget - len(doc))
        for placed in table.values(doc)[h.grammar.start]:
            if _span_of(placed, variables) is None:
                return Verdict(False, {"document": doc, "refword": _refword_text(doc, placed)},
                               budget)
    return Verdict(True, None, budget)


def _refword_text(doc, placed):
    parts = []
    ops = defaultdict(list)
    for pos, op in placed:
        ops[pos].append(str(op))
    for i in range(1, len(doc) + 2):
        parts.extend(ops.get(i, []))
        if i <= len(doc):
            parts.append(doc[i - 1])
    return " ".join(parts)


def check_refword_unambiguous_upto(h, max_len: int) -> Verdict:
    """Every derivable ref-word over documents of length at most ``max_len`` has one derivation.

    Ref-words are limited to ``2 * |variables|`` operations.
    """
    g = h.grammar
    cycle = find_unit_cycle(g)
    if cycle:
        return Verdict(False, {"unit_cycle": cycle}, max_len)
    cap = 2 * len(h.variables)
    table = SubstringTable(g, _op_match, _op_zero, counting=True, cap=cap)
    for doc in _strings(h.alphabet, max_len):
        for placed, count in table.values(doc)[g.start].items():
            if count > 1:
                return Verdict(False, {"document": doc, "refword": _refword_text(doc, placed)},
                               max_len)
    return Verdict(True, None, max_len)
