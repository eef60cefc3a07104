"""Annotated context-free grammars.

Nonterminals are plain strings. Every other right-hand-side symbol is a
terminal; ordinary grammars use :class:`Terminal`, extraction grammars add
variable operations (see :mod:`cfgenum.spanner`).

This module holds the data model, the text format, trimming, and the
arity-two normal form consumed by the enumerator.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import FormatError, UnitCycle


@dataclass(frozen=True, order=True)
class Terminal:
    """A letter, optionally carrying an annotation."""

    letter: str
    annotation: Optional[str] = None

    def __str__(self):
        text = quote_letter(self.letter)
        if self.annotation is not None:
            text += "@" + self.annotation
        return text


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: Tuple = ()

    def __str__(self):
        body = " ".join(render_symbol(s) for s in self.rhs) if self.rhs else "_"
        return f"{self.lhs} -> {body}"


def is_nonterminal(symbol) -> bool:
    return isinstance(symbol, str)


@dataclass(frozen=True)
class AnnotatedGrammar:
    nonterminals: Tuple[str, ...]
    alphabet: FrozenSet[str]
    annotations: FrozenSet[str]
    rules: Tuple[Rule, ...]
    start: str

    def __post_init__(self):
        if self.start not in self.nonterminals:
            object.__setattr__(self, "nonterminals", (self.start,) + tuple(self.nonterminals))
        clash = set(self.nonterminals) & set(self.alphabet)
        if clash:
            raise ValueError(f"symbols used both as nonterminal and letter: {sorted(clash)}")

    def rules_of(self, lhs: str) -> List[Rule]:
        return [r for r in self.rules if r.lhs == lhs]

    def size(self) -> int:
        """Total number of symbol occurrences, counting each lhs once."""
        return sum(1 + len(r.rhs) for r in self.rules)

    def __str__(self):
        return render_grammar(self)


def make_grammar(rules: Iterable[Rule], start: str, nonterminals: Sequence[str] = (),
                 alphabet: Iterable[str] = (), annotations: Iterable[str] = ()) -> AnnotatedGrammar:
    """Build a grammar, inferring V, Sigma and Omega from the rules."""
    rules = tuple(rules)
    order = [start]
    seen = {start}
    letters = set(alphabet)
    anns = set(annotations)

    def note(name):
        if name not in seen:
            seen.add(name)
            order.append(name)

    for name in nonterminals:
        note(name)
    # rule heads first, so that rendering and reparsing keep the same order
    for rule in rules:
        note(rule.lhs)
    for rule in rules:
        for sym in rule.rhs:
            if is_nonterminal(sym):
                note(sym)
            elif isinstance(sym, Terminal):
                letters.add(sym.letter)
                if sym.annotation is not None:
                    anns.add(sym.annotation)
    return AnnotatedGrammar(tuple(order), frozenset(letters), frozenset(anns), rules, start)


def shape(symbols: Sequence) -> str:
    """Skeleton of a sentential form: 1 for a nonterminal, 0 for a terminal."""
    return "".join("1" if is_nonterminal(s) else "0" for s in symbols)


# ---------------------------------------------------------------------------
# Text format

IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_%]*")
OPSET = re.compile(r"\{[^\s{}]*\}")
_ESCAPES = {"'": "'", "\\": "\\", "n": "\n", "t": "\t"}
_REVERSE_ESCAPES = {"'": "\\'", "\\": "\\\\", "\n": "\\n", "\t": "\\t"}


def quote_letter(letter: str) -> str:
    return "'" + _REVERSE_ESCAPES.get(letter, letter) + "'"


def render_symbol(symbol) -> str:
    if is_nonterminal(symbol):
        return symbol
    return str(symbol)


class Scanner:
    """Character scanner over one line of a grammar-like file."""

    def __init__(self, text: str, lineno: int):
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def error(self, message, pos=None):
        return FormatError(message, self.lineno, (self.pos if pos is None else pos) + 1)

    def skip_space(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_space()
        return self.pos >= len(self.text) or self.text[self.pos] == "#"

    def peek(self) -> str:
        self.skip_space()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, literal: str):
        self.skip_space()
        if not self.text.startswith(literal, self.pos):
            raise self.error(f"expected {literal!r}")
        self.pos += len(literal)

    def ident(self, what="identifier") -> str:
        self.skip_space()
        m = IDENT.match(self.text, self.pos)
        if not m:
            raise self.error(f"expected {what}")
        self.pos = m.end()
        return m.group()

    def annotation(self) -> str:
        m = OPSET.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return m.group()
        m = IDENT.match(self.text, self.pos)
        if not m:
            raise self.error("expected annotation name")
        self.pos = m.end()
        return m.group()

    def letter(self) -> str:
        """Read a quoted single-character literal starting at the quote."""
        start = self.pos
        self.pos += 1
        chars = []
        while True:
            if self.pos >= len(self.text):
                raise self.error("unterminated character literal", start)
            ch = self.text[self.pos]
            if ch == "'":
                self.pos += 1
                break
            if ch == "\\":
                nxt = self.text[self.pos + 1:self.pos + 2]
                if nxt not in _ESCAPES:
                    raise self.error(f"unknown escape \\{nxt}")
                chars.append(_ESCAPES[nxt])
                self.pos += 2
            else:
                chars.append(ch)
                self.pos += 1
        if len(chars) != 1:
            raise self.error("terminal literal must be a single character", start)
        return chars[0]


def parse_alternatives(sc: Scanner, extra_symbol=None) -> List[Tuple]:
    """Parse ``alt ('|' alt)*`` up to end of line.

    ``extra_symbol`` lets a caller recognise additional symbol forms; it is
    handed the scanner positioned on a non-blank character and returns a
    symbol, or None to fall back to the base syntax.
    """
    alts = []
    current: List = []
    epsilon = False
    while True:
        if sc.at_end() or sc.peek() == "|":
            if not current and not epsilon:
                raise sc.error("empty alternative (use _ for epsilon)")
            alts.append(tuple(current))
            current, epsilon = [], False
            if sc.at_end():
                return alts
            sc.pos += 1
            continue
        ch = sc.peek()
        if epsilon:
            raise sc.error("_ must stand alone in an alternative")
        sym = extra_symbol(sc) if extra_symbol else None
        if sym is not None:
            current.append(sym)
        elif ch == "_" and not IDENT.match(sc.text, sc.pos):
            if current:
                raise sc.error("_ must stand alone in an alternative")
            sc.pos += 1
            epsilon = True
        elif ch == "'":
            letter = sc.letter()
            ann = None
            if sc.text[sc.pos:sc.pos + 1] == "@":
                sc.pos += 1
                ann = sc.annotation()
            current.append(Terminal(letter, ann))
        else:
            current.append(sc.ident("symbol"))


def parse_grammar(text: str) -> AnnotatedGrammar:
    """Parse the line-oriented grammar format."""
    return parse_grammar_lines(text)


def parse_grammar_lines(text: str, directive=None, extra_symbol=None):
    """Shared parser for grammar-like files.

    ``directive(name, scanner)`` handles ``name:`` lines other than ``start:``
    and returns True if it consumed the line.
    """
    start = None
    rules: List[Rule] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        sc = Scanner(line, lineno)
        if sc.at_end():
            continue
        name = sc.ident("rule or directive")
        if sc.peek() == ":":
            sc.pos += 1
            if name == "start":
                if start is not None:
                    raise sc.error("duplicate start declaration")
                start = sc.ident("start symbol")
            elif directive is None or not directive(name, sc):
                raise FormatError(f"unknown directive {name!r}", lineno, 1)
            if not sc.at_end():
                raise sc.error("unexpected trailing text")
            continue
        sc.expect("->")
        for alt in parse_alternatives(sc, extra_symbol):
            rules.append(Rule(name, alt))
    if start is None:
        if not rules:
            raise FormatError("grammar has neither a start declaration nor rules")
        start = rules[0].lhs
    try:
        return make_grammar(rules, start)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def render_grammar(g: AnnotatedGrammar, header: Sequence[str] = ()) -> str:
    lines = [f"start: {g.start}"]
    lines.extend(header)
    by_lhs: Dict[str, List[Rule]] = {}
    for rule in g.rules:
        by_lhs.setdefault(rule.lhs, []).append(rule)
    for name in g.nonterminals:
        if name in by_lhs:
            alts = [" ".join(render_symbol(s) for s in r.rhs) if r.rhs else "_"
                    for r in by_lhs[name]]
            lines.append(f"{name} -> " + " | ".join(alts))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Nullable, trimming

def compute_nullable(g: AnnotatedGrammar) -> FrozenSet[str]:
    nullable = set()
    changed = True
    while changed:
        changed = False
        for rule in g.rules:
            if rule.lhs not in nullable and all(
                    is_nonterminal(s) and s in nullable for s in rule.rhs):
                nullable.add(rule.lhs)
                changed = True
    return frozenset(nullable)


def productive_nonterminals(g: AnnotatedGrammar) -> set:
    productive = set()
    changed = True
    while changed:
        changed = False
        for rule in g.rules:
            if rule.lhs not in productive and all(
                    not is_nonterminal(s) or s in productive for s in rule.rhs):
                productive.add(rule.lhs)
                changed = True
    return productive


def trim_useless(g: AnnotatedGrammar) -> AnnotatedGrammar:
    """Drop nonterminals that derive no string or are unreachable from the start."""
    productive = productive_nonterminals(g)
    rules = [r for r in g.rules
             if r.lhs in productive and all(not is_nonterminal(s) or s in productive for s in r.rhs)]
    reachable = {g.start} if g.start in productive else set()
    stack = list(reachable)
    while stack:
        x = stack.pop()
        for r in rules:
            if r.lhs == x:
                for s in r.rhs:
                    if is_nonterminal(s) and s not in reachable:
                        reachable.add(s)
                        stack.append(s)
    rules = tuple(r for r in rules if r.lhs in reachable)
    names = tuple(x for x in g.nonterminals if x in reachable or x == g.start)
    return AnnotatedGrammar(names, g.alphabet, g.annotations, rules, g.start)


# ---------------------------------------------------------------------------
# Arity-two normal form

@dataclass(frozen=True)
class Grammar2NF:
    base: AnnotatedGrammar
    nullable: FrozenSet[str]
    unit_table: Dict[str, Tuple[str, ...]] = field(hash=False)
    topo_order: Tuple[str, ...]
    crule: Dict[str, Tuple[Rule, ...]] = field(hash=False)

    @property
    def start(self):
        return self.base.start

    def render(self) -> str:
        return render_grammar(self.base)


def _name_code(text: str) -> str:
    return "".join(c if c.isascii() and c.isalnum() else f"u{ord(c):x}" for c in text)


class _FreshNames:
    def __init__(self, taken):
        self.taken = set(taken)
        self.counter = 0

    def make(self, prefix: str) -> str:
        while True:
            self.counter += 1
            name = f"{prefix}%{self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def _bfs_order(start: str, rules: Sequence[Rule]) -> Tuple[str, ...]:
    """Breadth-first order from the start; re-parsing a render reproduces it."""
    by_lhs: Dict[str, List[Rule]] = {}
    for r in rules:
        by_lhs.setdefault(r.lhs, []).append(r)
    order = [start]
    seen = {start}
    i = 0
    while i < len(order):
        for r in by_lhs.get(order[i], ()):
            for s in r.rhs:
                if is_nonterminal(s) and s not in seen:
                    seen.add(s)
                    order.append(s)
        i += 1
    return tuple(order)


def binarize(g: AnnotatedGrammar) -> AnnotatedGrammar:
    """Chain long right-hand sides and lift terminals out of length-2 ones."""
    fresh = _FreshNames(g.nonterminals)
    chained: List[Rule] = []
    for rule in g.rules:
        rhs = rule.rhs
        if len(rhs) <= 2:
            chained.append(rule)
            continue
        names = [fresh.make(rule.lhs) for _ in range(len(rhs) - 2)]
        heads = [rule.lhs] + names
        for k, head in enumerate(heads[:-1]):
            chained.append(Rule(head, (rhs[k], heads[k + 1])))
        chained.append(Rule(heads[-1], (rhs[-2], rhs[-1])))
    lifted: Dict = {}
    extra: List[Rule] = []
    out: List[Rule] = []
    for rule in chained:
        if len(rule.rhs) != 2 or all(is_nonterminal(s) for s in rule.rhs):
            out.append(rule)
            continue
        rhs = []
        for s in rule.rhs:
            if not is_nonterminal(s):
                if s not in lifted:
                    prefix = "T%" + _name_code(getattr(s, "letter", str(s)))
                    ann = getattr(s, "annotation", None)
                    if ann is not None:
                        prefix += "%" + _name_code(ann)
                    lifted[s] = fresh.make(prefix)
                    extra.append(Rule(lifted[s], (s,)))
                s = lifted[s]
            rhs.append(s)
        out.append(Rule(rule.lhs, tuple(rhs)))
    rules = tuple(out + extra)
    return AnnotatedGrammar(_bfs_order(g.start, rules) if rules else (g.start,),
                            g.alphabet, g.annotations, rules, g.start)


def build_unit_table(g: AnnotatedGrammar, nullable=None):
    """Return (unit table D, topological order, CRule) for a binary grammar.

    D[Z] lists the X with X -> Z, or X -> Y Z / X -> Z Y where Y is nullable.
    CRule[Z] lists the binary rules X -> Y Z. Raises UnitCycle if D is cyclic.
    """
    if nullable is None:
        nullable = compute_nullable(g)
    index = {x: i for i, x in enumerate(g.nonterminals)}
    unit: Dict[str, List[str]] = {x: [] for x in g.nonterminals}
    crule: Dict[str, List[Rule]] = {x: [] for x in g.nonterminals}

    def add(z, x):
        if x not in unit[z]:
            unit[z].append(x)

    for rule in g.rules:
        rhs = rule.rhs
        if len(rhs) == 1 and is_nonterminal(rhs[0]):
            add(rhs[0], rule.lhs)
        elif len(rhs) == 2:
            y, z = rhs
            if y in nullable:
                add(z, rule.lhs)
            if z in nullable:
                add(y, rule.lhs)
            crule[z].append(rule)
        elif len(rhs) > 2:
            raise ValueError(f"rule is not binary: {rule}")
    for z in unit:
        unit[z].sort(key=index.__getitem__)
    indegree = {x: 0 for x in g.nonterminals}
    for z, xs in unit.items():
        for x in xs:
            indegree[x] += 1
    heap = [index[x] for x, d in indegree.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        z = g.nonterminals[heapq.heappop(heap)]
        order.append(z)
        for x in unit[z]:
            indegree[x] -= 1
            if indegree[x] == 0:
                heapq.heappush(heap, index[x])
    if len(order) != len(g.nonterminals):
        raise UnitCycle(_find_cycle(unit, {x for x, d in indegree.items() if d > 0}))
    return ({z: tuple(xs) for z, xs in unit.items()}, tuple(order),
            {z: tuple(rs) for z, rs in crule.items()})


def _find_cycle(unit, remaining):
    # Every remaining node lies on or downstream of a cycle; walk predecessors.
    preds = {x: [z for z in remaining if x in unit[z]] for x in remaining}
    node = min(remaining)
    path = []
    seen = {}
    while node not in seen:
        seen[node] = len(path)
        path.append(node)
        node = sorted(preds[node])[0]
    cycle = path[seen[node]:]
    cycle.reverse()
    return cycle + [cycle[0]]


def to_2nf(g: AnnotatedGrammar) -> Grammar2NF:
    """Trim, binarize and attach the nullable set and unit table."""
    base = binarize(trim_useless(g))
    nullable = compute_nullable(base)
    unit, topo, crule = build_unit_table(base, nullable)
    return Grammar2NF(base, nullable, unit, topo, crule)


def is_2nf_rule(rule: Rule) -> bool:
    rhs = rule.rhs
    if len(rhs) <= 1:
        return True
    return len(rhs) == 2 and all(is_nonterminal(s) for s in rhs)
