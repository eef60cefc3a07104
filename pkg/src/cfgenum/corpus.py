"""Named example grammars and seeded random generators for tests and reports."""

from __future__ import annotations

import random
from typing import Iterator, List, Optional

from .grammar import AnnotatedGrammar, Rule, Terminal, make_grammar, parse_grammar, trim_useless
from .pdann import PDAnn, parse_pdann
from .spanner import ExtractionGrammar, VarOp, parse_extraction_grammar

# Every position independently annotated or not.
G1_TEXT = """\
start: S
S -> 'a'@x S | 'a' S | _
"""

# Balanced parentheses; an opening bracket may be marked.
G2_TEXT = """\
start: S
S -> '('@m S ')' S | '(' S ')' S | _
"""

# Unambiguous but not rigid: two different derivation skeletons for "ab".
G3_TEXT = """\
start: S
S -> A 'b' | 'a' B
A -> 'a'@x
B -> 'b'@y
"""

# Unambiguous, not rigid: the marked letter ends the first block, any split is allowed.
SPLIT_TEXT = """\
start: S
S -> Y Z
Y -> 'a' Y | 'a'@x
Z -> 'a' Z | 'a'
"""

DYCK_PDANN_TEXT = """\
states: q0 q1 q2
initial: q0
final: q0
stack: g
read: q0 '(' q1
push: q1 q0 g
read: q0 ')' q2
pop: q2 g q0
"""

DYCK_MARKED_PDANN_TEXT = """\
states: q0 q1 q2
initial: q0
final: q0
stack: g
read: q0 '(' q1
readw: q0 '(' m q1
push: q1 q0 g
read: q0 ')' q2
pop: q2 g q0
"""

# Any factor of a string over {a, b}.
SUBSTRING_XG_TEXT = """\
vars: x
S -> A +x A -x A
A -> 'a' A | 'b' A | _
"""

# Two adjacent blocks of a's followed by b's; the second span starts where the first ends.
ADJACENT_XG_TEXT = """\
vars: x y
S -> +x A -x +y B -y
A -> 'a' A | _
B -> 'b' B | _
"""


def g1() -> AnnotatedGrammar:
    return parse_grammar(G1_TEXT)


def g2() -> AnnotatedGrammar:
    return parse_grammar(G2_TEXT)


def g3() -> AnnotatedGrammar:
    return parse_grammar(G3_TEXT)


def split_grammar() -> AnnotatedGrammar:
    return parse_grammar(SPLIT_TEXT)


def dyck_pdann() -> PDAnn:
    return parse_pdann(DYCK_PDANN_TEXT)


def dyck_marked_pdann() -> PDAnn:
    return parse_pdann(DYCK_MARKED_PDANN_TEXT)


def substring_extraction_grammar() -> ExtractionGrammar:
    return parse_extraction_grammar(SUBSTRING_XG_TEXT)


def adjacent_extraction_grammar() -> ExtractionGrammar:
    return parse_extraction_grammar(ADJACENT_XG_TEXT)


def balanced_strings(max_len: int) -> List[str]:
    """All balanced parenthesis strings of length at most ``max_len``."""
    out = []

    def grow(prefix, depth):
        if depth == 0:
            out.append(prefix)
        if len(prefix) + depth + 2 <= max_len:
            grow(prefix + "(", depth + 1)
        if depth > 0:
            grow(prefix + ")", depth - 1)

    grow("", 0)
    return sorted(set(out), key=lambda s: (len(s), s))


def exponential_extraction_grammar(k: int, letter: str = "a") -> ExtractionGrammar:
    """Each variable independently captures the empty span or the whole letter."""
    lines = ["vars: " + " ".join(f"x{i}" for i in range(1, k + 1))]
    for i in range(1, k):
        lines.append(f"A{i} -> +x{i} -x{i} A{i + 1} | +x{i} A{i + 1} -x{i}")
    lines.append(f"A{k} -> +x{k} -x{k} '{letter}' | +x{k} '{letter}' -x{k}")
    return parse_extraction_grammar("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Random generators

def random_grammar(rng: random.Random, max_nonterminals: int = 6, max_rules: int = 12,
                   max_letters: int = 3, max_annotations: int = 2) -> AnnotatedGrammar:
    """A random annotated grammar, trimmed; its language may be empty."""
    nts = [f"N{i}" for i in range(rng.randint(1, max_nonterminals))]
    letters = "abc"[:rng.randint(1, max_letters)]
    anns = ["x", "y"][:rng.randint(0, max_annotations)]
    n_rules = rng.randint(len(nts), max(len(nts), max_rules))
    rules = []
    for k in range(n_rules):
        lhs = nts[k] if k < len(nts) else rng.choice(nts)
        length = rng.choices([0, 1, 2, 3], weights=[1, 4, 4, 2])[0]
        rhs = []
        for _ in range(length):
            if rng.random() < 0.45:
                rhs.append(rng.choice(nts))
            else:
                ann = rng.choice(anns) if anns and rng.random() < 0.4 else None
                rhs.append(Terminal(rng.choice(letters), ann))
        rules.append(Rule(lhs, tuple(rhs)))
    return trim_useless(make_grammar(rules, nts[0], nts, letters, anns))


def random_extraction_grammar(rng: random.Random, max_vars: int = 2) -> ExtractionGrammar:
    """A functional extraction grammar built by inserting captures into a random grammar.

    Each variable is opened and closed around a random consecutive block of
    a rule's right-hand side (or at one point), on a rule used exactly once in
    every derivation of the start symbol.
    """
    variables = [f"v{i}" for i in range(rng.randint(1, max_vars))]
    letters = "ab"[:rng.randint(1, 2)]
    # Start rule: a sequence of blocks, each block a nonterminal with its own sub-language.
    width = rng.randint(1, 3)
    body: List = []
    rules: List[Rule] = []
    for b in range(width):
        name = f"B{b}"
        body.append(name)
        kind = rng.choice(["letter", "star", "choice"])
        a = rng.choice(letters)
        if kind == "letter":
            rules.append(Rule(name, (Terminal(a),)))
        elif kind == "star":
            rules.append(Rule(name, (Terminal(a), name)))
            rules.append(Rule(name, ()))
        else:
            rules.append(Rule(name, (Terminal("a"),)))
            if len(letters) > 1:
                rules.append(Rule(name, (Terminal("b"), Terminal("b"))))
            else:
                rules.append(Rule(name, (Terminal("a"), Terminal("a"))))
    for v in variables:
        i = rng.randint(0, len(body))
        j = rng.randint(i, len(body))
        body.insert(j, VarOp("-", v))
        body.insert(i, VarOp("+", v))
    rules.insert(0, Rule("S", tuple(body)))
    g = make_grammar(rules, "S")
    return ExtractionGrammar(g, frozenset(variables))


def random_rigid_duplicated(rng: random.Random) -> Optional[AnnotatedGrammar]:
    """A rigid grammar with a repeated rule, so some annotated string has two derivations."""
    g = random_grammar(rng, max_nonterminals=3, max_rules=5, max_letters=2, max_annotations=1)
    if not g.rules:
        return None
    dup = rng.choice(g.rules)
    rules = list(g.rules)
    rules.insert(rules.index(dup) + 1, dup)
    return make_grammar(rules, g.start, g.nonterminals, g.alphabet, g.annotations)
