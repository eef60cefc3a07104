"""Interval-table evaluation of annotated grammars.

``preprocess`` fills, for every span ``[i, j)`` of the input and every
nonterminal, an enumerable set holding the outputs of the derivations of
that substring. Cells are completed in order of increasing right end and,
for a fixed right end, decreasing left end. The ``end_in`` lists remember
which left ends actually produced something, which keeps rigid grammars at
quadratic cost.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Dict, Iterator, List, NamedTuple, Optional, Set, Tuple

from .ecs import NodeStore, SetHandle, enumerate_strings
from .errors import EmptyInput
from .grammar import AnnotatedGrammar, Grammar2NF, Terminal, to_2nf

Output = Tuple[Tuple[int, str], ...]


@dataclass
class OpCounters:
    base_inits: int = 0
    d_copies: int = 0
    product_combinations: int = 0
    endin_appends: int = 0
    nodes_created: int = 0


def counters_report(c: OpCounters) -> str:
    return json.dumps(asdict(c), sort_keys=True)


class Preprocessed(NamedTuple):
    handle: SetHandle
    counters: OpCounters
    store: NodeStore
    splits: Optional[Dict[Tuple[int, int, int, int], Set[int]]]


def preprocess(g2: Grammar2NF, w: str, record_splits: bool = False,
               checked: bool = False) -> Preprocessed:
    """Fill the interval table for ``w`` and return the set for the whole input.

    With ``record_splits`` the result also maps (i, j, rule index) keys to
    the set of split points that contributed a product; ``checked`` turns
    on the store's disjointness assertions (small inputs only).
    """
    n = len(w)
    if n == 0:
        raise EmptyInput("preprocess needs a non-empty string; use evaluate for the empty input")
    base = g2.base
    names = base.nonterminals
    index = {x: i for i, x in enumerate(names)}
    nt = len(names)
    store = NodeStore(checked=checked)
    counters = OpCounters()
    empty = store.make_empty()

    unit = [[index[x] for x in g2.unit_table.get(z, ())] for z in names]
    topo = [index[z] for z in g2.topo_order]
    rule_ids = {r: k for k, r in enumerate(base.rules)}
    crule = [[(index[r.lhs], index[r.rhs[0]], rule_ids[r]) for r in g2.crule.get(z, ())]
             for z in names]
    by_letter: Dict[str, List[Tuple[int, Optional[str]]]] = {}
    for r in base.rules:
        if len(r.rhs) == 1 and isinstance(r.rhs[0], Terminal):
            by_letter.setdefault(r.rhs[0].letter, []).append((index[r.lhs], r.rhs[0].annotation))

    # table[i][j] is a list of handles per nonterminal, or None when untouched.
    table: List[List[Optional[List[SetHandle]]]] = [[None] * (n + 2) for _ in range(n + 2)]
    end_in: List[List[List[int]]] = [[[] for _ in range(nt)] for _ in range(n + 2)]
    splits: Optional[Dict] = {} if record_splits else None

    def cell(i, j):
        row = table[i][j]
        if row is None:
            row = table[i][j] = [empty] * nt
        return row

    def nonempty(h):
        return h.node != 0 or h.has_eps

    for i in range(1, n + 1):
        hits = by_letter.get(w[i - 1])
        if not hits:
            continue
        row = cell(i, i + 1)
        for x, ann in hits:
            h = store.make_eps() if ann is None else store.make_singleton((i, ann))
            was = nonempty(row[x])
            row[x] = store.union(row[x], h)
            counters.base_inits += 1
            if not was:
                end_in[i + 1][x].append(i)
                counters.endin_appends += 1

    for j in range(2, n + 2):
        for k in range(j - 1, 0, -1):
            row = table[k][j]
            if row is None:
                continue
            for z in topo:
                h = row[z]
                if not nonempty(h):
                    continue
                for x in unit[z]:
                    was = nonempty(row[x])
                    row[x] = store.union(row[x], h)
                    counters.d_copies += 1
                    if not was:
                        end_in[j][x].append(k)
                        counters.endin_appends += 1
                for x, y, rid in crule[z]:
                    starts = end_in[k][y]
                    if not starts:
                        continue
                    for i in starts:
                        target = cell(i, j)
                        was = nonempty(target[x])
                        target[x] = store.union(target[x], store.product(table[i][k][y], h))
                        counters.product_combinations += 1
                        if splits is not None:
                            splits.setdefault((i, j, x, rid), set()).add(k)
                        if not was:
                            end_in[j][x].append(i)
                            counters.endin_appends += 1
    counters.nodes_created = store.node_count()
    top = table[1][n + 1]
    handle = top[index[base.start]] if top is not None else empty
    return Preprocessed(handle, counters, store, splits)


class Evaluation:
    """Outputs of a grammar on one string, plus the instrumentation gathered."""

    def __init__(self, g: AnnotatedGrammar, w: str, limit: Optional[int] = None,
                 g2: Optional[Grammar2NF] = None):
        self.g2 = g2 if g2 is not None else to_2nf(g)
        self.w = w
        self.limit = limit
        if w:
            self.result: Optional[Preprocessed] = preprocess(self.g2, w)
            self.counters = self.result.counters
            self.store = self.result.store
        else:
            self.result = None
            self.counters = OpCounters()
            self.store = NodeStore()
        self.enumeration = None

    def __iter__(self) -> Iterator[Output]:
        if self.result is None:
            if self.g2.start in self.g2.nullable and self.limit != 0:
                yield ()
            return
        self.enumeration = enumerate_strings(self.store, self.result.handle)
        for count, out in enumerate(self.enumeration):
            if self.limit is not None and count >= self.limit:
                return
            yield out


def evaluate(g: AnnotatedGrammar, w: str, limit: Optional[int] = None) -> Iterator[Output]:
    """Yield every output of ``g`` on ``w`` once (for unambiguous ``g``)."""
    return iter(Evaluation(g, w, limit))


def format_output(out: Output) -> str:
    return json.dumps([[pos, ann] for pos, ann in out], ensure_ascii=False)
