"""Pushdown annotators.

A PDAnn reads a string left to right with a stack. Read transitions consume
a letter, read-write transitions consume a letter and emit an annotation at
that position, and push/pop transitions change the stack without reading.
A run accepts when it ends in a final state, after the last letter, with an
empty stack. The profile of a run is the list of stack heights it visits.
"""

from __future__ import annotations

import functools
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from .errors import FormatError, NoRun, NotProfiledDeterministic, SizeLimit, StepBudget
from .grammar import (AnnotatedGrammar, Rule, Scanner, Terminal, is_nonterminal, make_grammar,
                      quote_letter, trim_useless)

READ, READW, PUSH, POP = "read", "readw", "push", "pop"


class Transition(NamedTuple):
    """One transition. ``stack`` is the pushed or popped symbol."""

    kind: str
    src: str
    dst: str
    letter: Optional[str] = None
    annotation: Optional[str] = None
    stack: Optional[str] = None

    def __str__(self):
        if self.kind == READ:
            return f"read: {self.src} {quote_letter(self.letter)} {self.dst}"
        if self.kind == READW:
            return f"readw: {self.src} {quote_letter(self.letter)} {self.annotation} {self.dst}"
        if self.kind == PUSH:
            return f"push: {self.src} {self.dst} {self.stack}"
        return f"pop: {self.src} {self.stack} {self.dst}"


def read(p, a, q):
    return Transition(READ, p, q, letter=a)


def readw(p, a, o, q):
    return Transition(READW, p, q, letter=a, annotation=o)


def push(p, q, g):
    return Transition(PUSH, p, q, stack=g)


def pop(p, g, q):
    return Transition(POP, p, q, stack=g)


@dataclass(frozen=True)
class PDAnn:
    states: Tuple[str, ...]
    stack_symbols: Tuple[str, ...]
    transitions: Tuple[Transition, ...]
    initial: str
    finals: FrozenSet[str]

    @property
    def alphabet(self) -> FrozenSet[str]:
        return frozenset(t.letter for t in self.transitions if t.letter is not None)

    @property
    def annotations(self) -> FrozenSet[str]:
        return frozenset(t.annotation for t in self.transitions if t.annotation is not None)

    def outgoing(self) -> Dict[str, List[Transition]]:
        out: Dict[str, List[Transition]] = defaultdict(list)
        for t in self.transitions:
            out[t.src].append(t)
        return out

    def strip(self) -> "PDAnn":
        """Drop annotations: read-write transitions become plain reads."""
        seen = []
        for t in self.transitions:
            if t.kind == READW:
                t = read(t.src, t.letter, t.dst)
            if t not in seen:
                seen.append(t)
        return PDAnn(self.states, self.stack_symbols, tuple(seen), self.initial, self.finals)


# ---------------------------------------------------------------------------
# Text format

def parse_pdann(text: str) -> PDAnn:
    states: List[str] = []
    stack: List[str] = []
    finals: List[str] = []
    initial = None
    transitions: List[Transition] = []
    where: Dict[str, int] = {}
    lines_of: List[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        sc = Scanner(line, lineno)
        if sc.at_end():
            continue
        key = sc.ident("directive")
        sc.expect(":")
        if key == "states":
            while not sc.at_end():
                states.append(sc.ident("state"))
        elif key == "stack":
            while not sc.at_end():
                stack.append(sc.ident("stack symbol"))
        elif key == "final":
            while not sc.at_end():
                finals.append(sc.ident("state"))
            where["final"] = lineno
        elif key == "initial":
            if initial is not None:
                raise sc.error("duplicate initial declaration")
            initial = sc.ident("state")
            where["initial"] = lineno
        elif key in (READ, READW):
            p = sc.ident("state")
            sc.skip_space()
            if sc.peek() != "'":
                raise sc.error("expected character literal")
            a = sc.letter()
            o = sc.ident("annotation") if key == READW else None
            q = sc.ident("state")
            transitions.append(Transition(key, p, q, letter=a, annotation=o))
        elif key == PUSH:
            p, q, g = sc.ident("state"), sc.ident("state"), sc.ident("stack symbol")
            transitions.append(push(p, q, g))
        elif key == POP:
            p, g, q = sc.ident("state"), sc.ident("stack symbol"), sc.ident("state")
            transitions.append(pop(p, g, q))
        else:
            raise FormatError(f"unknown directive {key!r}", lineno, 1)
        if not sc.at_end():
            raise sc.error("unexpected trailing text")
        if len(transitions) > len(lines_of):
            lines_of.append(lineno)
    if initial is None:
        raise FormatError("missing 'initial:' declaration")
    declared, declared_stack = set(states), set(stack)
    if initial not in declared:
        raise FormatError(f"undeclared state {initial!r}", where["initial"])
    for name in finals:
        if name not in declared:
            raise FormatError(f"undeclared state {name!r}", where["final"])
    for t, lineno in zip(transitions, lines_of):
        for name in (t.src, t.dst):
            if name not in declared:
                raise FormatError(f"undeclared state {name!r} in '{t}'", lineno)
        if t.stack is not None and t.stack not in declared_stack:
            raise FormatError(f"undeclared stack symbol {t.stack!r} in '{t}'", lineno)
        if t.letter is not None and t.letter in declared_stack:
            raise FormatError(f"letter {t.letter!r} is also a stack symbol", lineno)
    return PDAnn(tuple(states), tuple(stack), tuple(transitions), initial, frozenset(finals))


def render_pdann(p: PDAnn) -> str:
    lines = ["states: " + " ".join(p.states),
             f"initial: {p.initial}",
             "final: " + " ".join(s for s in p.states if s in p.finals),
             "stack: " + " ".join(p.stack_symbols)]
    lines.extend(str(t) for t in p.transitions)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Runs

class RunResult(NamedTuple):
    run: Tuple[Tuple[str, int, Tuple[str, ...]], ...]
    output: Tuple[Tuple[int, str], ...]
    profile: Tuple[int, ...]


def default_depth_cap(p: PDAnn, w: str) -> int:
    return 4 * (len(w) + 1) * max(1, len(p.states))


@functools.lru_cache(maxsize=64)
def pop_costs(p: PDAnn) -> Dict[Tuple[str, str], Tuple[Tuple[str, int], ...]]:
    """For (q, g): every state r reachable by popping g from q, with the fewest letters read.

    Used only to prune hopeless branches of the run search.
    """
    inf = float("inf")
    exact: Dict[Tuple[str, str, str], float] = defaultdict(lambda: inf)
    out = p.outgoing()
    changed = True
    while changed:
        changed = False
        for q in p.states:
            for t in out.get(q, ()):
                for g in p.stack_symbols:
                    if t.kind == POP:
                        if t.stack != g:
                            continue
                        cands = [(t.dst, 0)]
                    elif t.kind in (READ, READW):
                        cands = [(r, 1 + exact[(t.dst, g, r)]) for r in p.states]
                    else:
                        cands = [(r, exact[(t.dst, t.stack, m)] + exact[(m, g, r)])
                                 for m in p.states for r in p.states]
                    for r, cost in cands:
                        if cost < exact[(q, g, r)]:
                            exact[(q, g, r)] = cost
                            changed = True
    table: Dict[Tuple[str, str], List[Tuple[str, int]]] = defaultdict(list)
    for (q, g, r), cost in exact.items():
        if cost < inf:
            table[(q, g)].append((r, int(cost)))
    return {k: tuple(v) for k, v in table.items()}


def brute_runs(p: PDAnn, w: str, depth_cap: Optional[int] = None) -> List[RunResult]:
    """Every accepting run with at most ``depth_cap`` transitions.

    Branches whose stack cannot be emptied with the letters left are cut.
    """
    cap = default_depth_cap(p, w) if depth_cap is None else depth_cap
    out = p.outgoing()
    n = len(w)
    costs = pop_costs(p)

    def hopeless(state, i, stack):
        budget = n - i
        reach = {state: 0}
        for g in reversed(stack):
            nxt: Dict[str, int] = {}
            for q, spent in reach.items():
                for r, cost in costs.get((q, g), ()):
                    total = spent + cost
                    if total <= budget and total < nxt.get(r, budget + 1):
                        nxt[r] = total
            if not nxt:
                return True
            reach = nxt
        return False

    results: List[RunResult] = []
    start = (p.initial, 0, ())
    # Each frame: (config, run so far, output so far)
    todo = [(start, (start,), ())]
    while todo:
        config, run, output = todo.pop()
        state, i, stack = config
        if state in p.finals and i == n and not stack:
            results.append(RunResult(run, output, tuple(len(c[2]) for c in run)))
        if len(run) - 1 >= cap:
            continue
        for t in reversed(out.get(state, ())):
            if t.kind in (READ, READW):
                if i < n and w[i] == t.letter:
                    nxt = (t.dst, i + 1, stack)
                    emitted = output + ((i + 1, t.annotation),) if t.kind == READW else output
                else:
                    continue
            elif t.kind == PUSH:
                nxt = (t.dst, i, stack + (t.stack,))
                emitted = output
            elif stack and stack[-1] == t.stack:
                nxt = (t.dst, i, stack[:-1])
                emitted = output
            else:
                continue
            if not hopeless(*nxt):
                todo.append((nxt, run + (nxt,), emitted))
    return results


# ---------------------------------------------------------------------------
# Grammar -> PDAnn

def grammar_to_pdann(g: AnnotatedGrammar) -> PDAnn:
    """One state per rule position; the stack holds return positions."""
    rules = list(g.rules)
    by_lhs: Dict[str, List[int]] = defaultdict(list)
    for k, r in enumerate(rules):
        by_lhs[r.lhs].append(k)

    def at(k, i):
        return f"r{k}_{i}"

    initial, final, bottom = "q0", "qf", "bot"
    states = [initial, final]
    stack = [bottom]
    transitions: List[Transition] = []
    for k, r in enumerate(rules):
        states.extend(at(k, i) for i in range(len(r.rhs) + 1))
    for k in by_lhs.get(g.start, ()):
        transitions.append(push(initial, at(k, 0), bottom))
        transitions.append(pop(at(k, len(rules[k].rhs)), bottom, final))
    for k, r in enumerate(rules):
        for i, sym in enumerate(r.rhs):
            if is_nonterminal(sym):
                ret = f"g{k}_{i + 1}"
                stack.append(ret)
                for k2 in by_lhs.get(sym, ()):
                    transitions.append(push(at(k, i), at(k2, 0), ret))
                    transitions.append(pop(at(k2, len(rules[k2].rhs)), ret, at(k, i + 1)))
            elif sym.annotation is None:
                transitions.append(read(at(k, i), sym.letter, at(k, i + 1)))
            else:
                transitions.append(readw(at(k, i), sym.letter, sym.annotation, at(k, i + 1)))
    return PDAnn(tuple(states), tuple(stack), tuple(transitions), initial, frozenset([final]))


# ---------------------------------------------------------------------------
# PDAnn -> grammar

def _fresh(base: str, taken) -> str:
    name, k = base, 0
    while name in taken:
        k += 1
        name = f"{base}{k}"
    return name


def pdann_to_grammar(p: PDAnn) -> AnnotatedGrammar:
    """Triple construction: (p, g, q) derives what is read from p until g is popped into q."""
    bottom = _fresh("z0", set(p.stack_symbols))
    accept = _fresh("qacc", set(p.states))
    transitions = list(p.transitions) + [pop(f, bottom, accept) for f in p.states if f in p.finals]
    out: Dict[str, List[Transition]] = defaultdict(list)
    pop_targets: Dict[str, List[str]] = defaultdict(list)
    for t in transitions:
        out[t.src].append(t)
        if t.kind == POP and t.dst not in pop_targets[t.stack]:
            pop_targets[t.stack].append(t.dst)

    names: Dict[Tuple[str, str, str], str] = {}
    taken = {"S"}

    def name(triple):
        if triple not in names:
            names[triple] = _fresh("%".join(triple), taken)
            taken.add(names[triple])
            queue.append(triple)
        return names[triple]

    queue: deque = deque()
    start = "S"
    rules: List[Rule] = [Rule(start, (name((p.initial, bottom, accept)),))]
    while queue:
        triple = queue.popleft()
        src, g, dst = triple
        lhs = names[triple]
        for t in out.get(src, ()):
            if t.kind == POP:
                if t.stack == g and t.dst == dst:
                    rules.append(Rule(lhs, ()))
            elif t.kind == PUSH:
                if dst not in pop_targets[g]:
                    continue
                for mid in pop_targets[t.stack]:
                    rules.append(Rule(lhs, (name((t.dst, t.stack, mid)), name((mid, g, dst)))))
            else:
                term = Terminal(t.letter, t.annotation if t.kind == READW else None)
                rules.append(Rule(lhs, (term, name((t.dst, g, dst)))))
    g = make_grammar(rules, start, annotations=p.annotations)
    return trim_useless(g)


# ---------------------------------------------------------------------------
# Deterministic modulo profile

def det_modulo_profile(p: PDAnn, max_states: int = 20000) -> PDAnn:
    """Subset construction over pairs of states, materialising reachable states only.

    A subset state is a set of pairs (level start, current state); a stack
    symbol is a set of triples (level start, pushed symbol, state after push).
    """
    pushes: Dict[str, List[Transition]] = defaultdict(list)
    pops: Dict[Tuple[str, str], List[str]] = defaultdict(list)
    reads: Dict[str, List[Transition]] = defaultdict(list)
    for t in p.transitions:
        if t.kind == PUSH:
            pushes[t.src].append(t)
        elif t.kind == POP:
            pops[(t.src, t.stack)].append(t.dst)
        else:
            reads[t.src].append(t)

    start = frozenset([(p.initial, p.initial)])
    state_ids: Dict[FrozenSet, int] = {start: 0}
    state_list = [start]
    stack_ids: Dict[FrozenSet, int] = {}
    stack_list: List[FrozenSet] = []
    out: List[Transition] = []
    todo = deque([0])
    popped: set = set()

    def state_id(s):
        if s not in state_ids:
            if len(state_list) >= max_states:
                raise SizeLimit(f"more than {max_states} subset states")
            state_ids[s] = len(state_list)
            state_list.append(s)
            todo.append(state_ids[s])
        return state_ids[s]

    def stack_id(t):
        if t not in stack_ids:
            stack_ids[t] = len(stack_list)
            stack_list.append(t)
        return stack_ids[t]

    def sname(k):
        return f"s{k}"

    def gname(k):
        return f"t{k}"

    while todo:
        # Expand states first, then pair every state with every stack symbol.
        while todo:
            k = todo.popleft()
            s = state_list[k]
            moves: Dict[Tuple, set] = defaultdict(set)
            for (a, b) in s:
                for t in reads.get(b, ()):
                    moves[(t.kind, t.letter, t.annotation)].add((a, t.dst))
            for (kind, letter, ann), target in sorted(moves.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2] or "")):
                dst = state_id(frozenset(target))
                out.append(Transition(kind, sname(k), sname(dst), letter=letter, annotation=ann))
            symbol = frozenset((a, t.stack, t.dst) for (a, b) in s for t in pushes.get(b, ()))
            if symbol:
                target = frozenset((q, q) for (_, _, q) in symbol)
                out.append(push(sname(k), sname(state_id(target)), gname(stack_id(symbol))))
        for k in range(len(state_list)):
            for gk in range(len(stack_list)):
                if (k, gk) in popped:
                    continue
                popped.add((k, gk))
                s, sym = state_list[k], stack_list[gk]
                target = frozenset((a, q)
                                   for (a, g, b) in sym
                                   for (b2, c) in s if b2 == b
                                   for q in pops.get((c, g), ()))
                if target:
                    out.append(pop(sname(k), gname(gk), sname(state_id(target))))
    finals = frozenset(sname(k) for k, s in enumerate(state_list)
                       if any(a == p.initial and b in p.finals for (a, b) in s))
    return PDAnn(tuple(sname(k) for k in range(len(state_list))),
                 tuple(gname(k) for k in range(len(stack_list))),
                 tuple(out), sname(0), finals)


def check_modulo_profile(p: PDAnn) -> bool:
    """The four uniqueness conditions: one push per state, one pop per (state, symbol), one read per label."""
    seen = set()
    for t in p.transitions:
        if t.kind == PUSH:
            key = (t.kind, t.src)
        elif t.kind == POP:
            key = (t.kind, t.src, t.stack)
        else:
            key = (t.kind, t.src, t.letter, t.annotation)
        if key in seen:
            return False
        seen.add(key)
    return True


def disambiguate_rigid(g: AnnotatedGrammar, max_states: int = 20000) -> AnnotatedGrammar:
    return pdann_to_grammar(det_modulo_profile(grammar_to_pdann(g), max_states))


def check_deterministic(p: PDAnn) -> bool:
    """Every state only reads (one per letter), only pushes (at most one), or only pops (one per symbol)."""
    if any(t.kind == READW for t in p.transitions):
        raise ValueError("check_deterministic expects a PDAnn without read-write transitions")
    for state, ts in p.outgoing().items():
        kinds = {t.kind for t in ts}
        if len(kinds) > 1:
            return False
        kind = kinds.pop()
        if kind == PUSH:
            if len(ts) > 1:
                return False
        else:
            key = (lambda t: t.letter) if kind == READ else (lambda t: t.stack)
            if len({key(t) for t in ts}) != len({(key(t), t.dst) for t in ts}):
                return False
    return True


def reachable_states(p: PDAnn) -> PDAnn:
    """Keep states reachable in the transition graph, ignoring the stack."""
    out = p.outgoing()
    seen = {p.initial}
    todo = [p.initial]
    while todo:
        s = todo.pop()
        for t in out.get(s, ()):
            if t.dst not in seen:
                seen.add(t.dst)
                todo.append(t.dst)
    return PDAnn(tuple(s for s in p.states if s in seen), p.stack_symbols,
                 tuple(t for t in p.transitions if t.src in seen), p.initial,
                 frozenset(s for s in p.finals if s in seen))


class ProfileResult(NamedTuple):
    profile: Tuple[int, ...]
    steps: int
    budget: int


class ProfileMachine:
    """Deterministic pushdown automaton derived from a profiled-deterministic PDAnn."""

    def __init__(self, p: PDAnn, max_states: int = 20000, step_factor: int = 4):
        self.automaton = reachable_states(det_modulo_profile(p.strip(), max_states))
        if not check_deterministic(self.automaton):
            raise NotProfiledDeterministic(
                "the stripped subset automaton is not deterministic")
        self.step_factor = step_factor
        self.reads: Dict[Tuple[str, str], str] = {}
        self.pushes: Dict[str, Tuple[str, str]] = {}
        self.pops: Dict[Tuple[str, str], str] = {}
        for t in self.automaton.transitions:
            if t.kind == READ:
                self.reads[(t.src, t.letter)] = t.dst
            elif t.kind == PUSH:
                self.pushes[t.src] = (t.dst, t.stack)
            else:
                self.pops[(t.src, t.stack)] = t.dst

    def run(self, w: str) -> ProfileResult:
        a = self.automaton
        budget = self.step_factor * (len(w) + 1) * max(1, len(a.states))
        state, i, stack = a.initial, 0, []
        profile = [0]
        steps = 0
        n = len(w)
        while True:
            if state in a.finals and i == n and not stack:
                return ProfileResult(tuple(profile), steps, budget)
            if steps >= budget:
                raise StepBudget(f"no decision after {steps} steps (budget {budget})")
            if state in self.pushes:
                state, symbol = self.pushes[state]
                stack.append(symbol)
            elif stack and (state, stack[-1]) in self.pops:
                state = self.pops[(state, stack.pop())]
            elif i < n and (state, w[i]) in self.reads:
                state = self.reads[(state, w[i])]
                i += 1
            else:
                raise NoRun(f"no accepting run on {w!r}")
            steps += 1
            profile.append(len(stack))


def compute_profile(p: PDAnn, w: str) -> Tuple[int, ...]:
    return ProfileMachine(p).run(w).profile


def enumerate_pdann(p: PDAnn, w: str, limit: Optional[int] = None) -> Iterator:
    from .enumerator import evaluate

    return evaluate(pdann_to_grammar(p), w, limit)
