"""Persistent enumerable sets of annotation strings.

A :class:`NodeStore` is an append-only arena of DAG nodes. Each set is a
:class:`SetHandle`: a node plus a flag saying whether the empty string is
also a member. Union and product run in constant time and never modify
existing nodes, so every handle stays valid forever.

Enumeration walks a tree of "current choices" over the DAG. Between two
outputs it does work proportional to the size of the next output, no
matter how large the DAG is.
"""

from __future__ import annotations

from typing import Iterator, List, NamedTuple, Optional, Tuple

BOTTOM, SINGLETON, PRODUCT, UNION2, UNION3 = range(5)
KIND_NAMES = ("BOTTOM", "SINGLETON", "PRODUCT", "UNION2", "UNION3")

EMPTY_NODE = 0
SENTINEL_NODE = 1

OutputLetter = Tuple[int, str]


class SetHandle(NamedTuple):
    node: int
    has_eps: bool


class DisjointnessError(AssertionError):
    """Raised in checked mode when a union or product precondition fails."""


class NodeStore:
    """Arena of DAG nodes.

    Node 0 is the empty node and node 1 is the end marker used by
    enumeration; neither is included in :meth:`node_count`.
    """

    def __init__(self, checked: bool = False):
        self.kind: List[int] = [BOTTOM, SINGLETON]
        self.first: List[int] = [0, 0]
        self.second: List[int] = [0, 0]
        self.third: List[int] = [0, 0]
        self.letter: List[Optional[OutputLetter]] = [None, None]
        self.checked = checked

    def node_count(self) -> int:
        return len(self.kind) - 2

    def _new(self, kind, a=0, b=0, c=0, letter=None) -> int:
        self.kind.append(kind)
        self.first.append(a)
        self.second.append(b)
        self.third.append(c)
        self.letter.append(letter)
        return len(self.kind) - 1

    # -- builders -----------------------------------------------------------

    def make_empty(self) -> SetHandle:
        return SetHandle(EMPTY_NODE, False)

    def make_eps(self) -> SetHandle:
        return SetHandle(EMPTY_NODE, True)

    def make_singleton(self, letter: OutputLetter) -> SetHandle:
        return SetHandle(self._new(SINGLETON, letter=letter), False)

    def _union_nodes(self, n1: int, n2: int) -> int:
        if n1 == EMPTY_NODE:
            return n2
        if n2 == EMPTY_NODE:
            return n1
        kind = self.kind
        if kind[n1] <= PRODUCT:
            return self._new(UNION2, n1, n2)
        if kind[n2] <= PRODUCT:
            return self._new(UNION2, n2, n1)
        inner = self._new(UNION3, self.first[n2], self.second[n1], self.second[n2])
        return self._new(UNION2, self.first[n1], inner)

    def _product_nodes(self, n1: int, n2: int) -> int:
        if n1 == EMPTY_NODE or n2 == EMPTY_NODE:
            return EMPTY_NODE
        return self._new(PRODUCT, n1, n2)

    def union(self, a: SetHandle, b: SetHandle) -> SetHandle:
        if self.checked:
            self._check_disjoint(a, b)
        return SetHandle(self._union_nodes(a.node, b.node), a.has_eps or b.has_eps)

    def product(self, a: SetHandle, b: SetHandle) -> SetHandle:
        if self.checked:
            self._check_letters(a, b)
        node = self._product_nodes(a.node, b.node)
        # (A+e)(B+f): AB, plus B when e is present, plus A when f is present.
        if a.has_eps:
            node = self._union_nodes(node, b.node)
        if b.has_eps:
            node = self._union_nodes(node, a.node)
        return SetHandle(node, a.has_eps and b.has_eps)

    def _check_disjoint(self, a, b):
        if a.has_eps and b.has_eps:
            raise DisjointnessError("both operands contain the empty string")
        common = set(self.expand(a.node)) & set(self.expand(b.node))
        if common:
            raise DisjointnessError(f"union operands overlap on {sorted(common)[0]}")

    def _check_letters(self, a, b):
        left = {x for s in self.expand(a.node) for x in s}
        right = {x for s in self.expand(b.node) for x in s}
        if left & right:
            raise DisjointnessError("product operands share output letters")

    # -- inspection ---------------------------------------------------------

    def expand(self, node: int) -> List[Tuple[OutputLetter, ...]]:
        """Naive recursive expansion of a node, used for checks and tests."""
        kind = self.kind[node]
        if kind == BOTTOM:
            return []
        if kind == SINGLETON:
            return [(self.letter[node],)]
        if kind == PRODUCT:
            return [u + v for u in self.expand(self.first[node])
                    for v in self.expand(self.second[node])]
        children = [self.first[node], self.second[node]]
        if kind == UNION3:
            children.append(self.third[node])
        return [s for c in children for s in self.expand(c)]

    def expand_handle(self, h: SetHandle) -> List[Tuple[OutputLetter, ...]]:
        return ([()] if h.has_eps else []) + self.expand(h.node)

    def children(self, node: int) -> Tuple[int, ...]:
        kind = self.kind[node]
        if kind == PRODUCT or kind == UNION2:
            return (self.first[node], self.second[node])
        if kind == UNION3:
            return (self.first[node], self.second[node], self.third[node])
        return ()

    def dump(self) -> str:
        lines = []
        for node in range(len(self.kind)):
            kind = self.kind[node]
            parts = [str(node), KIND_NAMES[kind]]
            if kind == SINGLETON:
                parts.append(repr(self.letter[node]) if node != SENTINEL_NODE else "$")
            parts.extend(str(c) for c in self.children(node))
            lines.append(" ".join(parts))
        return "\n".join(lines)

    def enumerate(self, h: SetHandle) -> "Enumeration":
        return Enumeration(self, h)


class ExitIterator:
    """Depth-first walk through union nodes, yielding singleton/product nodes."""

    __slots__ = ("store", "stack", "pops")

    def __init__(self, store: NodeStore, node: int):
        self.store = store
        self.stack = [node]
        self.pops = 0

    def has_next(self) -> bool:
        return bool(self.stack)

    def next(self) -> int:
        kind = self.store.kind
        stack = self.stack
        while True:
            node = stack.pop()
            self.pops += 1
            k = kind[node]
            if k <= PRODUCT:
                return node
            if k == UNION3:
                stack.append(self.store.third[node])
            stack.append(self.store.second[node])
            stack.append(self.store.first[node])


class _TreeNode:
    """Enumeration-tree node.

    A leaf has ``exit`` pointing to a singleton. A concatenation node covers a
    product (or the virtual root product) and keeps one exit iterator per
    factor together with the subtree for the exit currently chosen.
    """

    __slots__ = ("exit", "left_node", "right_node", "left", "right", "it_left", "it_right")

    def __init__(self, exit_node):
        self.exit = exit_node
        self.left = self.right = None
        self.it_left = self.it_right = None


class Enumeration:
    """Iterator over the strings of a handle; ``steps`` counts primitive work."""

    def __init__(self, store: NodeStore, h: SetHandle):
        self.store = store
        self.handle = h
        self.steps = 0
        self.pops = 0
        self.max_pops_per_exit = 0
        self._pending_eps = h.has_eps
        self._root: Optional[_TreeNode] = None
        self._done = h.node == EMPTY_NODE
        self._started = False

    def __iter__(self) -> Iterator[Tuple[OutputLetter, ...]]:
        return self

    # -- tree construction ----------------------------------------------------

    def _take(self, it: ExitIterator) -> int:
        before = it.pops
        node = it.next()
        used = it.pops - before
        self.pops += used
        self.steps += used
        if used > self.max_pops_per_exit:
            self.max_pops_per_exit = used
        return node

    def _concat(self, left_node: int, right_node: int) -> _TreeNode:
        t = _TreeNode(None)
        t.left_node = left_node
        t.right_node = right_node
        return t

    def _unfold(self, t: _TreeNode):
        """Fill in every missing subtree below ``t`` until all leaves are singletons."""
        store = self.store
        kind = store.kind
        todo = [t]
        while todo:
            t = todo.pop()
            self.steps += 1
            if t.exit is not None and kind[t.exit] == SINGLETON:
                continue
            if t.exit is not None:
                t.left_node = store.first[t.exit]
                t.right_node = store.second[t.exit]
            if t.it_left is None:
                t.it_left = ExitIterator(store, t.left_node)
                t.left = _TreeNode(self._take(t.it_left))
                todo.append(t.left)
            if t.it_right is None:
                t.it_right = ExitIterator(store, t.right_node)
                t.right = _TreeNode(self._take(t.it_right))
                todo.append(t.right)

    def _output(self) -> Tuple[OutputLetter, ...]:
        letter = self.store.letter
        out = []
        todo = [self._root]
        while todo:
            t = todo.pop()
            self.steps += 1
            if t.left is None:
                if t.exit != SENTINEL_NODE:
                    out.append(letter[t.exit])
            else:
                todo.append(t.right)
                todo.append(t.left)
        return tuple(out)

    def _advance(self) -> bool:
        """Move to the next combination; False once everything was produced."""
        result = False
        frames = [(self._root, 0)]
        while frames:
            t, stage = frames.pop()
            self.steps += 1
            if t.left is None:
                result = False
            elif stage == 0:
                frames.append((t, 1))
                frames.append((t.left, 0))
            elif stage == 1:
                if result:
                    continue
                if t.it_left.has_next():
                    t.left = _TreeNode(self._take(t.it_left))
                    self._unfold(t.left)
                    result = True
                else:
                    frames.append((t, 2))
                    frames.append((t.right, 0))
            else:
                if not result:
                    if not t.it_right.has_next():
                        continue
                    t.right = _TreeNode(self._take(t.it_right))
                    self._unfold(t.right)
                # The right factor moved on: restart the left factor.
                t.it_left = ExitIterator(self.store, t.left_node)
                t.left = _TreeNode(self._take(t.it_left))
                self._unfold(t.left)
                result = True
        return result

    def __next__(self) -> Tuple[OutputLetter, ...]:
        if self._pending_eps:
            self._pending_eps = False
            self.steps += 1
            return ()
        if self._done:
            raise StopIteration
        if not self._started:
            self._started = True
            self._root = self._concat(self.handle.node, SENTINEL_NODE)
            self._unfold(self._root)
        elif not self._advance():
            self._done = True
            self._root = None
            raise StopIteration
        return self._output()

    def live_memory(self) -> int:
        """Tree nodes plus pending iterator stack entries currently held."""
        if self._root is None:
            return 0
        total = 0
        todo = [self._root]
        while todo:
            t = todo.pop()
            total += 1
            for it in (t.it_left, t.it_right):
                if it is not None:
                    total += len(it.stack)
            if t.left is not None:
                todo.append(t.left)
                todo.append(t.right)
        return total


def enumerate_strings(store: NodeStore, h: SetHandle) -> Iterator[Tuple[OutputLetter, ...]]:
    return Enumeration(store, h)


def format_string(s) -> str:
    return "".join(f"({ann},{pos})" for pos, ann in s)
