"""Graph algorithms for infinite runs.

Graphs are given either lazily (:class:`BuchiGraph`, a successor function)
or explicitly (:class:`ExplicitGraph`, integer node ids).  Acceptance is
generalized Büchi: a family of node predicates, each of which must hold
infinitely often.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

from .errors import ResourceError


@dataclass
class BuchiGraph:
    initial: Sequence
    successors: Callable[[Hashable], Iterable]
    accepting: Sequence[Callable[[Hashable], bool]] = ()


@dataclass(frozen=True)
class RunLasso:
    """A stem from an initial node followed by a cycle.

    ``stem_nodes[-1] == loop_nodes[0] == loop_nodes[-1]``; labels sit between
    consecutive nodes.
    """

    stem_nodes: tuple
    stem_labels: tuple
    loop_nodes: tuple
    loop_labels: tuple

    @property
    def junction(self):
        return self.loop_nodes[0]

    def validate(self, g: BuchiGraph) -> bool:
        """Replay the lasso against ``g`` and check acceptance on the loop."""
        if self.stem_nodes[0] not in list(g.initial):
            return False
        if self.stem_nodes[-1] != self.loop_nodes[0] or self.loop_nodes[0] != self.loop_nodes[-1]:
            return False
        if not self.loop_labels:
            return False
        for nodes, labels in ((self.stem_nodes, self.stem_labels), (self.loop_nodes, self.loop_labels)):
            for a, lab, b in zip(nodes, labels, nodes[1:]):
                if (lab, b) not in list(g.successors(a)):
                    return False
        return all(any(acc(n) for n in self.loop_nodes) for acc in g.accepting)


class ExplicitGraph:
    """Materialized graph with integer ids."""

    def __init__(self):
        self.nodes: list = []
        self.index: dict = {}
        self.edges: list = []
        self.initial: list = []

    def add(self, node) -> int:
        i = self.index.get(node)
        if i is None:
            i = len(self.nodes)
            self.index[node] = i
            self.nodes.append(node)
            self.edges.append([])
        return i

    def __len__(self):
        return len(self.nodes)

    def successors_of(self, i: int):
        return self.edges[i]

    def as_buchi(self, accepting: Sequence[Callable] = (), initial: Iterable[int] | None = None) -> BuchiGraph:
        """View over node ids; predicates receive node objects."""
        nodes = self.nodes
        return BuchiGraph(
            initial=list(self.initial if initial is None else initial),
            successors=lambda i: self.edges[i],
            accepting=[(lambda i, acc=acc: acc(nodes[i])) for acc in accepting],
        )

    def reverse(self) -> list:
        rev: list = [[] for _ in self.nodes]
        for i, out in enumerate(self.edges):
            for _, j in out:
                rev[j].append(i)
        return rev


def explore(g: BuchiGraph, cap: int | None = None) -> ExplicitGraph:
    """Materialize everything reachable from the initial nodes."""
    out = ExplicitGraph()
    queue = deque()
    for n in g.initial:
        if n not in out.index:
            queue.append(n)
        out.initial.append(out.add(n))
    while queue:
        n = queue.popleft()
        i = out.index[n]
        for lab, m in g.successors(n):
            j = out.index.get(m)
            if j is None:
                j = out.add(m)
                if cap is not None and len(out.nodes) > cap:
                    raise ResourceError(f"state budget of {cap} exceeded")
                queue.append(m)
            out.edges[i].append((lab, j))
    return out


# --------------------------------------------------------------------------
# Emptiness


def buchi_nonempty(g: BuchiGraph) -> RunLasso | None:
    """Accepting lasso of ``g`` or ``None``.

    The acceptance family is degeneralized with a counter that waits for
    each set in turn; a nested depth-first search then looks for a
    reachable accepting node lying on a cycle.
    """
    acc = list(g.accepting)
    k = len(acc)
    if k == 0:
        acc = [lambda n: True]
        k = 1

    def succ(dn):
        n, i = dn
        j = (i + 1) % k if acc[i](n) else i
        return [(lab, (m, j)) for lab, m in g.successors(n)]

    def is_accepting(dn):
        return dn[1] == 0 and acc[0](dn[0])

    visited = set()
    flagged = set()  # nodes already explored by some inner search
    for root in g.initial:
        droot = (root, 0)
        if droot in visited:
            continue
        visited.add(droot)
        path = [droot]
        labels: list = []
        stack = [iter(succ(droot))]
        while stack:
            try:
                lab, m = next(stack[-1])
            except StopIteration:
                stack.pop()
                node = path.pop()
                if is_accepting(node):
                    loop = _inner_search(node, succ, flagged)
                    if loop is not None:
                        stem_nodes = tuple(p[0] for p in path) + (node[0],)
                        loop_nodes, loop_labels = loop
                        return RunLasso(
                            stem_nodes,
                            tuple(labels),
                            tuple(p[0] for p in loop_nodes),
                            tuple(loop_labels),
                        )
                if labels:
                    labels.pop()
                continue
            if m not in visited:
                visited.add(m)
                path.append(m)
                labels.append(lab)
                stack.append(iter(succ(m)))
    return None


def _inner_search(seed, succ, flagged):
    path = [seed]
    labels: list = []
    stack = [iter(succ(seed))]
    while stack:
        try:
            lab, m = next(stack[-1])
        except StopIteration:
            stack.pop()
            path.pop()
            if labels:
                labels.pop()
            continue
        if m == seed:
            return path + [seed], labels + [lab]
        if m not in flagged:
            flagged.add(m)
            path.append(m)
            labels.append(lab)
            stack.append(iter(succ(m)))
    return None


# --------------------------------------------------------------------------
# Strongly connected components and fair states


def sccs(n: int, edges: Sequence) -> list:
    """Tarjan's algorithm; returns a component id per node (reverse topological ids)."""
    index = [-1] * n
    low = [0] * n
    comp = [-1] * n
    on_stack = [False] * n
    stack: list = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            out = edges[v]
            if pos < len(out):
                work[-1] = (v, pos + 1)
                w = out[pos][1]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    if index[w] < low[v]:
                        low[v] = index[w]
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    return comp


def cyclic_nodes(g: ExplicitGraph, keep: Callable[[object], bool] | None = None) -> set:
    """Ids lying on some cycle, optionally inside the subgraph of kept edges.

    ``keep`` receives edge labels.
    """
    edges = g.edges if keep is None else [[e for e in out if keep(e[0])] for out in g.edges]
    comp = sccs(len(g.nodes), edges)
    size: dict = {}
    for c in comp:
        size[c] = size.get(c, 0) + 1
    res = set()
    for i, out in enumerate(edges):
        if size[comp[i]] > 1 or any(j == i for _, j in out):
            res.add(i)
    return res


def fair_nodes(g: ExplicitGraph, accepting: Sequence[Callable[[object], bool]]) -> set:
    """Ids from which some path visits every accepting predicate infinitely often."""
    n = len(g.nodes)
    comp = sccs(n, g.edges)
    members: dict = {}
    for i, c in enumerate(comp):
        members.setdefault(c, []).append(i)
    good = set()
    for c, ms in members.items():
        if len(ms) == 1:
            i = ms[0]
            if not any(j == i for _, j in g.edges[i]):
                continue
        if all(any(acc(g.nodes[i]) for i in ms) for acc in accepting):
            good.update(ms)
    rev = g.reverse()
    seen = set(good)
    queue = deque(good)
    while queue:
        v = queue.popleft()
        for u in rev[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


def path_between(g: ExplicitGraph, sources: Iterable[int], target: Callable[[int], bool], keep=None):
    """Shortest path (ids, labels) from a source to a node satisfying ``target``."""
    parent: dict = {}
    queue = deque()
    for s in sources:
        if s not in parent:
            parent[s] = None
            queue.append(s)
    while queue:
        v = queue.popleft()
        if target(v):
            ids, labels = [v], []
            while parent[v] is not None:
                u, lab = parent[v]
                ids.append(u)
                labels.append(lab)
                v = u
            return ids[::-1], labels[::-1]
        for lab, w in g.edges[v]:
            if keep is not None and not keep(lab):
                continue
            if w not in parent:
                parent[w] = (v, lab)
                queue.append(w)
    return None


def cycle_through(g: ExplicitGraph, node: int, keep=None):
    """Shortest nonempty cycle through ``node`` as (ids, labels), or ``None``."""
    best = None
    for lab, w in g.edges[node]:
        if keep is not None and not keep(lab):
            continue
        found = path_between(g, [w], lambda v: v == node, keep)
        if found is not None:
            ids, labels = found
            cand = ([node] + ids, [lab] + labels)
            if best is None or len(cand[1]) < len(best[1]):
                best = cand
    return best


# --------------------------------------------------------------------------
# Products of finite machines


def synchronized_product(a, b) -> BuchiGraph:
    """Pairs of states of two finite machines reading the same letters.

    Edge labels are ``(letter, output_a, output_b, info_a, info_b)``.
    Acceptance is the family ``{F×Q, Q×F}``.
    """
    if set(a.input_labels) != set(b.input_labels):
        from .errors import DefinitionError

        raise DefinitionError("synchronized product needs equal input alphabets")

    def succ(node):
        s1, s2 = node
        res = []
        for letter in a.letters(s1):
            r2 = b.step(s2, letter)
            if not r2:
                continue
            for o1, n1, i1 in a.step(s1, letter):
                for o2, n2, i2 in r2:
                    res.append(((letter, o1, o2, i1, i2), (n1, n2)))
        return res

    return BuchiGraph(
        initial=[(p, q) for p in a.initial_states for q in b.initial_states],
        successors=succ,
        accepting=[lambda n: a.is_accepting(n[0]), lambda n: b.is_accepting(n[1])],
    )


def coaccessible_pairs(m, seeds=None, cap: int | None = None) -> set:
    """State pairs of ``m`` from which one ω-word has final runs from both.

    ``seeds`` defaults to all pairs of materialized states.
    """
    prod = synchronized_product(m, m)
    if seeds is not None:
        prod.initial = list(seeds)
    else:
        states = list(m.states())
        prod.initial = [(p, q) for p in states for q in states]
    g = explore(prod, cap)
    good = fair_nodes(g, prod.accepting)
    return {g.nodes[i] for i in good}
