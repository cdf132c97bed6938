"""Weighted mark graphs and exact target-weight reachability.

Two runs over the same input produce two output words.  To find a
position where they differ, each run *marks* one of its output letters.
Before marking, every output letter of run 1 adds ``+1`` and every output
letter of run 2 adds ``-1`` to a single integer weight; a mark placed at
offset ``k`` of a transition output contributes only the ``k`` letters
before it.  Both marks sit at the same output position exactly when the
total weight is ``0``.  This is a two-counter Parikh condition ``c1 = c2``
folded into one integer.

Two graph flavours are built here:

* *concrete-letter* graphs work on the (finite) square of an expanded
  machine and compare the marked letters directly;
* *register-origin* graphs work on the label skeleton of a test-free
  machine and compare the input positions where the output registers were
  last written.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, NamedTuple

from .errors import PreconditionError, ResourceError
from .model import TransducerSpec, successors
from .omega import BuchiGraph, explore, fair_nodes, sccs
from .restrict import DEFAULT_CAP, ExpandedMachine


# --------------------------------------------------------------------------
# Weighted graphs


class WeightedMarkGraph:
    """Explicit graph whose edges carry ``(label, weight)``."""

    def __init__(self):
        self.nodes: list = []
        self.index: dict = {}
        self.edges: list = []  # edges[i] = [(label, weight, j)]
        self.sources: list = []
        self.targets: set = set()

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

    @classmethod
    def build(cls, sources, successors: Callable, cap: int = DEFAULT_CAP) -> "WeightedMarkGraph":
        """Explore from ``sources``; ``successors(node) -> [(label, weight, node')]``."""
        g = cls()
        queue = deque()
        for s in sources:
            if s not in g.index:
                queue.append(s)
            i = g.add(s)
            if i not in g.sources:
                g.sources.append(i)
        g._explore(queue, successors, cap)
        return g

    def extend(self, links, successors: Callable, cap: int = DEFAULT_CAP):
        """Add edges ``(i, label, weight, node)`` and explore the new nodes."""
        queue = deque()
        for i, lab, w, m in links:
            j = self.index.get(m)
            if j is None:
                j = self.add(m)
                queue.append(m)
            self.edges[i].append((lab, w, j))
        self._explore(queue, successors, cap)

    def _explore(self, queue, successors, cap):
        while queue:
            n = queue.popleft()
            out = self.edges[self.index[n]]
            for lab, w, m in successors(n):
                j = self.index.get(m)
                if j is None:
                    j = self.add(m)
                    if len(self.nodes) > cap:
                        raise ResourceError(f"state budget of {cap} exceeded")
                    queue.append(m)
                out.append((lab, w, j))


def _kept(g: WeightedMarkGraph, keep: Callable) -> list:
    return [[(lab, j) for lab, _, j in out if keep(i, lab, j)] for i, out in enumerate(g.edges)]


def loop_nodes(g: WeightedMarkGraph, keep: Callable, require: Callable) -> set:
    """Ids on a cycle of kept edges whose component contains a required edge.

    ``keep(i, label, j)`` filters edges, ``require(label)`` marks the edges
    of which one must lie inside the component.
    """
    edges = _kept(g, keep)
    comp = sccs(len(g.nodes), edges)
    good = {comp[i] for i, out in enumerate(edges) for lab, j in out if comp[i] == comp[j] and require(lab)}
    return {i for i in range(len(g.nodes)) if comp[i] in good}


def kept_cycle(g: WeightedMarkGraph, node: int, keep: Callable, require: Callable) -> list:
    """Labels of a cycle through ``node`` over kept edges using a required edge."""
    edges = _kept(g, keep)
    comp = sccs(len(g.nodes), edges)
    c = comp[node]

    def bfs(src, goal):
        parent = {src: None}
        queue = deque([src])
        while queue:
            v = queue.popleft()
            if goal(v):
                end, labels = v, []
                while parent[v] is not None:
                    v, lab = parent[v]
                    labels.append(lab)
                return labels[::-1], end
            for lab, j in edges[v]:
                if comp[j] == c and j not in parent:
                    parent[j] = (v, lab)
                    queue.append(j)
        raise ValueError("node is not on a suitable cycle")

    required = {}
    for i in range(len(g.nodes)):
        if comp[i] == c:
            for lab, j in edges[i]:
                if comp[j] == c and require(lab):
                    required.setdefault(i, (lab, j))
    first, v = bfs(node, lambda u: u in required)
    lab, j = required[v]
    back, _ = bfs(j, lambda u: u == node)
    return first + [lab] + back


@dataclass(frozen=True)
class ReachabilityQuery:
    graph: WeightedMarkGraph
    sources: tuple
    targets: frozenset
    total: int = 0

    @classmethod
    def of(cls, g: WeightedMarkGraph, total: int = 0) -> "ReachabilityQuery":
        return cls(g, tuple(g.sources), frozenset(g.targets), total)


class WeightPath(NamedTuple):
    ids: list
    labels: list
    weights: list

    @property
    def total(self) -> int:
        return sum(self.weights)


def _closure(start, adj) -> set:
    seen = set(start)
    queue = deque(start)
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


def search_window(g: WeightedMarkGraph, useful: set, total: int) -> int:
    """Bound on the partial weights explored by :func:`target_weight_reachable`.

    With ``n`` useful nodes, maximal absolute edge weight ``w`` and largest
    strongly connected component ``c`` (in nodes), simple paths stay within
    ``n·w`` and a single pumped cycle within ``c·w``.  Interleaving cycles of
    opposite signs keeps partial sums within one cycle of the running
    target, hence ``|total| + n·w + (c·w)² + c·w``.  The bound is checked
    against exhaustive enumeration in the test-suite.
    """
    nodes = sorted(useful)
    pos = {v: i for i, v in enumerate(nodes)}
    sub = [[(None, pos[j]) for _, _, j in g.edges[v] if j in pos] for v in nodes]
    comp = sccs(len(nodes), sub)
    size: dict = {}
    for c in comp:
        size[c] = size.get(c, 0) + 1
    w = max((abs(wt) for v in nodes for _, wt, j in g.edges[v] if j in pos), default=0)
    c = max(size.values(), default=1) * w
    return abs(total) + len(nodes) * w + c * c + c


def target_weight_reachable(q: ReachabilityQuery, window: int | None = None) -> WeightPath | None:
    """A path from a source to a target whose weights sum to ``q.total``.

    Breadth-first search over ``(node, partial weight)`` restricted to
    nodes that are reachable and co-reachable, with partial weights kept
    inside :func:`search_window`.  Two exact prunings apply: from a node
    that cannot reach any positive edge the weight can only go down, and
    symmetrically for negative edges.
    """
    g = q.graph
    n = len(g.nodes)
    fwd_adj = [[j for _, _, j in out] for out in g.edges]
    rev_adj: list = [[] for _ in range(n)]
    for i, out in enumerate(g.edges):
        for _, _, j in out:
            rev_adj[j].append(i)
    useful = _closure(q.sources, fwd_adj) & _closure(q.targets, rev_adj)
    if not useful:
        return None
    pos_src = [i for i in useful if any(w > 0 and j in useful for _, w, j in g.edges[i])]
    neg_src = [i for i in useful if any(w < 0 and j in useful for _, w, j in g.edges[i])]
    rev_useful = [[u for u in rev_adj[v] if u in useful] for v in range(n)]
    can_up = _closure(pos_src, rev_useful)
    can_down = _closure(neg_src, rev_useful)
    bound = search_window(g, useful, q.total) if window is None else window
    K = q.total
    targets = q.targets

    parent: dict = {}
    queue = deque()
    for s in q.sources:
        if s in useful and (s, 0) not in parent:
            parent[(s, 0)] = None
            queue.append((s, 0))
    goal = None
    while queue:
        v, w = queue.popleft()
        if v in targets and w == K:
            goal = (v, w)
            break
        for lab, dw, j in g.edges[v]:
            if j not in useful:
                continue
            w2 = w + dw
            if w2 > bound or w2 < -bound:
                continue
            if w2 < K and j not in can_up:
                continue
            if w2 > K and j not in can_down:
                continue
            st = (j, w2)
            if st not in parent:
                parent[st] = (v, w, lab, dw)
                queue.append(st)
    if goal is None:
        return None
    ids, labels, weights = [goal[0]], [], []
    st = goal
    while parent[st] is not None:
        v, w, lab, dw = parent[st]
        ids.append(v)
        labels.append(lab)
        weights.append(dw)
        st = (v, w)
    return WeightPath(ids[::-1], labels[::-1], weights[::-1])


# --------------------------------------------------------------------------
# Squares of expanded machines (concrete-letter mode)

DONE = "done"


class DataSquare:
    """Two runs of one expanded machine on a common input.

    Pair nodes are ``(q1, v1, q2, v2)``, canonical for the joint data
    ``v1 + v2``.  Extra data (such as a marked letter) can be carried along
    and are renamed together with the valuations.
    """

    def __init__(self, m: ExpandedMachine):
        self.m = m
        self.t = m.t
        self.space = m.space
        self.k = len(m.t.registers)
        self._labels = {q: frozenset(ls) for q, ls in m.t.labels_from.items()}

    @property
    def initial_pair(self):
        v = self.m.initial_valuation
        return (self.t.initial, v, self.t.initial, v)

    def canon(self, q1, v1, q2, v2, extra=()):
        k = self.k
        c = self.space.canonical(v1 + v2 + tuple(extra))
        return (q1, c[:k], q2, c[k : 2 * k]), c[2 * k :]

    def raw_steps(self, q1, v1, q2, v2, extra=()):
        """Joint steps in the coordinates of the current node."""
        t = self.t
        labs = self._labels.get(q1, frozenset()) & self._labels.get(q2, frozenset())
        if not labs:
            return
        data = self.space.letter_data(set(v1) | set(v2) | set(extra))
        for a in t.input_labels:
            if a not in labs:
                continue
            for d in data:
                letter = (a, d)
                s1 = successors(t, q1, v1, letter)
                if not s1:
                    continue
                s2 = successors(t, q2, v2, letter)
                for tr1, p1, w1, o1 in s1:
                    for tr2, p2, w2, o2 in s2:
                        yield letter, tr1, p1, w1, o1, tr2, p2, w2, o2

    def pair_successors(self, node):
        q1, v1, q2, v2 = node
        res = []
        for letter, tr1, p1, w1, o1, tr2, p2, w2, o2 in self.raw_steps(q1, v1, q2, v2):
            nxt, _ = self.canon(p1, w1, p2, w2)
            res.append(((letter, tr1, tr2, o1, o2), nxt))
        return res

    # -- graphs over pairs ----------------------------------------------------

    def flagged(self) -> BuchiGraph:
        """Pairs with output flags; acceptance asks for final runs with infinite outputs."""
        F = self.t.accepting

        def succ(node):
            pair = node[:4]
            return [(lab, nxt + (bool(lab[3]), bool(lab[4]))) for lab, nxt in self.pair_successors(pair)]

        return BuchiGraph(
            initial=[self.initial_pair + (False, False)],
            successors=succ,
            accepting=[lambda n: n[0] in F, lambda n: n[2] in F, lambda n: n[4], lambda n: n[5]],
        )

    def coaccessible(self, cap=DEFAULT_CAP) -> set:
        """Pairs from which both runs can be completed on one input."""
        g = explore(self.flagged(), cap)
        fair = fair_nodes(g, self.flagged().accepting)
        self.flag_graph_size = len(g)
        return {g.nodes[i][:4] for i in fair}


def single_final(m: ExpandedMachine, cap=DEFAULT_CAP) -> set:
    """Canonical single nodes with a final run producing infinite output."""
    F = m.t.accepting

    def succ(node):
        return [(lab, nxt + (bool(lab[1]),)) for lab, nxt in m.successors(node[:2])]

    acc = [lambda n: n[0] in F, lambda n: n[2]]
    g = explore(BuchiGraph([m.initial_node + (False,)], succ, acc), cap)
    fair = fair_nodes(g, acc)
    return {g.nodes[i][:2] for i in fair}


def _mark_options(ph, o1, o2):
    """Phase updates for one joint step: ``(phase', weight, mark)``."""
    n1, n2 = len(o1), len(o2)
    if ph is DONE:
        yield DONE, 0, None
    elif ph is None:
        yield None, n1 - n2, None
        for k in range(n1):
            yield (0, o1[k]), k - n2, (0, k)
        for k in range(n2):
            yield (1, o2[k]), n1 - k, (1, k)
        for k1 in range(n1):
            for k2 in range(n2):
                if o1[k1] != o2[k2]:
                    yield DONE, k1 - k2, (2, k1, k2)
    elif ph[0] == 0:
        yield ph, -n2, None
        for k in range(n2):
            if o2[k] != ph[1]:
                yield DONE, -k, (1, k)
    else:
        yield ph, n1, None
        for k in range(n1):
            if o1[k] != ph[1]:
                yield DONE, k, (0, k)


class MismatchGraph(NamedTuple):
    graph: WeightedMarkGraph
    square: object
    loop_edge: Callable | None
    info: dict


def _is_marked(ph) -> bool:
    return isinstance(ph, tuple)


def concrete_mismatch_graph(
    m: ExpandedMachine, purpose: str = "functionality", cap: int = DEFAULT_CAP
) -> MismatchGraph:
    """Mark graph over the square of ``m`` comparing output letters.

    Nodes are ``("P", q1, v1, q2, v2, phase)`` where the phase is ``None``,
    ``(run, letter)`` after one mark, or ``"done"`` after a mismatch.  The
    datum of a marked letter is renamed together with the valuations.

    For continuity, nodes ``("S", q2, v2, phase)`` let run 2 continue
    alone.  They are entered from marked nodes of run 1 lying on a cycle on
    which run 2 outputs nothing; targets are then either such solo nodes
    after a second mark, or mismatched pair nodes on a cycle.
    """
    sq = DataSquare(m)
    t = m.t
    F = t.accepting
    space = m.space
    info: dict = {}

    def canon_p(q1, v1, q2, v2, ph):
        extra = (ph[1][1],) if _is_marked(ph) else ()
        pair, rest = sq.canon(q1, v1, q2, v2, extra)
        if extra:
            ph = (ph[0], (ph[1][0], rest[0]))
        return ("P",) + pair + (ph,)

    def canon_s(q, v, ph):
        extra = (ph[1][1],) if _is_marked(ph) else ()
        c = space.canonical(v + extra)
        k = len(v)
        if extra:
            ph = (ph[0], (ph[1][0], c[k]))
        return ("S", q, c[:k], ph)

    def pair_succ(node):
        _, q1, v1, q2, v2, ph = node
        extra = (ph[1][1],) if _is_marked(ph) else ()
        res = []
        for letter, tr1, p1, w1, o1, tr2, p2, w2, o2 in sq.raw_steps(q1, v1, q2, v2, extra):
            for ph2, wt, mk in _mark_options(ph, o1, o2):
                res.append((("pair", letter, tr1, tr2, o1, o2, mk), wt, canon_p(p1, w1, p2, w2, ph2)))
        return res

    def solo_succ(node):
        _, q, v, ph = node
        extra = (ph[1][1],) if _is_marked(ph) else ()
        labs = t.labels_from.get(q, ())
        res = []
        for a in t.input_labels:
            if a not in labs:
                continue
            for d in space.letter_data(set(v) | set(extra)):
                for tr, p, w, o in successors(t, q, v, (a, d)):
                    if ph is DONE:
                        res.append((("solo", (a, d), tr, o, None), 0, canon_s(p, w, DONE)))
                        continue
                    res.append((("solo", (a, d), tr, o, None), -len(o), canon_s(p, w, ph)))
                    for k in range(len(o)):
                        if o[k] != ph[1]:
                            res.append((("solo", (a, d), tr, o, k), -k, canon_s(p, w, DONE)))
        return res

    start = ("P",) + sq.initial_pair + (None,)
    g = WeightedMarkGraph.build([start], pair_succ, cap)
    info["mark"] = len(g)

    if purpose == "functionality":
        coacc = sq.coaccessible(cap)
        info["square"] = sq.flag_graph_size
        g.targets = {i for i, n in enumerate(g.nodes) if n[5] is DONE and n[1:5] in coacc}
        return MismatchGraph(g, sq, None, info)

    single = single_final(m, cap)
    alone = lambda q, v: (q, space.canonical(v)) in single
    nodes = g.nodes

    def keep(i, lab, j):
        ph = nodes[i][5] if nodes[i][0] == "P" else None
        if ph is DONE:
            return True
        return _is_marked(ph) and ph[0] == 0 and lab[0] == "pair" and lab[6] is None and not lab[5]

    looping = loop_nodes(g, keep, require=lambda lab: bool(lab[4]))
    targets = set()
    links = []
    for i in sorted(looping):
        _, q1, v1, q2, v2, ph = nodes[i]
        if q1 not in F:
            continue
        if ph is DONE:
            if alone(q2, v2):
                targets.add(i)
        else:
            links.append((i, ("switch",), 0, canon_s(q2, v2, ph)))
    n0 = len(g)
    g.extend(links, solo_succ, cap)
    targets.update(i for i in range(n0, len(g)) if nodes[i][3] is DONE and alone(nodes[i][1], nodes[i][2]))
    g.targets = targets
    info["mark"] = len(g)
    return MismatchGraph(g, sq, keep, info)


# --------------------------------------------------------------------------
# Register-origin mode for test-free machines

N = ("N",)


class SkeletonSquare:
    """Pairs of states of a test-free machine, reading labels only."""

    def __init__(self, t: TransducerSpec):
        self.t = t
        by: dict = {}
        for tr in t.transitions:
            by.setdefault((tr.source, tr.label), []).append(tr)
        self.by = by
        self._labels = {q: frozenset(ls) for q, ls in t.labels_from.items()}

    def moves(self, q):
        for a in self.t.input_labels:
            for tr in self.by.get((q, a), ()):
                yield a, tr

    def joint(self, q1, q2):
        labs = self._labels.get(q1, frozenset()) & self._labels.get(q2, frozenset())
        for a in self.t.input_labels:
            if a in labs:
                for tr1 in self.by[(q1, a)]:
                    for tr2 in self.by[(q2, a)]:
                        yield a, tr1, tr2

    def pair_successors(self, node):
        q1, q2 = node
        return [((a, tr1, tr2), (tr1.target, tr2.target)) for a, tr1, tr2 in self.joint(q1, q2)]

    def flagged(self) -> BuchiGraph:
        F = self.t.accepting

        def succ(node):
            return [
                (lab, (p1, p2, bool(lab[1].output), bool(lab[2].output)))
                for lab, (p1, p2) in self.pair_successors(node[:2])
            ]

        return BuchiGraph(
            initial=[(self.t.initial, self.t.initial, False, False)],
            successors=succ,
            accepting=[lambda n: n[0] in F, lambda n: n[1] in F, lambda n: n[2], lambda n: n[3]],
        )

    def coaccessible(self) -> set:
        b = self.flagged()
        g = explore(b)
        fair = fair_nodes(g, b.accepting)
        return {g.nodes[i][:2] for i in fair}

    def single_flagged(self) -> BuchiGraph:
        F = self.t.accepting

        def succ(node):
            return [((a, tr), (tr.target, bool(tr.output))) for a, tr in self.moves(node[0])]

        return BuchiGraph([(self.t.initial, False)], succ, [lambda n: n[0] in F, lambda n: n[1]])

    def single_final(self) -> set:
        b = self.single_flagged()
        b.initial = [(q, False) for q in self.t.states]
        g = explore(b)
        fair = fair_nodes(g, b.accepting)
        return {g.nodes[i][0] for i in fair}


def _origin(ph) -> bool:
    return ph[0] == "T" or (ph[0] == "M" and ph[2])


def _run_options(ph, tr):
    """``(phase', counted letters, gained origin now, mark offset)`` for one run."""
    o = tr.output
    n = len(o)
    if ph[0] == "N":
        yield N, n, False, None
        for k in range(n):
            yield ("M", o[k][0], False), k, False, k
        for r in sorted(tr.assign):
            yield ("T", r), n, True, None
            for k in range(n):
                if o[k][1] == r:
                    yield ("M", o[k][0], True), k, True, k
    elif ph[0] == "T":
        r = ph[1]
        if r in tr.assign:
            return
        yield ph, n, False, None
        for k in range(n):
            if o[k][1] == r:
                yield ("M", o[k][0], True), k, False, k
    else:
        yield ph, 0, False, None


def _relation(rel, ph1, new1, ph2, new2):
    """Update whether the two tracked origins hold the same datum."""
    if rel is not None:
        return rel
    if _origin(ph1) and _origin(ph2):
        return "same" if (new1 and new2) else "diff"
    return None


def _verdict(ph1, ph2, rel):
    """``True`` mismatch, ``False`` no mismatch, ``None`` undecided."""
    if ph1[0] != "M" or ph2[0] != "M":
        return None
    if ph1[1] != ph2[1]:
        return True
    return bool(ph1[2] and ph2[2] and rel == "diff")


def origin_mismatch_graph(t: TransducerSpec, purpose: str = "functionality", cap: int = DEFAULT_CAP) -> MismatchGraph:
    """Mark graph over the label skeleton tracking where output data came from.

    Each run is in phase ``N`` (nothing tracked), ``T(r)`` (the datum now in
    register ``r`` will be output at the marked position, so ``r`` must not
    be overwritten before) or ``M(label, has_origin)`` (marked).  Registers
    may also be tracked from the start, in which case they still hold the
    initial datum.  The datum at each input position is taken fresh, so two
    tracked data differ exactly when they were written at different steps.

    Node kinds: ``P`` (both runs), ``D`` (mismatch found), and for
    continuity ``S``/``SD`` (run 2 alone, before and after its mark).
    """
    from .normalize import is_test_free

    if not is_test_free(t):
        raise PreconditionError("register-origin graphs need a test-free machine")
    sq = SkeletonSquare(t)
    F = t.accepting
    info: dict = {}

    def pair_succ(node):
        res = []
        if node[0] == "D":
            for (a, tr1, tr2), (p1, p2) in sq.pair_successors(node[1:3]):
                res.append((("pair", a, tr1, tr2, None), 0, ("D", p1, p2)))
            return res
        _, q1, q2, ph1, ph2, rel = node
        for a, tr1, tr2 in sq.joint(q1, q2):
            for n1, c1, g1, k1 in _run_options(ph1, tr1):
                for n2, c2, g2, k2 in _run_options(ph2, tr2):
                    rel2 = _relation(rel, n1, g1, n2, g2)
                    v = _verdict(n1, n2, rel2)
                    if v is False:
                        continue
                    lab = ("pair", a, tr1, tr2, (n1, n2, k1, k2))
                    nxt = ("D", tr1.target, tr2.target) if v else ("P", tr1.target, tr2.target, n1, n2, rel2)
                    res.append((lab, c1 - c2, nxt))
        return res

    def solo_succ(node):
        res = []
        if node[0] == "SD":
            for a, tr in sq.moves(node[1]):
                res.append((("solo", a, tr, None), 0, ("SD", tr.target)))
            return res
        _, q, ph1, ph2, rel = node
        for a, tr in sq.moves(q):
            for n2, c2, g2, k2 in _run_options(ph2, tr):
                rel2 = _relation(rel, ph1, False, n2, g2)
                v = _verdict(ph1, n2, rel2)
                if v is False:
                    continue
                nxt = ("SD", tr.target) if v else ("S", tr.target, ph1, n2, rel2)
                res.append((("solo", a, tr, (n2, k2)), -c2, nxt))
        return res

    phases = [N] + [("T", r) for r in t.registers]
    starts = []
    for p1 in phases:
        for p2 in phases:
            rel = "same" if (p1[0] == "T" and p2[0] == "T") else None
            starts.append(("P", t.initial, t.initial, p1, p2, rel))
    g = WeightedMarkGraph.build(starts, pair_succ, cap)
    info["mark"] = len(g)
    nodes = g.nodes

    if purpose == "functionality":
        coacc = sq.coaccessible()
        g.targets = {i for i, n in enumerate(nodes) if n[0] == "D" and n[1:3] in coacc}
        return MismatchGraph(g, sq, None, info)

    alone = sq.single_final()

    def keep(i, lab, j):
        src = nodes[i]
        if src[0] == "D":
            return True
        if src[0] != "P" or src[3][0] != "M":
            return False
        n1, n2, _, _ = lab[4]
        return n1 == src[3] and n2 == src[4] and not lab[3].output

    looping = loop_nodes(g, keep, require=lambda lab: bool(lab[2].output))
    targets = set()
    links = []
    for i in sorted(looping):
        node = nodes[i]
        if node[1] not in F:
            continue
        if node[0] == "D":
            if node[2] in alone:
                targets.add(i)
        else:
            _, q1, q2, ph1, ph2, rel = node
            links.append((i, ("switch",), 0, ("S", q2, ph1, ph2, rel)))
    n0 = len(g)
    g.extend(links, solo_succ, cap)
    targets.update(i for i in range(n0, len(g)) if nodes[i][0] == "SD" and nodes[i][1] in alone)
    g.targets = targets
    info["mark"] = len(g)
    return MismatchGraph(g, sq, keep, info)


def build_mismatch_graph(square, mode: str, purpose: str = "functionality", cap: int = DEFAULT_CAP) -> MismatchGraph:
    """Dispatch on ``mode``: ``concrete-letter`` takes an expanded machine,
    ``register-origin`` a test-free transducer."""
    if mode == "concrete-letter":
        return concrete_mismatch_graph(square, purpose, cap)
    if mode == "register-origin":
        return origin_mismatch_graph(square, purpose, cap)
    raise ValueError(f"unknown mode {mode!r}")
