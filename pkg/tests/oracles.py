"""Brute-force reference implementations used as test oracles."""

from __future__ import annotations

import itertools
import random
from pathlib import Path

from regtrans.format import load_transducer
from regtrans.model import TRUE, LassoWord, TransducerSpec, Transition, outputs_on

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def corpus_files() -> list:
    return sorted(p for p in CORPUS.iterdir() if p.suffix in (".nrt", ".nft", ".nra"))


def load(name: str) -> TransducerSpec:
    matches = [p for p in corpus_files() if p.stem == name]
    assert matches, f"no corpus machine named {name}"
    return load_transducer(matches[0])


# -- random finite transducers ---------------------------------------------


def random_nft(rng: random.Random, max_states=4, max_labels=3, max_out=2) -> TransducerSpec:
    n = rng.randint(1, max_states)
    states = tuple(f"q{i}" for i in range(n))
    ins = tuple("abc"[: rng.randint(1, max_labels)])
    outs = tuple("xyz"[: rng.randint(1, max_labels)])
    trs = []
    for q in states:
        for a in ins:
            for _ in range(rng.choice((0, 1, 1, 2))):
                o = tuple((rng.choice(outs), None) for _ in range(rng.randint(0, max_out)))
                trs.append(Transition(q, a, TRUE, frozenset(), o, rng.choice(states)))
    acc = frozenset(q for q in states if rng.random() < 0.5) or frozenset({states[-1]})
    return TransducerSpec("nft", "random", states, (), ins, outs, "q0", acc, tuple(dict.fromkeys(trs)))


def label_lassos(labels, max_total: int):
    """Every lasso ``u v^ω`` over ``labels`` (datum 0) with ``|u| + |v| <= max_total``."""
    for total in range(1, max_total + 1):
        for p in range(0, total):
            for word in itertools.product(labels, repeat=total):
                x = LassoWord(tuple((a, 0) for a in word[:p]), tuple((a, 0) for a in word[p:]))
                if x.normalized() == x:
                    yield x


def brute_nonfunctional(t: TransducerSpec, max_total: int):
    """First lasso with two distinct outputs, with the two outputs."""
    for x in label_lassos(t.input_labels, max_total):
        outs = list(outputs_on(t, x, limit=4))
        for y1, y2 in itertools.combinations(outs, 2):
            if not y1.same_word(y2):
                return x, (y1, y2)
    return None


# -- graphs -------------------------------------------------------------------


def reach_closure(n: int, edges) -> list:
    """``reach[i]``: nodes reachable from ``i`` by at least one edge."""
    reach = [set(j for j in edges[i]) for i in range(n)]
    changed = True
    while changed:
        changed = False
        for i in range(n):
            extra = set().union(*(reach[j] for j in reach[i])) - reach[i] if reach[i] else set()
            if extra:
                reach[i] |= extra
                changed = True
    return reach


def brute_buchi(n: int, edges, initial, accepting_sets) -> bool:
    """Generalized Büchi nonemptiness by transitive closure."""
    reach = reach_closure(n, edges)
    live = set(initial) | set().union(*(reach[i] for i in initial)) if initial else set()
    for v in live:
        if v not in reach[v]:
            continue
        scc = {u for u in reach[v] if v in reach[u]}
        if all(any(a in scc for a in acc) for acc in accepting_sets):
            return True
    return False


def random_weighted_graph(rng: random.Random, max_nodes=8, max_weight=3):
    n = rng.randint(1, max_nodes)
    edges = []
    for i in range(n):
        out = []
        for j in range(n):
            if rng.random() < 0.3:
                out.append((f"e{i}{j}", rng.randint(-max_weight, max_weight), j))
        edges.append(out)
    sources = rng.sample(range(n), rng.randint(1, min(2, n)))
    targets = set(rng.sample(range(n), rng.randint(1, min(2, n))))
    return n, edges, sources, targets


def bounded_weight_paths(edges, sources, targets, total: int, max_len: int) -> bool:
    """Is there a path of at most ``max_len`` edges with weight ``total``?"""
    layer = {(s, 0) for s in sources}
    seen = set(layer)
    for _ in range(max_len + 1):
        if any(v in targets and w == total for v, w in layer):
            return True
        nxt = set()
        for v, w in layer:
            for _, dw, j in edges[v]:
                st = (j, w + dw)
                if st not in seen:
                    seen.add(st)
                    nxt.add(st)
        layer = nxt
    return False
