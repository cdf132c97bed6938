"""Functionality, equivalence on the common domain, and continuity.

Every negative answer carries a witness made of concrete lasso words.
Witnesses are checked by simulation before they are returned, so a
verdict either replays or the call fails loudly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import count

from .errors import PreconditionError, ResourceError
from .model import LassoWord, TransducerSpec, Transition, fire, lasso, outputs_on, relates
from .normalize import is_test_free, skeleton, substitute
from .omega import BuchiGraph, buchi_nonempty
from .parikh import (
    DONE,
    ReachabilityQuery,
    concrete_mismatch_graph,
    kept_cycle,
    origin_mismatch_graph,
    target_weight_reachable,
)
from .restrict import DEFAULT_CAP, DataSpace, ExpandedMachine, lift_cycle, lift_path

GENERAL = "general"
TEST_FREE = "test-free"


@dataclass
class Verdict:
    answer: bool
    witness: object = None
    procedure: str = GENERAL
    stats: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FunctionalityWitness:
    """One input with two distinct outputs."""

    input: LassoWord
    outputs: tuple


@dataclass(frozen=True)
class ContinuityPattern:
    """Inputs ``x = u v^ω`` and ``x_n = u v^n w z`` whose outputs keep disagreeing.

    ``out_u1``/``out_v1`` are produced by the run on ``x`` and
    ``out_u2``/``out_v2``/``out_z2`` by the run on ``x_n`` (``out_z2`` is the
    output on ``w``).  For every ``n`` the outputs of ``x`` and ``x_n``
    share at most ``len(out_u1)`` letters.
    """

    input: LassoWord
    output: LassoWord
    u: tuple
    v: tuple
    w: tuple
    z: LassoWord
    out_u1: tuple
    out_u2: tuple
    out_v1: tuple
    out_v2: tuple
    out_z2: tuple

    def family(self, n: int) -> LassoWord:
        return lasso(self.u + self.v * n + self.w + self.z.prefix, self.z.period)


class WitnessError(AssertionError):
    """A witness failed its replay; this is a bug, never a verdict."""


# --------------------------------------------------------------------------
# Replay checks


def check_functionality_witness(t: TransducerSpec, w: FunctionalityWitness) -> bool:
    y1, y2 = w.outputs
    return not y1.same_word(y2) and relates(t, w.input, y1) and relates(t, w.input, y2)


def check_continuity_pattern(t: TransducerSpec, p: ContinuityPattern, ns=(1, 2, 3)) -> bool:
    if not relates(t, p.input, p.output):
        return False
    bound = len(p.out_u1)
    for n in ns:
        outs = outputs_on(t, p.family(n))
        if not outs:
            return False
        for y in outs:
            common = y.common_prefix_length(p.output)
            if common is None or common > bound:
                return False
    return True


def _letters(records):
    return tuple(r[0] for r in records)


def _outs(records, i):
    return tuple(a for r in records for a in r[i])


# --------------------------------------------------------------------------
# Replay of canonical paths (concrete-letter graphs)


class _Lifter:
    """Concrete counterparts of the canonical edges of one expanded machine."""

    def __init__(self, m: ExpandedMachine):
        self.m = m
        self.t = m.t
        self.space = m.space

    def _datum(self, d, data):
        return self.space.actual_datum(d, data)

    def mark(self, node, lab):
        """Edges of mark graphs; records are ``(letter, out1, out2)``."""
        t = self.t
        if lab[0] == "switch":
            _, q1, v1, q2, v2, ph = node
            return None, ("S", q2, v2, ph)
        if lab[0] == "pair":
            _, (a, d), tr1, tr2, _, _, mk = lab
            _, q1, v1, q2, v2, ph = node
            extra = (ph[1][1],) if isinstance(ph, tuple) else ()
            datum = self._datum(d, v1 + v2 + extra)
            w1, o1 = fire(t, tr1, v1, datum)
            w2, o2 = fire(t, tr2, v2, datum)
            if mk is None:
                ph2 = ph
            elif mk[0] == 2:
                ph2 = DONE
            elif ph is None:
                ph2 = (mk[0], (o1 if mk[0] == 0 else o2)[mk[1]])
            else:
                ph2 = DONE
            return ((a, datum), o1, o2), ("P", tr1.target, w1, tr2.target, w2, ph2)
        _, (a, d), tr, _, k = lab
        _, q, v, ph = node
        extra = (ph[1][1],) if isinstance(ph, tuple) else ()
        datum = self._datum(d, v + extra)
        w, o = fire(t, tr, v, datum)
        ph2 = ph if k is None else DONE
        return ((a, datum), (), o), ("S", tr.target, w, ph2)

    def square(self, node, lab):
        """Flagged pair nodes ``(q1, v1, q2, v2, f1, f2)``."""
        (a, d), tr1, tr2, _, _ = lab
        q1, v1, q2, v2 = node[:4]
        datum = self._datum(d, v1 + v2)
        w1, o1 = fire(self.t, tr1, v1, datum)
        w2, o2 = fire(self.t, tr2, v2, datum)
        return ((a, datum), o1, o2), (tr1.target, w1, tr2.target, w2, bool(o1), bool(o2))

    def single(self, node, lab):
        rec, nxt = self.m.replay(node[:2], lab)
        return (rec[0], rec[1]), nxt + (bool(rec[1]),)

    def final_lasso(self, q, vals):
        """A final run with infinite output from the concrete node ``(q, vals)``."""
        m = self.m
        F = m.t.accepting

        def succ(node):
            return [(lab, nxt + (bool(lab[1]),)) for lab, nxt in m.successors(node[:2])]

        b = BuchiGraph([(q, self.space.canonical(vals), False)], succ, [lambda n: n[0] in F, lambda n: n[2]])
        run = buchi_nonempty(b)
        if run is None:
            raise WitnessError("no final run from a state found coaccessible")
        stem, node = lift_path((q, vals, False), run.stem_labels, self.single)
        more, loop, _ = lift_cycle(node, run.loop_labels, self.single)
        return stem + more, loop


def _elapsed(t0) -> int:
    return int((time.perf_counter() - t0) * 1000)


# --------------------------------------------------------------------------
# Finite transducers and expansions


def nft_functional(m: ExpandedMachine, cap: int = DEFAULT_CAP, procedure: str = GENERAL) -> Verdict:
    """Functionality of a data-free machine (an expansion or a finite transducer)."""
    t0 = time.perf_counter()
    mg = concrete_mismatch_graph(m, "functionality", cap)
    path = target_weight_reachable(ReachabilityQuery.of(mg.graph))
    stats = {
        "expanded_states": mg.info["mark"] + mg.info["square"],
        "mark_nodes": mg.info["mark"],
        "square_nodes": mg.info["square"],
        "data_values": m.space.size,
    }
    if path is None:
        stats["millis"] = _elapsed(t0)
        return Verdict(True, None, procedure, stats)
    lift = _Lifter(m)
    sq = mg.square
    recs, node = lift_path(("P",) + sq.initial_pair + (None,), path.labels, lift.mark)
    pair = node[1:5]
    b = sq.flagged()
    b.initial = [sq.canon(*pair)[0] + (False, False)]
    run = buchi_nonempty(b)
    if run is None:
        raise WitnessError("mismatch target is not coaccessible")
    stem, nd = lift_path(pair + (False, False), run.stem_labels, lift.square)
    more, loop, _ = lift_cycle(nd, run.loop_labels, lift.square)
    head = recs + stem + more
    x = lasso(_letters(head), _letters(loop))
    y1 = lasso(_outs(head, 1), _outs(loop, 1)).normalized()
    y2 = lasso(_outs(head, 2), _outs(loop, 2)).normalized()
    w = FunctionalityWitness(x, (y1, y2))
    if not check_functionality_witness(m.t, w):
        raise WitnessError("functionality witness does not replay")
    stats["millis"] = _elapsed(t0)
    return Verdict(False, w, procedure, stats)


def nft_continuous(m: ExpandedMachine, cap: int = DEFAULT_CAP, procedure: str = GENERAL) -> Verdict:
    """Continuity of a data-free machine, assumed functional."""
    t0 = time.perf_counter()
    mg = concrete_mismatch_graph(m, "continuity", cap)
    g = mg.graph
    path = target_weight_reachable(ReachabilityQuery.of(g))
    stats = {"expanded_states": mg.info["mark"], "mark_nodes": mg.info["mark"], "data_values": m.space.size}
    if path is None:
        stats["millis"] = _elapsed(t0)
        return Verdict(True, None, procedure, stats)
    lift = _Lifter(m)
    labels = list(path.labels)
    if ("switch",) in labels:
        s = labels.index(("switch",))
        pre, post, at = labels[:s], labels[s + 1 :], path.ids[s]
    else:
        pre, post, at = labels, [], path.ids[-1]
    recs, node = lift_path(("P",) + mg.square.initial_pair + (None,), pre, lift.mark)
    cycle = kept_cycle(g, at, mg.loop_edge, lambda lab: bool(lab[4]))
    more, loop, node = lift_cycle(node, cycle, lift.mark)
    u_recs = recs + more
    if post:
        w_recs, end = lift_path(("S", node[3], node[4], node[5]), post, lift.mark)
        q, vals = end[1], end[2]
    else:
        w_recs, q, vals = [], node[3], node[4]
    z_stem, z_loop = lift.final_lasso(q, vals)
    p = _pattern(u_recs, loop, w_recs, z_stem, z_loop)
    if not check_continuity_pattern(m.t, p):
        raise WitnessError("continuity pattern does not replay")
    stats["millis"] = _elapsed(t0)
    return Verdict(False, p, procedure, stats)


def _pattern(u_recs, v_recs, w_recs, z_stem, z_loop) -> ContinuityPattern:
    u, v = _letters(u_recs), _letters(v_recs)
    out_u1, out_v1 = _outs(u_recs, 1), _outs(v_recs, 1)
    return ContinuityPattern(
        input=lasso(u, v),
        output=lasso(out_u1, out_v1),
        u=u,
        v=v,
        w=_letters(w_recs),
        z=lasso(_letters(z_stem), _letters(z_loop)),
        out_u1=out_u1,
        out_u2=_outs(u_recs, 2),
        out_v1=out_v1,
        out_v2=_outs(v_recs, 2),
        out_z2=_outs(w_recs, 2),
    )


# --------------------------------------------------------------------------
# Register transducers, general path


def expansion(t: TransducerSpec, size: int | None = None, cap: int = DEFAULT_CAP) -> ExpandedMachine:
    """Symmetric expansion over the prescribed data set (``2k+3`` values by default)."""
    if not t.registers:
        return ExpandedMachine(t, DataSpace.concrete((0,)), None, cap)
    return ExpandedMachine(t, DataSpace.symmetric(size or 2 * len(t.registers) + 3), None, cap)


def _resource_hint(t: TransducerSpec, e: ResourceError) -> ResourceError:
    if is_test_free(t):
        return ResourceError(f"{e}; the machine is test-free, the test-free path avoids data expansion")
    return e


def nrt_functional(t: TransducerSpec, size: int | None = None, cap: int = DEFAULT_CAP) -> Verdict:
    try:
        return nft_functional(expansion(t, size, cap), cap)
    except ResourceError as e:
        raise _resource_hint(t, e) from None


def nrt_continuous(t: TransducerSpec, size: int | None = None, cap: int = DEFAULT_CAP) -> Verdict:
    """Continuity (equivalently computability) through the data expansion."""
    v = nrt_functional(t, size, cap)
    if not v.answer:
        raise PreconditionError("continuity is defined for functional machines only", witness=v)
    try:
        c = nft_continuous(expansion(t, size, cap), cap)
    except ResourceError as e:
        raise _resource_hint(t, e) from None
    c.stats["expanded_states"] += v.stats["expanded_states"]
    return c


nrt_computable = nrt_continuous


# --------------------------------------------------------------------------
# Test-free machines


def _fresh_data(labels_and_moves, start):
    """Attach pairwise distinct data ``start, start+1, ...`` to moves."""
    c = count(start)
    return [(lab, next(c)) for lab in labels_and_moves]


def _fire2(t):
    def replay(node, edge):
        (a, tr1, tr2), d = edge
        q1, v1, q2, v2 = node
        w1, o1 = fire(t, tr1, v1, d)
        w2, o2 = fire(t, tr2, v2, d)
        return ((a, d), o1, o2), (tr1.target, w1, tr2.target, w2)

    return replay


def _fire1(t):
    def replay(node, edge):
        (a, tr), d = edge
        q, v = node
        w, o = fire(t, tr, v, d)
        return ((a, d), (), o), (tr.target, w)

    return replay


def _moves(labels):
    """Strip mark annotations from origin-graph labels."""
    out = []
    for lab in labels:
        if lab[0] == "pair":
            out.append((lab[1], lab[2], lab[3]))
        elif lab[0] == "solo":
            out.append((lab[1], lab[2]))
    return out


def _require_test_free(t):
    if not is_test_free(t):
        raise PreconditionError("the machine has register tests; use the general path")


def testfree_functional(t: TransducerSpec, cap: int = DEFAULT_CAP) -> Verdict:
    """Functionality without data expansion.

    Label mismatches are found on the register-free skeleton.  Over the
    all-``0`` input a test-free machine and its skeleton have the same
    runs and outputs, so skeleton witnesses are witnesses for ``t``.  Data
    mismatches use the register-origin mark graph.
    """
    _require_test_free(t)
    t0 = time.perf_counter()
    skel = skeleton(t)
    v = nft_functional(ExpandedMachine(skel, DataSpace.concrete((0,))), cap, TEST_FREE)
    if not v.answer:
        if not check_functionality_witness(t, v.witness):
            raise WitnessError("skeleton witness does not replay")
        v.stats["expanded_states"] = 0
        v.stats["millis"] = _elapsed(t0)
        return v
    mg = origin_mismatch_graph(t, "functionality", cap)
    path = target_weight_reachable(ReachabilityQuery.of(mg.graph))
    stats = {"expanded_states": 0, "mark_nodes": mg.info["mark"], "skeleton_nodes": v.stats["expanded_states"]}
    if path is None:
        stats["millis"] = _elapsed(t0)
        return Verdict(True, None, TEST_FREE, stats)
    sq = mg.square
    end = mg.graph.nodes[path.ids[-1]]
    b = sq.flagged()
    b.initial = [(end[1], end[2], False, False)]
    run = buchi_nonempty(b)
    if run is None:
        raise WitnessError("mismatch target is not coaccessible")
    head = _moves(path.labels) + list(run.stem_labels)
    start = (t.initial, t.initial_valuation, t.initial, t.initial_valuation)
    replay = _fire2(t)
    stem, node = lift_path(start, _fresh_data(head, 1), replay)
    more, loop, _ = lift_cycle(node, _fresh_data(run.loop_labels, len(head) + 1), replay)
    head_recs = stem + more
    x = lasso(_letters(head_recs), _letters(loop))
    y1 = lasso(_outs(head_recs, 1), _outs(loop, 1)).normalized()
    y2 = lasso(_outs(head_recs, 2), _outs(loop, 2)).normalized()
    w = FunctionalityWitness(x, (y1, y2))
    if not check_functionality_witness(t, w):
        raise WitnessError("functionality witness does not replay")
    stats["millis"] = _elapsed(t0)
    return Verdict(False, w, TEST_FREE, stats)


def testfree_continuous(t: TransducerSpec, cap: int = DEFAULT_CAP) -> Verdict:
    """Continuity without data expansion (the machine must be functional)."""
    _require_test_free(t)
    t0 = time.perf_counter()
    v = testfree_functional(t, cap)
    if not v.answer:
        raise PreconditionError("continuity is defined for functional machines only", witness=v)
    mg = origin_mismatch_graph(t, "continuity", cap)
    g = mg.graph
    path = target_weight_reachable(ReachabilityQuery.of(g))
    stats = {"expanded_states": 0, "mark_nodes": mg.info["mark"]}
    if path is None:
        stats["millis"] = _elapsed(t0)
        return Verdict(True, None, TEST_FREE, stats)
    labels = list(path.labels)
    if ("switch",) in labels:
        s = labels.index(("switch",))
        pre, post, at = labels[:s], labels[s + 1 :], path.ids[s]
    else:
        pre, post, at = labels, [], path.ids[-1]
    cycle = kept_cycle(g, at, mg.loop_edge, lambda lab: bool(lab[2].output))
    stamp = count(1)
    fresh = lambda moves: [(mv, next(stamp)) for mv in moves]
    replay2, replay1 = _fire2(t), _fire1(t)
    start = (t.initial, t.initial_valuation, t.initial, t.initial_valuation)
    u_recs, node = lift_path(start, fresh(_moves(pre)), replay2)
    more, loop, node = lift_cycle(node, fresh(_moves(cycle)), replay2)
    u_recs = u_recs + more
    w_recs, solo = lift_path((node[2], node[3]), fresh(_moves(post)), replay1)
    b = mg.square.single_flagged()
    b.initial = [(solo[0], False)]
    run = buchi_nonempty(b)
    if run is None:
        raise WitnessError("no final run from a state found coaccessible")
    z_stem, nd = lift_path(solo, fresh(run.stem_labels), replay1)
    z_more, z_loop, _ = lift_cycle(nd, fresh(run.loop_labels), replay1)
    p = _pattern(u_recs, loop, w_recs, z_stem + z_more, z_loop)
    if not check_continuity_pattern(t, p):
        raise WitnessError("continuity pattern does not replay")
    stats["millis"] = _elapsed(t0)
    return Verdict(False, p, TEST_FREE, stats)


# --------------------------------------------------------------------------
# Routing and equivalence


def functional(t: TransducerSpec, path: str = "auto", size: int | None = None, cap: int = DEFAULT_CAP) -> Verdict:
    """``path`` is ``auto``, ``general`` or ``test-free``."""
    if path == TEST_FREE or (path == "auto" and is_test_free(t) and t.registers):
        return testfree_functional(t, cap)
    return nrt_functional(t, size, cap)


def continuous(t: TransducerSpec, path: str = "auto", size: int | None = None, cap: int = DEFAULT_CAP) -> Verdict:
    if path == TEST_FREE or (path == "auto" and is_test_free(t) and t.registers):
        return testfree_continuous(t, cap)
    return nrt_continuous(t, size, cap)


def _rename_registers(tr: Transition, lam: dict, prefix: str, fill) -> Transition:
    return Transition(
        prefix + tr.source,
        tr.label,
        substitute(tr.test, lam),
        frozenset(lam[r] for r in tr.assign),
        tuple((g, fill if r is None else lam[r]) for g, r in tr.output),
        prefix + tr.target,
        tuple((lam[a], lam[b]) for a, b in tr.copies),
    )


def disjoint_union(t1: TransducerSpec, t2: TransducerSpec) -> TransducerSpec:
    """A machine whose relation is the union of both relations.

    Registers are shared positionally (only one branch ever runs), so the
    union has ``max(k1, k2)`` registers.  A fresh initial state copies the
    initial transitions of both machines.
    """
    k = max(len(t1.registers), len(t2.registers))
    regs = tuple(f"r{i}" for i in range(1, k + 1))
    fill = regs[0] if regs else None
    init = "init"
    trs = []
    for t, prefix in ((t1, "L."), (t2, "R.")):
        lam = dict(zip(t.registers, regs))
        for tr in t.transitions:
            new = _rename_registers(tr, lam, prefix, fill)
            trs.append(new)
            if tr.source == t.initial:
                trs.append(Transition(init, new.label, new.test, new.assign, new.output, new.target, new.copies))

    def merge(a, b):
        return tuple(dict.fromkeys(a + b))

    kind = "nft" if t1.kind == t2.kind == "nft" else "nrt"
    return TransducerSpec(
        kind=kind,
        name=f"{t1.name}_or_{t2.name}",
        states=(init,) + tuple("L." + q for q in t1.states) + tuple("R." + q for q in t2.states),
        registers=regs,
        input_labels=merge(t1.input_labels, t2.input_labels),
        output_labels=merge(t1.output_labels, t2.output_labels),
        initial=init,
        accepting=frozenset("L." + q for q in t1.accepting) | frozenset("R." + q for q in t2.accepting),
        transitions=tuple(trs),
    ).validate()


def equivalent_on_common_domain(
    t1: TransducerSpec, t2: TransducerSpec, path: str = "auto", cap: int = DEFAULT_CAP
) -> Verdict:
    """Do both machines agree wherever both are defined?"""
    for name, t in (("first", t1), ("second", t2)):
        v = functional(t, path, cap=cap)
        if not v.answer:
            raise PreconditionError(f"the {name} machine is not functional", witness=v)
    return functional(disjoint_union(t1, t2), path, cap=cap)
