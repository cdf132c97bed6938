"""Normal forms and structural clean-ups of register transducers."""

from __future__ import annotations

from collections import deque
from itertools import combinations
from typing import NamedTuple

from .errors import DefinitionError, PreconditionError
from .model import (
    TRUE,
    And,
    Bottom,
    Eq,
    ExplicitTest,
    LassoWord,
    Neq,
    Not,
    Or,
    Top,
    TransducerSpec,
    Transition,
    conj,
    eval_test,
)
from .omega import cycle_through, cyclic_nodes, explore, fair_nodes, path_between
from .restrict import DataSpace, ExpandedMachine, emptiness_space, lift_cycle, lift_path, restrict_to_finite_data


# --------------------------------------------------------------------------
# Explicit tests


def subsets(items):
    items = tuple(items)
    for n in range(len(items) + 1):
        for c in combinations(items, n):
            yield frozenset(c)


def satisfying_types(test, registers) -> list:
    """All ``E ⊆ registers`` whose explicit test implies ``test``."""
    out = []
    for e in subsets(registers):
        vals = {r: (1 if r in e else 2) for r in registers}
        if eval_test(test, vals, 1):
            out.append(e)
    return out


def is_explicit(t: TransducerSpec) -> bool:
    regs = tuple(t.registers)
    return all(isinstance(tr.test, ExplicitTest) and tr.test.registers == regs for tr in t.transitions)


def expand_tests(t: TransducerSpec) -> TransducerSpec:
    """Replace every test by the explicit equality types that imply it.

    A transition with test ``φ`` becomes one transition per ``E ⊆ R`` such
    that "the datum equals exactly the registers in ``E``" implies ``φ``.
    """
    regs = tuple(t.registers)
    out = []
    for tr in t.transitions:
        for e in satisfying_types(tr.test, regs):
            out.append(
                Transition(tr.source, tr.label, ExplicitTest(e, regs), tr.assign, tr.output, tr.target, tr.copies)
            )
    return t.with_transitions(out)


# --------------------------------------------------------------------------
# Reassignments


def fresh_register(t: TransducerSpec, base: str = "s") -> str:
    taken = set(t.registers)
    if base not in taken:
        return base
    i = 1
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


def substitute(test, lam: dict):
    """Rename the registers of ``test`` through ``lam``."""
    if isinstance(test, (Top, Bottom)):
        return test
    if isinstance(test, Eq):
        return Eq(lam[test.register])
    if isinstance(test, Neq):
        return Neq(lam[test.register])
    if isinstance(test, And):
        return And(substitute(test.left, lam), substitute(test.right, lam))
    if isinstance(test, Or):
        return Or(substitute(test.left, lam), substitute(test.right, lam))
    if isinstance(test, Not):
        return Not(substitute(test.inner, lam))
    if isinstance(test, ExplicitTest):
        return substitute(test.as_formula(), lam)
    raise TypeError(f"not a test formula: {test!r}")


def remove_reassignments(t: TransducerSpec, extra: str | None = None) -> TransducerSpec:
    """Equivalent machine without ``r := r'`` instructions.

    States of the result are pairs of a state and a substitution ``λ`` that
    tells which register of the result currently holds the value of each
    original register.  One register is added so that a free slot always
    exists for the current datum.
    """
    for tr in t.transitions:
        targets = list(tr.assign) + [d for d, _ in tr.copies]
        if len(targets) != len(set(targets)):
            raise DefinitionError("a register is assigned more than once on one transition")
    if not is_explicit(t):
        t = expand_tests(t)
    regs = tuple(t.registers)
    s = extra or fresh_register(t)
    new_regs = regs + (s,)
    pos = {r: i for i, r in enumerate(new_regs)}

    def name(q, lam_t):
        return f"{q}@{'.'.join(str(pos[r]) for r in lam_t)}" if regs else q

    by_source: dict = {}
    for tr in t.transitions:
        by_source.setdefault(tr.source, []).append(tr)

    ident = tuple(regs)
    start = (t.initial, ident)
    seen = {start}
    order = [start]
    queue = deque([start])
    transitions = []
    while queue:
        q, lam_t = queue.popleft()
        lam = dict(zip(regs, lam_t))
        image = set(lam_t)
        r0 = next(r for r in new_regs if r not in image)
        for tr in by_source.get(q, ()):
            e = tr.test.eq_set
            eq_image = {lam[r] for r in e}
            neq_image = {lam[r] for r in regs if r not in e}
            if eq_image & neq_image:
                continue  # the equality type cannot hold under λ
            test = substitute(tr.test, lam) if regs else TRUE
            mid = dict(lam)
            assign = frozenset()
            if tr.assign:
                assign = frozenset({r0})
                for r in tr.assign:
                    mid[r] = r0
            new = dict(mid)
            for dst, src in tr.copies:
                new[dst] = mid[src]
            out = tuple((g, None if r is None else new[r]) for g, r in tr.output)
            nxt = (tr.target, tuple(new[r] for r in regs))
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                queue.append(nxt)
            transitions.append(Transition(name(q, lam_t), tr.label, test, assign, out, name(*nxt)))
    states = tuple(name(*n) for n in order)
    accepting = frozenset(name(*n) for n in order if n[0] in t.accepting)
    return TransducerSpec(
        kind=t.kind,
        name=t.name,
        states=states,
        registers=new_regs,
        input_labels=t.input_labels,
        output_labels=t.output_labels,
        initial=name(*start),
        accepting=accepting,
        transitions=tuple(transitions),
    )


# --------------------------------------------------------------------------
# Test-freeness


def fold_constants(test):
    """Simplify ``true``/``false`` sub-formulas (no other reasoning)."""
    if isinstance(test, And):
        a, b = fold_constants(test.left), fold_constants(test.right)
        if isinstance(a, Bottom) or isinstance(b, Bottom):
            return Bottom()
        if isinstance(a, Top):
            return b
        if isinstance(b, Top):
            return a
        return And(a, b)
    if isinstance(test, Or):
        a, b = fold_constants(test.left), fold_constants(test.right)
        if isinstance(a, Top) or isinstance(b, Top):
            return Top()
        if isinstance(a, Bottom):
            return b
        if isinstance(b, Bottom):
            return a
        return Or(a, b)
    if isinstance(test, Not):
        a = fold_constants(test.inner)
        if isinstance(a, Top):
            return Bottom()
        if isinstance(a, Bottom):
            return Top()
        return Not(a)
    if isinstance(test, ExplicitTest) and not test.registers:
        return Top()
    return test


def is_test_free(t: TransducerSpec) -> bool:
    return all(isinstance(fold_constants(tr.test), Top) for tr in t.transitions)


def skeleton(t: TransducerSpec) -> TransducerSpec:
    """The finite transducer obtained by forgetting registers and data."""
    trs = tuple(
        Transition(tr.source, tr.label, TRUE, frozenset(), tuple((g, None) for g, _ in tr.output), tr.target)
        for tr in t.transitions
    )
    return TransducerSpec(
        kind="nft",
        name=f"{t.name}_skeleton",
        states=t.states,
        registers=(),
        input_labels=t.input_labels,
        output_labels=t.output_labels,
        initial=t.initial,
        accepting=t.accepting,
        transitions=trs,
    )


# --------------------------------------------------------------------------
# Trimming


def useful_states(t: TransducerSpec) -> set:
    """States both reachable and Büchi-coaccessible, reading labels only."""
    from .omega import BuchiGraph

    by_source: dict = {}
    for tr in t.transitions:
        by_source.setdefault(tr.source, []).append((tr, tr.target))
    g = explore(BuchiGraph([t.initial], lambda q: by_source.get(q, [])))
    good = fair_nodes(g, [lambda q: q in t.accepting])
    return {g.nodes[i] for i in good}


def trim(t: TransducerSpec, values=None) -> TransducerSpec:
    """Drop states that are unreachable or from which no final run exists.

    Machines whose transitions do not depend on data (finite transducers
    and test-free machines) are trimmed directly.  Other machines need a
    finite data set ``values``; they are expanded first and the trimmed
    expansion is returned as a finite transducer.
    """
    if values is not None:
        return trim(restrict_to_finite_data(t, values).to_nft())
    if not is_test_free(t):
        raise PreconditionError("trimming a machine with tests needs a finite data set")
    keep = useful_states(t)
    trs = tuple(tr for tr in t.transitions if tr.source in keep and tr.target in keep)
    states = tuple(q for q in t.states if q in keep or q == t.initial)
    return t.with_transitions(trs, states=states, accepting=frozenset(q for q in t.accepting if q in keep))


# --------------------------------------------------------------------------
# Infinite outputs


class OutputCheck(NamedTuple):
    ok: bool
    witness: LassoWord | None


def validate_infinite_output(t: TransducerSpec) -> OutputCheck:
    """Check that every accepting run produces an infinite output.

    Looks for a reachable accepting cycle all of whose transitions output
    nothing, over ``k+1`` data values.  The offending input is returned.
    """
    space = emptiness_space(t, t.initial_valuation)
    m = ExpandedMachine(t, space)
    g = m.materialize()
    silent = lambda lab: not lab[1]
    loops = cyclic_nodes(g, silent)
    targets = {i for i in loops if m.is_accepting(g.nodes[i])}
    if not targets:
        return OutputCheck(True, None)
    stem_ids, stem_labels = path_between(g, g.initial, lambda v: v in targets)
    _, loop_labels = cycle_through(g, stem_ids[-1], silent)
    stem, node = lift_path(m.initial_node, stem_labels, m.replay)
    more, loop, _ = lift_cycle(node, loop_labels, m.replay)
    stem = stem + more
    return OutputCheck(False, LassoWord(tuple(r[0] for r in stem), tuple(r[0] for r in loop)))
