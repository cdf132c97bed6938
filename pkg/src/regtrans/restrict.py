"""Finite-data restriction of register machines.

A register machine read over a finite data set ``X`` is a finite Büchi
machine whose states are pairs ``(state, valuation)``.  Only equality is
observable, so two nodes that differ by a permutation of ``X`` fixing the
*pinned* values behave identically.  :class:`DataSpace` exploits this: a node
is stored in canonical form, where non-pinned values are renamed in order of
first occurrence.  Pinning every value of ``X`` gives the plain concrete
expansion.

Paths found in the canonical graph are turned back into concrete data
words by replaying them on actual valuations (see :func:`lift_path` and
:func:`lift_cycle`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

from .errors import PreconditionError, ResourceError
from .model import D0, LassoWord, TransducerSpec, Transition, fire, successors
from .omega import BuchiGraph, ExplicitGraph, buchi_nonempty, explore

DEFAULT_CAP = 5_000_000


class DataSpace:
    """A finite data set with a symmetry-breaking subset of pinned values."""

    def __init__(self, values: Iterable[int], pinned: Iterable[int] = (D0,)):
        self.values = tuple(sorted(set(values)))
        self.pinned = frozenset(pinned)
        if not self.pinned <= set(self.values):
            raise ValueError("pinned values must belong to the data set")
        self.free = tuple(v for v in self.values if v not in self.pinned)
        self._pinned_sorted = tuple(sorted(self.pinned))

    @classmethod
    def symmetric(cls, size: int, pinned: Iterable[int] = (D0,)) -> "DataSpace":
        pinned = set(pinned) | {D0}
        values = set(pinned)
        v = 0
        while len(values) < max(size, len(pinned)):
            values.add(v)
            v += 1
        return cls(values, pinned)

    @classmethod
    def concrete(cls, values: Iterable[int]) -> "DataSpace":
        values = tuple(values)
        return cls(values, values)

    @property
    def size(self) -> int:
        return len(self.values)

    @property
    def is_concrete(self) -> bool:
        return not self.free

    def __repr__(self):
        return f"DataSpace(values={list(self.values)}, pinned={sorted(self.pinned)})"

    def canonical(self, data: Sequence[int]) -> tuple:
        """Rename non-pinned values by first occurrence."""
        if not self.free:
            return tuple(data)
        pinned, free = self.pinned, self.free
        m: dict = {}
        out = []
        for d in data:
            if d in pinned:
                out.append(d)
            else:
                c = m.get(d)
                if c is None:
                    c = free[len(m)]
                    m[d] = c
                out.append(c)
        return tuple(out)

    def letter_data(self, used: Iterable[int]) -> list:
        """Data worth trying as the next letter's datum, up to symmetry.

        ``used`` are the values in the current (canonical) node.
        """
        if not self.free:
            return list(self.values)
        used = set(used)
        out = list(self._pinned_sorted)
        extra = sorted(d for d in used if d not in self.pinned)
        out.extend(extra)
        if len(self.pinned) + len(extra) < len(self.values):
            out.append(self.fresh(used))
        return out

    def fresh(self, used: Iterable[int]):
        used = set(used)
        for v in self.free:
            if v not in used:
                return v
        return None

    def inverse(self, actual: Sequence[int]) -> dict:
        """Map canonical values back to the ``actual`` data they stand for."""
        if not self.free:
            return {}
        pinned, free = self.pinned, self.free
        inv: dict = {}
        seen: dict = {}
        for d in actual:
            if d not in pinned and d not in seen:
                c = free[len(seen)]
                seen[d] = c
                inv[c] = d
        return inv

    def actual_datum(self, d: int, actual: Sequence[int], inv: dict | None = None) -> int:
        """Concrete datum for the canonical letter datum ``d``."""
        if d in self.pinned:
            return d
        if inv is None:
            inv = self.inverse(actual)
        if d in inv:
            return inv[d]
        used = set(actual) | self.pinned
        for v in self.values:
            if v not in used:
                return v
        raise ValueError("no fresh value left in the data set")


def theorem_data_set(t: TransducerSpec, purpose: str) -> tuple:
    """The data set the decision procedures need for ``purpose``.

    ``functionality`` and ``continuity`` use ``2k+3`` values, ``emptiness``
    uses ``k+1``; ``0`` is always included.
    """
    k = len(t.registers)
    if purpose in ("functionality", "continuity"):
        return tuple(range(2 * k + 3))
    if purpose == "emptiness":
        return tuple(range(k + 1))
    raise ValueError(f"unknown purpose {purpose!r}")


# --------------------------------------------------------------------------
# Lifting canonical paths to concrete data


def lift_path(start, edges: Sequence, replay: Callable):
    """Replay ``edges`` from the concrete node ``start``.

    ``replay(node, edge) -> (record, next_node)``.  Returns the records and
    the final concrete node.
    """
    node = start
    records = []
    for e in edges:
        rec, node = replay(node, e)
        records.append(rec)
    return records, node


def lift_cycle(start, edges: Sequence, replay: Callable, max_rounds: int = 100_000):
    """Repeat a canonical cycle until the concrete node repeats.

    Returns ``(stem_records, loop_records, loop_start_node)``: the rounds
    before the first repeated concrete node become part of the stem.
    """
    if not edges:
        raise ValueError("empty cycle")
    seen = {start: 0}
    rounds = []
    node = start
    for i in range(1, max_rounds + 1):
        recs, node = lift_path(node, edges, replay)
        rounds.append(recs)
        if node in seen:
            j = seen[node]
            stem = [r for rr in rounds[:j] for r in rr]
            loop = [r for rr in rounds[j:] for r in rr]
            return stem, loop, node
        seen[node] = i
    raise ResourceError("lifted cycle did not close")


# --------------------------------------------------------------------------
# Expanded machines


class ExpandedMachine:
    """``t`` read over the data of ``space``, from ``initial``.

    Nodes are ``(state, valuation)`` with valuations in canonical form.
    Edges are labelled ``(letter, output, transition)`` in the coordinates
    of the source node.
    """

    def __init__(self, t: TransducerSpec, space: DataSpace, initial: tuple | None = None, cap: int = DEFAULT_CAP):
        self.t = t
        self.space = space
        vals = t.initial_valuation if initial is None else tuple(initial)
        if len(vals) != len(t.registers):
            raise PreconditionError("initial valuation does not match the registers")
        if not set(vals) <= set(space.values):
            raise PreconditionError("initial valuation uses data outside the data set")
        if any(v not in space.pinned for v in vals) and space.free:
            raise PreconditionError("initial data must be pinned")
        self.initial_valuation = vals
        self.cap = cap
        self.input_labels = t.input_labels
        self._graph: ExplicitGraph | None = None

    # -- lazy view -----------------------------------------------------------

    @property
    def initial_node(self):
        return (self.t.initial, self.initial_valuation)

    @property
    def initial_states(self):
        return [self.initial_node]

    def is_accepting(self, node) -> bool:
        return node[0] in self.t.accepting

    def letters(self, node):
        q, vals = node
        labels = self.t.labels_from.get(q, ())
        data = self.space.letter_data(vals)
        return [(a, d) for a in self.t.input_labels if a in labels for d in data]

    def step(self, node, letter):
        """``[(output, next_node, transition)]`` for one canonical letter."""
        q, vals = node
        canon = self.space.canonical
        return [(out, (q2, canon(v2)), tr) for tr, q2, v2, out in successors(self.t, q, vals, letter)]

    def successors(self, node):
        res = []
        for letter in self.letters(node):
            for out, nxt, tr in self.step(node, letter):
                res.append(((letter, out, tr), nxt))
        return res

    def buchi(self, accepting=None) -> BuchiGraph:
        return BuchiGraph(
            initial=[self.initial_node],
            successors=self.successors,
            accepting=accepting or [self.is_accepting],
        )

    # -- explicit view -------------------------------------------------------

    def materialize(self) -> ExplicitGraph:
        if self._graph is None:
            self._graph = explore(self.buchi(), self.cap)
        return self._graph

    def states(self):
        return list(self.materialize().nodes)

    def __len__(self):
        return len(self.materialize())

    # -- lifting -------------------------------------------------------------

    def replay(self, node, edge):
        """Concrete counterpart of a canonical edge from concrete ``node``."""
        (label, d), _, tr = edge
        q, vals = node
        datum = self.space.actual_datum(d, vals)
        v2, out = fire(self.t, tr, vals, datum)
        return ((label, datum), out, tr), (tr.target, v2)

    def lift_lasso(self, run) -> tuple:
        """Concrete ``(input lasso, output lasso or None, run records)``."""
        start = self.initial_node
        stem, node = lift_path(start, run.stem_labels, self.replay)
        loop_stem, loop, _ = lift_cycle(node, run.loop_labels, self.replay)
        stem = stem + loop_stem
        x = LassoWord(tuple(r[0] for r in stem), tuple(r[0] for r in loop))
        head = tuple(a for r in stem for a in r[1])
        per = tuple(a for r in loop for a in r[1])
        y = LassoWord(head, per) if per else None
        return x, y, (stem, loop)

    # -- export --------------------------------------------------------------

    def to_nft(self, name: str | None = None) -> TransducerSpec:
        """The expansion as a finite transducer over letters ``label.datum``.

        Only meaningful for concrete data spaces.
        """
        if not self.space.is_concrete:
            raise PreconditionError("only concrete expansions can be exported")
        g = self.materialize()

        def sname(node):
            q, vals = node
            return q if not vals else f"{q}_{'.'.join(map(str, vals))}"

        def lab(a, d):
            return f"{a}.{d}"

        transitions = []
        out_labels: dict = {}
        for i, outs in enumerate(g.edges):
            src = sname(g.nodes[i])
            for ((a, d), out, _), j in outs:
                o = tuple((lab(b, e), None) for b, e in out)
                for b, _ in o:
                    out_labels[b] = None
                transitions.append(Transition(src, lab(a, d), _true(), frozenset(), o, sname(g.nodes[j])))
        states = tuple(sname(n) for n in g.nodes)
        accepting = frozenset(sname(n) for n in g.nodes if self.is_accepting(n))
        inputs = tuple(lab(a, d) for a in self.t.input_labels for d in self.space.values)
        outputs = tuple(lab(b, d) for b in self.t.output_labels for d in self.space.values)
        return TransducerSpec(
            kind="nft",
            name=name or f"{self.t.name}_restricted",
            states=states,
            registers=(),
            input_labels=inputs,
            output_labels=outputs,
            initial=sname(self.initial_node),
            accepting=accepting,
            transitions=tuple(transitions),
        )


def _true():
    from .model import TRUE

    return TRUE


def restrict_to_finite_data(
    t: TransducerSpec,
    values: Iterable[int],
    initial: dict | tuple | None = None,
    symmetric: bool = False,
    cap: int = DEFAULT_CAP,
) -> ExpandedMachine:
    """Expand ``t`` over the data set ``values``.

    With ``symmetric=False`` every value is kept apart (the plain finite
    transducer).  With ``symmetric=True`` nodes are identified up to
    permutations fixing ``0`` and the initial data.
    """
    values = tuple(values)
    if isinstance(initial, dict):
        initial = t.valuation(initial)
    vals = t.initial_valuation if initial is None else tuple(initial)
    if not set(vals) <= set(values):
        raise PreconditionError("initial valuation uses data outside the data set")
    if symmetric:
        pinned = set(vals) | ({D0} if D0 in values else set())
        space = DataSpace(values, pinned)
    else:
        space = DataSpace.concrete(values)
    return ExpandedMachine(t, space, vals, cap)


def symmetric_expansion(t: TransducerSpec, size: int, cap: int = DEFAULT_CAP) -> ExpandedMachine:
    """Expansion over ``{0, ..., size-1}`` from the all-``0`` valuation."""
    return ExpandedMachine(t, DataSpace.symmetric(size), None, cap)


# --------------------------------------------------------------------------
# Emptiness of register automata


class Emptiness(NamedTuple):
    empty: bool
    witness: LassoWord | None


def emptiness_space(t: TransducerSpec, initial: tuple) -> DataSpace:
    """``range(initial) ∪ {0}`` pinned, plus ``k+1`` fresh values."""
    pinned = set(initial) | {D0}
    values = set(pinned)
    v = 0
    fresh = 0
    while fresh < len(t.registers) + 1:
        if v not in values:
            values.add(v)
            fresh += 1
        v += 1
    return DataSpace(values, pinned)


def nra_emptiness(
    a: TransducerSpec,
    initial: dict | tuple | None = None,
    state: str | None = None,
    cap: int = DEFAULT_CAP,
) -> Emptiness:
    """Is the language of ``a`` from the given configuration empty?

    Outputs of ``a`` are ignored, so any register transducer can be passed.
    Acceptance is plain Büchi.  A nonempty language comes with a witness.
    """
    if isinstance(initial, dict):
        initial = a.valuation(initial)
    vals = a.initial_valuation if initial is None else tuple(initial)
    space = emptiness_space(a, vals)
    m = ExpandedMachine(a, space, vals, cap)
    if state is not None:
        m = _with_initial_state(m, state)
    run = buchi_nonempty(m.buchi())
    if run is None:
        return Emptiness(True, None)
    x, _, _ = m.lift_lasso(run)
    return Emptiness(False, x)


def _with_initial_state(m: ExpandedMachine, state: str) -> ExpandedMachine:
    t = m.t.with_transitions(m.t.transitions, initial=state)
    return ExpandedMachine(t, m.space, m.initial_valuation, m.cap)
