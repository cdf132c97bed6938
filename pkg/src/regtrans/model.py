"""Data words, register transducers and their operational semantics.

Data values are natural numbers and ``0`` plays the role of the
distinguished initial datum: every register holds ``0`` before the first
letter is read.  A letter is a pair ``(label, datum)``.

Internally a register valuation is a tuple aligned with
``TransducerSpec.registers``; the public helpers also accept and return
plain dictionaries where that is more convenient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple

from .errors import DefinitionError

D0 = 0

KINDS = ("nrt", "nra", "nft")


# --------------------------------------------------------------------------
# Test formulas


class Test:
    """Boolean condition on the current datum and the register contents."""

    __slots__ = ()

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True)
class Top(Test):
    def __str__(self):
        return "true"


@dataclass(frozen=True)
class Bottom(Test):
    def __str__(self):
        return "false"


@dataclass(frozen=True)
class Eq(Test):
    register: str

    def __str__(self):
        return f"={self.register}"


@dataclass(frozen=True)
class Neq(Test):
    register: str

    def __str__(self):
        return f"!={self.register}"


@dataclass(frozen=True)
class And(Test):
    left: Test
    right: Test

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or(Test):
    left: Test
    right: Test

    def __str__(self):
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Not(Test):
    inner: Test

    def __str__(self):
        return f"!{self.inner}"


@dataclass(frozen=True)
class ExplicitTest(Test):
    """Holds iff the datum equals exactly the registers in ``eq_set``.

    ``registers`` lists the whole register set the test ranges over, so that
    the complement is well defined.
    """

    eq_set: frozenset
    registers: tuple

    def as_formula(self) -> Test:
        parts = [Eq(r) if r in self.eq_set else Neq(r) for r in self.registers]
        if not parts:
            return Top()
        out = parts[0]
        for p in parts[1:]:
            out = And(out, p)
        return out

    def __str__(self):
        if not self.registers:
            return "true"
        return " & ".join(
            f"={r}" if r in self.eq_set else f"!={r}" for r in self.registers
        )


TRUE = Top()
FALSE = Bottom()


def conj(tests: Iterable[Test]) -> Test:
    out = None
    for t in tests:
        out = t if out is None else And(out, t)
    return TRUE if out is None else out


def test_registers(test: Test) -> set:
    """Registers mentioned anywhere in ``test``."""
    if isinstance(test, (Eq, Neq)):
        return {test.register}
    if isinstance(test, (And, Or)):
        return test_registers(test.left) | test_registers(test.right)
    if isinstance(test, Not):
        return test_registers(test.inner)
    if isinstance(test, ExplicitTest):
        return set(test.registers)
    return set()


def eval_test(test: Test, valuation: Mapping[str, int], datum: int) -> bool:
    """Evaluate ``test`` for the current ``datum`` under ``valuation``."""
    if isinstance(test, Top):
        return True
    if isinstance(test, Bottom):
        return False
    if isinstance(test, (Eq, Neq)):
        if test.register not in valuation:
            raise DefinitionError(f"unknown register {test.register!r}")
        same = valuation[test.register] == datum
        return same if isinstance(test, Eq) else not same
    if isinstance(test, And):
        return eval_test(test.left, valuation, datum) and eval_test(
            test.right, valuation, datum
        )
    if isinstance(test, Or):
        return eval_test(test.left, valuation, datum) or eval_test(
            test.right, valuation, datum
        )
    if isinstance(test, Not):
        return not eval_test(test.inner, valuation, datum)
    if isinstance(test, ExplicitTest):
        for r in test.registers:
            if r not in valuation:
                raise DefinitionError(f"unknown register {r!r}")
        return all((valuation[r] == datum) == (r in test.eq_set) for r in test.registers)
    raise TypeError(f"not a test formula: {test!r}")


def compile_test(test: Test, index: Mapping[str, int]) -> Callable[[tuple, int], bool]:
    """Turn ``test`` into a fast predicate over valuation tuples."""
    if isinstance(test, Top):
        return lambda v, d: True
    if isinstance(test, Bottom):
        return lambda v, d: False
    if isinstance(test, (Eq, Neq)):
        try:
            i = index[test.register]
        except KeyError:
            raise DefinitionError(f"unknown register {test.register!r}") from None
        if isinstance(test, Eq):
            return lambda v, d: v[i] == d
        return lambda v, d: v[i] != d
    if isinstance(test, And):
        a, b = compile_test(test.left, index), compile_test(test.right, index)
        return lambda v, d: a(v, d) and b(v, d)
    if isinstance(test, Or):
        a, b = compile_test(test.left, index), compile_test(test.right, index)
        return lambda v, d: a(v, d) or b(v, d)
    if isinstance(test, Not):
        a = compile_test(test.inner, index)
        return lambda v, d: not a(v, d)
    if isinstance(test, ExplicitTest):
        try:
            eq = tuple(index[r] for r in test.registers if r in test.eq_set)
            neq = tuple(index[r] for r in test.registers if r not in test.eq_set)
        except KeyError as exc:
            raise DefinitionError(f"unknown register {exc.args[0]!r}") from None
        return lambda v, d: all(v[i] == d for i in eq) and all(v[i] != d for i in neq)
    raise TypeError(f"not a test formula: {test!r}")


# --------------------------------------------------------------------------
# Machines


@dataclass(frozen=True)
class Transition:
    """``source --label, test | assign, output--> target``.

    ``assign`` is the set of registers that receive the current datum.
    ``copies`` holds reassignment instructions ``(dst, src)`` meaning
    ``dst := src``; they run after the datum assignments.  ``output`` is a
    tuple of ``(output label, register)`` pairs; the register is ``None``
    for data-free machines, in which case the emitted datum is ``0``.
    """

    source: str
    label: str
    test: Test
    assign: frozenset
    output: tuple
    target: str
    copies: tuple = ()

    @property
    def has_copies(self) -> bool:
        return bool(self.copies)


class _Compiled(NamedTuple):
    test: Callable[[tuple, int], bool]
    assign: tuple
    copies: tuple
    output: tuple
    target: str
    transition: Transition


@dataclass(frozen=True)
class TransducerSpec:
    kind: str
    name: str
    states: tuple
    registers: tuple
    input_labels: tuple
    output_labels: tuple
    initial: str
    accepting: frozenset
    transitions: tuple

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "registers", tuple(self.registers))
        object.__setattr__(self, "input_labels", tuple(self.input_labels))
        object.__setattr__(self, "output_labels", tuple(self.output_labels))
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        object.__setattr__(self, "transitions", tuple(self.transitions))

    # -- validation -------------------------------------------------------

    def validate(self) -> "TransducerSpec":
        """Raise :class:`DefinitionError` unless the machine is well formed."""
        if self.kind not in KINDS:
            raise DefinitionError(f"unknown machine kind {self.kind!r}")
        states = set(self.states)
        regs = set(self.registers)
        if len(regs) != len(self.registers):
            raise DefinitionError("duplicate register declaration")
        if not self.input_labels:
            raise DefinitionError("input alphabet must not be empty")
        if self.initial not in states:
            raise DefinitionError(f"unknown initial state {self.initial!r}")
        if not self.accepting:
            raise DefinitionError("accepting set must not be empty")
        for q in self.accepting:
            if q not in states:
                raise DefinitionError(f"unknown accepting state {q!r}")
        inputs, outputs = set(self.input_labels), set(self.output_labels)
        for tr in self.transitions:
            for q in (tr.source, tr.target):
                if q not in states:
                    raise DefinitionError(f"unknown state {q!r}")
            if tr.label not in inputs:
                raise DefinitionError(f"unknown input label {tr.label!r}")
            for r in test_registers(tr.test):
                if r not in regs:
                    raise DefinitionError(f"unknown register {r!r} in test")
            for r in tr.assign:
                if r not in regs:
                    raise DefinitionError(f"unknown register {r!r} in store")
            targets = list(tr.assign) + [dst for dst, _ in tr.copies]
            if len(targets) != len(set(targets)):
                raise DefinitionError(
                    "a register is assigned more than once on one transition"
                )
            for dst, src in tr.copies:
                for r in (dst, src):
                    if r not in regs:
                        raise DefinitionError(f"unknown register {r!r} in store")
            for g, r in tr.output:
                if g not in outputs:
                    raise DefinitionError(f"unknown output label {g!r}")
                if r is None:
                    if self.registers:
                        raise DefinitionError("output letter without register")
                elif r not in regs:
                    raise DefinitionError(f"unknown register {r!r} in output")
            if self.kind == "nra" and tr.output:
                raise DefinitionError("register automata have no outputs")
            if self.kind == "nft" and not isinstance(tr.test, Top):
                raise DefinitionError("finite transducers have no tests")
        if self.kind == "nft" and self.registers:
            raise DefinitionError("finite transducers have no registers")
        return self

    # -- helpers ----------------------------------------------------------

    @property
    def k(self) -> int:
        return len(self.registers)

    @cached_property
    def register_index(self) -> dict:
        return {r: i for i, r in enumerate(self.registers)}

    @cached_property
    def _table(self) -> dict:
        idx = self.register_index
        table: dict = {}
        for tr in self.transitions:
            ct = _Compiled(
                compile_test(tr.test, idx),
                tuple(sorted(idx[r] for r in tr.assign)),
                tuple((idx[a], idx[b]) for a, b in tr.copies),
                tuple((g, -1 if r is None else idx[r]) for g, r in tr.output),
                tr.target,
                tr,
            )
            table.setdefault((tr.source, tr.label), []).append(ct)
        return table

    def compiled(self, state: str, label: str) -> list:
        return self._table.get((state, label), [])

    @cached_property
    def labels_from(self) -> dict:
        out: dict = {}
        for tr in self.transitions:
            out.setdefault(tr.source, set()).add(tr.label)
        return out

    @property
    def initial_valuation(self) -> tuple:
        return (D0,) * len(self.registers)

    @property
    def initial_configuration(self) -> "Configuration":
        return Configuration(self.initial, self.initial_valuation)

    def valuation(self, mapping: Mapping[str, int]) -> tuple:
        return tuple(mapping.get(r, D0) for r in self.registers)

    def valuation_dict(self, vals: tuple) -> dict:
        return dict(zip(self.registers, vals))

    @property
    def max_output_length(self) -> int:
        return max((len(tr.output) for tr in self.transitions), default=0)

    def with_transitions(self, transitions, **changes) -> "TransducerSpec":
        fields = dict(
            kind=self.kind,
            name=self.name,
            states=self.states,
            registers=self.registers,
            input_labels=self.input_labels,
            output_labels=self.output_labels,
            initial=self.initial,
            accepting=self.accepting,
            transitions=tuple(transitions),
        )
        fields.update(changes)
        return TransducerSpec(**fields)


class Configuration(NamedTuple):
    state: str
    valuation: tuple


def apply_transition(ct: _Compiled, vals: tuple, datum: int):
    """Return ``(new valuation, output word)`` for a compiled transition."""
    if ct.assign or ct.copies:
        v = list(vals)
        for i in ct.assign:
            v[i] = datum
        if ct.copies:
            mid = tuple(v)
            for dst, src in ct.copies:
                v[dst] = mid[src]
        vals = tuple(v)
    out = tuple((g, vals[i] if i >= 0 else D0) for g, i in ct.output)
    return vals, out


def successors(t: TransducerSpec, state: str, vals: tuple, letter) -> list:
    """All ``(transition, state', valuation', output)`` for one letter."""
    label, datum = letter
    res = []
    for ct in t.compiled(state, label):
        if ct.test(vals, datum):
            nv, out = apply_transition(ct, vals, datum)
            res.append((ct.transition, ct.target, nv, out))
    return res


def step(t: TransducerSpec, c: Configuration, letter) -> set:
    """Set of ``(configuration, output word)`` reachable by reading ``letter``.

    Output data are read from the valuation after the update.
    """
    return {
        (Configuration(q, v), out) for _, q, v, out in successors(t, c.state, c.valuation, letter)
    }


def valuation_of(t: TransducerSpec, c: Configuration) -> dict:
    return t.valuation_dict(c.valuation)


# --------------------------------------------------------------------------
# Lasso words


@dataclass(frozen=True)
class LassoWord:
    """The infinite word ``prefix · period^ω``."""

    prefix: tuple
    period: tuple

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(tuple(x) for x in self.prefix))
        object.__setattr__(self, "period", tuple(tuple(x) for x in self.period))
        if not self.period:
            raise ValueError("lasso period must be nonempty")

    @property
    def positions(self) -> int:
        return len(self.prefix) + len(self.period)

    def letter_at(self, pos: int):
        p = len(self.prefix)
        return self.prefix[pos] if pos < p else self.period[pos - p]

    def next_position(self, pos: int) -> int:
        pos += 1
        return len(self.prefix) if pos == self.positions else pos

    def __getitem__(self, i: int):
        p = len(self.prefix)
        if i < p:
            return self.prefix[i]
        return self.period[(i - p) % len(self.period)]

    def take(self, n: int) -> tuple:
        return tuple(self[i] for i in range(n))

    def __iter__(self) -> Iterator:
        i = 0
        while True:
            yield self[i]
            i += 1

    def data(self) -> set:
        return {d for _, d in self.prefix} | {d for _, d in self.period}

    def labels(self) -> set:
        return {a for a, _ in self.prefix} | {a for a, _ in self.period}

    def rename(self, mapping: Mapping[int, int]) -> "LassoWord":
        f = lambda w: tuple((a, mapping.get(d, d)) for a, d in w)
        return LassoWord(f(self.prefix), f(self.period))

    def normalized(self) -> "LassoWord":
        """Canonical representative: primitive period, shortest prefix."""
        period = self.period
        n = len(period)
        for p in range(1, n + 1):
            if n % p == 0 and period[:p] * (n // p) == period:
                period = period[:p]
                break
        prefix = self.prefix
        while prefix and prefix[-1] == period[-1]:
            prefix = prefix[:-1]
            period = (period[-1],) + period[:-1]
        return LassoWord(prefix, period)

    def same_word(self, other: "LassoWord") -> bool:
        return self.normalized() == other.normalized()

    def common_prefix_length(self, other: "LassoWord") -> int | None:
        """Length of the longest common prefix, ``None`` when equal."""
        if self.same_word(other):
            return None
        bound = max(len(self.prefix), len(other.prefix)) + len(self.period) * len(other.period) + 1
        for i in range(bound):
            if self[i] != other[i]:
                return i
        return bound  # unreachable for distinct ultimately periodic words

    def __str__(self):
        def item(x):
            return f"{x[0]}:{x[1]}"

        head = " ".join(item(x) for x in self.prefix)
        loop = " ".join(item(x) for x in self.period)
        return f"{head} ({loop})w" if head else f"({loop})w"


def lasso(prefix: Iterable, period: Iterable) -> LassoWord:
    return LassoWord(tuple(prefix), tuple(period))


# --------------------------------------------------------------------------
# Membership on lassos


def _product_graph(t: TransducerSpec, x: LassoWord):
    from .omega import BuchiGraph

    accepting = t.accepting

    def succ(node):
        q, vals, pos = node
        letter = x.letter_at(pos)
        nxt = x.next_position(pos)
        return [
            ((letter, out, tr), (q2, v2, nxt))
            for tr, q2, v2, out in successors(t, q, vals, letter)
        ]

    return BuchiGraph(
        initial=[(t.initial, t.initial_valuation, 0)],
        successors=succ,
        accepting=[lambda n: n[0] in accepting],
    )


def find_accepting_run(t: TransducerSpec, x: LassoWord):
    """An accepting run lasso of ``t`` on ``x``, or ``None``."""
    from .omega import buchi_nonempty

    return buchi_nonempty(_product_graph(t, x))


def accepts_lasso(t: TransducerSpec, x: LassoWord) -> bool:
    return find_accepting_run(t, x) is not None


def run_output(run) -> LassoWord | None:
    """Output lasso of a product run lasso, ``None`` if the output is finite."""
    head = tuple(a for (_, out, _) in run.stem_labels for a in out)
    loop = tuple(a for (_, out, _) in run.loop_labels for a in out)
    if not loop:
        return None
    return LassoWord(head, loop).normalized()


def outputs_on(t: TransducerSpec, x: LassoWord, limit: int = 16, budget: int = 200_000) -> set:
    """Outputs of simple accepting lassos of the run graph over ``x``.

    At most ``limit`` distinct outputs are collected; ``budget`` bounds the
    number of depth-first steps.
    """
    return enumerate_outputs(t, x, limit, budget)[0]


def enumerate_outputs(t: TransducerSpec, x: LassoWord, limit: int = 16, budget: int = 200_000):
    """Like :func:`outputs_on` but also reports whether enumeration finished."""
    from .omega import explore, fair_nodes

    g = explore(_product_graph(t, x))
    good = fair_nodes(g, [lambda n: n[0] in t.accepting])
    found: set = set()
    steps = 0
    complete = True
    for root in g.initial:
        if root not in good:
            continue
        path = [root]
        on_path = {root: 0}
        labels: list = []
        stack = [iter(g.edges[root])]
        while stack:
            steps += 1
            if steps > budget or len(found) >= limit:
                complete = False
                stack.clear()
                break
            try:
                lab, nxt = next(stack[-1])
            except StopIteration:
                stack.pop()
                node = path.pop()
                del on_path[node]
                if labels:
                    labels.pop()
                continue
            if nxt not in good:
                continue
            if nxt in on_path:
                i = on_path[nxt]
                cycle_nodes = path[i:]
                if any(g.nodes[n][0] in t.accepting for n in cycle_nodes):
                    head = tuple(a for (_, out, _) in labels[:i] for a in out)
                    loop = tuple(a for (_, out, _) in labels[i:] for a in out) + tuple(lab[1])
                    if loop:
                        found.add(LassoWord(head, loop).normalized())
                continue
            on_path[nxt] = len(path)
            path.append(nxt)
            labels.append(lab)
            stack.append(iter(g.edges[nxt]))
    return found, complete


def relates(t: TransducerSpec, x: LassoWord, y: LassoWord) -> bool:
    """Does some accepting run of ``t`` read ``x`` and produce exactly ``y``?"""
    from .omega import BuchiGraph, buchi_nonempty

    accepting = t.accepting

    def succ(node):
        q, vals, ipos, opos, _ = node
        letter = x.letter_at(ipos)
        nxt = x.next_position(ipos)
        res = []
        for tr, q2, v2, out in successors(t, q, vals, letter):
            o = opos
            ok = True
            for a in out:
                if y.letter_at(o) != a:
                    ok = False
                    break
                o = y.next_position(o)
            if ok:
                res.append(((letter, out, tr), (q2, v2, nxt, o, bool(out))))
        return res

    g = BuchiGraph(
        initial=[(t.initial, t.initial_valuation, 0, 0, False)],
        successors=succ,
        accepting=[lambda n: n[0] in accepting, lambda n: n[4]],
    )
    return buchi_nonempty(g) is not None


def run_along(t: TransducerSpec, transitions: Iterable[Transition], word: Iterable, start=None):
    """Replay a fixed transition sequence on a finite word.

    Returns ``(configuration, output word)`` and raises ``ValueError`` if a
    transition does not match or its test fails.
    """
    c = start or t.initial_configuration
    vals = c.valuation
    state = c.state
    out: list = []
    idx = t.register_index
    for tr, (label, d) in zip(transitions, word):
        if tr.source != state or tr.label != label:
            raise ValueError("transition does not match the run")
        if not compile_test(tr.test, idx)(vals, d):
            raise ValueError("transition test fails on replay")
        ct = _Compiled(
            None,
            tuple(idx[r] for r in tr.assign),
            tuple((idx[a], idx[b]) for a, b in tr.copies),
            tuple((g, -1 if r is None else idx[r]) for g, r in tr.output),
            tr.target,
            tr,
        )
        vals, o = apply_transition(ct, vals, d)
        out.extend(o)
        state = tr.target
    return Configuration(state, vals), tuple(out)


def fire(t: TransducerSpec, tr: Transition, vals: tuple, datum: int):
    """Apply one specific transition; ``ValueError`` if its test fails."""
    for ct in t.compiled(tr.source, tr.label):
        if ct.transition is tr or ct.transition == tr:
            if not ct.test(vals, datum):
                raise ValueError("transition test fails on replay")
            return apply_transition(ct, vals, datum)
    raise ValueError("transition does not belong to the machine")
