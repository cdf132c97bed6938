"""Composition of register transducers.

``compose(tf, tg)`` builds a machine for ``x ↦ f(g(x))``.  The product
simulates ``tg`` on the input and ``tf`` on every chunk that ``tg`` outputs.
Output letters of ``tg`` carry registers rather than data, so the product
tracks which registers of both machines hold equal values.  This makes
every test of ``tf`` decidable from the state alone.  ``tf`` registers get
their values through reassignments ``r_f := r_g``, which are removed at the
end.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DefinitionError
from .model import Eq, Neq, TransducerSpec, Transition, conj
from .normalize import expand_tests, remove_reassignments, substitute


@dataclass(frozen=True)
class EqualityType:
    """Partition of registers by equal contents.

    ``classes[i]`` is the class of ``registers[i]``; classes are numbered
    by first occurrence so equal partitions compare equal.
    """

    registers: tuple
    classes: tuple

    @classmethod
    def all_equal(cls, registers) -> "EqualityType":
        return cls(tuple(registers), (0,) * len(registers))

    def as_dict(self) -> dict:
        return dict(zip(self.registers, self.classes))

    @classmethod
    def from_dict(cls, registers, d: dict) -> "EqualityType":
        renum: dict = {}
        out = []
        for r in registers:
            c = d[r]
            if c not in renum:
                renum[c] = len(renum)
            out.append(renum[c])
        return cls(tuple(registers), tuple(out))

    def code(self) -> str:
        return "".join(chr(ord("a") + c) if c < 26 else f"_{c}_" for c in self.classes)

    def holds(self, vals: dict) -> bool:
        """Do ``vals`` realize exactly this partition?"""
        d = self.as_dict()
        rs = self.registers
        return all((d[a] == d[b]) == (vals[a] == vals[b]) for a in rs for b in rs)


def _prepare(t: TransducerSpec, prefix: str) -> TransducerSpec:
    """Rename registers apart, give data to bare outputs, make tests explicit."""
    if any(tr.copies for tr in t.transitions):
        t = remove_reassignments(t)
    regs = list(t.registers)
    zero = None
    if any(r is None for tr in t.transitions for _, r in tr.output):
        zero = "zero"
        while zero in regs:
            zero += "_"
        regs.append(zero)
    lam = {r: f"{prefix}{r}" for r in regs}
    trs = [
        Transition(
            tr.source,
            tr.label,
            substitute(tr.test, lam),
            frozenset(lam[r] for r in tr.assign),
            tuple((g, lam[zero] if r is None else lam[r]) for g, r in tr.output),
            tr.target,
        )
        for tr in t.transitions
    ]
    kind = "nrt" if t.kind == "nft" else t.kind
    return expand_tests(t.with_transitions(trs, registers=tuple(lam[r] for r in regs), kind=kind))


def compose(tf: TransducerSpec, tg: TransducerSpec, keep_reassignments: bool = False) -> TransducerSpec:
    """A machine for ``f ∘ g``: run ``tg`` on the input and ``tf`` on its output.

    Works for relations as well.  Acceptance needs infinitely many accepting
    states of both machines; a flag cycles 0 → 1 (``tg`` accepting) → 2
    (``tf`` accepting afterwards), and flag 2 marks accepting states.
    """
    missing = set(tg.output_labels) - set(tf.input_labels)
    if missing:
        raise DefinitionError(f"output labels of the inner machine not read by the outer one: {sorted(missing)}")
    g = _prepare(tg, "g_")
    f = _prepare(tf, "f_")
    Rg, Rf = g.registers, f.registers
    allr = Rg + Rf
    gset = set(Rg)
    backup = {r: "b_" + r[2:] for r in Rf}

    g_by: dict = {}
    for tr in g.transitions:
        g_by.setdefault(tr.source, []).append(tr)
    f_by: dict = {}
    for tr in f.transitions:
        f_by.setdefault((tr.source, tr.label), []).append(tr)

    def name(state):
        p, q, et, flag = state
        return f"{p}~{q}~{et.code()}~{flag}"

    start = (g.initial, f.initial, EqualityType.all_equal(allr), 0)
    seen = {start}
    order = [start]
    todo = [start]
    transitions = []
    used_backups: set = set()

    while todo:
        state = todo.pop()
        p, q, et, flag = state
        cls = et.as_dict()
        members: dict = {}
        for r in allr:
            members.setdefault(cls[r], []).append(r)
        orphans = [c for c, ms in members.items() if not any(r in gset for r in ms)]
        for tr in g_by.get(p, ()):
            e = tr.test.eq_set
            # E_g must be a union of whole classes restricted to R_g, and all
            # those registers hold one value: at most one class.
            e_classes = {cls[r] for r in e}
            if len(e_classes) > 1:
                continue
            if any((r in e) != (cls[r] in e_classes) for r in Rg):
                continue
            # Without g-registers equal to the datum it may still equal one
            # class made only of f-registers.
            choices = [next(iter(e_classes))] if e_classes else [None] + orphans
            for datum_class in choices:
                extra = []
                if not e_classes:
                    for c in orphans:
                        rep = members[c][0]
                        extra.append(Eq(rep) if c == datum_class else Neq(rep))
                test = conj([tr.test.as_formula()] + extra)
                mid = dict(cls)
                new_c = datum_class if datum_class is not None else max(cls.values(), default=-1) + 1
                for r in tr.assign:
                    mid[r] = new_c
                flag1 = 0 if flag == 2 else flag
                if flag1 == 0 and tr.target in g.accepting:
                    flag1 = 1
                for fq, part, last, outs, visited in _chunks(tr.output, q, mid, f_by, Rf, f.accepting):
                    copies = []
                    out = []
                    for lab, reg, i, cls_i in outs:
                        out.append((lab, _source_register(reg, i, cls_i, last, Rg, Rf, backup, used_backups, copies)))
                    for r_f, (j, r_g) in last.items():
                        copies.append((r_f, r_g))
                    flag2 = 2 if (flag1 == 1 and visited) else flag1
                    nxt = (tr.target, fq, EqualityType.from_dict(allr, part), flag2)
                    if nxt not in seen:
                        seen.add(nxt)
                        order.append(nxt)
                        todo.append(nxt)
                    transitions.append(
                        Transition(name(state), tr.label, test, tr.assign, tuple(out), name(nxt), tuple(dict.fromkeys(copies)))
                    )

    registers = allr + tuple(backup[r] for r in Rf if backup[r] in used_backups)
    result = TransducerSpec(
        kind="nrt",
        name=f"{tf.name}_after_{tg.name}",
        states=tuple(name(s) for s in order),
        registers=registers,
        input_labels=g.input_labels,
        output_labels=f.output_labels,
        initial=name(start),
        accepting=frozenset(name(s) for s in order if s[3] == 2),
        transitions=tuple(transitions),
    )
    if not result.accepting:
        # Empty relation; keep the machine well formed with a dead accepting state.
        result = result.with_transitions(result.transitions, states=result.states + ("dead",), accepting=frozenset({"dead"}))
    if keep_reassignments:
        return result.validate()
    return remove_reassignments(result).validate()


def _chunks(output, q, part, f_by, Rf, f_accepting):
    """Runs of ``tf`` over one output chunk of ``tg``.

    Yields ``(state, partition, last, outs, visited)`` where ``last`` maps
    each ``tf`` register assigned in the chunk to ``(step, g register)`` of
    its last assignment, ``outs`` lists ``(label, f register, step,
    partition at that step)`` for every output letter, and ``visited`` tells
    whether an accepting state of ``tf`` was entered.
    """
    stack = [(0, q, dict(part), {}, [], False)]
    n = len(output)
    while stack:
        i, q, cls, last, outs, visited = stack.pop()
        if i == n:
            yield q, cls, last, outs, visited
            continue
        lab, r_g = output[i]
        dclass = cls[r_g]
        for tr in f_by.get((q, lab), ()):
            e = tr.test.eq_set
            if any((r in e) != (cls[r] == dclass) for r in Rf):
                continue
            cls2 = dict(cls)
            last2 = dict(last)
            for r in tr.assign:
                cls2[r] = dclass
                last2[r] = (i, r_g)
            outs2 = outs + [(a, r, i, cls2) for a, r in tr.output]
            stack.append((i + 1, tr.target, cls2, last2, outs2, visited or tr.target in f_accepting))


def _source_register(reg, i, cls_i, last, Rg, Rf, backup, used_backups, copies):
    """Product register holding the value of ``tf`` register ``reg`` at step ``i``.

    Registers of ``tg`` do not change during a chunk, so any of them in the
    same class is exact.  Otherwise ``reg`` still holds its value from
    before the transition; it can be read directly unless the chunk
    overwrites it later, in which case a backup copy is taken.
    """
    for r in Rg:
        if cls_i[r] == cls_i[reg]:
            return r
    if reg in last and last[reg][0] > i:
        b = backup[reg]
        used_backups.add(b)
        copies.append((b, reg))
        return b
    return reg
