"""Streaming evaluation of functions defined by register transducers.

After each input letter the evaluator emits the longest output that every
accepting continuation agrees on.  It keeps one *summary* per run of the
transducer on the prefix read so far: the current configuration and how
the output of that run compares with what has already been emitted.

``("ahead", e)``
    the run has produced the emitted output followed by ``e``;
``("pending", p)``
    the run has produced a prefix of the emitted output and still owes ``p``;
``("mismatch",)``
    the run disagrees with the emitted output.

Only runs that can still be completed into an accepting run with infinite
output are kept.
"""

from __future__ import annotations

import warnings
from typing import Iterable

from .errors import DomainError, PreconditionError
from .model import D0, LassoWord, TransducerSpec, successors
from .omega import BuchiGraph, buchi_nonempty
from .restrict import DEFAULT_CAP, DataSpace

AHEAD_EMPTY = ("ahead", ())
MISMATCH = ("mismatch",)


def _advance(status, out) -> tuple:
    """Status after a run produces ``out``."""
    if status[0] == "mismatch":
        return status
    if status[0] == "ahead":
        return ("ahead", status[1] + tuple(out))
    p = status[1]
    n = min(len(p), len(out))
    if tuple(out[:n]) != p[:n]:
        return MISMATCH
    if len(out) >= len(p):
        return ("ahead", tuple(out[len(p) :]))
    return ("pending", p[len(out) :])


def _after_emit(status, letter) -> tuple:
    """Status after the evaluator emits ``letter``."""
    if status[0] == "mismatch":
        return status
    if status[0] == "ahead":
        e = status[1]
        if not e:
            return ("pending", (letter,))
        return ("ahead", e[1:]) if e[0] == letter else MISMATCH
    return ("pending", status[1] + (letter,))


class _Oracle:
    """Emptiness questions about continuations from one configuration.

    Answers depend only on the equality pattern between the valuation, the
    constants involved and ``0``, so they are computed over that pattern
    plus ``k+1`` fresh values and cached.
    """

    def __init__(self, t: TransducerSpec, cap: int = DEFAULT_CAP):
        self.t = t
        self.cap = cap
        self._final: dict = {}
        self._mismatch: dict = {}

    def _normalize(self, vals, consts=()):
        """Rename data to ``0, 1, 2, ...`` keeping ``0`` fixed."""
        m = {D0: D0}
        for d in tuple(vals) + tuple(consts):
            if d not in m:
                m[d] = len(m)
        return m

    def _space(self, m: dict) -> DataSpace:
        used = set(m.values())
        values = set(used)
        v = 0
        while len(values) < len(used) + len(self.t.registers) + 1:
            values.add(v)
            v += 1
        return DataSpace(values, used)

    def _graph(self, q, vals, consts, track, accepting):
        t = self.t
        m = self._normalize(vals, consts)
        space = self._space(m)
        nvals = tuple(m[d] for d in vals)
        nconsts = tuple(m[d] for d in consts)
        F = t.accepting

        def succ(node):
            q, v, st, _ = node
            res = []
            labels = t.labels_from.get(q, ())
            for a in t.input_labels:
                if a not in labels:
                    continue
                for d in space.letter_data(v):
                    for tr, q2, v2, out in successors(t, q, v, (a, d)):
                        st2 = track(st, out, nconsts)
                        if st2 is not None:
                            res.append((None, (q2, space.canonical(v2), st2, bool(out))))
            return res

        return BuchiGraph(
            [(q, nvals, 0, False)],
            succ,
            [lambda n: n[0] in F, lambda n: n[3]] + list(accepting),
        )

    def has_final_run(self, q, vals) -> bool:
        m = self._normalize(vals)
        key = (q, tuple(m[d] for d in vals))
        if key not in self._final:
            g = self._graph(q, vals, (), lambda st, out, consts: st, ())
            self._final[key] = buchi_nonempty(g) is not None
        return self._final[key]

    def can_mismatch(self, q, vals, expected: tuple) -> bool:
        """Does some final run from ``(q, vals)`` output something not starting with ``expected``?"""
        data = tuple(d for _, d in expected)
        m = self._normalize(vals, data)
        key = (q, tuple(m[d] for d in vals), tuple((a, m[d]) for a, d in expected))
        if key not in self._mismatch:
            labels = tuple(a for a, _ in expected)

            def track(st, out, consts):
                for b, e in out:
                    if st == "mis":
                        return st
                    if (b, e) != (labels[st], consts[st]):
                        st = "mis"
                    else:
                        st += 1
                        if st == len(labels):
                            return None  # the run agrees with the expectation
                return st

            g = self._graph(q, vals, data, track, [lambda n: n[2] == "mis"])
            self._mismatch[key] = buchi_nonempty(g) is not None
        return self._mismatch[key]


class Evaluator:
    """Incremental evaluation of the function defined by ``t``.

    With ``check=True`` the machine is checked to be functional (required)
    and continuous (a warning is issued otherwise; emissions stay sound
    but may stop growing).
    """

    def __init__(
        self,
        t: TransducerSpec,
        check: bool = True,
        pending_cap: int = 10_000,
        emission_cap: int = 10_000,
        cap: int = DEFAULT_CAP,
    ):
        self.t = t
        self.pending_cap = pending_cap
        self.emission_cap = emission_cap
        self.diagnostics: list = []
        if check:
            self._check(t, cap)
        self.oracle = _Oracle(t, cap)
        self.prefix: list = []
        self.emitted: list = []
        self._data: dict = {D0: None}
        init = (t.initial, t.initial_valuation, AHEAD_EMPTY)
        self.summaries = {s for s in [init] if self.oracle.has_final_run(s[0], s[1])}
        if not self.summaries:
            raise DomainError("the function has an empty domain")
        self._emit_all()

    def _check(self, t, cap):
        from .decide import continuous, functional
        from .normalize import validate_infinite_output

        v = functional(t, cap=cap)
        if not v.answer:
            raise PreconditionError("streaming evaluation needs a functional machine", witness=v)
        check = validate_infinite_output(t)
        if not check.ok:
            msg = f"some accepting runs have finite output (e.g. on {check.witness}); only runs with infinite output are evaluated"
            self.diagnostics.append(msg)
            warnings.warn(msg, stacklevel=3)
        c = continuous(t, cap=cap)
        if not c.answer:
            msg = "the function is not continuous; emissions are sound but may stall"
            self.diagnostics.append(msg)
            warnings.warn(msg, stacklevel=3)

    # -- candidates ------------------------------------------------------------

    def candidates(self) -> list:
        """Output labels in declaration order, data: ``0`` first, then by first occurrence."""
        return [(g, d) for g in self.t.output_labels for d in self._data]

    def safe_extension(self, candidate) -> bool:
        """Is ``emitted · candidate`` a prefix of the output of every accepting continuation?"""
        for q, vals, status in self.summaries:
            if status[0] == "mismatch":
                return False
            if status[0] == "ahead" and status[1]:
                if status[1][0] != candidate:
                    return False
                continue
            expected = (status[1] if status[0] == "pending" else ()) + (candidate,)
            if self.oracle.can_mismatch(q, vals, expected):
                return False
        return True

    def _emit_all(self) -> list:
        new = []
        for _ in range(self.emission_cap):
            forced = {s[2][1][0] for s in self.summaries if s[2][0] == "ahead" and s[2][1]}
            if any(s[2][0] == "mismatch" for s in self.summaries) or len(forced) > 1:
                break
            options = list(forced) if forced else self.candidates()
            letter = next((c for c in options if self.safe_extension(c)), None)
            if letter is None:
                break
            self.emitted.append(letter)
            new.append(letter)
            self.summaries = {(q, v, _after_emit(s, letter)) for q, v, s in self.summaries}
        else:
            self.diagnostics.append(f"emission cap of {self.emission_cap} letters reached in one step")
        longest = max((len(s[2][1]) for s in self.summaries if s[2][0] == "pending"), default=0)
        if longest > self.pending_cap:
            self.diagnostics.append(f"pending output of {longest} letters exceeds the cap {self.pending_cap}")
        return new

    # -- input -----------------------------------------------------------------

    def feed(self, letter) -> list:
        """Read one input letter; returns the newly emitted letters."""
        label, d = letter
        self.prefix.append((label, d))
        self._data.setdefault(d, None)
        nxt = set()
        for q, vals, status in self.summaries:
            for _, q2, v2, out in successors(self.t, q, vals, (label, d)):
                if self.oracle.has_final_run(q2, v2):
                    nxt.add((q2, v2, _advance(status, out)))
        if not nxt:
            self.summaries = set()
            raise DomainError("input left dom(f)")
        self.summaries = nxt
        return self._emit_all()

    def feed_all(self, letters: Iterable) -> list:
        out = []
        for a in letters:
            out.extend(self.feed(a))
        return out


def run_on_lasso(t: TransducerSpec, x: LassoWord, steps: int, check: bool = True, **kwargs) -> tuple:
    """Emission after reading the first ``steps`` letters of ``x``."""
    ev = Evaluator(t, check=check, **kwargs)
    ev.feed_all(x.take(steps))
    return tuple(ev.emitted)


def stream(t: TransducerSpec, letters: Iterable, check: bool = True, **kwargs):
    """Yield the emitted letters of each input letter, one list per letter."""
    ev = Evaluator(t, check=check, **kwargs)
    if ev.emitted:
        yield list(ev.emitted)
    for a in letters:
        yield ev.feed(a)
