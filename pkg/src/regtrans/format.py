"""Text formats: machine definition files, lasso words and JSON verdicts.

Machine files look like::

    nrt t_rename {
      registers: r1 r2 r0;
      input: del ch # a;
      output: a;
      initial: 1;
      accepting: 4;
      trans 1 -> 2 : on del, test true, store {r1}, out [];
      trans 4 -> 4 : on a, test =r1, store {}, out [a:r2];
    }

``store`` entries are either a register name (receives the current datum),
``r := curr`` or ``r := s`` (copy, executed after the datum assignments).
Machines without registers may write outputs as bare labels.  Comments
start with ``//`` and run to the end of the line.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .errors import DefinitionError, ParseError
from .model import (
    FALSE,
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
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<sym>->|:=|!=|[{}\[\]();:,=&|!])
  | (?P<word>[A-Za-z0-9_#$.'+*@%^~?]+)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    line, col0 = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - col0 + 1)
        s = m.group(0)
        if m.lastgroup != "ws":
            tokens.append(Token(s, line, pos - col0 + 1))
        nl = s.count("\n")
        if nl:
            line += nl
            col0 = pos + s.rindex("\n") + 1
        pos += len(s)
    return tokens


class _Stream:
    def __init__(self, tokens, text_end=(1, 1)):
        self.tokens = tokens
        self.i = 0
        self.end = text_end

    def peek(self, k=0):
        j = self.i + k
        return self.tokens[j] if j < len(self.tokens) else None

    def next(self, what="token"):
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unexpected end of input, expected {what}", *self.end)
        self.i += 1
        return tok

    def expect(self, text):
        tok = self.next(repr(text))
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.column)
        return tok

    def accept(self, text):
        tok = self.peek()
        if tok is not None and tok.text == text:
            self.i += 1
            return tok
        return None

    def ident(self, what="identifier"):
        tok = self.next(what)
        if not _is_word(tok.text):
            raise ParseError(f"expected {what}, found {tok.text!r}", tok.line, tok.column)
        return tok

    def at_end(self):
        return self.i >= len(self.tokens)


def _is_word(s: str) -> bool:
    m = _TOKEN.fullmatch(s)
    return m is not None and m.lastgroup == "word"


def _end_position(text: str):
    lines = text.split("\n")
    return len(lines), len(lines[-1]) + 1


# --------------------------------------------------------------------------
# Machines


def parse_transducer(text: str) -> TransducerSpec:
    """Parse and validate one machine definition."""
    s = _Stream(tokenize(text), _end_position(text))
    kind_tok = s.ident("machine kind")
    kind = kind_tok.text.lower()
    if kind not in ("nrt", "nra", "nft"):
        raise ParseError(f"unknown machine kind {kind_tok.text!r}", kind_tok.line, kind_tok.column)
    name = s.ident("machine name").text
    s.expect("{")

    def ident_list(section, nonempty):
        head = s.ident(section)
        if head.text != section:
            raise ParseError(f"expected section {section!r}, found {head.text!r}", head.line, head.column)
        s.expect(":")
        items = []
        while s.peek() is not None and s.peek().text != ";":
            items.append(s.ident(f"{section} entry"))
        end = s.expect(";")
        if nonempty and not items:
            raise ParseError(f"{section} list must not be empty", end.line, end.column)
        return items

    registers = ident_list("registers", False)
    inputs = ident_list("input", True)
    outputs = ident_list("output", False)
    initial = ident_list("initial", True)
    if len(initial) != 1:
        raise ParseError("exactly one initial state expected", initial[1].line, initial[1].column)
    accepting = ident_list("accepting", True)

    reg_names = [t.text for t in registers]
    reg_set = set(reg_names)
    in_set = {t.text for t in inputs}
    out_set = {t.text for t in outputs}
    for toks, what in ((registers, "register"), (inputs, "input label"), (outputs, "output label")):
        seen = set()
        for t in toks:
            if t.text in seen:
                raise ParseError(f"duplicate {what} {t.text!r}", t.line, t.column)
            seen.add(t.text)

    states = [initial[0].text]
    known = set(states)

    def note_state(name):
        if name not in known:
            known.add(name)
            states.append(name)

    transitions = []
    while s.accept("trans"):
        src = s.ident("source state")
        s.expect("->")
        dst = s.ident("target state")
        s.expect(":")
        _keyword(s, "on")
        lab = s.ident("input label")
        if lab.text not in in_set:
            raise ParseError(f"unknown input label {lab.text!r}", lab.line, lab.column)
        s.expect(",")
        _keyword(s, "test")
        test = _parse_test(s, reg_set)
        s.expect(",")
        _keyword(s, "store")
        assign, copies = _parse_store(s, reg_set)
        s.expect(",")
        _keyword(s, "out")
        out = _parse_output(s, reg_set, out_set)
        s.expect(";")
        note_state(src.text)
        note_state(dst.text)
        transitions.append(
            Transition(src.text, lab.text, test, frozenset(assign), tuple(out), dst.text, tuple(copies))
        )
    for t in accepting:
        note_state(t.text)
    s.expect("}")
    if not s.at_end():
        tok = s.peek()
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.column)

    spec = TransducerSpec(
        kind=kind,
        name=name,
        states=tuple(states),
        registers=tuple(reg_names),
        input_labels=tuple(t.text for t in inputs),
        output_labels=tuple(t.text for t in outputs),
        initial=initial[0].text,
        accepting=frozenset(t.text for t in accepting),
        transitions=tuple(transitions),
    )
    try:
        spec.validate()
    except DefinitionError as exc:
        raise ParseError(str(exc), kind_tok.line, kind_tok.column) from None
    return spec


def _keyword(s: _Stream, word: str):
    tok = s.next(repr(word))
    if tok.text != word:
        raise ParseError(f"expected {word!r}, found {tok.text!r}", tok.line, tok.column)


def _check_register(tok, reg_set):
    if tok.text not in reg_set:
        raise ParseError(f"unknown register {tok.text!r}", tok.line, tok.column)
    return tok.text


def _parse_test(s: _Stream, reg_set):
    def disj():
        left = conj_()
        while s.accept("|"):
            left = Or(left, conj_())
        return left

    def conj_():
        left = unary()
        while s.accept("&"):
            left = And(left, unary())
        return left

    def unary():
        tok = s.next("test")
        if tok.text == "!":
            return Not(unary())
        if tok.text == "!=":
            return Neq(_check_register(s.ident("register"), reg_set))
        if tok.text == "=":
            return Eq(_check_register(s.ident("register"), reg_set))
        if tok.text == "(":
            inner = disj()
            s.expect(")")
            return inner
        if tok.text == "true":
            return TRUE
        if tok.text == "false":
            return FALSE
        raise ParseError(f"malformed test at {tok.text!r}", tok.line, tok.column)

    return disj()


def _parse_store(s: _Stream, reg_set):
    s.expect("{")
    assign, copies = [], []
    while not s.accept("}"):
        if s.accept(","):
            continue
        dst = s.ident("register")
        reg = _check_register(dst, reg_set)
        if s.accept(":="):
            src = s.ident("register or 'curr'")
            if src.text == "curr":
                assign.append(reg)
            else:
                copies.append((reg, _check_register(src, reg_set)))
        else:
            assign.append(reg)
    return assign, copies


def _parse_output(s: _Stream, reg_set, out_set):
    s.expect("[")
    out = []
    while not s.accept("]"):
        if s.accept(","):
            continue
        lab = s.ident("output label")
        if lab.text not in out_set:
            raise ParseError(f"unknown output label {lab.text!r}", lab.line, lab.column)
        if s.accept(":"):
            out.append((lab.text, _check_register(s.ident("register"), reg_set)))
        else:
            out.append((lab.text, None))
    return out


def format_test(test) -> str:
    if isinstance(test, Top):
        return "true"
    if isinstance(test, Bottom):
        return "false"
    if isinstance(test, Eq):
        return f"={test.register}"
    if isinstance(test, Neq):
        return f"!={test.register}"
    if isinstance(test, And):
        return f"({format_test(test.left)} & {format_test(test.right)})"
    if isinstance(test, Or):
        return f"({format_test(test.left)} | {format_test(test.right)})"
    if isinstance(test, Not):
        return f"!{_atom(test.inner)}"
    if isinstance(test, ExplicitTest):
        return format_test(test.as_formula()) if test.registers else "true"
    raise TypeError(f"not a test formula: {test!r}")


def _atom(test) -> str:
    s = format_test(test)
    return s if isinstance(test, (Top, Bottom, Eq, Neq, And, Or, ExplicitTest)) else f"({s})"


def dump_transducer(t: TransducerSpec) -> str:
    """Serialize ``t`` in the machine-file grammar."""
    lines = [f"{t.kind} {t.name} {{"]
    lines.append(f"  registers: {' '.join(t.registers)};")
    lines.append(f"  input: {' '.join(t.input_labels)};")
    lines.append(f"  output: {' '.join(t.output_labels)};")
    lines.append(f"  initial: {t.initial};")
    acc = [q for q in t.states if q in t.accepting]
    lines.append(f"  accepting: {' '.join(acc)};")
    for tr in t.transitions:
        store = [r for r in t.registers if r in tr.assign]
        store += [f"{d} := {s}" for d, s in tr.copies]
        out = " ".join(g if r is None else f"{g}:{r}" for g, r in tr.output)
        lines.append(
            f"  trans {tr.source} -> {tr.target} : on {tr.label}, test {format_test(tr.test)}, "
            f"store {{{', '.join(store)}}}, out [{out}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_transducer(path) -> TransducerSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_transducer(fh.read())


# --------------------------------------------------------------------------
# Lassos and finite words


def _parse_items(s: _Stream, stop):
    items = []
    while s.peek() is not None and s.peek().text not in stop:
        lab = s.ident("label")
        s.expect(":")
        num = s.next("datum")
        if not num.text.isdigit():
            raise ParseError(f"datum must be a natural number, found {num.text!r}", num.line, num.column)
        items.append((lab.text, int(num.text)))
    return items


def parse_word(text: str) -> tuple:
    """Finite word ``label:datum ...``."""
    s = _Stream(tokenize(text), _end_position(text))
    items = _parse_items(s, ())
    return tuple(items)


def parse_lasso(text: str) -> LassoWord:
    s = _Stream(tokenize(text), _end_position(text))
    prefix = _parse_items(s, ("(",))
    open_tok = s.next("'('")
    if open_tok.text != "(":
        raise ParseError(f"expected '(', found {open_tok.text!r}", open_tok.line, open_tok.column)
    period = _parse_items(s, (")",))
    close = s.expect(")")
    if not period:
        raise ParseError("lasso period must not be empty", close.line, close.column)
    w = s.next("'w'")
    if w.text != "w":
        raise ParseError(f"expected 'w' after period, found {w.text!r}", w.line, w.column)
    if not s.at_end():
        tok = s.peek()
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.column)
    return LassoWord(tuple(prefix), tuple(period))


def format_word(word) -> str:
    return " ".join(f"{a}:{d}" for a, d in word)


def format_lasso(x: LassoWord) -> str:
    return str(x)


def parse_letter(text: str):
    """One ``label:datum`` token (stream protocol)."""
    word = parse_word(text)
    if len(word) != 1:
        raise ParseError(f"expected exactly one letter, got {text.strip()!r}", 1, 1)
    return word[0]


# --------------------------------------------------------------------------
# Verdicts

SCHEMA_VERSION = 1


def verdict_to_dict(v) -> dict:
    from .decide import ContinuityPattern, FunctionalityWitness

    out = {"v": SCHEMA_VERSION, "answer": bool(v.answer), "procedure": v.procedure}
    w = v.witness
    if isinstance(w, FunctionalityWitness):
        out["witness"] = {"input": str(w.input), "outputs": [str(y) for y in w.outputs]}
    elif isinstance(w, ContinuityPattern):
        out["witness"] = {
            "input": str(w.input),
            "outputs": [str(w.output)] if w.output is not None else [],
            "pattern": {
                "u": format_word(w.u),
                "v": format_word(w.v),
                "w": format_word(w.w),
                "z": str(w.z),
                "out_u1": format_word(w.out_u1),
                "out_u2": format_word(w.out_u2),
                "out_v1": format_word(w.out_v1),
                "out_v2": format_word(w.out_v2),
                "out_z2": format_word(w.out_z2),
            },
        }
    elif w is not None:
        raise TypeError(f"unknown witness type {type(w).__name__}")
    out["stats"] = {
        "expanded_states": int(v.stats.get("expanded_states", 0)),
        "millis": int(v.stats.get("millis", 0)),
    }
    extra = {k: val for k, val in v.stats.items() if k not in ("expanded_states", "millis")}
    if extra:
        out["stats"].update(extra)
    return out


def emit_verdict(v) -> str:
    return json.dumps(verdict_to_dict(v), sort_keys=False)


def parse_verdict(text: str) -> dict:
    """Load a verdict JSON and re-parse its witness lassos."""
    data = json.loads(text)
    w = data.get("witness")
    if w is not None:
        w["input"] = parse_lasso(w["input"])
        w["outputs"] = [parse_lasso(y) for y in w.get("outputs", [])]
        if "pattern" in w:
            p = w["pattern"]
            for key in ("u", "v", "w", "out_u1", "out_u2", "out_v1", "out_v2", "out_z2"):
                p[key] = parse_word(p[key])
            p["z"] = parse_lasso(p["z"])
    return data
