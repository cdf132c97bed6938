import pytest

from oracles import corpus_files, load
from regtrans.errors import ParseError
from regtrans.format import (
    dump_transducer,
    emit_verdict,
    parse_lasso,
    parse_letter,
    parse_transducer,
    parse_verdict,
    parse_word,
)
from regtrans.model import accepts_lasso, lasso, outputs_on, relates
from regtrans.normalize import is_test_free

T_MIN = """
nrt tiny {
  registers: r;
  input: a;
  output: a;
  initial: p;
  accepting: p;
  trans p -> p : on a, test true, store {r}, out [a:r];
}
"""


def test_rename_machine_shape():
    t = load("t_rename")
    assert (len(t.states), len(t.registers), len(t.transitions)) == (4, 3, 7)


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.stem)
def test_dump_parse_roundtrip(path):
    t = parse_transducer(path.read_text())
    again = parse_transducer(dump_transducer(t))
    assert again == t


def test_empty_accepting_list_is_rejected():
    with pytest.raises(ParseError):
        parse_transducer(T_MIN.replace("accepting: p;", "accepting: ;"))


def test_unknown_register_is_named():
    with pytest.raises(ParseError, match="zz"):
        parse_transducer(T_MIN.replace("test true", "test =zz"))


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_transducer(T_MIN.replace("->", "=>"))
    assert e.value.line is not None


def test_lasso_grammar():
    x = parse_lasso("del:1 ch:2 #:0 (a:1)w")
    assert len(x.prefix) == 3 and len(x.period) == 1
    assert parse_lasso("(a:0)w").prefix == ()
    y = parse_lasso("del:1 (a:1 b:2)w")
    assert parse_lasso(str(y)) == y
    with pytest.raises(ParseError):
        parse_lasso("a:1 ()w")
    assert parse_word("a:1 b:2") == (("a", 1), ("b", 2))
    assert parse_letter("$:3") == ("$", 3)


def test_lasso_normal_form():
    x = lasso([("a", 1), ("b", 2)], [("a", 1), ("b", 2)])
    assert x.same_word(lasso([], [("a", 1), ("b", 2)]))
    assert x.common_prefix_length(lasso([], [("a", 1)])) == 1


def test_outputs_read_updated_registers():
    t = parse_transducer(T_MIN)
    x = parse_lasso("a:3 (a:4 a:5)w")
    assert {str(y) for y in outputs_on(t, x)} == {"a:3 (a:4 a:5)w"}


def test_copies_read_the_mid_valuation():
    text = T_MIN.replace("registers: r;", "registers: r s;").replace(
        "store {r}, out [a:r]", "store {r := curr, s := r}, out [a:s]"
    )
    t = parse_transducer(text)
    assert relates(t, parse_lasso("(a:7)w"), parse_lasso("(a:7)w"))


def test_rename_semantics():
    t = load("t_rename")
    x = parse_lasso("del:1 ch:2 ch:3 #:0 a:1 (a:5)w")
    outs = {str(y) for y in outputs_on(t, x)}
    assert outs == {"a:2 (a:5)w", "a:3 (a:5)w"}
    assert not accepts_lasso(t, parse_lasso("del:1 ch:1 #:0 (a:1)w"))


def test_test_free_acceptance_ignores_data():
    t = load("testfree_example")
    assert is_test_free(t)
    x = parse_lasso("a:1 b:2 (a:3 b:3)w")
    assert accepts_lasso(t, x) == accepts_lasso(t, x.rename({1: 9, 2: 9, 3: 4}))


def test_verdict_json_roundtrip():
    from regtrans.decide import functional

    v = functional(load("t_rename"))
    d = parse_verdict(emit_verdict(v))
    assert d["v"] == 1 and d["answer"] is False
    assert [str(y) for y in d["witness"]["outputs"]] == [str(y) for y in v.witness.outputs]
