import pytest

from oracles import load
from regtrans.compose import EqualityType, compose
from regtrans.errors import DefinitionError
from regtrans.model import outputs_on
from sampling import LassoSampler

PREFIX = 50

# (outer, inner, machine whose domain supplies the inputs); the composed
# machine computes outer(inner(x))
PAIRS = [
    ("t_rename3", "identity_log", "t_rename3"),
    ("delay", "swap", "swap"),
    ("relabel", "t_rename3", "t_rename3"),
]


def pipeline(tf, tg, x) -> set:
    out = set()
    for y in outputs_on(tg, x):
        out |= outputs_on(tf, y)
    return out


def prefixes(words) -> set:
    return {y.take(PREFIX) for y in words}


@pytest.mark.parametrize("outer,inner,source", PAIRS)
def test_composition_matches_pipeline(outer, inner, source):
    tf, tg = load(outer), load(inner)
    c = compose(tf, tg)
    xs = LassoSampler(load(source)).samples(100, seed=21)
    assert len(xs) == 100
    nonempty = 0
    for x in xs:
        expected = pipeline(tf, tg, x)
        got = outputs_on(c, x)
        assert prefixes(got) == prefixes(expected), str(x)
        assert {y.normalized() for y in got} == {y.normalized() for y in expected}
        nonempty += bool(expected)
    assert nonempty >= 50


@pytest.mark.parametrize("identity,name", [("identity_log", "t_rename3"), ("identity_ab", "relabel"), ("identity_ab", "delay")])
def test_identity_after_machine(identity, name):
    t = load(name)
    c = compose(load(identity), t)
    for x in LassoSampler(t).samples(30, seed=4):
        assert outputs_on(c, x) == outputs_on(t, x)


def test_composition_of_non_functional_relation():
    tf, tg = load("identity_log"), load("t_rename")
    c = compose(tf, tg)
    for x in LassoSampler(tg).samples(20, seed=8):
        assert outputs_on(c, x) == pipeline(tf, tg, x)


def test_alphabet_mismatch_is_rejected():
    with pytest.raises(DefinitionError):
        compose(load("swap"), load("identity_ab"))


def test_equality_type_codes():
    e = EqualityType.from_dict(("a", "b", "c"), {"a": 5, "b": 2, "c": 5})
    assert e.classes == (0, 1, 0) and e.code() == "aba"
    assert e.holds({"a": 1, "b": 2, "c": 1})
    assert not e.holds({"a": 1, "b": 1, "c": 1})


def test_composed_machine_has_no_reassignments():
    c = compose(load("delay"), load("swap"))
    assert not any(tr.copies for tr in c.transitions)
