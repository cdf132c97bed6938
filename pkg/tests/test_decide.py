import random

import pytest

from oracles import brute_nonfunctional, corpus_files, load, random_nft
from regtrans import decide
from regtrans.errors import PreconditionError, ResourceError
from regtrans.model import outputs_on, relates
from regtrans.normalize import is_test_free

EXPECTED = {
    # name: (functional, continuous)
    "ab_nft": (False, None),
    "delay": (True, True),
    "recurring_first": (True, False),
    "identity_ab": (True, True),
    "identity_log": (True, True),
    "relabel": (True, True),
    "swap": (True, True),
    "t_rename": (False, None),
    "t_rename2": (True, False),
    "t_rename2_swapped": (True, False),
    "t_rename3": (True, True),
    "testfree_example": (True, False),
    "testfree_nonfunctional": (False, None),
    "testfree_wide": (True, True),
}

GENERAL_OK = [n for n in EXPECTED if n != "testfree_wide"]


def assert_replays(t, v):
    if v.answer:
        return
    w = v.witness
    if isinstance(w, decide.FunctionalityWitness):
        assert decide.check_functionality_witness(t, w)
    else:
        assert decide.check_continuity_pattern(t, w)


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_corpus_verdicts(name):
    t = load(name)
    fun, cont = EXPECTED[name]
    v = decide.functional(t)
    assert v.answer == fun
    assert_replays(t, v)
    if cont is None:
        with pytest.raises(PreconditionError):
            decide.continuous(t)
    else:
        c = decide.continuous(t)
        assert c.answer == cont
        assert_replays(t, c)


@pytest.mark.parametrize("name", [n for n in GENERAL_OK if is_test_free(load(n)) and load(n).registers])
def test_paths_agree_on_test_free_machines(name):
    t = load(name)
    g = decide.functional(t, decide.GENERAL)
    f = decide.functional(t, decide.TEST_FREE)
    assert g.answer == f.answer
    assert f.stats["expanded_states"] == 0
    assert_replays(t, g)
    assert_replays(t, f)
    if g.answer:
        gc = decide.continuous(t, decide.GENERAL)
        fc = decide.continuous(t, decide.TEST_FREE)
        assert gc.answer == fc.answer
        assert_replays(t, gc)
        assert_replays(t, fc)


def test_test_free_path_refuses_tests():
    with pytest.raises(PreconditionError):
        decide.functional(load("recurring_first"), decide.TEST_FREE)


@pytest.mark.parametrize("name", GENERAL_OK)
def test_verdicts_stable_in_data_set_size(name):
    t = load(name)
    k = len(t.registers)
    fun = {decide.functional(t, decide.GENERAL, s).answer for s in (2 * k + 3, 2 * k + 4, 2 * k + 8)}
    assert len(fun) == 1
    if fun == {True}:
        cont = {decide.continuous(t, decide.GENERAL, s).answer for s in (2 * k + 3, 2 * k + 4, 2 * k + 8)}
        assert len(cont) == 1


def test_rename_witness_has_two_outputs_of_the_same_input():
    t = load("t_rename")
    v = decide.functional(t)
    y1, y2 = v.witness.outputs
    assert not y1.same_word(y2)
    assert relates(t, v.witness.input, y1) and relates(t, v.witness.input, y2)


def test_continuity_pattern_family_keeps_disagreeing():
    t = load("t_rename2")
    p = decide.continuous(t).witness
    for n in (1, 4, 9):
        for y in outputs_on(t, p.family(n)):
            assert y.common_prefix_length(p.output) <= len(p.out_u1)


def test_random_nfts_against_brute_force():
    rng = random.Random(3)
    for _ in range(60):
        t = random_nft(rng)
        v = decide.functional(t)
        found = brute_nonfunctional(t, 5)
        if found is not None:
            assert not v.answer
        assert_replays(t, v)
        if v.answer:
            assert_replays(t, decide.continuous(t))


def test_equivalence_on_common_domain():
    a, b = load("t_rename2"), load("t_rename2_swapped")
    v = decide.equivalent_on_common_domain(a, b)
    assert not v.answer
    x = v.witness.input
    assert all(relates(a, x, y) or relates(b, x, y) for y in v.witness.outputs)
    assert decide.equivalent_on_common_domain(load("identity_ab"), load("identity_ab")).answer


def test_equivalence_needs_functional_inputs():
    with pytest.raises(PreconditionError):
        decide.equivalent_on_common_domain(load("t_rename"), load("t_rename3"))


def test_general_path_cap_on_wide_machine():
    t = load("testfree_wide")
    with pytest.raises(ResourceError, match="test-free"):
        decide.functional(t, decide.GENERAL, cap=20_000)


def test_every_corpus_file_has_an_expectation():
    assert {p.stem for p in corpus_files()} == set(EXPECTED)
