import warnings

import pytest

from oracles import load
from regtrans.errors import DomainError, PreconditionError
from regtrans.evaluate import Evaluator, run_on_lasso
from regtrans.format import parse_lasso
from regtrans.model import outputs_on
from sampling import LassoSampler

BLOCKS = parse_lasso("del:1 ch:2 ch:3 (#:0 a:1 a:4 a:2 a:5 a:6 $:0)w")
BLOCK = 7


def quiet(t, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return Evaluator(t, **kw)


def is_prefix(short, y) -> bool:
    return tuple(short) == y.take(len(short))


def block_emissions(n_max: int):
    """Emission length after ``7n`` letters of the block lasso, for n = 1..n_max."""
    t = load("t_rename3")
    (reference,) = outputs_on(t, BLOCKS)
    ev = quiet(t)
    lengths = []
    sound = True
    for i, a in enumerate(BLOCKS.take(BLOCK * n_max), start=1):
        ev.feed(a)
        sound = sound and is_prefix(ev.emitted, reference)
        if i % BLOCK == 0:
            lengths.append(len(ev.emitted))
    # each block carries five renamed letters
    per_block = 5
    return lengths, per_block, sound


def test_rename3_emits_block_by_block():
    lengths, per_block, sound = block_emissions(8)
    assert sound
    for n, length in enumerate(lengths, start=1):
        assert length >= (n - 1) * per_block


def test_rename3_nothing_before_the_first_block_closes():
    ev = quiet(load("t_rename3"))
    for a in parse_lasso("del:1 ch:2 ch:3 #:0 (a:1)w").take(5):
        ev.feed(a)
    assert ev.emitted == []
    assert not ev.safe_extension(("a", 2))


def test_rename2_never_emits():
    t = load("t_rename2")
    x = parse_lasso("del:1 ch:2 ch:3 #:0 (a:1)w")
    assert run_on_lasso(t, x, 100, check=False) == ()


def test_identity_emits_each_letter():
    t = load("identity_log")
    x = parse_lasso("del:4 (a:1 b:2 $:7)w")
    ev = quiet(t)
    for n, a in enumerate(x.take(20), start=1):
        assert ev.feed(a) == [a]
        assert len(ev.emitted) == n


def test_non_functional_machine_is_refused():
    with pytest.raises(PreconditionError):
        Evaluator(load("t_rename"))


def test_non_continuous_machine_warns():
    with pytest.warns(UserWarning, match="not continuous"):
        Evaluator(load("recurring_first"))


def test_leaving_the_domain():
    ev = quiet(load("t_rename3"))
    ev.feed(("del", 1))
    with pytest.raises(DomainError, match="dom"):
        ev.feed(("a", 1))


CONTINUOUS = ["delay", "identity_ab", "identity_log", "relabel", "swap", "t_rename3"]


@pytest.mark.parametrize("name", CONTINUOUS)
def test_soundness_and_convergence_on_samples(name):
    t = load(name)
    xs = [x for x in LassoSampler(t).samples(8, seed=2) if outputs_on(t, x)]
    assert xs
    for x in xs:
        (reference,) = outputs_on(t, x)
        ev = quiet(t, check=False)
        before = 0
        for a in x.take(400):
            ev.feed(a)
            assert len(ev.emitted) >= before
            before = len(ev.emitted)
            assert is_prefix(ev.emitted, reference)
            if before > 50:
                break
        assert before > 50, str(x)


def test_soundness_on_non_continuous_samples():
    t = load("recurring_first")
    for x in LassoSampler(t).samples(10, seed=6):
        outs = outputs_on(t, x)
        ev = quiet(t, check=False)
        for a in x.take(40):
            ev.feed(a)
            assert all(is_prefix(ev.emitted, y) for y in outs)


def test_candidates_cover_every_safe_letter():
    # After a step nothing more is safe, including letters whose datum lies
    # outside the candidate set: restricting candidates never blocks emission.
    t = load("t_rename3")
    (reference,) = outputs_on(t, BLOCKS)
    ev = quiet(t, check=False)
    outside = 0
    for a in BLOCKS.take(30):
        ev.feed(a)
        nxt = reference[len(ev.emitted)]
        assert not ev.safe_extension(nxt)
        outside += nxt[1] not in {d for _, d in ev.prefix} | {0}
    assert outside > 0
