"""Acceptance suite: one test per criterion, each printing one PASS/FAIL line."""

import random
import time
import warnings

import pytest

from oracles import brute_nonfunctional, corpus_files, load, random_nft
from regtrans import decide
from regtrans.compose import compose
from regtrans.errors import ResourceError
from regtrans.evaluate import Evaluator
from regtrans.format import load_transducer, parse_lasso
from regtrans.model import outputs_on
from regtrans.normalize import expand_tests, is_test_free, remove_reassignments
from test_compose import PAIRS, pipeline, prefixes
from test_normalize import sampler_for
from test_parikh import run_random_queries
from sampling import LassoSampler

# machines whose general-path expansion is out of reach by design (criterion 8)
GENERAL_INFEASIBLE = {"testfree_wide"}
SMALL_CAP = 200_000


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, detail

    return emit


def replays(t, v) -> bool:
    if v.answer:
        return True
    if isinstance(v.witness, decide.FunctionalityWitness):
        return decide.check_functionality_witness(t, v.witness)
    return decide.check_continuity_pattern(t, v.witness)


def timed(f, *args, **kw):
    t0 = time.perf_counter()
    v = f(*args, **kw)
    return v, time.perf_counter() - t0


def test_criterion_1_example_verdicts(report):
    problems = []
    slowest = 0.0

    def check(name, fun, cont, path="auto"):
        nonlocal slowest
        t = load(name)
        v, s = timed(decide.functional, t, path)
        slowest = max(slowest, s)
        if v.answer != fun or not replays(t, v):
            problems.append(f"{name} functional via {path}")
        if fun:
            c, s = timed(decide.continuous, t, path)
            slowest = max(slowest, s)
            if c.answer != cont or not replays(t, c):
                problems.append(f"{name} continuous via {path}")
        elif len(v.witness.outputs) != 2:
            problems.append(f"{name} witness lacks two outputs")

    check("t_rename", False, None)
    check("t_rename2", True, False)
    check("t_rename3", True, True)
    check("recurring_first", True, False)
    if not is_test_free(load("testfree_example")):
        problems.append("testfree_example is not test-free")
    for path in (decide.GENERAL, decide.TEST_FREE):
        check("testfree_example", True, False, path)
    ok = not problems and slowest < 60
    report(1, ok, f"slowest check {slowest:.2f}s; problems: {problems or 'none'}")


def test_criterion_2_data_bound_stability(report):
    discrepancies = []
    checked = 0
    for path in corpus_files():
        if path.stem in GENERAL_INFEASIBLE:
            continue
        t = load_transducer(path)
        k = len(t.registers)
        sizes = (2 * k + 3, 2 * k + 4, 2 * k + 8)
        fun = [decide.functional(t, decide.GENERAL, s).answer for s in sizes]
        cont = [decide.continuous(t, decide.GENERAL, s).answer for s in sizes] if all(fun) else []
        checked += 1
        if len(set(fun)) > 1 or len(set(cont)) > 1:
            discrepancies.append(path.stem)
    skipped = sorted(GENERAL_INFEASIBLE)
    report(2, not discrepancies, f"{checked} machines x 3 sizes, discrepancies {discrepancies}; general path infeasible for {skipped}")


def test_criterion_3_random_nft_functionality(report):
    rng = random.Random(2024)
    missed = false_witnesses = found = negative = 0
    for _ in range(500):
        t = random_nft(rng)
        v = decide.functional(t)
        negative += not v.answer
        if not replays(t, v):
            false_witnesses += 1
        if brute_nonfunctional(t, 6) is not None:
            found += 1
            missed += v.answer
    ok = missed == 0 and false_witnesses == 0
    report(3, ok, f"500 NFTs: {found} brute-force counterexamples, {negative} negative verdicts, {missed} missed, {false_witnesses} false witnesses")


def test_criterion_4_counting_engine(report):
    bad = run_random_queries(1000, seed=99)
    report(4, not bad, f"1000 random queries, disagreements {bad}")


def test_criterion_5_composition(report):
    mismatches = []
    compared = 0
    for outer, inner, source in PAIRS:
        tf, tg = load(outer), load(inner)
        c = compose(tf, tg)
        xs = LassoSampler(load(source)).samples(100, seed=5)
        if len(xs) < 100:
            mismatches.append(f"{outer}/{inner}: only {len(xs)} samples")
        for x in xs:
            compared += 1
            if prefixes(outputs_on(c, x)) != prefixes(pipeline(tf, tg, x)):
                mismatches.append(f"{outer}/{inner} on {x}")
    for ident, name in (("identity_log", "t_rename3"), ("identity_ab", "relabel")):
        t = load(name)
        c = compose(load(ident), t)
        for x in LassoSampler(t).samples(30, seed=6):
            compared += 1
            if outputs_on(c, x) != outputs_on(t, x):
                mismatches.append(f"identity after {name} on {x}")
    report(5, not mismatches, f"{compared} lassos compared, mismatches {mismatches[:3]}")


def test_criterion_6_normalization(report):
    bad = []
    for path in corpus_files():
        t = load_transducer(path)
        e, r = expand_tests(t), remove_reassignments(t)
        if len(r.registers) != len(t.registers) + 1:
            bad.append(f"{path.stem}: register count")
        xs = sampler_for(t).samples(100, seed=13)
        if len(xs) < 100:
            bad.append(f"{path.stem}: {len(xs)} samples")
        for x in xs:
            ref = outputs_on(t, x)
            if outputs_on(e, x) != ref or outputs_on(r, x) != ref:
                bad.append(f"{path.stem} on {x}")
    report(6, not bad, f"{len(corpus_files())} machines x 100 lassos, failures {bad[:3]}")


def test_criterion_7_evaluator(report):
    t3 = load("t_rename3")
    x = parse_lasso("del:1 ch:2 ch:3 (#:0 a:1 a:4 a:2 a:5 a:6 $:0)w")
    (reference,) = outputs_on(t3, x)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ev = Evaluator(t3)
    short = []
    sound = True
    for i, a in enumerate(x.take(7 * 20), start=1):
        ev.feed(a)
        sound = sound and tuple(ev.emitted) == reference.take(len(ev.emitted))
        if i % 7 == 0 and len(ev.emitted) < 5 * (i // 7 - 1):
            short.append(i // 7)
    t2 = load("t_rename2")
    y = parse_lasso("del:1 ch:2 ch:3 #:0 (a:1)w")
    (ref2,) = outputs_on(t2, y)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ev2 = Evaluator(t2)
    sound2 = True
    for a in y.take(100):
        ev2.feed(a)
        sound2 = sound2 and tuple(ev2.emitted) == ref2.take(len(ev2.emitted))
    ok = sound and not short and sound2 and not ev2.emitted
    report(7, ok, f"rename3 emitted {len(ev.emitted)} letters after 140, short at n={short}, sound={sound}; rename2 emitted {len(ev2.emitted)} after 100")


def test_criterion_8_complexity_gap(report):
    t = load("testfree_wide")
    fast, fast_s = timed(decide.testfree_functional, t)
    t0 = time.perf_counter()
    try:
        slow = decide.nrt_functional(t, cap=SMALL_CAP)
        outcome = f"general path finished in {time.perf_counter() - t0:.2f}s"
        gap = time.perf_counter() - t0 > 10 * fast_s and slow.answer == fast.answer
    except ResourceError:
        outcome = f"general path exceeded the cap of {SMALL_CAP} states after {time.perf_counter() - t0:.2f}s"
        gap = True
    no_expansion = fast.stats["expanded_states"] == 0
    ok = fast.answer and fast_s < 10 and gap and no_expansion and len(t.registers) == 8
    report(8, ok, f"test-free path {fast_s:.2f}s ({fast.stats['mark_nodes']} mark nodes, 0 expanded states); {outcome}")


def test_criterion_9_witness_replay(report):
    total = failed = 0

    def gate(t, v):
        nonlocal total, failed
        if not v.answer:
            total += 1
            failed += not replays(t, v)

    for path in corpus_files():
        t = load_transducer(path)
        paths = ["auto"] if path.stem in GENERAL_INFEASIBLE else [decide.GENERAL]
        if is_test_free(t) and t.registers:
            paths.append(decide.TEST_FREE)
        for p in paths:
            v = decide.functional(t, p)
            gate(t, v)
            if v.answer:
                gate(t, decide.continuous(t, p))
    a, b = load("t_rename2"), load("t_rename2_swapped")
    gate(decide.disjoint_union(a, b), decide.equivalent_on_common_domain(a, b))
    rng = random.Random(2024)
    for _ in range(500):
        t = random_nft(rng)
        v = decide.functional(t)
        gate(t, v)
        if v.answer:
            gate(t, decide.continuous(t))
    report(9, failed == 0 and total > 0, f"{total} negative verdicts, {failed} failed replays")
