import io
import json

import pytest

from oracles import CORPUS
from regtrans.cli import main
from regtrans.format import load_transducer


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def corpus(name):
    return next(p for p in CORPUS.iterdir() if p.stem == name)


def test_functional_failure_prints_witness(capsys):
    code, out, _ = run(capsys, "check-functional", corpus("t_rename"))
    assert code == 1
    v = json.loads(out)
    assert v["answer"] is False and len(v["witness"]["outputs"]) == 2


def test_computable_rename3(capsys):
    code, out, _ = run(capsys, "check-computable", corpus("t_rename3"))
    assert code == 0 and json.loads(out)["answer"] is True


def test_continuity_alias_and_pattern(capsys):
    code, out, _ = run(capsys, "check-continuous", corpus("t_rename2"))
    assert code == 1 and "pattern" in json.loads(out)["witness"]


def test_data_set_size_override_keeps_verdict(capsys):
    def body(*extra):
        code, out, _ = run(capsys, "check-functional", corpus("t_rename"), *extra)
        v = json.loads(out)
        v["stats"].pop("millis")
        v["stats"].pop("data_values")
        return code, v

    assert body() == body("--data-set-size", 12)


def test_output_is_deterministic(capsys):
    outs = []
    for _ in range(2):
        _, out, _ = run(capsys, "check-computable", corpus("recurring_first"))
        v = json.loads(out)
        v["stats"].pop("millis")
        outs.append(v)
    assert outs[0] == outs[1]


@pytest.mark.parametrize("name", ["swap", "testfree_example", "testfree_nonfunctional", "identity_ab"])
def test_forced_paths_agree(capsys, name):
    a, out_a, _ = run(capsys, "check-functional", corpus(name), "--force-general")
    b, out_b, _ = run(capsys, "check-functional", corpus(name), "--force-testfree")
    assert a == b
    assert json.loads(out_a)["procedure"] == "general"
    assert json.loads(out_b)["procedure"] == "test-free"


def test_precondition_exit_code(capsys):
    code, out, err = run(capsys, "check-computable", corpus("t_rename"))
    assert code == 3 and "functional" in err
    assert json.loads(out)["answer"] is False
    code, _, _ = run(capsys, "check-functional", corpus("recurring_first"), "--force-testfree")
    assert code == 3


def test_resource_exit_code(capsys):
    code, _, err = run(capsys, "check-functional", corpus("testfree_wide"), "--force-general", "--cap", 20000)
    assert code == 4 and "test-free" in err


def test_usage_and_parse_errors(capsys, tmp_path):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "check-functional")[0] == 2
    assert run(capsys, "check-functional", "--force-general", "--force-testfree", corpus("swap"))[0] == 2
    bad = tmp_path / "bad.nrt"
    bad.write_text("nrt broken {")
    assert run(capsys, "check-functional", bad)[0] == 2
    assert run(capsys, "eval", corpus("delay"), "--lasso", "(a:1)w")[0] == 2
    assert run(capsys, "membership", corpus("delay"), "--lasso", "a:1 ()w")[0] == 2


def test_equivalence(capsys):
    code, out, _ = run(capsys, "check-equivalent", corpus("t_rename2"), corpus("t_rename2_swapped"))
    assert code == 1 and json.loads(out)["witness"]["outputs"]
    code, _, _ = run(capsys, "check-equivalent", corpus("identity_ab"), corpus("relabel"))
    assert code == 1


def test_compose_writes_a_machine(capsys, tmp_path):
    out = tmp_path / "c.nrt"
    code, _, _ = run(capsys, "compose", corpus("delay"), corpus("swap"), "-o", out)
    assert code == 0
    c = load_transducer(out)
    assert c.input_labels == ("a",)


@pytest.mark.parametrize("flag", ["--expand-tests", "--remove-reassign"])
def test_normalize(capsys, tmp_path, flag):
    out = tmp_path / "n.nrt"
    assert run(capsys, "normalize", corpus("t_rename"), flag, "-o", out)[0] == 0
    assert load_transducer(out).states


def test_trim_needs_data_for_tests(capsys, tmp_path):
    out = tmp_path / "n.nft"
    assert run(capsys, "normalize", corpus("t_rename"), "--trim", "-o", out)[0] == 3
    assert run(capsys, "normalize", corpus("t_rename"), "--trim", "--data", "0,1,2", "-o", out)[0] == 0
    assert run(capsys, "normalize", corpus("testfree_example"), "--trim", "-o", out)[0] == 0


def test_restrict(capsys, tmp_path):
    out = tmp_path / "r.nft"
    assert run(capsys, "restrict", corpus("swap"), "--data", "0,1", "-o", out)[0] == 0
    t = load_transducer(out)
    assert t.kind == "nft" and not t.registers


def test_is_test_free_and_validate(capsys):
    assert run(capsys, "is-test-free", corpus("swap"))[0] == 0
    assert run(capsys, "is-test-free", corpus("t_rename"))[0] == 1
    assert run(capsys, "validate", corpus("t_rename2"))[0] == 0
    code, out, _ = run(capsys, "validate", corpus("t_rename3"))
    assert code == 1 and json.loads(out)["infinite_output"] is False


def test_membership(capsys):
    code, out, _ = run(capsys, "membership", corpus("t_rename"), "--lasso", "del:1 ch:2 ch:3 #:0 a:1 (a:5)w")
    assert code == 0 and len(json.loads(out)["outputs"]) == 2
    assert run(capsys, "membership", corpus("t_rename"), "--lasso", "(a:1)w")[0] == 1


def test_eval_lasso(capsys):
    code, out, _ = run(capsys, "eval", corpus("identity_ab"), "--lasso", "(a:1 b:2)w", "--steps", 4)
    assert code == 0 and json.loads(out)["emitted"] == "a:1 b:2 a:1 b:2"


def test_eval_stream(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("a:1\n\nb:2\n"))
    code, out, _ = run(capsys, "eval", corpus("identity_ab"), "--stream")
    assert code == 0 and out.split() == ["a:1", "b:2"]


def test_eval_domain_error(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("del:1\na:1\n"))
    code, _, err = run(capsys, "eval", corpus("t_rename3"), "--stream")
    assert code == 1 and "dom" in err
