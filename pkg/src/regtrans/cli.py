"""Command-line interface.

Exit codes: 0 property holds, 1 property fails (witness as JSON on stdout),
2 usage or parse error, 3 precondition violated, 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

from . import decide
from .compose import compose
from .errors import DefinitionError, DomainError, ParseError, PreconditionError, ResourceError
from .evaluate import Evaluator
from .format import dump_transducer, emit_verdict, format_lasso, format_word, load_transducer, parse_lasso, parse_letter
from .model import find_accepting_run, outputs_on
from .normalize import expand_tests, is_test_free, remove_reassignments, trim, validate_infinite_output
from .restrict import DEFAULT_CAP, restrict_to_finite_data

HOLDS, FAILS, USAGE, PRECONDITION, RESOURCE = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _data_list(text: str) -> tuple:
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or min(values) < 0:
        raise argparse.ArgumentTypeError("data values must be non-negative integers")
    return values


def _write(t, path):
    text = dump_transducer(t)
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _verdict(v) -> int:
    print(emit_verdict(v))
    return HOLDS if v.answer else FAILS


def _path(args) -> str:
    if getattr(args, "force_general", False):
        return decide.GENERAL
    if getattr(args, "force_testfree", False):
        return decide.TEST_FREE
    return "auto"


def cmd_check_functional(args):
    t = load_transducer(args.file)
    return _verdict(decide.functional(t, _path(args), args.data_set_size, args.cap))


def cmd_check_continuous(args):
    t = load_transducer(args.file)
    return _verdict(decide.continuous(t, _path(args), args.data_set_size, args.cap))


def cmd_check_equivalent(args):
    t1, t2 = load_transducer(args.file1), load_transducer(args.file2)
    return _verdict(decide.equivalent_on_common_domain(t1, t2, _path(args), args.cap))


def cmd_compose(args):
    tf, tg = load_transducer(args.f_file), load_transducer(args.g_file)
    _write(compose(tf, tg), args.output)
    return HOLDS


def cmd_normalize(args):
    t = load_transducer(args.file)
    if args.expand_tests:
        t = expand_tests(t)
    elif args.remove_reassign:
        t = remove_reassignments(t)
    else:
        t = trim(t, args.data)
    _write(t, args.output)
    return HOLDS


def cmd_restrict(args):
    t = load_transducer(args.file)
    _write(restrict_to_finite_data(t, args.data, cap=args.cap).to_nft(), args.output)
    return HOLDS


def cmd_is_test_free(args):
    answer = is_test_free(load_transducer(args.file))
    print(json.dumps({"test_free": answer}))
    return HOLDS if answer else FAILS


def cmd_validate(args):
    t = load_transducer(args.file)
    check = validate_infinite_output(t)
    out = {"well_formed": True, "infinite_output": check.ok}
    if check.witness is not None:
        out["witness"] = {"input": format_lasso(check.witness)}
    print(json.dumps(out))
    return HOLDS if check.ok else FAILS


def cmd_membership(args):
    t = load_transducer(args.file)
    x = parse_lasso(args.lasso)
    accepted = find_accepting_run(t, x) is not None
    out = {"input": format_lasso(x), "accepted": accepted}
    if accepted:
        out["outputs"] = sorted(str(y) for y in outputs_on(t, x))
    print(json.dumps(out))
    return HOLDS if accepted else FAILS


def _evaluator(args):
    t = load_transducer(args.file)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ev = Evaluator(t, check=not args.no_check, cap=args.cap)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return ev


def cmd_eval(args):
    ev = _evaluator(args)
    if args.stream:
        if ev.emitted:
            print(format_word(ev.emitted), flush=True)
        for line in sys.stdin:
            if not line.strip():
                continue
            try:
                new = ev.feed(parse_letter(line))
            except DomainError as e:
                print(f"error: {e}", file=sys.stderr)
                return FAILS
            for a in new:
                print(format_word([a]), flush=True)
        return HOLDS
    x = parse_lasso(args.lasso)
    try:
        for a in x.take(args.steps):
            ev.feed(a)
    except DomainError as e:
        print(json.dumps({"input": format_lasso(x), "error": str(e), "emitted": format_word(ev.emitted)}))
        return FAILS
    out = {"input": format_lasso(x), "steps": args.steps, "emitted": format_word(ev.emitted)}
    if ev.diagnostics:
        out["diagnostics"] = ev.diagnostics
    print(json.dumps(out))
    return HOLDS


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="regtrans", description="Decision procedures for register transducers.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, func, *aliases, routed=False):
        c = sub.add_parser(name, aliases=list(aliases))
        c.set_defaults(func=func)
        c.add_argument("--cap", type=int, default=DEFAULT_CAP, help="state budget of explorations")
        if routed:
            g = c.add_mutually_exclusive_group()
            g.add_argument("--force-general", action="store_true")
            g.add_argument("--force-testfree", action="store_true")
        return c

    c = command("check-functional", cmd_check_functional, routed=True)
    c.add_argument("file")
    c.add_argument("--data-set-size", type=int, default=None)

    c = command("check-computable", cmd_check_continuous, "check-continuous", routed=True)
    c.add_argument("file")
    c.add_argument("--data-set-size", type=int, default=None)

    c = command("check-equivalent", cmd_check_equivalent, routed=True)
    c.add_argument("file1")
    c.add_argument("file2")

    c = command("compose", cmd_compose)
    c.add_argument("f_file")
    c.add_argument("g_file")
    c.add_argument("-o", "--output", required=True)

    c = command("normalize", cmd_normalize)
    c.add_argument("file")
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--expand-tests", action="store_true")
    g.add_argument("--remove-reassign", action="store_true")
    g.add_argument("--trim", action="store_true")
    c.add_argument("--data", type=_data_list, default=None, help="data set for trimming a machine with tests")
    c.add_argument("-o", "--output", required=True)

    c = command("restrict", cmd_restrict)
    c.add_argument("file")
    c.add_argument("--data", type=_data_list, required=True)
    c.add_argument("-o", "--output", required=True)

    c = command("is-test-free", cmd_is_test_free)
    c.add_argument("file")

    c = command("validate", cmd_validate)
    c.add_argument("file")

    c = command("eval", cmd_eval)
    c.add_argument("file")
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--lasso")
    g.add_argument("--stream", action="store_true")
    c.add_argument("--steps", type=int, default=None)
    c.add_argument("--no-check", action="store_true", help="skip the functionality and continuity checks")

    c = command("membership", cmd_membership)
    c.add_argument("file")
    c.add_argument("--lasso", required=True)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "eval" and args.lasso is not None and args.steps is None:
            raise _UsageError("--lasso needs --steps")
        return args.func(args)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except (ParseError, DefinitionError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except PreconditionError as e:
        print(f"precondition violated: {e}", file=sys.stderr)
        if isinstance(e.witness, decide.Verdict):
            print(emit_verdict(e.witness))
        return PRECONDITION
    except ResourceError as e:
        print(f"resource cap exceeded: {e}", file=sys.stderr)
        return RESOURCE


if __name__ == "__main__":
    sys.exit(main())
