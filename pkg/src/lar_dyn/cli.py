"""``lar-dyn`` command line entry point.

Exit codes: 0 ok, 2 parse error, 3 validation error, 4 invariant failure,
5 numerical failure.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
import json
import logging
import os
import sys

from .errors import LarError
from .runner import invariant_suite, run
from .scenario import load_scenario

log = logging.getLogger("lar_dyn")

EXIT_OK = 0


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="lar-dyn", description="Run preference-dynamics scenarios.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-scale", type=_positive, default=1.0,
                        help="multiply every invariant tolerance")
    common.add_argument("--seed", type=_seed, default=None,
                        help="override the scenario and random-generator seed")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run scenarios and write outputs")
    r.add_argument("scenarios", nargs="+")
    r.add_argument("--out", required=True, help="output directory")
    c = sub.add_parser("check", parents=[common], help="validate scenarios only")
    c.add_argument("scenarios", nargs="+")
    i = sub.add_parser("invariants", parents=[common], help="print the invariant table")
    i.add_argument("scenarios", nargs="+")
    return p


def _err(exc):
    print(f"lar-dyn: {exc.code}: {exc}", file=sys.stderr)
    return exc.exit_code


def _run_one(path, out_root, many, args):
    try:
        scn = load_scenario(path, args.seed)
        out = os.path.join(out_root, scn.name) if many else out_root
        run(scn, out, args.tol_scale)
        print(f"{path}: ok -> {out}")
        return EXIT_OK
    except LarError as exc:
        return _err(exc)


def cmd_run(args):
    paths = args.scenarios
    many = len(paths) > 1
    threads = int(os.environ.get("LAR_DYN_THREADS", "1") or 1)
    threads = max(1, min(threads, len(paths)))
    if threads == 1:
        codes = [_run_one(p, args.out, many, args) for p in paths]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            codes = list(ex.map(lambda p: _run_one(p, args.out, many, args), paths))
    return max(codes)


def cmd_check(args):
    code = EXIT_OK
    for path in args.scenarios:
        try:
            scn = load_scenario(path, args.seed)
            print(json.dumps(scn.echo(), sort_keys=True))
        except LarError as exc:
            code = max(code, _err(exc))
    return code


def cmd_invariants(args):
    code = EXIT_OK
    for path in args.scenarios:
        try:
            scn = load_scenario(path, args.seed)
            rows = invariant_suite(scn, args.tol_scale)
        except LarError as exc:
            code = max(code, _err(exc))
            continue
        print(f"# {scn.name}")
        print(f"{'invariant':36s} {'measured':>12s} {'tolerance':>12s}  result")
        for r in rows:
            print(f"{r.name:36s} {r.measured:12.3e} {r.tolerance:12.3e}  "
                  f"{'PASS' if r.passed else 'FAIL'}")
        if not all(r.passed for r in rows):
            code = max(code, 4)
    return code


def main(argv=None):
    logging.basicConfig(level=os.environ.get("LAR_DYN_LOG", "WARNING"))
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "check": cmd_check, "invariants": cmd_invariants}[args.command]
    try:
        return handler(args)
    except LarError as exc:
        return _err(exc)


if __name__ == "__main__":
    sys.exit(main())
