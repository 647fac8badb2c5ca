"""Command-line interface: adev check|translate|grad|optimize|validate|witness FILE.

FILE is a path to a .adev program or the name of a bundled corpus program.
Exit status: 0 on success or pass, 1 on a failed check, 2 on usage, parse,
type or runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import corpus
from .compiler import compile_program
from .errors import AdevError, ParseError, TypeCheckError
from .harness import find_oracle, mc_gradient, sgd, validate
from .parser import parse_program
from .printer import pretty_print, show_type
from .runtime import RuntimeConfig
from .specialize import SpecializationError, specialize
from .transform import ad_term, normalize
from .typecheck import check_entry
from .witness import probe_witness

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def load(arg: str):
    """(Program, manifest entry or None) for a path or corpus name."""
    path = Path(arg)
    if path.exists():
        program = parse_program(path.read_text(encoding="utf-8"), path.stem)
        return program, corpus.lookup(program)
    if arg in corpus.load_manifest():
        entry = corpus.get(arg)
        return entry.program(), entry
    raise FileNotFoundError(f"no such file or corpus program: {arg}")


def _seed(args) -> int:
    if args.fresh_seed:
        return int.from_bytes(os.urandom(8), "little")
    return args.seed


def _config(args) -> RuntimeConfig:
    return RuntimeConfig(plus_est=args.plus_est)


def _emit(args, obj, text):
    print(json.dumps(obj) if args.json else text)


def _pick(value, entry, attr, default):
    if value is not None:
        return value
    if entry is not None and getattr(entry, attr) is not None:
        return getattr(entry, attr)
    return default


def cmd_check(args):
    status = EXIT_OK
    for arg in args.files:
        program, _ = load(arg)
        try:
            e = check_entry(program)
        except TypeCheckError as err:
            _emit(args, {"program": program.name, "ok": False, **err.to_json()},
                  f"{program.name}: {err}")
            status = EXIT_ERROR
            continue
        _emit(args, {"program": program.name, "ok": True, "type": show_type(e.type)},
              f"{program.name}: ok : {show_type(e.type)}")
    return status


def cmd_translate(args):
    program, _ = load(args.files[0])
    entry = check_entry(program)
    if args.normalize:
        try:
            term = specialize(program)
        except SpecializationError as err:
            print(f"note: {err}; showing the administrative normal form", file=sys.stderr)
            term = normalize(ad_term(entry.term))
    elif args.admin:
        term = normalize(ad_term(entry.term))
    else:
        term = ad_term(entry.term)
    print(pretty_print(term))
    return EXIT_OK


def cmd_grad(args):
    status = EXIT_OK
    for arg in args.files:
        program, entry = load(arg)
        theta = _pick(args.theta, entry, "theta", None)
        if theta is None:
            raise SystemExit("grad: --theta is required for programs outside the corpus")
        n = _pick(args.n, None, "n", 10_000)
        c = compile_program(program, config=_config(args))
        oracle, prov, floor = find_oracle(c, theta, 0, manifest_entry=entry)
        r = mc_gradient(c, theta, n, _seed(args), oracle=oracle, provenance=prov,
                        floor=floor, threads=args.threads)
        _emit(args, r.to_json(), r.summary())
        if r.passed is False:
            status = EXIT_FAIL
    return status


def cmd_validate(args):
    specs = args.files or [e.name for e in corpus.entries()]
    status = EXIT_OK
    for arg in specs:
        program, entry = load(arg)
        theta = _pick(args.theta, entry, "theta", None)
        if theta is None:
            raise SystemExit(f"validate: --theta is required for {arg}")
        n = _pick(args.n, entry, "n", 10_000) or 10_000
        r = validate(program, theta, n, _seed(args), threads=args.threads,
                     manifest_entry=entry, config=_config(args))
        _emit(args, r.to_json(), r.summary())
        if r.passed is False:
            status = EXIT_FAIL
    return status


def cmd_optimize(args):
    program, entry = load(args.files[0])
    theta0 = _pick(args.theta, entry, "theta", None)
    if theta0 is None:
        raise SystemExit("optimize: --theta (the starting point) is required")
    trace = sgd(program, theta0, args.lr, args.steps, _seed(args), config=_config(args))
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            csv.writer(f).writerows(trace.to_csv_rows())
    _emit(args, {"program": trace.program, "theta0": trace.theta0, "lr": trace.lr,
                 "steps": trace.steps, "seed": trace.seed, "final": trace.final},
          f"{trace.program}: θ {trace.theta0:g} -> {trace.final:.6g} "
          f"after {trace.steps} steps (lr={trace.lr:g})")
    return EXIT_OK


def cmd_witness(args):
    program, entry = load(args.files[0])
    theta = _pick(args.theta, entry, "theta", None)
    if theta is None:
        raise SystemExit("witness: --theta is required for programs outside the corpus")
    reference = entry.loss(theta) if entry is not None and entry.L else None
    r = probe_witness(program, theta, args.points, _seed(args), reference=reference)
    if r.unavailable:
        text = f"{r.program}: {r.unavailable}"
    else:
        text = (f"{r.program} θ={theta:g}: max |h2 - FD(h1)| = {r.max_fd_error:.3g} over "
                f"{r.points} seeds, max jump = {r.max_jump:.3g}, envelope (advisory) = "
                f"{r.envelope:.3g}")
        if r.integral is not None:
            text += f", ∫h1 = {r.integral:.10g}"
            if r.integral_reference is not None:
                text += f" (L = {r.integral_reference:.10g})"
        text += " -> " + ("PASS" if r.passed else "FAIL")
    _emit(args, r.to_json(), text)
    if r.unavailable:
        return EXIT_ERROR
    return EXIT_OK if r.passed else EXIT_FAIL


def build_parser():
    p = argparse.ArgumentParser(prog="adev", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(name, fn, help_, many=False):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("files", nargs="*" if many else 1, metavar="FILE")
        sp.add_argument("--json", action="store_true", help="one JSON object per line")
        sp.set_defaults(fn=fn)
        return sp

    def sampling(sp):
        sp.add_argument("--theta", type=float)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--fresh-seed", action="store_true",
                        help="draw the seed from the operating system")
        sp.add_argument("--plus-est", choices=("coin", "both-arms"), default="coin")
        sp.add_argument("--threads", type=int, default=1)

    common("check", cmd_check, "type-check programs", many=True)
    t = common("translate", cmd_translate, "print the translated program")
    t.add_argument("--normalize", action="store_true",
                   help="reduce to a source-level derivative program when possible")
    t.add_argument("--admin", action="store_true",
                   help="administrative normal form of the translation")
    g = common("grad", cmd_grad, "Monte Carlo derivative estimate", many=True)
    sampling(g)
    g.add_argument("--n", type=int)
    v = common("validate", cmd_validate, "compare the estimate with an oracle", many=True)
    sampling(v)
    v.add_argument("--n", type=int)
    o = common("optimize", cmd_optimize, "stochastic gradient descent")
    sampling(o)
    o.add_argument("--lr", type=float, default=0.2)
    o.add_argument("--steps", type=int, default=100)
    o.add_argument("--csv", metavar="PATH")
    w = common("witness", cmd_witness, "probe the witness functions")
    sampling(w)
    w.add_argument("--points", type=int, default=100)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_OK
    if getattr(args, "files", None) is not None and args.command != "validate" and not args.files:
        parser.print_usage(sys.stderr)
        return EXIT_ERROR
    try:
        return args.fn(args)
    except (ParseError, TypeCheckError, AdevError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as e:
        print(e.code, file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
