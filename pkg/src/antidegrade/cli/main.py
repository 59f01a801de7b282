"""``antidegrade`` command-line entry point.

Exit codes: 0 Degradable, 10 NotDegradable, 20 Inconclusive, 1 input error.
Reports are JSON on stdout (or ``--out``) and embed the run configuration;
they contain no timings, so reruns with the same configuration are identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from .. import __version__
from .. import sdp
from ..channels import ChannelError, is_complete_channel
from ..comparison import WitnessConfig, is_antidegradable, is_extension
from ..jsonio import (
    ZOO_PARAMS,
    SpecError,
    channel_from_spec,
    encode_matrix,
    encode_povm,
    encode_verdict,
    ensemble_from_json,
    witness_from_json,
)
from ..matkernel import ShapeError
from .simulate import RNG_ALGORITHM, simulate
from .threshold import FAMILIES, family_threshold

EXIT_CODES = {"Degradable": 0, "NotDegradable": 10, "Inconclusive": 20}
EXIT_INPUT = 1


class InputError(Exception):
    pass


def load_json(arg: str):
    """Parse ``arg`` as inline JSON (starts with ``{``), ``-`` for stdin, or a file path."""
    if arg.lstrip().startswith("{") or arg.lstrip().startswith("["):
        text, src = arg, "<inline>"
    elif arg == "-":
        text, src = sys.stdin.read(), "<stdin>"
    else:
        try:
            with open(arg) as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {arg}: {exc.strerror}") from None
        src = arg
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{src}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_channel(arg: str):
    try:
        return channel_from_spec(load_json(arg))
    except (SpecError, ChannelError, ShapeError, ValueError) as exc:
        raise InputError(f"invalid channel: {exc}") from None


def run_config(args) -> dict:
    cfg = {"command": args.command, "tol": args.tol, "seed": args.seed, "restarts": args.restarts,
           "rounds": args.rounds, "delta": args.delta, "rng": RNG_ALGORITHM}
    return cfg


def witness_config(args) -> WitnessConfig:
    verify = replace(sdp.DEFAULT_CONFIG, eps_abs=min(args.tol, 1e-9), status_tol=max(args.tol, 1e-8))
    kw = {"restarts": args.restarts, "seed": args.seed, "delta": args.delta, "verify": verify}
    if args.rounds is not None:
        kw["rounds"] = args.rounds
    return WitnessConfig(**kw)


def emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_analyze(args) -> int:
    c = load_channel(args.channel)
    v = is_antidegradable(c, witness_config(args))
    report = encode_verdict(v)
    report["input"] = load_json(args.channel)
    report["config"] = run_config(args)
    emit(report, args.out)
    return EXIT_CODES[v.name]


def cmd_compare(args) -> int:
    a = load_channel(args.alpha)
    b = load_channel(args.beta)
    if a.dim_in != b.dim_in:
        raise InputError(f"input dimensions differ: {a.dim_in} vs {b.dim_in}")
    v = is_extension(a, b, witness_config(args))
    report = encode_verdict(v)
    report["input"] = {"alpha": load_json(args.alpha), "beta": load_json(args.beta)}
    report["config"] = run_config(args)
    emit(report, args.out)
    return EXIT_CODES[v.name]


def cmd_guess(args) -> int:
    c = load_channel(args.channel)
    try:
        e = ensemble_from_json(load_json(args.ensemble))
    except (SpecError, ValueError) as exc:
        raise InputError(f"invalid ensemble: {exc}") from None
    if e.dim != c.dim_in:
        raise InputError(f"ensemble dimension {e.dim} != channel input {c.dim_in}")
    pstar, povm, dual = sdp.guessing_probability(c, e, replace(sdp.DEFAULT_CONFIG, eps_abs=min(args.tol, 1e-9)))
    bound = float(np.real(np.trace(dual)))
    emit({"pstar": pstar, "dual_bound": bound, "dual_gap": bound - pstar, "povm": encode_povm(povm),
          "dual": encode_matrix(dual), "config": run_config(args)}, args.out)
    return 0


def cmd_simulate(args) -> int:
    obj = load_json(args.witness)
    if isinstance(obj, dict) and "witness" in obj:
        obj = obj["witness"]
    try:
        w = witness_from_json(obj)
    except (SpecError, ChannelError, ShapeError, ValueError) as exc:
        raise InputError(f"invalid witness: {exc}") from None
    rounds = args.rounds if args.rounds is not None else 100_000
    rep = simulate(w, rounds, args.seed)
    out = rep.as_dict()
    out["config"] = run_config(args)
    emit(out, args.out)
    return 0 if rep.bob_within_3sigma and rep.eve_within_3sigma else 20


def cmd_threshold(args) -> int:
    if args.family not in FAMILIES:
        raise InputError(f"unknown family {args.family!r}; known: {sorted(FAMILIES)}")
    lo, hi = args.range
    if not (0.0 <= lo < hi <= 1.0):
        raise InputError("range must satisfy 0 <= lo < hi <= 1")
    res = family_threshold(args.family, lo, hi, witness_config(args), args.width)
    res["config"] = run_config(args)
    emit(res, args.out)
    return 0 if res["monotone"] else 20


def cmd_zoo(args) -> int:
    emit({"zoo": ZOO_PARAMS}, args.out)
    return 0


def cmd_validate(args) -> int:
    c = load_channel(args.channel)
    rank, complete = is_complete_channel(c)
    emit({"valid": True, "dim_in": c.dim_in, "dim_out": c.dim_out, "range_rank": rank, "complete": complete}, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="solver absolute tolerance")
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice")
    common.add_argument("--rounds", type=int, default=None,
                        help="see-saw rounds (analyze/compare/threshold) or game rounds G (simulate)")
    common.add_argument("--restarts", type=int, default=10, help="see-saw restarts")
    common.add_argument("--delta", type=float, default=1e-3, help="minimal certified gap for a witness")
    common.add_argument("--out", default=None, help="write the JSON report here instead of stdout")

    p = argparse.ArgumentParser(prog="antidegrade", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("analyze", parents=[common], help="decide antidegradability of a channel")
    s.add_argument("channel", help="channel spec: inline JSON, file path or -")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("compare", parents=[common], help="is beta a post-processing of alpha?")
    s.add_argument("alpha")
    s.add_argument("beta")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("guess", parents=[common], help="optimal guessing probability of an ensemble")
    s.add_argument("channel")
    s.add_argument("ensemble")
    s.set_defaults(func=cmd_guess)

    s = sub.add_parser("simulate", parents=[common], help="Monte-Carlo rounds of a witness game")
    s.add_argument("witness", help="witness JSON or an analyze/compare report containing one")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("threshold", parents=[common], help="bisect the antidegradability threshold of a family")
    s.add_argument("family", help=f"one of {sorted(FAMILIES)}")
    s.add_argument("--range", type=float, nargs=2, default=(0.0, 1.0), metavar=("LO", "HI"))
    s.add_argument("--width", type=float, default=0.02, help="target bracket width")
    s.set_defaults(func=cmd_threshold)

    s = sub.add_parser("zoo", parents=[common], help="list built-in channels")
    s.set_defaults(func=cmd_zoo)

    s = sub.add_parser("validate", parents=[common], help="check a channel spec and report completeness")
    s.add_argument("channel")
    s.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
