"""Command-line front end.

Usage::

    hpkahler profile --alpha 0.5 --format csv --out profile.csv
    hpkahler validate --alpha -4
    hpkahler verify --alpha 0.5 --n 2 --tol hp=1e-8 --out report.json
    hpkahler sweep --alphas -3,-1,0,1 --n 2 --format md

Exit codes: 0 all checks pass, 1 some check fails, 2 invalid input.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .profile import (
    Profile,
    ProfileError,
    boundary_report,
    p_alpha,
    p_alpha_unchecked,
    profile_table,
    solve_profile,
    validate_profile,
)
from .report import (
    profile_csv,
    profile_markdown,
    profile_payload,
    render_report,
    render_sweep,
    summary_text,
    to_json,
    write_atomic,
)
from .verifier import VerificationConfig, VerificationError, run_verification, sweep

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _parse_tols(items) -> dict:
    tols = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"--tol expects name=value, got {item!r}")
        try:
            tols[name.strip()] = float(value)
        except ValueError:
            raise InputError(f"bad tolerance value in {item!r}") from None
    return tols


def _parse_alphas(text: str) -> list:
    try:
        return [float(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise InputError(f"bad --alphas list {text!r}") from None


def _config(args, alpha: float) -> VerificationConfig:
    try:
        return VerificationConfig(
            alpha=alpha,
            n=args.n,
            samples_t=args.samples_t,
            samples_base=args.samples_base,
            seed=args.seed,
            tolerances=_parse_tols(args.tol),
            margin=args.margin,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _emit(text: str, out) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _witness_message(exc: ProfileError) -> str:
    msg = f"error: {exc}"
    if exc.witness is not None:
        msg += f"\npositivity witness t = {exc.witness:.12f}"
    return msg


def cmd_profile(args) -> int:
    try:
        sol = solve_profile(p_alpha(args.alpha))
    except ProfileError as exc:
        print(_witness_message(exc), file=sys.stderr)
        return EXIT_INPUT
    table = profile_table(sol, args.points)
    br = boundary_report(sol)
    if args.format == "json":
        text = to_json(profile_payload(sol, table, br))
    elif args.format == "md":
        text = profile_markdown(sol, table, br)
    else:
        text = profile_csv(sol, table, br)
    _emit(text, args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.coeffs is not None:
        try:
            prof = Profile(tuple(float(c) for c in args.coeffs.split(",")))
        except ValueError:
            raise InputError(f"bad --coeffs list {args.coeffs!r}") from None
    else:
        prof = p_alpha_unchecked(args.alpha)
    outcome = validate_profile(prof)
    for name, ok in outcome.clauses.items():
        print(f"{name:<20} {'pass' if ok else 'FAIL'}")
    print(f"{'grid minimum':<20} {outcome.grid_min:.6e}")
    if outcome.witness is not None:
        print(f"positivity witness t = {outcome.witness:.12f}")
    return EXIT_OK if outcome.passed else EXIT_INPUT


def cmd_verify(args) -> int:
    cfg = _config(args, args.alpha)
    try:
        rep = run_verification(cfg)
    except ProfileError as exc:
        print(_witness_message(exc), file=sys.stderr)
        return EXIT_INPUT
    except VerificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    sys.stdout.write(summary_text(rep))
    if args.out:
        write_atomic(args.out, render_report(rep, args.format))
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_sweep(args) -> int:
    alphas = _parse_alphas(args.alphas)
    if not alphas:
        raise InputError("--alphas is empty")
    template = _config(args, alphas[0])
    reports = sweep(alphas, args.n, template, jobs=args.jobs)
    for rep in reports:
        sys.stdout.write(summary_text(rep) if rep.error is None else
                         f"alpha={rep.config['alpha']}: ERROR {rep.error}\n")
    _emit(render_sweep(reports, args.format), args.out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=2, help="complex dimension of CP^n (>= 2)")
    p.add_argument("--samples-t", type=int, default=10)
    p.add_argument("--samples-base", type=int, default=2, help="base points, origin included")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a check tolerance (repeatable)")
    p.add_argument("--margin", type=float, default=0.05, help="interior margin as a fraction of L")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hpkahler", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="solve and tabulate h, h', f, phi on [0, L]")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, default=2, help="accepted for symmetry; the profile does not depend on n")
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json", "md"), default="csv")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("validate", help="check the admissibility of a profile polynomial")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--alpha", type=float)
    g.add_argument("--coeffs", help="comma-separated coefficients, constant term first")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("verify", help="run every check for one alpha")
    p.add_argument("--alpha", type=float, required=True)
    _add_common(p)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json", "md"), default="json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="verify a list of alphas and summarise")
    p.add_argument("--alphas", required=True, help="comma-separated, e.g. -3,-1,0,1")
    _add_common(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json", "md"), default="csv")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "n", 2) < 2:
        print("error: --n must be >= 2", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
