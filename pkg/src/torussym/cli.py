"""Command-line front end.

Exit codes: 0 success, 1 analysis error (a partial JSON document carrying the
error is still written), 2 bad flags or domain config.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import tempfile

from . import __version__
from .analyzer import (Budgets, analyze, check_complete_reinhardt, default_degree, dumps_stable,
                       verify_invariance)
from .condition_d import condition_d_verdict, norm_sequence, sequences_to_csv
from .config import ConfigError, load_domain_config
from .domains import ExpProfileFamily
from .moments import DEFAULT_BUDGET, Policy, gram
from .torus import TorusAction

COMMANDS = ("analyze", "moments", "condition-d", "verify-invariance", "check-complete-reinhardt")


class UsageError(Exception):
    """Flag combination that parses but cannot be honoured."""


def _positive(kind):
    def conv(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
        return v
    return conv


def _nonnegative_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="torussym", description=__doc__.splitlines()[0],
                                     allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"torussym {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def common(p, *, degree=False, method=False, policy=False, terms=False, action=False,
               samples=False, fmt=False):
        p.add_argument("--domain", required=True, help="domain config file (key = value lines)")
        p.add_argument("--seed", type=_nonnegative_int, default=0)
        p.add_argument("--budget", type=_positive(int), default=DEFAULT_BUDGET,
                       help="Monte Carlo samples (accepted points)")
        p.add_argument("--k", type=int, choices=(0, 1), default=None,
                       help="override the family index of an exp_profile domain")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        if degree:
            p.add_argument("--degree", type=_positive(int), default=None,
                           help="degree bound N (default 4 in C^2, 3 in C^3)")
        if method:
            p.add_argument("--method", choices=("auto", "mc", "quad"), default="auto")
        if policy:
            p.add_argument("--policy-abstol", type=_positive(float), default=None,
                           help="absolute zero threshold (default 1e-3 x volume)")
            p.add_argument("--policy-sigma", type=_positive(float), default=5.0)
        if terms:
            p.add_argument("--terms", type=_positive(int), default=40, help="series length K")
        if action:
            p.add_argument("--action", required=True, help='columns of A, e.g. "1,0;0,1"')
        if samples:
            p.add_argument("--samples", type=_positive(int), default=100_000)
        if fmt:
            g = p.add_mutually_exclusive_group()
            g.add_argument("--json", dest="fmt", action="store_const", const="json")
            g.add_argument("--csv", dest="fmt", action="store_const", const="csv")

    common(sub.add_parser("analyze", help="full symmetry report", allow_abbrev=False),
           degree=True, method=True, policy=True, terms=True, samples=True)
    common(sub.add_parser("moments", help="Gram data up to a degree bound", allow_abbrev=False),
           degree=True, method=True, fmt=True)
    common(sub.add_parser("condition-d", help="norm series and Condition D verdicts", allow_abbrev=False),
           method=True, terms=True, fmt=True)
    common(sub.add_parser("verify-invariance", help="sampled check of rho_A-invariance", allow_abbrev=False),
           action=True, samples=True)
    common(sub.add_parser("check-complete-reinhardt", help="sampled star-shapedness check",
                          allow_abbrev=False), samples=True)
    return parser


def write_atomic(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".torussym-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _format(args) -> str:
    fmt = getattr(args, "fmt", None)
    if fmt:
        return fmt
    if args.out and args.out.lower().endswith(".csv"):
        return "csv"
    if args.command == "condition-d" and args.out is None:
        return "csv"
    return "json"


def _meta(args, config_bytes: bytes) -> dict:
    budgets = {"mc_samples": args.budget}
    for name in ("terms", "samples"):
        if hasattr(args, name):
            budgets[name] = getattr(args, name)
    out = {"tool": "torussym", "version": __version__, "command": args.command,
           "config_sha256": hashlib.sha256(config_bytes).hexdigest(), "seed": args.seed,
           "budgets": budgets}
    for name in ("method", "degree", "k", "action"):
        if getattr(args, name, None) is not None:
            out[name] = getattr(args, name)
    return out


def _gram_csv(g, meta) -> str:
    lines = [f"# {k}={v}" for k, v in meta.items() if not isinstance(v, dict)]
    lines += [f"# budget.{k}={v}" for k, v in meta["budgets"].items()]
    lines.append("alpha,beta,re,im,se,method")
    fmt = lambda x: format(x, ".17g")  # noqa: E731
    for e in g.to_json()["entries"]:
        a = " ".join(map(str, e["alpha"]))
        b = " ".join(map(str, e["beta"]))
        lines.append(f"{a},{b},{fmt(e['re'])},{fmt(e['im'])},{fmt(e['se'])},{e['method']}")
    return "\n".join(lines) + "\n"


def _run_analyze(args, spec, meta):
    policy = Policy(args.policy_abstol, args.policy_sigma)
    budgets = Budgets(args.budget, args.terms, args.samples)
    report = analyze(spec, args.degree, budgets, policy, args.seed, args.method)
    doc = {"meta": meta, **report.to_json()}
    return dumps_stable(doc) + "\n", bool(report.errors)


def _run_moments(args, spec, meta):
    N = args.degree or default_degree(spec.dim)
    g = gram(spec, N, args.method, args.budget, args.seed)
    if _format(args) == "csv":
        return _gram_csv(g, meta), False
    return dumps_stable({"meta": meta, "gram": g.to_json()}) + "\n", False


def _run_condition_d(args, spec, meta):
    rows = []
    for j, bounded in enumerate(spec.bounded_coords, start=1):
        seq = norm_sequence(spec, j, args.terms, args.method, args.budget, args.seed)
        rows.append((seq, condition_d_verdict(seq, bounded)))
    if _format(args) == "csv":
        header = [f"{k}={v}" for k, v in meta.items() if not isinstance(v, dict)]
        header += [f"budget.{k}={v}" for k, v in meta["budgets"].items()]
        return sequences_to_csv(rows, header), False
    doc = {"meta": meta,
           "holds": all(v.verdict.startswith("holds") for _, v in rows),
           "coordinates": [{**v.to_json(), "partial_sums": list(v.partial_sums),
                            "log_norms": list(s.log_norms)} for s, v in rows]}
    return dumps_stable(doc) + "\n", False


def _run_invariance(args, spec, meta):
    try:
        A = TorusAction.parse(args.action, spec.dim)
    except ValueError as exc:
        raise UsageError(f"--action: {exc}") from exc
    if A.n != spec.dim:
        raise UsageError(f"--action has {A.n} rows but the domain lives in C^{spec.dim}")
    res = verify_invariance(spec, A, args.samples, args.seed)
    return dumps_stable({"meta": meta, "action": A.to_json(), **res.to_json()}) + "\n", False


def _run_star(args, spec, meta):
    res = check_complete_reinhardt(spec, args.samples, args.seed)
    return dumps_stable({"meta": meta, **res.to_json()}) + "\n", False


RUNNERS = {"analyze": _run_analyze, "moments": _run_moments, "condition-d": _run_condition_d,
           "verify-invariance": _run_invariance, "check-complete-reinhardt": _run_star}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        spec, raw = load_domain_config(args.domain, args.k)
        if args.k is not None and not isinstance(spec, ExpProfileFamily):
            raise UsageError("--k applies only to exp_profile domains")
    except (ConfigError, UsageError) as exc:
        print(f"torussym: config error: {exc}", file=sys.stderr)
        return 2
    meta = _meta(args, raw)
    try:
        text, failed = RUNNERS[args.command](args, spec, meta)
    except UsageError as exc:
        print(f"torussym: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - surfaced as exit 1 with a partial document
        print(f"torussym: analysis error: {type(exc).__name__}: {exc}", file=sys.stderr)
        doc = {"meta": meta, "errors": [{"stage": args.command, "message": f"{type(exc).__name__}: {exc}"}]}
        write_atomic(args.out, dumps_stable(doc) + "\n")
        return 1
    write_atomic(args.out, text)
    if failed:
        print("torussym: analysis finished with errors (see report)", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
