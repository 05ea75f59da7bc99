"""Command-line front end for the auction library.

Builds distributions and mechanisms from JSON flags, runs single-profile
evaluations or Monte Carlo experiments, and emits CSV or JSON with the
resolved config, seed, and library version embedded so any output can be
reproduced bit for bit. Relative output paths are placed under
$PLATFORM_AUCTIONS_OUT when that is set. Exit status is 0 only when every
assertion the invoked command makes holds.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Any, Sequence

from . import __version__
from .acceptance import ALL_CRITERIA, run_all
from .benchmarks import benchmark, profit_benchmarks, truncate_profile
from .distributions import distribution_from_json
from .errors import ConstructionError, DegenerateInputError, DomainError
from .ironing import PROFIT, RESIDUAL_SURPLUS, SURPLUS, Objective, iron
from .mechanisms import (MechanismSpec, ValuationProfile, objective_value,
                         run_mechanism)
from .experiments import (adoption_advantage, balanced_probability,
                          er_mean_estimate, er_posting_revenue_curve,
                          monopoly_posting_curve, n2_grid, random_profiles,
                          rsol_proof_checks, rsol_ratio_sweep, ruin_root,
                          worst_case_ratio_grid)

_OBJECTIVES = {"residual": RESIDUAL_SURPLUS, "profit": PROFIT,
               "surplus": SURPLUS}


class UsageError(Exception):
    pass


def _num(x: float) -> str:
    """12 significant digits; infinities spelled inf/-inf."""
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.12g}"
    return str(x)


def _jsonable(obj: Any) -> Any:
    """Recursively map non-finite floats to strings JSON can carry."""
    if isinstance(obj, float):
        return _num(obj) if (math.isinf(obj) or math.isnan(obj)) else obj
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _parse_profile(text: str) -> ValuationProfile:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"bad profile literal: {exc}") from exc
    if not values:
        raise UsageError("profile must contain at least one value")
    try:
        return ValuationProfile(values)
    except ConstructionError as exc:
        raise UsageError(str(exc)) from exc


def _parse_json_payload(text: str) -> dict:
    """JSON literal, or @path to read one from a file."""
    if text.startswith("@"):
        try:
            with open(text[1:]) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(str(exc)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"bad JSON payload: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("JSON payload must be an object")
    return data


def _parse_mechanism(text: str) -> MechanismSpec:
    try:
        return MechanismSpec.from_json(_parse_json_payload(text))
    except (ConstructionError, DomainError, KeyError) as exc:
        raise UsageError(f"bad mechanism spec: {exc}") from exc


def _parse_distribution(text: str):
    try:
        return distribution_from_json(_parse_json_payload(text))
    except (ConstructionError, KeyError) as exc:
        raise UsageError(f"bad distribution spec: {exc}") from exc


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"bad integer list: {exc}") from exc


def _resolve_out(path: str | None) -> str | None:
    if path is None:
        return None
    base = os.environ.get("PLATFORM_AUCTIONS_OUT")
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _config_of(args: argparse.Namespace) -> dict[str, Any]:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    with open(path, "w") as fh:
        fh.write(text)


def _emit_json(args: argparse.Namespace, result: Any) -> None:
    payload = {"command": args.command, "version": __version__,
               "config": _jsonable(_config_of(args)),
               "result": _jsonable(result)}
    _write_text(_resolve_out(getattr(args, "output", None)),
                json.dumps(payload, indent=2))


def _emit_csv(args: argparse.Namespace, header: Sequence[str],
              rows: Sequence[Sequence[Any]],
              summary: dict[str, Any] | None = None) -> None:
    buf = io.StringIO()
    buf.write(f"# command={args.command} version={__version__}\n")
    buf.write(f"# config={json.dumps(_jsonable(_config_of(args)))}\n")
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([_num(c) if isinstance(c, float) else str(c)
                         for c in row])
    for key, val in (summary or {}).items():
        buf.write(f"# {key}={_num(val) if isinstance(val, float) else val}\n")
    _write_text(_resolve_out(getattr(args, "output", None)), buf.getvalue())


def _objective_arg(name: str) -> Objective:
    if name not in _OBJECTIVES:
        raise UsageError(f"unknown objective {name!r}")
    return _OBJECTIVES[name]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_benchmark(args: argparse.Namespace) -> int:
    profile = _parse_profile(args.profile)
    obj = _objective_arg(args.objective)
    try:
        res = benchmark(profile, args.k, obj)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    _emit_json(args, res.to_json())
    return 0


def cmd_mech_eval(args: argparse.Namespace) -> int:
    profile = _parse_profile(args.profile)
    mech = _parse_mechanism(args.mechanism)
    obj = _objective_arg(args.objective)
    try:
        outcome = run_mechanism(mech, profile)
    except KeyError as exc:
        raise UsageError(f"mechanism spec missing field {exc}") from exc
    except (DomainError, ConstructionError) as exc:
        raise UsageError(str(exc)) from exc
    _emit_json(args, {
        "alloc": list(outcome.alloc),
        "payment": list(outcome.payment),
        "objective_value": objective_value(outcome, profile, obj),
    })
    return 0


def cmd_ratio_sweep(args: argparse.Namespace) -> int:
    mech = _parse_mechanism(args.mechanism)
    obj = _objective_arg(args.objective)
    if args.random_n is not None:
        profiles = random_profiles(args.random_n, args.count, args.seed)
        spec = f"random:{args.random_n}x{args.count}"
    else:
        profiles = n2_grid(args.grid_size, args.vmax)
        spec = f"n2:{args.grid_size}x{_num(args.vmax)}"
    try:
        report = worst_case_ratio_grid(mech, args.k, obj, profiles,
                                       grid_spec=spec, seed=args.seed,
                                       keep_rows=True)
    except (DomainError, DegenerateInputError) as exc:
        raise UsageError(str(exc)) from exc
    n = profiles.shape[1]
    summary = {"worst_ratio": report.worst_ratio,
               "argmax_profile": ",".join(_num(v) for v in
                                          report.argmax_profile.values)}
    if args.format == "json":
        _emit_json(args, {"rows": report.rows, **summary})
    else:
        header = [f"v{i + 1}" for i in range(n)] + ["mechanism", "benchmark",
                                                    "ratio"]
        rows = [[*r["profile"], r["mechanism"], r["benchmark"], r["ratio"]]
                for r in report.rows]
        _emit_csv(args, header, rows, summary)
    return 0


def cmd_adoption(args: argparse.Namespace) -> int:
    mech = _parse_mechanism(args.mechanism)
    dist = _parse_distribution(args.distribution)
    obj = _objective_arg(args.objective)
    try:
        adv = adoption_advantage(mech, dist, args.n, args.k, obj,
                                 args.samples, args.seed, threads=args.threads)
    except (DomainError, DegenerateInputError) as exc:
        raise UsageError(str(exc)) from exc
    _emit_json(args, {"advantage": adv})
    return 0


def cmd_rsol(args: argparse.Namespace) -> int:
    if args.profile is not None:
        profile = _parse_profile(args.profile)
        try:
            res = rsol_proof_checks(profile, args.k)
        except (DomainError, DegenerateInputError) as exc:
            raise UsageError(str(exc)) from exc
        _emit_json(args, res)
        return 0 if res["step1_ok"] and res["step2_ok"] else 1
    families = [f for f in args.families.split(",") if f]
    try:
        report = rsol_ratio_sweep(_parse_int_list(args.n_list),
                                  _parse_int_list(args.k_list),
                                  families, trials=args.trials,
                                  seed=args.seed)
    except (KeyError, DomainError, DegenerateInputError) as exc:
        raise UsageError(str(exc)) from exc
    summary = {"worst_ratio": report.worst_ratio}
    if args.format == "json":
        _emit_json(args, {"rows": report.rows, **summary})
    else:
        header = ["family", "n", "k", "mechanism", "benchmark", "ratio",
                  "method"]
        rows = [[r["family"], r["n"], r["k"], r["mechanism"], r["benchmark"],
                 r["ratio"], r["method"]] for r in report.rows]
        _emit_csv(args, header, rows, summary)
    return 0


def cmd_monopoly(args: argparse.Namespace) -> int:
    if args.h <= 1:
        raise UsageError("need h > 1")
    if args.curve == "posting":
        samples = args.samples or 10 ** 6
        rows = monopoly_posting_curve(args.h, args.points, samples,
                                      args.seed, threads=args.threads)
        if args.format == "json":
            _emit_json(args, {"rows": rows})
        else:
            _emit_csv(args, ["h", "v", "mean", "stderr", "exact"],
                      [[r["h"], r["v"], r["mean"], r["stderr"], r["exact"]]
                       for r in rows])
        return 0
    if args.curve == "revenue":
        samples = args.samples or 2 * 10 ** 7
        rows = er_posting_revenue_curve(args.h, args.points, samples,
                                        args.seed, threads=args.threads)
        if args.format == "json":
            _emit_json(args, {"rows": rows})
        else:
            _emit_csv(args, ["h", "price", "revenue", "stderr"],
                      [[r["h"], r["price"], r["revenue"], r["stderr"]]
                       for r in rows])
        return 0
    samples = args.samples or 2 * 10 ** 6
    est = er_mean_estimate(args.h, samples, args.seed, threads=args.threads)
    _emit_json(args, {"estimate": est.to_json(),
                      "target": 1.0 + math.log(args.h)})
    return 0


def cmd_balanced(args: argparse.Namespace) -> int:
    rr = ruin_root()
    est = balanced_probability(args.n, args.trials, args.seed,
                               threads=args.threads)
    above = est.mean >= 0.169 - 3.0 * est.stderr
    _emit_json(args, {"ruin": rr.to_json(), "probability": est.to_json(),
                      "floor": 0.169, "above_floor": above})
    return 0 if above else 1


def cmd_lowerbound(args: argparse.Namespace) -> int:
    from .experiments import lb_standard_auctions
    if args.beta < 2:
        raise UsageError("need beta >= 2")
    rep = lb_standard_auctions(args.beta, args.n, args.trials, args.seed,
                               threads=args.threads)
    _emit_json(args, rep)
    return 0 if rep["claim_a_ok"] else 1


def cmd_profit_checks(args: argparse.Namespace) -> int:
    profile = _parse_profile(args.profile)
    try:
        marks = profit_benchmarks(profile, args.k)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    _emit_json(args, {**marks,
                      "truncated": list(truncate_profile(profile).values)})
    return 0


def cmd_ironing_dump(args: argparse.Namespace) -> int:
    dist = _parse_distribution(args.distribution)
    obj = _objective_arg(args.objective)
    try:
        fn = iron(dist, obj, grid_size=args.grid_size)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    _emit_json(args, fn.to_json())
    return 0


def cmd_reproduce_all(args: argparse.Namespace) -> int:
    only = None
    if args.only:
        only = [tok for chunk in args.only for tok in chunk.split(",") if tok]
        known = {name for name, _ in ALL_CRITERIA}
        unknown = [n for n in only if n not in known]
        if unknown:
            raise UsageError(f"unknown criteria {unknown}; "
                             f"choose from {sorted(known)}")
    results = run_all(only, threads=args.threads)
    for res in results:
        print(f"{'PASS' if res.passed else 'FAIL'}  {res.name}: {res.details}")
    manifest = {"command": args.command, "version": __version__,
                "config": _jsonable(_config_of(args)),
                "criteria": _jsonable([r.to_json() for r in results]),
                "all_passed": all(r.passed for r in results)}
    out = _resolve_out(args.output)
    if out is not None:
        with open(out, "w") as fh:
            json.dump(manifest, fh, indent=2)
        print(f"manifest written to {out}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"FAILED criteria: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, *, seed: bool = True,
                output: bool = True, fmt: str | None = None,
                threads: bool = False) -> None:
    if seed:
        p.add_argument("--seed", type=int, default=0)
    if output:
        p.add_argument("--output", default=None,
                       help="output path (relative paths go under "
                            "$PLATFORM_AUCTIONS_OUT)")
    if fmt is not None:
        p.add_argument("--format", choices=("csv", "json"), default=fmt)
    if threads:
        p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platform-auctions",
        description="auction mechanisms, prior-free benchmarks, experiments")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("benchmark", help="two-level lottery benchmark of a profile")
    p.add_argument("--profile", required=True, help="comma-separated values")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--objective", default="residual",
                   choices=sorted(_OBJECTIVES))
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("mech-eval", help="run one mechanism on one profile")
    p.add_argument("--mechanism", required=True, help="JSON spec or @file")
    p.add_argument("--profile", required=True)
    p.add_argument("--objective", default="residual",
                   choices=sorted(_OBJECTIVES))
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_mech_eval)

    p = sub.add_parser("ratio-sweep",
                       help="benchmark/mechanism ratio over a profile grid")
    p.add_argument("--mechanism", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--objective", default="residual",
                   choices=sorted(_OBJECTIVES))
    p.add_argument("--grid-size", type=int, default=200)
    p.add_argument("--vmax", type=float, default=4.0)
    p.add_argument("--random-n", type=int, default=None,
                   help="use random log-uniform profiles of this width instead")
    p.add_argument("--count", type=int, default=1000,
                   help="number of random profiles")
    _add_common(p, fmt="csv")
    p.set_defaults(func=cmd_ratio_sweep)

    p = sub.add_parser("adoption",
                       help="expected benchmark over expected mechanism value")
    p.add_argument("--mechanism", required=True)
    p.add_argument("--distribution", required=True, help="JSON spec or @file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--objective", default="residual",
                   choices=sorted(_OBJECTIVES))
    p.add_argument("--samples", type=int, default=10 ** 6)
    _add_common(p, threads=True)
    p.set_defaults(func=cmd_adoption)

    p = sub.add_parser("rsol",
                       help="partition-pricing sweep, or proof checks with --profile")
    p.add_argument("--profile", default=None,
                   help="run exact partition inequalities on this profile")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--n-list", default="2,3,4,6,8,12,16,24,32,48,64")
    p.add_argument("--k-list", default="1,2,3")
    p.add_argument("--families",
                   default="ones_zeros,geometric,uniform_grid,all_equal")
    p.add_argument("--trials", type=int, default=4096)
    _add_common(p, fmt="csv")
    p.set_defaults(func=cmd_rsol)

    p = sub.add_parser("monopoly", help="random posted price experiments")
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--curve", choices=("posting", "revenue", "mean"),
                   default="posting")
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--samples", type=int, default=None)
    _add_common(p, fmt="csv", threads=True)
    p.set_defaults(func=cmd_monopoly)

    p = sub.add_parser("balanced", help="balanced partition probability")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=10 ** 6)
    _add_common(p, threads=True)
    p.set_defaults(func=cmd_balanced)

    p = sub.add_parser("lowerbound",
                       help="lottery values across the hard family")
    p.add_argument("--beta", type=int, default=2)
    p.add_argument("--n", type=int, default=55)
    p.add_argument("--trials", type=int, default=10 ** 5)
    _add_common(p, threads=True)
    p.set_defaults(func=cmd_lowerbound)

    p = sub.add_parser("profit-checks",
                       help="posted-price profit benchmarks of a profile")
    p.add_argument("--profile", required=True)
    p.add_argument("--k", type=int, required=True)
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_profit_checks)

    p = sub.add_parser("ironing-dump",
                       help="breakpoints and slopes of an ironed virtual value")
    p.add_argument("--distribution", required=True)
    p.add_argument("--objective", default="residual",
                   choices=sorted(_OBJECTIVES))
    p.add_argument("--grid-size", type=int, default=2 ** 14)
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_ironing_dump)

    p = sub.add_parser("reproduce-all",
                       help="run the pinned-seed acceptance criteria")
    p.add_argument("--only", action="append", default=None,
                   help="criterion name(s), comma-separated or repeated")
    p.add_argument("--output", default=None, help="manifest path")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_reproduce_all)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
