"""Command-line entry point: ``erwlab {oracle,ensemble,pair,check,replay}``.

Exit codes: 0 success, 1 usage error, 2 numerical / budget / check failure.
Every data-producing command writes ``manifest.json`` next to its outputs;
``erwlab replay DIR/manifest.json --out NEW`` re-runs it and compares digests.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .checks import SUITE_NAMES, CheckOptions, run_suite
from .ensemble import EnsembleConfig, estimate_limit_samples, run_pair_ensemble, run_walk_ensemble
from .errors import BudgetError, OracleRangeError
from .io import FORMATS, read_manifest, utc_now, write_manifest, write_table
from .oracle import ORACLE_MAX_N, exact_diff_pmf, exact_moment_series, exact_pmf, meeting_probabilities, predict_expected_meetings
from .regime import Regime, parse_p
from .walk import WalkParams

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAIL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _checkpoint_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(float(x)) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad checkpoint list {text!r}") from None


def _count(text: str) -> int:
    # accepts 1e5-style counts
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value != int(value):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def _p_value(text: str) -> str:
    try:
        value = parse_p(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"p must lie in (0, 1), got {text}")
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="erwlab", description="Elephant random walk laboratory.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out_default="erwlab-out"):
        sp.add_argument("--p", type=_p_value, required=True, help="memory parameter in (0, 1)")
        sp.add_argument("--s", type=float, default=0.5, help="probability that the first step is +1")
        sp.add_argument("--format", choices=FORMATS, default="csv")
        sp.add_argument("--out", type=Path, default=Path(out_default), help="output directory")

    o = sub.add_parser("oracle", help="exact pmf / moments / meeting tables")
    common(o)
    o.add_argument("--n", type=_count, required=True, help="step count")
    o.add_argument("--what", choices=("pmf", "moments", "meet", "diff", "all"), default="all")

    for name, help_text in (("ensemble", "Monte Carlo ensemble of single walks"), ("pair", "Monte Carlo ensemble of independent pairs")):
        e = sub.add_parser(name, help=help_text)
        common(e)
        e.add_argument("--horizon", "--n", dest="horizon", type=_count, required=True)
        e.add_argument("--replicas", type=_count, required=True)
        e.add_argument("--seed", type=_count, required=True)
        e.add_argument("--checkpoints", type=_checkpoint_list, default=())
        e.add_argument("--workers", type=_count, default=1)
        if name == "pair":
            e.add_argument("--n-min-lil", type=_count, default=100)

    c = sub.add_parser("check", help="run a verification suite")
    c.add_argument("--suite", choices=SUITE_NAMES, default="oracle")
    c.add_argument("--seed", type=_count, default=7)
    c.add_argument("--replicas", type=_count, default=None, help="override Monte Carlo replica counts")
    c.add_argument("--workers", type=_count, default=1)
    c.add_argument("--out", type=Path, default=None, help="also write results and a manifest here")

    r = sub.add_parser("replay", help="re-run a command from its manifest and compare output digests")
    r.add_argument("manifest", type=Path)
    r.add_argument("--out", type=Path, required=True)
    return parser


def _params(args) -> WalkParams:
    try:
        return WalkParams(float(args.p), args.s)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config_dict(args, keys) -> dict:
    cfg = {"p": str(args.p), "s": args.s, "format": args.format}
    for k in keys:
        v = getattr(args, k)
        cfg[k] = list(v) if isinstance(v, tuple) else v
    return cfg


def cmd_oracle(args) -> int:
    params = _params(args)
    n = args.n
    what = {"pmf", "moments", "meet", "diff"} if args.what == "all" else {args.what}
    if n < 1 or (what - {"moments"} and n > ORACLE_MAX_N):
        raise OracleRangeError(f"exact oracle supports 1 <= n <= {ORACLE_MAX_N}, got {n}")
    started = utc_now()
    args.out.mkdir(parents=True, exist_ok=True)
    outputs = []
    summary = [f"p={args.p} s={args.s} n={n}"]
    if "pmf" in what:
        pmf = exact_pmf(params, n)
        outputs.append(write_table(args.out, "pmf", ("n", "k", "prob"), ((n, int(k), float(v)) for k, v in zip(pmf.positions, pmf.probs)), args.format))
        summary.append(f"pmf_mass={pmf.total():.17g}")
    if "moments" in what:
        series = exact_moment_series(params, n)
        rows = ((k, float(series.means[k]), float(series.second_moments[k])) for k in range(1, n + 1))
        outputs.append(write_table(args.out, "moments", ("n", "mean", "second_moment"), rows, args.format))
        summary.append(f"mean={series.means[n]:.17g} second_moment={series.second_moments[n]:.17g}")
    if "meet" in what:
        probs = meeting_probabilities(params, n)
        cum = np.cumsum(probs)
        rows = ((k + 1, float(probs[k]), float(cum[k])) for k in range(n))
        outputs.append(write_table(args.out, "meet", ("n", "meeting_probability", "expected_meetings"), rows, args.format))
        summary.append(f"meeting_probability={probs[-1]:.17g} expected_meetings={cum[-1]:.17g}")
    if "diff" in what:
        diff = exact_diff_pmf(params, n)
        outputs.append(write_table(args.out, "diff_pmf", ("n", "d", "prob"), ((n, int(d), float(v)) for d, v in zip(diff.positions, diff.probs)), args.format))
    write_manifest(args.out, "oracle", _config_dict(args, ("n", "what")), outputs, started)
    print(" ".join(summary))
    return EXIT_OK


def _ensemble_config(args) -> EnsembleConfig:
    try:
        return EnsembleConfig(
            replicas=args.replicas,
            horizon=args.horizon,
            checkpoints=args.checkpoints,
            master_seed=args.seed,
            workers=args.workers,
            n_min_lil=getattr(args, "n_min_lil", 100),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_ensemble(args) -> int:
    params = _params(args)
    cfg = _ensemble_config(args)
    started = utc_now()
    result = run_walk_ensemble(params, cfg)
    series = exact_moment_series(params, cfg.horizon)
    args.out.mkdir(parents=True, exist_ok=True)
    columns = (
        "n", "normalizer", "count", "mean", "variance", "min", "max", "second_moment", "exact_second_moment",
        "norm_mean", "norm_variance", "norm_min", "norm_max",
    )
    rows = [
        (
            cp.n, cp.normalizer, cp.raw.count, cp.raw.mean, cp.raw.variance, cp.raw.min, cp.raw.max,
            cp.raw_second_moment, float(series.second_moments[cp.n]),
            cp.normalized.mean, cp.normalized.variance, cp.normalized.min, cp.normalized.max,
        )
        for cp in result.checkpoints
    ]
    out = write_table(args.out, "walk_moments", columns, rows, args.format)
    config = _config_dict(args, ("horizon", "replicas", "seed", "workers"))
    config["checkpoints"] = list(cfg.checkpoints)
    write_manifest(args.out, "ensemble", config, [out], started, {"regime": result.regime.value})
    final = result.final()
    print(f"regime={result.regime.value} n={final.n} normalized_variance={final.normalized.variance:.6g} replicas={cfg.replicas}")
    return EXIT_OK


def cmd_pair(args) -> int:
    params = _params(args)
    cfg = _ensemble_config(args)
    started = utc_now()
    pairs = run_pair_ensemble(params, cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    fmt = args.format
    regime = pairs.regime
    final_norm = pairs.normalized_diffs()
    final_col = list(cfg.checkpoints).index(cfg.horizon) if cfg.horizon in cfg.checkpoints else None
    outputs = []
    rows = (
        (
            r, int(pairs.meeting_count[r]), int(pairs.last_meeting[r]), int(pairs.final_diff[r]),
            float(final_norm[r, final_col]) if final_col is not None else math.nan,
            float(pairs.sup_i_plus[r]), float(pairs.sup_i_minus[r]), float(pairs.sup_ii_plus[r]), float(pairs.sup_ii_minus[r]),
        )
        for r in range(pairs.replicas)
    )
    outputs.append(write_table(args.out, "pairs", (
        "replica", "meeting_count", "last_meeting", "final_diff", "normalized_final_diff",
        "sup_i_plus", "sup_i_minus", "sup_ii_plus", "sup_ii_minus",
    ), rows, fmt))
    outputs.append(write_table(args.out, "meeting_histogram", ("meeting_count", "pairs"), pairs.meeting_histogram(), fmt))
    outputs.append(write_table(args.out, "last_meeting", ("last_meeting", "pairs", "ecdf"), pairs.last_meeting_ecdf(), fmt))
    diff_rows = (
        (r, n, int(pairs.diffs[r, j]), float(final_norm[r, j]))
        for r in range(pairs.replicas)
        for j, n in enumerate(cfg.checkpoints)
    )
    outputs.append(write_table(args.out, "diffs", ("replica", "n", "diff", "normalized_diff"), diff_rows, fmt))
    extra = {"regime": regime.value}
    if regime is Regime.SUPERDIFFUSIVE:
        lim = estimate_limit_samples(params, cfg, pairs)
        outputs.append(write_table(args.out, "limit_samples", ("replica", "m_hat"), ((r, float(v)) for r, v in enumerate(lim.samples)), fmt))
        extra["limit_mean"] = lim.moments.mean
        extra["limit_variance"] = lim.moments.variance
    pred = predict_expected_meetings(params, cfg.horizon)
    extra["oracle_expected_meetings"] = {
        "total": pred.total,
        "exact_until": pred.exact_until,
        "exact_part": pred.exact_part,
        "tail_part": pred.tail_part,
        "tail_fit_window": list(pred.fit_window),
        "tail_fit_slope": pred.fit_slope,
        "tail_fit_constant": pred.fit_constant,
    }
    config = _config_dict(args, ("horizon", "replicas", "seed", "workers", "n_min_lil"))
    config["checkpoints"] = list(cfg.checkpoints)
    write_manifest(args.out, "pair", _json_safe(config), outputs, started, _json_safe(extra))
    m = pairs.meeting_moments()
    print(
        f"regime={regime.value} pairs={pairs.replicas} mean_meetings={m.mean:.6g} (oracle {pred.total:.6g})"
        f" median_last_meeting={int(np.median(pairs.last_meeting))}"
    )
    return EXIT_OK


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def cmd_check(args) -> int:
    opts = CheckOptions(seed=args.seed, replicas=args.replicas, workers=args.workers)
    started = utc_now()
    results = []
    cache: dict = {}
    suites = [s for s in SUITE_NAMES if s != "all"] if args.suite == "all" else [args.suite]
    for suite in suites:
        for res in run_suite(suite, opts, cache):
            print(res.line(), flush=True)
            results.append(res)
    failed = [r for r in results if not r.informational and not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed" + (f"; {len(failed)} failed" if failed else ""))
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        rows = ((r.criterion, r.name, "-" if r.volatile else r.measured, r.target, r.tolerance, r.status, r.detail) for r in results)
        out = write_table(args.out, "checks", ("criterion", "check", "measured", "target", "tolerance", "status", "detail"), rows, "csv")
        config = {"suite": args.suite, "seed": args.seed, "replicas": args.replicas, "workers": args.workers}
        write_manifest(args.out, "check", config, [out], started)
    return EXIT_FAIL if failed else EXIT_OK


def _argv_from_manifest(manifest: dict, out: Path) -> list[str]:
    command = manifest["command"]
    cfg = manifest["config"]
    argv = [command]
    if command == "check":
        argv += ["--suite", cfg["suite"], "--seed", str(cfg["seed"]), "--workers", str(cfg["workers"])]
        if cfg.get("replicas") is not None:
            argv += ["--replicas", str(cfg["replicas"])]
        return argv + ["--out", str(out)]
    argv += ["--p", cfg["p"], "--s", repr(float(cfg["s"])), "--format", cfg["format"], "--out", str(out)]
    if command == "oracle":
        return argv + ["--n", str(cfg["n"]), "--what", cfg["what"]]
    argv += [
        "--horizon", str(cfg["horizon"]), "--replicas", str(cfg["replicas"]), "--seed", str(cfg["seed"]),
        "--workers", str(cfg["workers"]), "--checkpoints", ",".join(str(c) for c in cfg["checkpoints"]),
    ]
    if command == "pair":
        argv += ["--n-min-lil", str(cfg["n_min_lil"])]
    return argv


def cmd_replay(args) -> int:
    try:
        manifest = read_manifest(args.manifest)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read manifest: {exc}") from None
    if manifest.get("command") not in ("oracle", "ensemble", "pair", "check"):
        raise UsageError(f"unknown command in manifest: {manifest.get('command')!r}")
    code = main(_argv_from_manifest(manifest, args.out))
    if code != EXIT_OK and manifest["command"] != "check":
        return code
    fresh = read_manifest(args.out / "manifest.json")
    mismatched = [name for name, digest in manifest["outputs"].items() if fresh["outputs"].get(name) != digest]
    for name in sorted(manifest["outputs"]):
        print(f"{'MISMATCH' if name in mismatched else 'identical'} {name}")
    return EXIT_FAIL if mismatched else EXIT_OK


COMMANDS = {
    "oracle": cmd_oracle,
    "ensemble": cmd_ensemble,
    "pair": cmd_pair,
    "check": cmd_check,
    "replay": cmd_replay,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error from argparse
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"erwlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OracleRangeError, BudgetError) as exc:
        print(f"erwlab: error: {exc}", file=sys.stderr)
        return EXIT_FAIL
