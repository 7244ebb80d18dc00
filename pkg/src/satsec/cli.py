"""Command-line entry point: ``satsec run | selftest | oracle``."""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
from pathlib import Path

from .channel_gen import FadingParams
from .link_budget import GroundChannelParams, LinkBudget
from .montecarlo import SCENARIOS, ScenarioConfig, build_scenario, run_experiment
from .xor_scheme import SearchConfig

log = logging.getLogger("satsec")

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_CHECKS = 0, 1, 2, 3
CONFIG_KEYS = {"link_budget", "fading", "ground", "search", "trials", "seed", "n_feeds"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging; repeat for debug")
    parser = argparse.ArgumentParser(prog="satsec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run a Monte Carlo scenario and write CSV + manifest")
    run.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", type=Path, help="CSV path (default: <scenario>.csv)")
    run.add_argument("--config", type=Path, help="JSON file with link_budget/fading/ground/search overrides")
    run.add_argument("--feeds", type=int, help="feed count (a single sweep point for feed sweeps)")
    run.add_argument("--power", type=float, help="forward-link power in dBW (single point for power sweeps)")
    run.add_argument("--distance", type=float, help="eavesdropper distance in m (single point for distance sweeps)")
    run.add_argument("--workers", type=int, help="worker processes (default: $SATSEC_WORKERS or 1)")

    st = sub.add_parser("selftest", parents=[common], help="run the invariant checks")
    st.add_argument("--trials", type=int, default=50)
    st.add_argument("--seed", type=int, default=0)

    orc = sub.add_parser("oracle", parents=[common], help="compare the solvers against brute-force oracles")
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--quick", action="store_true", help="a tenth of the default instance counts")
    return parser


def load_config_file(path: Path) -> dict:
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read config file {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown keys in {path}: {sorted(unknown)}")
    return data


def scenario_from_args(args) -> ScenarioConfig:
    file_cfg = load_config_file(args.config) if args.config else {}
    kw = {}
    if "link_budget" in file_cfg:
        kw["link_budget"] = LinkBudget.from_dict(file_cfg["link_budget"])
    if "fading" in file_cfg:
        kw["fading"] = FadingParams(**file_cfg["fading"])
    if "ground" in file_cfg:
        g = dict(file_cfg["ground"])
        if "eve_distance_range_m" in g:
            g["eve_distance_range_m"] = tuple(g["eve_distance_range_m"])
        kw["ground"] = GroundChannelParams(**g)
    if "search" in file_cfg:
        kw["search"] = SearchConfig(**file_cfg["search"])
    trials = args.trials if args.trials is not None else file_cfg.get("trials")
    seed = args.seed if args.seed is not None else file_cfg.get("seed")
    if trials is not None:
        kw["trials"] = trials
    if seed is not None:
        kw["master_seed"] = seed
    cfg = build_scenario(args.scenario, **kw)

    changes = {}
    n_feeds = args.feeds if args.feeds is not None else file_cfg.get("n_feeds")
    if n_feeds is not None:
        changes["values" if cfg.sweep == "feeds" else "n_feeds"] = (n_feeds,) if cfg.sweep == "feeds" else n_feeds
    if args.power is not None:
        if cfg.sweep == "fl_power_dbw":
            changes["values"] = (args.power,)
        else:
            changes["link_budget"] = dataclasses.replace(cfg.link_budget, fl_tx_power_dbw=args.power)
    if args.distance is not None:
        if cfg.sweep == "eve_distance_m":
            changes["values"] = (args.distance,)
        else:
            changes["eve_distance_m"] = args.distance
    return dataclasses.replace(cfg, **changes) if changes else cfg


def cmd_run(args) -> int:
    cfg = scenario_from_args(args)
    out = args.out if args.out is not None else Path(f"{args.scenario}.csv")
    if not out.parent.is_dir():
        raise OSError(f"output directory {out.parent} does not exist")
    log.info("running %s: %d sweep points x %d trials, seed %d", cfg.name, len(cfg.values), cfg.trials,
             cfg.master_seed)
    t0 = time.perf_counter()
    summary = run_experiment(cfg, args.workers)
    log.info("finished in %.1f s", time.perf_counter() - t0)
    summary.write_csv(out)
    summary.write_manifest(out.with_suffix(".manifest.json"))
    print(f"wrote {out}")
    if args.verbose:
        for r in summary.rows:
            print(f"  {r.sweep_value!s:>14} {r.scheme:<9} {r.mean:8.4f} +/- {r.stderr:.4f}  t1={r.mean_t1:.3f}")
    if summary.dominance_violations:
        print(f"invariant check failed: {summary.dominance_violations} dominance violations", file=sys.stderr)
        return EXIT_CHECKS
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest(args.trials, args.seed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECKS


def cmd_oracle(args) -> int:
    from .oracles import OracleReport, run_oracle_suite

    kw = dict(sdp_per_n=20, lp_sets=50, eig_pairs=50) if args.quick else {}
    rep = run_oracle_suite(seed=args.seed, **kw)
    print(f"SDP  max relative shortfall vs grid : {rep.sdp_max_rel_gap:.3e}  (tol {OracleReport.SDP_TOL:g}, "
          f"{rep.instances['sdp']} instances)")
    print(f"LP   max absolute objective gap     : {rep.lp_max_abs_gap:.3e}  (tol {OracleReport.LP_TOL:g}, "
          f"{rep.instances['lp']} instances)")
    print(f"EIG  max sampled excess (relative)  : {rep.eig_max_excess:.3e}  (tol 0, {rep.instances['eig']} pairs)")
    print(f"EIG  max relative residual          : {rep.eig_max_residual:.3e}  (tol {OracleReport.EIG_RESIDUAL_TOL:g})")
    print("all oracle checks passed" if rep.passed else "oracle checks FAILED")
    return EXIT_OK if rep.passed else EXIT_CHECKS


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    handlers = {"run": cmd_run, "selftest": cmd_selftest, "oracle": cmd_oracle}
    try:
        return handlers[args.command](args)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
