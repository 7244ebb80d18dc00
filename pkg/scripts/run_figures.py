"""Run every figure scenario and write one CSV plus manifest per scenario.

The time-profile figures (fig6, fig8) reuse the fig5 and fig7 runs: their
CSVs hold the mean optimal t1 of the OTA rows.

    python3 scripts/run_figures.py --out-dir results --trials 2000
"""
import argparse
import csv
import io
import logging
import time
from pathlib import Path

from satsec.montecarlo import CON_OTA, XOR_OTA, atomic_write_text, build_scenario, run_experiment

RUNS = ("fig2", "fig3", "fig4", "fig5", "fig7")
PROFILES = {"fig6": "fig5", "fig8": "fig7"}


def profile_csv(summary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("sweep_value", "scheme", "mean_t1", "stderr_t1", "trials"))
    for row in summary.rows:
        if row.scheme in (XOR_OTA, CON_OTA):
            w.writerow((row.sweep_value, row.scheme, format(row.mean_t1, ".17g"),
                        format(row.stderr_t1, ".17g"), row.trials))
    return buf.getvalue()


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=2023)
    p.add_argument("--workers", type=int, help="worker processes (default: $SATSEC_WORKERS or 1)")
    p.add_argument("--only", nargs="+", choices=RUNS, default=RUNS)
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for name in args.only:
        t0 = time.perf_counter()
        summary = run_experiment(build_scenario(name, trials=args.trials, master_seed=args.seed),
                                 workers=args.workers)
        csv_path = args.out_dir / f"{name}.csv"
        summary.write_csv(csv_path)
        summary.write_manifest(csv_path.with_suffix(".manifest.json"))
        logging.info("%s: %d points, %d dominance violations, %.1f s", name, len(summary.config.values),
                     summary.dominance_violations, time.perf_counter() - t0)
        for prof, src in PROFILES.items():
            if src == name:
                atomic_write_text(args.out_dir / f"{prof}.csv", profile_csv(summary))


if __name__ == "__main__":
    main()
