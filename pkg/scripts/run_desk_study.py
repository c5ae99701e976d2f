"""Reduced Monte Carlo run: model 1, p = 0.5, ratios 0.4 / 0.6 / 0.8 / 1.0.

    python3 scripts/run_desk_study.py --out-dir results/desk --workers 4
"""

import argparse
import logging
from pathlib import Path

from evtcure.datafiles import write_curve_csv
from evtcure.simulation import desk_configs, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", default="results/desk")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (cfg,) = desk_configs(args.seed)
    points = run_experiment(cfg, progress=logging.info, workers=args.workers)
    write_curve_csv(points, out / "curve_desk.csv")

    print(f"{'ratio':>6} {'mean p*':>9} {'mean p_n':>9} {'mse p*':>9} {'mse p_n':>9} {'cens':>6}")
    for pt in points:
        print(f"{pt.ratio:6.2f} {pt.mean_p_star:9.4f} {pt.mean_p_n:9.4f} "
              f"{pt.mse_p_star:9.5f} {pt.mse_p_n:9.5f} {pt.censoring_prop:6.3f}")


if __name__ == "__main__":
    main()
