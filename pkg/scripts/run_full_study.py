"""Full design: every model, p in {0.25, 0.5, 0.75}, 24 ratios, N = N_b = 200.

Takes hours on a laptop. Use --models / --ps to run a slice, e.g.

    python3 scripts/run_full_study.py --models gpd:1,halfcauchy --ps 0.5 --workers 8
"""

import argparse
import json
import logging
from pathlib import Path

from evtcure.datafiles import write_curve_csv
from evtcure.simulation import STUDY_MODELS, ExperimentConfig, SimModel, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--models", default=",".join(m.label() for m in STUDY_MODELS))
    ap.add_argument("--ps", default="0.25,0.5,0.75")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", default="results/full")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runs = []
    for label in args.models.split(","):
        for p in (float(v) for v in args.ps.split(",")):
            cfg = ExperimentConfig(SimModel.parse(label), p, seed=args.seed)
            logging.info("model %s, p=%g", label, p)
            points = run_experiment(cfg, progress=logging.info, workers=args.workers)
            name = f"curve_{label.replace(':', '_')}_p{p:g}.csv"
            write_curve_csv(points, out / name)
            runs.append({"file": name, "config": cfg.to_dict()})
    (out / "manifest.json").write_text(json.dumps({"runs": runs}, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
