"""Command-line entry point: ``analyze``, ``simulate`` and ``transform``.

Exit codes: 0 success, 2 invalid input, 3 estimation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from pathlib import Path

from . import config as _config
from .datafiles import SCHEMA_VERSION, AnalysisRequest, analyze, transform_csv, write_curve_csv
from .errors import BadConfig, EstimationError, InputError
from .estimator import DEFAULT_Y_GRID
from .simulation import run_experiment

log = logging.getLogger("evtcure")

SEED_ENV = "EVTCURE_SEED"
EXIT_INPUT = 2
EXIT_ESTIMATION = 3


def _default_seed() -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None or not raw.strip():
        return None
    try:
        return int(raw)
    except ValueError:
        raise BadConfig(SEED_ENV, f"{raw!r} is not an integer") from None


def _y_grid(text: str | None) -> tuple[float, ...]:
    if not text:
        return DEFAULT_Y_GRID
    return tuple(float(v) for v in text.split(","))


def cmd_analyze(args) -> int:
    seed = args.seed if args.seed is not None else (_default_seed() or 0)
    req = AnalysisRequest(
        input_path=args.input,
        group_column=args.group,
        tau0=args.tau0,
        y_grid=_y_grid(args.y_grid),
        n_bootstrap=args.nb,
        seed=seed,
        confidence_level=args.level,
    )
    report = analyze(req)
    Path(args.out).write_text(report.to_json(), encoding="utf-8")
    for g in report.groups:
        log.info(
            "%s: n=%d cure(KM)=%.4f cure(EVT)=%.4f y*=%.2f",
            g.group, g.n, g.cure_rate_km, g.cure_rate_evt, g.y_star,
        )
    return 0


def _curve_name(cfg) -> str:
    label = re.sub(r"[^A-Za-z0-9.\-]+", "_", cfg.model.label())
    return f"curve_{label}_p{cfg.p:g}.csv"


def cmd_simulate(args) -> int:
    settings: dict[str, str] = {}
    if args.config:
        settings.update(_config.read_config(args.config))
    if args.preset:
        settings["preset"] = args.preset
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise BadConfig(item, "override must look like key=value")
        settings[key.strip()] = value.strip()
    if args.seed is not None:
        settings["seed"] = str(args.seed)
    elif "seed" not in settings and _default_seed() is not None:
        settings["seed"] = str(_default_seed())
    if args.workers is not None:
        settings["workers"] = str(args.workers)

    configs, workers = _config.resolve(settings)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for cfg in configs:
        points = run_experiment(cfg, progress=log.info, workers=workers)
        name = _curve_name(cfg)
        write_curve_csv(points, out_dir / name)
        files.append({"file": name, "config": cfg.to_dict()})
    manifest = {"schema_version": SCHEMA_VERSION, "settings": dict(sorted(settings.items())), "runs": files}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 0


def cmd_transform(args) -> int:
    n = transform_csv(args.input, args.tau0, args.out)
    log.info("wrote %d rows to %s", n, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evtcure", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="estimate cure rates from a CSV of censored times")
    a.add_argument("--input", required=True)
    a.add_argument("--group", help="column to split the data by")
    a.add_argument("--tau0", type=float, help="known right endpoint; enables the 1/(tau0-t) transform")
    a.add_argument("--nb", type=int, default=200, help="bootstrap resamples (default 200)")
    a.add_argument("--seed", type=int)
    a.add_argument("--level", type=float, default=0.95)
    a.add_argument("--y-grid", help="comma-separated y values (default 0.60,0.62,...,0.98)")
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="run the Monte Carlo study")
    s.add_argument("--config")
    s.add_argument("--preset", choices=sorted(_config.PRESETS))
    s.add_argument("--set", action="append", metavar="KEY=VALUE")
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("transform", help="apply 1/(tau0 - t) to the time column")
    t.add_argument("--input", required=True)
    t.add_argument("--tau0", type=float, required=True)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_transform)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except (InputError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EstimationError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION


if __name__ == "__main__":
    sys.exit(main())
