"""Flat ``key = value`` experiment configuration.

Keys mirror :class:`~evtcure.simulation.ExperimentConfig`. ``model`` and
``p`` accept comma-separated lists; every (model, p) pair becomes one
experiment. ``preset = desk`` or ``preset = full`` fills in defaults that
explicit keys then override.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping

from .errors import BadConfig
from .estimator import DEFAULT_Y_GRID
from .simulation import DEFAULT_RATIOS, DESK_RATIOS, STUDY_MODELS, ExperimentConfig, SimModel

KNOWN_KEYS = (
    "preset",
    "model",
    "p",
    "epsilon",
    "n",
    "N",
    "N_b",
    "grid_ratios",
    "y_grid",
    "seed",
    "apply_psi",
    "workers",
)

PRESETS: dict[str, dict[str, str]] = {
    "desk": {
        "model": "gpd:1",
        "p": "0.5",
        "n": "1000",
        "N": "50",
        "N_b": "100",
        "grid_ratios": ",".join(repr(r) for r in DESK_RATIOS),
    },
    "full": {
        "model": ",".join(m.label() for m in STUDY_MODELS),
        "p": "0.25,0.5,0.75",
        "n": "1000",
        "N": "200",
        "N_b": "200",
        "grid_ratios": "default",
    },
}


def parse_lines(lines: Iterable[str], source: str = "<config>") -> dict[str, str]:
    out = {}
    for num, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise BadConfig(f"{source}:{num}", "expected 'key = value'")
        out[key] = value.strip()
    return out


def read_config(path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such config file: {path}")
    return parse_lines(path.read_text(encoding="utf-8").splitlines(), str(path))


def _floats(key: str, value: str, default=None) -> tuple[float, ...]:
    if value.strip().lower() == "default" and default is not None:
        return tuple(default)
    try:
        return tuple(float(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise BadConfig(key, f"cannot parse {value!r} as numbers") from None


def _int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise BadConfig(key, f"{value!r} is not an integer") from None


def _bool(key: str, value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise BadConfig(key, f"{value!r} is not a boolean")


def resolve(settings: Mapping[str, str]) -> tuple[list[ExperimentConfig], int]:
    """Build experiments from merged settings; returns ``(configs, workers)``."""
    unknown = sorted(set(settings) - set(KNOWN_KEYS))
    if unknown:
        raise BadConfig(unknown[0], "unknown key")
    merged: dict[str, str] = {}
    if "preset" in settings:
        name = settings["preset"].strip().lower()
        if name not in PRESETS:
            raise BadConfig("preset", f"unknown preset {name!r}")
        merged.update(PRESETS[name])
    merged.update({k: v for k, v in settings.items() if k != "preset"})

    for key in ("model", "p"):
        if not merged.get(key, "").strip():
            raise BadConfig(key, "required")
    try:
        models = [SimModel.parse(m) for m in merged["model"].split(",") if m.strip()]
    except ValueError as exc:
        raise BadConfig("model", str(exc)) from None
    ps = _floats("p", merged["p"])

    common = {}
    if "epsilon" in merged:
        common["epsilon"] = _floats("epsilon", merged["epsilon"])[0]
    for key in ("n", "N", "N_b", "seed"):
        if key in merged:
            common[key] = _int(key, merged[key])
    if "grid_ratios" in merged:
        common["grid_ratios"] = _floats("grid_ratios", merged["grid_ratios"], DEFAULT_RATIOS)
    if "y_grid" in merged:
        common["y_grid"] = _floats("y_grid", merged["y_grid"], DEFAULT_Y_GRID)
    if "apply_psi" in merged:
        common["apply_psi"] = _bool("apply_psi", merged["apply_psi"])
    workers = _int("workers", merged["workers"]) if "workers" in merged else 1

    configs = []
    for m in models:
        for p in ps:
            try:
                configs.append(ExperimentConfig(model=m, p=p, **common))
            except ValueError as exc:
                raise BadConfig("experiment", str(exc)) from None
    return configs, workers
