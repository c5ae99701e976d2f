"""CSV ingestion, per-group analysis and report/curve emission."""

from __future__ import annotations

import csv
import json
import math
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .errors import (
    BadRow,
    EmptyGroup,
    EndpointNotAbove,
    EstimationError,
    InputError,
    MalformedHeader,
)
from .estimator import DEFAULT_Y_GRID, YSelectionConfig, psi_sample, psi_transform, select_y_star
from .simulation import CurvePoint, censoring_proportion
from .survival import SurvivalSample, plateau_estimate
from .variance import plateau_variance, sigma2_plugin, wald_interval

SCHEMA_VERSION = 1
ALL_LABEL = "All"


def _parse_row(row: dict, line: int, group_column: Optional[str]):
    raw_t = (row.get("time") or "").strip()
    raw_s = (row.get("status") or "").strip()
    try:
        t = float(raw_t)
    except ValueError:
        raise BadRow(line, f"time {raw_t!r} is not a number") from None
    if not math.isfinite(t) or t < 0:
        raise BadRow(line, f"time {raw_t!r} must be finite and nonnegative")
    if raw_s not in ("0", "1"):
        raise BadRow(line, f"status {raw_s!r} must be 0 or 1")
    label = None
    if group_column is not None:
        label = (row.get(group_column) or "").strip()
        if not label:
            raise BadRow(line, f"missing value in group column {group_column!r}")
    return t, raw_s == "1", label


def _open_rows(path, group_column):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    fh = path.open(newline="", encoding="utf-8")
    reader = csv.DictReader(fh)
    header = reader.fieldnames or []
    missing = [c for c in ("time", "status") if c not in header]
    if group_column is not None and group_column not in header:
        missing.append(group_column)
    if missing:
        fh.close()
        raise MalformedHeader(f"{path}: header lacks column(s) {', '.join(missing)}")
    return fh, reader


def read_survival_csv(path, group_column: Optional[str] = None) -> dict[str, SurvivalSample]:
    """Samples keyed by group label, ``"All"`` first, then labels sorted."""
    fh, reader = _open_rows(path, group_column)
    groups: dict[str, list[tuple[float, bool]]] = {}
    rows: list[tuple[float, bool]] = []
    with fh:
        # header occupies line 1
        for line, row in enumerate(reader, start=2):
            t, e, label = _parse_row(row, line, group_column)
            rows.append((t, e))
            if label is not None:
                groups.setdefault(label, []).append((t, e))
    if not rows:
        raise EmptyGroup(f"{path}: no data rows")

    def to_sample(pairs):
        return SurvivalSample.from_arrays([p[0] for p in pairs], [p[1] for p in pairs])

    out = {ALL_LABEL: to_sample(rows)}
    for label in sorted(groups):
        if label == ALL_LABEL:
            continue
        out[label] = to_sample(groups[label])
    return out


@dataclass(frozen=True)
class AnalysisRequest:
    input_path: str
    group_column: Optional[str] = None
    tau0: Optional[float] = None
    y_grid: tuple[float, ...] = DEFAULT_Y_GRID
    n_bootstrap: int = 200
    seed: int = 0
    confidence_level: float = 0.95

    def __post_init__(self):
        if not 0 < self.confidence_level < 1:
            raise ValueError("confidence level must lie in (0, 1)")


@dataclass(frozen=True)
class GroupResult:
    group: str
    n: int
    events: int
    censoring_prop: float
    p_hat_n: float
    p_hat_y_star: float
    p_hat_y_star_clamped: float
    outside_unit_interval: bool
    y_star: float
    fallback_used: bool
    sigma2: float
    variance_method: str
    ci_low: float
    ci_high: float
    cure_rate_km: float
    cure_rate_evt: float


@dataclass(frozen=True)
class AnalysisReport:
    request: AnalysisRequest
    groups: list[GroupResult] = field(default_factory=list)

    def to_dict(self) -> dict:
        req = asdict(self.request)
        req["y_grid"] = list(self.request.y_grid)
        return {
            "schema_version": SCHEMA_VERSION,
            "request": req,
            "groups": [asdict(g) for g in self.groups],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def group_stream_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def analyze_sample(label: str, sample: SurvivalSample, req: AnalysisRequest) -> GroupResult:
    if req.tau0 is not None:
        sample = psi_sample(sample, req.tau0)
    cfg = YSelectionConfig(tuple(req.y_grid), req.n_bootstrap, req.seed)
    sel = select_y_star(sample, cfg, (group_stream_key(label),))
    p_n = plateau_estimate(sample)
    if sel.estimate.fallback_used:
        # no extrapolation happened; the estimate is the plateau itself
        sigma2, method = plateau_variance(sample), "plateau"
    else:
        sigma2, method = sigma2_plugin(sample, sel.y_star).sigma2, "delta"
    clamped = sel.estimate.clamped
    lo, hi = wald_interval(clamped, sigma2, sample.n, req.confidence_level)
    return GroupResult(
        group=label,
        n=sample.n,
        events=int(sample.events.sum()),
        censoring_prop=censoring_proportion(sample),
        p_hat_n=p_n,
        p_hat_y_star=sel.estimate.p_hat_y,
        p_hat_y_star_clamped=clamped,
        outside_unit_interval=clamped != sel.estimate.p_hat_y,
        y_star=sel.y_star,
        fallback_used=sel.estimate.fallback_used,
        sigma2=sigma2,
        variance_method=method,
        ci_low=lo,
        ci_high=hi,
        cure_rate_km=1.0 - p_n,
        cure_rate_evt=1.0 - clamped,
    )


def analyze(req: AnalysisRequest) -> AnalysisReport:
    samples = read_survival_csv(req.input_path, req.group_column)
    if req.tau0 is not None and samples[ALL_LABEL].max_time >= req.tau0:
        raise EndpointNotAbove(f"tau0={req.tau0} must exceed the largest time")
    results = []
    for label, sample in samples.items():
        try:
            results.append(analyze_sample(label, sample, req))
        except EstimationError as exc:
            raise EstimationError(f"group {label!r}: {exc}") from exc
        except InputError as exc:
            raise InputError(f"group {label!r}: {exc}") from exc
    return AnalysisReport(req, results)


def transform_csv(input_path, tau0: float, output_path) -> int:
    """Apply ``1 / (tau0 - t)`` to the ``time`` column; returns rows written."""
    fh, reader = _open_rows(input_path, None)
    with fh:
        header = list(reader.fieldnames)
        rows = []
        for line, row in enumerate(reader, start=2):
            t, _, _ = _parse_row(row, line, None)
            if t >= tau0:
                raise EndpointNotAbove(f"line {line}: time {t} is not below tau0={tau0}")
            row["time"] = repr(float(psi_transform([t], tau0)[0]))
            rows.append(row)
    with Path(output_path).open("w", newline="", encoding="utf-8") as out:
        writer = csv.DictWriter(out, fieldnames=header, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return len(rows)


def write_curve_csv(points: list[CurvePoint], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CurvePoint.FIELDS)
        for pt in points:
            writer.writerow([repr(float(getattr(pt, f))) for f in CurvePoint.FIELDS])


def read_curve_csv(path) -> list[CurvePoint]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [CurvePoint(**{k: float(v) for k, v in row.items()}) for row in csv.DictReader(fh)]
