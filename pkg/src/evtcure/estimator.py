"""Extreme-value corrected cure-rate estimator and its tuning.

The plateau of the Kaplan-Meier estimate underestimates the susceptible
fraction ``p`` when follow-up is insufficient. Assuming the susceptible
distribution has a Frechet-type tail, the KME values at ``tau``, ``y*tau``
and ``y**2*tau`` (``tau`` the largest observation) determine the power
``y**(-1/gamma)`` and hence how much mass lies beyond ``tau``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import rng as _rng
from .errors import DegenerateDenominator, EndpointNotAbove
from .survival import SurvivalSample, km_cdf_values

__all__ = [
    "DEFAULT_Y_GRID",
    "CorrectionInput",
    "CorrectedEstimate",
    "YSelectionConfig",
    "Selection",
    "psi_transform",
    "psi_sample",
    "corrected_estimate",
    "p_hat_y_from_sample",
    "p_y_true",
    "bootstrap_resample",
    "select_y_star",
    "select_y_from_resamples",
]

DEFAULT_Y_GRID: tuple[float, ...] = tuple(round(0.60 + 0.02 * k, 2) for k in range(20))


@dataclass(frozen=True)
class CorrectionInput:
    F_at_tau: float
    F_at_y_tau: float
    F_at_y2_tau: float
    y: float = float("nan")


@dataclass(frozen=True)
class CorrectedEstimate:
    p_hat_y: float
    y_gamma_hat: float
    fallback_used: bool

    @property
    def clamped(self) -> float:
        return min(max(self.p_hat_y, 0.0), 1.0)


@dataclass(frozen=True)
class YSelectionConfig:
    grid: tuple[float, ...] = DEFAULT_Y_GRID
    n_bootstrap: int = 200
    seed: int = 0
    clamp: bool = True

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.size == 0 or np.any(g <= 0) or np.any(g >= 1):
            raise ValueError("y grid values must lie strictly inside (0, 1)")
        if np.any(np.diff(g) <= 0):
            raise ValueError("y grid must be strictly increasing")
        if self.n_bootstrap < 1:
            raise ValueError("n_bootstrap must be positive")
        object.__setattr__(self, "grid", tuple(float(v) for v in g))


@dataclass(frozen=True)
class Selection:
    """Outcome of the bootstrap tuning.

    ``value`` is the estimate at ``y_star`` as used for comparison (clamped to
    [0, 1] when the config asks for it); ``estimate`` keeps the raw value.
    """

    y_star: float
    value: float
    estimate: CorrectedEstimate
    bootstrap_mean: float
    grid_estimates: np.ndarray = field(repr=False)


def psi_transform(times, tau0: float) -> np.ndarray:
    """Map ``x -> 1 / (tau0 - x)``; requires every time below ``tau0``."""
    x = np.asarray(times, dtype=float)
    if not np.isfinite(tau0):
        raise ValueError("tau0 must be finite")
    if np.any(x >= tau0):
        raise EndpointNotAbove(f"all times must be below tau0={tau0}, max is {x.max()}")
    return 1.0 / (tau0 - x)


def psi_sample(sample: SurvivalSample, tau0: float) -> SurvivalSample:
    # psi is strictly increasing, so sort order and tie policy carry over
    t = psi_transform(sample.times, tau0)
    t.setflags(write=False)
    return SurvivalSample(t, sample.events)


def _correct(F_tau, F_y, F_y2):
    """Vectorised core: returns ``(p_hat_y, y_gamma_hat, fallback)`` arrays."""
    F_tau, F_y, F_y2 = np.broadcast_arrays(
        np.asarray(F_tau, float), np.asarray(F_y, float), np.asarray(F_y2, float)
    )
    denom = F_y - F_tau
    with np.errstate(divide="ignore", invalid="ignore"):
        yg = (F_y2 - F_y) / denom
        p = F_tau + (F_tau - F_y) / (yg - 1.0)
    # yg estimates y**(-1/gamma) > 0; yg == 0 means no mass on [y^2 tau, y tau]
    bad = (denom == 0) | ~np.isfinite(yg) | (yg <= 0) | (yg == 1.0) | ~np.isfinite(p)
    p = np.where(bad, F_tau, p)
    return p, yg, bad


def corrected_estimate(inp: CorrectionInput) -> CorrectedEstimate:
    """Extrapolated estimate from three KME levels.

    Degenerate configurations (no increment between ``y*tau`` and ``tau``
    or between ``y^2*tau`` and ``y*tau``, ratio equal to one) fall back to
    the plateau value.
    """
    p, yg, bad = _correct(inp.F_at_tau, inp.F_at_y_tau, inp.F_at_y2_tau)
    return CorrectedEstimate(float(p), float(yg), bool(bad))


def _levels(times, cdf, ys):
    """KME at tau, y*tau and y^2*tau for each y; ``times`` sorted ascending."""
    tau = times[-1]
    ys = np.asarray(ys, dtype=float)
    pts = np.concatenate(([tau], ys * tau, ys * ys * tau))
    idx = np.searchsorted(times, pts, side="right") - 1
    vals = np.where(idx >= 0, cdf[np.maximum(idx, 0)], 0.0)
    k = ys.size
    return vals[0], vals[1 : k + 1], vals[k + 1 :]


def _grid_estimates(times, events, ys):
    cdf = km_cdf_values(times, events)
    F_tau, F_y, F_y2 = _levels(times, cdf, ys)
    p, yg, bad = _correct(F_tau, F_y, F_y2)
    return float(F_tau), p, yg, bad


def p_hat_y_from_sample(sample: SurvivalSample, y: float) -> CorrectedEstimate:
    if not 0 < y < 1:
        raise ValueError("y must lie in (0, 1)")
    _, p, yg, bad = _grid_estimates(sample.times, sample.events.astype(float), [y])
    return CorrectedEstimate(float(p[0]), float(yg[0]), bool(bad[0]))


def p_y_true(F: Callable[[float], float], y: float, tau_c: float) -> float:
    """Population counterpart of the estimator for a known sub-CDF ``F``."""
    a, b, c = F(tau_c), F(y * tau_c), F(y * y * tau_c)
    denom = c - 2.0 * b + a
    if denom == 0:
        raise DegenerateDenominator(f"F(y^2 t) - 2F(y t) + F(t) = 0 at y={y}, t={tau_c}")
    return a - (a - b) ** 2 / denom


def _resample_indices(n: int, gen: np.random.Generator) -> np.ndarray:
    # sorting the indices keeps times ordered and events-first ties intact
    return np.sort(gen.integers(0, n, size=n))


def bootstrap_resample(sample: SurvivalSample, gen: np.random.Generator) -> SurvivalSample:
    """Draw ``n`` observations with replacement from ``sample``."""
    idx = _resample_indices(sample.n, gen)
    t, e = sample.times[idx], sample.events[idx]
    t.setflags(write=False)
    e.setflags(write=False)
    return SurvivalSample(t, e)


def _bootstrap_value(times, events, ys, clamp: bool) -> float:
    F_tau, p, _, bad = _grid_estimates(times, events, ys)
    if clamp:
        p = np.clip(p, 0.0, 1.0)
    above = np.flatnonzero(~bad & (p > F_tau))
    if above.size == 0:
        return F_tau
    return float(p[above[-1]])


def _argmin_largest(values: np.ndarray, target: float) -> int:
    dist = np.abs(values - target)
    hits = np.flatnonzero(dist == dist.min())
    return int(hits[-1])


def _finish(sample: SurvivalSample, ys: np.ndarray, boot_mean: float, clamp: bool) -> Selection:
    _, p, yg, bad = _grid_estimates(sample.times, sample.events.astype(float), ys)
    score = np.clip(p, 0.0, 1.0) if clamp else p
    k = _argmin_largest(score, boot_mean)
    est = CorrectedEstimate(float(p[k]), float(yg[k]), bool(bad[k]))
    return Selection(float(ys[k]), float(score[k]), est, boot_mean, p)


def select_y_from_resamples(
    sample: SurvivalSample,
    grid: Sequence[float],
    resamples: Sequence[SurvivalSample],
    clamp: bool = True,
) -> Selection:
    """Tuning rule applied to an explicit list of bootstrap samples.

    For each resample the estimate at the largest grid ``y`` that moves the
    plateau upward is taken (its own plateau when none does). The selected
    ``y`` makes the original-sample estimate closest to their mean, ties going
    to the larger ``y``. With ``clamp`` every candidate estimate is projected
    onto [0, 1] first; unclamped, rare near-singular ratios dominate the mean.
    """
    ys = np.asarray(grid, dtype=float)
    vals = [_bootstrap_value(r.times, r.events.astype(float), ys, clamp) for r in resamples]
    return _finish(sample, ys, float(np.mean(vals)), clamp)


def select_y_star(
    sample: SurvivalSample, cfg: YSelectionConfig, stream_path: tuple[int, ...] = ()
) -> Selection:
    """Bootstrap choice of ``y`` from ``cfg.grid``.

    Resample ``b`` draws from ``rng.stream(cfg.seed, *stream_path, b)``.
    """
    ys = np.asarray(cfg.grid, dtype=float)
    times, events = sample.times, sample.events.astype(float)
    total = 0.0
    for b in range(cfg.n_bootstrap):
        idx = _resample_indices(sample.n, _rng.stream(cfg.seed, *stream_path, b))
        total += _bootstrap_value(times[idx], events[idx], ys, cfg.clamp)
    return _finish(sample, ys, total / cfg.n_bootstrap, cfg.clamp)
