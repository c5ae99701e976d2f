"""Asymptotic variance of the corrected estimator at a fixed ``y``.

The estimator is a smooth function of the KME at three time points, so its
normal limit follows from the delta method applied to the Gaussian limit of
the KME, whose covariance at times ``s <= t`` is
``(1 - F(s)) (1 - F(t)) v(s)`` with

    v(t) = int_0^t dF(s) / [(1 - F(s)) (1 - F(s-)) (1 - F_c(s-))].

:func:`sigma2_plugin` replaces ``F`` and ``F_c`` by their product-limit
estimates; :func:`sigma2_exact` integrates ``v`` for known distributions.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, stats

from .errors import DegenerateDenominator, PointBeyondData, QuadratureFailure
from .survival import SurvivalSample, censoring_km, evaluate, evaluate_left, kaplan_meier

__all__ = [
    "VarianceBreakdown",
    "coefficients",
    "v_hat",
    "v_exact",
    "sigma2_plugin",
    "sigma2_exact",
    "plateau_variance",
    "wald_interval",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class VarianceBreakdown:
    v_values: tuple[float, float, float]
    b: float
    a0: float
    a1: float
    a2: float
    sigma2: float
    dropped_terms: int = 0


def coefficients(b: float, printed: bool = False) -> tuple[float, float, float]:
    """Delta-method weights on the KME at ``tau``, ``y*tau``, ``y^2*tau``.

    The weights are the partial derivatives of
    ``F0 - (F0 - F1)^2 / (F2 - 2 F1 + F0)`` and therefore sum to one.
    ``printed=True`` returns the variant with middle weight ``-2b(1+b)``,
    kept only for comparison; it does not reproduce the sampling variance.
    """
    a0 = (1.0 - b) ** 2
    a1 = -2.0 * b * (1.0 + b) if printed else 2.0 * b * (1.0 - b)
    a2 = b * b
    return a0, a1, a2


def _assemble(F_vals, v_vals, b, printed=False, dropped=0) -> VarianceBreakdown:
    a = coefficients(b, printed)
    s = 0.0
    for i in range(3):
        for j in range(3):
            s += a[i] * a[j] * (1 - F_vals[i]) * (1 - F_vals[j]) * v_vals[max(i, j)]
    return VarianceBreakdown(
        tuple(float(v) for v in v_vals), float(b), *map(float, a), max(float(s), 0.0), dropped
    )


def _b(F0, F1, F2, y, t) -> float:
    denom = F2 - 2.0 * F1 + F0
    if denom == 0:
        raise DegenerateDenominator(f"second difference vanishes at y={y}, t={t}")
    return (F0 - F1) / denom


def _v_terms(sample: SurvivalSample):
    """Event times and the plug-in increments of ``v`` at each of them."""
    F = kaplan_meier(sample)
    G = censoring_km(sample)
    ev_times = np.unique(sample.times[sample.events])
    if ev_times.size == 0:
        return ev_times, ev_times.copy(), 0
    Ft = evaluate(F, ev_times)
    Fl = evaluate_left(F, ev_times)
    Gl = evaluate_left(G, ev_times)
    denom = (1 - Ft) * (1 - Fl) * (1 - Gl)
    keep = denom > 0
    incr = np.zeros_like(ev_times)
    incr[keep] = (Ft - Fl)[keep] / denom[keep]
    return ev_times, np.cumsum(incr), int((~keep).sum())


def v_hat(sample: SurvivalSample, t) -> float:
    """Plug-in estimate of ``v(t)`` for ``t`` up to the largest observation.

    Terms whose denominator vanishes (possible only at the last order
    statistic) are dropped.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr > sample.max_time):
        raise PointBeyondData(f"t exceeds the largest observed time {sample.max_time}")
    ev_times, cum, _ = _v_terms(sample)
    idx = np.searchsorted(ev_times, t_arr, side="right") - 1
    out = np.where(idx >= 0, cum[np.maximum(idx, 0)] if cum.size else 0.0, 0.0)
    return float(out) if out.ndim == 0 else out


def plateau_variance(sample: SurvivalSample) -> float:
    """Asymptotic variance of the plateau ``sqrt(n) (p_n - F(tau))``."""
    F = kaplan_meier(sample)
    tau = sample.max_time
    return float((1 - evaluate(F, tau)) ** 2 * v_hat(sample, tau))


def sigma2_plugin(sample: SurvivalSample, y: float, printed: bool = False) -> VarianceBreakdown:
    if not 0 < y < 1:
        raise ValueError("y must lie in (0, 1)")
    F = kaplan_meier(sample)
    tau = sample.max_time
    pts = np.array([tau, y * tau, y * y * tau])
    F_vals = evaluate(F, pts)
    b = _b(*F_vals, y, tau)
    ev_times, cum, dropped = _v_terms(sample)
    if dropped:
        log.debug("dropped %d plug-in term(s) with zero denominator", dropped)
    idx = np.searchsorted(ev_times, pts, side="right") - 1
    v_vals = np.where(idx >= 0, cum[np.maximum(idx, 0)] if cum.size else 0.0, 0.0)
    return _assemble(F_vals, v_vals, b, printed, dropped)


def v_exact(
    F: Callable[[float], float],
    F_c: Callable[[float], float],
    t: float,
    density: Callable[[float], float] | None = None,
    breakpoints: Sequence[float] = (),
    epsabs: float = 1e-10,
) -> float:
    """``v(t)`` for a continuous sub-CDF ``F`` by adaptive quadrature.

    ``density`` defaults to a central finite difference of ``F``. ``F_c`` is
    evaluated inside the open interval, so an atom at ``t`` itself is
    excluded as the left limit requires.
    """
    if t <= 0:
        return 0.0
    if density is None:
        h = 1e-6 * max(t, 1.0)

        def density(s):
            lo = max(s - h, 0.0)
            return (F(s + h) - F(lo)) / (s + h - lo)

    def integrand(s):
        Fs = F(s)
        return density(s) / ((1 - Fs) ** 2 * (1 - F_c(s)))

    pts = sorted(p for p in breakpoints if 0 < p < t) or None
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(integrand, 0.0, t, points=pts, epsabs=epsabs, epsrel=1e-10, limit=500)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc)) from exc
    if not np.isfinite(val):
        raise QuadratureFailure(f"non-finite integral on [0, {t}]")
    return float(val)


def sigma2_exact(
    F: Callable[[float], float],
    F_c: Callable[[float], float],
    y: float,
    tau_c: float,
    density: Callable[[float], float] | None = None,
    printed: bool = False,
) -> VarianceBreakdown:
    """Asymptotic variance at fixed ``y`` from known ``F`` and ``F_c``."""
    pts = [tau_c, y * tau_c, y * y * tau_c]
    F_vals = [F(p) for p in pts]
    b = _b(*F_vals, y, tau_c)
    v_vals = [v_exact(F, F_c, p, density) for p in pts]
    return _assemble(F_vals, v_vals, b, printed)


def wald_interval(p_hat: float, sigma2: float, n: int, level: float = 0.95) -> tuple[float, float]:
    """Normal-theory interval ``p_hat +/- z sqrt(sigma2 / n)`` clipped to [0, 1]."""
    if sigma2 < 0 or n < 1 or not 0 < level < 1:
        raise ValueError("need sigma2 >= 0, n >= 1 and level in (0, 1)")
    half = stats.norm.ppf(0.5 + level / 2) * np.sqrt(sigma2 / n)
    lo = min(max(p_hat - half, 0.0), 1.0)
    hi = min(max(p_hat + half, 0.0), 1.0)
    return float(lo), float(hi)
