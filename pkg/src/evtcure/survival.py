"""Ordered right-censored samples and product-limit estimators.

A :class:`SurvivalSample` keeps observations sorted by time with events
ahead of censorings at tied times. Under that ordering the product-limit
estimate can be built as a cumulative product over order statistics, which
is what :func:`kaplan_meier` does.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import EmptySample, NegativeTime, NonFiniteTime

__all__ = [
    "Observation",
    "SurvivalSample",
    "StepCurve",
    "build_sample",
    "kaplan_meier",
    "censoring_km",
    "evaluate",
    "evaluate_left",
    "plateau_estimate",
    "km_cdf_values",
]


class Observation(NamedTuple):
    time: float
    event: bool


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SurvivalSample:
    """Right-censored observations sorted ascending, events first on ties.

    Construct through :func:`build_sample` or :meth:`from_arrays`; the plain
    constructor trusts its arguments.
    """

    times: np.ndarray
    events: np.ndarray

    @classmethod
    def from_arrays(cls, times, events) -> "SurvivalSample":
        t = np.asarray(times, dtype=float).ravel()
        e = np.asarray(events).ravel().astype(bool)
        if t.size == 0:
            raise EmptySample("sample must contain at least one observation")
        if t.shape != e.shape:
            raise ValueError("times and events must have the same length")
        if not np.all(np.isfinite(t)):
            raise NonFiniteTime("observed times must be finite")
        if np.any(t < 0):
            raise NegativeTime("observed times must be nonnegative")
        # lexsort keys: last is primary; ~e puts events (False) first
        order = np.lexsort((~e, t))
        return cls(_frozen(t[order]), _frozen(e[order]))

    @property
    def n(self) -> int:
        return int(self.times.size)

    @property
    def observations(self) -> list[Observation]:
        return [Observation(float(t), bool(e)) for t, e in zip(self.times, self.events)]

    @property
    def max_time(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, SurvivalSample):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(
            self.events, other.events
        )

    def __repr__(self) -> str:
        return f"SurvivalSample(n={self.n}, events={int(self.events.sum())})"

    def rescaled(self, factor: float) -> "SurvivalSample":
        """Multiply every time by ``factor`` (> 0); order is unchanged."""
        if not factor > 0:
            raise ValueError("factor must be positive")
        return SurvivalSample(_frozen(self.times * factor), self.events)


def build_sample(raw: Iterable[tuple[float, bool]]) -> SurvivalSample:
    """Validate ``(time, event)`` pairs and sort them under the tie policy."""
    pairs = list(raw)
    if not pairs:
        raise EmptySample("sample must contain at least one observation")
    times = [p[0] for p in pairs]
    events = [bool(p[1]) for p in pairs]
    return SurvivalSample.from_arrays(times, events)


@dataclass(frozen=True, eq=False)
class StepCurve:
    """Right-continuous nondecreasing step function on ``[0, inf)``.

    ``values[k]`` holds on ``[jump_times[k], jump_times[k+1])``; before the
    first jump the curve equals ``baseline``.
    """

    jump_times: np.ndarray
    values: np.ndarray
    baseline: float = 0.0

    def __call__(self, t):
        return evaluate(self, t)

    def left(self, t):
        return evaluate_left(self, t)


def _lookup(curve: StepCurve, t, side: str):
    t_arr = np.asarray(t, dtype=float)
    idx = np.searchsorted(curve.jump_times, t_arr, side=side) - 1
    vals = np.where(idx >= 0, curve.values[np.maximum(idx, 0)], curve.baseline)
    if np.ndim(t_arr) == 0:
        return float(vals)
    return vals


def evaluate(curve: StepCurve, t):
    """Value of ``curve`` at ``t`` (scalar or array)."""
    return _lookup(curve, t, "right")


def evaluate_left(curve: StepCurve, t):
    """Left limit of ``curve`` at ``t``."""
    return _lookup(curve, t, "left")


def km_cdf_values(times: np.ndarray, events: np.ndarray) -> np.ndarray:
    """Product-limit CDF after each order statistic of a sorted sample.

    The i-th factor (0-based) is ``1 - events[i] / (n - i)``, i.e. the risk set
    at the (i+1)-th order statistic. Returned array is aligned with ``times``.
    """
    n = times.size
    at_risk = np.arange(n, 0, -1, dtype=float)
    surv = np.cumprod(1.0 - events / at_risk)
    return np.clip(1.0 - surv, 0.0, 1.0)


def _compress(times: np.ndarray, cdf: np.ndarray) -> StepCurve:
    # keep the last order statistic of each run of equal times
    last = np.ones(times.size, dtype=bool)
    last[:-1] = times[1:] != times[:-1]
    return StepCurve(_frozen(times[last].copy()), _frozen(cdf[last].copy()), 0.0)


def kaplan_meier(sample: SurvivalSample) -> StepCurve:
    """Kaplan-Meier estimate of the (sub-)distribution of the event time."""
    cdf = km_cdf_values(sample.times, sample.events.astype(float))
    return _compress(sample.times, cdf)


def censoring_km(sample: SurvivalSample) -> StepCurve:
    """Kaplan-Meier estimate of the censoring distribution.

    Indicators are flipped and ties reordered so that censorings precede
    events at equal times.
    """
    cens = ~sample.events
    order = np.lexsort((~cens, sample.times))
    t = sample.times[order]
    cdf = km_cdf_values(t, cens[order].astype(float))
    return _compress(t, cdf)


def plateau_estimate(sample: SurvivalSample) -> float:
    """KME height at the largest observed time."""
    cdf = km_cdf_values(sample.times, sample.events.astype(float))
    return float(cdf[-1])
