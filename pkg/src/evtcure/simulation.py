"""Mixture-cure data generation and the Monte Carlo study.

Susceptible times follow one of three families: the standard generalised
Pareto (unit scale), the half-Cauchy, and Beta(1, mu). A fraction ``1 - p``
of subjects is cured and always censored. Censoring is uniform on
``[0, tau_c]`` except for an atom of mass ``epsilon`` at ``tau_c``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, NamedTuple, Optional

import numpy as np

from . import rng as _rng
from .estimator import DEFAULT_Y_GRID, YSelectionConfig, psi_sample, select_y_star
from .survival import SurvivalSample, plateau_estimate

__all__ = [
    "SimModel",
    "ExperimentConfig",
    "CurvePoint",
    "GeneratedData",
    "DEFAULT_RATIOS",
    "DESK_RATIOS",
    "STUDY_MODELS",
    "sample_susceptible",
    "quantile_susceptible",
    "gen_dataset",
    "censoring_proportion",
    "censoring_cdf",
    "run_replication",
    "run_experiment",
    "mse",
    "desk_configs",
    "full_configs",
]

DEFAULT_RATIOS: tuple[float, ...] = tuple(k / 24 for k in range(1, 25))
DESK_RATIOS: tuple[float, ...] = (0.4, 0.6, 0.8, 1.0)

_FAMILIES = ("gpd", "halfcauchy", "beta")


@dataclass(frozen=True)
class SimModel:
    """Susceptible-time distribution.

    ``param`` is the shape ``gamma`` for ``gpd`` and ``mu`` for ``beta``;
    it is ignored for ``halfcauchy``.
    """

    family: str
    param: float = float("nan")

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "gpd" and (not math.isfinite(self.param) or self.param == 0):
            raise ValueError("gpd needs a finite nonzero gamma")
        if self.family == "beta" and not self.param > 0:
            raise ValueError("beta needs mu > 0")
        if self.family == "halfcauchy":
            object.__setattr__(self, "param", float("nan"))

    @classmethod
    def gpd(cls, gamma: float) -> "SimModel":
        return cls("gpd", float(gamma))

    @classmethod
    def half_cauchy(cls) -> "SimModel":
        return cls("halfcauchy")

    @classmethod
    def beta(cls, mu: float) -> "SimModel":
        return cls("beta", float(mu))

    @classmethod
    def parse(cls, text: str) -> "SimModel":
        """Parse ``gpd:<gamma>``, ``halfcauchy`` or ``beta:<mu>``."""
        name, _, arg = text.strip().lower().partition(":")
        if name == "halfcauchy":
            return cls.half_cauchy()
        if name not in ("gpd", "beta") or not arg:
            raise ValueError(f"cannot parse model {text!r}")
        return cls(name, float(arg))

    def label(self) -> str:
        if self.family == "halfcauchy":
            return "halfcauchy"
        return f"{self.family}:{self.param:g}"

    @property
    def gamma(self) -> float:
        if self.family == "gpd":
            return self.param
        if self.family == "halfcauchy":
            return 1.0
        return -1.0 / self.param

    @property
    def tau0(self) -> float:
        if self.family == "gpd":
            return -1.0 / self.param if self.param < 0 else math.inf
        if self.family == "halfcauchy":
            return math.inf
        return 1.0

    def cdf(self, t):
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        if self.family == "gpd":
            g = self.param
            base = np.maximum(1.0 + g * t, 0.0)
            with np.errstate(divide="ignore"):
                out = np.where(base > 0, 1.0 - base ** (-1.0 / g), 1.0)
        elif self.family == "halfcauchy":
            out = 2.0 / np.pi * np.arctan(t)
        else:
            out = 1.0 - np.maximum(1.0 - t, 0.0) ** self.param
        return float(out) if out.ndim == 0 else out

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "gpd":
            g = self.param
            base = 1.0 + g * t
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where((t >= 0) & (base > 0), base ** (-1.0 / g - 1.0), 0.0)
        elif self.family == "halfcauchy":
            out = np.where(t >= 0, 2.0 / (np.pi * (1.0 + t * t)), 0.0)
        else:
            mu = self.param
            out = np.where((t >= 0) & (t < 1), mu * np.maximum(1.0 - t, 0.0) ** (mu - 1.0), 0.0)
        return float(out) if out.ndim == 0 else out

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == "gpd":
            g = self.param
            out = ((1.0 - u) ** (-g) - 1.0) / g
        elif self.family == "halfcauchy":
            out = np.tan(np.pi * u / 2.0)
        else:
            out = 1.0 - (1.0 - u) ** (1.0 / self.param)
        return float(out) if out.ndim == 0 else out


# Models 1-3 of the reference simulation design.
STUDY_MODELS: tuple[SimModel, ...] = (
    SimModel.gpd(0.5),
    SimModel.gpd(1.0),
    SimModel.gpd(1.5),
    SimModel.gpd(-0.5),
    SimModel.gpd(-0.7),
    SimModel.gpd(-1.0),
    SimModel.half_cauchy(),
    SimModel.beta(1 / 0.7),
)


def sample_susceptible(model: SimModel, gen: np.random.Generator, size=None):
    """Inverse-transform draw(s) from the susceptible distribution."""
    return model.ppf(gen.random(size))


def quantile_susceptible(model: SimModel, q: float) -> float:
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    return float(model.ppf(q))


def censoring_cdf(tau_c: float, epsilon: float) -> Callable[[float], float]:
    """CDF of the censoring time: uniform on [0, tau_c] plus an atom at tau_c."""

    def F_c(t):
        if t < 0:
            return 0.0
        if t >= tau_c:
            return 1.0
        return (1.0 - epsilon) * t / tau_c

    return F_c


class GeneratedData(NamedTuple):
    sample: SurvivalSample
    cured: np.ndarray


def gen_dataset(
    model: SimModel,
    p: float,
    tau_c: float,
    epsilon: float,
    n: int,
    gen: np.random.Generator,
    apply_psi: bool = False,
) -> GeneratedData:
    """Simulate ``n`` mixture-cure subjects with insufficient follow-up.

    Draw order is fixed: cure indicators, susceptible times, atom indicators,
    uniform censoring times. ``cured`` is aligned with the sorted sample.
    With ``apply_psi`` and a negative extreme value index the observed
    times are mapped through ``1 / (tau0 - x)``.
    """
    if not tau_c > 0 or not 0 < p <= 1 or not 0 <= epsilon <= 1 or n < 1:
        raise ValueError("need tau_c > 0, p in (0, 1], epsilon in [0, 1], n >= 1")
    cured = gen.random(n) >= p
    T = sample_susceptible(model, gen, n)
    atom = gen.random(n) < epsilon
    C = np.where(atom, tau_c, gen.uniform(0.0, tau_c, n))
    event = ~cured & (T <= C)
    Y = np.where(event, T, C)
    order = np.lexsort((~event, Y))
    sample = SurvivalSample.from_arrays(Y[order], event[order])
    if apply_psi and model.gamma < 0:
        sample = psi_sample(sample, model.tau0)
    return GeneratedData(sample, cured[order])


def censoring_proportion(sample: SurvivalSample) -> float:
    return float(1.0 - sample.events.mean())


def mse(estimates, truth: float) -> float:
    e = np.asarray(estimates, dtype=float)
    return float(np.mean((e - truth) ** 2))


@dataclass(frozen=True)
class ExperimentConfig:
    model: SimModel
    p: float
    epsilon: float = 0.05
    n: int = 1000
    N: int = 200
    N_b: int = 200
    grid_ratios: tuple[float, ...] = DEFAULT_RATIOS
    y_grid: tuple[float, ...] = DEFAULT_Y_GRID
    seed: int = 0
    apply_psi: bool = True

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if not 0 <= self.epsilon < 1:
            raise ValueError("epsilon must lie in [0, 1)")
        if min(self.n, self.N, self.N_b) < 1:
            raise ValueError("n, N and N_b must be positive")
        r = np.asarray(self.grid_ratios, dtype=float)
        if r.size == 0 or np.any(r <= 0) or np.any(r > 1) or np.any(np.diff(r) < 0):
            raise ValueError("grid ratios must be nondecreasing values in (0, 1]")
        object.__setattr__(self, "grid_ratios", tuple(float(v) for v in r))
        # validates the y grid
        YSelectionConfig(tuple(self.y_grid), self.N_b, self.seed)
        object.__setattr__(self, "y_grid", tuple(float(v) for v in self.y_grid))

    def tau_c(self, ratio: float) -> float:
        return ratio * quantile_susceptible(self.model, 0.95)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.label()
        d["grid_ratios"] = list(self.grid_ratios)
        d["y_grid"] = list(self.y_grid)
        return d


@dataclass(frozen=True)
class CurvePoint:
    ratio: float
    tau_c: float
    mean_p_star: float
    mse_p_star: float
    mean_p_n: float
    mse_p_n: float
    censoring_prop: float

    FIELDS = (
        "ratio",
        "tau_c",
        "mean_p_star",
        "mse_p_star",
        "mean_p_n",
        "mse_p_n",
        "censoring_prop",
    )


@dataclass(frozen=True)
class Replication:
    p_n: float
    p_star: float
    y_star: float
    fallback: bool
    censoring_prop: float


def run_replication(cfg: ExperimentConfig, k: int, j: int) -> Replication:
    """Replication ``j`` at grid index ``k``; streams are keyed by ``(k, j)``."""
    tau_c = cfg.tau_c(cfg.grid_ratios[k])
    data = gen_dataset(
        cfg.model, cfg.p, tau_c, cfg.epsilon, cfg.n, _rng.stream(cfg.seed, k, j, 0), cfg.apply_psi
    )
    sel = select_y_star(data.sample, YSelectionConfig(cfg.y_grid, cfg.N_b, cfg.seed), (k, j, 1))
    return Replication(
        plateau_estimate(data.sample),
        sel.value,
        sel.y_star,
        sel.estimate.fallback_used,
        censoring_proportion(data.sample),
    )


def _grid_point(args) -> list[Replication]:
    cfg, k = args
    return [run_replication(cfg, k, j) for j in range(cfg.N)]


def summarize(cfg: ExperimentConfig, k: int, reps: list[Replication]) -> CurvePoint:
    p_n = np.array([r.p_n for r in reps])
    p_star = np.array([r.p_star for r in reps])
    return CurvePoint(
        ratio=cfg.grid_ratios[k],
        tau_c=cfg.tau_c(cfg.grid_ratios[k]),
        mean_p_star=float(p_star.mean()),
        mse_p_star=mse(p_star, cfg.p),
        mean_p_n=float(p_n.mean()),
        mse_p_n=mse(p_n, cfg.p),
        censoring_prop=float(np.mean([r.censoring_prop for r in reps])),
    )


def run_experiment(
    cfg: ExperimentConfig,
    progress: Optional[Callable[[str], None]] = None,
    workers: int = 1,
) -> list[CurvePoint]:
    """Average and MSE curves of both estimators over the ratio grid.

    Grid points run in separate processes when ``workers > 1``; output does
    not depend on ``workers``.
    """
    jobs = [(cfg, k) for k in range(len(cfg.grid_ratios))]
    points = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_grid_point, jobs)
            for k, reps in enumerate(results):
                points.append(summarize(cfg, k, reps))
                if progress:
                    progress(f"{cfg.model.label()} p={cfg.p:g} ratio={cfg.grid_ratios[k]:.4f} done")
    else:
        for job in jobs:
            k = job[1]
            points.append(summarize(cfg, k, _grid_point(job)))
            if progress:
                progress(f"{cfg.model.label()} p={cfg.p:g} ratio={cfg.grid_ratios[k]:.4f} done")
    return points


def desk_configs(seed: int = 0) -> list[ExperimentConfig]:
    """Reduced-size run: model 1 with gamma=1, p=0.5, four ratios."""
    return [
        ExperimentConfig(
            SimModel.gpd(1.0), 0.5, n=1000, N=50, N_b=100, grid_ratios=DESK_RATIOS, seed=seed
        )
    ]


def full_configs(seed: int = 0, ps: Iterable[float] = (0.25, 0.5, 0.75)) -> list[ExperimentConfig]:
    """Full design: every model and cure level, N = N_b = 200, 24 ratios."""
    return [ExperimentConfig(m, p, seed=seed) for m in STUDY_MODELS for p in ps]
