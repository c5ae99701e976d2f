import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate, stats

from evtcure import rng
from evtcure.simulation import (
    DESK_RATIOS,
    STUDY_MODELS,
    ExperimentConfig,
    SimModel,
    censoring_proportion,
    gen_dataset,
    mse,
    quantile_susceptible,
    run_experiment,
    run_replication,
)

from conftest import brute_force_km, sample_of


def test_model_invariants():
    assert SimModel.gpd(0.5).tau0 == math.inf
    assert SimModel.gpd(-0.5).tau0 == pytest.approx(2.0)
    hc = SimModel.half_cauchy()
    assert (hc.gamma, hc.tau0) == (1.0, math.inf)
    b = SimModel.beta(10 / 7)
    assert b.gamma == pytest.approx(-0.7) and b.tau0 == 1.0


def test_model_parse_roundtrip():
    for m in STUDY_MODELS:
        assert SimModel.parse(m.label()).label() == m.label()
    with pytest.raises(ValueError):
        SimModel.parse("weibull:2")


def test_inverse_transform_examples():
    assert SimModel.gpd(1.0).ppf(0.95) == pytest.approx(19.0)
    assert SimModel.beta(10 / 7).ppf(0.0) == 0.0
    assert SimModel.gpd(-0.5).ppf(1 - 1e-15) == pytest.approx(2.0, abs=1e-6)


def test_quantile_examples():
    assert quantile_susceptible(SimModel.gpd(1.0), 0.95) == pytest.approx(19.0)
    assert quantile_susceptible(SimModel.gpd(-0.5), 0.95) == pytest.approx(2 * (1 - math.sqrt(0.05)))
    assert quantile_susceptible(SimModel.gpd(-0.5), 0.95) == pytest.approx(1.55279, abs=1e-5)
    assert quantile_susceptible(SimModel.half_cauchy(), 0.5) == pytest.approx(1.0)


def scipy_reference(model: SimModel):
    if model.family == "gpd":
        return stats.genpareto(c=model.param)
    if model.family == "halfcauchy":
        return stats.halfcauchy()
    return stats.beta(1.0, model.param)


@pytest.mark.parametrize("model", STUDY_MODELS, ids=lambda m: m.label())
def test_draws_follow_reference_distribution(model):
    draws = model.ppf(rng.stream(8).random(10_000))
    ref = scipy_reference(model)
    assert stats.kstest(draws, ref.cdf).statistic < 0.02
    # cdf/pdf agree with the independent reference
    grid = ref.ppf([0.1, 0.5, 0.9])
    assert model.cdf(grid) == pytest.approx(ref.cdf(grid), rel=1e-10)
    assert model.pdf(grid) == pytest.approx(ref.pdf(grid), rel=1e-10)


@pytest.mark.parametrize("model", STUDY_MODELS, ids=lambda m: m.label())
def test_empirical_quantiles_match_closed_form(model):
    draws = model.ppf(rng.stream(9).random(100_000))
    for q in (0.5, 0.9, 0.95):
        assert np.quantile(draws, q) == pytest.approx(quantile_susceptible(model, q), rel=0.02)


def test_generated_data_respects_censoring_scheme():
    tau_c = 10.0
    data = gen_dataset(SimModel.gpd(1.0), 0.5, tau_c, 0.05, 5000, rng.stream(1))
    s = data.sample
    assert np.all(s.times <= tau_c)
    assert not np.any(s.events[data.cured])
    assert data.cured.mean() == pytest.approx(0.5, abs=0.03)
    # atom subjects land on tau_c unless their event came first
    at_atom = 0.05 * (0.5 + 0.5 * (1 - SimModel.gpd(1.0).cdf(tau_c)))
    assert np.mean(s.times == tau_c) == pytest.approx(at_atom, abs=0.008)


def test_degenerate_censoring_at_tau_c():
    tau_c = 3.0
    data = gen_dataset(SimModel.gpd(1.0), 1.0, tau_c, 1.0, 2000, rng.stream(2))
    s = data.sample
    assert not data.cured.any()
    assert np.all(s.times[~s.events] == tau_c)
    assert np.all(s.times[s.events] <= tau_c)


def test_small_p_mostly_censored():
    s = gen_dataset(SimModel.gpd(1.0), 0.02, 19.0, 0.05, 3000, rng.stream(3)).sample
    assert censoring_proportion(s) > 0.97


def test_negative_gamma_data_are_transformed():
    m = SimModel.gpd(-0.5)
    raw = gen_dataset(m, 0.5, 1.2, 0.05, 500, rng.stream(4))
    psi = gen_dataset(m, 0.5, 1.2, 0.05, 500, rng.stream(4), apply_psi=True)
    assert psi.sample.times == pytest.approx(1.0 / (m.tau0 - raw.sample.times))
    assert np.array_equal(psi.sample.events, raw.sample.events)


def population_censoring(model, p, tau_c, eps):
    detected = (1 - eps) * integrate.quad(model.cdf, 0, tau_c)[0] / tau_c + eps * model.cdf(tau_c)
    return 1 - p * detected


def test_censoring_proportion_matches_population_and_band():
    m, p, eps = SimModel.gpd(1.0), 0.5, 0.05
    tau_c = 0.8 * 19.0
    s = gen_dataset(m, p, tau_c, eps, 100_000, rng.stream(5)).sample
    c = censoring_proportion(s)
    assert c == pytest.approx(population_censoring(m, p, tau_c, eps), abs=0.005)
    assert 0.35 <= c <= 0.90


def test_censoring_proportion_examples():
    assert censoring_proportion(sample_of([(1, True), (2, True)])) == 0.0
    assert censoring_proportion(sample_of([(1, False), (2, False)])) == 1.0
    assert censoring_proportion(sample_of([(1, True), (2, False)])) == 0.5


def test_mse_of_constant():
    assert mse([0.3] * 7, 0.5) == pytest.approx(0.04)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(SimModel.gpd(1.0), 0.5, grid_ratios=(0.0, 0.5))
    with pytest.raises(ValueError):
        ExperimentConfig(SimModel.gpd(1.0), 1.5)
    with pytest.raises(ValueError):
        ExperimentConfig(SimModel.gpd(1.0), 0.5, y_grid=(0.5, 1.0))


def test_default_ratio_grid():
    cfg = ExperimentConfig(SimModel.gpd(1.0), 0.5)
    assert len(cfg.grid_ratios) == 24
    assert cfg.grid_ratios[0] == pytest.approx(1 / 24) and cfg.grid_ratios[-1] == 1.0


def test_tiny_replication_hand_trace():
    cfg = ExperimentConfig(
        SimModel.gpd(1.0), 0.5, n=4, N=1, N_b=3, grid_ratios=(0.8,), y_grid=(0.5, 0.7, 0.9), seed=17
    )
    rep = run_replication(cfg, 0, 0)

    # regenerate the data draw by draw
    gen = rng.stream(17, 0, 0, 0)
    tau_c = 0.8 * 19.0
    cured = gen.random(4) >= 0.5
    T = ((1 - gen.random(4)) ** -1.0 - 1.0) / 1.0
    atom = gen.random(4) < 0.05
    C = np.where(atom, tau_c, gen.uniform(0, tau_c, 4))
    obs = sorted(
        ((min(t, c) if not k else c, bool(not k and t <= c)) for t, c, k in zip(T, C, cured)),
        key=lambda o: (o[0], not o[1]),
    )
    times = [o[0] for o in obs]
    events = [float(o[1]) for o in obs]
    tau = times[-1]
    p_n = brute_force_km(times, events, tau)
    assert rep.p_n == pytest.approx(p_n, abs=1e-14)
    assert rep.censoring_prop == pytest.approx(1 - sum(events) / 4)

    def estimate(ts, es, y):
        F = [brute_force_km(ts, es, x) for x in (ts[-1], y * ts[-1], y * y * ts[-1])]
        if F[1] == F[0]:
            return F[0], True
        yg = (F[2] - F[1]) / (F[1] - F[0])
        if yg <= 0 or yg == 1:
            return F[0], True
        return F[0] + (F[0] - F[1]) / (yg - 1), False

    boot = []
    for b in range(3):
        idx = np.sort(rng.stream(17, 0, 0, 1, b).integers(0, 4, 4))
        ts = [times[i] for i in idx]
        es = [events[i] for i in idx]
        plateau = brute_force_km(ts, es, ts[-1])
        # y grid ascending, so the last qualifying entry is the supremum
        vals = [(min(max(v, 0), 1), fb) for v, fb in (estimate(ts, es, y) for y in cfg.y_grid)]
        chosen = [v for v, fb in vals if not fb and v > plateau]
        boot.append(chosen[-1] if chosen else plateau)
    m = np.mean(boot)
    cands = [min(max(estimate(times, events, y)[0], 0), 1) for y in cfg.y_grid]
    dist = [abs(c - m) for c in cands]
    k = max(i for i, d in enumerate(dist) if d == min(dist))
    assert rep.y_star == cfg.y_grid[k]
    assert rep.p_star == pytest.approx(cands[k], abs=1e-12)


def test_run_experiment_is_deterministic_and_schedule_free():
    cfg = ExperimentConfig(SimModel.gpd(1.0), 0.5, n=200, N=4, N_b=10, grid_ratios=(0.5, 1.0), seed=3)
    a = run_experiment(cfg)
    b = run_experiment(cfg)
    c = run_experiment(cfg, workers=2)
    assert a == b == c
    d = run_experiment(replace(cfg, seed=4))
    assert d != a


def test_progress_sink_receives_one_message_per_ratio():
    msgs = []
    cfg = ExperimentConfig(SimModel.gpd(1.0), 0.5, n=100, N=2, N_b=5, grid_ratios=(0.5, 1.0))
    run_experiment(cfg, progress=msgs.append)
    assert len(msgs) == 2


@pytest.mark.slow
def test_plateau_tracks_F_at_tau_c_not_p():
    cfg = ExperimentConfig(SimModel.gpd(1.0), 0.5, n=1000, N=40, N_b=1, grid_ratios=DESK_RATIOS, seed=2)
    for k, r in enumerate(cfg.grid_ratios):
        vals = [run_replication(cfg, k, j).p_n for j in range(cfg.N)]
        F_tau = 0.5 * cfg.model.cdf(cfg.tau_c(r))
        assert np.mean(vals) == pytest.approx(F_tau, abs=0.01)
        assert np.mean(vals) < 0.5
