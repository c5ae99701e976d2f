"""Cure-rate estimation under insufficient follow-up via tail extrapolation."""

from .errors import EstimationError, InputError
from .estimator import (
    CorrectedEstimate,
    CorrectionInput,
    YSelectionConfig,
    corrected_estimate,
    p_hat_y_from_sample,
    p_y_true,
    psi_transform,
    select_y_star,
)
from .simulation import ExperimentConfig, SimModel, gen_dataset, run_experiment
from .survival import (
    StepCurve,
    SurvivalSample,
    build_sample,
    censoring_km,
    kaplan_meier,
    plateau_estimate,
)
from .variance import sigma2_exact, sigma2_plugin, v_hat, wald_interval

__version__ = "0.1.0"
