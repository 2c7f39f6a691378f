"""signalnorm: estimation of the signal norm and signal detection in sparse
linear regression when the noise level is unknown.

The library provides:

- synthetic data generation under Y = X theta + sigma xi with standardized
  entry laws and reproducible seeding (:mod:`signalnorm.model`);
- unbiased split-sample estimators of the squared signal norm, dense and
  threshold-selected sparse variants (:mod:`signalnorm.quadratic`);
- a least squares pipeline for n > p designs and a square-root sorted-L1
  pipeline for p >~ n designs, each with a plug-in noise estimate and a
  calibrated detection test (:mod:`signalnorm.lowdim`,
  :mod:`signalnorm.slope`, :mod:`signalnorm.highdim`);
- closed-form lower-bound quantities describing when detection and
  estimation are impossible (:mod:`signalnorm.lower_bounds`);
- a seeded Monte Carlo harness with CSV/JSON reporting and log-log rate
  fitting (:mod:`signalnorm.harness`).
"""

from .calibration import calibrate_beta
from .harness import (
    ExperimentConfig,
    RateFit,
    TrialRecord,
    fit_rate,
    report,
    run_trials,
    summarize,
    theoretical_rate,
)
from .highdim import HighDimFitBundle, detect_highdim, estimate_highdim
from .lowdim import (
    OlsFit,
    SingularDesignError,
    TuningParams,
    detect_lowdim,
    detection_threshold,
    estimate_lowdim,
    ols_fit,
)
from .lower_bounds import (
    PriorSpec,
    RadiusBundle,
    bayes_testing_risk_bound,
    chi2_cross,
    hypergeometric_mgf_bound,
    minimax_testing_lower_radius,
    q_lower_bound,
    sample_prior_theta,
    tau_from_rho,
)
from .model import (
    Dimensions,
    ModelSpec,
    RegressionSample,
    SampleSplit,
    read_sample,
    sample_design,
    sample_sparse_theta,
    split_sample,
    synthesize,
    write_sample,
)
from .quadratic import (
    ComponentEstimates,
    FunctionalEstimate,
    component_estimates,
    debias,
    norm_from_q,
    q_dense,
    q_sparse,
    sparse_threshold,
)
from .slope import (
    SlopeFit,
    SlopeWeights,
    prox_sorted_l1,
    sigma_srs,
    slope_weights,
    sorted_l1_norm,
    sqrt_slope_fit,
)

__version__ = "0.1.0"

__all__ = [
    "Dimensions", "ModelSpec", "RegressionSample", "SampleSplit",
    "sample_design", "synthesize", "sample_sparse_theta", "split_sample",
    "write_sample", "read_sample",
    "ComponentEstimates", "FunctionalEstimate", "component_estimates",
    "debias", "q_dense", "q_sparse", "norm_from_q", "sparse_threshold",
    "OlsFit", "TuningParams", "SingularDesignError", "ols_fit",
    "estimate_lowdim", "detect_lowdim", "detection_threshold",
    "SlopeWeights", "SlopeFit", "slope_weights", "sorted_l1_norm",
    "prox_sorted_l1", "sqrt_slope_fit", "sigma_srs",
    "HighDimFitBundle", "estimate_highdim", "detect_highdim",
    "PriorSpec", "RadiusBundle", "tau_from_rho", "sample_prior_theta",
    "chi2_cross", "hypergeometric_mgf_bound", "bayes_testing_risk_bound",
    "minimax_testing_lower_radius", "q_lower_bound",
    "ExperimentConfig", "TrialRecord", "RateFit", "run_trials", "fit_rate",
    "theoretical_rate", "summarize", "report", "calibrate_beta",
]
