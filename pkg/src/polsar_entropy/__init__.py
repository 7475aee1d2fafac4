"""Entropy-based statistical analysis of PolSAR covariance data under the
scaled complex Wishart law."""

from .entropy import (
    SHANNON,
    EntropyKind,
    EntropyValue,
    entropy,
    mu_tilde,
    normalized_entropy,
    renyi_entropy,
    shannon_entropy,
    tsallis_entropy,
)
from .errors import *  # noqa: F401,F403
from .inference import (
    FisherBlocks,
    MLFit,
    aic,
    cramer_rao,
    entropy_variance,
    estimate,
    fisher_information,
)
from .simulate import MCConfig, MCReport, mc_power_experiment, mc_size_experiment, sample_wishart
from .stats import (
    ConfidenceInterval,
    EntropyEstimate,
    TestOutcome,
    confidence_interval,
    difference_interval,
    entropy_test,
    estimate_entropy,
    goodness_of_fit,
    pooled_entropy_mean,
)
from .wishart import (
    HermitianMatrix,
    SampleSet,
    WishartParams,
    expected_log_det,
    log_density,
    log_det,
    normalize_covariance,
)

__version__ = "0.1.0"
