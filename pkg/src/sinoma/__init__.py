"""Slope, intercept and noise-variance estimation for noisy serial data streams.

Both the predictor and the predictand of a linear relationship are assumed to
carry additive white measurement noise of unknown variances. Ordinary least
squares then attenuates the slope and inverse least squares inflates it; the
consistent errors-in-variables fit needs the unknown noise-variance ratio.
This package recovers that ratio from the serial structure of the two
streams: it segments them into noise-driven elementary fluctuations, compares
local bandwidth overlaps through explanatory-power indices, and superimposes
artificial white noise until the pair reaches the variance-matching state, at
which point the slope, the noise ratio and the individual noise variances all
become identifiable.
"""

from .errors import *  # noqa: F401,F403
from .errors import __all__ as _errors_all
from .fluctuations import (
    EPRecord,
    EPSummary,
    Fluctuation,
    FluctuationPartition,
    JointPartition,
    explanatory_powers,
    joint_partition,
    overlap,
    segment,
    whole_series_partition,
)
from .noise_matching import (
    QEPDiagnostic,
    ReplicateSummary,
    SinomaConfig,
    SinomaResult,
    TraceEntry,
    add_artificial_noise,
    lambda_from_q,
    noiseless_sds,
    q_ep,
    recover_noise,
    run_replicates,
    run_sinoma,
    slope_from_delta,
    slope_from_q,
    whiteness_hazard,
)
from .regression import (
    SlopeEstimate,
    fit_evm,
    fit_inv,
    fit_ols,
    fit_rma,
    lambda_from_slope,
    predict,
    rescale_if_steep,
    sign_normalize,
    variance_ratio,
)
from .series import MomentSummary, PairedSeries, Series, normalize_to_unit_sd, summarize
from .synth import (
    DatasetRecipe,
    NoiseSpec,
    contaminate,
    gen_sine,
    gen_surrogate_climate,
    pseudo_proxy_suite,
)

__version__ = "0.1.0"

__all__ = [
    "Series",
    "MomentSummary",
    "PairedSeries",
    "summarize",
    "normalize_to_unit_sd",
    "SlopeEstimate",
    "fit_ols",
    "fit_inv",
    "fit_rma",
    "fit_evm",
    "lambda_from_slope",
    "predict",
    "variance_ratio",
    "sign_normalize",
    "rescale_if_steep",
    "Fluctuation",
    "FluctuationPartition",
    "JointPartition",
    "EPRecord",
    "EPSummary",
    "segment",
    "whole_series_partition",
    "joint_partition",
    "overlap",
    "explanatory_powers",
    "QEPDiagnostic",
    "SinomaConfig",
    "SinomaResult",
    "TraceEntry",
    "ReplicateSummary",
    "q_ep",
    "slope_from_q",
    "slope_from_delta",
    "lambda_from_q",
    "add_artificial_noise",
    "recover_noise",
    "noiseless_sds",
    "whiteness_hazard",
    "run_sinoma",
    "run_replicates",
    "NoiseSpec",
    "DatasetRecipe",
    "gen_sine",
    "contaminate",
    "gen_surrogate_climate",
    "pseudo_proxy_suite",
    *_errors_all,
]
