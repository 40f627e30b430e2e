"""srskit: shock response spectrum toolkit.

Forward SRS operator (recursive filter bank plus analytical oracle),
synthetic shock generation, sum-of-decayed-sinusoids inverse fitting,
training-loss reference implementations, evaluation metrics, and a
binary dataset format shared with downstream trainers.
"""

from ._kernels import NUMBA_ENABLED, active_backend
from .dataset import (
    DatasetFormatError,
    DatasetManifest,
    EncodedCondition,
    ShockDataset,
    denormalize_signal,
    encode_condition,
    export_spectra_csv,
    normalize_pair,
    read_dataset,
    write_dataset,
)
from .losses import (
    LatentStats,
    LossParts,
    LossWeights,
    PsdConfig,
    ShapeConfig,
    evaluate_losses,
    kl_divergence,
    loss_psd,
    loss_shape,
    loss_srs,
    loss_total,
    loss_ts,
)
from .metrics import (
    EvalReport,
    SpectrumEnsemble,
    aggregate_mean,
    aggregate_upper_tol,
    db_error,
    evaluate_holdout,
    rmsle,
    win_rate,
)
from .sds import (
    BudgetExhaustedError,
    FitConfig,
    FitResult,
    GaConfig,
    SdsModel,
    fit_sds,
    render_sds,
    rmsle_loss,
)
from .srs import (
    DEFAULT_PAD_SCALE,
    log_frequency_grid,
    padding_length,
    sampling_error_bound,
    sdof_responses,
    srs_analytical,
    srs_filterbank,
)
from .synth import (
    BASIS_KINDS,
    BasisAtom,
    GenParams,
    draw_noise_variance,
    generate_dataset,
    generate_shock,
    render_atom,
)
from .types import FrequencyGrid, SdofResponse, Signal, Spectrum

__version__ = "0.1.0"

__all__ = [
    "BASIS_KINDS",
    "BasisAtom",
    "BudgetExhaustedError",
    "DEFAULT_PAD_SCALE",
    "DatasetFormatError",
    "DatasetManifest",
    "EncodedCondition",
    "EvalReport",
    "FitConfig",
    "FitResult",
    "FrequencyGrid",
    "GaConfig",
    "GenParams",
    "LatentStats",
    "LossParts",
    "LossWeights",
    "NUMBA_ENABLED",
    "PsdConfig",
    "SdofResponse",
    "SdsModel",
    "ShapeConfig",
    "ShockDataset",
    "Signal",
    "Spectrum",
    "SpectrumEnsemble",
    "active_backend",
    "aggregate_mean",
    "aggregate_upper_tol",
    "db_error",
    "denormalize_signal",
    "draw_noise_variance",
    "encode_condition",
    "evaluate_holdout",
    "evaluate_losses",
    "export_spectra_csv",
    "fit_sds",
    "generate_dataset",
    "generate_shock",
    "kl_divergence",
    "log_frequency_grid",
    "loss_psd",
    "loss_shape",
    "loss_srs",
    "loss_total",
    "loss_ts",
    "normalize_pair",
    "padding_length",
    "read_dataset",
    "render_atom",
    "render_sds",
    "rmsle",
    "rmsle_loss",
    "sampling_error_bound",
    "sdof_responses",
    "srs_analytical",
    "srs_filterbank",
    "win_rate",
    "write_dataset",
]
