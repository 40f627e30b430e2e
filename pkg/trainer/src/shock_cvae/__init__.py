"""shock-cvae: toy conditional VAE for inverse shock synthesis.

Consumes datasets in the shock-dataset container format, trains a
convolutional CVAE conditioned on the spectrum encoding, and emits
candidate signals scored by the generator toolkit's evaluation CLI.
"""

from .dataset import DatasetFormatError, GridSpec, ShockDataset, encode_condition, write_dataset
from .generate import Sampler, generate, generate_candidates_dataset
from .losses import (
    LossWeights,
    PsdConfig,
    SdofBank,
    ShapeConfig,
    composite_loss,
    kl_divergence,
    loss_psd,
    loss_shape_from_responses,
    loss_srs_from_spectra,
    loss_ts,
    welch_psd,
)
from .model import ARCHITECTURE, ConditionalVae, CvaeConfig
from .train import NonFiniteLossError, load_checkpoint, save_checkpoint, train

__version__ = "0.1.0"
