"""Gap filling for multi-band raster images.

A two-input residual convolutional network (corrupted image + auxiliary
spectral/temporal image) reconstructs missing regions, alongside mask
simulators, classical baselines, a training loop and a quality-metric
suite. Everything runs on numpy at desk scale.
"""

from .baselines import LinearFit, copy_fill, lf_fit, lf_reconstruct
from .masks import (
    apply_mask,
    combine_masks,
    coverage,
    gen_cloud_mask,
    gen_slcoff_mask,
    gen_stripe_mask,
    shift_image,
)
from .metrics import MetricsReport, cc, evaluate, psnr, sam, ssim
from .network import (
    NetworkConfig,
    NetworkParams,
    TrainingSample,
    backward,
    build_network,
    forward,
    loss_mse,
    reconstruct,
)
from .scenes import SyntheticScene, synth_scene
from .tensor_ops import (
    ConfigError,
    ConvGradients,
    ConvLayerParams,
    NumericError,
    ShapeError,
    Velocity,
    concat_channels,
    conv2d_backward,
    conv2d_forward,
    elementwise,
    receptive_field,
    relu,
    relu_backward,
    sgd_step,
)
from .training import LossTrace, TrainConfig, extract_patches, lr_at, train

__version__ = "0.1.0"
