from . import kernels
from .functional import (
    ClampCounter,
    ConvSpec,
    conv2d_backward,
    conv2d_forward,
    cross_entropy_loss,
    dense_backward,
    dense_forward,
    dropout,
    dropout_backward,
    gaussian_noise,
    lrelu,
    lrelu_backward,
    softmax,
    softmax_cross_entropy_backward,
)
from .gradcheck import GradCheckResult, compare_gradients, finite_difference_check
from .init import glorot_limit, glorot_uniform_init
from .layers import Conv2D, Dense, Dropout, Flatten, GaussianNoise, TemporalFire
from .network import Network
from .optim import Parameter, adam_step
from .tensor_io import dump_tensor, load_tensor, read_tensor, save_tensor
