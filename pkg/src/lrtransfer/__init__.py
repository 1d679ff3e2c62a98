"""Width-parametrized MLP training and learning-rate transfer checks."""

__version__ = "0.1.0"

from .parametrization import Parametrization, effective_lr, init_std, mup, ntp, preset, sp
from .rng import BACKEND, RngStream, stream_id

__all__ = [
    "BACKEND",
    "Parametrization",
    "RngStream",
    "__version__",
    "effective_lr",
    "init_std",
    "mup",
    "ntp",
    "preset",
    "sp",
    "stream_id",
]
