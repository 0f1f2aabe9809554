from . import autodiff
from .autodiff import GradientError, ShapeError, Var
from .net import Mlp, ParamSet, glorot_init, gradients
from .optim import Adam
from .serialize import ParamFileError, load_arrays, load_params, save_arrays, save_params

__all__ = [
    "autodiff",
    "Var",
    "GradientError",
    "ShapeError",
    "Mlp",
    "ParamSet",
    "glorot_init",
    "gradients",
    "Adam",
    "ParamFileError",
    "save_arrays",
    "load_arrays",
    "save_params",
    "load_params",
]
