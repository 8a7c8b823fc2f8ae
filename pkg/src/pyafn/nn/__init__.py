"""
Layers and model assembly for the backbone G and the classifier F = F_y ∘ F_f.
"""
from pyafn.nn.layers import batchnorm
from pyafn.nn.layers import dropout
from pyafn.nn.layers import forward
from pyafn.nn.layers import init_params
from pyafn.nn.layers import linear
from pyafn.nn.tools import Architecture
from pyafn.nn.tools import BatchNormState
from pyafn.nn.tools import DropoutSpec
from pyafn.nn.tools import DropoutVariant
from pyafn.nn.tools import FBlock
from pyafn.nn.tools import Linear
from pyafn.nn.tools import Mode
from pyafn.nn.tools import ModelParams

__all__ = (
    "Architecture",
    "BatchNormState",
    "DropoutSpec",
    "DropoutVariant",
    "FBlock",
    "Linear",
    "Mode",
    "ModelParams",
    "batchnorm",
    "dropout",
    "forward",
    "init_params",
    "linear",
)
