"""
Dense float64 tensors with reverse-mode automatic differentiation.
"""
from pyafn.autograd.gradcheck import grad_check
from pyafn.autograd.gradcheck import grad_check_tensors
from pyafn.autograd.gradcheck import GradCheck
from pyafn.autograd.ops import add
from pyafn.autograd.ops import add_row
from pyafn.autograd.ops import batchnorm
from pyafn.autograd.ops import elementwise
from pyafn.autograd.ops import exp
from pyafn.autograd.ops import log
from pyafn.autograd.ops import log_softmax
from pyafn.autograd.ops import masked_scale
from pyafn.autograd.ops import matmul
from pyafn.autograd.ops import mean
from pyafn.autograd.ops import mul
from pyafn.autograd.ops import pick
from pyafn.autograd.ops import reduction
from pyafn.autograd.ops import relu
from pyafn.autograd.ops import row_l2_norm
from pyafn.autograd.ops import rows
from pyafn.autograd.ops import scalar_add
from pyafn.autograd.ops import scalar_mul
from pyafn.autograd.ops import sqrt
from pyafn.autograd.ops import square
from pyafn.autograd.ops import sub
from pyafn.autograd.ops import sum
from pyafn.autograd.tools import backward
from pyafn.autograd.tools import inject_fault
from pyafn.autograd.tools import Tape
from pyafn.autograd.tools import Tensor

__all__ = (
    "GradCheck",
    "Tape",
    "Tensor",
    "add",
    "add_row",
    "backward",
    "batchnorm",
    "elementwise",
    "exp",
    "grad_check",
    "grad_check_tensors",
    "inject_fault",
    "log",
    "log_softmax",
    "masked_scale",
    "matmul",
    "mean",
    "mul",
    "pick",
    "reduction",
    "relu",
    "row_l2_norm",
    "rows",
    "scalar_add",
    "scalar_mul",
    "sqrt",
    "square",
    "sub",
    "sum",
)
