"""Deterministic differentiable numeric core: tensors, graphs, gradients."""
from .engine import backward, evaluate, finite_diff_check
from .graph import ExprGraph, Node
from .ops import OPS
from .tensor import HLXT_MAGIC, HLXT_VERSION, Tensor, as_array

GradientMap = dict  # parameter name -> Tensor, same shape as the parameter

__all__ = [
    "ExprGraph",
    "GradientMap",
    "HLXT_MAGIC",
    "HLXT_VERSION",
    "Node",
    "OPS",
    "Tensor",
    "as_array",
    "backward",
    "evaluate",
    "finite_diff_check",
]
