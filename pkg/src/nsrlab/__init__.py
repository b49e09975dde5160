"""Differentiable comparison layers with extrapolation experiments."""

from .nsr import (
    NSRParams,
    NSRTrace,
    hand_weights,
    init_params,
    nsr_forward,
    nsr_forward_batch,
    nsr_predict,
    sign_bit_hat,
    zero_bit_hat,
)
from .optim import Parameter, adam_step, finite_diff_check, load_params, save_params
from .rng import RngStream
from .tape import ShapeError, Tape, backward
from .tasks import ComparisonOp, WeightedGraph, bellman_ford, dijkstra, random_graph
from .training import TrainConfig, eval_classification, eval_regression, train

__version__ = "0.1.0"

__all__ = [
    "ComparisonOp",
    "NSRParams",
    "NSRTrace",
    "Parameter",
    "RngStream",
    "ShapeError",
    "Tape",
    "TrainConfig",
    "WeightedGraph",
    "adam_step",
    "backward",
    "bellman_ford",
    "dijkstra",
    "eval_classification",
    "eval_regression",
    "finite_diff_check",
    "hand_weights",
    "init_params",
    "load_params",
    "nsr_forward",
    "nsr_forward_batch",
    "nsr_predict",
    "random_graph",
    "save_params",
    "sign_bit_hat",
    "train",
    "zero_bit_hat",
]
