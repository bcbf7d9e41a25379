"""Interface PINN solvers for elliptic problems with discontinuous coefficients.

The package trains a single multilayer perceptron whose weights and biases are
shared across all subdomains of a decomposed domain, while the activation
function differs per subdomain: either a fixed per-subdomain kind ("ipinn"
mode) or one kind with a trainable per-subdomain slope ("adai" mode).
"""

from ipinn.activations import ActivationKind, act_eval2
from ipinn.network import Architecture, MLPParams, init_xavier
from ipinn.problems import problem_1d, problem_2d_letters, problem_3d_spheres
from ipinn.sampling import SamplingCounts, build_batch
from ipinn.loss import LossWeights, LossBreakdown, evaluate_loss
from ipinn.training import train, evaluate_rmse, cost_ratio

__all__ = [
    "ActivationKind",
    "act_eval2",
    "Architecture",
    "MLPParams",
    "init_xavier",
    "problem_1d",
    "problem_2d_letters",
    "problem_3d_spheres",
    "SamplingCounts",
    "build_batch",
    "LossWeights",
    "LossBreakdown",
    "evaluate_loss",
    "train",
    "evaluate_rmse",
    "cost_ratio",
]

__version__ = "0.1.0"
