"""Differentiable generalized sliced Wasserstein plans.

Lifted one-dimensional transport plans, optimized over the slice parameters
with zeroth-order (Stein) gradients of a Gaussian-smoothed objective.
"""

__version__ = "0.1.0"

from .measures import DiscreteMeasure, RngStream, make_uniform
from .ot1d import Coupling, solve_1d_general, solve_1d_uniform
from .exact import wasserstein_exact
from .projectors import Projector, horospherical, linear, mlp, mlp_init_he
from .gswp import GswpResult, gswp_eval, h_value, min_swgg_random_search
from .stein import SteinConfig, estimate_gradient, smoothed_plan
from .optimize import OptimizerConfig, StepSize, minimize_gswp
from .flows import FlowConfig, run_flow
from .coupling_sampler import CouplingSampler, sample_pairs

__all__ = [
    "__version__", "DiscreteMeasure", "RngStream", "make_uniform", "Coupling",
    "solve_1d_general", "solve_1d_uniform", "wasserstein_exact", "Projector", "horospherical",
    "linear", "mlp", "mlp_init_he", "GswpResult", "gswp_eval", "h_value",
    "min_swgg_random_search", "SteinConfig", "estimate_gradient", "smoothed_plan",
    "OptimizerConfig", "StepSize", "minimize_gswp", "FlowConfig", "run_flow",
    "CouplingSampler", "sample_pairs",
]
