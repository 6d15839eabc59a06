"""Epsilon-covers of metric spaces: deck groups at a scale and their towers."""

from ._kernels import BACKEND
from .metric import FiniteMetricSpace, euclidean_space, load_space, matrix_space, scale_graph
from .presentation import presentation
from .tower import analyze_scale, run_tower, theta

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "FiniteMetricSpace",
    "__version__",
    "analyze_scale",
    "euclidean_space",
    "load_space",
    "matrix_space",
    "presentation",
    "run_tower",
    "scale_graph",
    "theta",
]
