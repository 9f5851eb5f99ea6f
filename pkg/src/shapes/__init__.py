# Hat and switch shapes
from src.shapes.kernels import ShapeKind, hat_eval, shape_derivative, switch_eval
from src.shapes.placement import IntervalShape, place_on_interval
from src.shapes.quadrature import quadrature

__all__ = [
    "ShapeKind",
    "IntervalShape",
    "hat_eval",
    "switch_eval",
    "shape_derivative",
    "place_on_interval",
    "quadrature",
]
