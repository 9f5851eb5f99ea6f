# Extrapolation, switching and realized inputs
from src.signals.extrapolation import ExtrapolantSegment, Interval, SamplePoint, extrapolate, prolong
from src.signals.realization import InputRealization, integrate_realization, realize

__all__ = [
    "Interval",
    "SamplePoint",
    "ExtrapolantSegment",
    "InputRealization",
    "extrapolate",
    "prolong",
    "realize",
    "integrate_realization",
]
