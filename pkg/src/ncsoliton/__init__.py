"""Sigma-model solitons on noncommutative tori from Gabor frame windows."""

__version__ = "0.1.0"

from .algebra import AlgebraElement, LatticeSpec, Side, trace, twisted_mul  # noqa: E402
from .module import QuadratureSpec, act_A, act_B, inner_A, inner_B, nabla, stft  # noqa: E402
from .solitons import (  # noqa: E402
    FrameReport,
    GaugeReport,
    SolitonReport,
    charge,
    classify_gauge_to_gaussian,
    compute_b,
    energy,
    frame_bounds,
    gauge_report,
    gauge_transform,
    normalize,
    rieffel_projection,
    soliton_report,
    tau,
)
from .windows import gaussian, hyperbolic_secant, totally_positive  # noqa: E402

__all__ = [
    "AlgebraElement", "LatticeSpec", "Side", "trace", "twisted_mul",
    "QuadratureSpec", "act_A", "act_B", "inner_A", "inner_B", "nabla", "stft",
    "FrameReport", "GaugeReport", "SolitonReport", "charge", "classify_gauge_to_gaussian", "gauge_report",
    "compute_b", "energy", "frame_bounds", "gauge_transform", "normalize",
    "rieffel_projection", "soliton_report", "tau",
    "gaussian", "hyperbolic_secant", "totally_positive",
]
