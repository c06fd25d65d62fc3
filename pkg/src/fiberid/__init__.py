"""Optical identification of fiber pigtails by coherent OFDR: simulation and decision analysis."""

__version__ = "0.1.0"

from .identify import (
    DecisionModel,
    Registry,
    binomial_tail_log,
    calibrate_threshold,
    hamming,
    p_flip_from_snr,
    wwi_vs_snr,
)
from .physics import (
    FiberPigtail,
    LinkBudget,
    SweepConfig,
    Trace,
    generate_pigtail,
    snr_estimate,
    synthesize_trace,
)
from .sigproc import Signature, measure_signature
