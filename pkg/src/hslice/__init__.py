"""Hypercube edge slicing: exact verification, matrix decomposition,
randomized witness search and anticoncentration checks."""

from .cube import EdgeId, Hyperplane, levels_cover, slices_edge, verify_cover, wiggle
from .decompose import DecompConstants, verify_decomposition
from .scales import ScaleCertificate, greedy_scales, verify_certificate
from .stats import EstimateReport, Verdict
from .witness import SamplerParams, WitnessConfig, end_to_end_witness

__all__ = [
    "EdgeId", "Hyperplane", "levels_cover", "slices_edge", "verify_cover", "wiggle",
    "DecompConstants", "verify_decomposition",
    "ScaleCertificate", "greedy_scales", "verify_certificate",
    "EstimateReport", "Verdict",
    "SamplerParams", "WitnessConfig", "end_to_end_witness",
]
__version__ = "0.1.0"
