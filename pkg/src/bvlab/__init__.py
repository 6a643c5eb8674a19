"""Bias/variance laboratory for 0/1-loss classifiers.

James' systematic/variance effects, the boundary-distribution model of
added error, the closed forms linking the two, mean-combiner ensembles and
a small seeded MLP for generating classifier populations.
"""
from .added_error import added_error_report, r_add_class_terms, r_add_integral, r_add_moments
from .bridge import BridgeReport, checksum, se_closed, se_numeric, ve_closed, ve_numeric
from .ensemble import EnsembleNoiseProfile, estimate_C, r_add_ave_full, r_add_ave_simplified
from .geometry import (
    DiscreteBoundary,
    GaussianBoundary,
    NoiseModel,
    PosteriorScenario,
    Profile,
    UniformBoundary,
    boundary_from_noise,
    boundary_moments,
    sample_boundary,
)
from .james import LabelDistribution, james_decompose
from .learners import MLP, Dataset, MLPConfig, train_mlp

__version__ = "0.1.0"

__all__ = [
    "BridgeReport",
    "Dataset",
    "DiscreteBoundary",
    "EnsembleNoiseProfile",
    "GaussianBoundary",
    "LabelDistribution",
    "MLP",
    "MLPConfig",
    "NoiseModel",
    "PosteriorScenario",
    "Profile",
    "UniformBoundary",
    "added_error_report",
    "boundary_from_noise",
    "boundary_moments",
    "checksum",
    "estimate_C",
    "james_decompose",
    "r_add_ave_full",
    "r_add_ave_simplified",
    "r_add_class_terms",
    "r_add_integral",
    "r_add_moments",
    "sample_boundary",
    "se_closed",
    "se_numeric",
    "train_mlp",
    "ve_closed",
    "ve_numeric",
]
