"""Numerical laboratory for the Robin function and the induced Kahler metric.

Computes Green functions G(z, p) and Robin constants on smoothly bounded
domains in C^n (exact engines for balls and half-spaces, a method-of-
fundamental-solutions collocation engine for general domains), assembles the
metric with potential log(-Lambda) together with its curvature tensor, and
drives boundary-approach experiments that measure the quantitative limits of
the metric near strongly pseudoconvex boundaries.
"""

from robinlab.domains import (
    Ball,
    BoundaryFrame,
    Ellipsoid,
    HalfSpaceDomain,
    PerturbedBall,
    TransformedDomain,
    domain_from_config,
    levi_form,
    nearest_boundary_point,
    split_normal_tangential,
    strong_psc_check,
)
from robinlab.engines import (
    BallEngine,
    CollocationEngine,
    HalfSpaceEngine,
    ball_green,
    ball_robin,
    collocation_fit,
    half_space_robin,
    make_engine,
)
from robinlab.jets import PotentialJet, wirtinger_fd_jet
from robinlab.metric import MetricTensor, eta_form, metric_from_jet, psh_check, sectional_curvature
from robinlab.scaled import ScaledDomain, mean_value_check, variation_first, variation_second

__all__ = [
    "Ball",
    "BallEngine",
    "BoundaryFrame",
    "CollocationEngine",
    "Ellipsoid",
    "HalfSpaceDomain",
    "HalfSpaceEngine",
    "MetricTensor",
    "PerturbedBall",
    "PotentialJet",
    "ScaledDomain",
    "TransformedDomain",
    "ball_green",
    "ball_robin",
    "collocation_fit",
    "domain_from_config",
    "eta_form",
    "half_space_robin",
    "levi_form",
    "make_engine",
    "mean_value_check",
    "metric_from_jet",
    "nearest_boundary_point",
    "psh_check",
    "sectional_curvature",
    "split_normal_tangential",
    "strong_psc_check",
    "variation_first",
    "variation_second",
    "wirtinger_fd_jet",
]

__version__ = "0.1.0"
