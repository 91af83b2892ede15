"""Exception types shared across the package."""

from __future__ import annotations


class RobinLabError(Exception):
    """Base class for all package errors."""


class NoConvergence(RobinLabError):
    """An iterative solver failed within its iteration budget."""


class OutsideCollar(RobinLabError):
    """Point is too deep inside the domain for a guaranteed-unique projection."""


class OutsideDomain(RobinLabError):
    """Point lies outside the (open) domain where the operation is defined."""


class PoleOnBoundary(RobinLabError):
    """Green/Robin data requested for a pole on or outside the boundary."""


class NotStronglyPseudoconvex(RobinLabError):
    """Levi form fails to be positive on a complex-tangential direction."""

    def __init__(self, message: str, witness_point=None, witness_vector=None):
        super().__init__(message)
        self.witness_point = witness_point
        self.witness_vector = witness_vector


class IllConditioned(RobinLabError):
    """Collocation system effectively rank-deficient beyond the regularization."""


class ResidualTooLarge(RobinLabError):
    """Certified boundary residual exceeds the requested fit tolerance."""


class BallNotContained(RobinLabError):
    """Mean-value sphere is not contained in the domain."""


class DegenerateGradient(RobinLabError):
    """|d_w f| below threshold where a boundary quantity needs it positive."""


class StencilLeavesDomain(RobinLabError):
    """A finite-difference stencil node falls outside the domain."""


class NoiseDominates(RobinLabError):
    """Estimated finite-difference error exceeds the value it estimates."""


class SingularPotential(RobinLabError):
    """|Lambda| too small to form log(-Lambda) derivatives."""


class ZeroVector(RobinLabError):
    """A direction argument must be nonzero."""


class DegenerateMetric(RobinLabError):
    """Quadratic form is not positive on the requested vector."""


class SingularMetric(RobinLabError):
    """Metric tensor is not invertible at the requested point."""


class LeftDomain(RobinLabError):
    """Trajectory reached the boundary-distance floor."""


class StepTooLarge(RobinLabError):
    """Integrator energy drift exceeded its bound."""


class CollapsedLoop(RobinLabError):
    """Loop shrank below the collapse threshold (contractible input)."""


class HitBoundaryFloor(RobinLabError):
    """Loop point reached the boundary-distance floor during shortening."""


class ConfigInvalid(RobinLabError):
    """Experiment configuration failed validation."""


class CheckFailed(RobinLabError):
    """A selected experiment check failed its tolerance."""


class MissingManifest(RobinLabError):
    """Run directory does not contain a manifest."""
