"""Error hierarchy shared by all layers."""
from typing import Optional, Sequence


class RvmError(Exception):
    """Base class for every failure raised by the simulator or the analysis pipeline."""


class DomainViolationError(RvmError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ConfigValidationError(RvmError, ValueError):
    """A run configuration value is invalid; carries the offending key path."""

    def __init__(self, key_path: str, message: str):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}")


class CFLViolationError(ConfigValidationError):
    """Time step exceeds the Courant bound dx/sqrt(3)."""


class NeutralityError(RvmError):
    """Initial data are not globally neutral."""

    def __init__(self, net_charge: float, tolerance: float):
        self.net_charge = net_charge
        self.tolerance = tolerance
        super().__init__(f"net charge {net_charge:.6g} exceeds neutrality tolerance {tolerance:.3g}")


class GridShapeError(RvmError, ValueError):
    """Array shapes do not match the expected staggering or lattice."""


class OutOfDomainError(RvmError):
    """A position, momentum or velocity falls outside the grid it is evaluated on."""


class ConeEscapeError(RvmError):
    """A particle left the cone |x| <= zeta*t + L + dx."""

    def __init__(self, time: float, radius: float, bound: float):
        self.time = time
        self.radius = radius
        self.bound = bound
        super().__init__(
            f"cone escape at t={time:.6g}: particle radius {radius:.6g} exceeds bound {bound:.6g}"
        )


class InsufficientDataError(RvmError):
    """Too few snapshots, doublings or time span for the requested estimate."""


class ConvergenceError(RvmError):
    """An iterative solve did not reach its residual target."""

    def __init__(self, message: str, residual_history: Optional[Sequence[float]] = None):
        self.residual_history = list(residual_history or [])
        super().__init__(message)


class QuadratureError(RvmError):
    """Adaptive quadrature did not meet its error target."""

    def __init__(self, message: str, error_estimate: float):
        self.error_estimate = error_estimate
        super().__init__(message)


class ArtifactError(RvmError):
    """A run artifact is missing or corrupt."""
