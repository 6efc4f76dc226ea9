"""Model switches shared by the physics modules."""
from enum import Enum


class VelocityModel(str, Enum):
    """Velocity map used by every kinematics call."""
    RELATIVISTIC = "relativistic"
    CLASSICAL = "classical"

    @classmethod
    def from_str(cls, value: str) -> "VelocityModel":
        """
        Creates a VelocityModel from a string value.

        Args:
            value: Model name (case insensitive)

        Returns:
            VelocityModel enum value (defaults to RELATIVISTIC if empty)

        Raises:
            ValueError: If the name is not a known model
        """
        if not value:
            return cls.RELATIVISTIC
        return cls(value.strip().lower())


class PoissonSymbol(str, Enum):
    """Fourier symbol used by the initial Poisson solve."""
    DISCRETE = "discrete"  # 7-point symbol, div E0 = rho0 to round-off
    CONTINUOUS = "continuous"  # |k|^2, O(dx^2) residual

    @classmethod
    def from_str(cls, value: str) -> "PoissonSymbol":
        """Creates a PoissonSymbol from a string value (defaults to DISCRETE if empty)."""
        if not value:
            return cls.DISCRETE
        return cls(value.strip().lower())


class MirrorMode(str, Enum):
    """How a mirrored species copies the phase-space points of its source species."""
    COPY = "copy"  # same (x, p)
    REFLECT = "reflect"  # (-x, -p)

    @classmethod
    def from_str(cls, value: str) -> "MirrorMode":
        """Creates a MirrorMode from a string value (defaults to COPY if empty)."""
        if not value:
            return cls.COPY
        return cls(value.strip().lower())


class OperatorVariant(str, Enum):
    """Which terms of the self-similar elliptic operator are kept."""
    FULL = "full"
    NO_ZERO_ORDER = "no_zero_order"
    PRINCIPAL = "principal"

    @classmethod
    def from_str(cls, value: str) -> "OperatorVariant":
        """Creates an OperatorVariant from a string value (defaults to FULL if empty)."""
        if not value:
            return cls.FULL
        return cls(value.strip().lower())

    @property
    def first_order(self) -> bool:
        return self is not OperatorVariant.PRINCIPAL

    @property
    def zero_order(self) -> bool:
        return self is OperatorVariant.FULL


class GridKind(str, Enum):
    """Whether a lattice lives in momentum space or velocity space."""
    MOMENTUM = "momentum"
    VELOCITY = "velocity"


class SolverMethod(str, Enum):
    """Linear solver used for the limit-field Dirichlet problems."""
    AUTO = "auto"
    DIRECT = "direct"
    BICGSTAB = "bicgstab"
    GMRES = "gmres"

    @classmethod
    def from_str(cls, value: str) -> "SolverMethod":
        """Creates a SolverMethod from a string value (defaults to AUTO if empty)."""
        if not value:
            return cls.AUTO
        return cls(value.strip().lower())
