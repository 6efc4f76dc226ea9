"""Species and support-parameter models."""
from pydantic import BaseModel, ConfigDict, Field, model_validator

from domain.constants.model import VelocityModel


class SpeciesSpec(BaseModel):
    """Mass, charge and support radii of one particle species (units with c = 1)."""
    model_config = ConfigDict(frozen=True)

    name: str = Field(default="species", description="Species label used in reports")
    mass: float = Field(default=1.0, gt=0, description="Rest mass m")
    charge: float = Field(default=1.0, description="Charge e")
    model: VelocityModel = Field(default=VelocityModel.RELATIVISTIC, description="Velocity map")
    support_x: float = Field(default=1.0, gt=0, description="Spatial support radius L_x")
    support_p: float = Field(default=0.5, gt=0, description="Momentum support radius L_p")

    @model_validator(mode="after")
    def check_classical_support(self) -> "SpeciesSpec":
        """Classical velocities must stay below 1, so the momentum support must too."""
        if self.model is VelocityModel.CLASSICAL and self.support_p >= 1.0:
            raise ValueError(f"classical model requires support_p < 1, got {self.support_p}")
        return self

    @property
    def is_classical(self) -> bool:
        return self.model is VelocityModel.CLASSICAL


class SupportParams(BaseModel):
    """Momentum bound beta with the derived velocity radius zeta and elliptic radius gamma."""
    model_config = ConfigDict(frozen=True)

    beta: float = Field(..., ge=0)
    zeta: float = Field(..., ge=0)
    gamma: float = Field(..., ge=0.5, le=1.0)

    @property
    def ordered(self) -> bool:
        """True when the particle velocities stay strictly inside the elliptic ball."""
        return self.zeta < self.gamma

    @property
    def ellipticity_margin(self) -> float:
        return 1.0 - self.gamma ** 2
