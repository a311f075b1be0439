import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class SystemParams(BaseModel):
    """Physical constants of the cavity ring (ħ = 1, angular-frequency units)."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    n_cavities: int = Field(2, alias="n_cavities", ge=2)  # Required to be a ring
    fock_cutoff: Optional[int] = Field(None, alias="fock_cutoff", ge=0)  # None: use n_ex
    g: float = Field(1.0, alias="g", ge=0.0)
    chi: float = Field(0.0, alias="chi")
    omega: float = Field(0.0, alias="omega")
    gamma: float = Field(0.0, alias="gamma", ge=0.0)
    phi: float = Field(0.0, alias="phi")

    @field_validator("phi", mode="before")
    @classmethod
    def _phi_is_zero_or_pi(cls, value):
        if isinstance(value, str):
            text = value.strip().lower()
            if text in ("pi", "π"):
                return math.pi
            value = float(text)
        if math.isclose(value, 0.0, abs_tol=1e-12):
            return 0.0
        if math.isclose(abs(value), math.pi, abs_tol=1e-12):
            return math.pi
        raise ValueError(f"phi must be 0 or pi, got {value}.")

    @property
    def phase_sign(self) -> int:
        """e^{iφ}, which is ±1 for the admissible phases."""
        return 1 if self.phi == 0.0 else -1

    def cutoff_for(self, n_ex: int) -> int:
        """Returns the photon cutoff used for a manifold with n_ex excitations."""
        return n_ex if self.fock_cutoff is None else self.fock_cutoff
