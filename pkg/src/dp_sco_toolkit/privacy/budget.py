"""Privacy budgets and noise specifications."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class PrivacyBudget(BaseModel):
    """(ε, δ) pair; pure DP when δ = 0."""

    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(gt=0, description="Privacy loss ε")
    delta: float = Field(default=0.0, ge=0, lt=1, description="Failure probability δ")

    @property
    def pure(self) -> bool:
        return self.delta == 0.0


class NoiseSpec(BaseModel):
    """Noise mechanism with its scale and seed.

    A zero scale is only accepted together with ``non_private=True`` so that
    exact (test-mode) runs are always labeled.
    """

    model_config = ConfigDict(frozen=True)

    mechanism: Literal["gaussian", "laplace"] = Field(description="Noise distribution")
    scale: float = Field(ge=0, description="Gaussian σ or Laplace scale")
    rng_seed: int = Field(ge=0, lt=2**64, description="Seed of the noise stream")
    non_private: bool = Field(default=False, description="Exact mode with all noise disabled")

    @model_validator(mode="after")
    def check_non_private_flag(self) -> "NoiseSpec":
        if self.scale == 0.0 and not self.non_private:
            raise ValueError("zero noise scale requires non_private=True")
        if self.non_private and self.scale != 0.0:
            raise ValueError("non_private mode requires a zero noise scale")
        return self
