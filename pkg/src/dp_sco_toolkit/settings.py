"""Environment-driven settings for the toolkit."""

from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class ToolkitSettings(BaseSettings):
    """Process-wide defaults, read from ``DPSCO_*`` environment variables."""

    model_config = SettingsConfigDict(env_prefix="DPSCO_", env_file=".env", extra="ignore")

    environment: str = Field(default="development", description="Deployment environment name")
    log_level: str = Field(default="INFO", description="Root logging level")
    output_dir: Path = Field(default=Path("results"), description="Default directory for result files")
    jobs: int = Field(default=1, ge=1, description="Default worker count for benchmark runs")
    sigma_constant: float = Field(
        default=100.0, gt=0, description="Analysis constant in the noisy mirror descent sigma"
    )
    population_samples: int = Field(
        default=100_000, ge=1, description="Fresh samples for population loss estimates"
    )
    baseline_max_iterations: int = Field(
        default=20_000, ge=1, description="Iteration cap of the non-private baseline solver"
    )
    baseline_tolerance: float = Field(
        default=1e-7, gt=0, description="Objective-stall tolerance of the baseline solver"
    )


@lru_cache(maxsize=1)
def get_settings() -> ToolkitSettings:
    """Return the cached settings instance."""
    return ToolkitSettings()
