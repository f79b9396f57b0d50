"""Shared pytest fixtures and configuration for all tests."""

import os
from collections.abc import Iterator
from pathlib import Path
from typing import Any

import numpy as np
import pytest

os.environ.setdefault("DPSCO_ENVIRONMENT", "test")
os.environ.setdefault("DPSCO_POPULATION_SAMPLES", "2000")

from dp_sco_toolkit.dependencies import reset_dependencies  # noqa: E402
from dp_sco_toolkit.geometry import L1Ball, LpGeometry  # noqa: E402
from dp_sco_toolkit.losses import (  # noqa: E402
    Dataset,
    gen_linear_instance,
    gen_quadratic_instance,
)


@pytest.fixture
def rng() -> np.random.Generator:
    """Fixture providing a seeded generator for test inputs."""
    return np.random.default_rng(20240611)


@pytest.fixture
def quadratic_dataset() -> Dataset:
    """Fixture providing a small quadratic-family sample (n=64, d=4)."""
    return gen_quadratic_instance(n=64, d=4, C=1.0, D=1.0, seed=7)


@pytest.fixture
def linear_dataset() -> Dataset:
    """Fixture providing a small linear-family sample (n=50, d=5)."""
    return gen_linear_instance(n=50, d=5, bound=1.0, seed=11)


@pytest.fixture
def l1_ball() -> L1Ball:
    """Fixture providing the unit ℓ1 ball in dimension 4."""
    return L1Ball(d=4, radius=1.0)


@pytest.fixture
def l1_geometry() -> LpGeometry:
    """Fixture providing the ℓ1 stand-in geometry in dimension 4."""
    return LpGeometry.for_l1(4)


@pytest.fixture
def experiment_payload() -> dict[str, Any]:
    """Fixture providing a minimal valid experiment config as a dict."""
    return {
        "schema_version": 1,
        "algorithm": "noisy-md",
        "instance": {"family": "linear", "bound": 1.0},
        "geometry": {"norm": "l1", "D": 1.0},
        "budget": {"epsilons": [1.0], "delta": 1e-6},
        "n_values": [64],
        "d_values": [4],
        "seeds": [0, 1],
        "options": {"iterations": 50, "batch_size": 8},
        "population_samples": 500,
    }


@pytest.fixture
def results_path(tmp_path: Path) -> Path:
    """Fixture providing a result file location inside a temp directory."""
    return tmp_path / "results" / "run.ndjson"


@pytest.fixture(autouse=True)
def _fresh_dependencies() -> Iterator[None]:
    """Drop cached settings and services around every test."""
    reset_dependencies()
    yield
    reset_dependencies()
