from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from elliptic_face.theta import ModelParams

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def params() -> ModelParams:
    return ModelParams()


@pytest.fixture(scope="session")
def params3() -> ModelParams:
    return ModelParams(rank_n=3)


def complex_in_box(re: float = 1.0, im: float = 0.5):
    return st.builds(
        complex,
        st.floats(-re, re, allow_nan=False, allow_infinity=False),
        st.floats(-im, im, allow_nan=False, allow_infinity=False),
    )


def random_points(seed: int, count: int, n: int = 2, scale: float = 0.3) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return (rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))) * scale


def random_spectral(seed: int, count: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.normal(size=count) * 0.3 + 1j * rng.normal(size=count) * 0.2
