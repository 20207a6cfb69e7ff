import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile(
    "lab", deadline=None, derandomize=True, max_examples=60
)
hypothesis.settings.load_profile("lab")


@pytest.fixture
def rng():
    return np.random.default_rng(987654321)
