import numpy as np
import pytest

from nsgate import klm_design


@pytest.fixture(scope="session")
def klm_optimum():
    """Canonical 3-mode design at the probability optimum, with its scheme."""
    design = klm_design(2**-0.25, 2**-0.25)
    return design, design.scheme()


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
