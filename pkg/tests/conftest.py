import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from debranges import build_s, build_space, make_measure


@pytest.fixture(scope="session")
def lattice_256():
    return make_measure("integer_lattice", 256)


@pytest.fixture(scope="session")
def s_256(lattice_256):
    return build_s(lattice_256)


@pytest.fixture(scope="session")
def space_256(lattice_256, s_256):
    return build_space(lattice_256, s=s_256)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def strip_points(rng, count, re_max=3.0, im_lo=0.4, im_hi=2.5):
    """Sample z in the well-conditioned strip: off the real axis, small modulus."""
    re = rng.uniform(-re_max, re_max, count)
    im = rng.uniform(im_lo, im_hi, count) * rng.choice([-1.0, 1.0], count)
    return re + 1j * im
