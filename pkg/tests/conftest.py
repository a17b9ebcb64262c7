import os

import numpy as np
import pytest

from rieff import CoreyModel


@pytest.fixture
def unit_model():
    return CoreyModel(1.0, 1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(int(os.environ.get("RIEFF_SEED", "0")))


def bl_flux(s, a=1.0, c=1.0):
    """Scalar fractional flow on the u2 = 0 edge."""
    return a * s * s / (a * s * s + c * (1 - s) ** 2)


def bl_dflux(s, a=1.0, c=1.0):
    q = a * s * s + c * (1 - s) ** 2
    return 2 * a * c * s * (1 - s) / (q * q)


def separatrix_flux(ell, A=1.0, B=1.0, C=1.0):
    """f3 restricted to the invariant line u1/u2 = B/A, in the coordinate l = u3."""
    D = A + B
    return C * ell ** 2 / (A * B * (1 - ell) ** 2 / D + C * ell ** 2)
