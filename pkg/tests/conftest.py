from fractions import Fraction

import pytest

from fuzzy_drive.fuzzy_core import FuzzyPdConfig


def exact_inference(e, r, L):
    """Inference chain in exact rational arithmetic.

    Shares no code with the package: clamped ramps, min t-norm, centre of
    mass over singletons at -L, 0, +L.
    """
    e, r, L = Fraction(e), Fraction(r), Fraction(L)

    def ramp(x):
        return min(Fraction(1), max(Fraction(0), x / (2 * L)))

    ep, en = ramp(L + e), ramp(L - e)
    rp, rn = ramp(L + r), ramp(L - r)
    w_pos, w_neg = min(ep, rp), min(en, rn)
    w_zero = min(ep, rn) + min(en, rp)
    return L * (w_pos - w_neg) / (w_pos + w_zero + w_neg)


@pytest.fixture
def orientation_gains():
    return FuzzyPdConfig(Ge=20.0, Gr=2.0, Gu=0.5, L=360.0)


@pytest.fixture
def tracking_gains():
    return FuzzyPdConfig(Ge=4.7, Gr=0.025, Gu=1.01, L=360.0)
