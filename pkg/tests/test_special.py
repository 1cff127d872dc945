import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import betainc

from superpareto._special import betainc_reg


@pytest.mark.parametrize("a,b,x", [(0.5, 0.5, 0.3), (2.2, 1.2, 0.9), (30.0, 0.1, 0.999), (0.05, 8.0, 1e-6)])
def test_matches_scipy(a, b, x):
    assert betainc_reg(a, b, x) == pytest.approx(betainc(a, b, x), abs=1e-12)


def test_endpoints():
    assert betainc_reg(1.3, 2.7, 0.0) == 0.0
    assert betainc_reg(1.3, 2.7, 1.0) == 1.0


def test_closed_forms():
    # I_x(1, b) = 1 - (1-x)^b and I_x(a, 1) = x^a
    assert betainc_reg(1.0, 3.0, 0.2) == pytest.approx(1 - 0.8**3, abs=1e-14)
    assert betainc_reg(2.5, 1.0, 0.3) == pytest.approx(0.3**2.5, abs=1e-14)


def test_complement_argument_is_consistent():
    for x in (0.2, 0.7, 0.95):
        assert betainc_reg(2.0, 3.0, x, xc=1.0 - x) == pytest.approx(betainc_reg(2.0, 3.0, x), abs=1e-15)


def test_vector_shape():
    x = np.linspace(0.01, 0.99, 12).reshape(3, 4)
    out = betainc_reg(1.5, 2.5, x)
    assert out.shape == (3, 4)
    np.testing.assert_allclose(out, betainc(1.5, 2.5, x), atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 50), st.floats(0.05, 50), st.floats(0, 1))
def test_property_against_scipy(a, b, x):
    assert abs(betainc_reg(a, b, x) - betainc(a, b, x)) < 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 20), st.floats(0.1, 20), st.floats(0.001, 0.999))
def test_symmetry(a, b, x):
    assert betainc_reg(a, b, x) + betainc_reg(b, a, 1 - x) == pytest.approx(1.0, abs=1e-12)
