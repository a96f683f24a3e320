import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from crstatus.special import gamma_cdf, gamma_cdf_interval_mean, reg_lower_gamma


def quad_reg_lower(a, x):
    # independent oracle: numerical integration of the gamma density
    if x <= 0:
        return 0.0
    val, err = quad(lambda t: t ** (a - 1) * math.exp(-t), 0.0, x, limit=200)
    return val / math.gamma(a)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.5, 5.0, 9.0, 20.0])
@pytest.mark.parametrize("x", [0.01, 0.5, 1.0, 3.3333, 6.6667, 10.0, 15.0, 40.0])
def test_reg_lower_gamma_matches_quadrature(a, x):
    assert_allclose(reg_lower_gamma(a, x), quad_reg_lower(a, x), atol=1e-10, rtol=1e-10)


def test_reg_lower_gamma_matches_scipy():
    from scipy.special import gammainc

    a = np.array([0.7, 3.0, 5.0, 9.0])
    x = np.array([0.2, 2.0, 6.0, 30.0])
    assert_allclose(reg_lower_gamma(a, x), gammainc(a, x), atol=1e-13)


def test_reg_lower_gamma_edges():
    assert reg_lower_gamma(2.0, 0.0) == 0.0
    assert reg_lower_gamma(2.0, -1.0) == 0.0
    assert 0.999 < reg_lower_gamma(1.0, 20.0) <= 1.0
    with pytest.raises(ValueError):
        reg_lower_gamma(0.0, 1.0)


def test_gamma_cdf_scale_and_point_mass():
    assert_allclose(gamma_cdf(15.0, 5.0, 3.0), reg_lower_gamma(5.0, 5.0))
    assert gamma_cdf(-1.0, 5.0, 3.0) == 0.0
    # zero scale encodes a point mass at the origin
    assert gamma_cdf(0.0, 5.0, 0.0) == 1.0
    assert gamma_cdf(-0.5, 5.0, 0.0) == 0.0


@pytest.mark.parametrize("lower,upper,shape,scale", [(19.0, 21.0, 5.0, 3.0), (5.0, 7.0, 9.0, 2.0), (0.5, 2.0, 1.0, 1.0)])
def test_interval_mean_matches_quadrature(lower, upper, shape, scale):
    val, _ = quad(lambda t: gamma_cdf(t, shape, scale), lower, upper, limit=200)
    assert_allclose(
        gamma_cdf_interval_mean(lower, upper, shape, scale),
        val / (upper - lower),
        atol=1e-10,
    )


def test_interval_mean_validation():
    with pytest.raises(ValueError):
        gamma_cdf_interval_mean(2.0, 1.0, 5.0, 3.0)
