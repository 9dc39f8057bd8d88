import numpy as np

from prefsynth.links import LogisticLink

LINK = LogisticLink()
XS = np.linspace(-30.0, 30.0, 601)


def test_cdf_symmetry():
    assert np.allclose(LINK.cdf(-XS), 1.0 - LINK.cdf(XS), atol=1e-12)


def test_cdf_closed_form():
    x = np.array([-2.0, -0.5, 0.0, 1.0, 3.5])
    assert np.allclose(LINK.cdf(x), 1.0 / (1.0 + np.exp(-x)), atol=1e-14)


def test_deriv_matches_finite_differences():
    x = np.linspace(-6, 6, 121)
    h = 1e-6
    fd = (LINK.cdf(x + h) - LINK.cdf(x - h)) / (2 * h)
    assert np.allclose(LINK.deriv(x), fd, atol=1e-8)


def test_deriv_even_and_nonnegative():
    assert np.allclose(LINK.deriv(-XS), LINK.deriv(XS), atol=1e-12)
    assert np.all(LINK.deriv(XS) >= 0.0)


def test_deriv2_matches_finite_differences():
    x = np.linspace(-6, 6, 121)
    h = 1e-5
    fd = (LINK.deriv(x + h) - LINK.deriv(x - h)) / (2 * h)
    assert np.allclose(LINK.deriv2(x), fd, atol=1e-7)


def test_log_cdf_stable_in_the_tails():
    assert LINK.log_cdf(-1000.0) == -1000.0
    assert LINK.log_cdf(1000.0) == 0.0
    assert np.allclose(LINK.log_cdf(XS), np.log(LINK.cdf(XS.clip(-30, 30))), atol=1e-10)


def test_log_ratio_is_identity_on_logistic():
    # log(cdf(x)/cdf(-x)) = x for the logistic link
    assert np.allclose(LINK.log_ratio(XS), XS, atol=1e-10)
