"""Symmetric link functions mapping a real score to a response probability."""

import numpy as np
from scipy.special import expit


class LogisticLink:
    """Logistic CDF with its first two derivatives.

    cdf(x) = 1 / (1 + exp(-x)), so cdf' = cdf(1-cdf) and
    cdf'' = cdf'(1 - 2 cdf).  Symmetric: cdf(-x) = 1 - cdf(x).
    """

    kind = "logistic"

    def cdf(self, x):
        return expit(x)

    def deriv(self, x):
        p = expit(x)
        return p * (1.0 - p)

    def deriv2(self, x):
        p = expit(x)
        return p * (1.0 - p) * (1.0 - 2.0 * p)

    def log_cdf(self, x):
        # log(1/(1+e^-x)) = -softplus(-x); stable for large |x|
        return -np.logaddexp(0.0, -np.asarray(x, dtype=float))

    def log_ratio(self, x):
        """log(cdf(x) / cdf(-x)), stable for large |x|."""
        x = np.asarray(x, dtype=float)
        return self.log_cdf(x) - self.log_cdf(-x)
