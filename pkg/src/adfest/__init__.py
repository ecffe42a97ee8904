"""Angular dependence function estimation for bivariate extremes."""

__version__ = "0.1.0"
