"""Native solvers and learned predictors for four classic power-system studies."""

__version__ = "0.1.0"
