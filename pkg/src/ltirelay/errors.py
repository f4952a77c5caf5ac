"""Exception types raised by the library."""


class NonFiniteIntegrand(ValueError):
    """An integrand evaluated to NaN or Inf at a quadrature node."""


class SingularForm(ValueError):
    """A quadratic form that must be positive definite is not."""


class DegenerateChannel(ValueError):
    """All three propagation channels are identically zero."""


class InfeasibleBand(ValueError):
    """A low-pass cutoff outside (0, pi] was requested."""


class NumericalRankLoss(ValueError):
    """Cholesky factorization of a noise covariance failed."""
