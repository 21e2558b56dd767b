"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A model, dataset, or configuration violates its invariants."""


class FitInfeasibleError(RuntimeError):
    """Constrained fit residual exceeds the configured tolerance."""


class FitDivergenceError(RuntimeError):
    """Nonlinear least squares failed to converge."""


class ConvergenceError(RuntimeError):
    """An iterative numerical routine exhausted its refinement budget."""


class AliasingError(RuntimeError):
    """FFT size too small for the requested linear convolution."""


class SupportOverflowError(RuntimeError):
    """Probability mass outside the discretization grid exceeds tolerance."""


class TruncationWarning(UserWarning):
    """A truncated series or PMF left non-negligible residual mass."""
