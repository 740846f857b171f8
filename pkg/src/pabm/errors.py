"""Exception types shared across the package."""


class PabmError(Exception):
    """Base class for all errors raised by :mod:`pabm`.

    ``stage`` is filled in by the detection pipeline to say which step
    (``embedding``, ``affinity`` or ``partition``) failed.
    """

    stage = None


class InvalidArgument(PabmError, ValueError):
    pass


class DataError(PabmError, ValueError):
    """Malformed or inconsistent input files."""

    def __init__(self, message, line=None, offenders=None):
        super().__init__(message)
        self.line = line
        self.offenders = list(offenders) if offenders is not None else []


class NumericFailure(PabmError, ArithmeticError):
    """A numerical routine did not converge or degenerated.

    ``diagnostics`` carries whatever the failing routine knew when it gave
    up (iteration counts, residuals, restart counts...).
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class LassoConvergenceError(NumericFailure):
    """Coordinate descent hit its iteration cap.

    ``coef`` is the best iterate found and ``residual`` its stationarity
    violation. ``row`` is set when raised from a batched SSC solve.
    """

    def __init__(self, message, coef, residual, n_iter, row=None):
        super().__init__(message, n_iter=n_iter, residual=residual)
        self.coef = coef
        self.residual = residual
        self.n_iter = n_iter
        self.row = row


class DegenerateSpectrumWarning(UserWarning):
    """The spectrum lacked enough eigenvalues of the requested sign."""
