class DnlsLabError(Exception):
    """Base class for errors raised by dnls_lab."""


class GridError(DnlsLabError, ValueError):
    pass


class UndefinedFunctionalError(DnlsLabError, ValueError):
    pass


class CertificateError(DnlsLabError, ValueError):
    """The half-line blow-up certificate does not apply to the given data."""


class ConstructionError(DnlsLabError, ValueError):
    """An experiment fixture could not be built with the requested properties."""


class SolverFailure(DnlsLabError, RuntimeError):
    pass


class ConvergenceError(DnlsLabError, AssertionError):
    pass
