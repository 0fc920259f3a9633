"""Exception hierarchy shared by every module."""


class NeuroHotnetError(Exception):
    """Base class for all package errors."""


class StructureError(NeuroHotnetError, ValueError):
    """Malformed matrix input: wrong shape, asymmetric, negative or NaN."""


class ParameterError(NeuroHotnetError, ValueError):
    """A tuning parameter lies outside its admissible range."""


class InputError(NeuroHotnetError, ValueError):
    """Data required by an operation is missing or invalid."""


class ConfigError(NeuroHotnetError, ValueError):
    """A pipeline configuration document is incomplete or inconsistent."""


class NumericalError(NeuroHotnetError, ArithmeticError):
    """A factorization or solve failed."""


class ConvergenceError(NumericalError):
    """An iterative solver hit its iteration limit.

    Attributes
    ----------
    iterate : ndarray
        Last iterate produced before giving up.
    residual : float
        Convergence measure at the last iterate.
    iterations : int
        Number of iterations performed.
    """

    def __init__(self, message, iterate=None, residual=None, iterations=None):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual
        self.iterations = iterations
