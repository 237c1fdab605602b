"""Exception hierarchy shared by every module.

Each error maps onto a CLI exit code, see ``schrodrift.cli``.
"""


class SchrodriftError(Exception):
    """Base class for all package errors."""


class DimensionError(SchrodriftError, ValueError):
    """Matrix or lattice shapes are inconsistent."""


class NumericalError(SchrodriftError, ArithmeticError):
    """A dense kernel failed to converge or hit a singular system."""


class DomainError(SchrodriftError, ValueError):
    """A scalar parameter lies outside its admissible range."""


class ParseError(SchrodriftError, ValueError):
    """A problem file or field descriptor could not be parsed."""


class RegistryError(SchrodriftError, KeyError):
    """Unknown fixture name or invalid fixture parameters."""

    def __str__(self):
        # KeyError quotes its message; keep it readable
        return str(self.args[0]) if self.args else ""


class HoermanderError(SchrodriftError, ValueError):
    """The pair (Q, B) violates the rank condition."""

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic


class ConsistencyError(SchrodriftError, RuntimeError):
    """Two independent tests of the same property disagree."""


class DegenerateGramianError(SchrodriftError, ArithmeticError):
    """Q(t) is not numerically positive definite at the requested time."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class CanonicalFormError(SchrodriftError, ValueError):
    """Krylov rank increments are not a valid canonical profile."""


class InconclusiveRegimeError(SchrodriftError, RuntimeError):
    """The large-time growth fit is too noisy to decide a regime."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class GeometryError(SchrodriftError, ValueError):
    """Support of the data leaves the periodic box under the drift flow."""

    def __init__(self, message, corner=None):
        super().__init__(message)
        self.corner = corner


class ResolutionError(SchrodriftError, ValueError):
    """The lattice cannot resolve the frequencies or phases involved."""
