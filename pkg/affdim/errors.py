from __future__ import absolute_import, print_function

TYPE_CHECKING = False
if TYPE_CHECKING:
    from typing import *

# exit statuses used by the command line front end
EXIT_OK = 0
EXIT_FAILED = 1
EXIT_UNDETERMINED = 2
EXIT_RESOURCE = 3
EXIT_USAGE = 64
EXIT_IO = 74

SINGULAR_ERROR = "linear part is singular (det = 0)"
CONTRACTION_ERROR = "linear part is not a contraction (alpha1 = %.6g >= 1)"
SYMBOL_ERROR = "symbol %r out of range for a system of %d maps"
EMPTY_WORD_ERROR = "the empty word has no singular value function"
BUDGET_ERROR = "%d words at depth %d exceed the enumeration budget of %d"


class AffdimError(Exception):
    """Root of every error raised by affdim."""


class InputError(AffdimError, ValueError):
    """A caller supplied an argument outside the documented range."""


class DomainError(AffdimError, ValueError):
    """The input lies outside the domain where an operation is defined."""


class ResourceError(AffdimError, RuntimeError):
    """
    An enumeration would exceed the configured word budget.

    Parameters
    ----------
    message : str
    partial : Any
        whatever was computed before the budget was hit, or None
    """
    def __init__(self, message, partial=None):
        # type: (str, Any) -> None
        super(ResourceError, self).__init__(message)
        self.partial = partial


class EstimationError(AffdimError):
    """Too little usable data to fit a scaling law."""


class ConfigError(InputError):
    """
    A run configuration failed validation.

    Parameters
    ----------
    message : str
    field : str
        dotted path of the offending field, e.g. ``maps[1].linear``
    """
    def __init__(self, message, field=''):
        # type: (str, str) -> None
        super(ConfigError, self).__init__(message)
        self.field = field

    def __str__(self):
        if self.field:
            return '%s: %s' % (self.field, self.args[0])
        return self.args[0]
