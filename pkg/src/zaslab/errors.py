"""Exception hierarchy.

Input problems derive from :class:`InputError`; numerical failures derive
from :class:`NumericalError`.  The CLI maps the two families to distinct
exit codes.
"""


class ZaslabError(Exception):
    """Base class for every error raised by the package."""


class InputError(ZaslabError):
    pass


class NumericalError(ZaslabError):
    pass


class DomainError(InputError, ValueError):
    """A radius or parameter lies outside the domain of a profile."""


class MismatchError(InputError, ValueError):
    """Two objects that must describe the same sphere do not."""


class NotRegularError(InputError, ValueError):
    """The singularity has no resolution with nonzero differential."""


class ParseError(InputError):
    """A scenario or profile document could not be parsed."""


class ValidationError(InputError):
    """A scenario parsed but holds out-of-range values."""


class InterpolationError(NumericalError):
    """A tabulated profile was queried outside its sample range."""


class QuadratureError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class EnvelopeError(NumericalError):
    """Root finding on the area envelope failed to bracket."""
