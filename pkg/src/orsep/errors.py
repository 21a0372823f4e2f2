"""Exception hierarchy shared across the package."""


class OrsepError(Exception):
    """Base class for every error raised by this package."""


class PresentationSyntaxError(OrsepError, ValueError):
    pass


class TorsionRequired(OrsepError, ValueError):
    """The effective relator exponent is 1, so the group has no torsion."""


class EmptyRelator(OrsepError, ValueError):
    pass


class RCNotZero(OrsepError):
    pass


class RCZero(OrsepError):
    pass


class SearchExhausted(OrsepError):
    pass


class BudgetExceeded(OrsepError):
    """A bounded search ran out of budget. Never a negative answer."""


class SubgroupTooLarge(OrsepError):
    pass


class ImmediateFailure(OrsepError):
    """The requested separation cannot exist, independent of budget."""


class IncompatibleQuotients(OrsepError):
    pass


class AlphaInconsistent(OrsepError):
    pass


class CannotNormalize(OrsepError):
    pass


class NotInSubgroup(OrsepError):
    pass
