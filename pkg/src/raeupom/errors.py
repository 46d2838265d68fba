"""Exception types raised across the package."""


class RaeUpomError(Exception):
    pass


class UndeclaredVariable(RaeUpomError, KeyError):
    pass


class ValueOutOfRange(RaeUpomError, ValueError):
    pass


class DomainError(RaeUpomError, ValueError):
    """Registration-time check failed (probabilities, arity, role matching)."""


class InvalidPC(RaeUpomError, ValueError):
    pass


class TypeMismatch(RaeUpomError, TypeError):
    pass


class UnknownAction(RaeUpomError, KeyError):
    pass


class UnknownId(RaeUpomError, KeyError):
    pass


class UnknownChannel(RaeUpomError, KeyError):
    pass


class KindMismatch(RaeUpomError, ValueError):
    pass


class NonPositiveCost(RaeUpomError, ValueError):
    pass


class MissingModel(RaeUpomError, LookupError):
    pass


class NonStaticDomain(RaeUpomError, ValueError):
    pass


class BlowupGuard(RaeUpomError, RuntimeError):
    pass


class UnknownCatalogEntry(RaeUpomError, KeyError):
    pass


class DimensionMismatch(RaeUpomError, ValueError):
    pass


class EmptyDataset(RaeUpomError, ValueError):
    pass


class NoApplicableValue(RaeUpomError, LookupError):
    pass


class UnknownDomain(RaeUpomError, KeyError):
    pass


class EmptyInput(RaeUpomError, ValueError):
    pass


class IoError(RaeUpomError, OSError):
    pass
