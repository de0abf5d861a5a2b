"""Exception hierarchy shared by every module."""


class NewcombNetError(ValueError):
    """Base class for all input/validation faults raised by the library."""


class NotNormalized(NewcombNetError):
    pass


class NegativeMass(NewcombNetError):
    pass


class UnknownOutcome(NewcombNetError, KeyError):
    pass


class UnsupportedArity(NewcombNetError):
    pass


class SpaceMismatch(NewcombNetError):
    pass


class OutOfRange(NewcombNetError):
    pass


class RationalParseError(NewcombNetError):
    pass


class ProfileMismatch(NewcombNetError):
    pass


class UnknownVariable(NewcombNetError, KeyError):
    pass


class ShapeMismatch(NewcombNetError):
    pass


class IncompleteFixed(NewcombNetError):
    pass


class InvalidNet(NewcombNetError):
    pass


class VariableMismatch(NewcombNetError):
    pass


class InvalidProfile(NewcombNetError):
    pass


class SchemaError(NewcombNetError):
    """Malformed JSON document (scenario, net, profile)."""
