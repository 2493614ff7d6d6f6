"""Exception hierarchy.

Every failure the recovery path can report has its own class so callers (and
the CLI exit-code mapping) can dispatch on the type rather than on messages.
"""


class SMTError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(SMTError, ValueError):
    pass


class InvalidModel(SMTError, ValueError):
    """A source model violates an invariant required by a recovery procedure."""


class Unsupported(SMTError, ValueError):
    pass


# prony
class InsufficientMoments(SMTError, ValueError):
    pass


class DegenerateSystem(SMTError):
    pass


class ComplexRoots(SMTError):
    pass


class OutOfRangeRoots(SMTError):
    pass


class RepeatedRoots(SMTError):
    pass


class InconsistentMoments(SMTError):
    pass


# correspondence
class AmbiguousAssignment(SMTError):
    pass


class NoMatch(SMTError):
    pass


# geometry
class AffinelyDependentAnchors(SMTError):
    pass


class InconsistentDistances(SMTError):
    pass


class CoincidentPoints(SMTError, ValueError):
    pass


class IdenticalHyperplanes(SMTError, ValueError):
    pass


class NoConsistentHyperplane(SMTError):
    pass


class MultipleCandidates(SMTError):
    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)


# hankel
class QuadratureError(SMTError):
    pass


class GridTooCoarse(SMTError):
    pass


class ProfileVanishes(SMTError):
    pass


# pipeline
class NotEnoughGoodSensors(SMTError):
    pass


class VerificationFailed(SMTError):
    pass


# io
class SchemaError(SMTError, ValueError):
    """A JSON document does not follow the expected layout."""
