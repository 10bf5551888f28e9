"""Exception hierarchy shared by all fclear modules."""


class FClearError(Exception):
    """Base class for every domain error raised by fclear."""


class ValidationError(FClearError, ValueError):
    pass


class SelfContract(ValidationError):
    pass


class SelfReference(ValidationError):
    pass


class NonPositiveWeight(ValidationError):
    pass


class SanityViolation(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class BadParams(ValidationError):
    pass


class NonBinaryInput(ValidationError):
    pass


class ArityError(ValidationError):
    pass


class RequiresLoss(ValidationError):
    pass


class NotAClearingVector(FClearError):
    pass


class MissingDesignation(FClearError):
    pass


class EmptySet(FClearError):
    pass


class PropagationDiverged(FClearError):
    def __init__(self, message, assignments=()):
        super().__init__(message)
        self.assignments = list(assignments)


class EnumerationTooLarge(FClearError):
    pass


class ParseError(ValidationError):
    pass


class SelfLoop(ParseError):
    pass


class DuplicateEdge(ParseError):
    pass


class TooLarge(FClearError):
    pass


class BadObjective(ValidationError):
    pass


class BadMultiplier(ValidationError):
    pass


class BadK(ValidationError):
    pass


class UnsplittableContract(FClearError):
    pass
