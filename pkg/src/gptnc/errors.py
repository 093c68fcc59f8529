"""Exception hierarchy shared by all modules."""


class GptncError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(GptncError, ValueError):
    pass


class UnnormalizedBody(GptncError, ValueError):
    pass


class NotPointed(GptncError, ValueError):
    """A cone contains a line, so it has no finite set of extremal rays."""


class DegenerateBody(GptncError, ValueError):
    pass


class CenterOutsideBody(GptncError, ValueError):
    pass


class InvalidDimension(GptncError, ValueError):
    pass


class UnknownName(GptncError, KeyError):
    pass


class BadParams(GptncError, ValueError):
    pass


class RankDeficientNormalization(GptncError, ValueError):
    pass


class InconsistentTable(GptncError, ValueError):
    pass


class ModelMismatch(GptncError, ValueError):
    pass


class NotWellDefined(GptncError, ValueError):
    """A model assigns different representations to equivalent procedures."""


class NonPolytopic(GptncError, ValueError):
    pass


class NotIdentityDecomposition(GptncError, ValueError):
    pass


class NotPositive(GptncError, ValueError):
    pass


class MalformedInput(GptncError, ValueError):
    pass


class NormalizationViolation(GptncError, ValueError):
    pass


class NumericalInstability(GptncError, RuntimeError):
    """A float computation landed too close to a decision boundary to trust."""
