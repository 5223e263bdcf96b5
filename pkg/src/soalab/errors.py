class SoaLabError(Exception):
    """Base class for every error raised by soalab."""


class RingMismatch(SoaLabError, ValueError):
    pass


class CompositionError(SoaLabError, ValueError):
    """Domain/codomain mismatch in compose, equals and friends."""


class IllDefinedMorphism(SoaLabError, ValueError):
    """The matrix does not send relations of the domain to relations of the codomain."""


class InfiniteHomSet(SoaLabError):
    def __init__(self, message: str, obj=None):
        super().__init__(message)
        self.obj = obj


class NonCommutingSquare(SoaLabError, ValueError):
    pass


class NotMono(SoaLabError, ValueError):
    pass


class VariantMismatch(SoaLabError, ValueError):
    pass


class Truncated(SoaLabError):
    """A construction hit its stage budget; ``trace`` holds what was built."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace
