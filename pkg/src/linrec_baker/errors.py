"""Exception hierarchy shared by every stage of the solver."""


class LinrecError(Exception):
    """Base class for all errors raised by this package."""


class PrecisionExhausted(LinrecError):
    """Interval enclosures overlap at the working precision; retry with more bits."""


class DominanceViolation(LinrecError):
    """The characteristic polynomial has no simple, real, strictly dominant root."""


class MultipleRootsUnsupported(LinrecError):
    pass


class HypothesisViolation(LinrecError):
    """A precondition of the bound machinery fails; ``check`` names the inequality."""

    def __init__(self, message: str, check: str = ""):
        super().__init__(message)
        self.check = check


class ZeroElement(LinrecError):
    pass


class NotRealPositive(LinrecError):
    pass


class NoConvergence(LinrecError):
    def __init__(self, message: str, lower=None, upper=None):
        super().__init__(message)
        self.lower = lower
        self.upper = upper


class SingularMatrix(LinrecError):
    pass


class AmbiguousFloor(LinrecError):
    def __init__(self, index: int):
        super().__init__(f"enclosure of C*gamma*theta_{index} straddles an integer")
        self.index = index


class TestFailed(LinrecError):
    """The shortest-vector test did not clear the threshold; enlarge C or change gamma."""

    __test__ = False  # keep pytest from collecting this class


class SearchExhausted(LinrecError):
    def __init__(self, message: str, largest_c: int | None = None):
        super().__init__(message)
        self.largest_c = largest_c


class FactorizationTooHard(LinrecError):
    pass


class MalformedDocument(LinrecError):
    pass


class VerificationFailed(LinrecError):
    def __init__(self, check: str, detail: str):
        super().__init__(f"{check}: {detail}")
        self.check = check
        self.detail = detail
