"""Exception hierarchy shared across the package."""


class TwistlinkError(Exception):
    """Base class for all domain errors raised by twistlink."""


class TLDParseError(TwistlinkError):
    """Syntax or arity error in TLD input; carries the offending line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class StateSpaceError(TwistlinkError):
    """Crossing count exceeds the configured state-sum cap."""


class NotDivisibleError(TwistlinkError):
    """Exact polynomial division failed where the theory guarantees success."""


class StaleMoveError(TwistlinkError):
    """A MoveSite no longer matches the diagram it is applied to."""


class SizeCapError(TwistlinkError):
    """A size-capped operation (canonical code, hom counting) was given too large an input."""


class SearchExhaustedError(TwistlinkError):
    """Equivalence search hit its frontier cap before finishing."""
