"""Exception hierarchy shared by all modules."""


class SizeReasonError(Exception):
    """Base class for every error raised by this package."""


class InputError(SizeReasonError, ValueError):
    """Malformed or out-of-contract input."""


class ParseError(InputError):
    """Text input could not be parsed.

    ``line`` is 1-based when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateName(InputError):
    pass


class UnknownName(InputError):
    pass


class ReflexivePair(InputError):
    pass


class CycleDetected(InputError):
    """The relation or diagram contains a directed cycle.

    ``cycle`` holds the witnessing cycle as a list of names, first name repeated
    at the end.
    """

    def __init__(self, message, cycle=None):
        self.cycle = list(cycle) if cycle else []
        super().__init__(message)


class MutualPositiveArrows(CycleDetected):
    """Two nodes point at each other with positive arrows."""


class ConflictingParallelArrows(InputError):
    pass


class EmptyInput(InputError):
    pass


class EmptyReference(InputError):
    pass


class NotASubset(InputError):
    pass


class NotAMember(InputError):
    pass


class NotRanked(SizeReasonError):
    pass


class UnknownNode(UnknownName):
    pass


class UnknownVariable(UnknownName):
    pass


class UnsatisfiableInput(InputError):
    pass
