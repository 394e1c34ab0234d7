"""Exception hierarchy shared by the library and the CLI exit-code contract"""


class EmbeddingIdError(ValueError):
    """Base error; ``exit_code`` is what the CLI returns for it"""

    exit_code = 1


class InputFormatError(EmbeddingIdError):
    """Input could not be read or parsed"""

    exit_code = 1


class PreconditionError(EmbeddingIdError):
    """An operation was called outside its contract (k >= n, empty input, ...)"""

    exit_code = 2


class InvariantViolation(EmbeddingIdError):
    """An internal consistency check failed after computation"""

    exit_code = 3
