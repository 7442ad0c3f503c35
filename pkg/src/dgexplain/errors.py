"""Exception hierarchy shared by all modules."""


class DgExplainError(Exception):
    """Base class for library errors."""


class VocabularyError(DgExplainError, ValueError):
    """Unknown variable, state or class, or a malformed vocabulary."""


class UnsupportedStructure(DgExplainError, ValueError):
    """A fast path was called on a formula lacking the structure it needs."""


class ModelFormatError(DgExplainError, ValueError):
    """A model or instance document failed to parse or validate."""

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class InvalidTarget(DgExplainError, ValueError):
    """The targeted class equals the predicted class."""


class CapExceeded(DgExplainError, RuntimeError):
    """A brute-force enumeration would exceed its configured cap."""


class EnumerationAborted(DgExplainError, RuntimeError):
    """An enumerator stopped before finishing; carries partial statistics."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = dict(stats or {})


class EnumerationTimeout(EnumerationAborted):
    pass


class EnumerationOverflow(EnumerationAborted):
    pass


class NotAModel(DgExplainError, ValueError):
    """The instance does not satisfy the formula it should explain."""
