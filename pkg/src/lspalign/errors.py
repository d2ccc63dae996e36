"""Exception hierarchy shared by all modules.

Two broad families matter for the CLI exit-code contract: ``UsageError``
(bad configuration or flag combinations, exit 1) and ``DataError``
(malformed or inconsistent input data, exit 2).
"""


class LspAlignError(Exception):
    """Base class for all package errors."""


class UsageError(LspAlignError):
    """Invalid configuration: missing resources, bad flag combinations."""


class DataError(LspAlignError):
    """Malformed or inconsistent input data."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        super().__init__(message)

    def __str__(self):
        msg = super().__str__()
        if self.path is not None and self.line is not None:
            return f"{self.path}:{self.line}: {msg}"
        if self.path is not None:
            return f"{self.path}: {msg}"
        return msg

    def at(self, path, line=None):
        """Return a copy annotated with file (and line) context."""
        err = type(self)(self.args[0], path=path, line=line)
        return err


# --- bitext / tag / table parsing ---

class MissingDelimiterError(DataError):
    """Bitext line lacks the ' ||| ' separator."""


class EmptySideError(DataError):
    """One side of a bitext line has no tokens."""


class LengthMismatchError(DataError):
    """Parallel sequences disagree in length."""


class UnknownLabelError(DataError):
    """A tag is not 'O' or of the form 'B-X' / 'I-X'."""


class DimensionMismatchError(DataError):
    """Embedding row width disagrees with the declared dimension."""


class NonNumericValueError(DataError):
    """A numeric field failed to parse."""


class EmptyFileError(DataError):
    """An input file contains no usable content."""


class MalformedLinkError(DataError):
    """An alignment token is not of the form 'i-j'."""


# --- alignment / model errors ---

class IndexOutOfRangeError(DataError):
    """A position index falls outside its sentence."""


class LinkOutOfRangeError(DataError):
    """An alignment link points outside the sentence pair."""


class EmptyCorpusError(DataError):
    """Training was requested on an empty corpus."""


class EmptyStringError(DataError):
    """A string-valued metric received an empty string."""
