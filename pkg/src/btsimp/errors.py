"""Exception hierarchy shared by all btsimp modules."""


class BtsimpError(Exception):
    """Base class for every error raised by this package."""


class EmptyLine(BtsimpError):
    """A line with no non-whitespace content was tokenized."""


class IoError(BtsimpError):
    """A file could not be read or written."""


class EncodingError(BtsimpError):
    """Input bytes are not valid UTF-8; carries the 1-based line number."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class EmptyCorpus(BtsimpError):
    """An operation requiring sentences received none."""


class ParseError(BtsimpError):
    """A structured text file is malformed; carries the 1-based line number."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class RangeError(BtsimpError):
    """A numeric value fell outside its documented range."""


class ShapeError(BtsimpError):
    """Parallel inputs disagree in length or dimension."""


class DegenerateInput(BtsimpError):
    """Input is too small or empty for the requested computation."""


class ConfigError(BtsimpError):
    """Configuration values are inconsistent or unsatisfiable."""


class UnknownToken(BtsimpError):
    """A token outside the closed model vocabulary was encountered."""


class NumericError(BtsimpError):
    """A non-finite value appeared where a finite one is required."""


class CheckpointError(BtsimpError):
    """A persisted model/LM container is corrupt or version-incompatible."""


class NoRecords(BtsimpError):
    """Model selection was asked to choose from an empty record list."""


class NoQualifyingEpoch(UserWarning):
    """No epoch cleared the BLEU threshold; best-BLEU epoch returned instead."""
