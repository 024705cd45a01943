"""Exception types raised across the urlsentry pipeline."""


class UrlSentryError(Exception):
    """Base class for all urlsentry errors."""


class EmptyUrl(UrlSentryError):
    """Raised when a URL is empty or whitespace-only."""


class MissingColumn(UrlSentryError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"input CSV is missing required column {name!r}")


class MalformedRow(UrlSentryError):
    def __init__(self, line_no: int, detail: str = "wrong field count"):
        self.line_no = line_no
        super().__init__(f"malformed CSV row at line {line_no}: {detail}")


class UnknownLabel(UrlSentryError):
    def __init__(self, text: str):
        self.text = text
        super().__init__(f"UnknownLabel: {text!r} has no entry in the label mapping")


class EmptyMatrix(UrlSentryError):
    """Raised when an operation requires at least one row."""


class DegenerateSplit(UrlSentryError):
    """Raised when a train/test split would leave a partition empty."""


class DimensionMismatch(UrlSentryError):
    """Raised when an input vector does not match the expected width."""


class SingleClassTrainingSet(UrlSentryError):
    """Raised when a supervised trainer is given only one class."""


class LatentTooLarge(UrlSentryError):
    """Raised when the requested latent width exceeds the input width."""


class KOutOfRange(UrlSentryError):
    """Raised when k is outside [1, number of stored rows]."""


class TooFewRows(UrlSentryError):
    """Raised when a split is requested on fewer than two rows."""


class EmptyNode(UrlSentryError):
    """Raised when impurity is requested for zero samples."""


class LengthMismatch(UrlSentryError):
    """Raised when paired prediction/truth sequences differ in length."""


class EmptyInput(UrlSentryError):
    """Raised when an evaluation is requested on zero examples."""


class ThresholdOutOfRange(UrlSentryError):
    """Raised when a confidence threshold is outside [0, 1]."""


class UnsupportedVersion(UrlSentryError):
    def __init__(self, found: int, supported: int):
        self.found = found
        self.supported = supported
        super().__init__(
            f"artifact format_version {found} is newer than supported version {supported}"
        )


class CorruptArtifact(UrlSentryError):
    """Raised when an artifact fails its checksum or structural checks."""


class FeatureSpecMismatch(UrlSentryError):
    """Raised when data dimensionality does not match an artifact's feature spec."""


class ConfigError(UrlSentryError):
    """Raised for unknown or invalid configuration keys/values."""
