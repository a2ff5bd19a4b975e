"""Custom exceptions for heartprint."""


class HeartprintError(Exception):
    """Base exception for all heartprint errors."""

    pass


class ConfigurationError(HeartprintError):
    """Raised when configuration is invalid."""

    pass


# ─────────────────────────────────────────────────────────────────
# Record ingestion
# ─────────────────────────────────────────────────────────────────


class RecordError(HeartprintError):
    """Raised when a record cannot be read."""

    pass


class MalformedHeader(RecordError):
    """Raised when a WFDB header is missing fields or has non-numeric counts."""

    pass


class UnsupportedFormat(RecordError):
    """Raised for WFDB storage formats other than 16 and 212."""

    pass


class TruncatedFile(RecordError):
    """Raised when a signal file's byte count does not match its format."""

    pass


class MissingSignalFile(RecordError):
    """Raised when a header references a signal file that does not exist."""

    pass


class MalformedCsv(RecordError):
    """Raised for ragged rows or non-numeric cells in a CSV record."""

    pass


class MissingLead(RecordError):
    """Raised when a requested lead is not present in a record."""

    pass


class SampleOutOfRange(RecordError):
    """Raised when a sample cannot be represented in the target storage format."""

    pass


# ─────────────────────────────────────────────────────────────────
# Signal processing
# ─────────────────────────────────────────────────────────────────


class SignalError(HeartprintError):
    """Raised when a signal cannot be processed."""

    pass


class InvalidBand(SignalError):
    """Raised when filter band edges are not 0 < low < high < fs/2."""

    pass


class SignalTooShort(SignalError):
    """Raised when a channel is too short (or too coarsely sampled) for detection."""

    pass


class WindowTooNarrow(SignalError):
    """Raised when a beat window does not span the fiducial search ranges."""

    pass


# ─────────────────────────────────────────────────────────────────
# Features
# ─────────────────────────────────────────────────────────────────


class FeatureError(HeartprintError):
    """Raised when feature vectors or datasets are invalid."""

    pass


class NotEnoughBeats(FeatureError):
    """Raised when a fragment needs more beats than were supplied."""

    pass


class EmptyDataset(FeatureError):
    """Raised when an operation needs at least one feature vector."""

    pass


class NonFiniteFeature(FeatureError):
    """Raised when a feature vector contains NaN or infinity."""

    pass


class DimensionMismatch(FeatureError):
    """Raised when a vector's dimension differs from the training dimension."""

    pass


# ─────────────────────────────────────────────────────────────────
# Classifiers
# ─────────────────────────────────────────────────────────────────


class ClassifierError(HeartprintError):
    """Raised when a classifier cannot be built, fitted or loaded."""

    pass


class DegenerateTrainingSet(ClassifierError):
    """Raised when the training set has fewer than two classes."""

    pass


class InvalidHyperparameter(ClassifierError):
    """Raised for unknown or out-of-range hyperparameters."""

    pass


class ModelFormatError(ClassifierError):
    """Raised when a serialized model cannot be read."""

    pass


# ─────────────────────────────────────────────────────────────────
# Statistics
# ─────────────────────────────────────────────────────────────────


class StatsError(HeartprintError):
    """Raised when a statistic cannot be computed."""

    pass


class LengthMismatch(StatsError):
    """Raised when paired samples differ in length."""

    pass


class TooFewSamples(StatsError):
    """Raised when fewer than three pairs are supplied."""

    pass


class ZeroVariance(StatsError):
    """Raised when one of the samples is constant."""

    pass


# ─────────────────────────────────────────────────────────────────
# Experiments
# ─────────────────────────────────────────────────────────────────


class ExperimentError(HeartprintError):
    """Raised when an evaluation protocol cannot run."""

    pass


class InvalidConfig(ExperimentError):
    """Raised when a synthetic-generator configuration is invalid."""

    pass


class InsufficientBeats(ExperimentError):
    """Raised when a subject yields too few usable beats for a protocol.

    Attributes:
        subject_id: The subject that was excluded
        n_beats: Number of usable beats found
    """

    def __init__(self, message: str, subject_id: str = "", n_beats: int = 0) -> None:
        super().__init__(message)
        self.subject_id = subject_id
        self.n_beats = n_beats


class SubjectMissingArm(ExperimentError):
    """Raised when a subject lacks pre-dose or post-dose records."""

    pass


class LeakageError(ExperimentError):
    """Raised when train and validation fragments share beats."""

    pass
