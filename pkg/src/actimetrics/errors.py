"""Exception types shared across the package."""


class ActimetricsError(Exception):
    """Base class for all package errors."""


class EpochTooShort(ActimetricsError):
    """Epoch length resolves to fewer than 2 samples."""


class EmptySeries(ActimetricsError):
    """Series has no samples, or fewer samples than one epoch."""


class InvalidRecording(ActimetricsError):
    """Recording failed validation; the message lists the findings."""


class InvalidCutoffs(ActimetricsError):
    """Filter cutoffs violate 0 < f_low < f_high < Nyquist."""


class UnstableDesign(ActimetricsError):
    """Designed filter has poles on or outside the unit circle."""


class SeriesMismatch(ActimetricsError):
    """Series lengths, kinds, or sample rates are incompatible."""


class InapplicableMetric(ActimetricsError):
    """The metric is not defined for the requested dataset kind."""


class MissingDataset(ActimetricsError):
    """A dataset kind required by the variant is absent from the input map."""


class RecordingTooShort(ActimetricsError):
    """Recording is shorter than the requested analysis window."""


class DegenerateInput(ActimetricsError):
    """Correlation is undefined because an input is constant."""


class LabelMismatch(ActimetricsError):
    """Subjects do not share an identical set of variant labels."""


class SignalTooShort(ActimetricsError):
    """Signal is shorter than one spectral-estimation segment."""


class ParseError(ActimetricsError):
    """A text input failed to parse; ``line`` is the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MissingSampleRate(ActimetricsError):
    """No sample rate was supplied via argument or sidecar metadata."""


class BadMagic(ActimetricsError):
    """Binary file does not start with the expected magic bytes."""


class VersionUnsupported(ActimetricsError):
    """Binary file declares a format version this reader does not support."""


class TruncatedPayload(ActimetricsError):
    """Binary payload holds fewer samples than its header declares."""


class ConfigError(ActimetricsError):
    """Configuration failed validation."""
