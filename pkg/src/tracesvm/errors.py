"""Exception types shared across the toolkit."""


class TraceSvmError(Exception):
    """Base class for all toolkit errors."""


class EmptyTraceError(TraceSvmError):
    """A log yielded no system-call names."""


class ManifestError(TraceSvmError):
    """A corpus manifest is malformed."""


class EmptyVocabularyError(TraceSvmError):
    """No trace in the corpus was long enough to produce a single n-gram."""


class DimensionMismatchError(TraceSvmError):
    """Operands disagree on feature dimensionality."""


class DegenerateLabelsError(TraceSvmError):
    """Training needs at least one example of each class."""


class InsufficientDataError(TraceSvmError):
    """A stratified split cannot place some class on both sides."""


class LengthMismatchError(TraceSvmError):
    """Parallel sequences differ in length."""


class SingleClassError(TraceSvmError):
    """ROC analysis needs ground truth from both classes."""


class ConfigError(TraceSvmError):
    """A configuration field violates its allowed range."""


class VersionMismatchError(TraceSvmError):
    """A persisted model declares an unsupported format version."""


class ModelFormatError(TraceSvmError):
    """A persisted model file is corrupt or structurally invalid."""


class GridCellError(TraceSvmError):
    """Training failed inside a grid-search cell; the cell is named in the message."""


class NonConvergenceWarning(UserWarning):
    """Coordinate descent hit its outer-iteration cap before reaching tol."""
