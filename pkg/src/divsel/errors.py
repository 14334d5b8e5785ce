"""Exception hierarchy.

Two broad families matter to callers: ``ConfigError`` (the run was asked
for something inconsistent) and ``DataError`` (the manifest or another
input file is unusable). The CLI maps them to exit codes 1 and 2.
"""


class DivselError(Exception):
    """Base class for all library errors."""


class ConfigError(DivselError):
    """Invalid or inconsistent run configuration."""


class NonPositiveScaleError(ConfigError):
    """Normalization scale must be a positive finite number."""


class NoActiveTermError(ConfigError):
    """Every distance term is disabled; the metric is undefined."""


class BudgetTooSmallError(ConfigError):
    """The initial budget cannot afford even the cheapest sample."""


class DataError(DivselError):
    """Invalid manifest or other data input."""


class ParseError(DataError):
    """A manifest row could not be parsed."""

    def __init__(self, message: str, path: str = "", line: int | None = None):
        if line is not None:
            message = f"{path or '<manifest>'}:{line}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class SchemaError(DataError):
    """A required column/key is missing or an unknown one is present."""


class DuplicateIdError(DataError):
    """Two samples share the same id."""


class InconsistentFeatureDimError(DataError):
    """Feature vectors are missing on some samples or differ in length."""


class MissingFieldError(DataError):
    """A strategy needs a field that some sample does not carry."""

    def __init__(self, field: str, sample_id: str | None = None):
        detail = f" (first offending sample: {sample_id!r})" if sample_id else ""
        super().__init__(f"missing required field {field!r}{detail}")
        self.field = field
        self.sample_id = sample_id


class DimensionMismatchError(DataError):
    """Vector operands have different dimensions."""


class UnknownIdError(DataError):
    """A referenced sample id does not exist in the manifest."""


class TooFewSamplesError(DataError):
    """An area has too few samples for the requested neighbor count."""
