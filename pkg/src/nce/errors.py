"""Exception types raised across the toolkit."""


class NCEError(Exception):
    """Base class for every error raised by this package."""


class InvalidLabelError(NCEError, ValueError):
    pass


class ShapeError(NCEError, ValueError):
    pass


class DatasetValidationError(NCEError, ValueError):
    """Raised when raw inputs cannot form a Dataset.

    ``violations`` holds one ``(row, reason)`` tuple per problem found, so a
    caller can report everything at once instead of fixing rows one by one.
    Row is ``None`` for whole-dataset problems such as an empty input.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = [
            f"row {row}: {reason}" if row is not None else reason
            for row, reason in self.violations
        ]
        super().__init__("invalid dataset:\n  " + "\n  ".join(lines))


class DegenerateVectorError(NCEError, ValueError):
    def __init__(self, message, sample_id=None):
        self.sample_id = sample_id
        super().__init__(message)


class EmptyPoolError(NCEError, ValueError):
    pass


class EmptyNeighborhoodError(NCEError, ValueError):
    pass


class InfiniteDivergenceError(NCEError, ArithmeticError):
    pass


class TrainingDivergedError(NCEError, FloatingPointError):
    """A loss, gradient or parameter became non-finite during training."""


class MissingTrueLabelsError(NCEError, ValueError):
    pass


class ConfigError(NCEError, ValueError):
    pass


class SchemaError(NCEError, ValueError):
    pass


class TrueLabelAccessError(NCEError, RuntimeError):
    """An algorithm module tried to read the evaluation-only true labels."""
