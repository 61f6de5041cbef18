"""Exception taxonomy shared across the toolkit.

Two broad families matter to callers (and to the CLI exit-code contract):
``DataError`` for invalid inputs or files, ``NumericalError`` for solver
failures on valid inputs.
"""


class EarMetricsError(Exception):
    """Base class for all earmetrics errors."""


class DataError(EarMetricsError):
    """Invalid input data, files, or configuration."""


class NumericalError(EarMetricsError):
    """A numerical procedure failed on otherwise valid input."""


# geometry
class DegenerateLandmarks(DataError):
    """Landmark configuration collapses a required measurement."""


class SelfIntersectingPolygon(DataError):
    """The ear outline hexagon has crossing edges."""


class ConstantFeature(DataError):
    def __init__(self, index: int):
        super().__init__(f"feature column {index} is constant (zero variance)")
        self.index = index


class EmptySelection(DataError):
    """No feature passed the importance threshold."""


# tabular
class SingleClassDataset(DataError):
    """Training requires at least two classes."""


class DimensionMismatch(DataError):
    """Feature vector dimension does not match the model."""


class NonConvergence(NumericalError):
    """A solver hit its iteration cap before meeting its tolerance."""


# augment
class InvalidTransformParam(DataError):
    """Transform parameter outside its valid range."""


class UnreadableImage(DataError):
    def __init__(self, path):
        super().__init__(f"cannot read image: {path}")
        self.path = path


# tinycnn
class IncompatibleShapes(DataError):
    """Layer shapes do not chain, or input does not fit the network."""


class ShapeMismatch(DataError):
    """Batch shape does not match what the network expects."""


class SizeTooLarge(DataError):
    """Requested crop does not fit inside the source image."""


class EmptyDataset(DataError):
    """A training stage received no samples."""


# dataset
class Underage(DataError):
    def __init__(self, age: int):
        super().__init__(f"subject age {age} is below the supported minimum of 18")
        self.age = age


class EmptyStratum(DataError):
    def __init__(self, name: str):
        super().__init__(f"stratum '{name}' has no subjects")
        self.name = name


class DuplicateSubject(DataError):
    def __init__(self, subject_id: str):
        super().__init__(f"duplicate subject_id: {subject_id}")
        self.subject_id = subject_id


class MissingFile(DataError):
    def __init__(self, path, row: int | None = None):
        where = f" (labels row {row})" if row is not None else ""
        super().__init__(f"referenced file does not exist: {path}{where}")
        self.path = path
        self.row = row


class MalformedRow(DataError):
    def __init__(self, row: int, reason: str):
        super().__init__(f"labels row {row}: {reason}")
        self.row = row
        self.reason = reason
