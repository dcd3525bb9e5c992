"""Exception types raised across the engine."""


class AlforgeError(Exception):
    """Base class for all engine errors."""


class ParseError(AlforgeError):
    """A delimited input file is malformed (ragged rows, non-numeric or non-finite cells)."""


class EmptyDatasetError(AlforgeError):
    """A dataset contains no instances."""


class AlreadyLabeledError(AlforgeError):
    """An instance that already carries a label was labeled again."""


class UnknownIdError(AlforgeError):
    """An instance id does not exist in the dataset."""


class EmptyTrainingSetError(AlforgeError):
    """A model or committee was requested with too few labeled instances."""


class DimensionMismatchError(AlforgeError):
    """Feature vectors disagree with the trained dimensionality."""


class InvalidKError(AlforgeError):
    """A clustering was requested with a cluster count outside [1, n_instances]."""


class OutOfRangeError(AlforgeError):
    """A probability or score lies outside its legal range."""


class DomainError(AlforgeError):
    """A categorical argument (grade, confidence, fusion strategy, ...) is not in its domain."""


class EmptySetError(AlforgeError):
    """An aggregate was requested over an empty score collection."""


class EmptyPoolError(AlforgeError):
    """An operation needs a non-empty unlabeled pool."""


class SingleClassError(AlforgeError):
    """A margin requires at least two classes."""


class SchemaVersionMismatchError(AlforgeError):
    """A serialized session carries an unsupported schema version."""


class OracleUnavailableError(AlforgeError):
    """A label was requested from an oracle that cannot answer (e.g. run_to_completion in interactive mode)."""
