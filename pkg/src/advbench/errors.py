"""Exception hierarchy shared by every advbench module.

Each error carries the process exit code the CLI reports for it.
"""


class BenchError(Exception):
    """Base class for benchmark errors."""

    exit_code = 3


class ConfigError(BenchError):
    """Invalid configuration, preset name or hyperparameter."""

    exit_code = 2


class DataError(BenchError):
    """Inconsistent or empty data (datasets, distance tables, records)."""

    pass


class DimensionError(DataError):
    """Vector or matrix dimensions do not agree."""

    pass


class FormatError(DataError):
    """A model, record or dataset file is malformed."""

    pass


class DegenerateError(DataError):
    """The ensemble curve already fills the normalising box."""

    pass


class StateError(BenchError):
    """An operation was called without the state it needs."""

    pass


class InitError(BenchError):
    """An attack could not be initialised."""

    pass


class StoreIOError(BenchError):
    """Reading or writing benchmark artifacts failed."""

    exit_code = 4
