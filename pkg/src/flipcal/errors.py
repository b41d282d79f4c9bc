"""Exception hierarchy.

Every error raised by the package derives from :class:`FlipcalError` and from
one of three categories. The command line maps the categories to exit codes.
"""


class FlipcalError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InputError(FlipcalError, ValueError):
    """Malformed or inconsistent input data."""

    exit_code = 2


class ConfigError(FlipcalError, ValueError):
    """Invalid configuration or missing collaborator."""

    exit_code = 3


class InvariantViolation(FlipcalError, RuntimeError):
    """An internal invariant failed; indicates a bug or corrupted state."""

    exit_code = 4


# core
class NonSimplex(InputError):
    pass


class OutOfRange(InputError):
    pass


# augment
class TooManyVariables(ConfigError):
    pass


class MaskLengthMismatch(InputError):
    pass


class InconsistentVariableCount(InputError):
    pass


class EmptyDataset(InputError):
    pass


# ensemble
class EmptyTensor(InputError):
    pass


class RaggedRuns(InputError):
    pass


class UnknownSample(InputError):
    pass


class DuplicateCell(InputError):
    pass


# methods
class MissingFallbackModel(ConfigError):
    pass


class MissingOriginalSamples(ConfigError):
    pass


class EmptyBetaList(ConfigError):
    pass


# fallback
class SingleClassDataset(InputError):
    pass


class NonFiniteLoss(InvariantViolation):
    pass


class UnknownSampleForExternal(InputError):
    pass


class DuplicateSampleId(InputError):
    pass


# metrics
class RejectedDecisionPresent(InputError):
    pass


class InvalidBinWidth(ConfigError):
    pass


class NoSamples(InputError):
    pass


class EmptyReport(InputError):
    pass


# synth
class InvalidConfig(ConfigError):
    pass
