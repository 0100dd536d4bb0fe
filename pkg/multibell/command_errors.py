"""Exceptions raised by multibell.

Every error carries the exit code the CLI returns for it, so handlers only need to
catch MultibellError.
"""


class MultibellError(Exception):
    """Base class for all multibell errors."""

    exit_code = 1

    def __init__(self, message):
        super().__init__(message)
        self.message = message


class InputError(MultibellError):
    """Bad input: files, references, or values outside an operation's domain."""

    exit_code = 2


class UnphysicalStateError(InputError):
    """A state produced outcome probabilities outside [0, 1]."""


class NumericalError(MultibellError):
    """A numerical stage (LP, enumeration, optimizer) could not produce a result."""

    exit_code = 3


class InfeasibleError(NumericalError):
    """The linear program has no feasible point."""


class UnboundedError(NumericalError):
    """The linear program is unbounded."""


class IncompleteDataError(MultibellError):
    """Counts or measurements needed for an estimate are missing."""

    exit_code = 4


class PipelineStageError(MultibellError):
    """Wraps a failure inside one pipeline stage.

    Keeps the exit code of the underlying error.
    """

    def __init__(self, stage, cause):
        message = f"Stage '{stage}' failed: {getattr(cause, 'message', cause)}"
        super().__init__(message)
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", MultibellError.exit_code)
