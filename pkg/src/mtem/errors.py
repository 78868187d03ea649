"""Exception hierarchy with machine-readable categories for CLI exit codes."""


class MtemError(Exception):
    """Base error. `category` maps to an exit code in the CLI."""

    category = "validation"
    exit_code = 3


class InputError(MtemError):
    """Missing, unreadable, or malformed input files."""

    category = "io"
    exit_code = 2


class ValidationError(MtemError):
    """Arguments or data violate a documented precondition."""

    category = "validation"
    exit_code = 3


class DegenerateDataError(MtemError):
    """Input is structurally valid but degenerate (constant image, empty mask, ...)."""

    category = "degenerate"
    exit_code = 4


class PipelineStageError(MtemError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause
        self.category = getattr(cause, "category", "validation")
        self.exit_code = getattr(cause, "exit_code", 3)
