"""Exception types shared across the package.

The CLI maps these onto process exit codes, so every module raises one of
them (or a builtin ``OSError``) instead of ad-hoc exceptions.
"""


class UrbanCAError(Exception):
    """Base class for all package errors."""


class FormatError(UrbanCAError, ValueError):
    """A file on disk does not follow the expected layout.

    ``offset`` is the byte offset at which parsing failed, when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ShapeError(UrbanCAError, ValueError):
    """Grids, matrices or models disagree on their dimensions."""


class DivergenceError(UrbanCAError, ArithmeticError):
    """Training produced a non-finite loss or non-finite parameters."""

    def __init__(self, message, epoch=None):
        if epoch is not None:
            message = f"{message} (epoch {epoch})"
        super().__init__(message)
        self.epoch = epoch


class UndefinedMetricError(UrbanCAError, ZeroDivisionError):
    """A validation metric has a zero denominator."""
