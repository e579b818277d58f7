"""Exception hierarchy shared by every module of the package."""


class EquilibriumError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(EquilibriumError):
    """Malformed file: bad magic number, ragged CSV rows, unknown version."""


class ParseError(FormatError):
    """A value in an input file could not be parsed as a number."""


class ConsistencyError(FormatError):
    """Two parts of an input disagree, e.g. image and label counts."""


class ShapeError(EquilibriumError, ValueError):
    """Array dimensions do not match what the operation requires."""


class DomainError(EquilibriumError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularityError(EquilibriumError, ArithmeticError):
    """Two charges sit (numerically) on top of each other."""


class DivergenceError(EquilibriumError, ArithmeticError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, loss):
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}")
        self.epoch = epoch
        self.loss = loss
