"""Exception types shared across the package."""


class NysadmmError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(NysadmmError, ValueError):
    """An array has the wrong shape for the operation.

    Carries the name of the offending argument together with the expected
    and observed sizes so callers can report which dimension broke.
    """

    def __init__(self, name, expected, got):
        self.name = name
        self.expected = expected
        self.got = got
        super().__init__(f"{name}: expected size {expected}, got {got}")


class ValidationError(NysadmmError, ValueError):
    """A configuration or argument value is out of its documented range."""


class SketchFactorizationError(NysadmmError, RuntimeError):
    """Cholesky factorization of the sketch core failed even after reshifting."""

    def __init__(self, sketch_size, message=""):
        self.sketch_size = sketch_size
        detail = message or "core matrix not positive definite after shift retry"
        super().__init__(f"sketch size {sketch_size}: {detail}")


class NumericalBreakdownError(NysadmmError, ArithmeticError):
    """A solver iterate became non-finite.

    ``iteration`` is the inner (PCG) iteration index; ``admm_iteration`` is
    filled in when the breakdown happens inside an outer ADMM sweep.
    """

    def __init__(self, iteration, message="non-finite iterate", admm_iteration=None):
        self.iteration = iteration
        self.admm_iteration = admm_iteration
        where = f"iteration {iteration}"
        if admm_iteration is not None:
            where += f" (admm iteration {admm_iteration})"
        super().__init__(f"{message} at {where}")


class DataFormatError(NysadmmError, ValueError):
    """A data file could not be parsed; positions are 1-based."""

    def __init__(self, path, line, message, column=None):
        self.path = str(path)
        self.line = line
        self.column = column
        where = f"{path}:{line}"
        if column is not None:
            where += f" (column {column})"
        super().__init__(f"{where}: {message}")
