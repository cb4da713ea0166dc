"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class PVDescentError(Exception):
    """Base class. ``exit_code`` is what the command-line front end returns."""

    exit_code = 2


class InputError(PVDescentError):
    exit_code = 1


class ParseError(InputError):
    def __init__(self, message, line=1, column=1):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class PoleEvaluation(PVDescentError):
    """A rational function was evaluated (or expanded) at one of its poles."""


class SingularInitial(PVDescentError):
    """Initial value of a fundamental matrix is not invertible."""


class OutOfDisk(PVDescentError):
    """A series was evaluated outside its admissible disk, or a path came too close to a pole."""


class PrecisionLoss(PVDescentError):
    """Accumulated error estimate exceeded the requested tolerance."""


class DegenerateGeometry(PVDescentError):
    """Poles/base point too close to build admissible loops."""


class SingularGauge(PVDescentError):
    """A gauge matrix with vanishing determinant."""


class NotDescendable(PVDescentError):
    """Twisted system failed the realness certificate."""


class LogBranchFailure(PVDescentError):
    """No consistent matrix logarithm could be chosen."""


class NoConvergence(PVDescentError):
    exit_code = 3

    def __init__(self, iterations, residual, message="Gauss-Newton did not converge"):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"{message}: {iterations} iterations, residual {residual:.3e}")
