"""Exception hierarchy shared by the simulator and the command line."""


class ValidationError(ValueError):
    """Bad user input: out-of-range parameter, unknown key, malformed state."""


class NumericError(ArithmeticError):
    """A numerical failure during propagation."""


class TruncationError(NumericError):
    """Population leaked into the top Fock shells of the truncated space."""


class ConvergenceError(NumericError):
    """Step refinement changed recorded observables by more than the tolerance."""
