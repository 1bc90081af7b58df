"""Exception hierarchy shared by all modules."""


class PassivityLabError(Exception):
    """Base class for every error raised by this package."""


class NotSquare(PassivityLabError, ValueError):
    pass


class NotHermitian(PassivityLabError, ValueError):
    pass


class NonFinite(PassivityLabError, ValueError):
    pass


class DimMismatch(PassivityLabError, ValueError):
    pass


class RangeError(PassivityLabError, ValueError):
    pass


class InvalidState(PassivityLabError, ValueError):
    pass


class DegenerateHamiltonian(PassivityLabError, ValueError):
    pass


class AmbiguousRearrangement(PassivityLabError, ValueError):
    pass


class InvalidOrder(PassivityLabError, ValueError):
    pass


class NotMajorizing(PassivityLabError, ValueError):
    pass


class ConcavityViolated(PassivityLabError, ValueError):
    """The summed jump profile r_i fails the discrete concavity test.

    ``index`` is the first level i (1-based, as in r_{i+1} - 2 r_i + r_{i-1})
    where the second difference is positive.
    """

    def __init__(self, index, second_difference):
        self.index = index
        self.second_difference = second_difference
        super().__init__(
            f"jump profile not concave at i={index} "
            f"(second difference {second_difference:.3e} > 0)"
        )


class InvalidGenerator(PassivityLabError, ValueError):
    pass


class NegativeTime(PassivityLabError, ValueError):
    pass


class StateInvariantViolated(PassivityLabError, ArithmeticError):
    pass


class DegenerateSpectrumAtT(PassivityLabError, ArithmeticError):
    pass


class CutoffTooSmall(PassivityLabError, ValueError):
    pass


class ClosedFormMismatch(PassivityLabError, AssertionError):
    pass


class ConfigInvalid(PassivityLabError, ValueError):
    pass
