"""Exception hierarchy.

Contract violations (bad arguments) and numerical failures (singular
solves) are kept apart so the CLI can map them to distinct exit codes.
"""


class SkewspecError(Exception):
    pass


class ContractViolation(SkewspecError, ValueError):
    """Arguments violate an operation's precondition."""


class GeneratorInvalid(ContractViolation):
    """A sampling function produced |alpha_n| >= 1."""

    def __init__(self, n, value):
        self.n = n
        self.value = value
        super().__init__(f"|f(T^n x)| = {abs(value):.17g} >= 1 at n = {n}")


class ReductionUnavailable(ContractViolation):
    """Schrodinger reduction needs constant |alpha_n|."""


class NotApplicable(ContractViolation):
    pass


class NumericalFailure(SkewspecError, ArithmeticError):
    pass


class NearSpectrumError(NumericalFailure):
    """The matrix to invert is numerically singular at this spectral parameter."""

    def __init__(self, message, condition=float("inf")):
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3e})")
