"""Exception hierarchy."""


class FracDiracError(Exception):
    """Base class for all library errors."""


class InvalidOrder(FracDiracError, ValueError):
    pass


class NonConvergence(FracDiracError, ArithmeticError):
    pass


class RegionTooSmall(FracDiracError, ValueError):
    pass


class NotDiagonalizable(FracDiracError, ArithmeticError):
    pass


class ZeroEigenvalue(FracDiracError, ArithmeticError):
    pass


class GridMismatch(FracDiracError, ValueError):
    pass


class InvalidStep(FracDiracError, ValueError):
    pass


class ParseError(FracDiracError, ValueError):
    pass


class ValidationError(FracDiracError, ValueError):
    """Raised with the full list of violated constraints in ``problems``."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
