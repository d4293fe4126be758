"""Exception hierarchy shared by every module."""


class DivfamError(Exception):
    """Base class for library errors."""


class ModulusError(DivfamError, ValueError):
    """Operation needs a prime modulus (or a matching one) and did not get it."""


class ShapeError(DivfamError, ValueError):
    """Vector lengths or moduli disagree."""


class BudgetError(DivfamError, RuntimeError):
    """An enumeration or search exceeded its configured budget.

    ``partial`` carries whatever best-so-far result the caller produced.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SpecError(DivfamError, ValueError):
    """Invalid construction parameters (overlapping atoms, non-partitions, ...)."""


class ReductionError(DivfamError, ValueError):
    """Input has an all-zero coordinate where a non-reducible one is required."""


class StructureError(DivfamError, ValueError):
    """A structural precondition of the decomposition does not hold."""


class ParseError(DivfamError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
