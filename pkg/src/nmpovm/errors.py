"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes, so new error conditions should reuse
one of the classes below instead of raising bare ValueError.
"""


class PovmError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(PovmError):
    """Two operators (or an operator and a POVM) have incompatible dimensions."""


class StructureError(PovmError):
    """A container has the wrong shape: element counts, matrix shapes, hermiticity."""


class PartitionError(StructureError):
    """Basis-index partition violates disjointness, size or range constraints."""


class ParameterError(PovmError):
    """Numeric parameters outside their admissible range."""


class StateError(PovmError):
    """A matrix offered as a density operator is not a valid quantum state."""


class RegimeError(PovmError):
    """A check was invoked outside the parameter regime it is defined for."""


class ConstructionError(PovmError):
    """A requested construction produced a non-positive-semidefinite element."""

    def __init__(self, message: str, element_index: int | None = None,
                 min_eigenvalue: float | None = None):
        super().__init__(message)
        self.element_index = element_index
        self.min_eigenvalue = min_eigenvalue


class NumericError(PovmError):
    """Numerical routine failed to meet its accuracy contract."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual
