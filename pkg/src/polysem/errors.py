"""Exception hierarchy shared by every module."""


class CircuitError(ValueError):
    """Malformed circuit structure."""


class CycleError(CircuitError):
    pass


class DanglingChildError(CircuitError):
    pass


class PolarityError(CircuitError):
    pass


class EmptyChildrenError(CircuitError):
    pass


class DivideByZero(ZeroDivisionError):
    """A division node's denominator evaluated to zero."""

    def __init__(self, node_id: int):
        super().__init__(f"division by zero at node n{node_id}")
        self.node_id = node_id


class NonInvertibleWeight(ZeroDivisionError):
    """A rational weight has a denominator divisible by the modulus."""


class SemanticsMismatch(ValueError):
    pass


class TermBlowupError(RuntimeError):
    pass


class NotADistribution(ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class SingularShift(ZeroDivisionError):
    pass


class DegreeOverflow(ArithmeticError):
    pass


class StructureError(ValueError):
    """A structural precondition (decomposability, smoothness) failed."""

    def __init__(self, message: str, node=None, index=None):
        super().__init__(message)
        self.node = node
        self.index = index


class NotDecomposable(StructureError):
    pass


class NotSmooth(StructureError):
    pass


class UnscopedConstant(NotSmooth):
    pass


class DegreeViolation(ValueError):
    pass


class RouteError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line
