"""Exception types shared across the package."""


class PxRobinError(Exception):
    """Base class for package errors."""


class MeshError(PxRobinError):
    """Invalid or degenerate mesh data."""


class FieldParseError(PxRobinError):
    """Syntax or identifier error while parsing a field expression.

    Carries the 1-based column of the offending token in ``column``.
    """

    def __init__(self, message, column):
        super().__init__(f"{message} (column {column})")
        self.column = column


class FieldEvalError(PxRobinError):
    """Domain error while evaluating a field expression.

    ``point`` is the (x, y) pair at which evaluation failed.
    """

    def __init__(self, message, point):
        x, y = point
        super().__init__(f"{message} at point ({x:.17g}, {y:.17g})")
        self.point = (float(x), float(y))


class SpecValidationError(PxRobinError):
    """Problem data violates a standing hypothesis.

    ``violations`` is the list of diagnostics produced by ``validate_spec``.
    """

    def __init__(self, violations):
        lines = "; ".join(v.describe() for v in violations)
        super().__init__(f"invalid problem specification: {lines}")
        self.violations = list(violations)


class RegimeError(PxRobinError):
    """The exponent regime does not match the requested solver."""


class NumericalError(PxRobinError):
    """An iteration failed to converge where convergence was expected."""


class SaddleGeometryError(PxRobinError):
    """Path deformation collapsed onto an endpoint; no interior maximum."""


class ResolutionError(PxRobinError):
    """The mesh is too coarse to resolve a required feature."""
