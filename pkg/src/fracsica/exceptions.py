"""Exception hierarchy shared by the solver, model and control modules."""


class FracSicaError(Exception):
    """Base class for all package errors."""


class FractionalOrderError(FracSicaError, ValueError):
    """Fractional order outside (0, 1]."""


class SolverDivergenceError(FracSicaError, ArithmeticError):
    """A non-finite value appeared while stepping the PECE scheme."""

    def __init__(self, node, iteration=None):
        self.node = node
        self.iteration = iteration
        msg = f"non-finite solution value at node {node}"
        if iteration is not None:
            msg += f" (sweep iteration {iteration})"
        super().__init__(msg)


class MittagLefflerRangeError(FracSicaError, ValueError):
    """Argument outside the validated range of the series evaluation."""


class IndeterminateOrderError(FracSicaError, ArithmeticError):
    """Errors too small to estimate an empirical convergence order."""


class GridMismatchError(FracSicaError, ValueError):
    """Two time-dependent objects do not live on the same grid."""


class InvariantViolationError(FracSicaError, ArithmeticError):
    """A trajectory left the non-negative, bounded region."""

    def __init__(self, node, message):
        self.node = node
        super().__init__(f"node {node}: {message}")


class IncidenceEvaluationError(FracSicaError, ValueError):
    """The incidence function could not be evaluated at a point."""

    def __init__(self, point, message="incidence not evaluable"):
        self.point = point
        super().__init__(f"{message} at (S, I) = {point}")


class EquilibriumInconsistencyError(FracSicaError, RuntimeError):
    """R0 > 1 but the endemic-equilibrium equation has no bracketed root."""


class UndefinedMeasureError(FracSicaError, ZeroDivisionError):
    """A cost-effectiveness measure has a zero denominator."""


class ConfigError(FracSicaError, ValueError):
    """Invalid scenario configuration."""
