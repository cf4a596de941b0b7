"""Cost-effectiveness measures of an optimal-control solution.

All integrals use the composite trapezoid rule on the solution grid, the
same rule as :func:`fracsica.focp.cost_functional`.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import trapezoid

from .exceptions import UndefinedMeasureError
from .focp import FocpSolution


def _infected(solution: FocpSolution) -> np.ndarray:
    vals = solution.states.values
    return vals[:, 1] + vals[:, 3]


def _i0(solution: FocpSolution) -> float:
    i0 = float(_infected(solution)[0])
    if i0 == 0.0:
        raise UndefinedMeasureError("i(0) = I(0) + A(0) is zero; efficacy is undefined")
    return i0


def efficacy_curve(solution: FocpSolution) -> np.ndarray:
    """F(t) = 1 - i(t)/i(0) with i = I + A, at every node."""
    i0 = _i0(solution)
    return 1.0 - _infected(solution) / i0


def averted_cases(solution: FocpSolution) -> float:
    """AV = i(0)*tf - int i(t) dt."""
    i = _infected(solution)
    g = solution.states.grid
    return float(i[0] * (g.tf - g.t0) - trapezoid(i, dx=g.h))


def total_cost(solution: FocpSolution, c1: float, c2: float) -> float:
    """TC = int c1*v1*I + c2*v2*A dt."""
    if c1 < 0 or c2 < 0:
        raise ValueError("unit costs must be non-negative")
    vals = solution.states.values
    ctrl = solution.controls
    integrand = c1 * ctrl.v1 * vals[:, 1] + c2 * ctrl.v2 * vals[:, 3]
    return float(trapezoid(integrand, dx=solution.states.grid.h))


def acer(tc: float, av: float) -> float:
    """Average cost-effectiveness ratio TC/AV."""
    if av == 0:
        raise UndefinedMeasureError("no cases averted; ACER is undefined")
    return tc / av


def effectiveness(solution: FocpSolution) -> float:
    g = solution.states.grid
    return averted_cases(solution) / (_i0(solution) * (g.tf - g.t0))


@dataclass
class CostEffectivenessSummary:
    alpha: float
    AV: float
    TC: float
    ACER: float
    effectiveness: float

    def to_dict(self):
        return asdict(self)


def summarize(solution: FocpSolution, c1: float = 1.0, c2: float = 1.0) -> CostEffectivenessSummary:
    av = averted_cases(solution)
    tc = total_cost(solution, c1, c2)
    return CostEffectivenessSummary(
        alpha=solution.alpha,
        AV=av,
        TC=tc,
        ACER=acer(tc, av),
        effectiveness=effectiveness(solution),
    )
