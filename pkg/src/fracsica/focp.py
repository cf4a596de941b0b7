"""Fractional optimal control of the SICA model.

Two controls act on the model: ``v1`` moves infected individuals into ART
(it takes the place of the treatment rate phi) and ``v2`` treats AIDS
patients (it takes the place of sigma). The cost

    J = int_0^tf  I + A + B1*delta*v1^2 + B2*delta*v2^2  dt

is minimised by a forward-backward sweep: states forward with PECE,
costates backward with PECE after the change of variable t' = tf - t,
then a relaxed projection of the stationarity condition onto the box
``0 <= v_i <= v_i_max``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.integrate import trapezoid

from .exceptions import GridMismatchError, SolverDivergenceError
from .frackit import TimeGrid, Trajectory, caputo_pece_solve, check_order
from .sica import Incidence, SicaParams

log = logging.getLogger(__name__)

REL_FLOOR = 1e-12


@dataclass(frozen=True)
class ControlBounds:
    v1_max: float = 1.0
    v2_max: float = 1.0

    def __post_init__(self):
        for name in ("v1_max", "v2_max"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1], got {v!r}")


@dataclass(frozen=True)
class CostWeights:
    B1: float
    B2: float
    delta: float

    def __post_init__(self):
        for name in ("B1", "B2", "delta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class SweepConfig:
    max_iterations: int = 300
    tolerance: float = 1e-4
    relaxation: float = 0.5

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not (0.0 < self.relaxation < 1.0):
            raise ValueError("relaxation must lie in (0, 1)")


@dataclass
class ControlSchedule:
    grid: TimeGrid
    v1: np.ndarray
    v2: np.ndarray

    def __post_init__(self):
        n = self.grid.n_steps + 1
        self.v1 = np.asarray(self.v1, dtype=float)
        self.v2 = np.asarray(self.v2, dtype=float)
        if self.v1.shape != (n,) or self.v2.shape != (n,):
            raise GridMismatchError(f"controls must have {n} nodes")

    @classmethod
    def zeros(cls, grid: TimeGrid) -> "ControlSchedule":
        n = grid.n_steps + 1
        return cls(grid, np.zeros(n), np.zeros(n))

    @classmethod
    def constant(cls, grid: TimeGrid, v1: float, v2: float) -> "ControlSchedule":
        n = grid.n_steps + 1
        return cls(grid, np.full(n, float(v1)), np.full(n, float(v2)))

    def within(self, bounds: ControlBounds) -> bool:
        return bool(np.all(self.v1 >= 0) and np.all(self.v1 <= bounds.v1_max)
                    and np.all(self.v2 >= 0) and np.all(self.v2 <= bounds.v2_max))


@dataclass
class AdjointState:
    """Costates lam1..lam4 on the physical time grid."""

    grid: TimeGrid
    values: np.ndarray

    @property
    def lam1(self):
        return self.values[:, 0]

    @property
    def lam2(self):
        return self.values[:, 1]

    @property
    def lam3(self):
        return self.values[:, 2]

    @property
    def lam4(self):
        return self.values[:, 3]


@dataclass
class FocpSolution:
    states: Trajectory
    adjoints: AdjointState
    controls: ControlSchedule
    cost: float
    iterations: int
    converged: bool
    alpha: float = 1.0
    history: List[dict] = field(default_factory=list)


def _same_grid(a: TimeGrid, b: TimeGrid):
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


def _node_values(grid: TimeGrid, values: np.ndarray):
    """Grid-aligned lookup t -> values[k] for t on (or rounding to) node k."""
    t0, h, n = grid.t0, grid.h, grid.n_steps

    def at(t):
        k = int(round((t - t0) / h))
        return values[min(max(k, 0), n)]

    return at


def controlled_rhs(params: SicaParams, incidence: Incidence, v1, v2):
    """Controlled SICA field. ``v1``/``v2`` are constants or callables of t."""
    Lam, mu, rho, omega, d = params.Lambda, params.mu, params.rho, params.omega, params.d
    xi2 = params.xi2
    v1_at = v1 if callable(v1) else (lambda t, c=float(v1): c)
    v2_at = v2 if callable(v2) else (lambda t, c=float(v2): c)

    def rhs(t, y):
        S, I, C, A = y
        u1 = v1_at(t)
        u2 = v2_at(t)
        inf = incidence(S, I) * I
        return np.array([
            Lam - mu * S - inf,
            inf - (rho + u1 + mu) * I + u2 * A + omega * C,
            u1 * I - xi2 * C,
            rho * I - (u2 + mu + d) * A,
        ])

    return rhs


def adjoint_rhs(params: SicaParams, incidence: Incidence, state, v1: float, v2: float,
                lam) -> np.ndarray:
    """Costate derivatives in reversed time t' = tf - t (equal to dH/dx)."""
    S, I, C, A = state
    l1, l2, l3, l4 = lam
    mu, rho, omega, d = params.mu, params.rho, params.omega, params.d
    f = incidence(S, I)
    fS = incidence.dS(S, I)
    fI = incidence.dI(S, I)
    g = fI * I + f
    return np.array([
        -mu * l1 + fS * I * (l2 - l1),
        1.0 - g * l1 + l3 * v1 + rho * l4 + (g - rho - v1 - mu) * l2,
        omega * l2 - (omega + mu) * l3,
        1.0 + v2 * l2 - (v2 + mu + d) * l4,
    ])


def project_controls(states: Trajectory, adjoints: AdjointState, weights: CostWeights,
                     bounds: ControlBounds) -> ControlSchedule:
    _same_grid(states.grid, adjoints.grid)
    I = states.values[:, 1]
    A = states.values[:, 3]
    v1 = (adjoints.lam2 - adjoints.lam3) * I / (2.0 * weights.B1 * weights.delta)
    v2 = (adjoints.lam4 - adjoints.lam2) * A / (2.0 * weights.B2 * weights.delta)
    return ControlSchedule(states.grid,
                           np.clip(v1, 0.0, bounds.v1_max),
                           np.clip(v2, 0.0, bounds.v2_max))


def cost_functional(states: Trajectory, controls: ControlSchedule, weights: CostWeights) -> float:
    """Composite trapezoid approximation of J."""
    _same_grid(states.grid, controls.grid)
    I = states.values[:, 1]
    A = states.values[:, 3]
    integrand = (I + A + weights.B1 * weights.delta * controls.v1**2
                 + weights.B2 * weights.delta * controls.v2**2)
    return float(trapezoid(integrand, dx=states.grid.h))


def solve_states(params: SicaParams, incidence: Incidence, y0, alpha, controls: ControlSchedule
                 ) -> Trajectory:
    g = controls.grid
    field_ = controlled_rhs(params, incidence, _node_values(g, controls.v1),
                            _node_values(g, controls.v2))
    return caputo_pece_solve(field_, y0, alpha, g)


def solve_adjoints(params: SicaParams, incidence: Incidence, states: Trajectory, alpha,
                   controls: ControlSchedule) -> AdjointState:
    """Backward costate pass: zero initial data in t' = tf - t, histories re-indexed k <-> n-k."""
    _same_grid(states.grid, controls.grid)
    g = states.grid
    Yr = states.values[::-1]
    v1r = controls.v1[::-1]
    v2r = controls.v2[::-1]
    t0, h, n = g.t0, g.h, g.n_steps

    def field_(tau, lam):
        k = min(max(int(round((tau - t0) / h)), 0), n)
        return adjoint_rhs(params, incidence, Yr[k], v1r[k], v2r[k], lam)

    rev = caputo_pece_solve(field_, np.zeros(4), alpha, g)
    return AdjointState(g, rev.values[::-1].copy())


def _max_rel_change(new, old) -> float:
    new = np.asarray(new)
    old = np.asarray(old)
    return float(np.max(np.abs(new - old) / np.maximum(np.abs(new), REL_FLOOR)))


def forward_backward_sweep(params: SicaParams, incidence: Incidence, y0, alpha, grid: TimeGrid,
                           weights: CostWeights, bounds: ControlBounds = ControlBounds(),
                           config: SweepConfig = SweepConfig(),
                           initial_controls: Optional[ControlSchedule] = None) -> FocpSolution:
    """Solve the optimality system by relaxed forward-backward sweeps.

    Each iteration solves the states under the current controls, the
    costates backward, and mixes the projected candidate into the controls
    (``relaxation`` is the weight kept on the previous controls). The
    returned states, costates and controls are mutually consistent: states
    and costates are those produced by the returned controls.

    Non-convergence is reported through ``converged=False``; a non-finite
    forward or backward pass raises :class:`SolverDivergenceError` with
    ``iteration`` set.
    """
    alpha = check_order(alpha)
    y0 = np.asarray(y0, dtype=float)
    controls = initial_controls or ControlSchedule.zeros(grid)
    _same_grid(controls.grid, grid)
    r = config.relaxation
    prev_states = None
    history = []
    converged = False
    it = 0
    for it in range(1, config.max_iterations + 1):
        used = controls
        try:
            states = solve_states(params, incidence, y0, alpha, controls)
            adjoints = solve_adjoints(params, incidence, states, alpha, controls)
        except SolverDivergenceError as exc:
            raise SolverDivergenceError(exc.node, iteration=it) from exc
        cand = project_controls(states, adjoints, weights, bounds)
        new = ControlSchedule(grid, r * controls.v1 + (1 - r) * cand.v1,
                              r * controls.v2 + (1 - r) * cand.v2)
        d_ctrl = max(_max_rel_change(new.v1, controls.v1), _max_rel_change(new.v2, controls.v2))
        d_state = math.inf if prev_states is None else _max_rel_change(states.values, prev_states)
        history.append({"iteration": it, "state_change": d_state, "control_change": d_ctrl})
        log.debug("sweep %d: state change %.3e, control change %.3e", it, d_state, d_ctrl)
        if max(d_state, d_ctrl) <= config.tolerance:
            converged = True
            break
        prev_states = states.values
        controls = new

    if not converged:
        log.warning("sweep did not converge in %d iterations (alpha=%s)", it, alpha)
    return FocpSolution(
        states=states,
        adjoints=adjoints,
        controls=used,
        cost=cost_functional(states, used, weights),
        iterations=it,
        converged=converged,
        alpha=alpha,
        history=history,
    )
