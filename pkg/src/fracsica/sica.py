"""The SICA HIV/AIDS model with a general incidence function.

Compartments are ordered (S, I, C, A): susceptible, HIV-infected without
AIDS symptoms, infected under ART (chronic), and AIDS. All populations are
fractions of the initial total population.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Dict, NamedTuple, Optional

import numpy as np

from .exceptions import (
    EquilibriumInconsistencyError,
    IncidenceEvaluationError,
    InvariantViolationError,
)
from .frackit import TimeGrid, Trajectory, caputo_pece_solve, check_order

POSITIVITY_TOL = 1e-9
BOUND_TOL = 1e-9
MARGINAL_TOL = 1e-9


@dataclass(frozen=True)
class SicaParams:
    """Epidemiological rates (per year) of the SICA model."""

    Lambda: float
    mu: float
    phi: float
    rho: float
    sigma: float
    omega: float
    d: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{f.name} must be finite and non-negative, got {v!r}")
        if self.mu <= 0:
            raise ValueError("mu must be strictly positive")

    @classmethod
    def moroccan_fit(cls) -> "SicaParams":
        """Rates fitted to Moroccan data (beta = 0.755 belongs to the incidence)."""
        mu = 1 / 74.02
        return cls(Lambda=2.19 * mu, mu=mu, phi=1.0, rho=0.1, sigma=0.33, omega=0.09, d=1.0)

    @property
    def xi1(self) -> float:
        return self.rho + self.phi + self.mu

    @property
    def xi2(self) -> float:
        return self.omega + self.mu

    @property
    def xi3(self) -> float:
        return self.sigma + self.mu + self.d

    @property
    def script_d(self) -> float:
        mu, rho, phi, om, d = self.mu, self.rho, self.phi, self.omega, self.d
        xi2, xi3 = self.xi2, self.xi3
        return mu * (xi2 * (xi3 + rho) + phi * xi3 + rho * d) + rho * om * d

    def derived(self) -> "DerivedConstants":
        return DerivedConstants(self.xi1, self.xi2, self.xi3, self.script_d)


class DerivedConstants(NamedTuple):
    xi1: float
    xi2: float
    xi3: float
    script_d: float


class SicaState(NamedTuple):
    S: float
    I: float
    C: float
    A: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


# ---------------------------------------------------------------------------
# Incidence functions
# ---------------------------------------------------------------------------

class Incidence:
    """Incidence rate f(S, I) together with its analytic partial derivatives.

    Subclasses implement ``__call__``, ``dS`` and ``dI``; each must accept
    scalars or NumPy arrays.
    """

    kind = "custom"

    def __call__(self, S, I):
        raise NotImplementedError

    def dS(self, S, I):
        raise NotImplementedError

    def dI(self, S, I):
        raise NotImplementedError

    def params(self) -> Dict[str, float]:
        return {}


@dataclass(frozen=True)
class Bilinear(Incidence):
    """f = beta * S."""

    beta: float
    kind = "bilinear"

    def __call__(self, S, I):
        return self.beta * S + 0.0 * I

    def dS(self, S, I):
        return self.beta + 0.0 * (S + I)

    def dI(self, S, I):
        return 0.0 * (S + I)

    def params(self):
        return {"beta": self.beta}


@dataclass(frozen=True)
class Saturated(Incidence):
    """f = beta * S / (1 + a * I)."""

    beta: float
    a: float
    kind = "saturated"

    def __call__(self, S, I):
        return self.beta * S / (1.0 + self.a * I)

    def dS(self, S, I):
        return self.beta / (1.0 + self.a * I) + 0.0 * S

    def dI(self, S, I):
        return -self.a * self.beta * S / (1.0 + self.a * I) ** 2

    def params(self):
        return {"beta": self.beta, "a": self.a}


@dataclass(frozen=True)
class HattafYousfi(Incidence):
    """f = beta * S / (a0 + a1*S + a2*I)."""

    beta: float
    a0: float
    a1: float
    a2: float
    kind = "hattaf_yousfi"

    def _den(self, S, I):
        return self.a0 + self.a1 * S + self.a2 * I

    def __call__(self, S, I):
        return self.beta * S / self._den(S, I)

    def dS(self, S, I):
        den = self._den(S, I)
        return self.beta * (self.a0 + self.a2 * I) / den**2

    def dI(self, S, I):
        return -self.a2 * self.beta * S / self._den(S, I) ** 2

    def params(self):
        return {"beta": self.beta, "a0": self.a0, "a1": self.a1, "a2": self.a2}


class FunctionIncidence(Incidence):
    """Wrap three plain callables as an incidence model."""

    def __init__(self, f, dfdS, dfdI, name="custom"):
        self._f, self._dS, self._dI = f, dfdS, dfdI
        self.kind = name

    def __call__(self, S, I):
        return self._f(S, I)

    def dS(self, S, I):
        return self._dS(S, I)

    def dI(self, S, I):
        return self._dI(S, I)


INCIDENCE_KINDS = {
    "bilinear": Bilinear,
    "saturated": Saturated,
    "hattaf_yousfi": HattafYousfi,
}


def make_incidence(kind: str, **params) -> Incidence:
    try:
        cls = INCIDENCE_KINDS[kind]
    except KeyError:
        raise ValueError(
            f"unknown incidence kind {kind!r}; expected one of {sorted(INCIDENCE_KINDS)}"
        ) from None
    return cls(**params)


# ---------------------------------------------------------------------------
# Right-hand side, equilibria, R0
# ---------------------------------------------------------------------------

def sica_rhs(params: SicaParams, incidence: Incidence):
    """Vector field (t, y) -> dy of the uncontrolled model."""
    Lam, mu, phi, rho = params.Lambda, params.mu, params.phi, params.rho
    sigma, omega = params.sigma, params.omega
    xi1, xi2, xi3 = params.xi1, params.xi2, params.xi3

    def rhs(t, y):
        S, I, C, A = y
        inf = incidence(S, I) * I
        return np.array([
            Lam - mu * S - inf,
            inf - xi1 * I + sigma * A + omega * C,
            phi * I - xi2 * C,
            rho * I - xi3 * A,
        ])

    return rhs


def basic_reproduction_number(params: SicaParams, incidence: Incidence) -> float:
    f0 = float(incidence(params.Lambda / params.mu, 0.0))
    return f0 * params.xi2 * params.xi3 / params.script_d


def disease_free_equilibrium(params: SicaParams) -> SicaState:
    return SicaState(params.Lambda / params.mu, 0.0, 0.0, 0.0)


def endemic_equilibrium(params: SicaParams, incidence: Incidence,
                        tol: float = 1e-12) -> Optional[SicaState]:
    """Interior equilibrium E*, or None when R0 <= 1.

    Eliminating C and A from the equilibrium equations forces
    f(S*, I*) = D / (xi2 xi3) =: kappa and I* = (Lambda - mu S*) / kappa,
    leaving one scalar equation in S that is bisected on (0, Lambda/mu).
    """
    if basic_reproduction_number(params, incidence) <= 1.0:
        return None
    kappa = params.script_d / (params.xi2 * params.xi3)
    Lam, mu = params.Lambda, params.mu
    s_max = Lam / mu

    def g(S):
        return float(incidence(S, (Lam - mu * S) / kappa)) - kappa

    lo, hi = 0.0, s_max
    g_lo, g_hi = g(lo), g(hi)
    if not (g_lo < 0.0 < g_hi):
        raise EquilibriumInconsistencyError(
            f"no sign change on (0, Lambda/mu): g(0)={g_lo:.3e}, g(Lambda/mu)={g_hi:.3e}; "
            "the incidence probably violates H2/H3"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    S = 0.5 * (lo + hi)
    I = (Lam - mu * S) / kappa
    state = SicaState(S, I, params.phi * I / params.xi2, params.rho * I / params.xi3)
    residual = np.max(np.abs(sica_rhs(params, incidence)(0.0, state)))
    if residual > 1e-9:
        raise EquilibriumInconsistencyError(f"equilibrium residual {residual:.3e} exceeds 1e-9")
    return state


# ---------------------------------------------------------------------------
# Linearisation and fractional stability
# ---------------------------------------------------------------------------

def jacobian(params: SicaParams, incidence: Incidence, at) -> np.ndarray:
    """Jacobian of the uncontrolled field at ``at`` (full linearisation in S and I)."""
    S, I, _, _ = at
    f = float(incidence(S, I))
    fS = float(incidence.dS(S, I))
    fI = float(incidence.dI(S, I))
    mu = params.mu
    dinf_dI = fI * I + f
    return np.array([
        [-mu - fS * I, -dinf_dI, 0.0, 0.0],
        [fS * I, dinf_dI - params.xi1, params.omega, params.sigma],
        [0.0, params.phi, -params.xi2, 0.0],
        [0.0, params.rho, 0.0, -params.xi3],
    ])


def dfe_characteristic_coefficients(params: SicaParams, incidence: Incidence):
    """(a1, a2, a3) of the cubic factor lambda^3 + a1 lambda^2 + a2 lambda + a3 at E_f."""
    f0 = float(incidence(params.Lambda / params.mu, 0.0))
    xi1, xi2, xi3 = params.xi1, params.xi2, params.xi3
    a1 = xi1 + xi2 + xi3 - f0
    a2 = (xi1 * xi2 + xi1 * xi3 + xi2 * xi3 - (xi2 + xi3) * f0
          - params.phi * params.omega - params.rho * params.sigma)
    a3 = (1.0 - basic_reproduction_number(params, incidence)) * params.script_d
    return a1, a2, a3


def characteristic_polynomial(M: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial coefficients (highest first), Faddeev-LeVerrier."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    coeffs = [1.0]
    B = np.eye(n)
    for k in range(1, n + 1):
        AB = M @ B
        c = -np.trace(AB) / k
        coeffs.append(c)
        B = AB + c * np.eye(n)
    return np.array(coeffs)


def polynomial_roots(coeffs, polish_tol: float = 1e-10, max_newton: int = 50) -> np.ndarray:
    """Companion-matrix roots followed by Newton polishing on the original polynomial."""
    coeffs = np.asarray(coeffs, dtype=float)
    roots = np.roots(coeffs).astype(complex)
    dcoeffs = np.polyder(coeffs)
    for i, r in enumerate(roots):
        for _ in range(max_newton):
            p = np.polyval(coeffs, r)
            dp = np.polyval(dcoeffs, r)
            if dp == 0:
                break
            step = p / dp
            r = r - step
            if abs(step) <= polish_tol * max(1.0, abs(r)):
                break
        roots[i] = r
    return roots


def eigenvalues(M: np.ndarray) -> np.ndarray:
    return polynomial_roots(characteristic_polynomial(M))


@dataclass
class StabilityReport:
    eigenvalues: np.ndarray
    alpha: float
    classification: str
    margin: float
    zero_eigenvalue: bool = False
    equilibrium: Optional[SicaState] = None

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "classification": self.classification,
            "margin": self.margin,
            "zero_eigenvalue": self.zero_eigenvalue,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "equilibrium": None if self.equilibrium is None else list(self.equilibrium),
        }


def matignon_classify(eigvals, alpha) -> StabilityReport:
    """Stable iff every |arg(lambda)| > alpha*pi/2, within +/- 1e-9 is marginal."""
    alpha = check_order(alpha)
    eigvals = np.atleast_1d(np.asarray(eigvals, dtype=complex))
    if not np.all(np.isfinite(eigvals)):
        raise ValueError("eigenvalues must be finite")
    zero = bool(np.any(eigvals == 0))
    threshold = alpha * math.pi / 2.0
    nonzero = eigvals[eigvals != 0]
    margin = float(np.min(np.abs(np.angle(nonzero)) - threshold)) if nonzero.size else 0.0
    if zero:
        margin = min(margin, 0.0) if nonzero.size else 0.0
    if margin < -MARGINAL_TOL:
        cls = "unstable"
    elif zero or margin <= MARGINAL_TOL:
        cls = "marginal"
    else:
        cls = "stable"
    return StabilityReport(eigvals, alpha, cls, margin, zero)


def stability_at(params: SicaParams, incidence: Incidence, state, alpha) -> StabilityReport:
    report = matignon_classify(eigenvalues(jacobian(params, incidence, state)), alpha)
    report.equilibrium = SicaState(*map(float, state))
    return report


# ---------------------------------------------------------------------------
# Hypotheses H1-H4
# ---------------------------------------------------------------------------

@dataclass
class HypothesisResult:
    name: str
    passed: Optional[bool]
    witness: Optional[tuple] = None
    value: Optional[float] = None
    note: str = ""

    def to_dict(self):
        return {"name": self.name, "passed": self.passed,
                "witness": None if self.witness is None else list(self.witness),
                "value": self.value, "note": self.note}


@dataclass
class HypothesisReport:
    results: Dict[str, HypothesisResult] = field(default_factory=dict)
    density: int = 200
    region: tuple = ()

    @property
    def all_passed(self) -> bool:
        return all(r.passed is not False for r in self.results.values())

    def __getitem__(self, name):
        return self.results[name]

    def to_dict(self):
        return {"density": self.density, "region": list(self.region),
                "all_passed": self.all_passed,
                "hypotheses": {k: v.to_dict() for k, v in self.results.items()}}


def _eval_grid(fn, S, I):
    with np.errstate(all="ignore"):
        try:
            vals = np.asarray(fn(S, I), dtype=float) * np.ones_like(S)
        except Exception as exc:
            raise IncidenceEvaluationError((float(S.flat[0]), float(I.flat[0])), str(exc)) from exc
    bad = ~np.isfinite(vals)
    if bad.any():
        idx = np.argwhere(bad)[0]
        raise IncidenceEvaluationError((float(S[tuple(idx)]), float(I[tuple(idx)])))
    return vals


def _worst(name, violation, S, I, mask, note="", threshold=1e-12):
    """Largest violation on ``mask``; values above ``threshold`` fail."""
    v = np.where(mask, violation, -np.inf)
    idx = np.unravel_index(np.argmax(v), v.shape)
    worst = float(v[idx])
    if worst > threshold:
        return HypothesisResult(name, False, (float(S[idx]), float(I[idx])), worst, note)
    return HypothesisResult(name, True, None, None, note)


def check_hypotheses(incidence: Incidence, s_max: float, i_max: float,
                     i_star: Optional[float] = None, density: int = 200) -> HypothesisReport:
    """Scan H1-H4 on a ``density x density`` lattice over [0, s_max] x [0, i_max].

    The lattice includes the boundary lines S = 0 and I = 0. This is a
    falsifier, not a proof: passing means no violation beyond 1e-12 was
    found at the lattice points. H4 needs the endemic level ``i_star``; when
    it is None H4 is reported as not applicable (``passed is None``).
    """
    s = np.linspace(0.0, s_max, density)
    i = np.linspace(0.0, i_max, density)
    S, I = np.meshgrid(s, i, indexing="ij")
    report = HypothesisReport(density=density, region=(0.0, s_max, 0.0, i_max))

    f = _eval_grid(incidence, S, I)
    report.results["H1"] = _worst("H1", np.abs(f), S, I, S == 0.0, "f(0, I) = 0")

    fS = _eval_grid(incidence.dS, S, I)
    # strict inequality: df/dS below 1e-12 counts as a violation
    report.results["H2"] = _worst("H2", -fS, S, I, S > 0.0, "df/dS > 0 for S > 0",
                                  threshold=-1e-12)

    fI = _eval_grid(incidence.dI, S, I)
    report.results["H3"] = _worst("H3", fI, S, I, np.ones_like(S, dtype=bool), "df/dI <= 0")

    if i_star is None or i_star <= 0:
        report.results["H4"] = HypothesisResult("H4", None, note="no endemic level supplied")
    else:
        interior = (S > 0.0) & (I > 0.0)
        fstar = _eval_grid(incidence, S, np.full_like(I, i_star))
        with np.errstate(all="ignore"):
            prod = (1.0 - f / fstar) * (fstar / f - I / i_star)
        prod = np.where(interior, prod, 0.0)
        if not np.all(np.isfinite(prod)):
            idx = np.argwhere(~np.isfinite(prod))[0]
            raise IncidenceEvaluationError((float(S[tuple(idx)]), float(I[tuple(idx)])),
                                           "H4 expression not evaluable")
        report.results["H4"] = _worst("H4", prod, S, I, interior,
                                      "(1 - f/f*)(f*/f - I/I*) <= 0")
    return report


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

def check_state_invariants(traj: Trajectory, Lambda: float, mu: float) -> None:
    """Raise InvariantViolationError if a node is negative or exceeds N(0) + Lambda/mu."""
    vals = traj.values
    neg = np.argwhere(vals < -POSITIVITY_TOL)
    if neg.size:
        k, j = neg[0]
        raise InvariantViolationError(
            int(k), f"component {'SICA'[j]} = {vals[k, j]:.3e} is negative; reduce the step size")
    total = vals.sum(axis=1)
    bound = total[0] + Lambda / mu + BOUND_TOL
    over = np.argwhere(total > bound)
    if over.size:
        k = int(over[0, 0])
        raise InvariantViolationError(k, f"N = {total[k]:.6g} exceeds N(0) + Lambda/mu = {bound:.6g}")


def simulate(params: SicaParams, incidence: Incidence, y0, alpha, grid: TimeGrid) -> Trajectory:
    """PECE solution of the uncontrolled model with positivity/boundedness post-checks."""
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (4,) or np.any(y0 < 0):
        raise ValueError(f"initial state must be four non-negative values, got {y0}")
    traj = caputo_pece_solve(sica_rhs(params, incidence), y0, alpha, grid)
    check_state_invariants(traj, params.Lambda, params.mu)
    return traj
