"""Reference computations that share no code with the package under test."""

import math

import mpmath
import numpy as np
from scipy.integrate import quad


def ml_quadrature(alpha, x):
    """E_alpha(-x) for 0 < alpha < 1, x >= 0, from its completely monotone integral form.

    E_alpha(-x) = int_0^inf exp(-r x^(1/alpha)) K(r) dr with
    K(r) = r^(alpha-1) sin(alpha pi) / (pi (r^(2 alpha) + 2 r^alpha cos(alpha pi) + 1)).
    """
    if x == 0:
        return 1.0
    s = x ** (1.0 / alpha)
    sa, ca = math.sin(alpha * math.pi), math.cos(alpha * math.pi)

    def kern(r):
        ra = r**alpha
        return math.exp(-r * s) * ra / r * sa / (math.pi * (ra * ra + 2 * ra * ca + 1))

    lo, _ = quad(kern, 0.0, 1.0, limit=400, epsabs=1e-14, epsrel=1e-13)
    hi, _ = quad(kern, 1.0, np.inf, limit=400, epsabs=1e-14, epsrel=1e-13)
    return lo + hi


def ml_series_hp(alpha, z, dps=60):
    """Truncated series at high precision, with the remainder bounded explicitly.

    Returns (value, bound) where bound majorises the neglected tail by a
    geometric series once consecutive term ratios drop below 1/2.
    """
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        zm = mpmath.mpf(z)
        terms = []
        k = 0
        while True:
            t = zm**k / mpmath.gamma(a * k + 1)
            terms.append(t)
            ratio = abs(zm) * mpmath.gamma(a * k + 1) / mpmath.gamma(a * (k + 1) + 1)
            if k > 5 and ratio < 0.5 and abs(t) < mpmath.mpf(10) ** (-30):
                bound = abs(t) * ratio / (1 - ratio)
                return float(mpmath.fsum(terms)), float(bound)
            k += 1


def rk4(f, y0, t):
    """Classical fourth-order Runge-Kutta on the nodes ``t``."""
    y = np.empty((len(t), len(y0)))
    y[0] = y0
    for k in range(len(t) - 1):
        h = t[k + 1] - t[k]
        tk, yk = t[k], y[k]
        k1 = f(tk, yk)
        k2 = f(tk + h / 2, yk + h / 2 * k1)
        k3 = f(tk + h / 2, yk + h / 2 * k2)
        k4 = f(tk + h, yk + h * k3)
        y[k + 1] = yk + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def sica_field(p, beta):
    """Controlled SICA field with bilinear incidence; u(t) returns (v1, v2)."""

    def make(u):
        def f(t, y):
            S, I, C, A = y
            v1, v2 = u(t)
            inf = beta * S * I
            return np.array([
                p.Lambda - p.mu * S - inf,
                inf - (p.rho + v1 + p.mu) * I + v2 * A + p.omega * C,
                v1 * I - (p.omega + p.mu) * C,
                p.rho * I - (v2 + p.mu + p.d) * A,
            ])
        return f

    return make


def hamiltonian(p, f, x, lam, v, B1, B2, delta):
    """H = L + lam . g for the controlled model with a generic incidence f(S, I)."""
    S, I, C, A = x
    v1, v2 = v
    inf = f(S, I) * I
    g = np.array([
        p.Lambda - p.mu * S - inf,
        inf - (p.rho + v1 + p.mu) * I + v2 * A + p.omega * C,
        v1 * I - (p.omega + p.mu) * C,
        p.rho * I - (v2 + p.mu + p.d) * A,
    ])
    return I + A + B1 * delta * v1**2 + B2 * delta * v2**2 + float(np.dot(lam, g))


def hamiltonian_gradient(p, f, x, lam, v, B1, B2, delta, eps=1e-6):
    x = np.asarray(x, dtype=float)
    grad = np.empty(4)
    for j in range(4):
        step = eps * max(1.0, abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += step
        xm[j] -= step
        grad[j] = (hamiltonian(p, f, xp, lam, v, B1, B2, delta)
                   - hamiltonian(p, f, xm, lam, v, B1, B2, delta)) / (2 * step)
    return grad


def classical_fbsm(p, beta, y0, tf, n, B1, B2, delta, vmax=1.0, tol=1e-6, relax=0.5,
                   max_iter=500):
    """Integer-order forward-backward sweep with RK4 in both directions.

    Controls live on the nodes and are linearly interpolated at half steps.
    The costate equation lam' = -dH/dx runs backward from lam(tf) = 0.
    Returns (t, states, v1, v2, J).
    """
    t = np.linspace(0.0, tf, n + 1)
    v1 = np.zeros(n + 1)
    v2 = np.zeros(n + 1)
    make = sica_field(p, beta)
    for _ in range(max_iter):
        def u(s):
            return np.interp(s, t, v1), np.interp(s, t, v2)

        x = rk4(make(u), np.asarray(y0, float), t)

        def costate(s, lam):
            S, I, C, A = (np.interp(s, t, x[:, j]) for j in range(4))
            w1, w2 = u(s)
            l1, l2, l3, l4 = lam
            return -np.array([
                -p.mu * l1 + beta * I * (l2 - l1),
                1 + beta * S * (l2 - l1) - (p.rho + w1 + p.mu) * l2 + w1 * l3 + p.rho * l4,
                p.omega * l2 - (p.omega + p.mu) * l3,
                1 + w2 * l2 - (w2 + p.mu + p.d) * l4,
            ])

        lam = rk4(lambda s, y: -costate(tf - s, y), np.zeros(4), t)[::-1]
        c1 = np.clip((lam[:, 1] - lam[:, 2]) * x[:, 1] / (2 * B1 * delta), 0, vmax)
        c2 = np.clip((lam[:, 3] - lam[:, 1]) * x[:, 3] / (2 * B2 * delta), 0, vmax)
        n1 = relax * v1 + (1 - relax) * c1
        n2 = relax * v2 + (1 - relax) * c2
        change = max(np.max(np.abs(n1 - v1)), np.max(np.abs(n2 - v2)))
        v1, v2 = n1, n2
        if change < tol:
            break
    x = rk4(make(lambda s: (np.interp(s, t, v1), np.interp(s, t, v2))), np.asarray(y0, float), t)
    integrand = x[:, 1] + x[:, 3] + B1 * delta * v1**2 + B2 * delta * v2**2
    J = float(np.sum((integrand[1:] + integrand[:-1]) / 2) * (t[1] - t[0]))
    return t, x, v1, v2, J
