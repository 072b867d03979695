"""Analytics of (a, b) impulse policies: performance function, the optimal
pair, and the resulting value function.

An (a, b) policy pays the surplus down to a (net of the fixed cost beta)
whenever it reaches b. Its performance is proportional to the Parisian scale
function Z below b, with proportionality 1/slope where
slope(a, b) = (Z(b) - Z(a)) / (b - a - beta). The optimal pair minimizes that
slope; at the minimum the slope equals Z'(b*) and, unless a* = 0, also Z'(a*).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, SolverError
from .scale import ParisianScale

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_BRENT_RTOL = 4.0 * np.finfo(float).eps
_RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class Policy:
    """Pair (a, b): pay down to a whenever the surplus reaches b."""

    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise DomainError("policy levels must be finite")
        if self.a < 0:
            raise DomainError("a must be >= 0")

    def admissible(self, beta: float) -> bool:
        return self.b > self.a + beta


def cost_adjusted_slope(z: ParisianScale, beta: float, a: float, b: float) -> float:
    """(Z(b) - Z(a)) / (b - a - beta); the reciprocal of the policy's value coefficient."""
    if a < 0:
        raise DomainError("a must be >= 0")
    if b <= a + beta:
        raise DomainError("need b > a + beta (net payout must be positive)")
    return (z.value(b) - z.value(a)) / (b - a - beta)


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    """Golden-section minimum on [lo, hi], biased right on ties (rightmost minimizer)."""
    a, b = lo, hi
    h = b - a
    c = b - _GOLDEN * h
    d = a + _GOLDEN * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            h = b - a
            c = b - _GOLDEN * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _GOLDEN * h
            fd = f(d)
    return 0.5 * (a + b)


def rightmost_slope_minimizer(z: ParisianScale, search_hi: float = 1.0) -> float:
    """Rightmost global minimizer of Z' on [0, inf) (zero when Z' rises from 0).

    Z' is log-convex for the supported models, hence unimodal: grid bracketing
    followed by golden-section refinement to an interval of width <= 1e-10 is
    exact enough for everything downstream. `search_hi` is doubled until
    Z'(hi) > Z'(0), which must happen since Z' grows exponentially.
    """
    zp0 = z.deriv(0.0)
    hi = max(float(search_hi), 1e-6)
    for _ in range(200):
        if z.deriv(hi) > zp0:
            break
        hi *= 2.0
    else:
        raise SolverError("Z' never exceeded its value at 0; cannot bracket the minimum")
    xs = np.linspace(0.0, hi, 4097)
    vals = z.deriv(xs)
    i = vals.size - 1 - int(np.argmin(vals[::-1]))
    lo_b = xs[max(i - 1, 0)]
    hi_b = xs[min(i + 1, vals.size - 1)]
    x = _golden_min(lambda t: z.deriv(t), lo_b, hi_b, tol=1e-10)
    return 0.0 if x < 1e-9 else x


class ValueFunction:
    """Piecewise value function: coeff * Z(x) up to b_star, unit slope above.

    Callable; exposes analytic derivatives and its breakpoints for the
    generator checks. At x = b_star the Z-piece applies (the first derivative
    matches from both sides by construction).
    """

    def __init__(self, z: ParisianScale, b_star: float, coeff: float):
        self.z = z
        self.b_star = float(b_star)
        self.coeff = float(coeff)
        self.breakpoints = (0.0, self.b_star)
        self._level = self.coeff * z.value(self.b_star)

    def __call__(self, x):
        if np.isscalar(x) or getattr(x, "ndim", 1) == 0:
            x = float(x)
            if x <= self.b_star:
                return self.coeff * self.z.value(x)
            return x - self.b_star + self._level
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        mask = x <= self.b_star
        if mask.any():
            out[mask] = self.coeff * self.z.value(x[mask])
        if (~mask).any():
            out[~mask] = x[~mask] - self.b_star + self._level
        return out

    def derivative(self, x, order: int = 1):
        if np.isscalar(x) or getattr(x, "ndim", 1) == 0:
            x = float(x)
            if x <= self.b_star:
                return self.coeff * self.z.deriv(x, order)
            return 1.0 if order == 1 else 0.0
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        mask = x <= self.b_star
        if mask.any():
            out[mask] = self.coeff * self.z.deriv(x[mask], order)
        out[~mask] = 1.0 if order == 1 else 0.0
        return out


@dataclass(frozen=True)
class OptimalSolution:
    """Solved instance: optimal pair, value coefficient and solve residuals.

    residuals holds relative diagnostics: "optimality" (the scalar equation at
    b_star), "stationarity" (Z'(a*) vs Z'(b*), zero in the boundary case) and
    "identity" (slope(a*, b*) vs Z'(b*)).
    """

    a_star: float
    b_star: float
    c_star: float
    coeff: float
    boundary_case: bool
    residuals: dict = field(default_factory=dict)
    z: ParisianScale = None
    beta: float = float("nan")
    value: ValueFunction = None

    def to_dict(self) -> dict:
        return {
            "a_star": self.a_star,
            "b_star": self.b_star,
            "c_star": self.c_star,
            "coeff": self.coeff,
            "boundary_case": self.boundary_case,
            "residuals": dict(self.residuals),
        }


def _matching_lower_level(z: ParisianScale, c_star: float, zp_b: float) -> float:
    """The a in [0, c_star] with Z'(a) = Z'(b), clamped to 0 when Z'(0) <= Z'(b)."""
    if c_star == 0.0 or z.deriv(0.0) <= zp_b:
        return 0.0
    f = lambda a: z.deriv(a) - zp_b
    fc = f(c_star)
    if fc >= 0.0:
        # Z'(b) is within rounding of the minimum; the matching level is c_star
        return c_star
    return brentq(f, 0.0, c_star, xtol=1e-14, rtol=_BRENT_RTOL)


def optimal_pair(z: ParisianScale, beta: float, b_hi_init: float | None = None) -> OptimalSolution:
    """Minimize the cost-adjusted slope over admissible pairs.

    Reduction to one dimension: for b past the slope minimizer c*, the best
    lower level a(b) matches derivatives (Z'(a) = Z'(b)) or clamps to 0; the
    optimal b* is then the root of

        xi(b) = Z'(b) * (b - a(b) - beta) - (Z(b) - Z(a(b))),

    which is negative near c* and grows to +infinity, and whose root makes both
    first-order conditions hold simultaneously. The upper bracket is doubled
    until xi > 0; failure to bracket raises SolverError with an xi profile.
    """
    beta = float(beta)
    if not math.isfinite(beta) or beta <= 0:
        raise DomainError("beta must be finite and > 0")
    c = rightmost_slope_minimizer(z)

    def a_of_b(b: float) -> float:
        return _matching_lower_level(z, c, z.deriv(b))

    def xi(b: float) -> float:
        a = a_of_b(b)
        return z.deriv(b) * (b - a - beta) - (z.value(b) - z.value(a))

    b_lo = c + 1e-9 * max(1.0, c)
    hi = float(b_hi_init) if b_hi_init is not None else c + max(1.0, 2.0 * beta)
    if hi <= b_lo:
        hi = b_lo + max(1.0, 2.0 * beta)
    for _ in range(60):
        if xi(hi) > 0:
            break
        hi = c + 2.0 * (hi - c)
    else:
        profile = [(float(b), float(xi(b))) for b in np.linspace(b_lo, hi, 25)]
        raise SolverError(
            "could not bracket the optimal upper level after 60 doublings",
            diagnostics={"xi_profile": profile, "c_star": c, "beta": beta},
        )
    b_star = brentq(xi, b_lo, hi, xtol=1e-13, rtol=_BRENT_RTOL)
    a_star = a_of_b(b_star)
    boundary = a_star == 0.0

    zp_b = z.deriv(b_star)
    slope = cost_adjusted_slope(z, beta, a_star, b_star)
    res_opt = abs(xi(b_star)) / z.value(b_star)
    res_stat = 0.0 if boundary else abs(z.deriv(a_star) - zp_b) / zp_b
    res_ident = abs(slope - zp_b) / zp_b
    residuals = {"optimality": res_opt, "stationarity": res_stat, "identity": res_ident}
    if max(residuals.values()) > _RESIDUAL_TOL:
        raise SolverError("optimal pair residuals above tolerance", diagnostics=residuals)

    coeff = 1.0 / zp_b
    return OptimalSolution(
        a_star=float(a_star),
        b_star=float(b_star),
        c_star=float(c),
        coeff=float(coeff),
        boundary_case=bool(boundary),
        residuals=residuals,
        z=z,
        beta=beta,
        value=ValueFunction(z, b_star, coeff),
    )


def policy_performance(z: ParisianScale, beta: float, pol: Policy, x):
    """Expected discounted net dividends of the (a, b) policy started at x.

    Proportional to Z below b and linear with unit slope above; defined on the
    whole real line (no payments can occur before recovery when x < 0).
    """
    if not pol.admissible(beta):
        raise DomainError("policy is inadmissible: need b > a + beta and a >= 0")
    coeff = (pol.b - pol.a - beta) / (z.value(pol.b) - z.value(pol.a))
    if np.isscalar(x) or getattr(x, "ndim", 1) == 0:
        x = float(x)
        if x <= pol.b:
            return coeff * z.value(x)
        return x - pol.a - beta + coeff * z.value(pol.a)
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    mask = x <= pol.b
    if mask.any():
        out[mask] = coeff * z.value(x[mask])
    if (~mask).any():
        out[~mask] = x[~mask] - pol.a - beta + coeff * z.value(pol.a)
    return out


def value_function(sol: OptimalSolution, x):
    """Value of the solved problem at x; equals the optimal policy's performance."""
    return sol.value(x)
