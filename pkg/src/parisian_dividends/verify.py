"""Numerical certification of the solved value function.

Checks the two optimality hypotheses on a grid: the generator (in)equality

    (Gamma - q - p*1{x<0}) v(x)  = 0   below the payout barrier,
                                 <= 0  above it,

and the transaction-gap condition v(y) - v(x) >= y - x - beta for y >= x >= 0,
plus continuous differentiability of v at the barrier. Derivatives of v come
from its exponential-sum representation; only the jump integral is numerical
(adaptive quadrature), so the residuals isolate quadrature error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, QuadratureError
from .levy_model import ControlParams, LevyModel
from .policy import OptimalSolution, Policy
from .scale import ParisianScale

EQUALITY_TOL = 1e-6
SLACK_TOL = 1e-8
GAP_TOL = 1e-9
SMOOTH_FIT_TOL = 1e-10
_QUAD_REL_TOL = 1e-10


def _jump_density(model: LevyModel, z: float) -> float:
    acc = 0.0
    for w, a in zip(model.jump_weights, model.jump_rates):
        acc += w * a * math.exp(-a * z)
    return model.jump_rate * acc


def generator_apply(model: LevyModel, v, x: float, quad_rel_tol: float = _QUAD_REL_TOL) -> float:
    """Apply the infinitesimal generator to a piecewise-smooth v at x.

    Gamma v(x) = mu v'(x) + sigma^2/2 v''(x) + int_0^inf (v(x-z) - v(x)) nu(dz).

    v must be callable with analytic `derivative(x, order)` and declared
    `breakpoints`; the jump integral is split at the points where x - z crosses
    a breakpoint and extends to infinity via adaptive quadrature. Raises
    QuadratureError when the accumulated quadrature error estimate exceeds
    1e-8 * (1 + |v(x)|).
    """
    x = float(x)
    vx = float(v(x))
    out = model.mu * float(v.derivative(x, 1))
    if model.sigma > 0:
        out += 0.5 * model.sigma * model.sigma * float(v.derivative(x, 2))
    if not model.has_jumps:
        return out

    def integrand(zz: float) -> float:
        return (float(v(x - zz)) - vx) * _jump_density(model, zz)

    edges = [0.0] + sorted(x - b for b in v.breakpoints if x - b > 0)
    total = 0.0
    err = 0.0
    eps_abs = 1e-14 * (1.0 + abs(vx)) * max(model.jump_rate, 1.0)
    for lo, hi in zip(edges, edges[1:]):
        val, e = quad(integrand, lo, hi, epsabs=eps_abs, epsrel=quad_rel_tol, limit=200)
        total += val
        err += e
    val, e = quad(integrand, edges[-1], np.inf, epsabs=eps_abs, epsrel=quad_rel_tol, limit=200)
    total += val
    err += e
    if err > 1e-8 * (1.0 + abs(vx)):
        raise QuadratureError("jump-integral quadrature above tolerance", achieved_tol=err)
    return out + total


@dataclass(frozen=True)
class HJBGrid:
    """Grid specification; points stay a `breakpoint_offset` away from 0 and b_star."""

    x_min: float = -3.0
    n_below: int = 200
    span_above: float = 5.0
    n_above: int = 100
    breakpoint_offset: float = 1e-6


@dataclass(frozen=True)
class HJBReport:
    """Residuals of the generator check along the grid.

    max_equality_violation is the largest |residual| / (1 + |v|) below b_star;
    min_slack is the smallest -(residual) above b_star, so the inequality holds
    when min_slack >= -SLACK_TOL.
    """

    grid: np.ndarray
    residuals: np.ndarray
    regimes: tuple[str, ...]
    max_equality_violation: float
    min_slack: float
    quadrature_tol: float
    equality_tol: float = EQUALITY_TOL
    slack_tol: float = SLACK_TOL

    @property
    def passes_equality(self) -> bool:
        return self.max_equality_violation <= self.equality_tol

    @property
    def passes_inequality(self) -> bool:
        return self.min_slack >= -self.slack_tol

    @property
    def passes(self) -> bool:
        return self.passes_equality and self.passes_inequality

    def rows(self):
        for x, r, reg in zip(self.grid, self.residuals, self.regimes):
            yield float(x), float(r), reg


def hjb_check(model: LevyModel, params: ControlParams, sol: OptimalSolution,
              grid: HJBGrid | None = None) -> HJBReport:
    """Evaluate the generator residuals of the solved value function.

    Below b_star the discount rate is q (and q + p on the negative half-line)
    and the residual must vanish; above b_star the residual must be
    nonpositive. Violations are reported, never raised.
    """
    grid = grid or HJBGrid()
    b = sol.b_star
    off = grid.breakpoint_offset
    below = np.linspace(grid.x_min, b - off, grid.n_below)
    below = np.where(np.abs(below) < off, below + 2.0 * off, below)
    above = np.linspace(b + off, b + grid.span_above, grid.n_above)
    v = sol.value

    xs, res, regimes = [], [], []
    max_eq = 0.0
    for x in below:
        rate = params.q + (params.p if x < 0 else 0.0)
        r = generator_apply(model, v, float(x)) - rate * float(v(x))
        xs.append(float(x))
        res.append(r)
        regimes.append("neg" if x < 0 else "band")
        max_eq = max(max_eq, abs(r) / (1.0 + abs(float(v(x)))))
    min_slack = math.inf
    for x in above:
        r = generator_apply(model, v, float(x)) - params.q * float(v(x))
        xs.append(float(x))
        res.append(r)
        regimes.append("above")
        min_slack = min(min_slack, -r)
    return HJBReport(
        grid=np.asarray(xs),
        residuals=np.asarray(res),
        regimes=tuple(regimes),
        max_equality_violation=float(max_eq),
        min_slack=float(min_slack),
        quadrature_tol=_QUAD_REL_TOL,
    )


@dataclass(frozen=True)
class GapReport:
    """Minimum of v(y) - v(x) - (y - x - beta) over the grid pairs y >= x >= 0."""

    min_gap: float
    worst_x: float
    worst_y: float
    n_pairs: int
    tol: float = GAP_TOL

    @property
    def passes(self) -> bool:
        return self.min_gap >= -self.tol


def value_gap_check(v, beta: float, x_grid, y_grid) -> GapReport:
    """Sweep the transaction-gap condition over all pairs y >= x of the grids."""
    x = np.asarray(x_grid, dtype=float)
    y = np.asarray(y_grid, dtype=float)
    if (x < 0).any() or (y < 0).any():
        raise DomainError("gap grids must be nonnegative")
    vx = np.asarray(v(x), dtype=float)
    vy = np.asarray(v(y), dtype=float)
    gaps = vy[None, :] - vx[:, None] - (y[None, :] - x[:, None] - beta)
    valid = y[None, :] >= x[:, None]
    gaps = np.where(valid, gaps, np.inf)
    i, j = np.unravel_index(int(np.argmin(gaps)), gaps.shape)
    return GapReport(
        min_gap=float(gaps[i, j]),
        worst_x=float(x[i]),
        worst_y=float(y[j]),
        n_pairs=int(valid.sum()),
    )


def smooth_fit_check(sol: OptimalSolution) -> float:
    """|v'(b_star-) - v'(b_star+)| for the solved pair; 0 up to rounding."""
    left = sol.coeff * sol.z.deriv(sol.b_star, 1)
    return abs(left - 1.0)


def policy_kink(z: ParisianScale, beta: float, pol: Policy) -> float:
    """Derivative mismatch of a generic policy's performance at its barrier b.

    Strictly positive away from the optimal pair; the smooth-fit counterpart
    for suboptimal policies.
    """
    if not pol.admissible(beta):
        raise DomainError("policy is inadmissible: need b > a + beta and a >= 0")
    coeff = (pol.b - pol.a - beta) / (z.value(pol.b) - z.value(pol.a))
    return abs(coeff * z.deriv(pol.b, 1) - 1.0)
