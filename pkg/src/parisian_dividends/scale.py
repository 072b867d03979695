"""Exact exponential-sum representations of the q-scale function W and the
Parisian scale function Z.

For the hyperexponential family psi(theta) - r is a rational function whose
real roots are all simple, so W is a finite sum of exponentials with residue
coefficients 1/psi'(theta_j), and Z follows from W by an integral that is
exact term by term. Everything downstream (optimizer, verifier) evaluates
these representations without any numerical transform inversion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRootsError, DomainError, ModelError, SolverError
from .levy_model import ControlParams, LevyModel, _bracketed_newton, _psi, _psi_prime, right_inverse

MIN_ROOT_SEPARATION = 1e-9
_ROOT_RESIDUAL_FACTOR = 1e-12


@dataclass(frozen=True, eq=False)
class ExpSum:
    """Finite sum  x -> sum_j c_j * exp(theta_j * x)  on a stated domain.

    Exponents must be pairwise distinct (separation > 1e-9); evaluation and
    differentiation are exact term-wise operations.
    """

    coefficients: np.ndarray
    exponents: np.ndarray
    domain: tuple[float, float] = (0.0, math.inf)

    def __post_init__(self):
        coeff = np.asarray(self.coefficients, dtype=float).copy()
        expo = np.asarray(self.exponents, dtype=float).copy()
        if coeff.shape != expo.shape or coeff.ndim != 1 or coeff.size == 0:
            raise DomainError("coefficients and exponents must be equal-length 1-d arrays")
        if not (np.all(np.isfinite(coeff)) and np.all(np.isfinite(expo))):
            raise DomainError("ExpSum terms must be finite")
        gaps = np.diff(np.sort(expo))
        if gaps.size and gaps.min() <= MIN_ROOT_SEPARATION:
            raise DegenerateRootsError(
                "exponents closer than 1e-9; perturb the model parameters to separate the roots"
            )
        coeff.flags.writeable = False
        expo.flags.writeable = False
        object.__setattr__(self, "coefficients", coeff)
        object.__setattr__(self, "exponents", expo)

    def value(self, x, deriv: int = 0):
        """Evaluate the sum (or its deriv-th term-wise derivative) at x.

        Accepts a scalar or an ndarray; returns the matching type.
        """
        c = self.coefficients if deriv == 0 else self.coefficients * self.exponents**deriv
        if np.isscalar(x) or getattr(x, "ndim", 1) == 0:
            return float(np.dot(c, np.exp(self.exponents * float(x))))
        x = np.asarray(x, dtype=float)
        return np.exp(np.multiply.outer(x, self.exponents)) @ c

    __call__ = value

    def derivative(self, order: int = 1) -> "ExpSum":
        return ExpSum(self.coefficients * self.exponents**order, self.exponents, self.domain)

    def laplace_transform(self, theta: float) -> float:
        """Term-wise transform sum_j c_j / (theta - theta_j); needs theta > max exponent."""
        theta = float(theta)
        if theta <= self.exponents.max():
            raise DomainError("transform only converges for theta beyond the largest exponent")
        return float(np.sum(self.coefficients / (theta - self.exponents)))


def _walk_to_sign(f, anchor: float, direction: float, span: float, want_positive: bool) -> float:
    """Halve a step from `anchor` toward `direction` until f has the wanted sign.

    Used to step off a pole (where f diverges with a known sign) or off a zero.
    """
    step = span
    for _ in range(200):
        x = anchor + direction * step
        fx = f(x)
        if math.isfinite(fx) and (fx > 0) == want_positive:
            return x
        step *= 0.5
    raise SolverError(f"could not find sign {'+' if want_positive else '-'} near {anchor}")


def _negative_roots(model: LevyModel, r: float) -> list[float]:
    """All real roots of psi = r in (-inf, 0), one per pole gap plus, when
    sigma > 0, one more beyond the smallest pole."""

    def f(t):
        return _psi(model, t) - r

    def df(t):
        return _psi_prime(model, t)

    tol = _ROOT_RESIDUAL_FACTOR * max(1.0, abs(r))
    alphas = model.jump_rates if model.has_jumps else ()
    roots: list[float] = []

    if alphas:
        # interval (-alpha_1, 0): psi -> +inf at the pole, psi(0)=0 <= r
        a1 = alphas[0]
        lo = _walk_to_sign(f, -a1, +1.0, a1 * 0.5, want_positive=True)
        if r > 0:
            hi = 0.0
        else:
            hi = _walk_to_sign(f, 0.0, -1.0, min(a1, 1.0) * 0.25, want_positive=False)
        roots.append(_bracketed_newton(f, df, lo, hi, residual_tol=tol))
        # gaps (-alpha_{i+1}, -alpha_i): psi runs from +inf down to -inf
        for a_lo, a_hi in zip(alphas[1:], alphas[:-1]):
            width = (a_lo - a_hi) * 0.5
            lo = _walk_to_sign(f, -a_lo, +1.0, width, want_positive=True)
            hi = _walk_to_sign(f, -a_hi, -1.0, width, want_positive=False)
            roots.append(_bracketed_newton(f, df, lo, hi, residual_tol=tol))

    if model.sigma > 0:
        # beyond the smallest pole (or anywhere < 0 for a jump-free model) the
        # Gaussian term dominates, giving one more sign change
        if alphas:
            am = alphas[-1]
            hi = _walk_to_sign(f, -am, -1.0, am * 0.5, want_positive=False)
        else:
            hi = 0.0 if r > 0 else _walk_to_sign(f, 0.0, -1.0, 0.25, want_positive=False)
        lo = hi
        for _ in range(200):
            lo = 2.0 * lo - max(1.0, abs(hi))
            if f(lo) > 0:
                break
        else:
            raise SolverError("could not bracket the leftmost root")
        roots.append(_bracketed_newton(f, df, lo, hi, residual_tol=tol))
    return roots


def laplace_exponent_roots(model: LevyModel, r: float) -> np.ndarray:
    """All real solutions of psi(theta) = r for r > 0, sorted descending.

    The first entry is the right inverse at r; with m mixture components there
    are m negative roots interlacing the poles -alpha_i, plus one more when
    sigma > 0. Pole interlacing guarantees one simple root per bracket, so the
    count always matches the degree of the underlying polynomial.
    """
    r = float(r)
    if not math.isfinite(r) or r <= 0:
        raise DomainError("r must be finite and > 0")
    roots = [right_inverse(model, r)]
    roots.extend(_negative_roots(model, r))
    out = np.sort(np.asarray(roots, dtype=float))[::-1]
    _check_separation(out)
    _check_residuals(model, out, r)
    return out


def _check_separation(roots: np.ndarray) -> None:
    gaps = np.diff(np.sort(roots))
    if gaps.size and gaps.min() <= MIN_ROOT_SEPARATION:
        raise DegenerateRootsError(
            "roots closer than 1e-9; perturb the model parameters to separate them"
        )


def _check_residuals(model: LevyModel, roots: np.ndarray, r: float) -> None:
    tol = 1e-10 * max(1.0, abs(r))
    for t in roots:
        if abs(_psi(model, float(t)) - r) > tol:
            raise SolverError(f"root residual above tolerance at theta={t}")


def scale_function(model: LevyModel, q: float) -> ExpSum:
    """The q-scale function W on [0, inf): sum_j exp(theta_j x) / psi'(theta_j)
    over the roots of psi = q.

    W(0) is 0 for unbounded variation (sigma > 0) and 1/mu otherwise. Requires
    q > 0, or q = 0 with strictly positive net drift.
    """
    q = float(q)
    if not math.isfinite(q) or q < 0:
        raise DomainError("q must be finite and >= 0")
    if q == 0:
        if model.drift_at_zero <= 0:
            raise ModelError("q = 0 requires a strictly positive net drift")
        roots = np.sort(np.asarray([0.0] + _negative_roots(model, 0.0)))[::-1]
        _check_separation(roots)
        _check_residuals(model, roots, 0.0)
    else:
        roots = laplace_exponent_roots(model, q)
    coeff = np.array([1.0 / _psi_prime(model, float(t)) for t in roots])
    return ExpSum(coeff, roots, domain=(0.0, math.inf))


@dataclass(frozen=True, eq=False)
class ParisianScale:
    """The Parisian scale function Z for rates (q, p).

    Piecewise exact: an exponential sum on [0, inf) and the single exponential
    exp(phi_pq * x) on (-inf, 0], where phi_pq is the right inverse of psi at
    p + q. Z is continuous with Z(0) = 1, strictly positive and strictly
    increasing; when sigma > 0 it is also C^1 at 0.
    """

    pos_part: ExpSum
    neg_exponent: float
    q: float
    p: float

    def value(self, x):
        if np.isscalar(x) or getattr(x, "ndim", 1) == 0:
            x = float(x)
            if x >= 0:
                return self.pos_part.value(x)
            return math.exp(self.neg_exponent * x)
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        mask = x >= 0
        if mask.any():
            out[mask] = self.pos_part.value(x[mask])
        if (~mask).any():
            out[~mask] = np.exp(self.neg_exponent * x[~mask])
        return out

    def deriv(self, x, order: int = 1):
        """Term-wise derivative of the active piece; at x = 0 the right piece
        is used. For sigma = 0 models the second derivative at 0 is one-sided."""
        if order not in (0, 1, 2):
            raise DomainError("order must be 0, 1 or 2")
        if order == 0:
            return self.value(x)
        if np.isscalar(x) or getattr(x, "ndim", 1) == 0:
            x = float(x)
            if x >= 0:
                return self.pos_part.value(x, deriv=order)
            return self.neg_exponent**order * math.exp(self.neg_exponent * x)
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        mask = x >= 0
        if mask.any():
            out[mask] = self.pos_part.value(x[mask], deriv=order)
        if (~mask).any():
            out[~mask] = self.neg_exponent**order * np.exp(self.neg_exponent * x[~mask])
        return out

    def eval(self, x, deriv: int = 0):
        return self.deriv(x, order=deriv) if deriv else self.value(x)


def parisian_scale(model: LevyModel, params: ControlParams) -> ParisianScale:
    """Build Z for (q, p) from W by exact term-wise integration.

    Each W-term exp(theta_j x)/psi'(theta_j) integrates against
    p * exp(-phi_pq y) to the coefficient p / (psi'(theta_j) (phi_pq - theta_j));
    the integral converges because phi_pq > phi_q = max_j theta_j.
    """
    w = scale_function(model, params.q)
    phi_pq = right_inverse(model, params.p + params.q)
    denom = phi_pq - w.exponents
    if denom.min() <= MIN_ROOT_SEPARATION:
        raise DegenerateRootsError(
            "right inverse at p+q nearly collides with a scale-function exponent"
        )
    pos = ExpSum(params.p * w.coefficients / denom, w.exponents, domain=(0.0, math.inf))
    return ParisianScale(pos_part=pos, neg_exponent=phi_pq, q=params.q, p=params.p)
