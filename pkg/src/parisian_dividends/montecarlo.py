"""Monte Carlo simulation of the controlled surplus under an (a, b) policy
with Parisian ruin, used as an independent stochastic cross-check of the
analytic formulas.

Two schemes:

* ``exact_bv``  event-driven and bias-free for bounded-variation models
  (sigma = 0, mu > 0): between Poisson jump epochs the path is linear, so
  barrier hits, excursion recoveries and the Parisian clock comparison are all
  solved in closed form.
* ``euler``     fixed-step scheme for sigma > 0 with thinned jumps and
  linearly interpolated crossing times. Intra-step excursions can be missed;
  the bias is O(dt) and is exercised by a dt-refinement test.

Reproducibility: path k draws from ``SeedSequence((master_seed, k))`` (a
counter-based stream split), results land in per-path slots and are reduced in
fixed order, so estimates are bit-identical for any worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DomainError, ModelError
from .levy_model import ControlParams, LevyModel
from .policy import Policy

SCHEMES = ("exact_bv", "euler")
_EULER_MAX_DT = 1e-2


def default_horizon(q: float) -> float:
    """Default truncation horizon 400/q; an explicit horizon is required when q = 0."""
    if q <= 0:
        raise DomainError("an explicit horizon is required when q = 0")
    return 400.0 / q


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings; `horizon` truncates paths (bound reported per estimate)."""

    n_paths: int
    master_seed: int
    horizon: float
    scheme: str = "exact_bv"
    dt: float = 1e-3
    antithetic: bool = False

    def __post_init__(self):
        if int(self.n_paths) < 1:
            raise DomainError("n_paths must be >= 1")
        object.__setattr__(self, "n_paths", int(self.n_paths))
        seed = int(self.master_seed)
        if not 0 <= seed < 2**64:
            raise DomainError("master_seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "master_seed", seed)
        object.__setattr__(self, "horizon", float(self.horizon))
        if not math.isfinite(self.horizon) or self.horizon <= 0:
            raise DomainError("horizon must be finite and > 0")
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}")
        object.__setattr__(self, "dt", float(self.dt))
        if self.scheme == "euler" and not 0 < self.dt <= _EULER_MAX_DT:
            raise DomainError(f"euler requires 0 < dt <= {_EULER_MAX_DT}")
        if self.antithetic and self.n_paths % 2:
            raise DomainError("antithetic sampling needs an even n_paths")


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with its standard error, 95% CI and truncation bound."""

    mean: float
    std_error: float
    n: int
    ci95: tuple[float, float]
    truncation_bound: float


@dataclass(frozen=True)
class PathSample:
    """Per-path outputs in path-index order."""

    payout: np.ndarray
    ruined: np.ndarray
    ruin_time: np.ndarray


@njit(cache=True, nogil=True)
def _draw_exp(rng, mirror, rate):
    u = rng.random()
    if mirror:
        u = 1.0 - u
    return -np.log1p(-u) / rate


@njit(cache=True, nogil=True)
def _draw_jump(rng, mirror, cum_w, alphas):
    u = rng.random()
    if mirror:
        u = 1.0 - u
    k = 0
    while k < cum_w.size - 1 and u >= cum_w[k]:
        k += 1
    return _draw_exp(rng, mirror, alphas[k])


@njit(cache=True, nogil=True)
def _value_path_exact(rng, mirror, mu, lam, cum_w, alphas, q, p, a, b, beta, x0, t_max):
    """One controlled path, bounded-variation exact scheme.

    Returns (discounted net payout, ruined, ruin time; inf when truncated at
    the horizon or still alive).
    """
    payout = 0.0
    t = 0.0
    u = x0
    if u > b:
        payout += u - a - beta
        u = a
    in_exc = u < 0.0
    exc_start = 0.0
    clock = 0.0
    if in_exc:
        clock = _draw_exp(rng, mirror, p)
    while True:
        if not in_exc:
            if lam > 0.0:
                e_rem = _draw_exp(rng, mirror, lam)
            else:
                e_rem = np.inf
            # barrier hits before the next jump: motion is deterministic upward
            while True:
                dt_hit = (b - u) / mu
                if dt_hit > e_rem:
                    break
                t_hit = t + dt_hit
                if t_hit >= t_max:
                    return payout, False, np.inf
                payout += (b - a - beta) * np.exp(-q * t_hit)
                e_rem -= dt_hit
                t = t_hit
                u = a
            if not np.isfinite(e_rem):
                # jump-free model: dividends repeat until the horizon
                continue
            t_next = t + e_rem
            if t_next >= t_max:
                return payout, False, np.inf
            u += mu * e_rem
            t = t_next
            u -= _draw_jump(rng, mirror, cum_w, alphas)
            if u < 0.0:
                in_exc = True
                exc_start = t
                clock = _draw_exp(rng, mirror, p)
        else:
            rec = -u / mu
            if lam > 0.0:
                e_next = _draw_exp(rng, mirror, lam)
            else:
                e_next = np.inf
            c_rem = clock - (t - exc_start)
            if c_rem <= rec and c_rem <= e_next:
                t_ruin = exc_start + clock
                if t_ruin >= t_max:
                    return payout, False, np.inf
                return payout, True, t_ruin
            if rec <= e_next:
                if t + rec >= t_max:
                    return payout, False, np.inf
                t += rec
                u = 0.0
                in_exc = False
            else:
                if t + e_next >= t_max:
                    return payout, False, np.inf
                t += e_next
                u += mu * e_next
                u -= _draw_jump(rng, mirror, cum_w, alphas)


@njit(cache=True, nogil=True)
def _passage_path_exact(rng, mirror, mu, lam, cum_w, alphas, q, p, x0, b, t_max):
    """Uncontrolled first passage above b before Parisian ruin (exact scheme).

    Returns (exp(-q*tau) on success else 0, reached flag).
    """
    t = 0.0
    u = x0
    if u >= b:
        return 1.0, True
    in_exc = u < 0.0
    exc_start = 0.0
    clock = 0.0
    if in_exc:
        clock = _draw_exp(rng, mirror, p)
    while True:
        if not in_exc:
            if lam > 0.0:
                e_rem = _draw_exp(rng, mirror, lam)
            else:
                e_rem = np.inf
            dt_hit = (b - u) / mu
            if dt_hit <= e_rem:
                t_hit = t + dt_hit
                if t_hit >= t_max:
                    return 0.0, False
                return np.exp(-q * t_hit), True
            t_next = t + e_rem
            if t_next >= t_max:
                return 0.0, False
            u += mu * e_rem
            t = t_next
            u -= _draw_jump(rng, mirror, cum_w, alphas)
            if u < 0.0:
                in_exc = True
                exc_start = t
                clock = _draw_exp(rng, mirror, p)
        else:
            rec = -u / mu
            if lam > 0.0:
                e_next = _draw_exp(rng, mirror, lam)
            else:
                e_next = np.inf
            c_rem = clock - (t - exc_start)
            if c_rem <= rec and c_rem <= e_next:
                return 0.0, False
            if rec <= e_next:
                if t + rec >= t_max:
                    return 0.0, False
                t += rec
                u = 0.0
                in_exc = False
            else:
                if t + e_next >= t_max:
                    return 0.0, False
                t += e_next
                u += mu * e_next
                u -= _draw_jump(rng, mirror, cum_w, alphas)


@njit(cache=True, nogil=True)
def _value_path_euler(rng, mirror, mu, sigma, lam, cum_w, alphas, q, p, a, b, beta,
                      x0, t_max, dt):
    """One controlled path on a fixed grid; crossings located by linear
    interpolation inside the step, jumps lumped at step ends."""
    payout = 0.0
    u = x0
    if u > b:
        payout += u - a - beta
        u = a
    in_exc = u < 0.0
    exc_start = 0.0
    clock = 0.0
    if in_exc:
        clock = _draw_exp(rng, mirror, p)
    if lam > 0.0:
        next_jump = _draw_exp(rng, mirror, lam)
    else:
        next_jump = np.inf
    sqdt = np.sqrt(dt)
    n_steps = int(t_max / dt)
    for k in range(n_steps):
        t0 = k * dt
        t1 = t0 + dt
        du = mu * dt
        if sigma > 0.0:
            zn = rng.standard_normal()
            if mirror:
                zn = -zn
            du += sigma * sqdt * zn
        jump_sum = 0.0
        while next_jump <= dt:
            jump_sum += _draw_jump(rng, mirror, cum_w, alphas)
            next_jump += _draw_exp(rng, mirror, lam)
        next_jump -= dt
        u_new = u + du - jump_sum
        if in_exc:
            if u_new >= 0.0:
                frac = u / (u - u_new) if u_new > u else 1.0
                t_rec = t0 + frac * dt
                if t_rec - exc_start >= clock:
                    return payout, True, exc_start + clock
                in_exc = False
            elif t1 - exc_start >= clock:
                return payout, True, exc_start + clock
        elif u_new < 0.0:
            frac = u / (u - u_new)
            exc_start = t0 + frac * dt
            clock = _draw_exp(rng, mirror, p)
            in_exc = True
            if t1 - exc_start >= clock:
                return payout, True, exc_start + clock
        if not in_exc and u_new > b:
            frac = (b - u) / (u_new - u)
            t_hit = t0 + frac * dt
            payout += (b - a - beta) * np.exp(-q * t_hit)
            u_new = a
        u = u_new
    return payout, False, np.inf


@njit(cache=True, nogil=True)
def _passage_path_euler(rng, mirror, mu, sigma, lam, cum_w, alphas, q, p, x0, b, t_max, dt):
    u = x0
    if u >= b:
        return 1.0, True
    in_exc = u < 0.0
    exc_start = 0.0
    clock = 0.0
    if in_exc:
        clock = _draw_exp(rng, mirror, p)
    if lam > 0.0:
        next_jump = _draw_exp(rng, mirror, lam)
    else:
        next_jump = np.inf
    sqdt = np.sqrt(dt)
    n_steps = int(t_max / dt)
    for k in range(n_steps):
        t0 = k * dt
        t1 = t0 + dt
        du = mu * dt
        if sigma > 0.0:
            zn = rng.standard_normal()
            if mirror:
                zn = -zn
            du += sigma * sqdt * zn
        jump_sum = 0.0
        while next_jump <= dt:
            jump_sum += _draw_jump(rng, mirror, cum_w, alphas)
            next_jump += _draw_exp(rng, mirror, lam)
        next_jump -= dt
        u_new = u + du - jump_sum
        if in_exc:
            if u_new >= 0.0:
                frac = u / (u - u_new) if u_new > u else 1.0
                t_rec = t0 + frac * dt
                if t_rec - exc_start >= clock:
                    return 0.0, False
                in_exc = False
            elif t1 - exc_start >= clock:
                return 0.0, False
        elif u_new < 0.0:
            frac = u / (u - u_new)
            exc_start = t0 + frac * dt
            clock = _draw_exp(rng, mirror, p)
            in_exc = True
            if t1 - exc_start >= clock:
                return 0.0, False
        if not in_exc and u_new > b:
            frac = (b - u) / (u_new - u)
            return np.exp(-q * (t0 + frac * dt)), True
        u = u_new
    return 0.0, False


def _rng_for(master_seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((master_seed, stream)))


def _jump_arrays(model: LevyModel) -> tuple[np.ndarray, np.ndarray]:
    if not model.has_jumps:
        return np.ones(1), np.ones(1)
    cum_w = np.cumsum(np.asarray(model.jump_weights, dtype=float))
    cum_w[-1] = 1.0
    return cum_w, np.asarray(model.jump_rates, dtype=float)


def _check_scheme(model: LevyModel, scheme: str) -> None:
    if scheme == "exact_bv" and not (model.sigma == 0 and model.mu > 0):
        raise ModelError("exact_bv requires sigma = 0 and mu > 0")


@dataclass(frozen=True)
class _PathTask:
    """Picklable description of one batch of paths.

    Results depend only on (master_seed, path index), so any partition of the
    index range across workers reproduces the same per-path values.
    """

    kind: str  # "value" or "passage"
    scheme: str
    mu: float
    sigma: float
    lam: float
    cum_w: np.ndarray
    alphas: np.ndarray
    q: float
    p: float
    a: float
    b: float
    beta: float
    x0: float
    horizon: float
    dt: float
    master_seed: int
    antithetic: bool

    def run(self, lo: int, hi: int) -> np.ndarray:
        out = np.empty((hi - lo, 3))
        for i in range(lo, hi):
            stream, mirror = (i // 2, bool(i % 2)) if self.antithetic else (i, False)
            rng = _rng_for(self.master_seed, stream)
            if self.kind == "value":
                if self.scheme == "exact_bv":
                    pay, ruined, t_ruin = _value_path_exact(
                        rng, mirror, self.mu, self.lam, self.cum_w, self.alphas,
                        self.q, self.p, self.a, self.b, self.beta, self.x0, self.horizon)
                else:
                    pay, ruined, t_ruin = _value_path_euler(
                        rng, mirror, self.mu, self.sigma, self.lam, self.cum_w,
                        self.alphas, self.q, self.p, self.a, self.b, self.beta,
                        self.x0, self.horizon, self.dt)
            else:
                if self.scheme == "exact_bv":
                    pay, ruined = _passage_path_exact(
                        rng, mirror, self.mu, self.lam, self.cum_w, self.alphas,
                        self.q, self.p, self.x0, self.b, self.horizon)
                else:
                    pay, ruined = _passage_path_euler(
                        rng, mirror, self.mu, self.sigma, self.lam, self.cum_w,
                        self.alphas, self.q, self.p, self.x0, self.b, self.horizon,
                        self.dt)
                t_ruin = math.inf
            out[i - lo, 0] = pay
            out[i - lo, 1] = 1.0 if ruined else 0.0
            out[i - lo, 2] = t_ruin
        return out


def _run_task_range(task: _PathTask, lo: int, hi: int) -> np.ndarray:
    return task.run(lo, hi)


def _run_paths(task: _PathTask, n_paths: int, n_workers: int) -> np.ndarray:
    """Execute the task over all path indices; multi-worker runs use a process
    pool with per-path results reassembled in index order."""
    if n_workers <= 1:
        return task.run(0, n_paths)
    bounds = np.linspace(0, n_paths, n_workers + 1).astype(int)
    ranges = [(int(lo), int(hi)) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    out = np.empty((n_paths, 3))
    with ProcessPoolExecutor(max_workers=len(ranges)) as pool:
        futures = {pool.submit(_run_task_range, task, lo, hi): (lo, hi) for lo, hi in ranges}
        for fut in as_completed(futures):
            lo, hi = futures[fut]
            out[lo:hi] = fut.result()
    return out


def simulate_controlled_path(model: LevyModel, params: ControlParams, pol: Policy,
                             x0: float, path_seed: int, scheme: str | None = None,
                             dt: float = 1e-3, horizon: float | None = None):
    """Simulate one controlled path; returns (discounted payout, ruined, ruin time).

    Uses its own stream derived from ``path_seed``; equals path 0 of a batch
    run with ``master_seed = path_seed``.
    """
    if not pol.admissible(params.beta):
        raise DomainError("policy is inadmissible: need b > a + beta and a >= 0")
    if scheme is None:
        scheme = "exact_bv" if model.sigma == 0 else "euler"
    if scheme not in SCHEMES:
        raise DomainError(f"scheme must be one of {SCHEMES}")
    _check_scheme(model, scheme)
    if horizon is None:
        horizon = default_horizon(params.q)
    cum_w, alphas = _jump_arrays(model)
    rng = _rng_for(int(path_seed), 0)
    if scheme == "exact_bv":
        return _value_path_exact(rng, False, model.mu, model.jump_rate, cum_w, alphas,
                                 params.q, params.p, pol.a, pol.b, params.beta,
                                 float(x0), float(horizon))
    return _value_path_euler(rng, False, model.mu, model.sigma, model.jump_rate, cum_w,
                             alphas, params.q, params.p, pol.a, pol.b, params.beta,
                             float(x0), float(horizon), float(dt))


def simulate_paths(model: LevyModel, params: ControlParams, pol: Policy, x0: float,
                   cfg: SimConfig, n_workers: int = 1) -> PathSample:
    """All per-path results for the controlled process (path-index order)."""
    if not pol.admissible(params.beta):
        raise DomainError("policy is inadmissible: need b > a + beta and a >= 0")
    _check_scheme(model, cfg.scheme)
    cum_w, alphas = _jump_arrays(model)
    task = _PathTask(kind="value", scheme=cfg.scheme, mu=model.mu, sigma=model.sigma,
                     lam=model.jump_rate, cum_w=cum_w, alphas=alphas, q=params.q,
                     p=params.p, a=pol.a, b=pol.b, beta=params.beta, x0=float(x0),
                     horizon=cfg.horizon, dt=cfg.dt, master_seed=cfg.master_seed,
                     antithetic=cfg.antithetic)
    raw = _run_paths(task, cfg.n_paths, n_workers)
    return PathSample(payout=raw[:, 0].copy(), ruined=raw[:, 1] > 0.5,
                      ruin_time=raw[:, 2].copy())


def _summarize(values: np.ndarray, n_paths: int, antithetic: bool,
               truncation_bound: float) -> MCEstimate:
    # antithetic pairs are dependent; standard errors come from pair averages
    vals = values.reshape(-1, 2).mean(axis=1) if antithetic else values
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
    return MCEstimate(mean=mean, std_error=se, n=n_paths,
                      ci95=(mean - 1.96 * se, mean + 1.96 * se),
                      truncation_bound=truncation_bound)


def _value_truncation_bound(params: ControlParams, pol: Policy, model: LevyModel,
                            cfg: SimConfig) -> float:
    if params.q <= 0:
        return math.inf
    net = pol.b - pol.a - params.beta
    delta_min = (pol.b - pol.a) / model.mu if cfg.scheme == "exact_bv" else cfg.dt
    return net * math.exp(-params.q * cfg.horizon) / -math.expm1(-params.q * delta_min)


def estimate_value(model: LevyModel, params: ControlParams, pol: Policy, x0: float,
                   cfg: SimConfig, n_workers: int = 1) -> MCEstimate:
    """Monte Carlo estimate of the policy's expected discounted net dividends."""
    sample = simulate_paths(model, params, pol, x0, cfg, n_workers=n_workers)
    bound = _value_truncation_bound(params, pol, model, cfg)
    return _summarize(sample.payout, cfg.n_paths, cfg.antithetic, bound)


def estimate_first_passage(model: LevyModel, q: float, p: float, x: float, b: float,
                           cfg: SimConfig, n_workers: int = 1) -> MCEstimate:
    """Estimate E_x[exp(-q * tau_b) ; tau_b before Parisian ruin] for the
    uncontrolled process; the analytic value is Z(x)/Z(b)."""
    if x > b:
        raise DomainError("need x <= b")
    _check_scheme(model, cfg.scheme)
    cum_w, alphas = _jump_arrays(model)
    task = _PathTask(kind="passage", scheme=cfg.scheme, mu=model.mu, sigma=model.sigma,
                     lam=model.jump_rate, cum_w=cum_w, alphas=alphas, q=float(q),
                     p=float(p), a=0.0, b=float(b), beta=0.0, x0=float(x),
                     horizon=cfg.horizon, dt=cfg.dt, master_seed=cfg.master_seed,
                     antithetic=cfg.antithetic)
    raw = _run_paths(task, cfg.n_paths, n_workers)
    bound = math.exp(-float(q) * cfg.horizon)
    return _summarize(raw[:, 0], cfg.n_paths, cfg.antithetic, bound)
