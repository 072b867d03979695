"""Shared model zoo and solved-instance fixtures."""
from __future__ import annotations

import math

import pytest

from parisian_dividends import ControlParams, LevyModel, optimal_pair, parisian_scale

# Bounded-variation single-exponential model (premium rate 1, claims Exp(1) at rate 1/2).
M_CL = LevyModel(mu=1.0, sigma=0.0, jump_rate=0.5, jump_weights=(1.0,), jump_rates=(1.0,))

# Pure Brownian model with psi(theta) = theta^2.
M_BM = LevyModel(mu=0.0, sigma=math.sqrt(2.0), jump_rate=0.0)

# Two-component bounded-variation mixture.
M_MIX_BV = LevyModel(mu=1.2, sigma=0.0, jump_rate=1.0, jump_weights=(0.5, 0.5),
                     jump_rates=(1.0, 3.0))

# Unbounded variation with a two-component mixture.
M_MIX_UBV = LevyModel(mu=0.5, sigma=1.0, jump_rate=0.8, jump_weights=(0.6, 0.4),
                      jump_rates=(2.0, 5.0))

# Three jump components plus a Gaussian part.
M_THREE = LevyModel(mu=2.0, sigma=0.7, jump_rate=1.5, jump_weights=(0.3, 0.5, 0.2),
                    jump_rates=(0.8, 2.0, 6.0))

ALL_MODELS = {
    "cl": M_CL,
    "bm": M_BM,
    "mix_bv": M_MIX_BV,
    "mix_ubv": M_MIX_UBV,
    "three": M_THREE,
}

RATE_COMBOS = [(0.05, 0.2), (0.1, 0.5), (0.02, 1.0)]

# The workhorse instance used throughout: M_CL with (q, p, beta) = (0.1, 0.5, 0.2).
CL_PARAMS = ControlParams(q=0.1, p=0.5, beta=0.2)


@pytest.fixture(scope="session")
def cl_scale():
    return parisian_scale(M_CL, CL_PARAMS)


@pytest.fixture(scope="session")
def cl_solution(cl_scale):
    return optimal_pair(cl_scale, CL_PARAMS.beta)


@pytest.fixture(scope="session")
def ubv_instance():
    params = ControlParams(q=0.05, p=0.2, beta=0.15)
    z = parisian_scale(M_MIX_UBV, params)
    return M_MIX_UBV, params, z, optimal_pair(z, params.beta)
