"""Independent reference computations shared by several test modules."""

from __future__ import annotations

import math

import numpy as np


def midpoint_c1(beta, var_eps=1.0, m=200_000):
    """Independent oracle: u = x/(1+x) maps the integral to
    int_0^1 u^-beta (1-u)^(2beta-2) du; split at 1/2 and remove both endpoint
    singularities by power substitutions, then use the midpoint rule."""
    k = (np.arange(m) + 0.5) / m
    a = 1.0 - beta
    b = 2.0 * beta - 1.0
    # left half: u = v^(1/a), v in (0, (1/2)^a)
    vmax = 0.5 ** a
    u = (k * vmax) ** (1.0 / a)
    left = np.sum((1.0 - u) ** (2 * beta - 2)) * vmax / m / a
    # right half: 1 - u = w^(1/b), w in (0, (1/2)^b)
    wmax = 0.5 ** b
    u = 1.0 - (k * wmax) ** (1.0 / b)
    right = np.sum(u ** -beta) * wmax / m / b
    denom = left + right
    return math.sqrt(var_eps * (1 - (beta - 0.5)) * (1 - (2 * beta - 1)) / denom)
