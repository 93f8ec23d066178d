"""The three d=1 benchmark problems."""

from __future__ import annotations

import numpy as np

from .assembly import ExactSolution, ProblemData

BENCHMARKS = ("smooth1d", "pulse1d", "jump1d")

PULSE_KAPPA = 1000.0
PULSE_MU = 0.2


def smooth1d() -> ProblemData:
    """Manufactured smooth solution from u(t,x) = t^2 sin(pi x)/2."""

    def v(t, x):
        return t * np.sin(np.pi * x)

    def sigma(t, x):
        return 0.5 * t * t * np.pi * np.cos(np.pi * x)

    def v_grad(t, x):
        return np.sin(np.pi * x), t * np.pi * np.cos(np.pi * x)

    def sigma_grad(t, x):
        return (t * np.pi * np.cos(np.pi * x),
                -0.5 * t * t * np.pi ** 2 * np.sin(np.pi * x))

    def f(t, x):
        return np.sin(np.pi * x) * (1.0 + 0.5 * np.pi ** 2 * t * t)

    zero_q = lambda t, x: np.zeros_like(t)
    zero_omega = lambda x: np.zeros_like(x)
    return ProblemData(f, zero_q, zero_omega, zero_omega,
                       exact=ExactSolution(v, sigma, v_grad, sigma_grad),
                       name="smooth1d")


def pulse1d() -> ProblemData:
    """Gaussian pulse initial data; no exact solution is known."""

    def v0(x):
        d = x - PULSE_MU
        return 2.0 * PULSE_KAPPA * d * np.exp(-PULSE_KAPPA * d * d)

    def sigma0(x):
        return -v0(x)

    zero_q = lambda t, x: np.zeros_like(t)
    return ProblemData(zero_q, zero_q, v0, sigma0, exact=None, sharp=True,
                       name="pulse1d")


def _jump_region(t, x):
    """Classify points of Q into the four diagonal triangles.

    Returns 1..4 for T1..T4 (boundary points go to the lowest-numbered
    triangle) where T1 is the region below both diagonals x=t and x=1-t,
    T2 right, T3 top, T4 left.
    """
    t = np.asarray(t, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    region = np.full(np.broadcast(t, x).shape, 4, dtype=np.int8)
    in_t3 = (x >= t) & (x >= 1.0 - t)
    region[in_t3] = 3
    in_t2 = (t >= x) & (t >= 1.0 - x)
    region[in_t2] = 2
    in_t1 = (x <= t) & (x <= 1.0 - t)
    region[in_t1] = 1
    return region


def jump1d() -> ProblemData:
    """Non-matching initial/boundary data with a piecewise-constant solution."""

    def v(t, x):
        region = _jump_region(t, x)
        return np.where(region == 2, -1.0, np.where(region == 4, 1.0, 0.0))

    def sigma(t, x):
        region = _jump_region(t, x)
        return np.where(region == 1, 1.0, np.where(region == 3, -1.0, 0.0))

    zero_q = lambda t, x: np.zeros_like(t)
    zero_grad = lambda t, x: (np.zeros_like(t), np.zeros_like(t))
    return ProblemData(zero_q, zero_q,
                       v0=lambda x: np.ones_like(x),
                       sigma0=lambda x: np.zeros_like(x),
                       exact=ExactSolution(v, sigma, zero_grad, zero_grad),
                       name="jump1d")


def get_problem(name: str) -> ProblemData:
    if name not in BENCHMARKS:
        raise ValueError(f"unknown benchmark {name!r}; choose from {BENCHMARKS}")
    return {"smooth1d": smooth1d, "pulse1d": pulse1d, "jump1d": jump1d}[name]()
