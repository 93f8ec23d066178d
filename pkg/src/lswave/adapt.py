"""Doerfler marking and the Solve-Estimate-Mark-Refine driver."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .assembly import ProblemData, assemble
from .estimator import IndicatorField, compute_errors, compute_indicators
from .fem import build_space
from .mesh import create_uniform_mesh, refine_marked, refine_uniform
from .solver import SolverError, solve_spd

DEFAULT_THETA = 0.25


@dataclass
class StudyRecord:
    step: int
    n_dofs: int
    n_elements: int
    eta: float
    err_v_L2: Optional[float] = None
    err_sigma_L2: Optional[float] = None
    err_V: Optional[float] = None
    seconds: float = 0.0


def doerfler_mark(indicators: IndicatorField | np.ndarray, theta: float) -> np.ndarray:
    """Minimal bulk-criterion set, as element ids in marking order.

    Elements are taken by decreasing indicator (ties by ascending id)
    until the marked set carries a theta-fraction of the total squared
    estimator.  An all-zero indicator vector marks element 0 so the
    adaptive loop always makes progress.
    """
    if not 0 < theta < 1:
        raise ValueError(f"theta must be in (0,1), got {theta}")
    eta2 = indicators.eta2 if isinstance(indicators, IndicatorField) else np.asarray(indicators)
    if np.any(eta2 < 0):
        raise ValueError("negative indicator entries")
    total = eta2.sum()
    if total == 0.0:
        return np.array([0], dtype=np.int64)
    order = np.lexsort((np.arange(eta2.size), -eta2))
    cum = np.cumsum(eta2[order])
    k = int(np.searchsorted(cum, theta * total, side="left")) + 1
    return order[:k].astype(np.int64)


def fitted_slope(records: list[StudyRecord], n_points: int = 3) -> float:
    """Least-squares slope of log eta vs log n_dofs over the last steps."""
    tail = records[-n_points:]
    xs = np.log([r.n_dofs for r in tail])
    ys = np.log([r.eta for r in tail])
    return float(np.polyfit(xs, ys, 1)[0])


def run_study(problem: ProblemData, p: int = 1, mode: str = "uniform",
              theta: float = DEFAULT_THETA, max_dofs: int = 100000,
              initial_n: int = 2,
              quad_order: int | None = None) -> list[StudyRecord]:
    """Run a refinement study; one record per Solve-Estimate step."""
    if mode not in ("uniform", "adaptive"):
        raise ValueError(f"mode must be 'uniform' or 'adaptive', got {mode!r}")
    mesh = create_uniform_mesh(initial_n)
    records: list[StudyRecord] = []
    step = 0
    while True:
        space_v = build_space(mesh, p, constrain_lateral=True)
        space_s = build_space(mesh, p, constrain_lateral=False)
        n_dofs = space_v.n_free + space_s.n_dofs
        if n_dofs > max_dofs:
            if not records:
                raise ValueError(
                    f"max_dofs={max_dofs} below the initial system size {n_dofs}")
            break
        t0 = time.perf_counter()
        system = assemble(space_v, space_s, problem, quad_order)
        try:
            report = solve_spd(system)
        except SolverError as exc:
            raise SolverError(f"step {step}: {exc}") from exc
        v_coeffs, s_coeffs = system.expand(report.solution)
        indicators = compute_indicators(space_v, space_s, v_coeffs, s_coeffs,
                                        problem, quad_order)
        rec = StudyRecord(step, n_dofs, mesh.n_elements, indicators.eta,
                          seconds=time.perf_counter() - t0)
        if problem.exact is not None:
            errs = compute_errors(space_v, space_s, v_coeffs, s_coeffs,
                                  problem, quad_order)
            rec.err_v_L2 = errs.err_v_L2
            rec.err_sigma_L2 = errs.err_sigma_L2
            rec.err_V = errs.err_V
            rec.seconds = time.perf_counter() - t0
        records.append(rec)

        if mode == "uniform":
            mesh = refine_uniform(mesh)
        else:
            marked = doerfler_mark(indicators, theta)
            mesh = refine_marked(mesh, marked)
        step += 1
    return records
