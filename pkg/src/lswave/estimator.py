"""A posteriori error indicators and exact-error reports.

The element indicator integrates the two interior residuals of the
discrete solution against the data over the element and adds, for
elements owning an edge on the initial-time face t=0, the squared trace
misfits of v and sigma against the initial data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .assembly import (ProblemData, eval_on_omega, eval_on_q, initial_edge_rule,
                       interior_data_rule, physical_points)
from .fem import (FeSpace, basis_tables, edge_reference_points, initial_facets,
                  n_local_dofs)
from .mesh import Mesh

MAX_ERROR_QUAD = 14


@dataclass
class IndicatorField:
    eta2: np.ndarray       # per-element squared indicators
    interior2: np.ndarray  # interior residual part of eta2
    trace2: np.ndarray     # t=0 trace part of eta2

    @property
    def eta(self) -> float:
        return float(np.sqrt(self.eta2.sum()))


@dataclass
class ErrorReport:
    err_v_L2: float
    err_sigma_L2: float
    err_trace0: float
    err_V: float
    eta: float


def _local_pair_coeffs(space_v: FeSpace, space_sigma: FeSpace,
                       v_coeffs, sigma_coeffs) -> np.ndarray:
    v_coeffs = np.asarray(v_coeffs, dtype=np.float64)
    sigma_coeffs = np.asarray(sigma_coeffs, dtype=np.float64)
    return np.concatenate([v_coeffs[space_v.dof_map],
                           sigma_coeffs[space_sigma.dof_map]], axis=1)


def _interior_residual2(space_v: FeSpace, space_sigma: FeSpace, v_coeffs,
                        sigma_coeffs, problem: ProblemData,
                        quad_order: int | None) -> np.ndarray:
    mesh = space_v.mesh
    p = space_v.p
    nloc = n_local_dofs(p)
    rule = interior_data_rule(p, quad_order, problem.sharp)
    _, grads = basis_tables(p, rule.points)
    corners = np.ascontiguousarray(mesh.element_corners())
    local = np.ascontiguousarray(_local_pair_coeffs(space_v, space_sigma,
                                                    v_coeffs, sigma_coeffs))
    ne = mesh.n_elements
    out = np.empty(ne)
    chunk = max(1, min(16384, int(4e6 // max(1, rule.weights.size * nloc))))
    for lo in range(0, ne, chunk):
        hi = min(ne, lo + chunk)
        phys = physical_points(corners[lo:hi], rule.points)
        fv = np.ascontiguousarray(eval_on_q(problem.f, phys[..., 0], phys[..., 1]))
        gv = np.ascontiguousarray(eval_on_q(problem.g, phys[..., 0], phys[..., 1]))
        out[lo:hi] = _kernels.residual_norms(corners[lo:hi], grads, rule.weights,
                                             fv, gv, local[lo:hi])
    return out


def _trace_misfit2(space_v: FeSpace, space_sigma: FeSpace, v_coeffs, sigma_coeffs,
                   problem_or_exact, quad_order: int | None,
                   sharp: bool) -> np.ndarray:
    """Per-element squared t=0 misfits; data given as (v0(x), sigma0(x)) callables."""
    v0_fun, sigma0_fun = problem_or_exact
    mesh = space_v.mesh
    p = space_v.p
    s, w = initial_edge_rule(p, quad_order, sharp)
    out = np.zeros(mesh.n_elements)
    v_coeffs = np.asarray(v_coeffs, dtype=np.float64)
    sigma_coeffs = np.asarray(sigma_coeffs, dtype=np.float64)
    for facet in initial_facets(mesh):
        e, k = facet.element, facet.local_edge
        vals, _ = basis_tables(p, edge_reference_points(k, s))
        xa = mesh.vertices[mesh.elements[e, (k + 1) % 3], 1]
        xb = mesh.vertices[mesh.elements[e, (k + 2) % 3], 1]
        h = abs(xb - xa)
        xs = xa + s * (xb - xa)
        vh = vals @ v_coeffs[space_v.dof_map[e]]
        sh = vals @ sigma_coeffs[space_sigma.dof_map[e]]
        dv = vh - eval_on_omega(v0_fun, xs)
        ds = sh - eval_on_omega(sigma0_fun, xs)
        out[e] += h * (w @ (dv * dv) + w @ (ds * ds))
    return out


def compute_indicators(space_v: FeSpace, space_sigma: FeSpace, v_coeffs,
                       sigma_coeffs, problem: ProblemData,
                       quad_order: int | None = None) -> IndicatorField:
    interior2 = _interior_residual2(space_v, space_sigma, v_coeffs, sigma_coeffs,
                                    problem, quad_order)
    trace2 = _trace_misfit2(space_v, space_sigma, v_coeffs, sigma_coeffs,
                            (problem.v0, problem.sigma0), quad_order, problem.sharp)
    return IndicatorField(interior2 + trace2, interior2, trace2)


def data_norm_sq(mesh: Mesh, problem: ProblemData, p: int,
                 quad_order: int | None = None) -> float:
    """||(f,g,v0,sigma0)||^2 with the same quadrature as assembly/indicators."""
    rule = interior_data_rule(p, quad_order, problem.sharp)
    corners = np.ascontiguousarray(mesh.element_corners())
    total = 0.0
    chunk = max(1, min(16384, int(4e6 // max(1, rule.weights.size))))
    adet = 2.0 * np.abs(mesh.signed_areas())
    for lo in range(0, mesh.n_elements, chunk):
        hi = min(mesh.n_elements, lo + chunk)
        phys = physical_points(corners[lo:hi], rule.points)
        fv = eval_on_q(problem.f, phys[..., 0], phys[..., 1])
        gv = eval_on_q(problem.g, phys[..., 0], phys[..., 1])
        total += float(((fv * fv + gv * gv) @ rule.weights) @ adet[lo:hi])
    s, w = initial_edge_rule(p, quad_order, problem.sharp)
    for facet in initial_facets(mesh):
        pa, pb = mesh.vertices[list(facet.vertices)]
        h = abs(pb[1] - pa[1])
        xs = pa[1] + s * (pb[1] - pa[1])
        v0v = eval_on_omega(problem.v0, xs)
        s0v = eval_on_omega(problem.sigma0, xs)
        total += h * float(w @ (v0v * v0v + s0v * s0v))
    return total


def compute_errors(space_v: FeSpace, space_sigma: FeSpace, v_coeffs, sigma_coeffs,
                   problem: ProblemData,
                   quad_order: int | None = None) -> ErrorReport:
    if problem.exact is None:
        raise ValueError("compute_errors requires problem.exact")
    mesh = space_v.mesh
    p = space_v.p
    base = max(2 * p, 6) if quad_order is None else quad_order
    err_order = min(base + 2, MAX_ERROR_QUAD)
    rule = interior_data_rule(p, err_order, problem.sharp)
    vals, _ = basis_tables(p, rule.points)
    corners = np.ascontiguousarray(mesh.element_corners())
    adet = 2.0 * np.abs(mesh.signed_areas())
    v_coeffs = np.asarray(v_coeffs, dtype=np.float64)
    sigma_coeffs = np.asarray(sigma_coeffs, dtype=np.float64)

    err_v2 = 0.0
    err_s2 = 0.0
    chunk = max(1, min(16384, int(4e6 // max(1, rule.weights.size))))
    for lo in range(0, mesh.n_elements, chunk):
        hi = min(mesh.n_elements, lo + chunk)
        phys = physical_points(corners[lo:hi], rule.points)
        vh = np.einsum("qi,ei->eq", vals, v_coeffs[space_v.dof_map[lo:hi]])
        sh = np.einsum("qi,ei->eq", vals, sigma_coeffs[space_sigma.dof_map[lo:hi]])
        dv = vh - eval_on_q(problem.exact.v, phys[..., 0], phys[..., 1])
        ds = sh - eval_on_q(problem.exact.sigma, phys[..., 0], phys[..., 1])
        err_v2 += float(((dv * dv) @ rule.weights) @ adet[lo:hi])
        err_s2 += float(((ds * ds) @ rule.weights) @ adet[lo:hi])

    exact_at_0 = (lambda x: problem.exact.v(np.zeros_like(x), x),
                  lambda x: problem.exact.sigma(np.zeros_like(x), x))
    trace2 = _trace_misfit2(space_v, space_sigma, v_coeffs, sigma_coeffs,
                            exact_at_0, err_order, problem.sharp)
    err_trace0 = float(np.sqrt(trace2.sum()))

    indicators = compute_indicators(space_v, space_sigma, v_coeffs, sigma_coeffs,
                                    problem, quad_order)
    err_V = float(np.sqrt(err_v2 + err_s2 + indicators.interior2.sum()
                          + trace2.sum()))
    return ErrorReport(float(np.sqrt(err_v2)), float(np.sqrt(err_s2)),
                       err_trace0, err_V, indicators.eta)
