"""Assembly of the least-squares Euler-Lagrange system.

The product space stacks all unconstrained v DOFs first, then all sigma
DOFs.  Constrained (lateral Dirichlet) v DOFs are eliminated
symmetrically with zero boundary values.  The two interior residual
components are

    r1 = dt v - dx sigma        r2 = dt sigma - dx v

and the bilinear form integrates r1*r1' + r2*r2' over Q plus the t=0
trace products of both components.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .fem import (FeSpace, QuadratureRule, basis_tables, gauss_1d, initial_facets,
                  edge_reference_points, n_local_dofs, quadrature_rule, subdivide_rule)
from .mesh import BoundaryTag, Mesh

# composite-rule depth for near-singular (sharp) data
SHARP_SUBDIV_DEPTH = 3


@dataclass
class ExactSolution:
    """Manufactured solution pair; gradients are (d/dt, d/dx) and optional."""

    v: Callable
    sigma: Callable
    v_grad: Optional[Callable] = None
    sigma_grad: Optional[Callable] = None


@dataclass
class ProblemData:
    """Wave-system data (f, g, v0, sigma0); all callables are vectorized.

    f, g take (t, x) on Q; v0, sigma0 take x on Omega.  ``sharp`` requests
    composite data quadrature (needed for the Gaussian-pulse data).
    """

    f: Callable
    g: Callable
    v0: Callable
    sigma0: Callable
    exact: Optional[ExactSolution] = None
    sharp: bool = False
    name: str = ""


@dataclass
class SparseSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    dof_offsets: tuple[int, int, int]  # (0, n_free_v, n_total)
    free_v: np.ndarray                 # global v DOF ids of the free block
    n_dofs_v: int
    n_dofs_sigma: int

    @property
    def n(self) -> int:
        return self.dof_offsets[2]

    def expand(self, solution: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Split a system vector into full (v, sigma) coefficient vectors."""
        nfv = self.dof_offsets[1]
        v = np.zeros(self.n_dofs_v)
        v[self.free_v] = solution[:nfv]
        sigma = np.asarray(solution[nfv:], dtype=np.float64).copy()
        return v, sigma


def data_quad_order(p: int, quad_order: int | None = None) -> int:
    return max(2 * p, 6) if quad_order is None else quad_order


def interior_data_rule(p: int, quad_order: int | None = None,
                       sharp: bool = False) -> QuadratureRule:
    rule = quadrature_rule(data_quad_order(p, quad_order))
    if sharp:
        rule = subdivide_rule(rule, SHARP_SUBDIV_DEPTH)
    return rule


def initial_edge_rule(p: int, quad_order: int | None = None,
                      sharp: bool = False) -> tuple[np.ndarray, np.ndarray]:
    panels = 2 ** SHARP_SUBDIV_DEPTH if sharp else 1
    return gauss_1d(data_quad_order(p, quad_order), panels)


def eval_on_q(fun, tpts, xpts) -> np.ndarray:
    """Evaluate a (possibly constant-returning) field on arrays over Q."""
    out = np.asarray(fun(tpts, xpts), dtype=np.float64)
    return np.broadcast_to(out, tpts.shape)


def eval_on_omega(fun, xpts) -> np.ndarray:
    out = np.asarray(fun(xpts), dtype=np.float64)
    return np.broadcast_to(out, xpts.shape)


def physical_points(corners: np.ndarray, ref_points: np.ndarray) -> np.ndarray:
    """Map reference points into each element; shape (ne, nq, 2)."""
    c0 = corners[:, None, 0]
    d1 = corners[:, None, 1] - c0
    d2 = corners[:, None, 2] - c0
    u = ref_points[None, :, 0, None]
    w = ref_points[None, :, 1, None]
    return c0 + u * d1 + w * d2


def element_matrix(corners: np.ndarray, p: int,
                   rule: QuadratureRule | None = None) -> np.ndarray:
    """Local least-squares matrix of one element over paired (v, sigma) DOFs."""
    if rule is None:
        rule = quadrature_rule(2 * p)
    _, grads = basis_tables(p, rule.points)
    c = np.ascontiguousarray(corners, dtype=np.float64)[None, :, :]
    return _kernels.local_matrices(c, grads, rule.weights)[0]


def _edge_lagrange_1d(p: int, s: np.ndarray) -> np.ndarray:
    """1D Lagrange basis (endpoints first, then interior nodes) at s in [0,1]."""
    nodes = np.concatenate([[0.0, 1.0], np.arange(1, p) / p])
    vand = np.vander(nodes, p + 1, increasing=True)
    coeffs = np.linalg.inv(vand)
    return np.vander(s, p + 1, increasing=True) @ coeffs


def initial_trace_matrix(mesh: Mesh, facet, p: int) -> np.ndarray:
    """Block-diagonal (v, sigma) mass matrix of an edge on t=0.

    Edge DOF order per block: the two endpoints, then interior edge nodes.
    """
    if facet.tag != BoundaryTag.INITIAL:
        raise ValueError("initial_trace_matrix called on a non-Initial edge")
    pa, pb = mesh.vertices[list(facet.vertices)]
    h = abs(pb[1] - pa[1])
    s, ws = gauss_1d(2 * p)
    phi = _edge_lagrange_1d(p, s)
    m1 = h * (phi.T * ws) @ phi
    out = np.zeros((2 * (p + 1), 2 * (p + 1)))
    out[: p + 1, : p + 1] = m1
    out[p + 1:, p + 1:] = m1
    return out


def _paired_dof_index(space_v: FeSpace, space_sigma: FeSpace):
    """System indices for the paired local DOFs; -1 marks eliminated v DOFs."""
    free_v = np.flatnonzero(~space_v.constrained)
    n_free_v = free_v.size
    v_sys = np.full(space_v.n_dofs, -1, dtype=np.int64)
    v_sys[free_v] = np.arange(n_free_v)
    gidx = np.concatenate([v_sys[space_v.dof_map],
                           n_free_v + space_sigma.dof_map], axis=1)
    return gidx, free_v, n_free_v


def assemble(space_v: FeSpace, space_sigma: FeSpace, problem: ProblemData,
             quad_order: int | None = None) -> SparseSystem:
    if space_v.mesh is not space_sigma.mesh or space_v.p != space_sigma.p:
        raise ValueError("v and sigma spaces must share one mesh and order")
    mesh = space_v.mesh
    p = space_v.p
    nloc = n_local_dofs(p)
    ne = mesh.n_elements
    corners = np.ascontiguousarray(mesh.element_corners())

    gidx, free_v, n_free_v = _paired_dof_index(space_v, space_sigma)
    n_total = n_free_v + space_sigma.n_dofs

    stiff_rule = quadrature_rule(2 * p)
    _, stiff_grads = basis_tables(p, stiff_rule.points)
    data_rule = interior_data_rule(p, quad_order, problem.sharp)
    _, data_grads = basis_tables(p, data_rule.points)

    rows, cols, vals = [], [], []
    rhs = np.zeros(n_total)

    chunk = max(1, min(16384, int(4e6 // max(1, data_rule.weights.size * nloc))))
    for lo in range(0, ne, chunk):
        hi = min(ne, lo + chunk)
        cc = corners[lo:hi]
        gg = gidx[lo:hi]
        local = _kernels.local_matrices(cc, stiff_grads, stiff_rule.weights)

        phys = physical_points(cc, data_rule.points)
        fv = eval_on_q(problem.f, phys[..., 0], phys[..., 1])
        gv = eval_on_q(problem.g, phys[..., 0], phys[..., 1])
        bloc = _kernels.local_loads(cc, data_grads, data_rule.weights,
                                    np.ascontiguousarray(fv), np.ascontiguousarray(gv))

        r = np.broadcast_to(gg[:, :, None], local.shape)
        c = np.broadcast_to(gg[:, None, :], local.shape)
        keep = (r >= 0) & (c >= 0)
        rows.append(r[keep])
        cols.append(c[keep])
        vals.append(local[keep])
        bkeep = gg >= 0
        np.add.at(rhs, gg[bkeep], bloc[bkeep])

    # t=0 trace terms: mass with exact quadrature, data with the data rule
    s_m, w_m = gauss_1d(2 * p)
    s_d, w_d = initial_edge_rule(p, quad_order, problem.sharp)
    for facet in initial_facets(mesh):
        e, k = facet.element, facet.local_edge
        vals_m, _ = basis_tables(p, edge_reference_points(k, s_m))
        pa, pb = mesh.vertices[list(facet.vertices)]
        h = abs(pb[1] - pa[1])
        m_edge = h * (vals_m.T * w_m) @ vals_m  # (nloc, nloc), zero off the edge
        ge = gidx[e]
        for block in (0, 1):
            g = ge[block * nloc:(block + 1) * nloc]
            r = np.broadcast_to(g[:, None], m_edge.shape)
            c = np.broadcast_to(g[None, :], m_edge.shape)
            keep = (r >= 0) & (c >= 0)
            rows.append(r[keep])
            cols.append(c[keep])
            vals.append(m_edge[keep])

        vals_d, _ = basis_tables(p, edge_reference_points(k, s_d))
        # traversal from local (k+1)%3 to (k+2)%3 endpoints
        xa = mesh.vertices[mesh.elements[e, (k + 1) % 3], 1]
        xb = mesh.vertices[mesh.elements[e, (k + 2) % 3], 1]
        xs = xa + s_d * (xb - xa)
        v0v = eval_on_omega(problem.v0, xs)
        s0v = eval_on_omega(problem.sigma0, xs)
        bv = h * vals_d.T @ (w_d * v0v)
        bs = h * vals_d.T @ (w_d * s0v)
        for block, be in ((0, bv), (1, bs)):
            g = ge[block * nloc:(block + 1) * nloc]
            keep = g >= 0
            np.add.at(rhs, g[keep], be[keep])

    mat = sp.coo_matrix((np.concatenate(vals),
                         (np.concatenate(rows), np.concatenate(cols))),
                        shape=(n_total, n_total)).tocsr()
    mat = (mat + mat.T) * 0.5  # enforce bitwise symmetry
    return SparseSystem(mat, rhs, (0, n_free_v, n_total), free_v,
                        space_v.n_dofs, space_sigma.n_dofs)
