"""Continuous Lagrange P^p spaces (p = 1, 2, 3) on a triangulation.

Reference bases are nodal with equispaced nodes, constructed once per
order by inverting a monomial Vandermonde matrix.  Global DOFs are
numbered vertices first, then edge DOFs (ordered along each edge from
the endpoint with the smaller global vertex index), then element
interior DOFs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .mesh import BoundaryTag, Mesh, _GEOM_TOL

MAX_QUAD_ORDER = 14

_REF_VERTS = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
# local edges in dof-map order; endpoints are local vertex indices
_LOCAL_EDGES = ((0, 1), (1, 2), (2, 0))


def n_local_dofs(p: int) -> int:
    return (p + 1) * (p + 2) // 2


@lru_cache(maxsize=None)
def _monomial_exponents(p: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for d in range(p + 1) for i in range(d, -1, -1) for j in (d - i,))


@lru_cache(maxsize=None)
def reference_nodes(p: int) -> np.ndarray:
    """Nodal points on the reference triangle in local dof order."""
    if p not in (1, 2, 3):
        raise ValueError(f"unsupported polynomial order p={p}")
    nodes = [v for v in _REF_VERTS]
    for a, b in _LOCAL_EDGES:
        for k in range(1, p):
            nodes.append(_REF_VERTS[a] + (k / p) * (_REF_VERTS[b] - _REF_VERTS[a]))
    if p == 3:
        nodes.append(np.array([1 / 3, 1 / 3]))
    out = np.array(nodes)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _nodal_coeffs(p: int) -> np.ndarray:
    nodes = reference_nodes(p)
    expo = _monomial_exponents(p)
    vand = np.array([[u ** i * w ** j for (i, j) in expo] for u, w in nodes])
    coeffs = np.linalg.inv(vand)
    coeffs.setflags(write=False)
    return coeffs


def basis_tables(p: int, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Basis values (nq, nloc) and reference gradients (nq, nloc, 2)."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    expo = _monomial_exponents(p)
    coeffs = _nodal_coeffs(p)
    u, w = pts[:, 0], pts[:, 1]
    mono = np.stack([u ** i * w ** j for i, j in expo], axis=1)
    dmono_u = np.stack([i * u ** max(i - 1, 0) * w ** j if i else np.zeros_like(u)
                        for i, j in expo], axis=1)
    dmono_w = np.stack([j * u ** i * w ** max(j - 1, 0) if j else np.zeros_like(u)
                        for i, j in expo], axis=1)
    values = mono @ coeffs
    grads = np.stack([dmono_u @ coeffs, dmono_w @ coeffs], axis=2)
    return values, grads


def eval_basis(p: int, ref_point) -> tuple[np.ndarray, np.ndarray]:
    """All local basis values and reference gradients at one point."""
    values, grads = basis_tables(p, np.asarray(ref_point)[None, :])
    return values[0], grads[0]


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray   # (nq, 2) reference coordinates
    weights: np.ndarray  # (nq,) positive, summing to 1/2
    order: int           # requested polynomial exactness

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)


def quadrature_rule(order: int) -> QuadratureRule:
    """Rule on the reference triangle, exact for total degree <= order.

    Built from a tensor Gauss-Legendre rule under the Duffy (collapsed
    square) map; weights are positive by construction.
    """
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order}")
    if order > MAX_QUAD_ORDER:
        raise ValueError(f"quadrature order {order} above ceiling {MAX_QUAD_ORDER}")
    if order == 1:
        return QuadratureRule(np.array([[1 / 3, 1 / 3]]), np.array([0.5]), 1)
    n = -(-(order + 2) // 2)
    x, w = np.polynomial.legendre.leggauss(n)
    a, wa = 0.5 * (x + 1), 0.5 * w
    A, B = np.meshgrid(a, a, indexing="ij")
    WA, WB = np.meshgrid(wa, wa, indexing="ij")
    u = A.ravel()
    v = (B * (1 - A)).ravel()
    wt = (WA * WB * (1 - A)).ravel()
    return QuadratureRule(np.column_stack([u, v]), wt, order)


_CHILD_MAPS = None


def _child_maps():
    global _CHILD_MAPS
    if _CHILD_MAPS is None:
        c0, c1, c2 = _REF_VERTS
        m01, m12, m02 = 0.5 * (c0 + c1), 0.5 * (c1 + c2), 0.5 * (c0 + c2)
        tris = [(c0, m01, m02), (m01, c1, m12), (m02, m12, c2), (m01, m12, m02)]
        _CHILD_MAPS = [(np.column_stack([q1 - q0, q2 - q0]), q0) for q0, q1, q2 in tris]
    return _CHILD_MAPS


def subdivide_rule(rule: QuadratureRule, depth: int) -> QuadratureRule:
    """Composite rule on 4^depth congruent sub-triangles."""
    pts, wts = rule.points, rule.weights
    for _ in range(depth):
        new_p, new_w = [], []
        for A, b in _child_maps():
            new_p.append(pts @ A.T + b)
            new_w.append(0.25 * wts)
        pts = np.vstack(new_p)
        wts = np.concatenate(new_w)
    return QuadratureRule(pts, wts, rule.order)


def gauss_1d(order: int, panels: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights on [0,1], exact for degree <= order; optionally composite."""
    n = max(1, -(-(order + 1) // 2))
    x, w = np.polynomial.legendre.leggauss(n)
    s, ws = 0.5 * (x + 1), 0.5 * w
    if panels > 1:
        s = ((s[None, :] + np.arange(panels)[:, None]) / panels).ravel()
        ws = np.tile(ws / panels, panels)
    return s, ws


@dataclass(frozen=True)
class FeSpace:
    mesh: Mesh
    p: int
    dof_map: np.ndarray      # (ne, nloc) int64, local order = reference_nodes order
    n_dofs: int
    constrained: np.ndarray  # (n_dofs,) bool, lateral Dirichlet mask
    node_coords: np.ndarray  # (n_dofs, 2) nodal points

    @property
    def n_free(self) -> int:
        return int(self.n_dofs - np.count_nonzero(self.constrained))

    def interpolate(self, fun) -> np.ndarray:
        """Nodal interpolation of a vectorized callable fun(t, x)."""
        return np.asarray(fun(self.node_coords[:, 0], self.node_coords[:, 1]),
                          dtype=np.float64)


def build_space(mesh: Mesh, p: int, constrain_lateral: bool = False) -> FeSpace:
    if p not in (1, 2, 3):
        raise ValueError(f"unsupported polynomial order p={p}")
    nv = mesh.n_vertices
    ne = mesh.n_elements
    tri = mesh.elements
    edge_verts, elem_edges = mesh.edges()
    n_edges = edge_verts.shape[0]
    n_int = (p - 1) * (p - 2) // 2
    n_dofs = nv + (p - 1) * n_edges + n_int * ne
    edge_base = nv
    int_base = nv + (p - 1) * n_edges

    nloc = n_local_dofs(p)
    dof_map = np.empty((ne, nloc), dtype=np.int64)
    dof_map[:, :3] = tri
    col = 3
    for a, b in _LOCAL_EDGES:
        # edge opposite local vertex k has id elem_edges[:, k]
        k_opp = 3 - a - b
        eids = elem_edges[:, k_opp]
        forward = tri[:, a] < tri[:, b]
        for k in range(p - 1):
            slot = np.where(forward, k, p - 2 - k)
            dof_map[:, col] = edge_base + eids * (p - 1) + slot
            col += 1
    for k in range(n_int):
        dof_map[:, col] = int_base + np.arange(ne) * n_int + k
        col += 1

    node_coords = np.empty((n_dofs, 2))
    node_coords[:nv] = mesh.vertices
    if p > 1:
        va = mesh.vertices[edge_verts[:, 0]]
        vb = mesh.vertices[edge_verts[:, 1]]
        for k in range(p - 1):
            frac = (k + 1) / p
            node_coords[edge_base + np.arange(n_edges) * (p - 1) + k] = va + frac * (vb - va)
    if n_int:
        centroids = mesh.element_corners().mean(axis=1)
        node_coords[int_base:] = centroids

    constrained = np.zeros(n_dofs, dtype=bool)
    if constrain_lateral:
        x = node_coords[:, 1]
        constrained = (np.abs(x) <= _GEOM_TOL) | (np.abs(x - 1.0) <= _GEOM_TOL)

    node_coords.setflags(write=False)
    dof_map.setflags(write=False)
    constrained.setflags(write=False)
    return FeSpace(mesh, p, dof_map, n_dofs, constrained, node_coords)


def _locate(mesh: Mesh, point) -> tuple[int, np.ndarray]:
    pt = np.asarray(point, dtype=np.float64)
    corners = mesh.element_corners()
    d1 = corners[:, 1] - corners[:, 0]
    d2 = corners[:, 2] - corners[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    rel = pt[None, :] - corners[:, 0]
    u = (rel[:, 0] * d2[:, 1] - rel[:, 1] * d2[:, 0]) / det
    w = (d1[:, 0] * rel[:, 1] - d1[:, 1] * rel[:, 0]) / det
    inside = (u >= -1e-12) & (w >= -1e-12) & (u + w <= 1 + 1e-12)
    hits = np.flatnonzero(inside)
    if hits.size == 0:
        raise ValueError(f"point {tuple(pt)} outside the mesh domain")
    e = int(hits[0])
    return e, np.array([u[e], w[e]])


def eval_field(space: FeSpace, coeffs: np.ndarray, point) -> tuple[float, np.ndarray]:
    """Field value and physical gradient (d/dt, d/dx) at one point."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape[0] != space.n_dofs:
        raise ValueError("coefficient vector length does not match n_dofs")
    e, ref = _locate(space.mesh, point)
    values, grads = basis_tables(space.p, ref[None, :])
    local = coeffs[space.dof_map[e]]
    corners = space.mesh.vertices[space.mesh.elements[e]]
    jac = np.column_stack([corners[1] - corners[0], corners[2] - corners[0]])
    phys_grad = np.linalg.solve(jac.T, grads[0].T @ local)
    return float(values[0] @ local), phys_grad


def initial_facets(mesh: Mesh):
    return [f for f in mesh.boundary_facets if f.tag == BoundaryTag.INITIAL]


def edge_reference_points(local_edge: int, s: np.ndarray) -> np.ndarray:
    """Reference coordinates along local edge k (opposite vertex k) at parameters s.

    The edge is traversed from local vertex (k+1)%3 to (k+2)%3.
    """
    a = _REF_VERTS[(local_edge + 1) % 3]
    b = _REF_VERTS[(local_edge + 2) % 3]
    return a[None, :] + s[:, None] * (b - a)[None, :]
