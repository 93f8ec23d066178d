"""Conforming triangulations of the unit space-time square.

The domain is Q = (0,1)_t x (0,1)_x with the time coordinate first.
Meshes support uniform refinement and adaptive newest-vertex bisection
(NVB) with recursive closure.  A mesh is immutable after construction;
refinement returns a new mesh.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

# Vertices on the unit square are dyadic under NVB; this tolerance only
# absorbs roundoff of midpoint arithmetic.
_GEOM_TOL = 1e-14


class BoundaryTag(IntEnum):
    LATERAL = 0   # J x {0,1}, i.e. x in {0,1}
    INITIAL = 1   # {0} x Omega, i.e. t = 0
    TERMINAL = 2  # {1} x Omega, i.e. t = 1


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class BoundaryFacet:
    """One boundary edge: owning element, local edge index, tag."""

    vertices: tuple[int, int]
    element: int
    local_edge: int  # edge opposite local vertex k: (k+1)%3 -- (k+2)%3
    tag: BoundaryTag


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray          # (nv, 2) float64, columns (t, x)
    elements: np.ndarray          # (ne, 3) int64, counter-clockwise
    refinement_edge: np.ndarray   # (ne,) int64 in {0,1,2}, edge opposite that vertex
    boundary_facets: tuple[BoundaryFacet, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.ascontiguousarray(self.vertices, dtype=np.float64))
        object.__setattr__(self, "elements", np.ascontiguousarray(self.elements, dtype=np.int64))
        object.__setattr__(self, "refinement_edge",
                           np.ascontiguousarray(self.refinement_edge, dtype=np.int64))
        self.vertices.setflags(write=False)
        self.elements.setflags(write=False)
        self.refinement_edge.setflags(write=False)
        if not self.boundary_facets:
            object.__setattr__(self, "boundary_facets", _classify_boundary(self))

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    def element_corners(self, ids=slice(None)) -> np.ndarray:
        """Corner coordinates, shape (..., 3, 2)."""
        return self.vertices[self.elements[ids]]

    def signed_areas(self) -> np.ndarray:
        p = self.element_corners()
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def diameters(self) -> np.ndarray:
        """Per-element diameter = longest edge length."""
        p = self.element_corners()
        l0 = np.linalg.norm(p[:, 2] - p[:, 1], axis=1)
        l1 = np.linalg.norm(p[:, 0] - p[:, 2], axis=1)
        l2 = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
        return np.maximum(np.maximum(l0, l1), l2)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Unique undirected edges and the per-element edge ids.

        Returns (edge_vertices (nE,2) with first < second,
                 elem_edges (ne,3) where column k is the edge opposite
                 local vertex k).
        """
        tri = self.elements
        raw = np.stack([tri[:, [1, 2]], tri[:, [2, 0]], tri[:, [0, 1]]], axis=1)
        raw = np.sort(raw.reshape(-1, 2), axis=1)
        uniq, inv = np.unique(raw, axis=0, return_inverse=True)
        return uniq, inv.reshape(-1, 3)

    def dump(self) -> str:
        """Plain-text form used by golden tests."""
        lines = [f"vertices {self.n_vertices} elements {self.n_elements}"]
        for t, x in self.vertices:
            lines.append(f"{float(t)!r} {float(x)!r}")
        for tri, r in zip(self.elements, self.refinement_edge):
            lines.append(f"{tri[0]} {tri[1]} {tri[2]} {r}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse(text: str) -> "Mesh":
        lines = text.strip().splitlines()
        head = lines[0].split()
        nv, ne = int(head[1]), int(head[3])
        verts = np.array([[float(w) for w in ln.split()] for ln in lines[1:1 + nv]])
        rows = [[int(w) for w in ln.split()] for ln in lines[1 + nv:1 + nv + ne]]
        rows = np.asarray(rows, dtype=np.int64)
        return Mesh(verts, rows[:, :3], rows[:, 3])

    def validate(self) -> None:
        """Raise MeshError if any mesh invariant is violated."""
        areas = self.signed_areas()
        if np.any(areas <= 0):
            raise MeshError("element with non-positive signed area")
        if abs(areas.sum() - 1.0) > 1e-12:
            raise MeshError(f"element areas sum to {areas.sum()!r}, expected 1")
        edge_verts, elem_edges = self.edges()
        counts = np.bincount(elem_edges.ravel(), minlength=edge_verts.shape[0])
        if counts.max(initial=0) > 2:
            raise MeshError("edge shared by more than two elements")
        # An interior edge seen only once means a hanging node.
        boundary = counts == 1
        ev = self.vertices[edge_verts]
        on_square = np.zeros(edge_verts.shape[0], dtype=bool)
        for axis, val in ((0, 0.0), (0, 1.0), (1, 0.0), (1, 1.0)):
            on_square |= np.all(np.abs(ev[:, :, axis] - val) <= _GEOM_TOL, axis=1)
        if np.any(boundary & ~on_square):
            raise MeshError("non-conforming mesh: interior edge with a single element")
        if np.any(~boundary & on_square):
            # two elements on one side of the square boundary would overlap
            raise MeshError("doubly shared edge on the domain boundary")
        tags = {f.vertices for f in self.boundary_facets}
        want = {tuple(edge_verts[i]) for i in np.flatnonzero(boundary)}
        if tags != want:
            raise MeshError("boundary tags do not match boundary edges")


def _classify_boundary(mesh: Mesh) -> tuple[BoundaryFacet, ...]:
    edge_verts, elem_edges = mesh.edges()
    counts = np.bincount(elem_edges.ravel(), minlength=edge_verts.shape[0])
    facets = []
    # locate the owning element/local edge for each boundary edge
    owner = {}
    for e in range(mesh.n_elements):
        for k in range(3):
            eid = elem_edges[e, k]
            if counts[eid] == 1:
                owner[eid] = (e, k)
    for eid in sorted(owner):
        a, b = edge_verts[eid]
        pa, pb = mesh.vertices[a], mesh.vertices[b]
        if abs(pa[1]) <= _GEOM_TOL and abs(pb[1]) <= _GEOM_TOL:
            tag = BoundaryTag.LATERAL
        elif abs(pa[1] - 1) <= _GEOM_TOL and abs(pb[1] - 1) <= _GEOM_TOL:
            tag = BoundaryTag.LATERAL
        elif abs(pa[0]) <= _GEOM_TOL and abs(pb[0]) <= _GEOM_TOL:
            tag = BoundaryTag.INITIAL
        elif abs(pa[0] - 1) <= _GEOM_TOL and abs(pb[0] - 1) <= _GEOM_TOL:
            tag = BoundaryTag.TERMINAL
        else:
            raise MeshError(f"boundary edge {(a, b)} not on the unit-square boundary")
        e, k = owner[eid]
        facets.append(BoundaryFacet((int(a), int(b)), e, k, tag))
    return tuple(facets)


def create_uniform_mesh(n: int) -> Mesh:
    """Criss-cross mesh: n x n squares, each split along the main diagonal.

    The diagonal runs from (i/n, j/n) to ((i+1)/n, (j+1)/n); it is the
    longest edge of both triangles and becomes their refinement edge.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    ticks = np.arange(n + 1) / n
    tt, xx = np.meshgrid(ticks, ticks, indexing="ij")
    vertices = np.column_stack([tt.ravel(), xx.ravel()])

    def vid(i, j):
        return i * (n + 1) + j

    elements = []
    refedges = []
    for i in range(n):
        for j in range(n):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v11, v01 = vid(i + 1, j + 1), vid(i, j + 1)
            # lower triangle: diagonal v00--v11 opposite local vertex 1
            elements.append((v00, v10, v11))
            refedges.append(1)
            # upper triangle: diagonal opposite local vertex 2
            elements.append((v00, v11, v01))
            refedges.append(2)
    return Mesh(vertices, np.array(elements), np.array(refedges))


def element_geometry(mesh: Mesh, eid: int):
    """(area, diameter, affine map (origin, jacobian)) of one element.

    The affine map sends the reference triangle {(0,0),(1,0),(0,1)} onto
    the element: p = origin + jacobian @ (u, w).
    """
    if not 0 <= eid < mesh.n_elements:
        raise ValueError(f"element id {eid} out of range")
    p = mesh.vertices[mesh.elements[eid]]
    jac = np.column_stack([p[1] - p[0], p[2] - p[0]])
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    if det <= 0:
        raise MeshError(f"element {eid} degenerate or inverted (det={det!r})")
    lengths = [np.linalg.norm(p[1] - p[0]), np.linalg.norm(p[2] - p[1]),
               np.linalg.norm(p[0] - p[2])]
    return 0.5 * det, max(lengths), (p[0].copy(), jac)


def _edge_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def refine_marked(mesh: Mesh, marked) -> Mesh:
    """Bisect at least all marked elements; restore conformity by closure."""
    marked = np.asarray(sorted(set(int(m) for m in marked)), dtype=np.int64)
    if marked.size and (marked[0] < 0 or marked[-1] >= mesh.n_elements):
        raise ValueError("marked element id out of range")
    if marked.size == 0:
        return mesh

    tri = mesh.elements
    ref = mesh.refinement_edge

    def refedge_key(e):
        r = ref[e]
        return _edge_key(tri[e, (r + 1) % 3], tri[e, (r + 2) % 3])

    elem_keys = []
    for e in range(mesh.n_elements):
        elem_keys.append([_edge_key(tri[e, 1], tri[e, 2]),
                          _edge_key(tri[e, 2], tri[e, 0]),
                          _edge_key(tri[e, 0], tri[e, 1])])

    # closure: an element any of whose edges will be bisected must have
    # its own refinement edge bisected too
    to_bisect = {refedge_key(e) for e in marked}
    changed = True
    while changed:
        changed = False
        for e in range(mesh.n_elements):
            rk = elem_keys[e][ref[e]]
            if rk in to_bisect:
                continue
            if any(k in to_bisect for k in elem_keys[e]):
                to_bisect.add(rk)
                changed = True

    new_vertices = [mesh.vertices]
    midpoint = {}
    for key in sorted(to_bisect):
        midpoint[key] = mesh.n_vertices + len(midpoint)
        new_vertices.append(0.5 * (mesh.vertices[key[0]] + mesh.vertices[key[1]])[None, :])
    vertices = np.vstack(new_vertices)

    out_tri = []
    out_ref = []

    def bisect(t0, t1, t2, r):
        tloc = (t0, t1, t2)
        c = tloc[r]
        a = tloc[(r + 1) % 3]
        b = tloc[(r + 2) % 3]
        key = _edge_key(a, b)
        m = midpoint.get(key)
        if m is None:
            out_tri.append(tloc)
            out_ref.append(r)
            return
        # children keep CCW orientation; their refinement edges are the
        # edges opposite the new vertex m
        bisect(c, a, m, 2)
        bisect(c, m, b, 1)

    for e in range(mesh.n_elements):
        bisect(int(tri[e, 0]), int(tri[e, 1]), int(tri[e, 2]), int(ref[e]))

    return Mesh(vertices, np.array(out_tri), np.array(out_ref))


def _bisect_all(mesh: Mesh) -> Mesh:
    """One NVB generation: bisect every element once through its refinement edge."""
    tri = mesh.elements
    ref = mesh.refinement_edge
    midpoint = {}
    new_vertices = [mesh.vertices]
    for e in range(mesh.n_elements):
        r = ref[e]
        key = _edge_key(tri[e, (r + 1) % 3], tri[e, (r + 2) % 3])
        if key not in midpoint:
            midpoint[key] = mesh.n_vertices + len(midpoint)
            new_vertices.append(0.5 * (mesh.vertices[key[0]] + mesh.vertices[key[1]])[None, :])
    vertices = np.vstack(new_vertices)

    out_tri = np.empty((2 * mesh.n_elements, 3), dtype=np.int64)
    out_ref = np.empty(2 * mesh.n_elements, dtype=np.int64)
    for e in range(mesh.n_elements):
        r = int(ref[e])
        c = tri[e, r]
        a = tri[e, (r + 1) % 3]
        b = tri[e, (r + 2) % 3]
        m = midpoint[_edge_key(a, b)]
        out_tri[2 * e] = (c, a, m)
        out_ref[2 * e] = 2
        out_tri[2 * e + 1] = (c, m, b)
        out_ref[2 * e + 1] = 1
    return Mesh(vertices, out_tri, out_ref)


def refine_uniform(mesh: Mesh) -> Mesh:
    """Two NVB generations on every element: each parent yields 4 children."""
    out = _bisect_all(_bisect_all(mesh))
    out.validate()
    return out
