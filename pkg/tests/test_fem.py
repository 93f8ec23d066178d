import math

import numpy as np
import pytest

from lswave.fem import (basis_tables, build_space, eval_basis, eval_field,
                        gauss_1d, n_local_dofs, quadrature_rule, reference_nodes,
                        subdivide_rule)
from lswave.mesh import create_uniform_mesh, refine_marked


def ref_monomial_integral(a, b):
    # int_T u^a w^b over the reference triangle
    return math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)


@pytest.mark.parametrize("order", range(1, 15))
def test_quadrature_exactness(order):
    rule = quadrature_rule(order)
    assert abs(rule.weights.sum() - 0.5) < 1e-14
    assert np.all(rule.weights > 0)
    for a in range(order + 1):
        for b in range(order + 1 - a):
            got = (rule.points[:, 0] ** a * rule.points[:, 1] ** b) @ rule.weights
            exact = ref_monomial_integral(a, b)
            assert got == pytest.approx(exact, abs=1e-13)


def test_quadrature_order1_is_centroid():
    rule = quadrature_rule(1)
    assert rule.points.shape == (1, 2)
    assert np.allclose(rule.points[0], [1 / 3, 1 / 3])
    assert rule.weights[0] == pytest.approx(0.5)


def test_quadrature_uw_value():
    rule = quadrature_rule(2)
    got = (rule.points[:, 0] * rule.points[:, 1]) @ rule.weights
    assert got == pytest.approx(1 / 24, abs=1e-14)


def test_quadrature_rejects_bad_order():
    with pytest.raises(ValueError):
        quadrature_rule(15)
    with pytest.raises(ValueError):
        quadrature_rule(0)


def test_subdivided_rule_keeps_exactness():
    rule = subdivide_rule(quadrature_rule(4), 2)
    assert abs(rule.weights.sum() - 0.5) < 1e-13
    got = (rule.points[:, 0] ** 2 * rule.points[:, 1] ** 2) @ rule.weights
    assert got == pytest.approx(ref_monomial_integral(2, 2), abs=1e-13)


def test_gauss_1d():
    s, w = gauss_1d(5)
    assert abs(w.sum() - 1.0) < 1e-14
    assert (s ** 5) @ w == pytest.approx(1 / 6, abs=1e-14)
    s, w = gauss_1d(5, panels=4)
    assert (s ** 5) @ w == pytest.approx(1 / 6, abs=1e-13)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_basis_nodal_and_partition(p):
    nodes = reference_nodes(p)
    vals, _ = basis_tables(p, nodes)
    assert np.allclose(vals, np.eye(n_local_dofs(p)), atol=1e-12)
    rng = np.random.default_rng(1)
    pts = rng.random((20, 2)) * 0.45
    vals, grads = basis_tables(p, pts)
    assert np.allclose(vals.sum(axis=1), 1.0, atol=1e-12)
    assert np.allclose(grads.sum(axis=1), 0.0, atol=1e-11)


def test_p1_vertex_basis():
    vals, _ = eval_basis(1, (0.0, 0.0))
    assert np.allclose(vals, [1, 0, 0], atol=1e-14)


def test_p2_edge_midpoint_basis():
    # node 3 is the midpoint of local edge (0,1)
    vals, _ = eval_basis(2, (0.5, 0.0))
    expect = np.zeros(6)
    expect[3] = 1.0
    assert np.allclose(vals, expect, atol=1e-13)


def test_build_space_dof_counts():
    m = create_uniform_mesh(1)
    assert build_space(m, 1).n_dofs == 4
    assert build_space(m, 2).n_dofs == 9   # 4 vertices + 5 edges
    assert build_space(m, 3).n_dofs == 16  # + 2 interior
    with pytest.raises(ValueError):
        build_space(m, 4)


def test_dof_count_formula():
    m = refine_marked(create_uniform_mesh(2), [0, 3])
    edge_verts, _ = m.edges()
    for p in (1, 2, 3):
        s = build_space(m, p)
        expect = (m.n_vertices + (p - 1) * edge_verts.shape[0]
                  + (p - 1) * (p - 2) // 2 * m.n_elements)
        assert s.n_dofs == expect


def test_constrained_mask():
    m = create_uniform_mesh(1)
    s = build_space(m, 1, constrain_lateral=True)
    assert s.constrained.sum() == 4  # all four corners lie on x in {0,1}
    for p in (1, 2, 3):
        sp = build_space(create_uniform_mesh(2), p, constrain_lateral=True)
        x = sp.node_coords[:, 1]
        on_lateral = (x == 0.0) | (x == 1.0)
        assert np.array_equal(sp.constrained, on_lateral)


def test_edge_dof_continuity():
    m = refine_marked(create_uniform_mesh(2), [1, 2, 5])
    for p in (2, 3):
        s = build_space(m, p)
        # same global id must carry the same nodal coordinate from all elements
        seen = {}
        nodes = reference_nodes(p)
        corners = m.element_corners()
        for e in range(m.n_elements):
            jac = np.column_stack([corners[e, 1] - corners[e, 0],
                                   corners[e, 2] - corners[e, 0]])
            phys = corners[e, 0] + nodes @ jac.T
            for loc, gid in enumerate(s.dof_map[e]):
                if gid in seen:
                    assert np.allclose(seen[gid], phys[loc], atol=1e-13)
                else:
                    seen[gid] = phys[loc]


@pytest.mark.parametrize("p", [1, 2, 3])
def test_eval_field_polynomial_patch(p):
    m = refine_marked(create_uniform_mesh(2), [0, 4])
    s = build_space(m, p)
    rng = np.random.default_rng(p)
    # random polynomial of total degree <= p
    coeff = {(i, j): rng.standard_normal()
             for i in range(p + 1) for j in range(p + 1 - i)}

    def poly(t, x):
        return sum(c * t ** i * x ** j for (i, j), c in coeff.items())

    co = s.interpolate(poly)
    for t, x in rng.random((20, 2)):
        val, _ = eval_field(s, co, (t, x))
        assert val == pytest.approx(poly(t, x), abs=1e-12)


def test_eval_field_constant_and_linear():
    m = create_uniform_mesh(2)
    s = build_space(m, 1)
    val, grad = eval_field(s, s.interpolate(lambda t, x: np.ones_like(t)), (0.3, 0.6))
    assert val == pytest.approx(1.0)
    assert np.allclose(grad, 0, atol=1e-12)
    val, grad = eval_field(s, s.interpolate(lambda t, x: t), (0.3, 0.6))
    assert np.allclose(grad, [1, 0], atol=1e-12)


def test_eval_field_bilinear_p2():
    s = build_space(create_uniform_mesh(2), 2)
    co = s.interpolate(lambda t, x: t * x)
    val, _ = eval_field(s, co, (0.3, 0.7))
    assert val == pytest.approx(0.21, abs=1e-13)


def test_eval_field_outside_domain():
    s = build_space(create_uniform_mesh(1), 1)
    with pytest.raises(ValueError):
        eval_field(s, np.zeros(4), (1.5, 0.5))
