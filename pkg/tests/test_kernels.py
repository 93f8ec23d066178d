import os
import subprocess
import sys

import numpy as np
import pytest

from lswave import _kernels
from lswave.fem import basis_tables, n_local_dofs, quadrature_rule
from lswave.mesh import create_uniform_mesh, refine_marked


def kernel_inputs(p, seed=0):
    mesh = refine_marked(create_uniform_mesh(3), [0, 2, 9])
    rule = quadrature_rule(2 * p)
    _, grads = basis_tables(p, rule.points)
    corners = np.ascontiguousarray(mesh.element_corners())
    ne, nq, nloc = mesh.n_elements, rule.weights.size, n_local_dofs(p)
    rng = np.random.default_rng(seed)
    fv = rng.standard_normal((ne, nq))
    gv = rng.standard_normal((ne, nq))
    co = rng.standard_normal((ne, 2 * nloc))
    return corners, grads, rule.weights, fv, gv, co


@pytest.mark.parametrize("p", [1, 2, 3])
def test_numpy_matrices_symmetric_psd(p):
    corners, grads, qw, *_ = kernel_inputs(p)
    mats = _kernels.local_matrices_numpy(corners, grads, qw)
    assert np.allclose(mats, np.transpose(mats, (0, 2, 1)), atol=1e-13)
    for m in mats[:4]:
        assert np.linalg.eigvalsh(m).min() >= -1e-12


@pytest.mark.parametrize("p", [1, 2, 3])
def test_residual_norm_matches_quadratic_form(p):
    # |r|^2 = c.A.c - 2 b.c + |data|^2 must hold kernel-internally
    corners, grads, qw, fv, gv, co = kernel_inputs(p)
    mats = _kernels.local_matrices_numpy(corners, grads, qw)
    loads = _kernels.local_loads_numpy(corners, grads, qw, fv, gv)
    norms = _kernels.residual_norms_numpy(corners, grads, qw, fv, gv, co)
    jac = np.stack([corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0]], axis=2)
    adet = np.abs(jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0])
    data2 = ((fv * fv + gv * gv) @ qw) * adet
    quad = np.einsum("ei,eij,ej->e", co, mats, co) - 2 * np.einsum("ei,ei->e", co, loads)
    assert np.allclose(norms, quad + data2, rtol=1e-11, atol=1e-11)


@pytest.mark.skipif(not _kernels.USE_NUMBA, reason="numba disabled")
@pytest.mark.parametrize("p", [1, 2, 3])
def test_numba_matches_numpy(p):
    corners, grads, qw, fv, gv, co = kernel_inputs(p, seed=p)
    assert np.allclose(_kernels.local_matrices_numba(corners, grads, qw),
                       _kernels.local_matrices_numpy(corners, grads, qw),
                       rtol=1e-12, atol=1e-13)
    assert np.allclose(_kernels.local_loads_numba(corners, grads, qw, fv, gv),
                       _kernels.local_loads_numpy(corners, grads, qw, fv, gv),
                       rtol=1e-12, atol=1e-13)
    assert np.allclose(_kernels.residual_norms_numba(corners, grads, qw, fv, gv, co),
                       _kernels.residual_norms_numpy(corners, grads, qw, fv, gv, co),
                       rtol=1e-11, atol=1e-12)


def test_pure_numpy_env_flag():
    code = ("import lswave._kernels as k; "
            "assert not k.USE_NUMBA; "
            "assert k.local_matrices is k.local_matrices_numpy; "
            "assert not hasattr(k, 'local_matrices_numba')")
    env = dict(os.environ, LSWAVE_PURE_NUMPY="1")
    subprocess.run([sys.executable, "-c", code], check=True, env=env)


def test_pure_numpy_same_study_results():
    # end-to-end: the fallback path reproduces the numba-path CSV values
    script = (
        "from lswave.adapt import run_study\n"
        "from lswave.problems import get_problem\n"
        "for r in run_study(get_problem('smooth1d'), p=2, mode='adaptive',"
        " max_dofs=600):\n"
        "    print(r.n_dofs, repr(r.eta), repr(r.err_V))\n")
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, LSWAVE_PURE_NUMPY=flag)
        proc = subprocess.run([sys.executable, "-c", script], env=env,
                              capture_output=True, text=True, check=True)
        outs.append(proc.stdout)
    lines0 = [l.split() for l in outs[0].splitlines()]
    lines1 = [l.split() for l in outs[1].splitlines()]
    assert [l[0] for l in lines0] == [l[0] for l in lines1]
    for a, b in zip(lines0, lines1):
        assert float(a[1]) == pytest.approx(float(b[1]), rel=1e-10)
        assert float(a[2]) == pytest.approx(float(b[2]), rel=1e-10)
