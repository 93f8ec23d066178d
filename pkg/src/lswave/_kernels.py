"""Hot element loops: local least-squares matrices, loads, residual norms.

Each kernel exists in two versions: a plain-numpy one (``*_numpy``) and,
when numba is importable, an ``@njit``-compiled one.  The public names
point at the compiled versions unless the environment variable
``LSWAVE_PURE_NUMPY`` is set to a non-empty value other than ``0``.

Conventions shared by all kernels:
  corners  (ne, 3, 2)   element corner coordinates, (t, x) order
  ref_grads (nq, nloc, 2) reference-element basis gradients
  qw       (nq,)        reference quadrature weights (sum 1/2)
  paired local dofs: v-block first (nloc), then sigma-block (nloc)
"""

from __future__ import annotations

import os

import numpy as np


def _numba_enabled() -> bool:
    flag = os.environ.get("LSWAVE_PURE_NUMPY", "0")
    if flag not in ("", "0", "false", "False"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USE_NUMBA = _numba_enabled()


def _geometry(corners):
    jac = np.stack([corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0]], axis=2)
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    inv = np.empty_like(jac)
    inv[:, 0, 0] = jac[:, 1, 1] / det
    inv[:, 0, 1] = -jac[:, 0, 1] / det
    inv[:, 1, 0] = -jac[:, 1, 0] / det
    inv[:, 1, 1] = jac[:, 0, 0] / det
    return inv, np.abs(det)


def _residual_basis(corners, ref_grads):
    """B (ne, nq, 2, 2*nloc): rows are the two first-order residual components."""
    inv, adet = _geometry(corners)
    # physical gradients: g[e,q,i,k] = sum_m ref_grads[q,i,m] * inv[e,m,k]
    g = np.einsum("qim,emk->eqik", ref_grads, inv)
    ne, nq, nloc, _ = g.shape
    B = np.empty((ne, nq, 2, 2 * nloc))
    B[:, :, 0, :nloc] = g[..., 0]       # dt(v-basis)
    B[:, :, 0, nloc:] = -g[..., 1]      # -dx(sigma-basis)
    B[:, :, 1, :nloc] = -g[..., 1]      # -dx(v-basis)
    B[:, :, 1, nloc:] = g[..., 0]       # dt(sigma-basis)
    return B, adet


def local_matrices_numpy(corners, ref_grads, qw):
    B, adet = _residual_basis(corners, ref_grads)
    return np.einsum("eqri,eqrj,q,e->eij", B, B, qw, adet, optimize=True)


def local_loads_numpy(corners, ref_grads, qw, fvals, gvals):
    B, adet = _residual_basis(corners, ref_grads)
    data = np.stack([fvals, gvals], axis=2)  # (ne, nq, 2)
    return np.einsum("eqri,eqr,q,e->ei", B, data, qw, adet, optimize=True)


def residual_norms_numpy(corners, ref_grads, qw, fvals, gvals, local_coeffs):
    B, adet = _residual_basis(corners, ref_grads)
    r = np.einsum("eqri,ei->eqr", B, local_coeffs)
    r[:, :, 0] -= fvals
    r[:, :, 1] -= gvals
    return np.einsum("eqr,eqr,q,e->e", r, r, qw, adet, optimize=True)


def _local_matrices_impl(corners, ref_grads, qw):
    ne = corners.shape[0]
    nq, nloc, _ = ref_grads.shape
    n2 = 2 * nloc
    out = np.zeros((ne, n2, n2))
    b1 = np.empty(n2)
    b2 = np.empty(n2)
    for e in range(ne):
        j00 = corners[e, 1, 0] - corners[e, 0, 0]
        j10 = corners[e, 1, 1] - corners[e, 0, 1]
        j01 = corners[e, 2, 0] - corners[e, 0, 0]
        j11 = corners[e, 2, 1] - corners[e, 0, 1]
        det = j00 * j11 - j01 * j10
        i00 = j11 / det
        i01 = -j01 / det
        i10 = -j10 / det
        i11 = j00 / det
        adet = abs(det)
        for q in range(nq):
            wq = qw[q] * adet
            for i in range(nloc):
                gu = ref_grads[q, i, 0]
                gw = ref_grads[q, i, 1]
                gt = gu * i00 + gw * i10
                gx = gu * i01 + gw * i11
                b1[i] = gt
                b1[nloc + i] = -gx
                b2[i] = -gx
                b2[nloc + i] = gt
            for i in range(n2):
                wb1 = wq * b1[i]
                wb2 = wq * b2[i]
                for j in range(n2):
                    out[e, i, j] += wb1 * b1[j] + wb2 * b2[j]
    return out


def _local_loads_impl(corners, ref_grads, qw, fvals, gvals):
    ne = corners.shape[0]
    nq, nloc, _ = ref_grads.shape
    n2 = 2 * nloc
    out = np.zeros((ne, n2))
    for e in range(ne):
        j00 = corners[e, 1, 0] - corners[e, 0, 0]
        j10 = corners[e, 1, 1] - corners[e, 0, 1]
        j01 = corners[e, 2, 0] - corners[e, 0, 0]
        j11 = corners[e, 2, 1] - corners[e, 0, 1]
        det = j00 * j11 - j01 * j10
        i00 = j11 / det
        i01 = -j01 / det
        i10 = -j10 / det
        i11 = j00 / det
        adet = abs(det)
        for q in range(nq):
            wq = qw[q] * adet
            fq = fvals[e, q]
            gq = gvals[e, q]
            for i in range(nloc):
                gu = ref_grads[q, i, 0]
                gw = ref_grads[q, i, 1]
                gt = gu * i00 + gw * i10
                gx = gu * i01 + gw * i11
                out[e, i] += wq * (fq * gt + gq * (-gx))
                out[e, nloc + i] += wq * (fq * (-gx) + gq * gt)
    return out


def _residual_norms_impl(corners, ref_grads, qw, fvals, gvals, local_coeffs):
    ne = corners.shape[0]
    nq, nloc, _ = ref_grads.shape
    out = np.zeros(ne)
    for e in range(ne):
        j00 = corners[e, 1, 0] - corners[e, 0, 0]
        j10 = corners[e, 1, 1] - corners[e, 0, 1]
        j01 = corners[e, 2, 0] - corners[e, 0, 0]
        j11 = corners[e, 2, 1] - corners[e, 0, 1]
        det = j00 * j11 - j01 * j10
        i00 = j11 / det
        i01 = -j01 / det
        i10 = -j10 / det
        i11 = j00 / det
        adet = abs(det)
        acc = 0.0
        for q in range(nq):
            r1 = -fvals[e, q]
            r2 = -gvals[e, q]
            for i in range(nloc):
                gu = ref_grads[q, i, 0]
                gw = ref_grads[q, i, 1]
                gt = gu * i00 + gw * i10
                gx = gu * i01 + gw * i11
                r1 += local_coeffs[e, i] * gt - local_coeffs[e, nloc + i] * gx
                r2 += local_coeffs[e, nloc + i] * gt - local_coeffs[e, i] * gx
            acc += qw[q] * adet * (r1 * r1 + r2 * r2)
        out[e] = acc
    return out


if USE_NUMBA:
    from numba import njit

    local_matrices_numba = njit(cache=True)(_local_matrices_impl)
    local_loads_numba = njit(cache=True)(_local_loads_impl)
    residual_norms_numba = njit(cache=True)(_residual_norms_impl)

    local_matrices = local_matrices_numba
    local_loads = local_loads_numba
    residual_norms = residual_norms_numba
else:
    local_matrices = local_matrices_numpy
    local_loads = local_loads_numpy
    residual_norms = residual_norms_numpy
