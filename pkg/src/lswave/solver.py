"""Solvers for the SPD Euler-Lagrange system."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .assembly import SparseSystem


class SolverError(RuntimeError):
    pass


@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    residual: float  # final relative residual
    method: str


def solve_spd(system: SparseSystem, rel_tol: float = 1e-10,
              max_iter: int | None = None, method: str = "cg",
              x0: np.ndarray | None = None) -> SolveReport:
    """Solve A x = b for the assembled SPD system.

    ``method="cg"`` runs Jacobi-preconditioned conjugate gradients,
    optionally warm-started from ``x0``; ``method="cholesky"`` is a
    dense fallback for small systems.
    """
    if not 0 < rel_tol < 1:
        raise ValueError(f"rel_tol must be in (0,1), got {rel_tol}")
    A, b = system.matrix, system.rhs
    n = b.size
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return SolveReport(np.zeros(n), 0, 0.0, method)

    if method == "cholesky":
        dense = A.toarray()
        cho = scipy.linalg.cho_factor(dense)
        x = scipy.linalg.cho_solve(cho, b)
        res = np.linalg.norm(A @ x - b) / bnorm
        return SolveReport(x, 1, float(res), "cholesky")
    if method != "cg":
        raise ValueError(f"unknown method {method!r}")

    diag = A.diagonal()
    if np.any(diag <= 0):
        raise SolverError("non-positive diagonal entry: broken assembly")
    if max_iter is None:
        max_iter = 20 * n

    inv_diag = 1.0 / diag
    if x0 is None:
        x = np.zeros(n)
        r = b.copy()
    else:
        x = np.array(x0, dtype=np.float64)
        r = b - A @ x
        if np.linalg.norm(r) / bnorm <= rel_tol:
            return SolveReport(x, 0, float(np.linalg.norm(r) / bnorm), "cg")
    z = inv_diag * r
    d = z.copy()
    rz = r @ z
    res = 1.0
    for it in range(1, max_iter + 1):
        Ad = A @ d
        alpha = rz / (d @ Ad)
        x += alpha * d
        r -= alpha * Ad
        res = np.linalg.norm(r) / bnorm
        if res <= rel_tol:
            return SolveReport(x, it, float(res), "cg")
        z = inv_diag * r
        rz_new = r @ z
        d = z + (rz_new / rz) * d
        rz = rz_new
    raise SolverError(
        f"CG did not reach rel_tol={rel_tol} within {max_iter} iterations "
        f"(residual {res:.3e}); system may be ill-conditioned")
