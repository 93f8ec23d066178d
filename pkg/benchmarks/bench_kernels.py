"""Benchmark the numba kernels against the pure-numpy fallback.

Run: python benchmarks/bench_kernels.py [n] [p]
"""

import sys
import time

import numpy as np

from lswave import _kernels, create_uniform_mesh
from lswave.fem import basis_tables, n_local_dofs, quadrature_rule


def bench(fun, *args, repeat=5):
    fun(*args)  # warm-up (includes JIT compilation)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fun(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 64
    p = int(sys.argv[2]) if len(sys.argv) > 2 else 2
    mesh = create_uniform_mesh(n)
    rule = quadrature_rule(2 * p)
    _, grads = basis_tables(p, rule.points)
    corners = np.ascontiguousarray(mesh.element_corners())
    ne, nq, nloc = mesh.n_elements, rule.weights.size, n_local_dofs(p)
    rng = np.random.default_rng(0)
    fv = rng.standard_normal((ne, nq))
    gv = rng.standard_normal((ne, nq))
    co = rng.standard_normal((ne, 2 * nloc))

    print(f"mesh n={n} ({ne} elements), p={p}, {nq} quad points")
    rows = [
        ("local_matrices", (corners, grads, rule.weights)),
        ("local_loads", (corners, grads, rule.weights, fv, gv)),
        ("residual_norms", (corners, grads, rule.weights, fv, gv, co)),
    ]
    have_numba = hasattr(_kernels, "local_matrices_numba")
    for name, args in rows:
        t_np = bench(getattr(_kernels, name + "_numpy"), *args)
        line = f"{name:16s} numpy {t_np * 1e3:8.2f} ms"
        if have_numba:
            t_nb = bench(getattr(_kernels, name + "_numba"), *args)
            line += f"   numba {t_nb * 1e3:8.2f} ms   speedup {t_np / t_nb:5.1f}x"
        print(line)
    if not have_numba:
        print("numba disabled (LSWAVE_PURE_NUMPY set or numba missing)")


if __name__ == "__main__":
    main()
