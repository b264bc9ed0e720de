"""Compare the compiled and NumPy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is run on identical inputs through both backends; outputs are
checked for equality before timings are reported.
"""
import argparse
import timeit

import numpy as np
import scipy.sparse as sp

from cavlab import _kernels_py
from cavlab.oracle import assemble_metric, flux_coefficients
from cavlab.perturb import DeformationParams
from cavlab.spectrum import CavityShape

try:
    from cavlab import _kernels as _compiled
except ImportError:
    _compiled = None


def stiffness_inputs(n):
    shape = CavityShape(1, 3)
    metric = assemble_metric(shape, DeformationParams(0.02, -0.01), n, n)
    hu, hv = metric.hu, metric.hv
    u, v = metric.u, metric.v
    uf, vf = 0.5 * (u[1:] + u[:-1]), 0.5 * (v[1:] + v[:-1])
    k11 = flux_coefficients(metric.params, *np.meshgrid(uf, v))[0]
    k22 = flux_coefficients(metric.params, *np.meshgrid(u, vf))[2]
    k12 = flux_coefficients(metric.params, *np.meshgrid(uf, vf))[1]
    return (np.ascontiguousarray(k11), np.ascontiguousarray(k22), np.ascontiguousarray(k12), hu, hv), (n - 2) ** 2


def _as_csr(triplets, size):
    r, c, d = triplets
    return sp.coo_matrix((d, (r, c)), shape=(size, size)).tocsr()


def bench(label, fn_py, fn_c, args, repeat, check):
    t_py = min(timeit.repeat(lambda: fn_py(*args), number=1, repeat=repeat))
    if fn_c is None:
        print(f"{label:<36} python {t_py * 1e3:9.2f} ms   compiled  (not built)")
        return
    check(fn_py(*args), fn_c(*args))
    t_c = min(timeit.repeat(lambda: fn_c(*args), number=1, repeat=repeat))
    print(f"{label:<36} python {t_py * 1e3:9.2f} ms   compiled {t_c * 1e3:9.2f} ms   speed-up {t_py / t_c:6.1f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    def same_table(x, y):
        for a, b in zip(x, y):
            np.testing.assert_array_equal(a, b)

    for p, q, nmax in ((1, 3, 10_000), (7, 13, 10_000), (1, 4, 200_000)):
        bench(f"mode_table p={p} q={q} N<={nmax}", _kernels_py.mode_table,
              getattr(_compiled, "mode_table", None), (p, q, nmax), args.repeat, same_table)

    for n in (101, 201, 401):
        inputs, size = stiffness_inputs(n)

        def same_matrix(x, y, size=size):
            diff = _as_csr(x, size) - _as_csr(y, size)
            assert abs(diff).max() < 1e-12

        bench(f"assemble_stiffness {n}x{n}", _kernels_py.assemble_stiffness,
              getattr(_compiled, "assemble_stiffness", None), inputs, args.repeat, same_matrix)


if __name__ == "__main__":
    main()
