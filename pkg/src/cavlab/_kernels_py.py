"""NumPy implementations of the hot kernels.

These are the reference versions; ``_kernels.pyx`` mirrors them loop by loop
and the test-suite checks the two agree bit for bit on integer output and to
rounding on float output.
"""
from math import isqrt

import numpy as np


def mode_table(p, q, N_max):
    """All (N, n, m) with n, m >= 1 and N = n^2 p + m^2 q <= N_max.

    Rows are sorted by N, then by n.
    """
    if N_max < p + q:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy(), empty.copy()
    n_hi = isqrt((N_max - q) // p)
    m_hi = isqrt((N_max - p) // q)
    n = np.arange(1, n_hi + 1, dtype=np.int64)
    m = np.arange(1, m_hi + 1, dtype=np.int64)
    nn, mm = np.meshgrid(n, m, indexing="ij")
    N = nn * nn * p + mm * mm * q
    keep = N <= N_max
    N, nn, mm = N[keep], nn[keep], mm[keep]
    order = np.lexsort((nn, N))
    return N[order], nn[order], mm[order]


def _interior_index(Nu, Nv):
    idx = -np.ones((Nv, Nu), dtype=np.int64)
    idx[1:-1, 1:-1] = np.arange((Nu - 2) * (Nv - 2)).reshape(Nv - 2, Nu - 2)
    return idx


def assemble_stiffness(k11_u, k22_v, k12_c, hu, hv):
    """COO triplets of the flux-form stiffness matrix on interior nodes.

    ``k11_u`` (Nv, Nu-1) lives on u-faces, ``k22_v`` (Nv-1, Nu) on v-faces
    and ``k12_c`` (Nv-1, Nu-1) on cell centres. Entries touching a boundary
    node are dropped (homogeneous Dirichlet). Duplicates are not summed.
    """
    k11_u = np.asarray(k11_u, dtype=np.float64)
    k22_v = np.asarray(k22_v, dtype=np.float64)
    k12_c = np.asarray(k12_c, dtype=np.float64)
    Nv, Nu = k22_v.shape[0] + 1, k11_u.shape[1] + 1
    idx = _interior_index(Nu, Nv)

    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(np.broadcast_to(v, r.shape).ravel())

    # u-faces: (i, j) -- (i+1, j)
    w = k11_u * (hv / hu)
    left, right = idx[:, :-1], idx[:, 1:]
    add(left, left, w)
    add(right, right, w)
    add(left, right, -w)
    add(right, left, -w)

    # v-faces: (i, j) -- (i, j+1)
    w = k22_v * (hu / hv)
    low, high = idx[:-1, :], idx[1:, :]
    add(low, low, w)
    add(high, high, w)
    add(low, high, -w)
    add(high, low, -w)

    # cells: mixed term 2 k12 psi_u psi_v with centred cell gradients
    h = 0.5 * k12_c
    n00, n10 = idx[:-1, :-1], idx[:-1, 1:]
    n01, n11 = idx[1:, :-1], idx[1:, 1:]
    add(n00, n00, h)
    add(n11, n11, h)
    add(n00, n11, -h)
    add(n11, n00, -h)
    add(n10, n10, -h)
    add(n01, n01, -h)
    add(n10, n01, h)
    add(n01, n10, h)

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    keep = (rows >= 0) & (cols >= 0)
    return rows[keep], cols[keep], np.ascontiguousarray(vals[keep])
