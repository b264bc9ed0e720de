"""Full-order reference computations.

The Helmholtz problem on the deformed quadrilateral is solved on the fixed
rectangle with the exact metric of ``x = u(1 + alpha v), y = v(1 + beta u)``:

    -d_mu (sqrt(g) g^{mu nu} d_nu psi) = E sqrt(g) psi,   psi = 0 on the edges.

The stiffness form is discretised in flux form (face differences for the
diagonal terms, centred cell gradients for the mixed term), so the matrix is
symmetric by construction, and the weight is lumped to the nodes. Nothing in
here uses the perturbative closed forms; the quadrature routine evaluates the
defining integrals directly.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import pi, sqrt

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import ClusterAmbiguous, ConfigError, MappingNotInvertible, ResolutionError, SolverFailure
from .perturb import DeformationParams
from .spectrum import CavityShape, DegenerateClass, ModeIndex, basis_function

MIN_GRID = 17
DEFAULT_GRID = (201, 201)
DEFAULT_EPSILONS = (4e-3, 2e-3, 1e-3)
# largest k*h accepted for a requested mode (about 6 nodes per wavelength)
MAX_KH = 1.05


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CAVLAB_THREADS", "") or os.cpu_count() or 1))
    except ValueError:
        return 1


def jacobian(params: DeformationParams, u, v):
    """Entries (J11, J12, J21, J22) of d(x, y)/d(u, v)."""
    al, be = params.alpha, params.beta
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    return 1.0 + al * v, al * u, be * v, 1.0 + be * u


def flux_coefficients(params: DeformationParams, u, v):
    """``sqrt(g) g^{mu nu}`` as (K11, K12, K22) together with ``sqrt(g)``."""
    j11, j12, j21, j22 = jacobian(params, u, v)
    det = j11 * j22 - j12 * j21
    k11 = (j22**2 + j12**2) / det
    k12 = -(j22 * j21 + j12 * j11) / det
    k22 = (j21**2 + j11**2) / det
    return k11, k12, k22, det


@dataclass(frozen=True, eq=False)
class MetricField:
    shape: CavityShape
    params: DeformationParams
    u: np.ndarray
    v: np.ndarray
    J: np.ndarray
    sqrt_g: np.ndarray
    g_inv: np.ndarray

    @property
    def Nu(self) -> int:
        return len(self.u)

    @property
    def Nv(self) -> int:
        return len(self.v)

    @property
    def hu(self) -> float:
        return self.shape.a / (self.Nu - 1)

    @property
    def hv(self) -> float:
        return self.shape.b / (self.Nv - 1)


def assemble_metric(shape: CavityShape, params: DeformationParams, Nu: int = DEFAULT_GRID[0],
                    Nv: int = DEFAULT_GRID[1]) -> MetricField:
    if Nu < MIN_GRID or Nv < MIN_GRID:
        raise ConfigError(f"grid must be at least {MIN_GRID} x {MIN_GRID}, got {Nu} x {Nv}")
    u = np.linspace(0.0, shape.a, Nu)
    v = np.linspace(0.0, shape.b, Nv)
    U, V = np.meshgrid(u, v)
    j11, j12, j21, j22 = jacobian(params, U, V)
    J = np.stack([np.stack([j11, j12], -1), np.stack([j21, j22], -1)], -2)
    det = j11 * j22 - j12 * j21
    if det.min() <= 0:
        raise MappingNotInvertible(
            f"det J reaches {det.min():.3g} for (alpha, beta) = ({params.alpha}, {params.beta})"
        )
    g = np.einsum("...ki,...kj->...ij", J, J)
    return MetricField(shape, params, u, v, J, det, np.linalg.inv(g))


def assemble_operator(metric: MetricField):
    """Stiffness matrix ``A`` (CSR) and lumped weight diagonal ``B`` on interior nodes."""
    u, v, hu, hv = metric.u, metric.v, metric.hu, metric.hv
    params = metric.params
    uf = 0.5 * (u[:-1] + u[1:])
    vf = 0.5 * (v[:-1] + v[1:])
    k11, _, _, _ = flux_coefficients(params, *np.meshgrid(uf, v))
    _, _, k22, _ = flux_coefficients(params, *np.meshgrid(u, vf))
    _, k12, _, _ = flux_coefficients(params, *np.meshgrid(uf, vf))
    rows, cols, vals = kernels.assemble_stiffness(k11, k22, k12, hu, hv)
    n = (metric.Nu - 2) * (metric.Nv - 2)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    B = metric.sqrt_g[1:-1, 1:-1].ravel() * hu * hv
    return A, B


@dataclass(frozen=True, eq=False)
class DiscreteEigensolution:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # (k, Nv, Nu), zero on the boundary
    hu: float
    hv: float
    weight: np.ndarray  # sqrt(g) at the nodes

    @property
    def h(self) -> float:
        return max(self.hu, self.hv)

    def inner(self, f1, f2) -> float:
        return float(np.sum(f1 * f2 * self.weight) * self.hu * self.hv)


def solve_helmholtz(metric: MetricField, k: int, sigma: float | None = None) -> DiscreteEigensolution:
    """``k`` eigenpairs nearest ``sigma`` (lowest ``k`` when ``sigma`` is None)."""
    Nu, Nv = metric.Nu, metric.Nv
    n = (Nu - 2) * (Nv - 2)
    if k < 1 or k > n // 10:
        raise ResolutionError(f"cannot resolve {k} modes on a {Nu} x {Nv} grid")
    A, B = assemble_operator(metric)
    Bm = sp.diags(B)
    shift = 0.0 if sigma is None else float(sigma)
    try:
        w, vecs = spla.eigsh(A, k=k, M=Bm, sigma=shift, which="LM", v0=np.ones(n), tol=1e-12)
    except (spla.ArpackNoConvergence, RuntimeError) as exc:
        raise SolverFailure(str(exc)) from exc
    order = np.argsort(w)
    w, vecs = w[order], vecs[:, order]
    kh = sqrt(max(w.max(), 0.0)) * max(metric.hu, metric.hv)
    if kh > MAX_KH:
        raise ResolutionError(f"k*h = {kh:.2f} exceeds {MAX_KH}; refine the grid")
    fields = np.zeros((k, Nv, Nu))
    fields[:, 1:-1, 1:-1] = vecs.T.reshape(k, Nv - 2, Nu - 2)
    return DiscreteEigensolution(w, fields, metric.hu, metric.hv, metric.sqrt_g)


def sampled_basis(shape: CavityShape, cls: DegenerateClass, Nu: int, Nv: int) -> np.ndarray:
    """Class basis functions sampled on the grid, shape (n, Nv, Nu)."""
    U, V = np.meshgrid(np.linspace(0, shape.a, Nu), np.linspace(0, shape.b, Nv))
    return np.stack([basis_function(shape, md, U, V) for md in cls.modes])


@dataclass(frozen=True, eq=False)
class Cluster:
    """The ``n`` discrete eigenpairs continuing a degenerate class."""

    eigenvalues: np.ndarray
    fields: np.ndarray
    projections: np.ndarray  # C[i, k] = <basis_i, psi_k> in the flat product
    weights: np.ndarray  # subspace weight of each selected eigenvector
    solution: DiscreteEigensolution


def solve_cluster(shape: CavityShape, cls: DegenerateClass, params: DeformationParams,
                  grid=DEFAULT_GRID, extra: int = 8) -> Cluster:
    """Solve near the class level and pick the eigenvectors living in its subspace."""
    Nu, Nv = grid
    n = len(cls)
    metric = assemble_metric(shape, params, Nu, Nv)
    sol = solve_helmholtz(metric, n + extra, sigma=cls.eigenvalue)
    basis = sampled_basis(shape, cls, Nu, Nv)
    C = np.einsum("iyx,kyx->ik", basis, sol.eigenvectors) * sol.hu * sol.hv
    weights = np.sum(C**2, axis=0)
    order = np.argsort(-weights, kind="stable")
    chosen, rest = order[:n], order[n:]
    if weights[chosen].min() < 0.5 or (len(rest) and weights[rest].max() > 0.5):
        raise ClusterAmbiguous(
            f"N={cls.N}: subspace weights {np.round(np.sort(weights)[::-1][: n + 2], 3).tolist()}"
        )
    chosen = np.sort(chosen)
    return Cluster(sol.eigenvalues[chosen], sol.eigenvectors[chosen], C[:, chosen], weights[chosen], sol)


def effective_matrix(cluster: Cluster) -> np.ndarray:
    """Cluster Hamiltonian in the class basis (Loewdin-orthonormalised projections)."""
    C = cluster.projections
    w, Q = np.linalg.eigh(C.T @ C)
    Ct = C @ (Q / np.sqrt(w)) @ Q.T
    H = Ct @ np.diag(cluster.eigenvalues) @ Ct.T
    return 0.5 * (H + H.T)


@dataclass
class SlopeResult:
    direction: tuple
    epsilons: list
    raw: np.ndarray  # (len(epsilons), n) ascending slopes per epsilon
    slopes: np.ndarray
    errors: np.ndarray
    unperturbed: np.ndarray = field(default=None)

    def to_dict(self) -> dict:
        return {
            "direction": list(self.direction),
            "epsilons": list(self.epsilons),
            "raw": self.raw.tolist(),
            "slopes": self.slopes.tolist(),
            "errors": self.errors.tolist(),
        }


def _unit(direction):
    d = np.asarray(direction, dtype=float)
    norm = float(np.hypot(*d)) if d.shape == (2,) else 0.0
    if norm == 0.0 or not np.isfinite(norm):
        raise ConfigError(f"direction must be a nonzero 2-vector, got {direction!r}")
    return d / norm


def splitting_slopes(shape: CavityShape, cls: DegenerateClass, direction,
                     epsilons=DEFAULT_EPSILONS, grid=DEFAULT_GRID) -> SlopeResult:
    """First-order eigenvalue slopes of a class along ``direction``, from full-order solves.

    For each epsilon the cluster Hamiltonian ``H(eps)`` is formed in the class
    basis; ``(H(eps) - H(0)) / eps`` removes the discretisation splitting of
    the unperturbed level exactly. Its eigenvalues are extrapolated to
    ``eps -> 0`` (linear through the two smallest, quadratic through three).
    """
    d = _unit(direction)
    eps = sorted((float(e) for e in epsilons), reverse=True)
    if len(eps) < 2 or eps[-1] <= 0:
        raise ConfigError("need at least two positive epsilons")
    points = [0.0] + eps
    with ThreadPoolExecutor(max_workers=min(_workers(), len(points))) as pool:
        clusters = list(pool.map(
            lambda e: solve_cluster(shape, cls, DeformationParams(e * d[0], e * d[1]).check(shape), grid),
            points,
        ))
    H0 = effective_matrix(clusters[0])
    raw = np.array([np.linalg.eigvalsh((effective_matrix(c) - H0) / e) for c, e in zip(clusters[1:], eps)])
    e = np.array(eps)
    lin = raw[-1] + (raw[-1] - raw[-2]) * e[-1] / (e[-2] - e[-1])
    if len(eps) >= 3:
        coef = np.polyfit(e, raw, 2)
        best = coef[-1]
        err = np.abs(best - lin)
    else:
        best = lin
        err = np.abs(lin - raw[-1])
    return SlopeResult(tuple(d.tolist()), eps, raw, best, err, clusters[0].eigenvalues)


# -- quadrature oracle for the subspace matrix elements

def _gauss(L: float, npts: int):
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * L * (x + 1.0), 0.5 * L * w


def _integral(L, f, npts):
    x, w = _gauss(L, npts)
    return float(np.dot(w, f(x)))


def quadrature_matrix_element(shape: CavityShape, operator: str, i: ModeIndex, j: ModeIndex) -> float:
    """``<i| O |j>`` by Gauss-Legendre product quadrature of the defining integral.

    ``X = d_v^2 - d_u^2`` and ``Y = -2 d_u d_v``; ``O`` may be premultiplied
    by ``u`` or ``v``.
    """
    if operator not in ("X", "Y", "uY", "vY", "uX", "vX"):
        raise ConfigError(f"unknown operator {operator!r}")
    a, b = shape.a, shape.b
    kn_i, km_i = i.n * pi / a, i.m * pi / b
    kn_j, km_j = j.n * pi / a, j.m * pi / b
    npts_u = 2 * (i.n + j.n) + 48
    npts_v = 2 * (i.m + j.m) + 48
    c = 4.0 / (a * b)
    wu = (lambda x: x) if operator[0] == "u" else (lambda x: 1.0)
    wv = (lambda y: y) if operator[0] == "v" else (lambda y: 1.0)
    if operator.endswith("Y"):
        # psi_i * (-2 d_u d_v psi_j)
        Iu = _integral(a, lambda x: wu(x) * np.sin(kn_i * x) * kn_j * np.cos(kn_j * x), npts_u)
        Iv = _integral(b, lambda y: wv(y) * np.sin(km_i * y) * km_j * np.cos(km_j * y), npts_v)
        return -2.0 * c * Iu * Iv
    # psi_i * (d_v^2 - d_u^2) psi_j, written out as two separable terms
    Su = _integral(a, lambda x: wu(x) * np.sin(kn_i * x) * np.sin(kn_j * x), npts_u)
    Sv = _integral(b, lambda y: wv(y) * np.sin(km_i * y) * np.sin(km_j * y), npts_v)
    Duu = _integral(a, lambda x: wu(x) * np.sin(kn_i * x) * (-(kn_j**2)) * np.sin(kn_j * x), npts_u)
    Dvv = _integral(b, lambda y: wv(y) * np.sin(km_i * y) * (-(km_j**2)) * np.sin(km_j * y), npts_v)
    return c * (Su * Dvv - Duu * Sv)


def quadrature_matrix(shape: CavityShape, cls: DegenerateClass, operator: str) -> np.ndarray:
    return np.array([[quadrature_matrix_element(shape, operator, i, j) for j in cls.modes] for i in cls.modes])
