"""First-order degenerate perturbation theory for the corner-deformed rectangle.

The deformation ``x = u(1 + alpha v)``, ``y = v(1 + beta u)`` pulls the
Laplacian back to the fixed rectangle. To first order the stiffness form
changes by ``-(alpha f + beta g)`` with

    f = vX + uY,   g = -uX + vY,
    X = d_v^2 - d_u^2,   Y = -2 d_u d_v,

and the area weight changes by ``alpha v + beta u``. The operators carry the
sign of ``-Laplacian`` so that every sine mode is an X-eigenstate with
eigenvalue ``pi^2 (n^2/a^2 - m^2/b^2)``. Inside a degenerate class ``vX``
and ``uX`` reduce to ``(b/2) X`` and ``(a/2) X``.

``build_h1`` returns the subspace matrix of ``alpha f + beta g``; its
eigenvectors are the zeroth-order standing waves. ``shift_matrix`` returns the
matrix whose eigenvalues are the actual first-order eigenvalue shifts,
``-(alpha F + beta G) - E0 (alpha b + beta a)/2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import pi

import numpy as np

from .errors import (
    AsymmetryTooLarge,
    ConfigError,
    DegenerateSplitting,
    MappingNotInvertible,
    NoSymmetry,
    OverlapTooSmall,
)
from .spectrum import CavityShape, DegenerateClass, ModeIndex

ASYMMETRY_TOL = 1e-8
DEGENERACY_TOL = 1e-9
OVERLAP_FLOOR = 0.9
LOOP_K = 256
LOOP_K_MAX = 2**14


@dataclass(frozen=True)
class DeformationParams:
    """Corner displacement ``(dx, dy) = a b (alpha, beta)``."""

    alpha: float = 0.0
    beta: float = 0.0

    def min_jacobian(self, shape: CavityShape) -> float:
        """Smallest value of ``det J = 1 + alpha v + beta u`` on the rectangle."""
        return 1.0 + min(0.0, self.alpha * shape.b) + min(0.0, self.beta * shape.a)

    def check(self, shape: CavityShape) -> "DeformationParams":
        if abs(self.alpha) * shape.b >= 1 or abs(self.beta) * shape.a >= 1 or self.min_jacobian(shape) <= 0:
            raise MappingNotInvertible(
                f"(alpha, beta) = ({self.alpha}, {self.beta}) folds the a={shape.a:.6g}, b={shape.b:.6g} rectangle"
            )
        return self

    def scaled(self, t: float) -> "DeformationParams":
        return DeformationParams(t * self.alpha, t * self.beta)


@dataclass(frozen=True)
class RotatedParams:
    """Symmetry-adapted deformation coordinates for a given case.

    The partner symmetry flips the sign of ``beta_prime``. Case 1 and 5 have
    no adapted frame; there ``(alpha', beta') = (alpha, beta)``.
    """

    alpha_prime: float
    beta_prime: float
    case: int

    def to_deformation(self, shape: CavityShape) -> DeformationParams:
        a, b = shape.a, shape.b
        ap, bp = self.alpha_prime, self.beta_prime
        if self.case == 2:
            return DeformationParams(b * ap + a * bp, -a * ap + b * bp)
        if self.case == 3:
            return DeformationParams(a * bp, ap + b * bp)
        if self.case == 4:
            # case 3 with the axes (and a, b) exchanged
            return DeformationParams(ap + a * bp, b * bp)
        return DeformationParams(ap, bp)

    @classmethod
    def from_deformation(cls, shape: CavityShape, params: DeformationParams, case: int) -> "RotatedParams":
        a, b = shape.a, shape.b
        al, be = params.alpha, params.beta
        if case == 2:
            s = a * a + b * b
            return cls((b * al - a * be) / s, (a * al + b * be) / s, case)
        if case == 3:
            return cls(be - b * al / a, al / a, case)
        if case == 4:
            return cls(al - a * be / b, be / b, case)
        return cls(al, be, case)

    def mirrored(self) -> "RotatedParams":
        return RotatedParams(self.alpha_prime, -self.beta_prime, self.case)


# -- closed-form 1D matrix elements in the orthonormal basis sqrt(2/L) sin(n pi x/L)

def x_eigenvalue(shape: CavityShape, mode: ModeIndex) -> float:
    return pi**2 * (mode.n**2 / shape.a**2 - mode.m**2 / shape.b**2)


def _d_elem(n: int, k: int, L: float) -> float:
    """<n| d/dx |k>."""
    if (n + k) % 2 == 0:
        return 0.0
    return 4.0 * n * k / (L * (n * n - k * k))


def _xd_elem(n: int, k: int, L: float) -> float:
    """<n| x d/dx |k>."""
    if n == k:
        return -0.5
    sign = 1.0 if (n + k) % 2 else -1.0
    return 2.0 * sign * n * k / (n * n - k * k)


def _x_elem(n: int, k: int, L: float) -> float:
    """<n| x |k>."""
    if n == k:
        return L / 2.0
    if (n + k) % 2 == 0:
        return 0.0
    return -8.0 * L * n * k / (pi**2 * (n * n - k * k) ** 2)


def y_matrix_element(shape: CavityShape, i: ModeIndex, j: ModeIndex) -> float:
    return -2.0 * _d_elem(i.n, j.n, shape.a) * _d_elem(i.m, j.m, shape.b)


def uy_matrix_element(shape: CavityShape, i: ModeIndex, j: ModeIndex) -> float:
    return -2.0 * _xd_elem(i.n, j.n, shape.a) * _d_elem(i.m, j.m, shape.b)


def vy_matrix_element(shape: CavityShape, i: ModeIndex, j: ModeIndex) -> float:
    return -2.0 * _d_elem(i.n, j.n, shape.a) * _xd_elem(i.m, j.m, shape.b)


def ux_matrix_element(shape: CavityShape, i: ModeIndex, j: ModeIndex) -> float:
    if i.m != j.m:
        return 0.0
    return x_eigenvalue(shape, j) * _x_elem(i.n, j.n, shape.a)


def vx_matrix_element(shape: CavityShape, i: ModeIndex, j: ModeIndex) -> float:
    if i.n != j.n:
        return 0.0
    return x_eigenvalue(shape, j) * _x_elem(i.m, j.m, shape.b)


def x_matrix_element(shape: CavityShape, i: ModeIndex, j: ModeIndex) -> float:
    return x_eigenvalue(shape, j) if i == j else 0.0


MATRIX_ELEMENTS = {
    "X": x_matrix_element,
    "Y": y_matrix_element,
    "uY": uy_matrix_element,
    "vY": vy_matrix_element,
    "uX": ux_matrix_element,
    "vX": vx_matrix_element,
}


def operator_matrix(shape: CavityShape, cls: DegenerateClass, operator: str) -> np.ndarray:
    elem = MATRIX_ELEMENTS[operator]
    return np.array([[elem(shape, i, j) for j in cls.modes] for i in cls.modes])


@dataclass(frozen=True, eq=False)
class PerturbationMatrix:
    cls: DegenerateClass
    Lambda: np.ndarray
    U: np.ndarray
    V: np.ndarray
    F: np.ndarray
    G: np.ndarray
    Y: np.ndarray


@lru_cache(maxsize=256)
def perturbation_matrix(shape: CavityShape, cls: DegenerateClass) -> PerturbationMatrix:
    """Subspace matrices of f and g for a degenerate class."""
    lam = np.diag([x_eigenvalue(shape, md) for md in cls.modes])
    U = operator_matrix(shape, cls, "uY")
    V = operator_matrix(shape, cls, "vY")
    Y = operator_matrix(shape, cls, "Y")
    F = 0.5 * shape.b * lam + U
    G = -0.5 * shape.a * lam + V
    for arr in (lam, U, V, F, G, Y):
        arr.setflags(write=False)
    return PerturbationMatrix(cls, lam, U, V, F, G, Y)


@dataclass(frozen=True)
class ParityRep:
    D1: np.ndarray
    D2: np.ndarray


def parity_rep(cls: DegenerateClass) -> ParityRep:
    return ParityRep(np.diag(cls.sigma1), np.diag(cls.sigma2))


def _as_params(shape, params) -> DeformationParams:
    if isinstance(params, RotatedParams):
        return params.to_deformation(shape)
    if isinstance(params, DeformationParams):
        return params
    alpha, beta = params
    return DeformationParams(float(alpha), float(beta))


def build_h1(shape: CavityShape, cls: DegenerateClass, params) -> np.ndarray:
    """Symmetrised subspace matrix of ``alpha f + beta g``."""
    params = _as_params(shape, params)
    pm = perturbation_matrix(shape, cls)
    M = params.alpha * pm.F + params.beta * pm.G
    norm = np.linalg.norm(M)
    if norm == 0.0:
        return np.zeros_like(M)
    asym = np.linalg.norm(M - M.T) / norm
    if asym > ASYMMETRY_TOL:
        raise AsymmetryTooLarge(f"relative asymmetry {asym:.3e} in N={cls.N} block")
    return 0.5 * (M + M.T)


def shift_matrix(shape: CavityShape, cls: DegenerateClass, params) -> np.ndarray:
    """Matrix whose eigenvalues are the first-order eigenvalue shifts."""
    params = _as_params(shape, params)
    trace = cls.eigenvalue * 0.5 * (params.alpha * shape.b + params.beta * shape.a)
    return -build_h1(shape, cls, params) - trace * np.eye(len(cls))


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column positive (lowest index wins ties)."""
    vectors = np.array(vectors, dtype=float)
    mags = np.abs(vectors)
    for k in range(vectors.shape[1]):
        col = mags[:, k]
        top = np.flatnonzero(col >= col.max() - 1e-12 * max(col.max(), 1.0))[0]
        if vectors[top, k] < 0:
            vectors[:, k] *= -1
    return vectors


def eig_nondegenerate(M: np.ndarray, tol: float = DEGENERACY_TOL):
    """Ascending eigenpairs of a symmetric matrix, refusing near-degeneracies."""
    w, v = np.linalg.eigh(M)
    if len(w) > 1:
        spread = w[-1] - w[0]
        gaps = np.diff(w)
        if spread == 0.0 or gaps.min() <= tol * spread:
            k = int(np.argmin(gaps)) if spread else 0
            raise DegenerateSplitting(
                f"levels {k} and {k + 1} coincide (gap {gaps[k]:.3e}, spread {spread:.3e})"
            )
    return w, fix_signs(v)


def split_levels(shape: CavityShape, cls: DegenerateClass, params):
    """Zeroth-order standing waves and their coefficients in ``alpha f + beta g``.

    Returns ``(shifts, vectors)`` with shifts ascending and eigenvectors as
    columns under the sign convention of :func:`fix_signs`.
    """
    return eig_nondegenerate(build_h1(shape, cls, params))


def physical_slopes(shape: CavityShape, cls: DegenerateClass, direction) -> np.ndarray:
    """Ascending d(eigenvalue)/d(epsilon) along ``(alpha, beta) = epsilon * direction``."""
    return np.linalg.eigvalsh(shift_matrix(shape, cls, tuple(direction)))


_PARTNER_OPERATOR = {2: "P1P2", 3: "P2", 4: "P1"}


def predict_partner(cls: DegenerateClass, rotated: RotatedParams):
    """Partner point and the mirror operator relating the eigenstates."""
    case = cls.case
    if case not in _PARTNER_OPERATOR:
        raise NoSymmetry(f"{cls.case_label} has no partner symmetry (one-dimensional or absent perturbation family)")
    if rotated.case != case:
        raise ConfigError(f"rotated parameters are for case {rotated.case}, class is case {case}")
    return rotated.mirrored(), _PARTNER_OPERATOR[case]


@dataclass
class PartnerReport:
    point: RotatedParams
    partner: RotatedParams
    operator: str
    levels: list = field(default_factory=list)
    max_deviation: float = 0.0
    conjugation_error: float = 0.0

    def to_dict(self) -> dict:
        return {
            "alpha_prime": self.point.alpha_prime,
            "beta_prime": self.point.beta_prime,
            "partner_beta_prime": self.partner.beta_prime,
            "operator": self.operator,
            "levels": self.levels,
            "max_deviation": self.max_deviation,
            "conjugation_error": self.conjugation_error,
        }


def check_partner(shape: CavityShape, cls: DegenerateClass, rotated: RotatedParams) -> PartnerReport:
    """Check ``v'_k = +-D v_k`` level by level between p and its mirror point."""
    partner, operator = predict_partner(cls, rotated)
    rep = parity_rep(cls)
    candidates = {"P1": rep.D1, "P2": rep.D2} if operator == "P1P2" else {operator: getattr(rep, "D" + operator[1])}
    H = build_h1(shape, cls, rotated)
    Hp = build_h1(shape, cls, partner)
    report = PartnerReport(rotated, partner, operator)
    report.conjugation_error = max(float(np.abs(D @ H @ D - Hp).max()) for D in candidates.values())
    _, vecs = eig_nondegenerate(H)
    _, vecs_p = eig_nondegenerate(Hp)
    for k in range(vecs.shape[1]):
        entry = {"level": k}
        best = np.inf
        for name, D in candidates.items():
            image = D @ vecs[:, k]
            sign = 1.0 if image @ vecs_p[:, k] >= 0 else -1.0
            dev = float(np.linalg.norm(vecs_p[:, k] - sign * image))
            entry[name] = {"sign": int(sign), "deviation": dev}
            best = min(best, dev)
        entry["deviation"] = best
        report.levels.append(entry)
        report.max_deviation = max(report.max_deviation, best)
    return report


@dataclass
class LoopSpec:
    """Closed polygon in (alpha, beta); ``points[-1] == points[0]``.

    Loops built by :meth:`ellipse` remember their parametrisation so they can
    be refined.
    """

    points: list
    description: str = ""
    path: object = None

    def __post_init__(self):
        if len(self.points) < 4:
            raise ConfigError(f"a loop needs K >= 3 segments, got {len(self.points) - 1}")
        if self.points[0] != self.points[-1]:
            raise ConfigError("loop is not closed")
        for p0, p1 in zip(self.points, self.points[1:]):
            if p0 == p1:
                raise ConfigError("consecutive loop points coincide")

    @property
    def K(self) -> int:
        return len(self.points) - 1

    @classmethod
    def ellipse(cls, center=(0.0, 0.0), radii=(0.01, 0.01), K: int = LOOP_K, phase: float = 0.0):
        if K < 3:
            raise ConfigError(f"a loop needs K >= 3 segments, got {K}")
        c0, c1 = float(center[0]), float(center[1])
        r0, r1 = float(radii[0]), float(radii[1])

        def path(K):
            t = phase + 2 * pi * np.arange(K) / K
            pts = [DeformationParams(c0 + r0 * np.cos(s), c1 + r1 * np.sin(s)) for s in t]
            return pts + [pts[0]]

        desc = f"ellipse alpha = {c0:g} + {r0:g} cos t, beta = {c1:g} + {r1:g} sin t"
        return cls(path(K), desc, path)

    def refined(self) -> "LoopSpec":
        if self.path is None:
            raise OverlapTooSmall("explicit loop cannot be refined; supply more points")
        return LoopSpec(self.path(2 * self.K), self.description, self.path)

    def reversed(self) -> "LoopSpec":
        return LoopSpec(self.points[::-1], self.description + " (reversed)")

    def rotated_start(self, shift: int) -> "LoopSpec":
        core = self.points[:-1]
        core = core[shift:] + core[:shift]
        return LoopSpec(core + [core[0]], self.description)


def transport_signs(frames, floor: float = OVERLAP_FLOOR):
    """Sign of the overlap product of each level along a closed chain of frames.

    ``frames[k]`` holds orthonormal eigenvectors as columns, ascending in
    eigenvalue; the last frame sits at the same point as the first. Returns
    ``(signs, min_overlap)``; raises ``OverlapTooSmall`` when a level is not
    continued unambiguously by maximal overlap.
    """
    n = frames[0].shape[1]
    product = np.ones(n)
    min_overlap = 1.0
    for v0, v1 in zip(frames, frames[1:]):
        S = v0.T @ v1
        best = np.argmax(np.abs(S), axis=1)
        diag = np.diag(S)
        worst = float(np.abs(diag).min())
        min_overlap = min(min_overlap, worst)
        if np.any(best != np.arange(n)) or worst < floor:
            raise OverlapTooSmall(f"consecutive overlap {worst:.3f} below {floor}")
        product *= np.sign(diag)
    return product.astype(int).tolist(), min_overlap


def holonomy_signs(matrices, floor: float = OVERLAP_FLOOR):
    """Berry sign of each level for a closed family of real symmetric matrices."""
    return transport_signs([eig_nondegenerate(np.asarray(M))[1] for M in matrices], floor)


@dataclass
class HolonomyResult:
    signs: list
    K: int
    min_overlap: float
    description: str = ""

    def to_dict(self) -> dict:
        return {"signs": self.signs, "K": self.K, "min_overlap": self.min_overlap, "loop": self.description}


def holonomy(shape: CavityShape, cls: DegenerateClass, loop: LoopSpec, floor: float = OVERLAP_FLOOR,
             K_max: int = LOOP_K_MAX) -> HolonomyResult:
    """Berry sign of every level around ``loop``, refining until overlaps exceed ``floor``."""
    while True:
        try:
            signs, worst = holonomy_signs([build_h1(shape, cls, pt) for pt in loop.points], floor)
            return HolonomyResult(signs, loop.K, worst, loop.description)
        except OverlapTooSmall:
            if loop.path is None or 2 * loop.K > K_max:
                raise
            loop = loop.refined()
