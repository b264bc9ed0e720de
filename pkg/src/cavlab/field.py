"""Standing-wave patterns on the reference lattice: synthesis, mirrors, export."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, GridNotReflectionSymmetric
from .oracle import MIN_GRID, DEFAULT_GRID, solve_cluster
from .perturb import DeformationParams, RotatedParams, predict_partner, split_levels
from .spectrum import CavityShape, DegenerateClass, basis_function

MIRRORS = ("P1", "P2", "P1P2")


@dataclass(frozen=True, eq=False)
class GridField:
    """``values[j, i]`` samples psi at ``(u_i, v_j)``; rows run along v."""

    shape: CavityShape
    params: DeformationParams
    values: np.ndarray
    N: int | None = None
    level: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def Nu(self) -> int:
        return self.values.shape[1]

    @property
    def Nv(self) -> int:
        return self.values.shape[0]

    @property
    def u(self) -> np.ndarray:
        return np.linspace(0.0, self.shape.a, self.Nu)

    @property
    def v(self) -> np.ndarray:
        return np.linspace(0.0, self.shape.b, self.Nv)

    @property
    def physical_points(self):
        """(x, y) images of the lattice nodes, each shaped like ``values``."""
        U, V = np.meshgrid(self.u, self.v)
        return U * (1 + self.params.alpha * V), V * (1 + self.params.beta * U)

    @property
    def sqrt_g(self) -> np.ndarray:
        U, V = np.meshgrid(self.u, self.v)
        return 1 + self.params.alpha * V + self.params.beta * U

    @property
    def norm(self) -> float:
        hu, hv = self.shape.a / (self.Nu - 1), self.shape.b / (self.Nv - 1)
        return float(np.sqrt(np.sum(self.values**2 * self.sqrt_g) * hu * hv))

    def normalized(self) -> "GridField":
        nrm = self.norm
        if nrm == 0:
            raise ConfigError("cannot normalise a zero field")
        return replace(self, values=self.values / nrm)


def synthesize_mode(shape: CavityShape, cls: DegenerateClass, coefficients, params=DeformationParams(),
                    Nu: int = 101, Nv: int = 101, level: int | None = None) -> GridField:
    """``sum_i c_i basis_i`` on an ``Nu x Nv`` lattice."""
    c = np.asarray(coefficients, dtype=float)
    if c.shape != (len(cls),):
        raise ConfigError(f"expected {len(cls)} coefficients, got shape {c.shape}")
    nrm = np.linalg.norm(c)
    if nrm == 0 or abs(nrm - 1) > 1e-8:
        raise ConfigError(f"coefficients must be a unit vector (norm {nrm:.3g})")
    if Nu < MIN_GRID or Nv < MIN_GRID:
        raise ConfigError(f"grid must be at least {MIN_GRID} x {MIN_GRID}")
    U, V = np.meshgrid(np.linspace(0, shape.a, Nu), np.linspace(0, shape.b, Nv))
    values = sum(ci * basis_function(shape, md, U, V) for ci, md in zip(c, cls.modes))
    if isinstance(params, RotatedParams):
        params = params.to_deformation(shape)
    return GridField(shape, params, values, cls.N, level)


def level_field(shape, cls, params, level: int, Nu: int = 101, Nv: int = 101) -> GridField:
    """Zeroth-order standing wave of one split level."""
    _, vecs = split_levels(shape, cls, params)
    return synthesize_mode(shape, cls, vecs[:, level], params, Nu, Nv, level)


def apply_mirror(f: GridField, operator: str, strict: bool = True) -> GridField:
    """Reflect the reference-rectangle samples: P1 is u -> a-u, P2 is v -> b-v."""
    if operator not in MIRRORS:
        raise ConfigError(f"unknown mirror {operator!r}")
    vals = f.values
    if operator in ("P1", "P1P2"):
        if strict and f.Nu % 2 == 0:
            raise GridNotReflectionSymmetric(f"Nu = {f.Nu} is even")
        vals = vals[:, ::-1]
    if operator in ("P2", "P1P2"):
        if strict and f.Nv % 2 == 0:
            raise GridNotReflectionSymmetric(f"Nv = {f.Nv} is even")
        vals = vals[::-1, :]
    return replace(f, values=np.ascontiguousarray(vals))


def symmetry_score(fa: GridField, fb: GridField):
    """``(sign, deviation)`` with deviation ``min_s |A - s B| / |A|``."""
    A, B = np.asarray(fa.values), np.asarray(fb.values)
    if A.shape != B.shape:
        raise ConfigError(f"grids differ: {A.shape} vs {B.shape}")
    sign = 1 if np.sum(A * B) >= 0 else -1
    nrm = np.linalg.norm(A)
    if nrm == 0:
        return sign, float(np.linalg.norm(B) > 0)
    return sign, float(np.linalg.norm(A - sign * B) / nrm)


def partner_fields(shape, cls, rotated: RotatedParams, Nu: int = 101, Nv: int = 101):
    """Per level: (field at p, its mirror image, field at the partner point)."""
    partner, operator = predict_partner(cls, rotated)
    mirror = "P1" if operator == "P1P2" else operator
    _, vecs = split_levels(shape, cls, rotated)
    _, vecs_p = split_levels(shape, cls, partner)
    out = []
    for k in range(len(cls)):
        fa = synthesize_mode(shape, cls, vecs[:, k], rotated, Nu, Nv, k)
        fb = synthesize_mode(shape, cls, vecs_p[:, k], partner, Nu, Nv, k)
        out.append((fa, apply_mirror(fa, mirror), fb))
    return out


def full_order_mirror_deviation(shape: CavityShape, cls: DegenerateClass, rotated: RotatedParams,
                                grid=DEFAULT_GRID) -> float:
    """Largest per-level mismatch between mirrored oracle eigenfields at p and p'."""
    partner, operator = predict_partner(cls, rotated)
    mirror = "P1" if operator == "P1P2" else operator
    here = solve_cluster(shape, cls, rotated.to_deformation(shape).check(shape), grid)
    there = solve_cluster(shape, cls, partner.to_deformation(shape).check(shape), grid)
    worst = 0.0
    for k in range(len(cls)):
        fa = GridField(shape, rotated.to_deformation(shape), here.fields[k], cls.N, k)
        fb = GridField(shape, partner.to_deformation(shape), there.fields[k], cls.N, k)
        worst = max(worst, symmetry_score(apply_mirror(fa, mirror), fb)[1])
    return worst


# -- export

def _pgm_bytes(values: np.ndarray, mode: str) -> bytes:
    peak = float(np.abs(values).max())
    if mode == "abs":
        pix = np.zeros(values.shape) if peak == 0 else 255.0 * np.abs(values) / peak
    elif mode == "signed":
        pix = np.full(values.shape, 128.0) if peak == 0 else 128.0 + 127.0 * values / peak
    else:
        raise ConfigError(f"unknown PGM mode {mode!r}")
    return np.clip(np.rint(pix), 0, 255).astype(np.uint8).tobytes()


def _meta_text(f: GridField, extra: dict) -> str:
    lines = [
        f"p = {f.shape.p}",
        f"q = {f.shape.q}",
        f"a = {f.shape.a!r}",
        f"b = {f.shape.b!r}",
        f"alpha = {f.params.alpha!r}",
        f"beta = {f.params.beta!r}",
        f"N = {f.N}",
        f"level = {f.level}",
        f"Nu = {f.Nu}",
        f"Nv = {f.Nv}",
        f"norm = {f.norm!r}",
        f"max_abs = {float(np.abs(f.values).max())!r}",
    ]
    lines += [f"{k} = {v}" for k, v in sorted({**f.meta, **extra}.items())]
    return "\n".join(lines) + "\n"


def export_field(f: GridField, fmt: str, path, pgm_mode: str = "signed") -> Path:
    """Write CSV (``u,v,x,y,psi``) or binary PGM plus a ``.meta.txt`` sidecar."""
    path = Path(path)
    fmt = fmt.upper()
    if fmt == "CSV":
        x, y = f.physical_points
        U, V = np.meshgrid(f.u, f.v)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["u", "v", "x", "y", "psi"])
            for row in zip(U.ravel(), V.ravel(), x.ravel(), y.ravel(), f.values.ravel()):
                w.writerow([f"{val:.17g}" for val in row])
    elif fmt == "PGM":
        header = f"P5\n{f.Nu} {f.Nv}\n255\n".encode("ascii")
        path.write_bytes(header + _pgm_bytes(f.values, pgm_mode))
        meta = path.with_name(path.stem + ".meta.txt")
        meta.write_text(_meta_text(f, {"pgm_mode": pgm_mode}))
    else:
        raise ConfigError(f"unknown export format {fmt!r}")
    return path


def read_csv_field(path) -> dict:
    """Columns of an exported CSV as float arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    return {name: body[:, k] for k, name in enumerate(header)}


def read_pgm(path):
    """``(width, height, pixels)`` of a binary P5 file written by :func:`export_field`."""
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ConfigError("not a binary PGM")
    width, height = map(int, parts[1].split())
    pix = np.frombuffer(parts[3], dtype=np.uint8).reshape(height, width)
    return width, height, pix
