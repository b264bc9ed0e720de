"""Degenerate mode classes of the Dirichlet rectangle and their parity cases.

A rectangle with sides ``a`` and ``b`` has Laplacian eigenvalues
``pi^2 (n^2/a^2 + m^2/b^2)``. Degeneracies beyond the trivial ones need a
rational ``b^2/a^2 = p/q``; then ``n^2 p + m^2 q = N`` labels the level and
all bookkeeping is exact integer arithmetic.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from math import gcd, isqrt, pi, sqrt

import numpy as np

from . import kernels
from .errors import Case5Found, ClassTooSmall, ConfigError, NoSolutions


@dataclass(frozen=True)
class CavityShape:
    """Rectangle ``[0, a] x [0, b]`` with ``b^2/a^2 = p/q`` exactly."""

    p: int
    q: int
    b: float = 1.0

    def __post_init__(self):
        if int(self.p) != self.p or int(self.q) != self.q:
            raise ConfigError("p and q must be integers")
        if self.p < 1 or self.q < 1:
            raise ConfigError(f"p, q must be >= 1, got ({self.p}, {self.q})")
        if gcd(self.p, self.q) != 1:
            raise ConfigError(f"p/q = {self.p}/{self.q} is not in lowest terms")
        if not self.b > 0:
            raise ConfigError(f"side b must be positive, got {self.b}")

    @property
    def a(self) -> float:
        return self.b * sqrt(self.q / self.p)

    @property
    def branch(self) -> str:
        """Parity of (p, q) as 'oo', 'oe' or 'eo'."""
        return ("e" if self.p % 2 == 0 else "o") + ("e" if self.q % 2 == 0 else "o")

    def level(self, N: int) -> float:
        """Eigenvalue of the class with invariant ``N``."""
        return pi**2 * N / (self.q * self.b**2)


@dataclass(frozen=True, order=True)
class ModeIndex:
    """Sine mode ``(2/sqrt(ab)) sin(n pi u/a) sin(m pi v/b)``."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ConfigError(f"mode indices must be positive, got ({self.n}, {self.m})")

    @property
    def sigma1(self) -> int:
        """Eigenvalue under u -> a - u."""
        return 1 if self.n % 2 else -1

    @property
    def sigma2(self) -> int:
        """Eigenvalue under v -> b - v."""
        return 1 if self.m % 2 else -1

    def invariant(self, shape: CavityShape) -> int:
        return self.n * self.n * shape.p + self.m * self.m * shape.q

    def __str__(self):
        return f"({self.n},{self.m})"


def basis_function(shape: CavityShape, mode: ModeIndex, u, v):
    """Normalised basis function sampled at ``(u, v)`` (broadcasting)."""
    a, b = shape.a, shape.b
    return (2.0 / sqrt(a * b)) * np.sin(mode.n * pi * np.asarray(u) / a) * np.sin(
        mode.m * pi * np.asarray(v) / b
    )


def mode_eigenvalue(shape: CavityShape, mode: ModeIndex) -> float:
    return pi**2 * (mode.n**2 / shape.a**2 + mode.m**2 / shape.b**2)


def _sign(s: int) -> str:
    return "+" if s > 0 else "-"


@dataclass(frozen=True)
class CaseLabel:
    """One of the five parity cases.

    ``sigmas`` holds the constant parities: ``(sigma, sigma')`` for case 1,
    the constant product for case 2, the constant sigma1 for case 3, the
    constant sigma2 for case 4 and nothing for case 5.
    """

    number: int
    sigmas: tuple = ()

    def __str__(self):
        if not self.sigmas:
            return f"Case{self.number}"
        return f"Case{self.number}(" + ",".join(_sign(s) for s in self.sigmas) + ")"


def classify_parities(sigma1, sigma2) -> CaseLabel:
    """Case label from the two parity vectors of a class."""
    sigma1, sigma2 = list(sigma1), list(sigma2)
    if len(sigma1) < 2:
        raise ClassTooSmall(f"need at least 2 members to classify, got {len(sigma1)}")
    prod = [s * t for s, t in zip(sigma1, sigma2)]
    const1 = len(set(sigma1)) == 1
    const2 = len(set(sigma2)) == 1
    if const1 and const2:
        return CaseLabel(1, (sigma1[0], sigma2[0]))
    if len(set(prod)) == 1:
        return CaseLabel(2, (prod[0],))
    if const1:
        return CaseLabel(3, (sigma1[0],))
    if const2:
        return CaseLabel(4, (sigma2[0],))
    return CaseLabel(5)


@dataclass(frozen=True)
class DegenerateClass:
    N: int
    modes: tuple
    eigenvalue: float
    case_label: CaseLabel | None = None

    def __len__(self):
        return len(self.modes)

    @property
    def sigma1(self) -> np.ndarray:
        return np.array([md.sigma1 for md in self.modes], dtype=float)

    @property
    def sigma2(self) -> np.ndarray:
        return np.array([md.sigma2 for md in self.modes], dtype=float)

    @property
    def case(self) -> int | None:
        return None if self.case_label is None else self.case_label.number


def classify_class(cls: DegenerateClass) -> CaseLabel:
    return classify_parities([md.sigma1 for md in cls.modes], [md.sigma2 for md in cls.modes])


def _make_class(shape, N, pairs) -> DegenerateClass:
    modes = tuple(ModeIndex(int(n), int(m)) for n, m in sorted(pairs))
    label = classify_parities([md.sigma1 for md in modes], [md.sigma2 for md in modes]) if len(modes) > 1 else None
    return DegenerateClass(int(N), modes, shape.level(N), label)


def solutions(shape: CavityShape, N: int) -> list[tuple[int, int]]:
    """All positive (n, m) with ``n^2 p + m^2 q = N``, ascending in n."""
    p, q = shape.p, shape.q
    out = []
    if N < p + q:
        return out
    for n in range(1, isqrt((N - q) // p) + 1):
        rest = N - n * n * p
        if rest % q:
            continue
        m = isqrt(rest // q)
        if m >= 1 and m * m * q == rest:
            out.append((n, m))
    return out


def enumerate_class(shape: CavityShape, N: int) -> DegenerateClass:
    """The maximal degenerate class at invariant ``N``."""
    if N < shape.p + shape.q:
        raise ConfigError(f"N = {N} is below the smallest invariant p + q = {shape.p + shape.q}")
    pairs = solutions(shape, N)
    if not pairs:
        raise NoSolutions(f"no (n, m) with n^2*{shape.p} + m^2*{shape.q} = {N}")
    return _make_class(shape, N, pairs)


def select_modes(shape: CavityShape, cls: DegenerateClass, modes) -> DegenerateClass:
    """Sub-class restricted to an explicit list of members, re-labelled.

    Used to reproduce hand-picked subsets; perturbation theory proper should
    act on the maximal class.
    """
    wanted = {(int(n), int(m)) for n, m in modes}
    have = {(md.n, md.m) for md in cls.modes}
    missing = wanted - have
    if missing:
        raise ConfigError(f"modes {sorted(missing)} are not in the N={cls.N} class")
    return _make_class(shape, cls.N, wanted)


def enumerate_all_classes(shape: CavityShape, N_max: int, min_size: int = 2) -> list[DegenerateClass]:
    """All maximal classes with ``N <= N_max`` and at least ``min_size`` members."""
    if N_max < shape.p + shape.q:
        return []
    Ns, ns, ms = kernels.mode_table(shape.p, shape.q, int(N_max))
    if len(Ns) == 0:
        return []
    cuts = np.flatnonzero(np.diff(Ns)) + 1
    starts = np.concatenate(([0], cuts))
    ends = np.concatenate((cuts, [len(Ns)]))
    out = []
    for s, e in zip(starts, ends):
        if e - s >= min_size:
            out.append(_make_class(shape, Ns[s], zip(ns[s:e].tolist(), ms[s:e].tolist())))
    return out


# Allowed (sigma1, sigma2) pairs by (p, q) branch and N parity.
PARITY_TABLE = {
    ("oo", 0): {(1, 1), (-1, -1)},
    ("oo", 1): {(1, -1), (-1, 1)},
    ("oe", 0): {(-1, 1), (-1, -1)},
    ("oe", 1): {(1, 1), (1, -1)},
    ("eo", 0): {(1, -1), (-1, -1)},
    ("eo", 1): {(1, 1), (-1, 1)},
}


@dataclass
class Case5Report:
    p: int
    q: int
    N_max: int
    branch: str
    counts: dict = field(default_factory=dict)
    classes: list = field(default_factory=list)
    table_ok: bool = True

    @property
    def case5_count(self) -> int:
        return self.counts.get(5, 0)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "N_max": self.N_max,
            "branch": self.branch,
            "counts": {f"Case{k}": v for k, v in sorted(self.counts.items())},
            "case5_count": self.case5_count,
            "table_ok": self.table_ok,
            "n_classes": len(self.classes),
        }


def verify_case5_absence(shape: CavityShape, N_max: int) -> Case5Report:
    """Classify every degenerate class up to ``N_max``.

    Also checks each class's parity pairs against the table implied by the
    parities of (p, q, N). Raises ``Case5Found`` on a counterexample.
    """
    report = Case5Report(shape.p, shape.q, int(N_max), shape.branch)
    counts = Counter()
    for cls in enumerate_all_classes(shape, N_max, 2):
        counts[cls.case] += 1
        pairs = {(md.sigma1, md.sigma2) for md in cls.modes}
        allowed = PARITY_TABLE[(shape.branch, cls.N % 2)]
        ok = pairs <= allowed
        report.table_ok &= ok
        report.classes.append(
            {"N": cls.N, "N_parity": "even" if cls.N % 2 == 0 else "odd",
             "case": str(cls.case_label), "size": len(cls), "table_ok": ok}
        )
        if cls.case == 5:
            report.counts = dict(counts)
            raise Case5Found(f"N={cls.N} for p/q={shape.p}/{shape.q}: {[str(md) for md in cls.modes]}")
    report.counts = dict(counts)
    return report
