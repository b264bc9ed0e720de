"""``cavlab`` command-line front end.

Every subcommand reads a JSON config (``--config``), applies the override
flags, writes ``<command>.json`` plus ``manifest.json`` into the output
directory and prints a short human summary.

Exit codes: 0 ok, 2 configuration error, 3 domain error, 4 failed assertion.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, config_from_dict, dumps, load_config
from .errors import ConfigError, DomainError
from .field import export_field, level_field
from .oracle import quadrature_matrix, splitting_slopes
from .perturb import (
    DeformationParams,
    LoopSpec,
    RotatedParams,
    check_partner,
    holonomy,
    perturbation_matrix,
    physical_slopes,
    shift_matrix,
    split_levels,
)
from .spectrum import CavityShape, enumerate_all_classes, enumerate_class, select_modes, verify_case5_absence

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_ASSERT = 0, 2, 3, 4


class AssertionFailed(Exception):
    pass


# -- shared helpers

def _shape(cfg: RunConfig) -> CavityShape:
    return CavityShape(cfg.p, cfg.q, cfg.b)


def _class(cfg: RunConfig):
    if cfg.N is None:
        raise ConfigError("this command needs N")
    shape = _shape(cfg)
    cls = enumerate_class(shape, cfg.N)
    if cfg.modes:
        cls = select_modes(shape, cls, cfg.modes)
    return shape, cls


def _params(cfg: RunConfig, shape, cls):
    if cfg.alpha_prime is not None or cfg.beta_prime is not None:
        return RotatedParams(cfg.alpha_prime or 0.0, cfg.beta_prime or 0.0, cls.case or 0)
    return DeformationParams(cfg.alpha or 0.0, cfg.beta or 0.0)


def _class_dict(cls) -> dict:
    return {
        "N": cls.N,
        "eigenvalue": cls.eigenvalue,
        "case": None if cls.case_label is None else str(cls.case_label),
        "modes": [[md.n, md.m] for md in cls.modes],
        "parities": [[md.sigma1, md.sigma2] for md in cls.modes],
    }


def _beta_prime_axis(shape, cls):
    d = RotatedParams(0.0, 1.0, cls.case).to_deformation(shape)
    return [d.alpha, d.beta]


def _write(cfg: RunConfig, command: str, report: dict) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{command}.json"
    path.write_text(dumps(report))
    manifest = {"cavlab_manifest": 1, "command": command, "version": __version__, "config": cfg.to_dict()}
    (out / "manifest.json").write_text(dumps(manifest, digits=17))
    return path


# -- commands

def cmd_enumerate(cfg: RunConfig) -> dict:
    shape = _shape(cfg)
    if cfg.N is not None:
        classes = [_class(cfg)[1]]
    else:
        classes = enumerate_all_classes(shape, cfg.N_max if cfg.N_max is not None else 200, cfg.min_size)
    rows = [_class_dict(c) for c in classes]
    print(f"{'N':>7}  {'eigenvalue':>14}  {'size':>4}  {'case':<10}  modes")
    for r in rows:
        modes = " ".join(f"({n},{m})" for n, m in r["modes"])
        print(f"{r['N']:>7}  {r['eigenvalue']:>14.6f}  {len(r['modes']):>4}  {str(r['case']):<10}  {modes}")
    return {"p": shape.p, "q": shape.q, "a": shape.a, "b": shape.b, "classes": rows}


def _assert(results: list, name: str, value: float, tol: float, passed: bool | None = None, **extra):
    ok = bool(value < tol) if passed is None else bool(passed)
    results.append({"name": name, "value": value, "tolerance": tol, "passed": ok, **extra})


def _suite_identities(cfg, results):
    shape, cls = _class(cfg)
    tol = cfg.tolerances["identity"]
    pm = perturbation_matrix(shape, cls)
    a, b = shape.a, shape.b
    vx, ux = quadrature_matrix(shape, cls, "vX"), quadrature_matrix(shape, cls, "uX")
    uy, vy, y = (quadrature_matrix(shape, cls, op) for op in ("uY", "vY", "Y"))
    _assert(results, "vX == (b/2) Lambda", float(np.abs(vx - 0.5 * b * pm.Lambda).max()), tol)
    _assert(results, "uX == (a/2) Lambda", float(np.abs(ux - 0.5 * a * pm.Lambda).max()), tol)
    _assert(results, "uY closed form == quadrature", float(np.abs(uy - pm.U).max()), tol)
    _assert(results, "vY closed form == quadrature", float(np.abs(vy - pm.V).max()), tol)
    if cls.case == 1:
        _assert(results, "case 1: U == 0", float(np.abs(uy).max()), tol)
        _assert(results, "case 1: V == 0", float(np.abs(vy).max()), tol)
    if cls.case == 2:
        _assert(results, "case 2: U == (a/2) Y", float(np.abs(uy - 0.5 * a * y).max()), tol)
        _assert(results, "case 2: V == (b/2) Y", float(np.abs(vy - 0.5 * b * y).max()), tol)


def _suite_case5(cfg, results):
    shape = _shape(cfg)
    rep = verify_case5_absence(shape, cfg.N_max if cfg.N_max is not None else 5000)
    _assert(results, "no Case5 classes", float(rep.case5_count), 0.5, **rep.to_dict())
    _assert(results, "parity pairs match (p, q, N) table", 0.0, 0.0, passed=rep.table_ok)


def _suite_partner(cfg, results):
    shape, cls = _class(cfg)
    rng = np.random.default_rng(cfg.seed)
    r = cfg.partner_radius
    dev = conj = 0.0
    for ap, bp in rng.uniform(-r, r, size=(cfg.partner_samples, 2)):
        rep = check_partner(shape, cls, RotatedParams(float(ap), float(bp), cls.case))
        dev = max(dev, rep.max_deviation)
        conj = max(conj, rep.conjugation_error)
    _assert(results, "partner eigenvectors v' = +-D v", dev, cfg.tolerances["partner"], samples=cfg.partner_samples)
    _assert(results, "D H1(p) D == H1(p')", conj, cfg.tolerances["conjugation"])


def _suite_slopes(cfg, results):
    shape, cls = _class(cfg)
    directions = [cfg.direction] if cfg.direction else [[1.0, 0.0]]
    if not cfg.direction and cls.case in (2, 3, 4):
        directions.append(_beta_prime_axis(shape, cls))
    for d in directions:
        res = splitting_slopes(shape, cls, d, cfg.epsilons, tuple(cfg.grid))
        pred = physical_slopes(shape, cls, res.direction)
        spread = float(np.ptp(pred)) or 1.0
        err = float(np.abs(res.slopes - pred).max() / spread)
        _assert(results, f"oracle slopes along {list(res.direction)}", err, cfg.tolerances["slope"],
                oracle=res.slopes, predicted=pred)


def _suite_holonomy(cfg, results):
    shape, cls = _class(cfg)
    loop = LoopSpec.ellipse(cfg.loop.center, cfg.loop.radii, cfg.loop.K)
    floor = cfg.tolerances["overlap_floor"]
    base = holonomy(shape, cls, loop, floor)
    finer = holonomy(shape, cls, LoopSpec.ellipse(cfg.loop.center, cfg.loop.radii, 2 * base.K), floor)
    backwards = holonomy(shape, cls, LoopSpec.ellipse(cfg.loop.center, cfg.loop.radii, base.K).reversed(), floor)
    _assert(results, "holonomy invariant under refinement", 0.0, 0.0, passed=finer.signs == base.signs,
            signs=base.signs, K=base.K)
    _assert(results, "holonomy invariant under reversal", 0.0, 0.0, passed=backwards.signs == base.signs)


SUITE_FUNCS = {
    "identities": _suite_identities,
    "case5": _suite_case5,
    "partner": _suite_partner,
    "slopes": _suite_slopes,
    "holonomy": _suite_holonomy,
}


def cmd_verify(cfg: RunConfig) -> dict:
    results = []
    for suite in cfg.suites:
        start = len(results)
        SUITE_FUNCS[suite](cfg, results)
        for r in results[start:]:
            r["suite"] = suite
    passed = all(r["passed"] for r in results)
    for r in results:
        print(f"[{'PASS' if r['passed'] else 'FAIL'}] {r['suite']}: {r['name']}  (value {r['value']:.3e}, tol {r['tolerance']:.1e})")
    return {"passed": passed, "assertions": results}


def cmd_split(cfg: RunConfig) -> dict:
    shape, cls = _class(cfg)
    params = _params(cfg, shape, cls)
    shifts, vecs = split_levels(shape, cls, params)
    deform = params.to_deformation(shape) if isinstance(params, RotatedParams) else params
    physical = np.linalg.eigvalsh(shift_matrix(shape, cls, deform))
    for k, s in enumerate(shifts):
        print(f"level {k}: h1 eigenvalue {s: .6e}  vector {np.round(vecs[:, k], 6).tolist()}")
    return {
        "class": _class_dict(cls),
        "alpha": deform.alpha,
        "beta": deform.beta,
        "h1_eigenvalues": shifts,
        "eigenvectors": vecs.T,
        "eigenvalue_shifts": physical,
    }


def cmd_partner(cfg: RunConfig) -> dict:
    shape, cls = _class(cfg)
    rotated = RotatedParams(cfg.alpha_prime or 0.0, cfg.beta_prime or 0.0, cls.case or 0)
    rep = check_partner(shape, cls, rotated)
    ok = rep.max_deviation < cfg.tolerances["partner"]
    print(f"{cls.case_label}: operator {rep.operator}, max deviation {rep.max_deviation:.3e}")
    if not ok:
        raise AssertionFailed({"class": _class_dict(cls), **rep.to_dict(), "passed": False})
    return {"class": _class_dict(cls), **rep.to_dict(), "passed": True}


def cmd_loop(cfg: RunConfig) -> dict:
    shape, cls = _class(cfg)
    loop = LoopSpec.ellipse(cfg.loop.center, cfg.loop.radii, cfg.loop.K)
    res = holonomy(shape, cls, loop, cfg.tolerances["overlap_floor"])
    if res.K != loop.K:
        loop = LoopSpec.ellipse(cfg.loop.center, cfg.loop.radii, res.K)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    n = len(cls)
    with open(out / "loop_points.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "alpha", "beta"] + [f"shift_{k}" for k in range(n)]
                   + [f"v{k}_{i}" for k in range(n) for i in range(n)])
        for idx, pt in enumerate(loop.points[:-1]):
            shifts, vecs = split_levels(shape, cls, pt)
            w.writerow([idx] + [f"{x:.12g}" for x in (pt.alpha, pt.beta, *shifts, *vecs.T.ravel())])
    exports = []
    for idx in cfg.loop.export_points:
        pt = loop.points[int(idx) % loop.K]
        f = level_field(shape, cls, pt, cfg.level, *cfg.field_grid)
        ext = cfg.format.lower()
        exports.append(str(export_field(f, cfg.format, out / f"loop_{idx}_level{cfg.level}.{ext}", cfg.pgm_mode).name))
    print(f"{cls.case_label} N={cls.N}: signs {res.signs} (K={res.K}, min overlap {res.min_overlap:.4f})")
    return {"class": _class_dict(cls), **res.to_dict(), "exports": exports}


def cmd_oracle(cfg: RunConfig) -> dict:
    shape, cls = _class(cfg)
    d = cfg.direction or [1.0, 0.0]
    res = splitting_slopes(shape, cls, d, cfg.epsilons, tuple(cfg.grid))
    pred = physical_slopes(shape, cls, res.direction)
    spread = float(np.ptp(pred)) or 1.0
    err = np.abs(res.slopes - pred) / spread
    for k in range(len(cls)):
        print(f"level {k}: oracle {res.slopes[k]: .6f}  first order {pred[k]: .6f}  |diff|/spread {err[k]:.2e}")
    ok = bool(err.max() < cfg.tolerances["slope"])
    report = {"class": _class_dict(cls), **res.to_dict(), "predicted": pred, "relative_error": err, "passed": ok}
    if not ok:
        raise AssertionFailed(report)
    return report


def cmd_export(cfg: RunConfig) -> dict:
    shape, cls = _class(cfg)
    params = _params(cfg, shape, cls)
    f = level_field(shape, cls, params, cfg.level, *cfg.field_grid)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = export_field(f, cfg.format, out / f"mode_N{cls.N}_level{cfg.level}.{cfg.format.lower()}", cfg.pgm_mode)
    print(f"wrote {path}")
    return {"class": _class_dict(cls), "file": path.name, "level": cfg.level,
            "alpha": f.params.alpha, "beta": f.params.beta, "norm": f.norm}


COMMANDS = {
    "enumerate": cmd_enumerate,
    "verify": cmd_verify,
    "split": cmd_split,
    "partner": cmd_partner,
    "loop": cmd_loop,
    "oracle": cmd_oracle,
    "export": cmd_export,
}


def _grid(text: str):
    parts = text.replace("x", ",").split(",")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 201x201, got {text!r}")
    return vals * 2 if len(vals) == 1 else vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cavlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run configuration (or a manifest.json)")
        sp.add_argument("--N", type=int)
        sp.add_argument("--alpha-prime", type=float)
        sp.add_argument("--beta-prime", type=float)
        sp.add_argument("--grid", type=_grid)
        sp.add_argument("--out")
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else config_from_dict({})
    data = cfg.to_dict()
    for key, attr in (("N", "N"), ("alpha_prime", "alpha_prime"), ("beta_prime", "beta_prime"),
                      ("grid", "grid"), ("out", "out")):
        val = getattr(args, attr)
        if val is not None:
            data[key] = val
    return config_from_dict(data)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    command = args.command
    try:
        report = COMMANDS[command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        _write(cfg, command, {"error": type(exc).__name__, "message": str(exc)})
        print(f"domain error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except AssertionFailed as exc:
        _write(cfg, command, exc.args[0])
        print("assertion failed", file=sys.stderr)
        return EXIT_ASSERT
    _write(cfg, command, report)
    if command == "verify" and not report["passed"]:
        return EXIT_ASSERT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
