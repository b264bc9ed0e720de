"""Acceptance criteria, one PASS/FAIL line each.

Run ``pytest -v tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
"""
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from cavlab.cli import main
from cavlab.errors import CavlabError
from cavlab.field import full_order_mirror_deviation
from cavlab.oracle import assemble_metric, quadrature_matrix, solve_helmholtz, splitting_slopes
from cavlab.perturb import (
    DeformationParams,
    LoopSpec,
    RotatedParams,
    build_h1,
    check_partner,
    eig_nondegenerate,
    holonomy,
    holonomy_signs,
    perturbation_matrix,
    physical_slopes,
    transport_signs,
)
from cavlab.spectrum import CavityShape, enumerate_class, verify_case5_absence

_LINES = []


def _report(capsys, number: int, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    _LINES.append(line)
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    assert ok, line


def example_classes():
    s13, s14, s41 = CavityShape(1, 3), CavityShape(1, 4), CavityShape(4, 1)
    return {
        "112": (s13, enumerate_class(s13, 112)),
        "28": (s13, enumerate_class(s13, 28)),
        "1300": (s14, enumerate_class(s14, 1300)),
        "1300'": (s41, enumerate_class(s41, 1300)),
    }


# 1 --------------------------------------------------------------------------

def test_criterion_1_examples(capsys):
    t0 = time.perf_counter()
    ex = example_classes()
    c112, c28, c1300 = ex["112"][1], ex["28"][1], ex["1300"][1]
    modes = lambda c: {(md.n, md.m) for md in c.modes}
    ok = (
        modes(c112) == {(2, 6), (8, 4), (10, 2)} and c112.case == 1
        and modes(c28) == {(1, 3), (4, 2), (5, 1)} and c28.case == 2
        and {(2, 18), (12, 17), (20, 15)} <= modes(c1300) and c1300.case == 3
    )
    dt = time.perf_counter() - t0
    _report(capsys, 1, ok and dt < 1.0,
            f"N=112 {c112.case_label}, N=28 {c28.case_label}, N=1300 {c1300.case_label} "
            f"({len(c1300)} modes) in {dt:.3f} s (< 1 s)")


# 2 --------------------------------------------------------------------------

def test_criterion_2_no_case5(capsys):
    t0 = time.perf_counter()
    case5 = pairs = classes = 0
    table_ok = True
    for p in range(1, 20):
        for q in range(1, 21 - p):
            if math.gcd(p, q) != 1:
                continue
            rep = verify_case5_absence(CavityShape(p, q), 10_000)
            pairs += 1
            classes += len(rep.classes)
            case5 += rep.case5_count
            table_ok &= rep.table_ok
    dt = time.perf_counter() - t0
    _report(capsys, 2, case5 == 0 and table_ok and dt < 60,
            f"{pairs} coprime (p,q), {classes} classes, {case5} Case5 in {dt:.1f} s (< 60 s)")


# 3 --------------------------------------------------------------------------

def test_criterion_3_identities(capsys):
    worst = 0.0
    for shape, cls in example_classes().values():
        pm = perturbation_matrix(shape, cls)
        a, b = shape.a, shape.b
        uy, vy = quadrature_matrix(shape, cls, "uY"), quadrature_matrix(shape, cls, "vY")
        errs = [
            np.abs(quadrature_matrix(shape, cls, "vX") - 0.5 * b * pm.Lambda).max(),
            np.abs(quadrature_matrix(shape, cls, "uX") - 0.5 * a * pm.Lambda).max(),
        ]
        if cls.case == 1:
            errs += [np.abs(uy).max(), np.abs(vy).max()]
        if cls.case == 2:
            y = quadrature_matrix(shape, cls, "Y")
            errs += [np.abs(uy - 0.5 * a * y).max(), np.abs(vy - 0.5 * b * y).max()]
        worst = max(worst, *errs)
    _report(capsys, 3, worst < 1e-10, f"max abs identity error {worst:.2e} (< 1e-10)")


# 4 --------------------------------------------------------------------------

def test_criterion_4_partner(capsys):
    rng = np.random.default_rng(2024)
    dev = conj = 0.0
    for key in ("28", "1300", "1300'"):
        shape, cls = example_classes()[key]
        for ap, bp in rng.uniform(-0.05, 0.05, size=(20, 2)):
            rep = check_partner(shape, cls, RotatedParams(float(ap), float(bp), cls.case))
            dev = max(dev, rep.max_deviation)
            conj = max(conj, rep.conjugation_error)
    _report(capsys, 4, dev < 1e-9 and conj < 1e-12,
            f"Case2/3/4 x 20 points: deviation {dev:.2e} (< 1e-9), conjugation {conj:.2e} (< 1e-12)")


# 5 --------------------------------------------------------------------------

def test_criterion_5_oracle(capsys):
    ex = example_classes()
    s13 = ex["28"][0]
    beta_axis = RotatedParams(0.0, 1.0, 2).to_deformation(s13)
    runs = [("112", (1.0, 0.0)), ("28", (1.0, 0.0)), ("28", (beta_axis.alpha, beta_axis.beta))]
    slope_err = 0.0
    for key, d in runs:
        shape, cls = ex[key]
        res = splitting_slopes(shape, cls, d, grid=(201, 201))
        pred = physical_slopes(shape, cls, res.direction)
        slope_err = max(slope_err, float(np.abs(res.slopes - pred).max() / np.ptp(pred)))
    square = CavityShape(1, 1)
    errs = []
    for n in (101, 201):
        lam = solve_helmholtz(assemble_metric(square, DeformationParams(), n, n), 1).eigenvalues[0]
        errs.append(abs(lam - 2 * math.pi**2))
    ground = errs[1] / (2 * math.pi**2)
    ratio = errs[0] / errs[1]
    _report(capsys, 5, slope_err < 0.02 and ground < 1e-3 and 3 <= ratio <= 5,
            f"slope error {100 * slope_err:.2f}% of spread (< 2%), square ground {100 * ground:.4f}% "
            f"(< 0.1%), refinement ratio {ratio:.2f} (in [3, 5])")


# 6 --------------------------------------------------------------------------

def test_criterion_6_full_order_mirror(capsys):
    shape, cls = example_classes()["1300"]
    direction = np.array([0.6, 0.8])
    devs = {}
    note = ""
    try:
        for eps in (2e-3, 4e-3):
            rp = RotatedParams(*(eps * direction), 3)
            devs[eps] = full_order_mirror_deviation(shape, cls, rp, (201, 201))
        ratio = devs[2e-3] / devs[4e-3]
        ok = 1 / 6 <= ratio <= 3 / 8
        note = f"deviations {devs[2e-3]:.3e}, {devs[4e-3]:.3e}; ratio {ratio:.3f}"
    except CavlabError as exc:
        ok = False
        note = f"{type(exc).__name__}: {exc}"
    _report(capsys, 6, ok, f"Case3 N=1300 P2 mirror at eps 2e-3/4e-3: {note} (ratio in [1/6, 3/8])")


# 7 --------------------------------------------------------------------------

def test_criterion_7_holonomy(capsys):
    square = CavityShape(1, 1)
    pair = enumerate_class(square, 5)
    shape13, c28 = example_classes()["28"]
    contractible = (
        holonomy(square, pair, LoopSpec.ellipse((0.02, 0.01), (0.005, 0.003))).signs == [1, 1]
        and holonomy(shape13, c28, LoopSpec.ellipse((0.02, 0.02), (0.001, 0.001))).signs == [1, 1, 1]
    )
    loop = LoopSpec.ellipse((0.0, 0.0), (0.02, 0.01), K=64)
    around = holonomy(square, pair, loop).signs
    t = 2 * np.pi * np.arange(65) / 64
    sz, sx = np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [1.0, 0.0]])
    half_angle = holonomy_signs([np.cos(s) * sz + np.sin(s) * sx for s in t])[0]
    refined = holonomy(square, pair, loop.refined()).signs == around
    frames = [eig_nondegenerate(build_h1(square, pair, pt))[1] for pt in loop.points]
    rng = np.random.default_rng(7)
    flipped = [f * rng.choice([-1.0, 1.0], size=f.shape[1]) for f in frames]
    flipped[-1] = flipped[0]
    gauge = transport_signs(flipped)[0] == transport_signs(frames)[0]
    ok = contractible and around == [-1, -1] == half_angle and refined and gauge
    _report(capsys, 7, ok, f"contractible +1: {contractible}; encircling {around} vs 2x2 oracle {half_angle}; "
            f"refinement {refined}; gauge {gauge}")


# 8 --------------------------------------------------------------------------

def test_criterion_8_determinism(capsys):
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cfg = tmp / "cfg.json"
        cfg.write_text(json.dumps({"p": 1, "q": 3, "N": 28, "N_max": 2000, "out": str(tmp / "out"),
                                   "suites": ["identities", "case5", "partner"]}))
        outputs = []
        for _ in range(2):
            code = main(["verify", "--config", str(cfg)])
            outputs.append((code, (tmp / "out" / "verify.json").read_bytes()))
    same = outputs[0] == outputs[1]
    _report(capsys, 8, same and outputs[0][0] == 0,
            f"two verify runs: exit {outputs[0][0]}, byte-identical {same}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn(None)
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
