from math import gcd, isqrt, pi, sqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavlab.errors import ClassTooSmall, ConfigError, NoSolutions
from cavlab.spectrum import (
    CavityShape,
    DegenerateClass,
    ModeIndex,
    basis_function,
    classify_class,
    classify_parities,
    enumerate_all_classes,
    enumerate_class,
    mode_eigenvalue,
    select_modes,
    solutions,
    verify_case5_absence,
)


def brute_solutions(p, q, N):
    """Exhaustive search independent of the isqrt-based solver."""
    return [(n, m) for n in range(1, isqrt(N) + 2) for m in range(1, isqrt(N) + 2) if n * n * p + m * m * q == N]


def test_shape_sides():
    assert CavityShape(1, 3).a == pytest.approx(sqrt(3))
    assert CavityShape(1, 4).a == pytest.approx(2.0)
    assert CavityShape(1, 3, b=2.0).a == pytest.approx(2 * sqrt(3))


@pytest.mark.parametrize("p,q,b", [(2, 4, 1.0), (0, 1, 1.0), (1, 1, -1.0), (1, 1, 0.0)])
def test_shape_rejects_bad_input(p, q, b):
    with pytest.raises(ConfigError):
        CavityShape(p, q, b)


def test_mode_eigenvalue_examples(shape13, shape14, square):
    assert mode_eigenvalue(shape13, ModeIndex(2, 6)) == pytest.approx(pi**2 * 112 / 3, rel=1e-14)
    assert mode_eigenvalue(square, ModeIndex(1, 1)) == pytest.approx(2 * pi**2, rel=1e-15)
    e1 = mode_eigenvalue(shape14, ModeIndex(12, 17))
    e2 = mode_eigenvalue(shape14, ModeIndex(20, 15))
    assert e1 == pytest.approx(e2, rel=1e-14)
    assert e1 == pytest.approx(pi**2 * 325, rel=1e-14)


def test_enumerate_class_paper_examples(shape13, shape14):
    c112 = enumerate_class(shape13, 112)
    assert [(md.n, md.m) for md in c112.modes] == [(2, 6), (8, 4), (10, 2)]
    assert [(md.n, md.m) for md in c112.modes] == sorted(brute_solutions(1, 3, 112))
    c28 = enumerate_class(shape13, 28)
    assert [(md.n, md.m) for md in c28.modes] == [(1, 3), (4, 2), (5, 1)]
    c1300 = enumerate_class(shape14, 1300)
    pairs = [(md.n, md.m) for md in c1300.modes]
    assert {(2, 18), (12, 17), (20, 15)} < set(pairs)
    assert pairs == [(2, 18), (12, 17), (20, 15), (30, 10), (34, 6), (36, 1)]
    assert pairs == sorted(brute_solutions(1, 4, 1300))


def test_enumerate_class_errors(shape13):
    with pytest.raises(NoSolutions):
        enumerate_class(shape13, 5)
    with pytest.raises(ConfigError):
        enumerate_class(shape13, 3)


def test_class_eigenvalue_matches_members(shape14):
    cls = enumerate_class(shape14, 1300)
    for md in cls.modes:
        assert mode_eigenvalue(shape14, md) == pytest.approx(cls.eigenvalue, rel=1e-14)


def test_enumerate_all_classes_examples(shape13, square):
    Ns = [c.N for c in enumerate_all_classes(shape13, 28, 3)]
    assert 28 in Ns
    assert enumerate_all_classes(square, 2, 2) == []
    c50 = [c for c in enumerate_all_classes(square, 50, 2) if c.N == 50]
    assert [(md.n, md.m) for md in c50[0].modes] == [(1, 7), (5, 5), (7, 1)]


def test_enumerate_all_classes_is_complete_and_ascending(shape13):
    classes = enumerate_all_classes(shape13, 400, 2)
    Ns = [c.N for c in classes]
    assert Ns == sorted(Ns)
    expected = [N for N in range(1, 401) if len(brute_solutions(1, 3, N)) >= 2]
    assert Ns == expected


def test_classify_examples(case1_class, case2_class, case3_class, case4_class):
    assert case1_class.case_label.number == 1 and case1_class.case_label.sigmas == (-1, -1)
    assert case2_class.case_label.number == 2 and case2_class.case_label.sigmas == (1,)
    assert case3_class.case_label.number == 3 and case3_class.case_label.sigmas == (-1,)
    assert case4_class.case_label.number == 4 and case4_class.case_label.sigmas == (-1,)
    assert str(case1_class.case_label) == "Case1(-,-)"
    assert classify_class(case2_class) == case2_class.case_label


def test_classify_case5_pattern_and_too_small():
    assert classify_parities([1, -1, 1, -1], [1, 1, -1, -1]).number == 5
    with pytest.raises(ClassTooSmall):
        classify_parities([1], [1])


def test_paper_subset_selection(shape14, case3_class):
    sub = select_modes(shape14, case3_class, [(2, 18), (12, 17), (20, 15)])
    assert len(sub) == 3 and sub.case == 3
    with pytest.raises(ConfigError):
        select_modes(shape14, case3_class, [(1, 1)])


parity = st.sampled_from([1, -1])


@given(st.lists(st.tuples(parity, parity), min_size=2, max_size=8), st.randoms())
def test_classification_invariant_under_reordering(pairs, rnd):
    s1, s2 = zip(*pairs)
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    t1, t2 = zip(*shuffled)
    assert classify_parities(s1, s2) == classify_parities(t1, t2)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.integers(2, 3000))
def test_solutions_match_brute_force(p, q, N):
    if gcd(p, q) != 1:
        return
    assert solutions(CavityShape(p, q), N) == sorted(brute_solutions(p, q, N))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(1, 7))
def test_class_members_distinct_and_exact(p, q):
    if gcd(p, q) != 1:
        return
    shape = CavityShape(p, q)
    for cls in enumerate_all_classes(shape, 3000, 2):
        ns = [md.n for md in cls.modes]
        ms = [md.m for md in cls.modes]
        assert len(set(ns)) == len(ns) and len(set(ms)) == len(ms)
        assert all(md.n**2 * p + md.m**2 * q == cls.N for md in cls.modes)
        vals = [mode_eigenvalue(shape, md) for md in cls.modes]
        assert max(vals) - min(vals) <= 8 * np.finfo(float).eps * max(vals)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30), st.integers(0, 2**31))
def test_parity_matches_reflection_numerically(n, m, seed):
    shape = CavityShape(1, 3)
    md = ModeIndex(n, m)
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.05, shape.a - 0.05, 64)
    v = rng.uniform(0.05, shape.b - 0.05, 64)
    f = basis_function(shape, md, u, v)
    keep = np.abs(f) > 1e-3
    r1 = basis_function(shape, md, shape.a - u, v)[keep] / f[keep]
    r2 = basis_function(shape, md, u, shape.b - v)[keep] / f[keep]
    np.testing.assert_allclose(r1, md.sigma1, atol=1e-12)
    np.testing.assert_allclose(r2, md.sigma2, atol=1e-12)


def test_case5_absence_examples(shape13, shape14, square):
    rep = verify_case5_absence(shape13, 5000)
    assert rep.case5_count == 0 and rep.branch == "oo" and rep.table_ok
    assert set(rep.counts) <= {1, 2}
    rep = verify_case5_absence(shape14, 5000)
    assert rep.case5_count == 0 and rep.branch == "oe" and rep.table_ok
    assert set(rep.counts) == {1, 3}
    rep = verify_case5_absence(square, 200)
    assert rep.case5_count == 0 and rep.table_ok


def test_case5_absence_even_odd_branch():
    rep = verify_case5_absence(CavityShape(4, 1), 3000)
    assert rep.branch == "eo" and rep.case5_count == 0 and rep.table_ok
    assert set(rep.counts) == {1, 4}
