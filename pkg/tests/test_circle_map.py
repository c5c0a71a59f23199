import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circlelab._numerics import REAL, BracketError, bisect_increasing, fit_geometric
from circlelab.circle_map import (BudgetError, MapError, derivative, eval_lift, expansion_report,
                                  holder_distortion, inverse_branch, inverse_iterate,
                                  level_endpoints, lift_inverse, load_sampled_csv, make_map,
                                  parse_map_spec, symmetry_modulus)


def test_parse_spec():
    assert parse_map_spec("trig:d=2,eps=0.5") == {"kind": "trig-perturbed", "d": 2, "eps": 0.5}
    assert parse_map_spec("q:d=3") == {"kind": "power", "d": 3}
    with pytest.raises(MapError):
        parse_map_spec("nope:d=2")
    with pytest.raises(MapError):
        parse_map_spec("pl:s")


@pytest.mark.parametrize("spec", ["trig:d=2,eps=1.0", "trig:d=3,eps=-2", "pl:s=0", "pl:s=1.2",
                                  "fs:s=0.3,M=4", "power:d=1", "pl:s=0.3,zz=1"])
def test_invalid_maps(spec):
    with pytest.raises(MapError):
        make_map(spec)


@pytest.mark.parametrize("spec", ["power:d=2", "power:d=3", "trig:d=2,eps=0.5", "pl:s=0.3",
                                  "fs:s=0.7,M=4"])
def test_lift_degree(spec):
    m = make_map(spec)
    x = np.linspace(-2, 2, 41)
    assert np.allclose(eval_lift(m, x + 1), eval_lift(m, x) + m.degree, atol=1e-12)
    assert eval_lift(m, 0.0) == 0.0
    assert eval_lift(m, 1.0) == pytest.approx(m.degree, abs=1e-15)


def test_power_closed_forms():
    m = make_map("power:d=3")
    assert eval_lift(m, 0.25) == 0.75
    assert inverse_branch(m, 2, 0.5) == pytest.approx(2.5 / 3)
    e = np.asarray(level_endpoints(m, 3), dtype=float)
    assert np.allclose(e, np.arange(28) / 27, atol=1e-18)


def test_pl_closed_forms(pl):
    assert eval_lift(pl, 0.15) == pytest.approx(0.5)
    assert eval_lift(pl, 0.65) == pytest.approx(1.5)
    assert derivative(pl, 0.1) == pytest.approx(10 / 3)
    assert derivative(pl, 0.5) == pytest.approx(10 / 7)
    assert inverse_branch(pl, 1, 0.5) == pytest.approx(0.65)


def test_trig_fixed_point_slope(trig):
    assert derivative(trig, 0.0) == pytest.approx(2.5)
    assert derivative(trig, 0.5) == pytest.approx(1.5)


def test_inverse_branch_validates(trig):
    with pytest.raises(ValueError):
        inverse_branch(trig, 2, 0.5)
    with pytest.raises(ValueError):
        inverse_branch(trig, 0, 1.5)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.sampled_from(["trig:d=2,eps=0.5", "trig:d=3,eps=1.5",
                                          "pl:s=0.3", "fs:s=0.9,M=4"]))
def test_lift_inverse_roundtrip(y, spec):
    m = make_map(spec)
    x = lift_inverse(m, np.array([y], dtype=REAL))
    assert float(eval_lift(m, x)[0]) == pytest.approx(y, abs=1e-13)


def test_shared_endpoints_bitwise(trig):
    # G_k(1) and G_{k+1}(0) hit the same target and must coincide exactly
    for k in range(trig.degree - 1):
        assert trig.branch(k, REAL(1)) == trig.branch(k + 1, REAL(0))


@pytest.mark.parametrize("spec", ["trig:d=2,eps=0.5", "trig:d=3,eps=0.2", "pl:s=0.3",
                                  "fs:s=0.7,M=4"])
def test_level_refines(spec):
    m = make_map(spec)
    e4 = level_endpoints(m, 4)
    e5 = level_endpoints(m, 5)
    assert len(e5) == m.degree ** 5 + 1
    assert np.all(np.diff(e5) > 0)
    assert e5[0] == 0 and e5[-1] == 1
    assert np.all(np.isin(e4, e5))


def test_level_budget(trig):
    with pytest.raises(BudgetError):
        level_endpoints(trig, 20, budget=1000)


def test_inverse_iterate_derivative(trig):
    y = np.linspace(0.1, 0.9, 5)
    x, der = inverse_iterate(trig, y, 3, with_derivative=True)
    h = 1e-6
    xp = inverse_iterate(trig, y + h, 3)
    xm = inverse_iterate(trig, y - h, 3)
    fd = np.asarray((xp - xm) / (2 * h), dtype=float)
    assert np.allclose(der, fd, rtol=1e-6)


def test_expansion(trig):
    rep = expansion_report(trig, 10)
    assert rep.expanding and rep.lam > 1
    assert rep.iota < 2.0 ** -8


def test_fs_tiles_and_amplitude():
    for s in (0.5, 0.7, 0.9, 0.97):
        m = make_map("fs-smooth", s=s, M=4)
        r = 1 - s
        # the bump area fixes the amplitude in closed form
        if r / 2 - r * r > 0:
            assert m.amp == pytest.approx(1 / r + 2 / s, rel=1e-9)
        y = np.linspace(0, 1, 101)
        tot = sum(np.asarray(m.branch_slope(k, y)) for k in range(2))
        assert np.allclose(tot, 1, atol=1e-12)
        assert float(m.Phi(REAL(0))) == 1.0


def test_fs_derivative_bounds():
    m = make_map("fs:s=0.9,M=4")
    x = np.linspace(0, 1, 2001)
    fp = derivative(m, x)
    assert fp.min() > 1
    assert fp.max() <= 4 / 0.1 * 1.0001


def test_sampled_matches_source(tmp_path, trig):
    xs = np.linspace(0, 1, 513)
    path = tmp_path / "trig.csv"
    with open(path, "w") as fh:
        fh.write("x,F\n")
        for a, b in zip(xs, eval_lift(trig, xs)):
            fh.write(f"{float(a)!r},{float(b)!r}\n")
    m = load_sampled_csv(path)
    assert m.degree == 2
    x = np.linspace(0.01, 0.99, 50)
    assert np.allclose(eval_lift(m, x), eval_lift(trig, x), atol=1e-8)
    assert make_map(f"sampled:path={path}").degree == 2


def test_sampled_rejects_bad(tmp_path):
    with pytest.raises(MapError):
        make_map("sampled", xs=[0, 0.5, 1], fs=[0, 1.5, 1.8])


def test_symmetry_modulus_power_zero():
    rep = symmetry_modulus(make_map("power:d=2"), 4, [0.25, 0.125])
    assert rep.sup == pytest.approx(0, abs=1e-12)


def test_symmetry_modulus_trig_decreases(trig):
    rep = symmetry_modulus(trig, 6, [0.25, 0.125, 0.0625, 0.03125])
    vals = [v for _, v in rep.samples]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert rep.omega is not None


def test_symmetry_modulus_pl_kinks(pl):
    # PL pull-backs keep a kink of ratio r/s at every scale
    rep = symmetry_modulus(pl, 4, [0.25, 0.0625])
    assert min(v for _, v in rep.samples) > 0.5


def test_holder_distortion_bounded(trig):
    out = holder_distortion(trig, [2, 4, 6])
    vals = list(out.values())
    assert max(vals) < 2 * vals[0] + 1


def test_bisect_and_fit():
    f = lambda x: x ** 3
    root = bisect_increasing(f, np.array([0.125, 8.0]), 0.0, 3.0)
    assert np.allclose(root, [0.5, 2.0])
    with pytest.raises(BracketError):
        bisect_increasing(f, np.array([100.0]), 0.0, 3.0)
    c, tau = fit_geometric([3 * 0.5 ** k for k in range(1, 10)])
    assert tau == pytest.approx(0.5) and c == pytest.approx(3)
