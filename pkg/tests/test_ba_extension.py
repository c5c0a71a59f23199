import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from circlelab.ba_extension import (affine_line, beltrami_at, beltrami_field, extend_at,
                                    line_map, piecewise_line, skew_rho, vanishing_profile,
                                    window_qs_constant, write_field_csv)
from circlelab.circle_map import make_map
from circlelab.conjugacy import conjugacy_map, vartheta_bound

IDENT = affine_line(1.0, 0.0)
KINK = piecewise_line([-10.0, 0.0, 10.0], [-20.0, 0.0, 10.0])   # 2x left of 0, x right
MU_KINK = (5 - 20j) / 51


def test_extend_closed_forms():
    assert extend_at(IDENT, 0.3 + 0.2j) == pytest.approx((0.3, 0.2))
    assert extend_at(affine_line(2.0), 0.4 + 0.7j) == pytest.approx((0.8, 1.4))
    for y in (0.1, 1.0, 3.0):
        assert extend_at(KINK, 1j * y) == pytest.approx((-y / 4, 3 * y / 2))
    with pytest.raises(ValueError):
        extend_at(IDENT, 0.5 - 0.1j)


def test_beltrami_identity():
    b = beltrami_at(IDENT, 0.2 + 0.4j)
    assert (b.a, b.b, b.c) == pytest.approx((0, 1, 0), abs=1e-14)
    assert abs(b.K - 1) < 1e-14 and abs(b.mu) < 1e-14


@pytest.mark.parametrize("y", [0.1, 1.0, 7.5])
def test_beltrami_kink(y):
    b = beltrami_at(KINK, 1j * y)
    assert abs(b.mu - MU_KINK) < 1e-9
    assert abs(b.mu) == pytest.approx(0.4042, abs=1e-4)
    assert b.b > 0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 5), st.floats(-3, 3), st.floats(0.2, 4), st.floats(-2, 2),
       st.floats(-1, 1), st.floats(0.05, 2))
@example(1.0, 0.0, 0.203125, 0.0, 1.0, 0.05)   # short window far from the knots
def test_affine_naturality(a, b, c, e, x, y):
    # (A o H o B)~ = A o H~ o B with A(u) = a u + b, B(z) = c z + e
    xs = np.array([-40.0, -3.0, 0.0, 2.0, 40.0])
    ys = np.array([-60.0, -4.0, 0.0, 1.0, 30.0])
    H = piecewise_line(xs, ys)
    AHB = piecewise_line((xs - e) / c, a * ys + b)
    z = complex(x, y)
    u, v = extend_at(AHB, z)
    bu, bv = extend_at(H, c * z + e)
    assert complex(u, v) == pytest.approx(a * complex(bu, bv) + b, abs=1e-9)
    assert beltrami_at(AHB, z).mu == pytest.approx(beltrami_at(H, c * z + e).mu, abs=1e-9)


def test_derivatives_match_finite_differences():
    f = lambda t: np.asarray(t) + 0.1 * np.sin(2 * np.pi * np.asarray(t)) / (2 * np.pi)
    F = lambda t: t * t / 2 - 0.1 * np.cos(2 * np.pi * t) / (2 * np.pi) ** 2
    H = line_map(f, F)
    x, y, h = 0.23, 0.11, 1e-5
    b = beltrami_at(H, complex(x, y))
    ux = (extend_at(H, complex(x + h, y))[0] - extend_at(H, complex(x - h, y))[0]) / (2 * h)
    vy = (extend_at(H, complex(x, y + h))[1] - extend_at(H, complex(x, y - h))[1]) / (2 * h)
    L, R = b.L, b.R
    assert ux == pytest.approx((R + L) / (2 * y), rel=1e-6)
    assert vy == pytest.approx((R + L - b.Rp - b.Lp) / y, rel=1e-6)
    assert abs(b.mu) < 1
    # quad fallback without a primitive gives the same extension
    assert extend_at(line_map(f), complex(x, y)) == pytest.approx(extend_at(H, complex(x, y)))


def test_skew_rho():
    assert skew_rho(IDENT, 0.3, 0.2, 0.4) == pytest.approx(0.4)
    assert skew_rho(KINK, 0.0, 0.5, 0.3) == pytest.approx(0.15)
    assert skew_rho(KINK, 0.0, -0.5, 1.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        skew_rho(IDENT, 0, 0.1, 1.5)


def test_skew_bound_on_conjugacy(trig):
    h = conjugacy_map(trig, make_map("power:d=2"), 12)
    for x, y in [(0.3, 0.1), (0.55, 0.05), (0.8, 0.2)]:
        M = window_qs_constant(h, x, y)
        bound = vartheta_bound(M)
        for k in (0.25, 0.5, 1.0):
            assert abs(skew_rho(h, x, y, k) - k) <= bound


def test_vanishing_profiles(trig):
    assert vanishing_profile(IDENT, [1, 0.1], [0.0, 0.5]).sup_mu == pytest.approx([0, 0], abs=1e-13)
    prof = vanishing_profile(KINK, [0.5, 0.05, 0.005], [0.0], other=KINK)
    assert prof.sup_mu == pytest.approx([abs(MU_KINK)] * 3, abs=1e-9)
    assert prof.sup_diff == [0.0, 0.0, 0.0]
    h = conjugacy_map(trig, make_map("power:d=2"), 12)
    xs = np.linspace(0, 1, 17)[:-1] + 1 / 64
    p = vanishing_profile(h, [0.2, 0.02, 0.005], xs)
    assert p.sup_mu[-1] < p.sup_mu[0]
    assert max(p.sup_mu) < 1
    with pytest.raises(ValueError):
        vanishing_profile(IDENT, [0.0], [0.0])


def test_field_csv(tmp_path):
    rows = beltrami_field(KINK, [0.0, 0.5], [0.1, 0.2])
    assert rows.shape == (4, 5)
    write_field_csv(rows, tmp_path / "f.csv")
    assert (tmp_path / "f.csv").read_text().startswith("x,y,re_mu,im_mu,abs_mu\n")
