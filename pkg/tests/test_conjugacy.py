import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from circlelab.circle_map import level_endpoints, make_map
from circlelab.conjugacy import (GridHomeomorphism, conjugacy_map, conjugacy_residual,
                                 dyadic_qs_constant, identity_homeomorphism, qs_report,
                                 vartheta_bound, zeta)


def _random_homeo(rng, n=9):
    y = np.concatenate([[0], np.sort(rng.uniform(0, 1, n - 2)), [1]])
    return GridHomeomorphism(np.linspace(0, 1, n), y)


def test_validation():
    with pytest.raises(ValueError):
        GridHomeomorphism([0, 0.5, 1], [0, 0.7, 0.6])
    with pytest.raises(ValueError):
        GridHomeomorphism([0, 0.5, 0.9], [0, 0.5, 1])


def test_periodic_lift(rng):
    h = _random_homeo(rng)
    x = rng.uniform(-3, 3, 20)
    assert np.allclose(h(x + 1), h(x) + 1)
    assert np.allclose(h.inverse()(h(x)), x, atol=1e-12)
    assert h(0.0) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-2.5, 2.5), st.floats(0.01, 3))
def test_exact_integral(seed, a, w):
    h = _random_homeo(np.random.default_rng(seed))
    want, _ = quad(h, a, a + w, limit=400, points=np.arange(np.floor(a), a + w + 1, 0.125))
    assert h.integral(a, a + w) == pytest.approx(want, abs=1e-9)


def test_compose_identity(rng):
    h = _random_homeo(rng)
    c = h.inverse().compose(h)
    assert np.allclose(c.y, c.x, atol=1e-14)


def test_conjugacy_pl_power(pl):
    q = make_map("power:d=2")
    h = conjugacy_map(pl, q, 10)
    assert conjugacy_residual(h, pl, q) <= 1e-13
    # dyadic k/2^n goes to the k-th PL level endpoint
    assert np.allclose(h.y, np.asarray(level_endpoints(pl, 10), dtype=float))
    assert np.allclose(h.x, np.arange(2 ** 10 + 1) / 2 ** 10)


def test_self_conjugacy_is_identity(trig):
    h = conjugacy_map(trig, trig, 8)
    assert np.array_equal(h.x, h.y)


def test_degree_mismatch(trig):
    with pytest.raises(ValueError):
        conjugacy_map(trig, make_map("power:d=3"), 5)


def test_qs_report_identity_and_resolution():
    h = GridHomeomorphism(np.linspace(0, 1, 257), np.linspace(0, 1, 257))
    rep = qs_report(h, [0.25, 0.0625])
    assert rep.maxima == pytest.approx([1, 1])
    with pytest.raises(ValueError):
        qs_report(h, [1e-3])
    assert dyadic_qs_constant(identity_homeomorphism(), 6) == pytest.approx(1)


def test_qs_pl_conjugacy_unbounded(pl):
    h = conjugacy_map(pl, make_map("power:d=2"), 12)
    rep = qs_report(h, [2.0 ** -k for k in range(1, 8)])
    # at x = 0 the ratio is s^k / r^k, so the PL conjugacy is not quasisymmetric
    for k, v in enumerate(rep.maxima, start=1):
        assert v >= (7 / 3) ** k * (1 - 1e-9)


@pytest.mark.parametrize("M", [1.0, 1.1, 1.5, 2.0, 3.0, 7.5])
def test_zeta_closed_form(M):
    # summing the two geometric tails gives zeta(M) = M - 1
    assert zeta(M) == pytest.approx(M - 1, abs=1e-10)
    assert vartheta_bound(M) == pytest.approx(M - 1 + M * (M - 1), abs=1e-9)


def test_zeta_domain():
    assert zeta(1) == 0.0
    with pytest.raises(ValueError):
        zeta(0.5)


def test_csv(tmp_path, rng):
    h = _random_homeo(rng)
    h.to_csv(tmp_path / "h.csv")
    assert (tmp_path / "h.csv").read_text().startswith("x,h\n")
