import math

import numpy as np
import pytest

from circlelab.circle_map import make_map
from circlelab.dual_deriv import dual_derivative_table
from circlelab.measures import (ConvergenceError, CylinderMeasure, cesaro_distribution,
                                dual_cylinder_measure, entropy_cylinder, entropy_rohlin,
                                equilibrium_residual, gibbs_report, inverse_derivative_potential,
                                invariant_density, lebesgue_density, radon_nikodym,
                                transfer_apply, uniform_grid)


@pytest.mark.parametrize("spec", ["power:d=3", "pl:s=0.3", "fs:s=0.9,M=4"])
def test_g_function_normalisation(spec):
    # 1/F' is a g-function exactly for the Lebesgue-preserving maps
    m = make_map(spec)
    x = uniform_grid(512)
    assert np.allclose(transfer_apply(m, None, 1.0, x), 1, atol=1e-12)


def test_g_function_trig(trig, trig_density):
    # psi = rho / (rho o F . F') is normalised; summing over branches gives 1
    rho = trig_density
    out = transfer_apply(trig, None, rho.values, rho.x) / rho.values
    assert np.allclose(out, 1, atol=1e-8)
    callable_form = transfer_apply(trig, inverse_derivative_potential(trig), 1.0, rho.x[1:-1])
    assert callable_form[0] == pytest.approx(1 / 2.5 + 1 / 1.5, abs=1e-3)


def test_transfer_grid_mismatch(trig):
    with pytest.raises(ValueError):
        transfer_apply(trig, 1.0, np.ones(7), uniform_grid(16))


@pytest.mark.parametrize("spec", ["pl:s=0.3", "fs:s=0.7,M=4"])
def test_lebesgue_invariant(spec):
    rho = invariant_density(make_map(spec), n_cells=1024)
    assert np.allclose(rho.values, 1, atol=1e-9)


def test_trig_density(trig, trig_density):
    rho = trig_density
    assert rho.integral() == pytest.approx(1, abs=1e-12)
    assert rho.values.min() > 0.9 and rho.values.max() < 1.1
    x = rho.x
    again = transfer_apply(trig, None, rho.values, x)
    assert np.max(np.abs(again - rho.values)) < 1e-8


def test_density_nonconvergence(trig):
    with pytest.raises(ConvergenceError):
        invariant_density(trig, iterations=2, n_cells=256)


@pytest.mark.parametrize("spec", ["power:d=2", "pl:s=0.3"])
def test_cesaro_lebesgue(spec):
    g = cesaro_distribution(make_map(spec), 6, n_cells=256)
    assert np.allclose(g.y, g.x, atol=1e-14)


def test_cesaro_trig_history(trig, trig_density):
    g, hist = cesaro_distribution(trig, 6, n_cells=256, history=True)
    dist = trig_density.distribution()
    errs = [np.max(np.abs(h[1:-1] - dist(g.x[1:-1]))) for h in hist]
    assert errs[-1] < errs[0]
    assert errs[-1] < 2e-3


def test_cylinder_measure_structure(trig, trig_density):
    mu = dual_cylinder_measure(trig, trig_density.distribution(), 10)
    assert mu.masses.sum() == pytest.approx(1, abs=1e-12)
    assert mu.shift_consistency() < 1e-12
    assert mu.mass("01") == pytest.approx(mu.level(2)[1])
    assert mu.level(3).sum() == pytest.approx(1)


def test_cylinder_measure_validation():
    with pytest.raises(ValueError):
        CylinderMeasure(2, 2, np.ones(3))
    with pytest.raises(ValueError):
        CylinderMeasure(1, 2, np.array([1.5, -0.5]))


def test_entropy_bernoulli_every_depth(pl):
    h = -0.3 * math.log(0.3) - 0.7 * math.log(0.7)
    est = entropy_cylinder(dual_cylinder_measure(pl, None, 8))
    assert np.allclose(est.block, h, atol=1e-12)
    assert np.allclose(est.conditional, h, atol=1e-12)


def test_entropy_upper_bound(rng):
    for d, n in [(2, 6), (3, 4)]:
        masses = rng.dirichlet(np.ones(d ** n) * 0.3)
        est = entropy_cylinder(CylinderMeasure(n, d, masses))
        assert max(est.block + est.conditional) <= math.log(d) + 1e-9


def test_entropy_cross_method(trig, trig_density):
    mu = dual_cylinder_measure(trig, trig_density.distribution(), 12)
    hc = entropy_cylinder(mu).value
    hr = entropy_rohlin(trig, trig_density)
    assert hc == pytest.approx(hr, abs=1e-3)
    assert entropy_rohlin(make_map("power:d=2")) == pytest.approx(math.log(2), abs=1e-12)


def test_entropy_pl_rohlin(pl):
    h = -0.3 * math.log(0.3) - 0.7 * math.log(0.7)
    assert entropy_rohlin(pl) == pytest.approx(h, abs=1e-12)


def test_gibbs_and_equilibrium(trig, trig_density):
    mu = dual_cylinder_measure(trig, trig_density.distribution(), 10)
    tab = dual_derivative_table(trig, 10)
    g = gibbs_report(mu, tab)
    assert 0.9 < min(g.lower) <= max(g.upper) < 1.1
    assert abs(equilibrium_residual(mu, tab)) < 1e-6


def test_radon_nikodym_pl(pl):
    rn = radon_nikodym(dual_cylinder_measure(pl, None, 6))
    want = np.where(np.arange(64) % 2 == 0, 0.3, 0.7)
    assert np.allclose(rn, want, atol=1e-12)


def test_radon_nikodym_power():
    rn = radon_nikodym(dual_cylinder_measure(make_map("power:d=2"), None, 6))
    assert np.allclose(rn, 0.5)


def test_exports(tmp_path, pl):
    lebesgue_density(8).to_csv(tmp_path / "d.csv")
    dual_cylinder_measure(pl, None, 2).to_csv(tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines()[1].startswith("00,")


def test_alias_module():
    from circlelab import measures_entropy
    assert measures_entropy.entropy_rohlin is entropy_rohlin
