"""Transfer operators, invariant densities, cylinder measures and entropy."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from ._numerics import REAL, trapezoid_weights
from .circle_map import DEFAULT_BUDGET, LiftMap, level_endpoints
from .conjugacy import GridHomeomorphism
from .dual_deriv import DualDerivativeTable
from .symbolic import SymbolWord

DEFAULT_GRID = 2 ** 14


class ConvergenceError(RuntimeError):
    pass


def uniform_grid(n_cells: int = DEFAULT_GRID):
    return np.linspace(0.0, 1.0, n_cells + 1)


@dataclass(frozen=True, eq=False)
class GridDensity:
    x: np.ndarray
    values: np.ndarray
    rule: str = "trapezoid"
    residual: float = 0.0
    iterations: int = 0

    def integral(self):
        h = self.x[1] - self.x[0]
        return float(trapezoid_weights(len(self.x), h) @ self.values)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.interp(t - np.floor(t), self.x, self.values)

    def distribution(self) -> GridHomeomorphism:
        """x -> int_0^x rho as a cubic Hermite homeomorphism (slopes = rho)."""
        cdf = cumulative_simpson(self.values, x=self.x, initial=0.0)
        cdf = cdf / cdf[-1]
        cdf[0], cdf[-1] = 0.0, 1.0
        return GridHomeomorphism(self.x, cdf, periodic=True, slopes=self.values / self.integral())

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["x", "density"])
            for a, b in zip(self.x, self.values):
                wr.writerow([repr(float(a)), repr(float(b))])


def _as_grid_fn(f, x):
    if callable(f):
        return lambda t: np.asarray(f(t), dtype=float) * np.ones_like(t, dtype=float)
    f = np.asarray(f, dtype=float)
    if f.ndim == 0:
        return lambda t: np.full(np.shape(t), float(f))
    if f.shape != x.shape:
        raise ValueError(f"grid function has {f.size} values, grid has {x.size}")
    return lambda t: np.interp(t, x, f)


def inverse_derivative_potential(m: LiftMap):
    """psi = 1/F' as a callable on [0,1]."""
    return lambda t: 1.0 / np.asarray(m.deriv01(np.asarray(t, dtype=float)), dtype=float)


def _preimages(m, x):
    """(G_k(x), G_k'(x)) for every branch, as float arrays of shape (d, len(x))."""
    xr = np.asarray(x, dtype=REAL)
    pts = np.stack([np.asarray(m.branch(k, xr), dtype=float) for k in range(m.degree)])
    slopes = np.stack([np.asarray(m.branch_slope(k, x), dtype=float) for k in range(m.degree)])
    return pts, slopes


def transfer_apply(m: LiftMap, psi, phi, x=None):
    """(L_psi phi)(x) = sum_k phi(G_k x) psi(G_k x) on the grid.

    psi, phi may be callables, constants, or arrays on the grid x. psi=None
    means psi = 1/F', taken from the exact branch slopes so that one-sided
    derivatives at branch ends are right.
    """
    x = uniform_grid() if x is None else np.asarray(x, dtype=float)
    pts, slopes = _preimages(m, x)
    fphi = _as_grid_fn(phi, x)
    if psi is None:
        return sum(fphi(p) * w for p, w in zip(pts, slopes))
    fpsi = _as_grid_fn(psi, x)
    return sum(fphi(p) * fpsi(p) for p in pts)


def invariant_density(m: LiftMap, iterations: int = 500, tol: float = 1e-10,
                      n_cells: int = DEFAULT_GRID) -> GridDensity:
    """Fixed point of L_{1/F'} iterated from rho = 1 (Lebesgue)."""
    if m.kind == "sampled":
        raise ValueError("invariant_density needs a map with closed-form branch derivatives")
    x = uniform_grid(n_cells)
    pts, w = _preimages(m, x)
    quad = trapezoid_weights(len(x), x[1] - x[0])
    rho = np.ones_like(x)
    res = np.inf
    for it in range(1, iterations + 1):
        new = sum(wk * np.interp(pk, x, rho) for pk, wk in zip(pts, w))
        new /= quad @ new
        res = float(np.max(np.abs(new - rho)))
        rho = new
        if res <= tol:
            return GridDensity(x, rho, "trapezoid", res, it)
    raise ConvergenceError(f"density iteration residual {res:.3e} > {tol:.1e} "
                           f"after {iterations} steps")


def lebesgue_density(n_cells: int = DEFAULT_GRID) -> GridDensity:
    x = uniform_grid(n_cells)
    return GridDensity(x, np.ones_like(x), "exact")


def _pullback_layers(m, x, n, budget):
    """Yield sum_l |F^{-k}([l, l+x])| for k = 0..n-1."""
    d = m.degree
    if d ** (n - 1) > budget:
        raise ValueError(f"cesaro depth {n} exceeds budget")
    layer = np.asarray(x, dtype=REAL)[None, :]
    yield np.asarray(x, dtype=float)
    for k in range(1, n):
        # preimages of l + x under F^k, grouped by word, via G_w
        layer = np.concatenate([m.branch(j, layer) for j in range(d)])
        left = np.asarray(level_endpoints(m, k, budget)[:-1], dtype=REAL)
        yield np.asarray(np.sum(layer - left[:, None], axis=0), dtype=float)


def cesaro_distribution(m: LiftMap, n: int, n_cells: int = 1024,
                        budget: int = DEFAULT_BUDGET, history: bool = False):
    """H_n(x) = (1/n) sum_{k<n} sum_l |F^{-k}([l, l+x])| on a uniform grid.

    With history=True also returns the list of H_1..H_n for oscillation checks.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    x = uniform_grid(n_cells)
    acc = np.zeros_like(x)
    hs = []
    for k, layer in enumerate(_pullback_layers(m, x, n, budget), start=1):
        acc += layer
        if history:
            hs.append(acc / k)
    y = acc / n
    y[0], y[-1] = 0.0, 1.0
    g = GridHomeomorphism(x, y, n)
    return (g, hs) if history else g


@dataclass(frozen=True, eq=False)
class CylinderMeasure:
    """masses[i] is the mass of the depth-n word with lexicographic index i."""
    depth: int
    degree: int
    masses: np.ndarray
    side: str = "dual"   # "dual" (Sigma*) or "sigma" (Sigma)

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if m.shape != (self.degree ** self.depth,):
            raise ValueError("mass table size does not match depth and degree")
        if np.any(m < 0):
            raise ValueError("masses must be nonnegative")
        object.__setattr__(self, "masses", m)

    def level(self, k):
        """Masses of the depth-k words (k <= depth), by summing trailing digits."""
        return self.masses.reshape(self.degree ** k, -1).sum(axis=1)

    def mass(self, w):
        w = SymbolWord.parse(str(w), self.degree)
        return float(self.level(len(w))[w.index])

    def shift_consistency(self):
        """max |m(w) - sum_i m(i w)| at depth n-1: invariance under the left shift."""
        d, n = self.degree, self.depth
        by_last = self.level(n - 1)
        by_first = self.masses.reshape(d, -1).sum(axis=0)
        return float(np.max(np.abs(by_last - by_first)))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["word", "mass"])
            for i, v in enumerate(self.masses):
                wr.writerow([str(SymbolWord.from_index(i, self.depth, self.degree)), repr(float(v))])


def dual_cylinder_measure(m: LiftMap, dist, n: int, budget: int = DEFAULT_BUDGET,
                          side: str = "dual") -> CylinderMeasure:
    """mass(w*_n) = mu([a, b]) for I_{w_n} = [a, b].

    dist is a distribution function (GridHomeomorphism or callable); None means
    Lebesgue, for which the masses are exact interval lengths.
    """
    e = level_endpoints(m, n, budget)
    if dist is None:
        masses = np.asarray(np.diff(e), dtype=float)
    else:
        v = np.asarray(dist(np.asarray(e, dtype=float)), dtype=float)
        masses = np.diff(v)
    return CylinderMeasure(n, m.degree, masses, side)


@dataclass(frozen=True)
class GibbsReport:
    depths: list
    lower: list
    upper: list


def gibbs_report(mu: CylinderMeasure, table: DualDerivativeTable) -> GibbsReport:
    """Extremes of mu([w*_k]) / prod_{l<k} 1/D*((sigma*)^l w*_k) for k = 1..n.

    (sigma*)^l w*_k has length k - l and is looked up at its own depth.
    """
    if mu.degree != table.degree or mu.depth > table.depth:
        raise ValueError("measure and dual-derivative table do not match")
    d = mu.degree
    lo, hi, ds = [], [], []
    for k in range(1, mu.depth + 1):
        idx = np.arange(d ** k)
        logw = np.zeros(d ** k)
        for l in range(k):
            logw -= np.log(table.levels[k - l - 1][idx // d ** l])
        ratio = mu.level(k) / np.exp(logw)
        ds.append(k)
        lo.append(float(ratio.min()))
        hi.append(float(ratio.max()))
    return GibbsReport(ds, lo, hi)


def radon_nikodym(mu: CylinderMeasure) -> np.ndarray:
    """mass(w*_n) / mass(sigma* w*_n) per word (sigma* drops the last digit)."""
    parent = mu.level(mu.depth - 1)
    if np.any(parent <= 0):
        raise ZeroDivisionError("a parent cylinder has zero mass")
    return mu.masses / np.repeat(parent, mu.degree)


def _xlogx(p):
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


@dataclass(frozen=True)
class EntropyEstimate:
    block: list        # (1/k) sum -m log m, k = 1..n
    conditional: list  # sum -m log(m / m(parent)), k = 1..n

    @property
    def value(self):
        return self.conditional[-1]


def entropy_cylinder(mu: CylinderMeasure) -> EntropyEstimate:
    """Both cylinder forms of the entropy, per depth.

    The parent of a word is sigma* w (drop last digit) on the dual side and
    sigma w (drop first digit) on the Sigma side.
    """
    d = mu.degree
    block, cond = [], []
    prev = np.ones(1)
    for k in range(1, mu.depth + 1):
        mk = mu.level(k)
        block.append(float(-np.sum(_xlogx(mk)) / k))
        idx = np.arange(d ** k)
        parent = prev[idx // d] if mu.side == "dual" else prev[idx % d ** (k - 1)]
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(mk > 0, mk / np.where(parent > 0, parent, 1), 0)
        cond.append(float(-np.sum(mk * np.where(q > 0, np.log(np.where(q > 0, q, 1)), 0))))
        prev = mk
    return EntropyEstimate(block, cond)


def entropy_rohlin(m: LiftMap, density: GridDensity | None = None) -> float:
    """int_0^1 log F'(x) rho(x) dx.

    Computed branch by branch in the image variable: with y = F(x) on branch
    k the integral is sum_k int_0^1 -log G_k'(y) rho(G_k y) G_k'(y) dy, whose
    integrands are smooth in y even when F' jumps between branches.
    """
    if m.kind == "sampled":
        raise ValueError("entropy_rohlin needs a map with closed-form branch derivatives")
    if density is None:
        density = lebesgue_density()
    x = density.x
    pts, w = _preimages(m, x)
    integrand = sum(-np.log(wk) * density(pk) * wk for pk, wk in zip(pts, w))
    quad = trapezoid_weights(len(x), x[1] - x[0])
    return float(quad @ integrand / density.integral())


def equilibrium_residual(mu: CylinderMeasure, table: DualDerivativeTable) -> float:
    """h(mu) + int log psi dmu at depth n with psi = 1/D* (zero for the dual g-measure)."""
    h = entropy_cylinder(mu).conditional[-1]
    return float(h + np.sum(mu.masses * np.log(1 / table.levels[mu.depth - 1])))
