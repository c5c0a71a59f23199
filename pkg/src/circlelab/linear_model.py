"""delta, the rescaled inverse iterates theta_n and the linear model L."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._numerics import REAL
from .circle_map import LiftMap, lift_inverse
from .conjugacy import GridHomeomorphism
from .dual_deriv import DualDerivativeTable


@dataclass(frozen=True)
class DeltaResult:
    value: float
    gap: float
    history: list


def delta_of(m: LiftMap, n: int) -> DeltaResult:
    """delta_n = F^{-n}(1) / F^{-(n+1)}(1); on [0,1] F^{-1} is the branch G_0."""
    if n < 2:
        raise ValueError("depth must be >= 2")
    pts = [np.array(1, dtype=REAL)]
    for _ in range(n + 1):
        pts.append(m.branch(0, pts[-1]))
    hist = [float(pts[k] / pts[k + 1]) for k in range(n + 1)]
    return DeltaResult(hist[n], abs(hist[n] - hist[n - 1]), hist)


@dataclass(frozen=True)
class Theta:
    h: GridHomeomorphism   # theta_n on [0, d^K]
    depth: int
    cauchy: list           # sup |theta_j - theta_{j-1}| for j = 2..n


def theta_n(m: LiftMap, n: int, K: int = 2, per_unit: int = 256) -> Theta:
    """theta_n(x) = F^{-n}(x) / F^{-n}(1) sampled on [0, d^K]."""
    if n < 1 or not 0 <= K <= n:
        raise ValueError("need n >= 1 and 0 <= K <= n")
    top = m.degree ** K
    x = np.arange(top * per_unit + 1, dtype=REAL) / per_unit
    one = np.asarray(x == 1).nonzero()[0][0]
    y = x.copy()
    prev = None
    cauchy = []
    for j in range(1, n + 1):
        y = lift_inverse(m, y)
        th = y / y[one]
        if prev is not None:
            cauchy.append(float(np.max(np.abs(th - prev))))
        prev = th
    th = np.asarray(prev, dtype=float)
    th[0], th[one] = 0.0, 1.0
    h = GridHomeomorphism(np.asarray(x, dtype=float), th, n, periodic=False)
    return Theta(h, n, cauchy)


@dataclass(frozen=True, eq=False)
class LinearModel:
    delta: float
    theta: GridHomeomorphism
    orbit: np.ndarray      # L^k(0) = theta(k), k = 0..d^K
    degree: int
    depth: int

    @property
    def top(self):
        return self.theta.x[-1]

    def __call__(self, x):
        """L(x) = theta(theta^{-1}(x) + 1)."""
        x = np.asarray(x, dtype=float)
        u = self.theta.inverse()(x)
        if np.any(u + 1 > self.top + 1e-12) or np.any(u < -1e-12):
            raise ValueError("point outside the range covered by theta knots")
        return self.theta(u + 1)

    def iterate(self, x, times):
        for _ in range(times):
            x = self(x)
        return x

    def to_json(self):
        ks = range(len(self.orbit))
        return json.dumps({"delta": self.delta, "degree": self.degree, "depth": self.depth,
                           "orbit": {str(k): float(v) for k, v in zip(ks, self.orbit)},
                           "theta": [[float(a), float(b)] for a, b in zip(self.theta.x, self.theta.y)]},
                          sort_keys=True)


def linear_model_map(m: LiftMap, n: int, K: int = 2, per_unit: int = 256,
                     tol: float | None = None) -> LinearModel:
    th = theta_n(m, n, K, per_unit)
    if tol is not None and th.cauchy and th.cauchy[-1] > tol:
        raise ValueError(f"theta_n not converged: last Cauchy gap {th.cauchy[-1]:.2e} > {tol:.1e}")
    delta = delta_of(m, n).value
    h = th.h
    ks = np.arange(m.degree ** K + 1, dtype=float)
    return LinearModel(delta, h, h(ks), m.degree, n)


def check_functional_eq(model: LinearModel, d: int | None = None) -> float:
    """sup |L(x) - delta^{-1} L^{(d)}(delta x)| over theta knots in range."""
    d = model.degree if d is None else d
    h = model.theta
    # stay a knot inside the range so delta-rescaling noise cannot leave it
    u = h.x[h.x < (model.top - d) / d - 1e-9]
    if len(u) < 2:
        raise ValueError("theta range too small for the functional equation")
    x = h(u)
    lhs = model(x)
    rhs = model.iterate(model.delta * x, d) / model.delta
    return float(np.max(np.abs(lhs - rhs)))


def reconstruct_from_dual(table: DualDerivativeTable, K: int, check: float = 1e-9) -> np.ndarray:
    """L^k(0) = theta(k), k = 0..d^K, from dual-derivative values alone.

    Uses theta(d l) = delta theta(l) and, on each block [b, b+d] with b = d l,
    |theta[b+j, b+j+1]| = |theta[b, b+d]| / D*(...000 w(b+j)) where w(k) is the
    base-d expansion of k at the table depth.
    """
    d, n = table.degree, table.depth
    if d ** K + d > d ** n:
        raise ValueError("table depth too small for the requested range")
    vals = table.values
    top = d ** K
    rows = vals[: top + d].reshape(-1, d)
    bad = np.abs((1 / rows).sum(axis=1) - 1)
    if bad.max() > check:
        raise ValueError(f"dual-derivative values violate the summation condition ({bad.max():.2e})")
    delta = vals[0]
    th = np.full(top + d + 1, np.nan)
    th[0], th[1] = 0.0, 1.0
    th[d] = delta
    for b in range(0, top, d):
        span = delta * th[b // d + 1] - th[b]
        steps = span / vals[b:b + d]
        th[b + 1:b + d + 1] = th[b] + np.cumsum(steps)
        # keep the scaling relation exact at block ends
        th[b + d] = delta * th[b // d + 1]
    return th[: top + 1]
