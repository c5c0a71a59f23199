"""Grid homeomorphisms, conjugacies between same-degree maps, and zeta(M)."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .circle_map import LiftMap, eval_lift, expansion_report, level_endpoints


@dataclass(frozen=True, eq=False)
class GridHomeomorphism:
    """Increasing function known on knots, interpolated between them.

    periodic=True means a lift of a circle homeomorphism on [0,1] with
    H(x+1) = H(x) + 1; otherwise the function is extended linearly past
    the end knots. With `slopes` given the interpolant is cubic Hermite.
    """
    x: np.ndarray
    y: np.ndarray
    depth: int | None = None
    periodic: bool = True
    slopes: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
            raise ValueError("knots must be two 1-d arrays of equal length")
        if np.any(np.diff(x) <= 0) or np.any(np.diff(y) <= 0):
            raise ValueError("knots must be strictly increasing in both coordinates")
        if self.periodic and (x[0] != 0 or x[-1] != 1 or y[0] != 0 or y[-1] != 1):
            raise ValueError("periodic homeomorphism knots must pin 0->0 and 1->1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.slopes is not None:
            sl = np.asarray(self.slopes, dtype=float)
            object.__setattr__(self, "slopes", sl)
            object.__setattr__(self, "_spline", CubicHermiteSpline(x, y, sl))
        seg = np.diff(x) * (y[1:] + y[:-1]) / 2
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(seg)]))

    @property
    def spacing(self):
        return float(np.max(np.diff(self.x)))

    def _eval(self, t):
        if self.slopes is not None:
            return self._spline(t)
        x, y = self.x, self.y
        out = np.interp(t, x, y)
        lo, hi = t < x[0], t > x[-1]
        if lo.any():
            out[lo] = y[0] + (t[lo] - x[0]) * (y[1] - y[0]) / (x[1] - x[0])
        if hi.any():
            out[hi] = y[-1] + (t[hi] - x[-1]) * (y[-1] - y[-2]) / (x[-1] - x[-2])
        return out

    def __call__(self, t):
        ta = np.asarray(t, dtype=float)
        t1 = np.atleast_1d(ta)
        if self.periodic:
            q = np.floor(t1)
            out = self._eval(t1 - q) + q
        else:
            out = self._eval(t1)
        return float(out[0]) if ta.ndim == 0 else out

    def _prim(self, t):
        """Primitive of the piecewise-linear interpolant on the base domain."""
        x, y = self.x, self.y
        i = np.clip(np.searchsorted(x, t, side="right") - 1, 0, len(x) - 2)
        ht = self._eval(t)
        return self._cum[i] + (t - x[i]) * (y[i] + ht) / 2

    def antiderivative(self, t):
        """C(t) with C' = H and C(0) = 0 (exact for the linear interpolant)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.slopes is not None:
            raise NotImplementedError("antiderivative is provided for linear interpolation")
        if not self.periodic:
            return self._prim(t) - self._prim(np.zeros(1))
        q = np.floor(t)
        f = t - q
        one = self._cum[-1]
        return q * one + q * (q - 1) / 2 + self._prim(f) + q * f

    def integral(self, a, b):
        """int_a^b H, summed over the knots inside [a, b] only.

        Differencing the global antiderivative loses digits on short windows
        far from the origin; the local trapezoid sum is exact for the linear
        interpolant and keeps the error relative to the window.
        """
        if self.slopes is not None:
            raise NotImplementedError("integral is provided for linear interpolation")
        a, b = float(a), float(b)
        if b < a:
            return -self.integral(b, a)
        if self.periodic:
            qs = np.arange(np.floor(a), np.floor(b) + 1)
            inner = (self.x[None, :-1] + qs[:, None]).ravel()
        else:
            inner = self.x
        inner = inner[(inner > a) & (inner < b)]
        t = np.concatenate([[a], inner, [b]])
        v = self(t)
        return float(np.sum(np.diff(t) * (v[1:] + v[:-1]) / 2))

    def inverse(self):
        # the inverse is always interpolated linearly between swapped knots
        return GridHomeomorphism(self.y, self.x, self.depth, self.periodic)

    def compose(self, other: "GridHomeomorphism"):
        """self o other on the knots of other."""
        return GridHomeomorphism(other.x, self(other.y), other.depth, self.periodic and other.periodic)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["x", "h"])
            for a, b in zip(self.x, self.y):
                wr.writerow([repr(float(a)), repr(float(b))])


def identity_homeomorphism(n_knots=2):
    x = np.linspace(0, 1, n_knots)
    return GridHomeomorphism(x, x.copy())


def _circ(v):
    return np.abs((np.asarray(v) + 0.5) % 1.0 - 0.5)


def conjugacy_map(f: LiftMap, g: LiftMap, n: int) -> GridHomeomorphism:
    """H with F o H = H o G: level-n endpoints of g go to those of f in order."""
    if f.degree != g.degree:
        raise ValueError("conjugacy needs equal degrees")
    for m in (f, g):
        if not expansion_report(m, min(n, 8) or 1).expanding:
            raise ValueError(f"{m.spec()} is not expanding at the tested depth")
    x = np.asarray(level_endpoints(g, n), dtype=float)
    y = np.asarray(level_endpoints(f, n), dtype=float)
    return GridHomeomorphism(x, y, n)


def conjugacy_residual(h: GridHomeomorphism, f: LiftMap, g: LiftMap) -> float:
    """max |F(H(x)) - H(G(x))| mod 1 over level-(n-1) knots."""
    d = g.degree
    xs = h.x[::d]
    lhs = eval_lift(f, h(xs))
    rhs = h(eval_lift(g, xs))
    return float(np.max(_circ(lhs - rhs)))


@dataclass(frozen=True)
class QSReport:
    scales: list
    maxima: list       # M(t) per scale, scales decreasing
    resolution: float  # knot spacing, all values are limited by it


def qs_report(h: GridHomeomorphism, scales, xs=None) -> QSReport:
    """M(t) = max_x max(rho, 1/rho), rho = (H(x+t)-H(x)) / (H(x)-H(x-t))."""
    ts = sorted({float(t) for t in scales}, reverse=True)
    if ts[-1] < 4 * h.spacing:
        raise ValueError(f"t = {ts[-1]} is below the knot resolution {h.spacing}")
    xs = h.x[:-1] if xs is None else np.asarray(xs, dtype=float)
    out = []
    for t in ts:
        mid = h(xs)
        rho = (h(xs + t) - mid) / (mid - h(xs - t))
        out.append(float(np.max(np.maximum(rho, 1 / rho))))
    return QSReport(ts, out, h.spacing)


def dyadic_qs_constant(h: GridHomeomorphism, levels: int) -> float:
    """Quasisymmetry constant of h restricted to dyadic triples up to a level."""
    worst = 1.0
    for k in range(1, levels + 1):
        t = 2.0 ** -k
        xs = np.arange(2 ** k) * t
        mid = h(xs)
        rho = (h(xs + t) - mid) / (mid - h(xs - t))
        worst = max(worst, float(np.max(np.maximum(rho, 1 / rho))))
    return worst


def zeta(M: float, tol: float = 1e-12, max_terms: int = 10 ** 7) -> float:
    """zeta(M) = sum_k tau_k, tau_k = max{(M/(M+1))^k - 2^-k, 2^-k - (1/(M+1))^k}.

    All tau_k are >= 0, so the sup of partial sums is the full sum. The loop
    stops once the geometric tail bound q^(K+1) (M+1) is below tol times the sum.
    """
    if M < 1:
        raise ValueError("zeta needs M >= 1")
    if M == 1:
        return 0.0
    q = M / (M + 1)
    total = 0.0
    k0 = 1
    chunk = 256
    while k0 <= max_terms:
        k = np.arange(k0, k0 + chunk, dtype=float)
        half = 0.5 ** k
        tau = np.maximum(q ** k - half, half - (1 / (M + 1)) ** k)
        # sum small terms first for accuracy within the chunk
        total += float(np.sum(tau[::-1]))
        k0 += chunk
        if q ** k0 * (M + 1) <= tol * total:
            return total
        chunk = min(chunk * 2, 2 ** 20)
    raise RuntimeError("zeta series did not reach the requested tolerance")


def vartheta_bound(M: float) -> float:
    """M - 1 + M zeta(M), the skew distortion bound."""
    return M - 1 + M * zeta(M)
