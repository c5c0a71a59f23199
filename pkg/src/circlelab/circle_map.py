"""Circle endomorphisms represented by their lifts.

A degree-d map is stored through its lift F on [0,1] with F(0)=0, F(1)=d.
Everything else (periodic extension, inverse branches, partition levels)
is derived from `lift01` and `branch`.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from ._numerics import REAL, TWO_PI, bisect_increasing, newton_increasing

KINDS = ("power", "trig-perturbed", "piecewise-linear", "fs-smooth", "sampled")
_ALIASES = {
    "power": "power", "q": "power",
    "trig": "trig-perturbed", "trig-perturbed": "trig-perturbed",
    "pl": "piecewise-linear", "piecewise-linear": "piecewise-linear",
    "fs": "fs-smooth", "fs-smooth": "fs-smooth",
    "sampled": "sampled",
}

DEFAULT_BUDGET = 2 ** 22   # max number of intervals in one level
_MEMO_LIMIT = 2 ** 16      # levels up to this size are kept on the map


class MapError(ValueError):
    """Invalid map parameters."""


class BudgetError(ValueError):
    """Requested level is larger than the configured budget."""


@dataclass(frozen=True, eq=False)
class LiftMap:
    degree: int
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    kind = "abstract"

    @property
    def params(self) -> dict:
        return {}

    def spec(self) -> str:
        body = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind}:{body}"

    def lift01(self, x):
        raise NotImplementedError

    def deriv01(self, x, side="right"):
        raise NotImplementedError

    def branch(self, k, y):
        """G_k(y) = F^{-1}(y + k) for y in [0,1]."""
        y = np.asarray(y, dtype=REAL)
        return bisect_increasing(self.lift01, y + k, REAL(0), REAL(1))

    def branch_slope(self, k, y):
        """G_k'(y) = 1 / F'(G_k(y)), taken inside branch k."""
        x = np.asarray(self.branch(k, y), dtype=float)
        # at the branch ends use the one-sided derivative from inside
        left = self.deriv01(x, side="left")
        right = self.deriv01(x, side="right")
        lo = float(self.branch(k, 0))
        return 1.0 / np.where(x <= lo, right, left)

    def __call__(self, x):
        return eval_lift(self, x)


@dataclass(frozen=True, eq=False)
class PowerMap(LiftMap):
    kind = "power"

    @property
    def params(self):
        return {"d": self.degree}

    def lift01(self, x):
        return self.degree * np.asarray(x)

    def deriv01(self, x, side="right"):
        return np.full(np.shape(x), float(self.degree))

    def branch(self, k, y):
        return (np.asarray(y, dtype=REAL) + k) / self.degree

    def branch_slope(self, k, y):
        return np.full(np.shape(y), 1.0 / self.degree)


@dataclass(frozen=True, eq=False)
class TrigMap(LiftMap):
    eps: float = 0.0
    kind = "trig-perturbed"

    @property
    def params(self):
        return {"d": self.degree, "eps": self.eps}

    def lift01(self, x):
        x = np.asarray(x)
        # reduce to [-1/2, 1/2] so that sin vanishes exactly at 0 and 1
        u = np.where(x > 0.5, x - 1, x)
        c = REAL(self.eps) / TWO_PI if x.dtype == REAL else self.eps / (2 * np.pi)
        tp = TWO_PI if x.dtype == REAL else 2 * np.pi
        return self.degree * x + c * np.sin(tp * u)

    def deriv01(self, x, side="right"):
        return self.degree + self.eps * np.cos(2 * np.pi * np.asarray(x, dtype=float))

    def _deriv_ext(self, x):
        return self.degree + REAL(self.eps) * np.cos(TWO_PI * x)

    def branch(self, k, y):
        y = np.asarray(y, dtype=REAL)
        t = y + k
        return newton_increasing(self.lift01, self._deriv_ext, t, REAL(0), REAL(1),
                                 x0=t / self.degree)


@dataclass(frozen=True, eq=False)
class PLMap(LiftMap):
    s: float = 0.5
    kind = "piecewise-linear"

    @property
    def params(self):
        return {"s": self.s}

    def lift01(self, x):
        x = np.asarray(x)
        s = x.dtype.type(self.s) if x.dtype == REAL else self.s
        r = 1 - s
        return np.where(x <= s, x / s, 1 + (x - s) / r)

    def deriv01(self, x, side="right"):
        x = np.asarray(x, dtype=float)
        s, r = self.s, 1 - self.s
        on_left = (x < s) | ((x == s) & (side == "left"))
        return np.where(on_left, 1 / s, 1 / r)

    def branch(self, k, y):
        y = np.asarray(y, dtype=REAL)
        s = REAL(self.s)
        if k == 0:
            return s * y
        return s + (1 - s) * y

    def branch_slope(self, k, y):
        return np.full(np.shape(y), self.s if k == 0 else 1 - self.s)


@dataclass(frozen=True, eq=False)
class FsSmoothMap(LiftMap):
    """Two-branch Lebesgue-preserving map with a long short branch.

    Built from a bump phi on [-r, 0] (r = 1 - s): branch 1 is
    F(x) = 1 + Phi(x - 1) on [s, 1] and branch 0 is parametrised by
    t in [-r, 0] through x = Phi(t) - t - r, F = Phi(t), where Phi is the
    primitive of phi with Phi(-r) = 0. Then 1/F' sums to 1 over branches.
    """
    s: float = 0.5
    M: float = 4.0
    amp: float = field(default=0.0, init=False)
    _norm: object = field(default=1.0, init=False, repr=False)
    kind = "fs-smooth"

    def __post_init__(self):
        if not 0 < self.s < 1:
            raise MapError("fs-smooth needs 0 < s < 1")
        if self.M <= 1:
            raise MapError("fs-smooth needs M > 1")
        if self.s < 0.5:
            raise MapError("fs-smooth bump is infeasible for s < 1/2 "
                           "(phi must stay >= 1/r on [-r,-r/2])")
        object.__setattr__(self, "amp", self._solve_amplitude())
        # absorb the float-level solve residual so that Phi(0) = 1 exactly
        object.__setattr__(self, "_norm", self._Phi(REAL(0), normed=False))

    @property
    def params(self):
        return {"s": self.s, "M": self.M}

    @property
    def _r(self):
        return 1 - REAL(self.s)

    def _solve_amplitude(self):
        r = 1 - self.s
        lb = r / 2 - r * r
        if lb <= 0:
            return 1 / r
        lo, hi = 1 / r, self.M / r
        f = lambda a: float(self._Phi(REAL(0), REAL(a), normed=False)) - 1.0
        if f(lo) > 0 or f(hi) < 0:
            raise MapError(f"fs-smooth bump infeasible: M={self.M} too small for s={self.s}")
        return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    def phi(self, t):
        t = np.asarray(t, dtype=REAL)
        r = self._r
        s = 1 - r
        a = REAL(self.amp)
        lb = r / 2 - r * r
        lc = r * r
        out = np.full(t.shape, 1 / r, dtype=REAL)
        if lb > 0:
            u = np.clip((t + r / 2) / lb, 0, 1)
            bump = 1 / r + (a - 1 / r) * (1 - np.cos(TWO_PI * u)) / 2
            out = np.where((t > -r / 2) & (t < -lc), bump, out)
        u = np.clip((t + lc) / lc, 0, 1)
        ramp = 1 / s + (1 / r - 1 / s) * (1 + np.cos(TWO_PI / 2 * u)) / 2
        out = np.where(t >= -lc, ramp, out)
        return out / self._norm

    def _Phi(self, t, amp=None, normed=True):
        t = np.asarray(t, dtype=REAL)
        r = self._r
        s = 1 - r
        a = REAL(self.amp) if amp is None else amp
        lb = r / 2 - r * r
        lc = r * r
        pi = TWO_PI / 2
        # segment A: constant 1/r on [-r, -r/2]
        ta = np.minimum(t, -r / 2)
        out = (ta + r) / r
        if lb > 0:
            tb = np.clip(t, -r / 2, -lc)
            u = (tb + r / 2) / lb
            out = out + (tb + r / 2) / r + (a - 1 / r) * lb / 2 * (u - np.sin(TWO_PI * u) / TWO_PI)
        tc = np.clip(t, -lc, 0)
        u = (tc + lc) / lc
        out = out + (tc + lc) / s + (1 / r - 1 / s) * lc / 2 * (u + np.sin(pi * u) / pi)
        return out / self._norm if normed else out

    def Phi(self, t):
        return self._Phi(t)

    def Phi_inv(self, y):
        y = np.asarray(y, dtype=REAL)
        r = self._r
        return newton_increasing(self._Phi, self.phi, y, -r, REAL(0), x0=r * (y - 1))

    def _t_of_x0(self, x):
        # branch 0 parameter: x = Phi(t) - t - r
        r = self._r
        g = lambda t: self._Phi(t) - t - r
        dg = lambda t: self.phi(t) - 1
        return newton_increasing(g, dg, np.asarray(x, dtype=REAL), -r, REAL(0))

    def lift01(self, x):
        x = np.asarray(x)
        dt = x.dtype
        xr = x.astype(REAL)
        r = self._r
        brk = 1 - r
        out = np.empty(xr.shape, dtype=REAL)
        m0 = xr <= brk
        if m0.any():
            out[m0] = self._Phi(self._t_of_x0(xr[m0]))
        if (~m0).any():
            out[~m0] = 1 + self._Phi(xr[~m0] - 1)
        return out.astype(dt) if dt != REAL else out

    def deriv01(self, x, side="right"):
        x = np.asarray(x, dtype=REAL)
        brk = 1 - self._r
        on0 = (x < brk) | ((x == brk) & (side == "left"))
        out = np.empty(x.shape, dtype=float)
        if on0.any():
            p = self.phi(self._t_of_x0(x[on0]))
            out[on0] = np.asarray(p / (p - 1), dtype=float)
        if (~on0).any():
            out[~on0] = np.asarray(self.phi(x[~on0] - 1), dtype=float)
        return out

    def branch(self, k, y):
        y = np.asarray(y, dtype=REAL)
        t = self.Phi_inv(y)
        if k == 1:
            return 1 + t
        return y - self._r - t

    def branch_slope(self, k, y):
        p = np.asarray(self.phi(self.Phi_inv(y)), dtype=float)
        return 1 / p if k == 1 else 1 - 1 / p


@dataclass(frozen=True, eq=False)
class SampledMap(LiftMap):
    xs: np.ndarray = None
    fs: np.ndarray = None
    source: str = ""
    kind = "sampled"

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        fs = np.asarray(self.fs, dtype=float)
        if xs.ndim != 1 or xs.shape != fs.shape or len(xs) < 3:
            raise MapError("sampled map needs two equal-length columns with >= 3 rows")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(fs) <= 0):
            raise MapError("sampled map samples must be strictly increasing")
        if abs(xs[0]) > 1e-12 or abs(xs[-1] - 1) > 1e-12:
            raise MapError("sample grid must span [0,1]")
        if abs(fs[0]) > 1e-12 or abs(fs[-1] - self.degree) > 1e-12:
            raise MapError("sampled map must satisfy F(0)=0 and F(1)=d")
        xs[0], xs[-1], fs[0], fs[-1] = 0.0, 1.0, 0.0, float(self.degree)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "fs", fs)
        object.__setattr__(self, "_pchip", PchipInterpolator(xs, fs))

    @property
    def params(self):
        return {"d": self.degree, "path": self.source or f"<{len(self.xs)} samples>"}

    def lift01(self, x):
        x = np.asarray(x)
        out = self._pchip(np.asarray(x, dtype=float))
        out = np.where(x <= 0, 0.0, np.where(x >= 1, float(self.degree), out))
        return out.astype(x.dtype) if x.dtype == REAL else out

    def deriv01(self, x, side="right"):
        return self._pchip.derivative()(np.asarray(x, dtype=float))

    def branch(self, k, y):
        y = np.asarray(y, dtype=float)
        return bisect_increasing(self.lift01, y + k, 0.0, 1.0).astype(REAL)


def _num(v):
    f = float(v)
    return int(f) if f.is_integer() and "." not in str(v) else f


def parse_map_spec(text: str) -> dict:
    """'trig:d=2,eps=0.5' -> {'kind': 'trig-perturbed', 'd': 2, 'eps': 0.5}"""
    head, _, body = text.strip().partition(":")
    kind = _ALIASES.get(head.strip().lower())
    if kind is None:
        raise MapError(f"unknown map kind {head!r}")
    out = {"kind": kind}
    for item in filter(None, (p.strip() for p in body.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise MapError(f"bad map parameter {item!r}")
        key = key.strip()
        out[key] = val.strip() if key == "path" else _num(val.strip())
    return out


def load_sampled_csv(path, degree=None) -> SampledMap:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    try:
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    except ValueError as exc:
        raise MapError(f"{path}: expected two numeric columns after a header") from exc
    d = int(round(data[-1, 1])) if degree is None else int(degree)
    return SampledMap(d, xs=data[:, 0], fs=data[:, 1], source=str(path))


def make_map(spec=None, **params) -> LiftMap:
    """Build a map from a spec string ('pl:s=0.3') or keyword parameters."""
    if isinstance(spec, LiftMap):
        return spec
    if isinstance(spec, str):
        p = parse_map_spec(spec)
        p.update(params)
    else:
        p = dict(params)
        if spec is not None:
            p["kind"] = spec
    kind = _ALIASES.get(str(p.pop("kind", "")).lower())
    if kind is None:
        raise MapError("missing or unknown map kind")
    d = int(p.pop("d", 2))
    if d < 2:
        raise MapError("degree must be at least 2")
    if kind == "power":
        m = PowerMap(d)
    elif kind == "trig-perturbed":
        eps = float(p.pop("eps", 0.0))
        if not abs(eps) < d - 1:
            raise MapError(f"|eps| must be < d-1 = {d - 1} for the map to expand")
        m = TrigMap(d, eps=eps)
    elif kind == "piecewise-linear":
        s = float(p.pop("s"))
        if d != 2:
            raise MapError("piecewise-linear maps are degree 2")
        if not 0 < s < 1:
            raise MapError("piecewise-linear needs 0 < s < 1")
        m = PLMap(2, s=s)
    elif kind == "fs-smooth":
        if d != 2:
            raise MapError("fs-smooth maps are degree 2")
        m = FsSmoothMap(2, s=float(p.pop("s")), M=float(p.pop("M", 4.0)))
    else:
        if "path" in p:
            m = load_sampled_csv(p.pop("path"), p.pop("d", None))
        else:
            m = SampledMap(d, xs=p.pop("xs"), fs=p.pop("fs"))
    if p:
        raise MapError(f"unused map parameters: {sorted(p)}")
    return m


def _scalar(v, like):
    return float(v) if np.ndim(like) == 0 else np.asarray(v, dtype=float)


def eval_lift(m: LiftMap, x):
    x = np.asarray(x)
    keep = x.dtype == REAL
    fl = np.floor(x)
    y = m.lift01(x - fl) + m.degree * fl
    return y if keep else _scalar(y, x)


def derivative(m: LiftMap, x, side="right"):
    x = np.asarray(x, dtype=float)
    return _scalar(m.deriv01(x - np.floor(x), side=side), x)


def inverse_branch(m: LiftMap, k: int, y):
    if not 0 <= k < m.degree:
        raise ValueError(f"branch index {k} outside 0..{m.degree - 1}")
    ya = np.asarray(y)
    if np.any(ya < 0) or np.any(ya > 1):
        raise ValueError("inverse_branch needs 0 <= y <= 1")
    g = m.branch(k, ya)
    return g if ya.dtype == REAL else _scalar(g, ya)


def lift_inverse(m: LiftMap, y, with_slope=False):
    """F^{-1} on the real line, using F^{-1}(y + d) = F^{-1}(y) + 1."""
    y = np.asarray(y, dtype=REAL)
    d = m.degree
    a = np.floor(y / d)
    b = y - d * a
    k = np.minimum(np.floor(b), d - 1)
    u = b - k
    out = np.empty(y.shape, dtype=REAL)
    slope = np.empty(y.shape, dtype=float)
    for j in range(d):
        sel = k == j
        if sel.any():
            out[sel] = m.branch(j, u[sel]) + a[sel]
            if with_slope:
                slope[sel] = m.branch_slope(j, u[sel])
    return (out, slope) if with_slope else out


def inverse_iterate(m: LiftMap, y, n: int, with_derivative=False):
    """F^{-n}(y), optionally with (F^{-n})'(y)."""
    y = np.asarray(y, dtype=REAL)
    der = np.ones(y.shape)
    for _ in range(n):
        if with_derivative:
            y, sl = lift_inverse(m, y, with_slope=True)
            der = der * sl
        else:
            y = lift_inverse(m, y)
    return (y, der) if with_derivative else y


def level_endpoints(m: LiftMap, n: int, budget: int = DEFAULT_BUDGET):
    """Sorted endpoints of the level-n partition (extended precision, read-only).

    E_n is the concatenation of G_k(E_{n-1}) over k; G_k(1) and G_{k+1}(0)
    are evaluated at the same target so shared endpoints agree bitwise.
    """
    d = m.degree
    if n < 0:
        raise ValueError("depth must be >= 0")
    if d ** n > budget:
        raise BudgetError(f"level {n} has {d ** n} intervals, budget is {budget}")
    cache = m._cache
    if n in cache:
        return cache[n]
    have = [j for j in cache if j < n]
    j0 = max(have) if have else 0
    e = cache[j0] if have else np.array([0, 1], dtype=REAL)
    for j in range(j0 + 1, n + 1):
        parts = [m.branch(k, e)[:-1] for k in range(d)]
        e = np.concatenate(parts + [np.array([1], dtype=REAL)])
        if d ** j <= _MEMO_LIMIT:
            e.setflags(write=False)
            cache[j] = e
    return e


@dataclass(frozen=True)
class ExpansionReport:
    depth: int
    lam: float
    iota: float
    expanding: bool


def expansion_report(m: LiftMap, n: int, budget: int = DEFAULT_BUDGET) -> ExpansionReport:
    if n < 1:
        raise ValueError("depth must be >= 1")
    e = level_endpoints(m, n, budget)
    iota = float(np.max(np.diff(e)))
    lam = (1.0 / iota) ** (1.0 / n)
    return ExpansionReport(n, lam, iota, lam > 1)


@dataclass(frozen=True)
class ModulusReport:
    samples: list          # (t, worst deviation) with t decreasing
    sup: float
    depth: int
    per_depth: np.ndarray  # deviation[n-1, i] for scale i
    omega: list | None = None   # (t, modulus of continuity of F') when available


def _three_point(vals_plus, vals_mid, vals_minus):
    return (vals_plus - vals_mid) / (vals_mid - vals_minus)


def symmetry_modulus(m: LiftMap, n_max: int, scales, n_x: int = 64) -> ModulusReport:
    """Empirical symmetry modulus of the inverse iterates.

    For each scale t the deviation is max(q, 1/q) - 1 with q the three-point
    quotient (F^{-n}(x+t) - F^{-n}(x)) / (F^{-n}(x) - F^{-n}(x-t)), maximised
    over x in a uniform grid of [0,1) and 1 <= n <= n_max.
    """
    ts = sorted({float(t) for t in scales}, reverse=True)
    if not ts or ts[-1] <= 0 or ts[0] > 1:
        raise ValueError("scales must lie in (0, 1]")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    x = np.arange(n_x, dtype=REAL) / n_x
    dev = np.zeros((n_max, len(ts)))
    for i, t in enumerate(ts):
        pts = np.concatenate([x - REAL(t), x, x + REAL(t)])
        for n in range(1, n_max + 1):
            pts = lift_inverse(m, pts)
            lo, mid, hi = np.split(pts, 3)
            q = np.asarray(_three_point(hi, mid, lo), dtype=float)
            dev[n - 1, i] = float(np.max(np.maximum(q, 1 / q)) - 1)
    worst = dev.max(axis=0)
    samples = [(t, float(v)) for t, v in zip(ts, worst)]
    omega = None
    if m.kind != "piecewise-linear":
        omega = derivative_modulus(m, ts)
    return ModulusReport(samples, float(worst.max()), n_max, dev, omega)


def derivative_modulus(m: LiftMap, scales, n_grid: int = 1024):
    """omega(t) = sup_{|x-y|<=t} |F'(x) - F'(y)| on a periodic grid."""
    x = np.arange(n_grid) / n_grid
    fp = np.asarray(m.deriv01(x), dtype=float)
    out = []
    for t in scales:
        jmax = max(1, int(np.floor(t * n_grid)))
        w = 0.0
        for j in range(1, min(jmax, n_grid // 2) + 1):
            w = max(w, float(np.max(np.abs(np.roll(fp, -j) - fp))))
        out.append((float(t), w))
    return out


def holder_distortion(m: LiftMap, depths, alpha: float = 1.0, n_x: int = 65):
    """Fitted constant C_n in |log (F^{-n})'(x)/(F^{-n})'(y)| <= C_n |x-y|^alpha."""
    x = np.linspace(0, 1, n_x)
    out = {}
    for n in depths:
        _, der = inverse_iterate(m, x, n, with_derivative=True)
        ld = np.log(der)
        dx = np.abs(x[:, None] - x[None, :])
        np.fill_diagonal(dx, np.inf)
        out[int(n)] = float(np.max(np.abs(ld[:, None] - ld[None, :]) / dx ** alpha))
    return out
