"""Beurling-Ahlfors extension of a line homeomorphism and its Beltrami coefficient.

H is anything with H(x) (vectorised) and H.integral(a, b); GridHomeomorphism
qualifies, closed forms can be wrapped with `line_map`.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .conjugacy import GridHomeomorphism


class LineMap:
    """Closed-form line homeomorphism with an optional exact primitive."""

    def __init__(self, func, primitive=None):
        self.func = func
        self.primitive = primitive

    def __call__(self, x):
        return self.func(x)

    def integral(self, a, b):
        if self.primitive is not None:
            return float(self.primitive(b) - self.primitive(a))
        val, _ = quad(self.func, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)
        return float(val)


def line_map(func, primitive=None) -> LineMap:
    return LineMap(func, primitive)


def affine_line(a: float = 1.0, b: float = 0.0) -> LineMap:
    return LineMap(lambda x: a * np.asarray(x) + b, lambda x: a * x * x / 2 + b * x)


def piecewise_line(xs, ys) -> GridHomeomorphism:
    """Piecewise-linear line homeomorphism, extended linearly past the end knots."""
    return GridHomeomorphism(xs, ys, periodic=False)


def _H(h, x):
    return float(np.asarray(h(np.asarray([x], dtype=float)), dtype=float)[0])


def _split(z):
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("the extension is evaluated for Im z > 0")
    return z.real, z.imag


def extend_at(h, z):
    """(U, V) with U = (1/2y) int_{x-y}^{x+y} H, V = (1/y)(int_x^{x+y} H - int_{x-y}^x H)."""
    x, y = _split(z)
    left = h.integral(x - y, x)
    right = h.integral(x, x + y)
    return (left + right) / (2 * y), (right - left) / y


@dataclass(frozen=True)
class BeltramiSample:
    z: complex
    L: float
    R: float
    Lp: float
    Rp: float
    rho: float
    rho_plus: float
    rho_minus: float
    a: float
    b: float
    c: float
    K: complex
    mu: complex


def beltrami_at(h, z) -> BeltramiSample:
    x, y = _split(z)
    hx, hm, hp = _H(h, x), _H(h, x - y), _H(h, x + y)
    left = h.integral(x - y, x) / y
    right = h.integral(x, x + y) / y
    L, R = hx - hm, hp - hx
    Lp, Rp = hx - left, right - hx
    ux = (R + L) / (2 * y)
    if ux <= 0:
        raise ValueError("U_x vanished: H is not increasing on the window")
    vx = (R - L) / y
    vy = (R + L - Rp - Lp) / y
    uy = (R - L - Rp + Lp) / (2 * y)
    a, b, c = vx / ux, vy / ux, uy / ux
    K = (1 + 1j * a) / (b - 1j * c)
    mu = (K - 1) / (K + 1)
    return BeltramiSample(complex(z), L, R, Lp, Rp, R / L, Rp / L, Lp / R, a, b, c, K, mu)


def skew_rho(h, x, y, k):
    """(H(x+ky) - H(x)) / (H(x) - H(x-y)); for y < 0 both differences flip sign."""
    if y == 0 or not 0 < k <= 1:
        raise ValueError("need y != 0 and 0 < k <= 1")
    den = _H(h, x) - _H(h, x - y)
    if den == 0:
        raise ZeroDivisionError("zero denominator in skew distortion")
    return (_H(h, x + k * y) - _H(h, x)) / den


def window_qs_constant(h, x, y, n=64):
    """Quasisymmetry constant of h sampled on triples inside [x-y, x+y]."""
    worst = 1.0
    for t in y * np.arange(1, n // 2 + 1) / n:
        c = np.linspace(x - y + t, x + y - t, n + 1)
        mid = h(c)
        r = (h(c + t) - mid) / (mid - h(c - t))
        worst = max(worst, float(np.max(np.maximum(r, 1 / r))))
    return worst


@dataclass(frozen=True)
class VanishingProfile:
    ys: list
    sup_mu: list
    sup_diff: list | None = None


def vanishing_profile(h, ys, xs, other=None) -> VanishingProfile:
    """sup_x |mu(x+iy)| per y; with `other` also sup_x |mu_h - mu_other|."""
    ys = [float(v) for v in ys]
    if any(v <= 0 for v in ys):
        raise ValueError("heights must be positive")
    sup, diff = [], []
    for y in ys:
        mus = np.array([beltrami_at(h, complex(x, y)).mu for x in xs])
        sup.append(float(np.max(np.abs(mus))))
        if other is not None:
            mo = np.array([beltrami_at(other, complex(x, y)).mu for x in xs])
            diff.append(float(np.max(np.abs(mus - mo))))
    return VanishingProfile(ys, sup, diff if other is not None else None)


def beltrami_field(h, xs, ys):
    """Rows (x, y, Re mu, Im mu, |mu|) over the grid xs x ys."""
    rows = []
    for y in ys:
        for x in xs:
            mu = beltrami_at(h, complex(x, y)).mu
            rows.append((float(x), float(y), mu.real, mu.imag, abs(mu)))
    return np.array(rows)


def write_field_csv(rows, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x", "y", "re_mu", "im_mu", "abs_mu"])
        for r in rows:
            wr.writerow([repr(float(v)) for v in r])
