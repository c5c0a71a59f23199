"""Words, Markov partition levels, point coding and the dual metric.

A word is stored most-significant-first, w = i_0 ... i_{n-1}. The same digit
string read from the right is the dual word w* = j_{n-1} ... j_0, so
j_0 = i_{n-1}. sigma drops the first digit, sigma* drops the last one.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ._numerics import REAL, fit_geometric
from .circle_map import DEFAULT_BUDGET, LiftMap, level_endpoints


@dataclass(frozen=True)
class SymbolWord:
    digits: tuple
    degree: int = 2
    dual: bool = False   # orientation flag: True when read right-to-left

    def __post_init__(self):
        if any(not 0 <= a < self.degree for a in self.digits):
            raise ValueError(f"digits must lie in 0..{self.degree - 1}")

    @classmethod
    def parse(cls, text, degree=2, dual=False):
        return cls(tuple(int(c) for c in str(text)), degree, dual)

    @classmethod
    def from_index(cls, idx, n, degree=2, dual=False):
        digits = []
        for _ in range(n):
            idx, a = divmod(idx, degree)
            digits.append(a)
        return cls(tuple(reversed(digits)), degree, dual)

    def __str__(self):
        return "".join(str(a) for a in self.digits)

    def __len__(self):
        return len(self.digits)

    @property
    def index(self):
        """m = i_{n-1} + i_{n-2} d + ... + i_0 d^{n-1}."""
        m = 0
        for a in self.digits:
            m = m * self.degree + a
        return m

    @property
    def dual_digits(self):
        """(j_0, j_1, ...) with j_0 the rightmost digit."""
        return tuple(reversed(self.digits))

    def reversed_view(self):
        return SymbolWord(self.digits, self.degree, not self.dual)

    def sigma(self):
        return SymbolWord(self.digits[1:], self.degree, self.dual)

    def sigma_star(self):
        return SymbolWord(self.digits[:-1], self.degree, self.dual)

    def pad_left(self, n):
        """Prefix zeros up to length n (the dual word ...000w*)."""
        k = max(0, n - len(self.digits))
        return SymbolWord((0,) * k + self.digits, self.degree, self.dual)

    def tail(self, n):
        """Last n digits, zero padded on the left when shorter."""
        return self.pad_left(n) if n >= len(self.digits) else SymbolWord(
            self.digits[len(self.digits) - n:], self.degree, self.dual)

    def __add__(self, other):
        other = as_word(other, self.degree)
        return SymbolWord(self.digits + other.digits, self.degree, self.dual)


def as_word(w, degree=2) -> SymbolWord:
    if isinstance(w, SymbolWord):
        return w
    if isinstance(w, str):
        return SymbolWord.parse(w, degree)
    return SymbolWord(tuple(int(a) for a in w), degree)


@dataclass(frozen=True)
class PartitionLevel:
    depth: int
    degree: int
    endpoints: np.ndarray   # extended precision, length d^n + 1

    @property
    def lengths(self):
        return np.diff(self.endpoints)

    def interval(self, w):
        i = as_word(w, self.degree).index
        return float(self.endpoints[i]), float(self.endpoints[i + 1])

    def words(self):
        for i in range(self.degree ** self.depth):
            yield str(SymbolWord.from_index(i, self.depth, self.degree))

    def to_csv(self, path):
        e = self.endpoints
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["word", "left", "right", "length"])
            for i, w in enumerate(self.words()):
                wr.writerow([w, repr(float(e[i])), repr(float(e[i + 1])),
                             repr(float(e[i + 1] - e[i]))])


def interval_for_word(m: LiftMap, w, ext=False):
    """I_w = G_{i_0} o ... o G_{i_{n-1}}([0,1]) with O(n) branch evaluations."""
    w = as_word(w, m.degree)
    ab = np.array([0, 1], dtype=REAL)
    for k in reversed(w.digits):
        ab = m.branch(k, ab)
    if ext:
        return ab[0], ab[1]
    return float(ab[0]), float(ab[1])


def partition_endpoints(m: LiftMap, n: int, budget: int = DEFAULT_BUDGET) -> PartitionLevel:
    return PartitionLevel(n, m.degree, level_endpoints(m, n, budget))


@dataclass(frozen=True)
class GeometryReport:
    depth: int
    nearby: float      # C_n
    child_parent: float  # c_n
    witness: tuple     # adjacent pair attaining C_n


def bounded_geometry_report(m: LiftMap, n: int, budget: int = DEFAULT_BUDGET) -> GeometryReport:
    if n < 1:
        raise ValueError("depth must be >= 1")
    d = m.degree
    child = np.asarray(np.diff(level_endpoints(m, n, budget)), dtype=float)
    parent = np.asarray(np.diff(level_endpoints(m, n - 1, budget)), dtype=float)
    nxt = np.roll(child, -1)   # the last interval touches the first one mod 1
    ratio = np.maximum(nxt / child, child / nxt)
    i = int(np.argmax(ratio))
    j = (i + 1) % len(child)
    wit = (str(SymbolWord.from_index(i, n, d)), str(SymbolWord.from_index(j, n, d)))
    cp = child / np.repeat(parent, d)
    return GeometryReport(n, float(ratio[i]), float(cp.min()), wit)


def encode_point(m: LiftMap, x, n: int) -> SymbolWord:
    """Word w_n with x in I_{w_n}.

    Endpoints belong to the interval on their right, except x = 1 which
    belongs to the last interval. Works by descending through children,
    so no full level is stored.
    """
    x = REAL(x)
    if not 0 <= x <= 1:
        raise ValueError("x must lie in [0,1]")
    d = m.degree
    top = level_endpoints(m, 1)
    digits = []
    for _ in range(n):
        # children of the current interval are G_w applied to level-1 cuts
        pts = top.copy()
        for k in reversed(digits):
            pts = m.branch(k, pts)
        a = int(np.searchsorted(pts, x, side="right")) - 1
        digits.append(min(max(a, 0), d - 1))
    return SymbolWord(tuple(digits), d)


def encode_points(m: LiftMap, xs, n: int, budget: int = DEFAULT_BUDGET):
    """Vectorised coding: lexicographic indices of the level-n intervals."""
    e = level_endpoints(m, n, budget)
    idx = np.searchsorted(e, np.asarray(xs, dtype=REAL), side="right") - 1
    return np.clip(idx, 0, m.degree ** n - 1)


def dual_metric(u, v, d: int = 2) -> float:
    """sum_k |j_k - j'_k| / d^k over the represented digits, j_0 rightmost."""
    a = as_word(u, d).dual_digits
    b = as_word(v, d).dual_digits
    n = max(len(a), len(b))
    a = a + (0,) * (n - len(a))
    b = b + (0,) * (n - len(b))
    return float(sum(abs(p - q) / d ** k for k, (p, q) in enumerate(zip(a, b))))


def iota_decay(m: LiftMap, depths):
    """Max interval length per depth with a geometric fit (C, tau)."""
    iota = [float(np.max(np.diff(level_endpoints(m, n)))) for n in depths]
    c, tau = fit_geometric(iota, start=min(depths))
    return iota, c, tau
