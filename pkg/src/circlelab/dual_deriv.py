"""Dual derivatives, summation and compatibility checks, solenoid, d_max."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from ._numerics import REAL, fit_geometric
from .circle_map import DEFAULT_BUDGET, LiftMap, level_endpoints
from .symbolic import SymbolWord, as_word


@dataclass(frozen=True)
class DualDerivativeTable:
    """D*_k(w*) = |I_{sigma* w}| / |I_w| for every word of length k <= depth.

    levels[k-1][i] holds D*_k at the word with lexicographic index i.
    """
    depth: int
    degree: int
    levels: list = field(repr=False)
    source: str = ""

    @property
    def values(self):
        return self.levels[-1]

    @property
    def limit(self):
        # the last finite-depth value; gaps are the convergence certificate
        return self.levels[-1]

    @property
    def gaps(self):
        if self.depth < 2:
            return np.full(len(self.values), np.nan)
        prev = self.levels[-2]
        idx = np.arange(len(self.values)) % len(prev)
        return np.abs(self.values - prev[idx])

    def value(self, w, depth=None):
        """Value at the dual word w, zero padded (or truncated) on the left."""
        n = self.depth if depth is None else depth
        w = as_word(w, self.degree).tail(n)
        return float(self.levels[n - 1][w.index])

    def words(self):
        for i in range(self.degree ** self.depth):
            yield str(SymbolWord.from_index(i, self.depth, self.degree))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["word", "value", "gap"])
            for w, v, g in zip(self.words(), self.values, self.gaps):
                wr.writerow([w, repr(float(v)), repr(float(g))])

    def to_json(self):
        return json.dumps({"depth": self.depth, "degree": self.degree, "source": self.source,
                           "values": dict(zip(self.words(), map(float, self.values)))},
                          sort_keys=True)


def _lengths(m, n, budget):
    return np.diff(level_endpoints(m, n, budget))


def dual_derivative_table(m: LiftMap, n: int, budget: int = DEFAULT_BUDGET) -> DualDerivativeTable:
    if n < 1:
        raise ValueError("depth must be >= 1")
    d = m.degree
    lens = [_lengths(m, k, budget) for k in range(n + 1)]
    levels = []
    for k in range(1, n + 1):
        idx = np.arange(d ** k)
        v = lens[k - 1][idx // d] / lens[k]
        levels.append(np.asarray(v, dtype=float))
    return DualDerivativeTable(n, d, levels, m.spec())


@dataclass(frozen=True)
class DualDerivResult:
    value: float
    gap: float
    depth: int
    converged: bool
    history: list


def dual_derivative(m: LiftMap, w, n: int, tol: float = 0.0) -> DualDerivResult:
    """D*_k at the last k digits of w* for k = 1..n (stops early once gap < tol).

    Uses I_{j_k w_k} = G_{j_k}(I_{w_k}), so each extra digit costs one pair
    of branch evaluations.
    """
    if n < 2:
        raise ValueError("depth must be >= 2")
    js = as_word(w, m.degree).tail(n).dual_digits
    iv = np.array([0, 1], dtype=REAL)
    iw = m.branch(js[0], iv)
    hist = [float((iv[1] - iv[0]) / (iw[1] - iw[0]))]
    gap = np.inf
    for k in range(1, n):
        iv = m.branch(js[k], iv)
        iw = m.branch(js[k], iw)
        hist.append(float((iv[1] - iv[0]) / (iw[1] - iw[0])))
        gap = abs(hist[-1] - hist[-2])
        if tol > 0 and gap < tol:
            break
    conv = tol <= 0 or gap < tol
    return DualDerivResult(hist[-1], float(gap), len(hist), conv, hist)


def gap_decay(m: LiftMap, w, n: int):
    """Successive gaps |D*_k - D*_{k-1}|, k = 2..n, with a geometric fit (C, tau)."""
    h = dual_derivative(m, w, n).history
    gaps = np.abs(np.diff(h))
    # gaps at roundoff level carry no decay information
    fit = np.where(gaps > 1e-13, gaps, np.nan)
    c, tau = fit_geometric(fit, start=2)
    return gaps, c, tau


@dataclass(frozen=True)
class SummationReport:
    depth: int
    residual: float
    witness: str


def check_summation(m: LiftMap, n: int, budget: int = DEFAULT_BUDGET) -> SummationReport:
    """max over parents of |sum_j 1/D*_n(w* j) - 1|."""
    if n < 1:
        raise ValueError("depth must be >= 1")
    d = m.degree
    child = _lengths(m, n, budget)
    parent = _lengths(m, n - 1, budget)
    dstar = np.repeat(parent, d) / child
    tot = (1 / dstar).reshape(-1, d).sum(axis=1)
    res = np.abs(np.asarray(tot - 1, dtype=float))
    i = int(np.argmax(res))
    return SummationReport(n, float(res[i]), str(SymbolWord.from_index(i, n - 1, d)))


@dataclass(frozen=True)
class CompatibilityReport:
    words: list
    terms: int
    depth: int
    products: np.ndarray     # products[w, N-1] = P_N(w)
    spread: float
    increment: float         # max_w |P_N - P_{N-1}|
    verdict: str
    witness: tuple | None    # (word, depth, value) when FAIL


def _need_binary(m):
    if m.degree != 2:
        raise ValueError("compatibility and solenoid are defined for d = 2 only")


def default_base_words(length=4):
    return [str(SymbolWord.from_index(i, length, 2)) for i in range(2 ** length)]


def check_compatibility(m: LiftMap, words=None, terms: int = 10, depth: int = 16,
                        tol: float = 1e-3, table: DualDerivativeTable | None = None):
    """P_N(w*) = prod_{i<N} D*(w*01^i) / D*(w*10^i), all factors at one depth."""
    _need_binary(m)
    words = default_base_words() if words is None else [str(as_word(w)) for w in words]
    if table is None or table.depth != depth:
        table = dual_derivative_table(m, depth)
    prods = np.empty((len(words), terms))
    for a, w in enumerate(words):
        p = 1.0
        for i in range(terms):
            p *= table.value(w + "0" + "1" * i) / table.value(w + "1" + "0" * i)
            prods[a, i] = p
    last = prods[:, -1]
    spread = float(last.max() - last.min())
    incr = np.abs(prods[:, -1] - prods[:, -2]) if terms > 1 else np.zeros(len(words))
    ok = spread < tol and float(incr.max()) < tol
    witness = None
    if not ok:
        a = int(np.argmax(incr)) if incr.max() >= tol else int(np.argmax(np.abs(last - last.mean())))
        witness = (words[a], depth, float(last[a]))
    return CompatibilityReport(words, terms, depth, prods, spread, float(incr.max()),
                               "PASS" if ok else "FAIL", witness)


@dataclass(frozen=True)
class SolenoidResult:
    ratio_form: float
    product_form: float
    terms: int
    constant: float


def solenoid(m: LiftMap, w, terms: int = 10, depth: int = 16,
             table: DualDerivativeTable | None = None) -> SolenoidResult:
    """sol(u*1) two ways.

    ratio form:   D*(u*0) / D*(u*1)
    product form: c * prod_{i=1}^{N} D*(u*10^i) / D*(u*01^i), where
                  c = lim P_N is the common compatibility constant, estimated
                  on the base word ...000.
    """
    _need_binary(m)
    w = as_word(w, 2)
    if not len(w) or w.digits[-1] != 1:
        raise ValueError("solenoid needs a dual word ending in 1")
    if table is None or table.depth != depth:
        table = dual_derivative_table(m, depth)
    u = str(w.sigma_star())
    ratio = table.value(u + "0") / table.value(u + "1")
    const = check_compatibility(m, [""], terms + 1, depth, table=table).products[0, -1]
    prod = const
    for i in range(1, terms + 1):
        prod *= table.value(u + "1" + "0" * i) / table.value(u + "0" + "1" * i)
    return SolenoidResult(float(ratio), float(prod), terms, float(const))


def dmax_distance(a: DualDerivativeTable, b: DualDerivativeTable) -> float:
    if a.depth != b.depth or a.degree != b.degree:
        raise ValueError("d_max needs tables of equal depth and degree")
    return float(np.max(np.abs(a.values - b.values)))
