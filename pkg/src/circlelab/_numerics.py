"""Small numerical kernels shared by the modules."""
import numpy as np

REAL = np.longdouble
# 2*pi at extended precision
TWO_PI = REAL(8) * np.arctan(REAL(1))


class BracketError(ValueError):
    pass


def bisect_increasing(func, target, lo, hi, maxiter=300):
    """Solve func(x) = target for increasing func, vectorised over target.

    Iterates until the bracket cannot shrink further, so the result sits at
    the working precision of the inputs. Targets that hit an end of the
    bracket exactly return that end exactly.
    """
    target = np.asarray(target)
    dtype = np.result_type(target, lo, hi, np.float64)
    target = target.astype(dtype)
    lo = np.broadcast_to(np.asarray(lo, dtype=dtype), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=dtype), target.shape).copy()
    flo = func(lo)
    fhi = func(hi)
    # a little slack for roundoff in the bracket values
    slack = 64 * np.finfo(dtype).eps * np.maximum(1, np.abs(target))
    if np.any(flo > target + slack) or np.any(fhi < target - slack):
        raise BracketError("bisection bracket does not contain the target; "
                           "the function is not monotone on the bracket")
    at_lo = flo >= target
    at_hi = (fhi <= target) & ~at_lo
    lo0, hi0 = lo.copy(), hi.copy()
    for _ in range(maxiter):
        mid = lo + (hi - lo) / 2
        active = (mid > lo) & (mid < hi)
        if not active.any():
            break
        below = func(mid) < target
        lo = np.where(active & below, mid, lo)
        hi = np.where(active & ~below, mid, hi)
    out = lo + (hi - lo) / 2
    out = np.where(at_lo, lo0, out)
    out = np.where(at_hi, hi0, out)
    return out


def trapezoid_weights(n_points, h):
    w = np.full(n_points, h, dtype=float)
    w[0] = w[-1] = h / 2
    return w


def fit_geometric(values, start=1):
    """Least-squares fit values[k] ~ C * tau**(k+start) on positive entries.

    Returns (C, tau). Entries that are zero or not finite are skipped.
    """
    v = np.asarray(values, dtype=float)
    k = np.arange(start, start + len(v))
    ok = np.isfinite(v) & (v > 0)
    if ok.sum() < 2:
        return 0.0, 0.0
    slope, icept = np.polyfit(k[ok], np.log(v[ok]), 1)
    return float(np.exp(icept)), float(np.exp(slope))


def newton_increasing(func, dfunc, target, lo, hi, x0=None, maxiter=100):
    """Safeguarded Newton for increasing func, vectorised over target.

    Keeps a bracket and falls back to bisection whenever a Newton step leaves
    it. Same pinning of exact end hits as `bisect_increasing`.
    """
    target = np.asarray(target)
    dtype = np.result_type(target, lo, hi, np.float64)
    target = target.astype(dtype)
    lo = np.broadcast_to(np.asarray(lo, dtype=dtype), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=dtype), target.shape).copy()
    flo, fhi = func(lo), func(hi)
    slack = 64 * np.finfo(dtype).eps * np.maximum(1, np.abs(target))
    if np.any(flo > target + slack) or np.any(fhi < target - slack):
        raise BracketError("root bracket does not contain the target; "
                           "the function is not monotone on the bracket")
    at_lo = flo >= target
    at_hi = (fhi <= target) & ~at_lo
    lo0, hi0 = lo.copy(), hi.copy()
    x = lo + (hi - lo) / 2 if x0 is None else np.clip(np.asarray(x0, dtype=dtype), lo, hi)
    tiny = np.finfo(dtype).tiny
    eps = np.finfo(dtype).eps
    for _ in range(maxiter):
        fx = func(x) - target
        lo = np.where(fx < 0, x, lo)
        hi = np.where(fx > 0, x, hi)
        xn = x - fx / dfunc(x)
        out = ~((xn > lo) & (xn < hi))
        xn = np.where(out, lo + (hi - lo) / 2, xn)
        xn = np.where(fx == 0, x, xn)
        step = np.abs(xn - x)
        x = xn
        if np.all(step <= 2 * eps * np.abs(x) + tiny):
            break
    x = np.where(at_lo, lo0, x)
    return np.where(at_hi, hi0, x)
