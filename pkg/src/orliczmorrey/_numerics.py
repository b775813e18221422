"""Small numerical kernels shared across the package.

Nothing in here knows about Young functions or fields; everything works on
plain floats and numpy arrays.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

INF = math.inf
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# Band around the integrability boundary inside which a fitted power law is
# not trusted to decide convergence.
BORDERLINE_BAND = 0.05


def golden_max(fun, a, b, iters=80):
    """Vectorised golden-section search for the maximum of unimodal rows.

    ``fun`` maps an array of abscissae (same shape as ``a``) to values.
    Returns ``(x_best, f_best)``.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc = fun(c)
    fd = fun(d)
    for _ in range(iters):
        left = fc >= fd
        # left probe wins: keep [a, d], old c becomes the new d
        a = np.where(left, a, c)
        b = np.where(left, d, b)
        keep_x = np.where(left, c, d)
        keep_f = np.where(left, fc, fd)
        probe = np.where(left, b - GOLDEN * (b - a), a + GOLDEN * (b - a))
        fp = fun(probe)
        c = np.where(left, probe, keep_x)
        d = np.where(left, keep_x, probe)
        fc = np.where(left, fp, keep_f)
        fd = np.where(left, keep_f, fp)
        if np.all(b - a <= 1e-14 * np.maximum(np.abs(b), 1e-300)):
            break
    x = np.where(fc >= fd, c, d)
    return x, np.maximum(fc, fd)


def loglog_slope(x, y):
    """Least-squares slope of log y against log x over positive finite samples."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0) & np.isfinite(y)
    if ok.sum() < 2:
        return math.nan
    lx = np.log(x[ok])
    ly = np.log(y[ok])
    lx = lx - lx.mean()
    denom = float(np.dot(lx, lx))
    if denom == 0.0:
        return math.nan
    return float(np.dot(lx, ly - ly.mean()) / denom)


def classify_exponent(e, boundary=-1.0, band=BORDERLINE_BAND, *, at_zero=True):
    """Decide integrability of ``t**e`` near 0 (``at_zero``) or near infinity.

    Returns 'convergent', 'divergent' or 'borderline'.
    """
    if math.isnan(e):
        return "convergent"
    margin = (e - boundary) if at_zero else (boundary - e)
    # the band is open: an exponent exactly ``band`` away is decided, up to fit noise
    edge = band - 1e-9
    if margin >= edge:
        return "convergent"
    if margin <= -edge:
        return "divergent"
    return "borderline"


@lru_cache(maxsize=8)
def _leggauss(order):
    return np.polynomial.legendre.leggauss(order)


def log_gauss_rule(a, b, breaks=(), max_width=0.05, order=8):
    """Nodes and weights for ``∫_a^b f(t) dt`` with Gauss-Legendre in ``u = ln t``.

    The interval is split at ``breaks`` (so jump points never fall inside a
    panel) and into panels of log-width at most ``max_width``.  The returned
    weights already include the Jacobian ``dt = t du``.
    """
    if not (0 < a < b < INF):
        raise ValueError("need 0 < a < b < inf")
    ua, ub = math.log(a), math.log(b)
    cuts = [ua, ub]
    for t in breaks:
        if a < t < b:
            cuts.append(math.log(t))
    cuts = np.unique(cuts)
    edges = [cuts[0]]
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        m = max(1, int(math.ceil((hi - lo) / max_width)))
        edges.extend(np.linspace(lo, hi, m + 1)[1:])
    edges = np.asarray(edges)
    x, w = _leggauss(order)
    lo = edges[:-1, None]
    half = 0.5 * (edges[1:, None] - lo)
    u = lo + half * (x[None, :] + 1.0)
    t = np.exp(u).ravel()
    wt = (half * w[None, :]).ravel() * t
    return t, wt


def power_tail(coef, e, T, log_origin=None):
    """``∫_T^∞ coef·s**e·(1 + ln(s/log_origin)) ds`` (log factor only if given).

    Requires ``e < -1``.
    """
    k = -e - 1.0
    if k <= 0:
        return INF
    base = coef * T ** (e + 1.0)
    if log_origin is None:
        return base / k
    return base * ((1.0 + math.log(T / log_origin)) / k + 1.0 / k**2)


def cumulative_trapezoid_log(t, g):
    """Cumulative ``∫_{t_0}^{t_k} g`` on an increasing positive grid, trapezoid in ln t."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(g, dtype=float) * t
    du = np.diff(np.log(t))
    with np.errstate(invalid="ignore"):
        steps = 0.5 * (y[1:] + y[:-1]) * du
    steps = np.where(np.isnan(steps), INF, steps)
    return np.concatenate([[0.0], np.cumsum(steps)])


def suffix_max(values):
    """Running maximum from the right (the discrete ``ess sup`` over ``(t, ∞)``)."""
    v = np.asarray(values, dtype=float)
    return np.maximum.accumulate(v[::-1])[::-1]


def suffix_min(values):
    """Running minimum from the right (the discrete ``ess inf`` over ``(t, ∞)``)."""
    v = np.asarray(values, dtype=float)
    return np.minimum.accumulate(v[::-1])[::-1]


def edge_unresolved(log_values, per_decade, at_end=True, rel=1e-3):
    """True when a log-sampled quantity is still climbing at a grid edge.

    Compares the growth over the last decade with the decade before; a
    geometrically shrinking increment counts as resolved.
    """
    v = np.asarray(log_values, dtype=float)
    if not at_end:
        v = v[::-1]
    k = int(per_decade)
    if v.size < 2 * k + 1 or k < 1:
        return False
    d1 = v[-1] - v[-1 - k]
    d2 = v[-1 - k] - v[-1 - 2 * k]
    if not (math.isfinite(d1) and math.isfinite(d2)):
        return False
    return d1 > rel and d1 >= 0.5 * d2


def relative_drift(a, b):
    """Relative change between two consecutive estimates, guarded at zero."""
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    scale = max(abs(a), abs(b))
    if not math.isfinite(scale):
        return INF
    return abs(a - b) / scale


def cumulative_powerlaw(t, g):
    """Cumulative integral of ``g`` treating it as a power law on every cell.

    Exact for piecewise power functions; falls back to the trapezoid rule on
    cells where an endpoint vanishes.  Infinite samples propagate to +inf.
    """
    t = np.asarray(t, dtype=float)
    g = np.asarray(g, dtype=float)
    lt = np.log(t)
    du = np.diff(lt)
    g0, g1 = g[:-1], g[1:]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        pos = (g0 > 0) & (g1 > 0) & np.isfinite(g0) & np.isfinite(g1)
        e1 = np.where(pos, np.log(g1 / g0) / du + 1.0, 0.0)
        # ∫ g0 (s/t0)^(e1-1) ds over the cell
        small = np.abs(e1 * du) < 1e-8
        growth = np.where(small, du * (1.0 + 0.5 * e1 * du), np.expm1(e1 * du) / np.where(small, 1.0, e1))
        cell_pow = g0 * t[:-1] * growth
        cell_trap = 0.5 * (g0 * t[:-1] + g1 * t[1:]) * du
        cell = np.where(pos, cell_pow, cell_trap)
    cell = np.where(np.isnan(cell) | ~np.isfinite(g0) | ~np.isfinite(g1), INF, cell)
    return np.concatenate([[0.0], np.cumsum(cell)])


def decade_grid(lo_exp, hi_exp, per_decade):
    """``10**(k/per_decade)`` for integer k; hits every integer power of ten exactly."""
    k = np.arange(int(round(lo_exp * per_decade)), int(round(hi_exp * per_decade)) + 1)
    return 10.0 ** (k / per_decade)
