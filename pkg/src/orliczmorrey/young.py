"""Young functions: evaluation, generalized inverse, complementary function,
growth diagnostics and the derived constructions used by the boundedness
criteria (the Cianchi functions and the Sobolev conjugate).

Values are extended reals: ``math.inf`` is an ordinary ordinate.  Every
instance is immutable after construction and all methods are pure.
"""

from __future__ import annotations

import json
import math
import warnings

import numpy as np

from . import _numerics as nm
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict

INF = math.inf

INV_RTOL = 1e-10
INV_MAXITER = 200


class ConstructionError(ValueError):
    """A derived Young function cannot be built.

    ``verdict`` is 'divergent' or 'borderline' for integrability failures and
    'invalid' otherwise.
    """

    def __init__(self, message, verdict="invalid", condition=None):
        super().__init__(message)
        self.verdict = verdict
        self.condition = condition


def _as_array(r):
    arr = np.asarray(r, dtype=float)
    if np.any(np.isnan(arr)):
        raise ValueError("NaN argument")
    if np.any(arr < 0):
        raise ValueError("Young functions are defined on [0, inf); got a negative argument")
    return arr


def _ret(arr, scalar):
    return float(arr) if scalar else arr


class YoungFunction:
    """Base class.  Subclasses implement ``_eval`` on a nonnegative float array."""

    kind = "abstract"
    # Φ(r) = +inf exactly for r > domain_split
    domain_split = INF

    def __call__(self, r):
        return self.eval(r)

    def eval(self, r):
        scalar = np.ndim(r) == 0
        arr = _as_array(r)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self._eval(np.atleast_1d(arr)).reshape(arr.shape)
        return _ret(out, scalar)

    def _eval(self, r):
        raise NotImplementedError

    def log_eval(self, r):
        with np.errstate(divide="ignore"):
            return np.log(self.eval(np.asarray(r, dtype=float)))

    def inverse(self, s):
        """Generalized inverse ``inf{r >= 0 : Φ(r) > s}`` by monotone bisection."""
        scalar = np.ndim(s) == 0
        arr = _as_array(s)
        out = _bisect_inverse(self, np.atleast_1d(arr).ravel()).reshape(arr.shape)
        return _ret(out, scalar)

    def conjugate(self) -> "YoungFunction":
        return NumericConjugate(self)

    def to_spec(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({json.dumps(self.to_spec(), sort_keys=True)})"

    def __eq__(self, other):
        return isinstance(other, YoungFunction) and self.to_spec() == other.to_spec()

    def __hash__(self):
        return hash(json.dumps(self.to_spec(), sort_keys=True))


def _bisect_inverse(phi, s):
    out = np.empty_like(s)
    if s.size == 0:
        return out
    s_inf = np.isinf(s)
    out[s_inf] = INF
    idx = np.nonzero(~s_inf)[0]
    if idx.size == 0:
        return out
    target = s[idx]
    lo = np.zeros_like(target)
    hi = np.full_like(target, INF)
    probe = np.ones_like(target)
    active = np.ones(target.shape, dtype=bool)
    # bracket by factors of 1e4 between 1e-300 and 1e300
    for _ in range(160):
        if not active.any():
            break
        v = phi.eval(probe[active])
        above = v > target[active]
        a_idx = np.nonzero(active)[0]
        up = a_idx[~above]
        dn = a_idx[above]
        lo[up] = np.maximum(lo[up], probe[up])
        hi[dn] = np.minimum(hi[dn], probe[dn])
        done = np.isfinite(hi) & (lo > 0)
        probe = np.where(np.isfinite(hi), probe * 1e-4, probe * 1e4)
        active = ~done & (probe >= 1e-300) & (probe <= 1e300)
    # no r with Φ(r) <= s found down to 1e-300 -> inverse is 0
    res = np.where(np.isfinite(hi), 0.0, INF)
    work = np.isfinite(hi) & (lo > 0)
    lo_w, hi_w, t_w = lo[work], hi[work], target[work]
    for _ in range(INV_MAXITER):
        if lo_w.size == 0:
            break
        open_ = hi_w > lo_w * (1.0 + INV_RTOL)
        if not open_.any():
            break
        mid = np.sqrt(lo_w * hi_w)
        v = phi.eval(mid)
        above = v > t_w
        hi_w = np.where(open_ & above, mid, hi_w)
        lo_w = np.where(open_ & ~above, mid, lo_w)
    res[work] = lo_w
    out[idx] = res
    return out


# ---------------------------------------------------------------------------
# Built-in kinds


class Power(YoungFunction):
    """``scale * r**p`` with ``p >= 1``."""

    kind = "power"

    def __init__(self, p, scale=1.0):
        p, scale = float(p), float(scale)
        if not (p >= 1.0 and math.isfinite(p)):
            raise ValueError(f"power exponent must be >= 1, got {p}")
        if not (scale > 0 and math.isfinite(scale)):
            raise ValueError("power scale must be positive")
        self.p = p
        self.scale = scale

    def _eval(self, r):
        return self.scale * r**self.p

    def log_eval(self, r):
        with np.errstate(divide="ignore"):
            return math.log(self.scale) + self.p * np.log(np.asarray(r, dtype=float))

    def conjugate(self):
        if self.p == 1.0:
            return IndicatorLinf(self.scale)
        return NumericConjugate(self)

    def to_spec(self):
        return {"kind": "power", "p": self.p, "scale": self.scale}


class ExpMinusLinear(YoungFunction):
    """``e^r - r - 1``."""

    kind = "exp_minus_linear"

    def _eval(self, r):
        out = np.expm1(r) - r
        small = r < 1e-3
        rs = r[small]
        out[small] = rs * rs * (0.5 + rs * (1.0 / 6.0 + rs / 24.0))
        return out

    def log_eval(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        big = r > 30.0
        with np.errstate(divide="ignore"):
            out[~big] = np.log(self._eval(r[~big]))
        rb = r[big]
        out[big] = rb + np.log1p(-(rb + 1.0) * np.exp(-rb))
        return out

    def to_spec(self):
        return {"kind": "exp_minus_linear"}


class LogType(YoungFunction):
    """``(1 + r) ln(1 + r) - r``, the complementary function of ``e^r - r - 1``."""

    kind = "log_type"

    def _eval(self, r):
        out = (1.0 + r) * np.log1p(r) - r
        small = r < 1e-3
        rs = r[small]
        out[small] = rs * rs * (0.5 - rs * (1.0 / 6.0 - rs / 12.0))
        return out

    def to_spec(self):
        return {"kind": "log_type"}


class IndicatorLinf(YoungFunction):
    """0 on ``[0, split]`` and +inf beyond; the Young function of L-infinity."""

    kind = "indicator_linf"

    def __init__(self, split=1.0):
        split = float(split)
        if not (split > 0 and math.isfinite(split)):
            raise ValueError("indicator split must be positive and finite")
        self.domain_split = split

    def _eval(self, r):
        return np.where(r <= self.domain_split, 0.0, INF)

    def conjugate(self):
        return Power(1.0, self.domain_split)

    def to_spec(self):
        if self.domain_split == 1.0:
            return {"kind": "indicator_linf"}
        return {"kind": "indicator_linf", "split": self.domain_split}


class PiecewiseLinear(YoungFunction):
    """Convex piecewise-linear function through ``knots``.

    Beyond the last knot the function continues with ``tail_slope`` (default:
    slope of the last segment) up to ``cap``, and is +inf after ``cap``.
    """

    kind = "piecewise_linear_convex"

    def __init__(self, knots, tail_slope=None, cap=INF):
        k = np.asarray(knots, dtype=float).reshape(-1, 2)
        if k.size == 0 or k[0, 0] != 0.0:
            k = np.vstack([[0.0, 0.0], k])
        if k[0, 1] != 0.0:
            raise ValueError("piecewise-linear Young function must vanish at 0")
        if np.any(~np.isfinite(k)) or np.any(np.diff(k[:, 0]) <= 0):
            raise ValueError("knot abscissae must be finite and strictly increasing")
        slopes = np.diff(k[:, 1]) / np.diff(k[:, 0])
        if slopes.size and slopes[0] < 0:
            raise ValueError("piecewise-linear Young function must be non-decreasing")
        if np.any(np.diff(slopes) < -1e-12 * np.maximum(1.0, np.abs(slopes[1:]))):
            raise ValueError("knots are not convex")
        last_slope = float(slopes[-1]) if slopes.size else 0.0
        if tail_slope is None:
            tail_slope = last_slope
        tail_slope = float(tail_slope)
        cap = float(cap)
        if tail_slope < last_slope - 1e-12 * max(1.0, abs(last_slope)):
            raise ValueError("knots are not convex (tail slope below last segment slope)")
        if cap < k[-1, 0]:
            raise ValueError("cap must not precede the last knot")
        if math.isinf(cap) and tail_slope <= 0:
            raise ValueError("a Young function must tend to infinity")
        self.knots = k
        self.tail_slope = tail_slope
        self.domain_split = cap

    def _eval(self, r):
        k = self.knots
        out = np.interp(r, k[:, 0], k[:, 1])
        beyond = r > k[-1, 0]
        out[beyond] = k[-1, 1] + self.tail_slope * (r[beyond] - k[-1, 0])
        out[r > self.domain_split] = INF
        return out

    def _hull(self):
        """Abscissae and values including the cap point."""
        k = self.knots
        if math.isfinite(self.domain_split) and self.domain_split > k[-1, 0]:
            cap_v = k[-1, 1] + self.tail_slope * (self.domain_split - k[-1, 0])
            k = np.vstack([k, [self.domain_split, cap_v]])
        return k

    def conjugate(self):
        """Exact Legendre transform; breakpoints of the result are the slopes here."""
        k = self._hull()
        R, V = k[:, 0], k[:, 1]
        slopes = np.diff(V) / np.diff(R) if len(R) > 1 else np.zeros(0)
        tau = INF if math.isfinite(self.domain_split) else self.tail_slope
        ts = np.unique(np.concatenate([[0.0], slopes[slopes > 0]]))
        if math.isfinite(tau):
            ts = ts[ts < tau]
        vals = np.max(ts[:, None] * R[None, :] - V[None, :], axis=1)
        vals[0] = 0.0
        knots = np.column_stack([ts, vals])
        if math.isfinite(tau):
            tau_v = float(np.max(tau * R - V))
            knots = np.vstack([knots, [tau, tau_v]])
            return _canonical_pl(knots, float(R[-1]), tau)
        return _canonical_pl(knots, float(R[-1]), INF)

    def to_spec(self):
        spec = {"kind": "piecewise_linear_convex", "knots": self.knots.tolist(), "tail_slope": self.tail_slope}
        if math.isfinite(self.domain_split):
            spec["cap"] = self.domain_split
        return spec


def _canonical_pl(knots, tail_slope, cap):
    k = np.asarray(knots, dtype=float)
    if len(k) == 1 and math.isinf(cap):
        return Power(1.0, tail_slope) if tail_slope > 0 else PiecewiseLinear(k, tail_slope, cap)
    if len(k) == 2 and k[1, 1] == 0.0 and cap == k[1, 0]:
        return IndicatorLinf(cap)
    return PiecewiseLinear(k, tail_slope, cap)


# ---------------------------------------------------------------------------
# Numerically defined kinds


class NumericConjugate(YoungFunction):
    """``sup_s (r s - Φ(s))`` by a log-grid scan plus golden-section refinement."""

    kind = "conjugate"
    GRID = nm.decade_grid(-8, 8, 32)  # 513 points on [1e-8, 1e8]
    LOW = np.geomspace(1e-300, 1e-8, 600)
    HIGH = np.geomspace(1e8, 1e300, 600)
    CHUNK = 2048

    def __init__(self, inner: YoungFunction):
        self.inner = inner
        grid = self.GRID
        split = inner.domain_split
        if math.isfinite(split):
            grid = np.unique(np.concatenate([grid, [split]]))
        self._grid = grid
        self._vals = inner.eval(grid)
        self._low_vals = inner.eval(self.LOW)
        self._high_vals = inner.eval(self.HIGH)

    def conjugate(self):
        return self.inner

    @staticmethod
    def _scan(r, S, V):
        with np.errstate(invalid="ignore", over="ignore"):
            M = r[:, None] * S[None, :] - V[None, :]
        M = np.where(np.isnan(M), -INF, M)
        j = np.argmax(M, axis=1)
        return j, M[np.arange(len(r)), j]

    def _refine(self, r, S, j):
        phi = self.inner
        lo = S[np.maximum(j - 1, 0)]
        hi = S[np.minimum(j + 1, len(S) - 1)]

        def f(s):
            with np.errstate(invalid="ignore", over="ignore"):
                v = r * s - phi.eval(s)
            return np.where(np.isnan(v), -INF, v)

        _, best = nm.golden_max(f, lo, hi, iters=120)
        return best

    def _eval(self, r):
        out = np.zeros_like(r)
        for start in range(0, r.size, self.CHUNK):
            rr = r[start:start + self.CHUNK]
            out[start:start + self.CHUNK] = self._eval_chunk(rr)
        return out

    def _eval_chunk(self, r):
        S, V = self._grid, self._vals
        j, best = self._scan(r, S, V)
        val = np.maximum(best, 0.0)
        pos = r > 0
        inner = pos & (j > 0) & (j < len(S) - 1)
        if inner.any():
            ref = self._refine(r[inner], S, j[inner])
            val[inner] = np.maximum(val[inner], ref)
        low = pos & (j == 0)
        if low.any():
            SL = np.concatenate([self.LOW, S[1:2]])
            VL = np.concatenate([self._low_vals, V[1:2]])
            jl, bl = self._scan(r[low], SL, VL)
            ref = self._refine(r[low], SL, jl)
            val[low] = np.maximum.reduce([val[low], bl, ref, np.zeros_like(bl)])
        high = pos & (j == len(S) - 1)
        if high.any():
            SH = np.concatenate([S[-2:-1], self.HIGH])
            VH = np.concatenate([V[-2:-1], self._high_vals])
            jh, bh = self._scan(r[high], SH, VH)
            ref = self._refine(r[high], SH, jh)
            v = np.maximum.reduce([val[high], bh, ref])
            v[jh == len(SH) - 1] = INF
            val[high] = v
        return val

    def to_spec(self):
        return {"kind": "conjugate", "of": self.inner.to_spec()}


class TabulatedYoung(YoungFunction):
    """Positive samples on a log grid with log-log interpolation and power-law ends."""

    kind = "tabulated"

    def __init__(self, r, values, label=None, meta=None):
        r = np.asarray(r, dtype=float)
        v = np.asarray(values, dtype=float)
        if r.ndim != 1 or r.size < 2 or r.shape != v.shape:
            raise ValueError("table needs matching 1-D arrays with at least two samples")
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("table abscissae must be positive and increasing")
        if np.any(~np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("table values must be positive and finite")
        if np.any(np.diff(v) < 0):
            raise ValueError("table values must be non-decreasing")
        self._lr = np.log(r)
        self._lv = np.log(v)
        self._lo_slope = (self._lv[1] - self._lv[0]) / (self._lr[1] - self._lr[0])
        self._hi_slope = (self._lv[-1] - self._lv[-2]) / (self._lr[-1] - self._lr[-2])
        self.label = label or "tabulated"
        self.meta = dict(meta or {})

    @property
    def r(self):
        return np.exp(self._lr)

    @property
    def values(self):
        return np.exp(self._lv)

    def _eval(self, r):
        out = np.zeros_like(r)
        pos = r > 0
        lr = np.log(r[pos])
        lv = np.interp(lr, self._lr, self._lv)
        below = lr < self._lr[0]
        above = lr > self._lr[-1]
        lv[below] = self._lv[0] + self._lo_slope * (lr[below] - self._lr[0])
        lv[above] = self._lv[-1] + self._hi_slope * (lr[above] - self._lr[-1])
        out[pos] = np.exp(lv)
        return out

    def to_spec(self):
        spec = {"kind": self.label}
        spec.update(self.meta)
        return spec


class TableInverse(YoungFunction):
    """Young function given by samples of its inverse ``(t, Ψ^{-1}(t))``."""

    kind = "table_inverse"

    def __init__(self, t, inv, meta=None):
        t = np.asarray(t, dtype=float)
        inv = np.asarray(inv, dtype=float)
        if t.ndim != 1 or t.size < 2 or t.shape != inv.shape:
            raise ValueError("inverse table needs matching 1-D arrays")
        if np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise ValueError("inverse-table abscissae must be positive and increasing")
        if np.any(~np.isfinite(inv)) or np.any(inv <= 0):
            raise ConstructionError("inverse samples must be positive and finite")
        if np.ptp(np.log(inv)) < 1e-6:
            raise ConstructionError("inverse is constant on the working range (degenerate)")
        if np.any(np.diff(inv) < -1e-9 * inv[1:]):
            raise ConstructionError("inverse is not non-decreasing; the result would not be a Young function")
        if np.any(np.diff(inv) <= 0):
            raise ConstructionError("inverse has flat stretches; cannot be inverted to a Young function")
        self._lt = np.log(t)
        self._li = np.log(inv)
        self._lo_slope = (self._li[1] - self._li[0]) / (self._lt[1] - self._lt[0])
        self._hi_slope = (self._li[-1] - self._li[-2]) / (self._lt[-1] - self._lt[-2])
        self.meta = dict(meta or {})

    def _eval(self, r):
        out = np.zeros_like(r)
        pos = r > 0
        li = np.log(r[pos])
        lt = np.interp(li, self._li, self._lt)
        below = li < self._li[0]
        above = li > self._li[-1]
        lt[below] = self._lt[0] + (li[below] - self._li[0]) / self._lo_slope
        lt[above] = self._lt[-1] + (li[above] - self._li[-1]) / self._hi_slope
        out[pos] = np.exp(lt)
        return out

    def _table_inverse(self, s):
        out = np.zeros_like(s)
        pos = s > 0
        lt = np.log(s[pos])
        li = np.interp(lt, self._lt, self._li)
        below = lt < self._lt[0]
        above = lt > self._lt[-1]
        li[below] = self._li[0] + self._lo_slope * (lt[below] - self._lt[0])
        li[above] = self._li[-1] + self._hi_slope * (lt[above] - self._lt[-1])
        out[pos] = np.exp(li)
        out[np.isinf(s)] = INF
        return out

    def inverse(self, s):
        scalar = np.ndim(s) == 0
        arr = _as_array(s)
        out = self._table_inverse(np.atleast_1d(arr)).reshape(arr.shape)
        return _ret(out, scalar)

    def to_spec(self):
        spec = {
            "kind": "table_inverse",
            "samples": np.column_stack([np.exp(self._lt), np.exp(self._li)]).tolist(),
        }
        spec.update(self.meta)
        return spec


class SobolevConjugate(TableInverse):
    """``Ψ^{-1}(t) = Φ^{-1}(t) t^{-α/n}``; the inverse is exact, Ψ itself is tabulated."""

    kind = "sobolev_conjugate"
    T_GRID = nm.decade_grid(-12, 12, 32)

    def __init__(self, inner: YoungFunction, alpha, n):
        alpha, n = float(alpha), int(n)
        if n < 1:
            raise ValueError("dimension must be positive")
        if not (0 < alpha < n):
            raise ValueError(f"alpha must lie in (0, n); got alpha={alpha}, n={n}")
        self.inner = inner
        self.alpha = alpha
        self.n = n
        t = self.T_GRID
        inv = inner.inverse(t) * t ** (-alpha / n)
        try:
            super().__init__(t, inv)
        except ConstructionError as exc:
            raise ConstructionError(f"Sobolev conjugate with alpha={alpha}, n={n}: {exc}") from None

    def inverse(self, s):
        scalar = np.ndim(s) == 0
        arr = np.atleast_1d(_as_array(s))
        out = np.zeros_like(arr)
        pos = arr > 0
        with np.errstate(over="ignore", invalid="ignore"):
            out[pos] = self.inner.inverse(arr[pos]) * arr[pos] ** (-self.alpha / self.n)
        out[np.isinf(arr)] = INF
        out = out.reshape(np.shape(s))
        return _ret(out, scalar)

    def to_spec(self):
        return {"kind": "sobolev_conjugate", "of": self.inner.to_spec(), "alpha": self.alpha, "n": self.n}


def sobolev_conjugate(phi: YoungFunction, alpha, n) -> YoungFunction:
    return SobolevConjugate(phi, alpha, n)


# ---------------------------------------------------------------------------
# Cianchi constructions


class ACurve:
    """The inner integral ``A(s) = ∫_0^s F(t)/t^{1+p'} dt`` on a log grid, with its inverse."""

    def __init__(self, t, values, p, near_zero_exponent):
        self.t = t
        self.values = values
        self.p = p
        self.near_zero_exponent = near_zero_exponent

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.interp(np.log(np.maximum(s, self.t[0])), np.log(self.t), self.values)
        e = self.near_zero_exponent
        below = s < self.t[0]
        if np.any(below) and math.isfinite(e):
            out = np.where(below, self.values[0] * (np.maximum(s, 1e-300) / self.t[0]) ** (e + 1.0), out)
        return np.where(s <= 0, 0.0, out)

    def inverse(self, y):
        """``inf{s : A(s) > y}`` from the monotone table."""
        y = np.asarray(y, dtype=float)
        t, A = self.t, self.values
        finite = np.isfinite(A)
        posf = finite & (A > 0)
        idx = np.nonzero(posf)[0]
        zero_idx = np.nonzero(finite & (A == 0))[0]
        if idx.size == 0:
            if zero_idx.size == 0:
                raise ConstructionError("inner integral is infinite everywhere", "divergent")
            return np.full_like(y, t[zero_idx[-1]])
        k0, k1 = idx[0], idx[-1]
        lt = np.log(t[k0:k1 + 1])
        la = np.log(A[k0:k1 + 1])
        # strictly increasing subset for interpolation
        keep = np.concatenate([[True], np.diff(la) > 0])
        lt, la = lt[keep], la[keep]
        out = np.empty_like(y)
        with np.errstate(divide="ignore"):
            ly = np.log(y)
        mid = (y >= A[k0]) & (y <= A[k1])
        out[mid] = np.exp(np.interp(ly[mid], la, lt))
        low = y < A[k0]
        if k0 > 0:
            t0 = t[k0 - 1]
            out[low] = t0 + (t[k0] - t0) * y[low] / A[k0]
        elif la.size >= 2:
            sl = (lt[1] - lt[0]) / (la[1] - la[0])
            out[low] = np.exp(lt[0] + sl * (ly[low] - la[0]))
        else:
            out[low] = t[k0]
        high = y > A[k1]
        if k1 < len(A) - 1 or la.size < 2:
            out[high] = t[k1]
        else:
            sl = (lt[-1] - lt[-2]) / (la[-1] - la[-2])
            out[high] = np.exp(lt[-1] + sl * (ly[high] - la[-1]))
        out[y <= 0] = t[k0 - 1] if k0 > 0 else 0.0
        return out


A_GRID = nm.decade_grid(-12, 12, 400)
OUTER_GRID = nm.decade_grid(-9, 7, 400)
TABLE_RANGE = (-6, 6)
NEAR_ZERO_DECADES = 2


def _near_zero_fit(t, g, decades=NEAR_ZERO_DECADES, per_decade=400):
    """Fitted exponent of ``g`` over the first decades of the grid, and its class."""
    m = decades * per_decade + 1
    tt, gg = t[:m], g[:m]
    if np.any(np.isinf(gg)):
        return math.nan, "divergent"
    if not np.any(gg > 0):
        return math.nan, "convergent"
    e = nm.loglog_slope(tt, gg)
    return e, nm.classify_exponent(e, -1.0)


def _inner_integral(F, p, condition):
    """``A(s) = ∫_0^s F(t) t^{-1-p'} dt`` tabulated on ``A_GRID``."""
    pp = p / (p - 1.0)
    t = A_GRID
    with np.errstate(over="ignore", invalid="ignore"):
        g = F(t) * t ** (-1.0 - pp)
    g = np.where(np.isnan(g), INF, g)
    e, cls = _near_zero_fit(t, g)
    if cls != "convergent":
        raise ConstructionError(
            f"{condition}: integrand behaves like t^{e:.4f} near 0 ({cls})", cls, condition
        )
    head = 0.0
    if g[0] > 0 and math.isfinite(e):
        head = g[0] * t[0] / (e + 1.0)
    A = head + nm.cumulative_powerlaw(t, g)
    return ACurve(t, A, p, e)


def _outer_table(curve: ACurve, p, label, meta):
    """``∫_0^s r^{p'-1} (A^{-1}(r^{p'}))^{p'} dr`` tabulated, as a Young function."""
    pp = p / (p - 1.0)
    r = OUTER_GRID
    h = r ** (pp - 1.0) * curve.inverse(r**pp) ** pp
    e = nm.loglog_slope(r[:401], h[:401])
    head = h[0] * r[0] / (e + 1.0) if (h[0] > 0 and math.isfinite(e) and e > -1.0) else 0.0
    vals = head + nm.cumulative_powerlaw(r, h)
    lo, hi = TABLE_RANGE
    sel = (r >= 10.0**lo * (1 - 1e-12)) & (r <= 10.0**hi * (1 + 1e-12))
    return TabulatedYoung(r[sel], vals[sel], label=label, meta=meta)


def cianchi_construct(phi: YoungFunction, p):
    """Return ``(A_p, Φ_p)`` for the Young function ``phi`` and exponent ``p > 1``."""
    p = float(p)
    if not p > 1.0:
        raise ValueError("Cianchi construction needs p > 1")
    conj = phi.conjugate()
    curve = _inner_integral(conj.eval, p, "integral of the complementary function over t^(1+p') near 0")
    table = _outer_table(curve, p, "cianchi_phi_p", {"of": phi.to_spec(), "p": p})
    return curve, table


def cianchi_phi_p(phi, p):
    return cianchi_construct(phi, p)[1]


def cianchi_psi_p(psi: YoungFunction, p):
    """``Ψ_p``: build its complementary function from ``B_p`` and conjugate once."""
    p = float(p)
    if not p > 1.0:
        raise ValueError("Cianchi construction needs p > 1")
    curve = _inner_integral(psi.eval, p, "integral of Psi over t^(1+p') near 0")
    table = _outer_table(curve, p, "cianchi_psi_p_conjugate", {"of": psi.to_spec(), "p": p})
    return CianchiPsi(table, psi, p)


class CianchiPsi(NumericConjugate):
    kind = "cianchi_psi_p"

    def __init__(self, table, psi, p):
        super().__init__(table)
        self.psi = psi
        self.p = p

    def to_spec(self):
        return {"kind": "cianchi_psi_p", "of": self.psi.to_spec(), "p": self.p}


# ---------------------------------------------------------------------------
# Diagnostics


def _range_grid(sample_range):
    lo, hi, num = (tuple(sample_range) + (121,))[:3]
    lo, hi, num = float(lo), float(hi), int(num)
    if not (0 < lo < hi < INF) or num < 2:
        raise ValueError("sample_range must be (lo, hi[, num]) with 0 < lo < hi < inf")
    return np.geomspace(lo, hi, num), (lo, hi, num)


def _per_decade(grid):
    return max(1, int(round((len(grid) - 1) / math.log10(grid[-1] / grid[0]))))


def delta2_test(phi: YoungFunction, sample_range=(1e-3, 1e3, 121), blowup=1e6) -> Verdict:
    r, rng = _range_grid(sample_range)
    a = phi.eval(r)
    b = phi.eval(2.0 * r)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(b == 0, 1.0, b / a)
    ratio = np.where(np.isinf(a), 1.0, ratio)
    bad = ~np.isfinite(ratio) | (ratio > blowup)
    if bad.any():
        i = int(np.argmax(bad))
        return Verdict(FAILS, witness=float(r[i]), sample_range=rng,
                       reason=f"Phi(2r)/Phi(r) = {float(ratio[i])} at r = {float(r[i])}")
    k = float(np.max(ratio))
    lr = np.log(ratio)
    pd = _per_decade(r)
    if nm.edge_unresolved(lr, pd, at_end=True) or nm.edge_unresolved(lr, pd, at_end=False):
        return Verdict(INCONCLUSIVE, value=k, sample_range=rng, reason="ratio still growing at the range edge")
    return Verdict(HOLDS, value=k, sample_range=rng)


def nabla2_test(phi: YoungFunction, sample_range=(1e-3, 1e3, 121), k_max=64.0, num_k=61) -> Verdict:
    r, rng = _range_grid(sample_range)
    ks = np.geomspace(1.0 + 1e-3, k_max, num_k)
    ks = np.unique(np.concatenate([ks, [2.0]]))
    a = phi.eval(r)
    best_k, best_rho, best_at = None, -INF, None
    for k in ks:
        b = phi.eval(k * r)
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = b / (2.0 * k * a)
        rho = np.where((a == 0) | (np.isinf(a) & np.isinf(b)), INF, rho)
        i = int(np.argmin(rho))
        m = float(rho[i])
        if m >= 1.0 - 1e-9:
            return Verdict(HOLDS, value=float(k), sample_range=rng, details={"k_max": k_max})
        if m > best_rho:
            best_k, best_rho, best_at = float(k), m, float(r[i])
    return Verdict(FAILS, witness={"k": best_k, "r": best_at, "ratio": best_rho}, sample_range=rng,
                   reason="no k in (1, k_max] gives Phi(kr) >= 2k Phi(r) on the range",
                   details={"k_max": k_max})


class TypeIndices:
    def __init__(self, a_phi, b_phi, sample_range, excluded=0):
        self.a_phi = a_phi
        self.b_phi = b_phi
        self.sample_range = sample_range
        self.excluded = excluded

    def to_dict(self):
        return {"a_phi": self.a_phi, "b_phi": self.b_phi, "sample_range": list(self.sample_range),
                "excluded": self.excluded}

    def __repr__(self):
        return f"TypeIndices(a_phi={self.a_phi!r}, b_phi={self.b_phi!r}, sample_range={self.sample_range!r})"


def type_indices(phi: YoungFunction, sample_range=(1e-3, 1e3, 121), step=1e-6) -> TypeIndices:
    """min and max of ``t Φ'(t)/Φ(t)`` by a central difference in log coordinates."""
    r, rng = _range_grid(sample_range)
    up = phi.log_eval(r * math.exp(step))
    dn = phi.log_eval(r * math.exp(-step))
    with np.errstate(invalid="ignore"):
        q = (up - dn) / (2.0 * step)
    ok = np.isfinite(q)
    excluded = int((~ok).sum())
    if excluded:
        warnings.warn(f"type_indices: {excluded} samples with non-finite quotient excluded", RuntimeWarning,
                      stacklevel=2)
    if not ok.any():
        return TypeIndices(math.nan, math.nan, rng[:2], excluded)
    return TypeIndices(float(q[ok].min()), float(q[ok].max()), rng[:2], excluded)


def indices_verdict(phi: YoungFunction, decades=(2, 3, 4), per_decade=20, growth=0.10) -> Verdict:
    """Sampled check of ``1 < a_Φ <= b_Φ < ∞`` over widening ranges."""
    seq = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for d in decades:
            seq.append(type_indices(phi, (10.0**-d, 10.0**d, 2 * d * per_decade + 1)))
    details = {"ranges": [ti.to_dict() for ti in seq]}
    a = [ti.a_phi for ti in seq]
    b = [ti.b_phi for ti in seq]
    rng = seq[-1].sample_range
    if any(math.isnan(x) for x in a + b):
        return Verdict(FAILS, sample_range=rng, reason="quotient undefined on the range", details=details)
    if a[-1] <= 1.0 + 1e-9:
        return Verdict(FAILS, witness={"a_phi": a[-1]}, sample_range=rng, reason="a_phi <= 1", details=details)
    if b[-1] > b[0] * (1.0 + growth):
        return Verdict(FAILS, witness={"b_phi": b}, sample_range=rng, reason="b_phi grows with the range",
                       details=details)
    if (a[-1] - 1.0) < (a[0] - 1.0) * (1.0 - growth):
        return Verdict(FAILS, witness={"a_phi": a}, sample_range=rng, reason="a_phi approaches 1 with the range",
                       details=details)
    return Verdict(HOLDS, value=b[-1], sample_range=rng, details=details)


DEFAULT_C_GRID = 10.0 ** (np.arange(-300, 201) / 100.0)
DEFAULT_S_GRID = nm.decade_grid(-8, 8, 10)


def dominates_globally(psi: YoungFunction, phi: YoungFunction, c_grid=None, s_grid=None,
                       s_domain=(0.0, INF)) -> Verdict:
    """Does ``psi`` dominate ``phi``: smallest c on the grid with ``Φ(s) <= Ψ(cs)`` for all sampled s."""
    c_grid = DEFAULT_C_GRID if c_grid is None else np.sort(np.asarray(c_grid, dtype=float))
    s = DEFAULT_S_GRID if s_grid is None else np.sort(np.asarray(s_grid, dtype=float))
    rng = (float(s[0]), float(s[-1]), int(s.size))
    f = phi.eval(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        target = np.where(f > 0, f * (1.0 - 1e-12), 0.0)
        need = np.where(f > 0, psi.inverse(target) / s, 0.0)

    def ok(c):
        return bool(np.all(f <= psi.eval(c * s) * (1.0 + 1e-9)))

    worst = int(np.argmax(need))
    c_need = float(need[worst])
    if not math.isfinite(c_need) or c_need > c_grid[-1] or not ok(c_grid[-1]):
        return Verdict("not_dominated", witness=float(s[worst]), sample_range=rng,
                       reason=f"needs c >= {c_need} at s = {float(s[worst])}",
                       details={"c_max": float(c_grid[-1])})
    lc = np.log(np.maximum(need, 1e-300))
    pd = _per_decade(s) if s.size > 2 else 1
    edges = []
    if s_domain[1] == INF and nm.edge_unresolved(lc, pd, at_end=True):
        edges.append("upper")
    if s_domain[0] == 0.0 and nm.edge_unresolved(lc, pd, at_end=False):
        edges.append("lower")
    # smallest grid c that passes (the check is monotone in c)
    lo, hi = 0, len(c_grid) - 1
    start = int(np.searchsorted(c_grid, c_need * (1.0 - 1e-9)))
    lo = min(start, hi)
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(c_grid[mid]):
            hi = mid
        else:
            lo = mid + 1
    c_hat = float(c_grid[hi])
    if edges:
        return Verdict(INCONCLUSIVE, value=c_hat, sample_range=rng,
                       reason=f"required constant still growing at the {' and '.join(edges)} edge")
    return Verdict("dominated", value=c_hat, sample_range=rng, details={"c_required": c_need})


def check_young(phi: YoungFunction, grid=None, tol=1e-9):
    """Sampled Young-function axioms; returns a list of violation messages."""
    grid = nm.decade_grid(-4, 4, 10) if grid is None else np.asarray(grid, dtype=float)
    issues = []
    if phi.eval(0.0) != 0.0:
        issues.append("Phi(0) != 0")
    v = phi.eval(grid)
    with np.errstate(invalid="ignore"):
        drop = np.diff(v) < -tol * np.maximum(1.0, np.abs(v[:-1]))
    if np.any(drop):
        issues.append("not non-decreasing")
    a, b = grid[:-2], grid[2:]
    mid = phi.eval(0.5 * (a + b))
    va, vb = phi.eval(a), phi.eval(b)
    with np.errstate(invalid="ignore"):
        bad = mid > 0.5 * (va + vb) * (1 + tol) + tol
    if np.any(bad):
        issues.append(f"convexity violated near r = {float(a[np.argmax(bad)])}")
    return issues


# ---------------------------------------------------------------------------
# Spec DSL


SHORTHAND = {
    "exp_minus_linear": ExpMinusLinear,
    "log_type": LogType,
    "indicator_linf": IndicatorLinf,
}


def from_spec(spec) -> YoungFunction:
    """Build a Young function from the JSON DSL (dict or JSON text) or CLI shorthand ``power:2``."""
    if isinstance(spec, YoungFunction):
        return spec
    if isinstance(spec, str):
        text = spec.strip()
        if text.startswith("{"):
            spec = json.loads(text)
        else:
            head, *args = text.split(":")
            if head == "power":
                if not args:
                    raise ValueError("power shorthand needs an exponent, e.g. power:2")
                return Power(*[float(a) for a in args])
            if head in SHORTHAND and not args:
                return SHORTHAND[head]()
            raise ValueError(f"unknown Young-function shorthand {text!r}")
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("Young-function spec must be an object with a 'kind' field")
    kind = spec["kind"]

    def need(key):
        if key not in spec:
            raise ValueError(f"Young-function spec of kind {kind!r} is missing field {key!r}")
        return spec[key]

    if kind == "power":
        return Power(need("p"), spec.get("scale", 1.0))
    if kind == "exp_minus_linear":
        return ExpMinusLinear()
    if kind == "log_type":
        return LogType()
    if kind == "indicator_linf":
        return IndicatorLinf(spec.get("split", 1.0))
    if kind == "piecewise_linear_convex":
        return PiecewiseLinear(need("knots"), spec.get("tail_slope"), spec.get("cap", INF))
    if kind == "conjugate":
        return from_spec(need("of")).conjugate()
    if kind == "cianchi_phi_p":
        return cianchi_phi_p(from_spec(need("of")), need("p"))
    if kind == "cianchi_psi_p":
        return cianchi_psi_p(from_spec(need("of")), need("p"))
    if kind == "sobolev_conjugate":
        return SobolevConjugate(from_spec(need("of")), need("alpha"), need("n"))
    if kind == "table_inverse":
        samples = np.asarray(need("samples"), dtype=float).reshape(-1, 2)
        return TableInverse(samples[:, 0], samples[:, 1])
    raise ValueError(f"unknown Young-function kind {kind!r}")


def builtin_kinds():
    """Representative instances of every closed-form kind."""
    return {
        "power1": Power(1.0),
        "power1.5": Power(1.5),
        "power2": Power(2.0),
        "power3": Power(3.0),
        "exp_minus_linear": ExpMinusLinear(),
        "log_type": LogType(),
        "indicator_linf": IndicatorLinf(),
    }
