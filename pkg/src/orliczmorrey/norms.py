"""Norm functionals: Luxemburg, weak Orlicz, Orlicz-Morrey (classical and
generalized, strong and weak), the two average norms over a single ball or
cube, BMO and its Orlicz form.

Sup-type norms are maxima over a :class:`~orliczmorrey.field.BallFamily`;
every result records the family and the maximizing ball.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import Ball, BallFamily, BallIndex, SampledFunction, UNIT_BALL_VOLUME, ball_mask
from .verdict import jsonable
from .young import Power, YoungFunction, from_spec, indices_verdict

REL_TOL = 1e-12
MAX_ITER = 200


@dataclass
class NormResult:
    value: float
    achieving_ball: Ball | None = None
    family_id: str | None = None
    tolerance_used: float = REL_TOL
    details: dict = dc_field(default_factory=dict)

    def __float__(self):
        return float(self.value)

    def to_dict(self):
        return jsonable({
            "value": self.value,
            "achieving_ball": None if self.achieving_ball is None else self.achieving_ball.to_dict(),
            "family_id": self.family_id,
            "tolerance_used": self.tolerance_used,
            "details": self.details,
        })


# ---------------------------------------------------------------------------
# Region bookkeeping: every region is a list of (cell, region-id) pairs


class _Pairs:
    def __init__(self, cells, ids, count, vol):
        self.cells = cells
        self.ids = ids
        self.count = count
        self.vol = vol

    def sum(self, x):
        return np.bincount(self.ids, weights=x, minlength=self.count)

    def max(self, x):
        out = np.zeros(self.count)
        np.maximum.at(out, self.ids, x)
        return out

    def measures(self):
        return np.bincount(self.ids, minlength=self.count) * self.vol


def _pairs_from_mask(mask, vol):
    cells = np.flatnonzero(mask.ravel())
    return _Pairs(cells, np.zeros(cells.size, dtype=np.int64), 1, vol)


def _pairs_from_index(bi: BallIndex):
    grid = bi.grid
    nb = bi.shape[0] * bi.shape[1]
    if grid.dim == 1:
        i0 = bi.i0.ravel()
        i1 = bi.i1.ravel()
        seg_ball = np.arange(nb)
        row_off = np.zeros(nb, dtype=np.int64)
        stride = 1
    else:
        ny = grid.shape[1]
        i0 = bi.i0.reshape(nb, ny).ravel()
        i1 = bi.i1.reshape(nb, ny).ravel()
        seg_ball = np.repeat(np.arange(nb), ny)
        row_off = np.tile(np.arange(ny), nb)
        stride = ny
    cnt = np.maximum(i1 - i0, 0)
    total = int(cnt.sum())
    seg = np.repeat(np.arange(cnt.size), cnt)
    start = np.cumsum(cnt) - cnt
    local = np.arange(total) - start[seg]
    cells = (i0[seg] + local) * stride + row_off[seg]
    return _Pairs(cells.astype(np.int64), seg_ball[seg], nb, grid.cell_volume)


# ---------------------------------------------------------------------------
# Batched Luxemburg and weak functionals


def _batch_bisect(modular, peak, count, tol=REL_TOL):
    """Smallest λ per region with ``modular(λ) <= 1``; ``modular`` is vectorized over regions."""
    lam = np.zeros(count)
    live = peak > 0
    if not live.any():
        return lam
    hi = np.where(live, peak, 1.0)
    for _ in range(MAX_ITER):
        m = modular(hi)
        bad = live & ~(m <= 1.0)
        if not bad.any():
            break
        hi = np.where(bad, hi * 10.0, hi)
    lo = hi.copy()
    for _ in range(MAX_ITER):
        lo = np.where(live, lo / 10.0, lo)
        m = modular(lo)
        ok = live & (m <= 1.0)
        if not ok.any():
            break
        hi = np.where(ok, lo, hi)
    # invariant: modular(lo) > 1 >= modular(hi)
    for _ in range(MAX_ITER):
        open_ = live & (hi > lo * (1.0 + tol))
        if not open_.any():
            break
        mid = np.sqrt(lo * hi)
        m = modular(mid)
        above = m > 1.0
        hi = np.where(open_ & ~above, mid, hi)
        lo = np.where(open_ & above, mid, lo)
    return np.where(live, hi, 0.0)


def _luxemburg_pairs(a, pairs: _Pairs, phi: YoungFunction, scale=1.0):
    """Per-region ``inf{λ : scale·∫ Φ(a/λ) <= 1}``; ``a >= 0`` sampled on the pair list."""
    scale = np.broadcast_to(np.asarray(scale, dtype=float), (pairs.count,))
    peak = pairs.max(a)
    if isinstance(phi, Power):
        # homogeneous modular: the bisection root is available in closed form
        s = pairs.sum(a**phi.p) * pairs.vol * phi.scale * scale
        return s ** (1.0 / phi.p)

    def modular(lam):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            v = phi.eval(a / lam[pairs.ids])
        return pairs.sum(v) * pairs.vol * scale

    return _batch_bisect(modular, peak, pairs.count)


def _weak_pairs(a, pairs: _Pairs, phi: YoungFunction):
    """Per-region weak Orlicz norm, evaluating ``sup_t Φ(t) m(a/λ, t)`` at the jump points."""
    order = np.lexsort((-a, pairs.ids))
    a_s = a[order]
    ids_s = pairs.ids[order]
    first = np.searchsorted(ids_s, np.arange(pairs.count), side="left")
    rank = np.arange(a_s.size) - first[ids_s]
    mu = (rank + 1) * pairs.vol
    peak = pairs.max(a)
    p2 = _Pairs(None, ids_s, pairs.count, pairs.vol)

    def sup_fn(lam):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            v = phi.eval(a_s / lam[ids_s]) * mu
        v = np.where(a_s > 0, v, 0.0)
        return p2.max(v)

    return _batch_bisect(sup_fn, peak, pairs.count)


def weak_closed_form(f: SampledFunction, phi: YoungFunction, region: Ball | None = None):
    """``max_k v_k / Φ^{-1}(1/μ_k)`` over the distinct values: the exact weak norm of step data."""
    vals = np.abs(f.values)
    if region is not None:
        vals = vals[ball_mask(f, region)]
    v = np.sort(vals.ravel())[::-1]
    v = v[v > 0]
    if v.size == 0:
        return 0.0
    mu = (np.arange(v.size) + 1) * f.cell_volume
    return float(np.max(v / phi.inverse(1.0 / mu)))


def _region_mask(f, region):
    if region is None:
        return np.ones(f.shape, dtype=bool)
    if isinstance(region, Ball):
        return ball_mask(f, region)
    lo, hi = region
    c = f.grid.centers()
    return np.all((c >= np.asarray(lo)) & (c <= np.asarray(hi)), axis=-1)


def _compressed(f, region):
    """Distinct nonzero values of ``|f|`` on the region with their multiplicities."""
    a = np.abs(f.values[_region_mask(f, region)])
    a = a[a > 0]
    if a.size and a.min() == a.max():
        return a[:1], np.array([a.size], dtype=float)
    v, c = np.unique(a, return_counts=True)
    return v, c.astype(float)


def luxemburg_norm(f: SampledFunction, phi, region=None, scale=1.0) -> NormResult:
    """``inf{λ > 0 : scale·∫_region Φ(|f|/λ) <= 1}`` by bisection on λ."""
    phi = from_spec(phi)
    v, c = _compressed(f, region)
    vol = f.cell_volume

    def modular(lam):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.array([np.dot(c, phi.eval(v / lam[0])) * vol * scale])

    # always bisect here, so the power closed form stays an independent cross-check
    val = float(_batch_bisect(modular, np.array([v.max() if v.size else 0.0]), 1)[0])
    res = NormResult(val, region if isinstance(region, Ball) else None)
    if val > 0:
        mod = float(modular(np.array([val]))[0])
        res.details["modular_at_norm"] = mod
        if not mod <= 1.0 + 1e-9:
            raise ArithmeticError(f"Luxemburg post-check failed: modular {mod} > 1")
    return res


def weak_orlicz_norm(f: SampledFunction, phi, region=None) -> NormResult:
    """Bisection on λ of ``max_k Φ(v_k/λ) μ_k`` over the jump points ``v_k`` of ``|f|``."""
    phi = from_spec(phi)
    v, c = _compressed(f, region)
    v, c = v[::-1], c[::-1]
    mu = np.cumsum(c) * f.cell_volume

    def sup_fn(lam):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.array([np.max(phi.eval(v / lam[0]) * mu)])

    val = float(_batch_bisect(sup_fn, np.array([v.max() if v.size else 0.0]), 1)[0])
    return NormResult(val, region if isinstance(region, Ball) else None)


# ---------------------------------------------------------------------------
# Morrey weights


class MorreyWeight:
    """Positive function ``φ(x, r)``."""

    kind = "abstract"

    def __call__(self, x, r):
        return self.eval(np.asarray(x, dtype=float), np.asarray(r, dtype=float))

    def eval(self, x, r):
        raise NotImplementedError

    def to_spec(self):
        raise NotImplementedError


class PowerWeight(MorreyWeight):
    """``c · r^a``."""

    kind = "power_r"

    def __init__(self, a, c=1.0):
        self.a = float(a)
        self.c = float(c)

    def eval(self, x, r):
        return self.c * r**self.a

    def to_spec(self):
        return {"kind": "power_r", "a": self.a, "c": self.c}


class OrliczLambdaWeight(MorreyWeight):
    """``Φ^{-1}(r^{-n}) / Φ^{-1}(r^{-λ})``, which turns the generalized norm into the λ-form."""

    kind = "orlicz_lambda"

    def __init__(self, phi, lam, n):
        self.phi = from_spec(phi)
        self.lam = float(lam)
        self.n = int(n)

    def eval(self, x, r):
        r = np.asarray(r, dtype=float)
        return self.phi.inverse(r ** (-self.n)) / self.phi.inverse(r ** (-self.lam))

    def to_spec(self):
        return {"kind": "orlicz_lambda", "phi": self.phi.to_spec(), "lambda": self.lam, "n": self.n}


class TableWeight(MorreyWeight):
    """Samples ``r -> value`` with log-log interpolation and constant-slope ends."""

    kind = "table"

    def __init__(self, r, values):
        r = np.asarray(r, dtype=float)
        v = np.asarray(values, dtype=float)
        if r.ndim != 1 or r.size < 2 or r.shape != v.shape or np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("table weight needs increasing positive radii and matching values")
        if np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise ValueError("weight values must be positive and finite")
        self.r = r
        self.v = v
        self._lr, self._lv = np.log(r), np.log(v)

    def eval(self, x, r):
        lr = np.log(np.asarray(r, dtype=float))
        out = np.interp(lr, self._lr, self._lv)
        s0 = (self._lv[1] - self._lv[0]) / (self._lr[1] - self._lr[0])
        s1 = (self._lv[-1] - self._lv[-2]) / (self._lr[-1] - self._lr[-2])
        out = np.where(lr < self._lr[0], self._lv[0] + s0 * (lr - self._lr[0]), out)
        out = np.where(lr > self._lr[-1], self._lv[-1] + s1 * (lr - self._lr[-1]), out)
        return np.exp(out)

    def to_spec(self):
        return {"kind": "table", "r": self.r.tolist(), "values": self.v.tolist()}


class XPowerWeight(MorreyWeight):
    """``(1 + |x|)^a``, an x-dependent factor for product weights."""

    kind = "x_power"

    def __init__(self, a):
        self.a = float(a)

    def eval(self, x, r):
        x = np.asarray(x, dtype=float)
        nx = np.sqrt(np.sum(x**2, axis=-1)) if x.ndim else np.abs(x)
        return (1.0 + nx) ** self.a * np.ones_like(np.asarray(r, dtype=float))

    def to_spec(self):
        return {"kind": "x_power", "a": self.a}


class ProductWeight(MorreyWeight):
    kind = "product"

    def __init__(self, x_part, r_part):
        self.x_part = x_part
        self.r_part = r_part

    def eval(self, x, r):
        return self.x_part.eval(x, r) * self.r_part.eval(x, r)

    def to_spec(self):
        return {"kind": "product", "x_part": self.x_part.to_spec(), "r_part": self.r_part.to_spec()}


def weight_from_spec(spec) -> MorreyWeight:
    if isinstance(spec, MorreyWeight):
        return spec
    if isinstance(spec, (int, float)):
        return PowerWeight(spec)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("weight spec must be an object with a 'kind' field")
    kind = spec["kind"]

    def need(k):
        if k not in spec:
            raise ValueError(f"weight spec of kind {kind!r} is missing field {k!r}")
        return spec[k]

    if kind == "power_r":
        return PowerWeight(need("a"), spec.get("c", 1.0))
    if kind == "orlicz_lambda":
        return OrliczLambdaWeight(need("phi"), need("lambda"), need("n"))
    if kind == "table":
        return TableWeight(need("r"), need("values"))
    if kind == "x_power":
        return XPowerWeight(need("a"))
    if kind == "product":
        return ProductWeight(weight_from_spec(need("x_part")), weight_from_spec(need("r_part")))
    raise ValueError(f"unknown weight kind {kind!r}")


# ---------------------------------------------------------------------------
# Sup-type norms over ball families


class FamilySweep:
    """Cached pair lists for one (grid, family) so several norms can share them."""

    def __init__(self, grid, family: BallFamily):
        self.family = family
        self.index = BallIndex(grid, family)
        self.pairs = _pairs_from_index(self.index)
        nc, nr = self.index.shape
        self.centers = np.repeat(family.centers, nr, axis=0)
        self.radii = np.tile(family.radii, nc)
        self.volumes = UNIT_BALL_VOLUME[grid.dim] * self.radii**grid.dim

    def ball(self, k):
        return Ball(tuple(self.centers[k]), float(self.radii[k]))

    def local_norms(self, f: SampledFunction, phi, weak=False):
        a = np.abs(f.values.ravel()[self.pairs.cells])
        if weak:
            return _weak_pairs(a, self.pairs, phi)
        return _luxemburg_pairs(a, self.pairs, phi)


_SWEEPS = {}


def family_sweep(grid, family):
    key = (grid, family.family_id)
    sw = _SWEEPS.get(key)
    if sw is None:
        if len(_SWEEPS) > 16:
            _SWEEPS.clear()
        sw = _SWEEPS[key] = FamilySweep(grid, family)
    return sw


def _best(q, sweep, extra=None):
    q = np.where(np.isnan(q), -np.inf, q)
    k = int(np.argmax(q))
    details = {"family": sweep.family.to_dict()}
    if extra:
        details.update(extra)
    return NormResult(float(max(q[k], 0.0)), sweep.ball(k), sweep.family.family_id, REL_TOL, details)


def generalized_orlicz_morrey_norm(f, phi, w, family: BallFamily, weak=False) -> NormResult:
    """``max φ(x,r)^{-1} Φ^{-1}(|B(x,r)|^{-1}) ‖f‖_{L_Φ(B(x,r))}`` over the family, ``|B| = v_n r^n``."""
    phi = from_spec(phi)
    w = weight_from_spec(w)
    sw = family_sweep(f.grid, family)
    loc = sw.local_norms(f, phi, weak)
    q = phi.inverse(1.0 / sw.volumes) * loc / w.eval(sw.centers, sw.radii)
    return _best(q, sw, {"weak": bool(weak), "weight": w.to_spec()})


def orlicz_morrey_lambda_norm(f, phi, lam, family: BallFamily, weak=False) -> NormResult:
    """``max Φ^{-1}(r^{-λ}) ‖f‖_{L_Φ(B(x,r))}`` over the family."""
    phi = from_spec(phi)
    n = f.dim
    if not (0.0 <= lam <= n):
        warnings.warn(f"lambda={lam} outside [0, {n}]: the space is trivial; computing anyway", RuntimeWarning,
                      stacklevel=2)
    sw = family_sweep(f.grid, family)
    loc = sw.local_norms(f, phi, weak)
    q = phi.inverse(sw.radii ** (-float(lam))) * loc
    return _best(q, sw, {"weak": bool(weak), "lambda": float(lam)})


def classical_morrey_norm(f, p, lam, family: BallFamily) -> NormResult:
    """``max r^{-λ/p} ‖f‖_{L_p(B)}`` by direct prefix sums (independent of the Orlicz machinery)."""
    sw = family_sweep(f.grid, family)
    s = sw.index.sums(np.abs(f.values) ** p).ravel()
    q = sw.radii ** (-lam / p) * s ** (1.0 / p)
    return _best(q, sw, {"p": p, "lambda": lam})


def _region_volume(f, Q):
    if isinstance(Q, Ball):
        return Q.volume
    lo, hi = Q
    return float(np.prod(np.asarray(hi, dtype=float) - np.asarray(lo, dtype=float)))


def average_norms(f, phi, varphi, Q):
    """First- and second-kind averages over one ball or cube ``Q = (lo, hi)``.

    first  = inf{λ : (φ(|Q|)/|Q|) ∫_Q Φ(|f|/λ) <= 1}
    second = φ(|Q|) · inf{λ : (1/|Q|) ∫_Q Φ(|f|/λ) <= 1}
    """
    phi = from_spec(phi)
    vol = _region_volume(f, Q)
    pv = float(varphi(vol))
    first = luxemburg_norm(f, phi, Q, scale=pv / vol).value
    second = pv * luxemburg_norm(f, phi, Q, scale=1.0 / vol).value
    return first, second


def _oscillation_pairs(b: SampledFunction, sweep: FamilySweep):
    pairs = sweep.pairs
    vals = b.values.ravel()[pairs.cells]
    meas = pairs.measures()
    with np.errstate(invalid="ignore", divide="ignore"):
        avg = np.where(meas > 0, pairs.sum(vals) * pairs.vol / meas, 0.0)
    return np.abs(vals - avg[pairs.ids]), avg, meas


def ball_averages(b: SampledFunction, family: BallFamily):
    """Averages over every ball of the family with the discrete (cell-count) measure."""
    sw = family_sweep(b.grid, family)
    s = sw.index.sums(b.values).ravel()
    m = sw.index.measures().ravel()
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(m > 0, s / m, 0.0).reshape(sw.index.shape)


def bmo_norm(b: SampledFunction, family: BallFamily) -> NormResult:
    """Family maximum of the mean oscillation ``(1/|B|) ∫_B |b - b_B|``."""
    sw = family_sweep(b.grid, family)
    dev, _, meas = _oscillation_pairs(b, sw)
    with np.errstate(invalid="ignore", divide="ignore"):
        q = np.where(meas > 0, sw.pairs.sum(dev) * sw.pairs.vol / meas, -np.inf)
    return _best(q, sw, {"measure": "discrete"})


def bmo_orlicz_functional(b: SampledFunction, phi, family: BallFamily) -> NormResult:
    """Family maximum of ``Φ^{-1}(r^{-n}) ‖b - b_B‖_{L_Φ(B)}``."""
    phi = from_spec(phi)
    v = indices_verdict(phi)
    if not v.ok:
        warnings.warn(f"type indices of Phi not in (1, inf): {v.reason}", RuntimeWarning, stacklevel=2)
    sw = family_sweep(b.grid, family)
    dev, _, _ = _oscillation_pairs(b, sw)
    loc = _luxemburg_pairs(dev, sw.pairs, phi)
    q = phi.inverse(sw.radii ** (-float(b.dim))) * loc
    return _best(q, sw, {"indices_verdict": v.status})


def lp_oscillation(b: SampledFunction, p, family: BallFamily) -> NormResult:
    """``max ((1/|B|) ∫_B |b - b_B|^p)^{1/p}`` computed directly."""
    sw = family_sweep(b.grid, family)
    dev, _, meas = _oscillation_pairs(b, sw)
    with np.errstate(invalid="ignore", divide="ignore"):
        q = np.where(meas > 0, (sw.pairs.sum(dev**p) * sw.pairs.vol / meas) ** (1.0 / p), -np.inf)
    return _best(q, sw, {"p": p})


def characteristic_norm(phi, measure):
    """``1/Φ^{-1}(1/|B|)``: the norm of an indicator of a set of the given measure."""
    phi = from_spec(phi)
    inv = phi.inverse(1.0 / np.asarray(measure, dtype=float))
    with np.errstate(divide="ignore"):
        return 1.0 / inv
