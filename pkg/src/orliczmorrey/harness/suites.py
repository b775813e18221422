"""Pass/fail property checks over young and norms.

Each check returns a plain dict record:
``{"name", "status", "value", "bound", "witness", "samples", ...}``.
"""

from __future__ import annotations

import math

import numpy as np

from .. import _numerics as nm
from ..field import (UNIT_BALL_VOLUME, Ball, BallFamily, SampledFunction, ball_measure, indicator_ball,
                     integrate_over_ball, log_field, uniform_grid)
from ..norms import (ball_averages, bmo_norm, bmo_orlicz_functional, characteristic_norm, luxemburg_norm,
                     weak_orlicz_norm)
from ..verdict import FAILS, HOLDS
from ..young import Power, builtin_kinds, from_spec

DEFAULT_CELLS = {1: 2048, 2: 512}
HALF_WIDTH = {1: 4.0, 2: 2.5}
CHAR_PHIS = ("power1", "power1.5", "power2", "power3", "exp_minus_linear", "indicator_linf")
CHAR_RADII = (0.25, 0.5, 1.0, 2.0)


def record(name, ok, value=None, bound=None, witness=None, samples=None, **extra):
    out = {"name": name, "status": HOLDS if ok else FAILS, "value": value, "bound": bound,
           "witness": witness, "samples": samples}
    out.update(extra)
    return out


def _rel(a, b):
    return abs(a - b) / abs(b) if b != 0 else abs(a)


# ---------------------------------------------------------------------------


def char_norm_identity(dims=(1, 2), scale=1, tol=0.01, phis=CHAR_PHIS, radii=CHAR_RADII):
    """Luxemburg and weak norms of a ball indicator against ``1/Φ^{-1}(1/|B|)``."""
    kinds = builtin_kinds()
    worst, wit, count = 0.0, None, 0
    for n in dims:
        grid = uniform_grid(n, HALF_WIDTH[n], DEFAULT_CELLS[n] * scale)
        for r in radii:
            f = indicator_ball(grid, 0.0, r)
            meas = UNIT_BALL_VOLUME[n] * r**n
            for name in phis:
                phi = kinds[name]
                exact = float(characteristic_norm(phi, meas))
                for which, fn in (("luxemburg", luxemburg_norm), ("weak", weak_orlicz_norm)):
                    err = _rel(fn(f, phi).value, exact)
                    count += 1
                    if err > worst:
                        worst, wit = err, {"n": n, "r": r, "phi": name, "norm": which}
    return record("char_norm_identity", worst <= tol, worst, tol, wit, count, scale=scale)


def lp_consistency(trials=100, seed=0, tol=1e-9):
    """Luxemburg norm for ``t^p`` against the closed-form ``L_p`` norm on random fields."""
    rng = np.random.default_rng(seed)
    worst, wit = 0.0, None
    for k in range(trials):
        n_cells = int(rng.integers(8, 256))
        h = float(rng.uniform(0.01, 0.5))
        vals = rng.normal(size=n_cells) * (rng.random(n_cells) < rng.uniform(0.2, 1.0))
        if not np.any(vals):
            vals[0] = 1.0
        p = float(rng.uniform(1.0, 4.0))
        f = SampledFunction(vals, (h,))
        exact = float((np.sum(np.abs(vals) ** p) * h) ** (1.0 / p))
        err = _rel(luxemburg_norm(f, Power(p)).value, exact)
        if err > worst:
            worst, wit = err, {"trial": k, "p": p}
    return record("lp_consistency", worst <= tol, worst, tol, wit, trials)


def sandwich(slack=1e-6, count=200, kinds=None):
    """``r <= Φ^{-1}(r) Φ̃^{-1}(r) <= 2r`` on a log grid, plus the power-2 equality witness."""
    kinds = builtin_kinds() if kinds is None else kinds
    r = np.geomspace(1e-6, 1e6, count)
    lo_worst, hi_worst, wit = 0.0, 0.0, None
    for name, phi in kinds.items():
        prod = phi.inverse(r) * phi.conjugate().inverse(r)
        lo = float(np.max(1.0 - prod / r))
        hi = float(np.max(prod / (2 * r) - 1.0))
        if lo > lo_worst:
            lo_worst, wit = lo, {"phi": name, "side": "lower"}
        if hi > hi_worst:
            hi_worst, wit = hi, {"phi": name, "side": "upper"}
    p2 = Power(2)
    eq = float(np.min(p2.inverse(r) * p2.conjugate().inverse(r) / (2 * r)))
    ok = lo_worst <= slack and hi_worst <= slack and eq >= 1 - slack
    return record("sandwich", ok, max(lo_worst, hi_worst), slack, wit, count * len(kinds),
                  equality_ratio_power2=eq)


HOLDER_PHIS = ("power1", "power1.5", "power2", "power3", "exp_minus_linear", "log_type", "indicator_linf")


def holder(trials=1000, seed=0, tol=1e-9, cells=24):
    """``∫|fg| <= 2 ‖f‖_Φ ‖g‖_Φ̃`` on random triples, and the equality witness.

    For each Φ of the pool, ``m`` random f and ``m`` random g are drawn on one
    random grid and every pair is tested, so ``len(pool)·m²`` >= ``trials``.
    """
    rng = np.random.default_rng(seed)
    kinds = builtin_kinds()
    m = int(math.ceil(math.sqrt(trials / len(HOLDER_PHIS))))
    worst, wit, count = 0.0, None, 0
    for name in HOLDER_PHIS:
        phi = kinds[name]
        conj = phi.conjugate()
        h = float(rng.uniform(0.05, 1.0))
        fs = [rng.normal(size=cells) * 10.0 ** rng.uniform(-2, 2) * (rng.random(cells) < 0.7) for _ in range(m)]
        gs = [rng.normal(size=cells) * 10.0 ** rng.uniform(-2, 2) * (rng.random(cells) < 0.7) for _ in range(m)]
        nf = [luxemburg_norm(SampledFunction(f, (h,)), phi).value for f in fs]
        ng = [luxemburg_norm(SampledFunction(g, (h,)), conj).value for g in gs]
        for i, f in enumerate(fs):
            for j, g in enumerate(gs):
                count += 1
                lhs = float(np.sum(np.abs(f * g)) * h)
                if lhs == 0:
                    continue
                ratio = lhs / (2 * nf[i] * ng[j])
                if ratio > worst:
                    worst, wit = ratio, {"phi": name, "f": i, "g": j}
    # equality witness: f = g = indicator, Φ = t^2
    grid = uniform_grid(1, 4.0, 2048)
    chi = indicator_ball(grid, 0.0, 1.0)
    p2 = Power(2)
    lhs = integrate_over_ball(chi, Ball((0.0,), 1.0))
    eq = lhs / (2 * luxemburg_norm(chi, p2).value * luxemburg_norm(chi, p2.conjugate()).value)
    ok = worst <= 1.0 + tol and eq >= 0.999
    return record("holder", ok, worst, 1.0 + tol, wit, count, equality_ratio=eq)


def l1_bound(trials=200, seed=1, tol=1e-9):
    """``‖f‖_{L_1(B)} <= 2|B| Φ^{-1}(|B|^{-1}) ‖f‖_{L_Φ(B)}`` on random fields and balls."""
    rng = np.random.default_rng(seed)
    kinds = builtin_kinds()
    names = sorted(kinds)
    grid = uniform_grid(1, 2.0, 256)
    worst, wit = 0.0, None
    for k in range(trials):
        name = names[k % len(names)]
        phi = kinds[name]
        vals = rng.normal(size=grid.shape) * 10.0 ** rng.uniform(-2, 2)
        f = SampledFunction(vals, grid.spacing, grid.origin)
        ball = Ball((float(rng.uniform(-1, 1)),), float(rng.uniform(0.05, 1.0)))
        meas = ball_measure(grid, ball)
        if meas == 0:
            continue
        l1 = integrate_over_ball(abs(f), ball)
        bound = 2 * meas * float(phi.inverse(1.0 / meas)) * luxemburg_norm(f, phi, ball).value
        ratio = l1 / bound if bound > 0 else (0.0 if l1 == 0 else math.inf)
        if ratio > worst:
            worst, wit = ratio, {"trial": k, "phi": name}
    return record("l1_bound", worst <= 1.0 + tol, worst, 1.0 + tol, wit, trials)


def weak_le_strong(trials=100, seed=2, tol=1e-9):
    rng = np.random.default_rng(seed)
    kinds = builtin_kinds()
    names = sorted(kinds)
    worst, wit = 0.0, None
    for k in range(trials):
        phi = kinds[names[k % len(names)]]
        vals = rng.normal(size=int(rng.integers(4, 64)))
        f = SampledFunction(vals, (float(rng.uniform(0.05, 1.0)),))
        w, s = weak_orlicz_norm(f, phi).value, luxemburg_norm(f, phi).value
        ratio = w / s if s > 0 else 0.0
        if ratio > worst:
            worst, wit = ratio, {"trial": k, "phi": names[k % len(names)]}
    return record("weak_le_strong", worst <= 1.0 + tol, worst, 1.0 + tol, wit, trials)


# ---------------------------------------------------------------------------
# BMO checks on the truncated logarithm


LOG_CENTERS = (-1.0, -0.5, 0.0, 0.5, 1.0)


def log_family(r_min=1.0 / 64, r_max=2.0, count=24, centers=LOG_CENTERS):
    return BallFamily(np.asarray(centers)[:, None], np.geomspace(r_min, r_max, count), {"kind": "log_drift"})


def bmo_log_drift(resolutions=(1024, 2048, 4096), half_width=4.0, drift_bound=0.10):
    """``|b_{B(x,r)} - b_{B(x,t)}| / (‖b‖_* ln(t/r))`` over nested pairs ``2r < t``, per resolution."""
    fam = log_family()
    r = fam.radii
    ii, jj = np.nonzero(2 * r[:, None] < r[None, :])
    per = []
    for N in resolutions:
        grid = uniform_grid(1, half_width, N)
        b = log_field(grid)
        avg = ball_averages(b, fam)
        star = bmo_norm(b, fam).value
        q = np.abs(avg[:, ii] - avg[:, jj]) / (star * np.log(r[jj] / r[ii])[None, :])
        per.append({"cells": N, "constant": float(np.max(q)), "bmo": star})
    drift = nm.relative_drift(per[-2]["constant"], per[-1]["constant"])
    ok = all(math.isfinite(p["constant"]) for p in per) and drift <= drift_bound
    return record("bmo_log_drift", ok, per[-1]["constant"], drift_bound, None, len(ii) * len(LOG_CENTERS),
                  drift=drift, per_resolution=per)


def log_average_check(cells=4096, half_width=4.0, radii=(0.125, 0.25, 0.5, 2.0), tol=0.01):
    """Discrete average of ``ln|x|`` over ``B(0, r)`` against ``ln r - 1``."""
    grid = uniform_grid(1, half_width, cells)
    b = log_field(grid)
    worst, wit = 0.0, None
    for r in radii:
        ball = Ball((0.0,), r)
        avg = integrate_over_ball(b, ball) / ball_measure(grid, ball)
        err = _rel(avg, math.log(r) - 1.0)
        if err > worst:
            worst, wit = err, {"r": r, "average": avg}
    return record("log_average", worst <= tol, worst, tol, wit, len(radii))


def bmo_orlicz_bracket(resolutions=(1024, 2048, 4096), half_width=4.0, phis=("power1.5", "power2", "power3"),
                       drift_bound=0.10):
    """Ratio of the Orlicz-flavoured oscillation functional to the BMO norm, across resolutions."""
    fam = log_family()
    kinds = builtin_kinds()
    rows = []
    for N in resolutions:
        grid = uniform_grid(1, half_width, N)
        b = log_field(grid)
        star = bmo_norm(b, fam).value
        for name in phis:
            val = bmo_orlicz_functional(b, kinds[name], fam).value
            rows.append({"cells": N, "phi": name, "ratio": val / star})
    drift = max(nm.relative_drift(a["ratio"], c["ratio"])
                for a, c in zip(rows[-2 * len(phis):-len(phis)], rows[-len(phis):]))
    ratios = [row["ratio"] for row in rows]
    ok = all(math.isfinite(x) and x > 0 for x in ratios) and drift <= drift_bound
    return record("bmo_orlicz_bracket", ok, [min(ratios), max(ratios)], drift_bound, None, len(rows),
                  drift=drift, rows=rows)


def zero_field_norms(phis=CHAR_PHIS):
    """All norms of the zero field vanish (vacuous pass)."""
    grid = uniform_grid(1, 1.0, 64)
    z = grid.zeros()
    kinds = builtin_kinds()
    vals = [luxemburg_norm(z, kinds[k]).value for k in phis] + [weak_orlicz_norm(z, kinds[k]).value for k in phis]
    fam = BallFamily(np.zeros((1, 1)), [0.5, 1.0])
    vals.append(bmo_norm(z, fam).value)
    return record("zero_field", all(v == 0 for v in vals), max(vals), 0.0, None, len(vals), vacuous=True)


def young_check(spec):
    """Build a Young function from a spec; a rejected construction is a failed check with the reason."""
    try:
        phi = from_spec(spec)
    except (ValueError, KeyError, TypeError) as exc:
        return None, record("construction", False, witness=str(exc))
    return phi, record("construction", True)
