"""Checkers for the sufficient conditions behind the boundedness results:
integrability near zero, the Cianchi domination conditions, the Zygmund-type
integral condition on a weight pair and its power-law (Spanne) specialization.

Every verdict is range-qualified; nothing here is a proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _numerics as nm
from .norms import PowerWeight, weight_from_spec
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict, combine, jsonable
from .young import (ConstructionError, Power, cianchi_phi_p, cianchi_psi_p,
                    dominates_globally, from_spec)

INF = math.inf
ESS_NOTE = "ess inf/sup over sampled data is a suffix minimum/maximum on a log grid"


@dataclass
class ConditionReport:
    condition: str
    status: str
    constant: float | None = None
    witness: object = None
    sample_range: object = None
    drift: float | None = None
    reason: str = ""
    parts: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status == HOLDS

    @property
    def exit_code(self):
        return Verdict(self.status).exit_code

    def to_dict(self):
        return jsonable({
            "condition": self.condition,
            "status": self.status,
            "constant": self.constant,
            "witness": self.witness,
            "sample_range": self.sample_range,
            "drift": self.drift,
            "reason": self.reason,
            "parts": [p.to_dict() for p in self.parts],
            "details": self.details,
        })


def _part(name, v):
    """Wrap a plain Verdict so it carries the name of the sub-condition."""
    return ConditionReport(name, HOLDS if v.status in (HOLDS, "dominated") else
                           FAILS if v.status in (FAILS, "not_dominated") else INCONCLUSIVE,
                           constant=v.value, witness=v.witness, sample_range=v.sample_range,
                           reason=v.reason, details=dict(v.details))


# ---------------------------------------------------------------------------
# Integrability near zero


NEAR_ZERO_GRID = nm.decade_grid(-12, 0, 200)
FIT_DECADES = 2


def integrability_near_zero(phi, q, use_conjugate=True, name=None) -> ConditionReport:
    """Is ``∫_0^1 F(t) t^{-q} dt`` finite, with ``F`` the complementary function of ``phi``
    (default) or ``phi`` itself?  Classified by a power-law fit over the first decades."""
    phi = from_spec(phi)
    F = phi.conjugate() if use_conjugate else phi
    label = name or ("integral of the complementary function" if use_conjugate else "integral of the function")
    t = NEAR_ZERO_GRID
    with np.errstate(over="ignore", invalid="ignore"):
        g = F.eval(t) * t ** (-float(q))
    g = np.where(np.isnan(g), INF, g)
    rng = (float(t[0]), 1.0, int(t.size))
    m = FIT_DECADES * 200 + 1
    if np.any(np.isinf(g[:m])):
        return ConditionReport(label, FAILS, witness=float(t[0]), sample_range=rng,
                               reason="integrand infinite near 0")
    if not np.any(g[:m] > 0):
        # vanishes near zero: nothing to diverge there
        val = float(nm.cumulative_powerlaw(t, g)[-1])
        status = HOLDS if math.isfinite(val) else FAILS
        return ConditionReport(label, status, constant=val, sample_range=rng,
                               reason="" if status == HOLDS else "integrand infinite inside (0, 1]",
                               details={"exponent": None, "q": float(q)})
    e1 = nm.loglog_slope(t[:201], g[:201])
    e2 = nm.loglog_slope(t[200:m], g[200:m])
    e = nm.loglog_slope(t[:m], g[:m])
    details = {"exponent": e, "q": float(q), "fit_decades": FIT_DECADES}
    if not (math.isfinite(e1) and math.isfinite(e2)) or abs(e1 - e2) > 0.1:
        return ConditionReport(label, INCONCLUSIVE, sample_range=rng,
                               reason="oscillating local power-law fit", details=details)
    cls = nm.classify_exponent(e, -1.0)
    if cls == "divergent":
        return ConditionReport(label, FAILS, witness=float(t[0]), sample_range=rng,
                               reason=f"integrand behaves like t^{e:.4f} near 0", details=details)
    if cls == "borderline":
        return ConditionReport(label, INCONCLUSIVE, sample_range=rng,
                               reason=f"integrand behaves like t^{e:.4f} near 0 (borderline)", details=details)
    head = g[0] * t[0] / (e + 1.0) if g[0] > 0 else 0.0
    val = float(head + nm.cumulative_powerlaw(t, g)[-1])
    if not math.isfinite(val):
        return ConditionReport(label, FAILS, sample_range=rng, reason="integrand infinite inside (0, 1]",
                               details=details)
    return ConditionReport(label, HOLDS, constant=val, sample_range=rng, details=details)


def sobolev_q(alpha, n):
    """The exponent ``1 + n/(n - α)`` of the integrability conditions."""
    return 1.0 + n / (n - alpha)


# ---------------------------------------------------------------------------
# Cianchi conditions


def _construct(name, build):
    try:
        return build(), None
    except ConstructionError as exc:
        status = INCONCLUSIVE if exc.verdict == "borderline" else FAILS
        return None, ConditionReport(name, status, reason=str(exc))


def cianchi_conditions(phi, psi, alpha, n, s_grid=None):
    """Return ``(weak, strong)`` reports for the pair ``(phi, psi)`` and ``0 < α < n``.

    weak:   complementary-function integrability, and Φ_{n/α} dominates Ψ globally.
    strong: both integrabilities, Φ dominates Ψ_{n/α}, and Φ_{n/α} dominates Ψ.
    """
    phi, psi = from_spec(phi), from_spec(psi)
    if not (0 < alpha < n):
        raise ValueError(f"alpha must lie in (0, n); got alpha={alpha}, n={n}")
    p = n / alpha
    q = sobolev_q(alpha, n)
    i_phi = integrability_near_zero(phi, q, True, "complementary-function integrability")
    i_psi = integrability_near_zero(psi, q, False, "Psi integrability")

    weak_parts = [i_phi]
    if i_phi.status == HOLDS:
        phi_p, err = _construct("Phi_{n/alpha} construction", lambda: cianchi_phi_p(phi, p))
        if err is not None:
            weak_parts.append(err)
        else:
            weak_parts.append(_part("Phi_{n/alpha} dominates Psi",
                                    dominates_globally(phi_p, psi, s_grid=s_grid)))
    strong_parts = list(weak_parts) + [i_psi]
    if i_psi.status == HOLDS:
        psi_p, err = _construct("Psi_{n/alpha} construction", lambda: cianchi_psi_p(psi, p))
        if err is not None:
            strong_parts.append(err)
        else:
            strong_parts.append(_part("Phi dominates Psi_{n/alpha}",
                                      dominates_globally(phi, psi_p, s_grid=s_grid)))
    meta = {"alpha": float(alpha), "n": int(n), "p": p, "q_exponent": q,
            "phi": phi.to_spec(), "psi": psi.to_spec()}
    out = []
    for name, parts in (("weak", weak_parts), ("strong", strong_parts)):
        status = combine(parts)
        # a missing sub-check (skipped after a failure) never upgrades the verdict
        reason = "; ".join(f"{p.condition}: {p.reason or p.status}" for p in parts if p.status != HOLDS)
        out.append(ConditionReport(f"cianchi_{name}", status, parts=parts, reason=reason, details=meta))
    return tuple(out)


def inverse_ratio_bound(phi, psi, p, decades=(-6, 6), per_decade=(10, 20)):
    """``sup_r Φ^{-1}(r) / (r^{1/p} Ψ^{-1}(r))`` at two sampling densities and their drift."""
    phi, psi = from_spec(phi), from_spec(psi)
    sups = []
    for pd in per_decade:
        r = nm.decade_grid(decades[0], decades[1], pd)
        q = phi.inverse(r) / (r ** (1.0 / p) * psi.inverse(r))
        sups.append(float(np.max(q)))
    drift = nm.relative_drift(sups[-2], sups[-1])
    return sups[-1], drift


# ---------------------------------------------------------------------------
# Zygmund-type condition


T_FACTOR = 1e4
S_PER_DECADE = 64


def default_r_sample():
    return nm.decade_grid(-2, 2, 4)


def _extend(r, decades):
    lo, hi = math.log10(r[0]) - decades, math.log10(r[-1]) + decades
    pd = max(1, int(round((r.size - 1) / max(math.log10(r[-1] / r[0]), 1e-12))))
    return nm.decade_grid(int(math.floor(lo)), int(math.ceil(hi)), pd)


def _zygmund_ratios(phi, psi, w1, w2, n, log_factor, xs, rs):
    """``LHS(x, r) / φ₂(x, r)`` for every sampled pair; also the tail status of each LHS."""
    s = nm.decade_grid(int(math.floor(math.log10(rs[0]))) - 1,
                       int(math.ceil(math.log10(rs[-1] * T_FACTOR))) + 1, S_PER_DECADE)
    ratios = np.empty((len(xs), len(rs)))
    tails = []
    for i, x in enumerate(xs):
        xa = np.asarray(x, dtype=float)

        def inner(v):
            with np.errstate(divide="ignore", invalid="ignore"):
                return w1.eval(xa, v) / phi.inverse(np.asarray(v, dtype=float) ** (-n))

        E_grid = nm.suffix_min(inner(s))

        def E(t):
            # inf over (t, ∞): the value at t itself against the suffix min from the next grid point
            k = np.minimum(np.searchsorted(s, t, side="right"), s.size - 1)
            return np.minimum(inner(t), E_grid[k])

        def G(t):
            with np.errstate(invalid="ignore"):
                g = E(t) * psi.inverse(np.asarray(t, dtype=float) ** (-n)) / t
            return np.where(np.isnan(g), 0.0, g)

        for j, r in enumerate(rs):
            r = float(r)
            T = T_FACTOR * r
            t, wq = nm.log_gauss_rule(r, T, max_width=0.05)
            lf = (1.0 + np.log(t / r)) if log_factor else 1.0
            body = float(np.sum(G(t) * lf * wq))
            tt = np.geomspace(T / 10.0, T, 9)
            gt = G(tt)
            e = nm.loglog_slope(tt, gt)
            cls = "convergent" if np.all(gt == 0) else nm.classify_exponent(e, -1.0, at_zero=False)
            if cls == "convergent":
                tail = 0.0 if np.all(gt == 0) else nm.power_tail(float(gt[-1]) / T**e, e, T,
                                                                  log_origin=r if log_factor else None)
                lhs = body + tail
            else:
                lhs = INF
            tails.append(cls)
            phi2 = float(w2.eval(xa, r))
            ratios[i, j] = lhs / phi2 if phi2 > 0 else INF
    return ratios, tails


def zygmund_condition(phi, psi, w1, w2, n, log_factor=False, xs=None, rs=None,
                      extend_decades=2, drift_bound=0.10) -> ConditionReport:
    """``∫_r^∞ (1+ln t/r)^{[log]} ess inf_{t<s<∞} φ₁(x,s)/Φ^{-1}(s^{-n}) Ψ^{-1}(t^{-n}) dt/t <= C φ₂(x,r)``.

    Ĉ is the maximum of LHS/φ₂ over the sample; the drift compares it with the
    maximum over the r-sample widened by ``extend_decades`` on both sides, so a
    ratio that keeps growing toward small or large r is reported as failing.
    """
    phi, psi = from_spec(phi), from_spec(psi)
    w1, w2 = weight_from_spec(w1), weight_from_spec(w2)
    xs = [np.zeros(n)] if xs is None else [np.atleast_1d(np.asarray(x, dtype=float)) for x in xs]
    rs = default_r_sample() if rs is None else np.sort(np.asarray(rs, dtype=float))
    name = "zygmund_log" if log_factor else "zygmund"
    rng = {"r": [float(rs[0]), float(rs[-1]), int(rs.size)], "x": [x.tolist() for x in xs],
           "T_max": f"{T_FACTOR:g}*r", "ess": ESS_NOTE}
    ratios, tails = _zygmund_ratios(phi, psi, w1, w2, n, log_factor, xs, rs)
    details = {"phi": phi.to_spec(), "psi": psi.to_spec(), "w1": w1.to_spec(), "w2": w2.to_spec(),
               "n": n, "log_factor": bool(log_factor)}
    if "divergent" in tails:
        k = int(np.argmax(~np.isfinite(ratios.ravel())))
        i, j = divmod(k, len(rs))
        return ConditionReport(name, FAILS, constant=INF, witness={"x": xs[i].tolist(), "r": float(rs[j])},
                               sample_range=rng, reason="outer integral diverges at infinity", details=details)
    if "borderline" in tails:
        return ConditionReport(name, INCONCLUSIVE, sample_range=rng,
                               reason="outer integrand decays like 1/t (tail unresolved)", details=details)
    C = float(np.max(ratios))
    rs_ext = _extend(rs, extend_decades)
    ext, ext_tails = _zygmund_ratios(phi, psi, w1, w2, n, log_factor, xs, rs_ext)
    C_ext = float(np.max(ext)) if "divergent" not in ext_tails else INF
    drift = nm.relative_drift(C, C_ext)
    k = int(np.argmax(ext))
    i, j = divmod(k, len(rs_ext))
    details.update({"constant_extended": C_ext, "r_extended": [float(rs_ext[0]), float(rs_ext[-1])]})
    if not math.isfinite(C_ext) or drift > drift_bound:
        return ConditionReport(name, FAILS, constant=C, witness={"x": xs[i].tolist(), "r": float(rs_ext[j])},
                               sample_range=rng, drift=drift,
                               reason="ratio keeps growing as the r-range widens", details=details)
    return ConditionReport(name, HOLDS, constant=C, sample_range=rng, drift=drift, details=details)


def power_model(p, q, lam, mu, n):
    """``(Φ, Ψ, φ₁, φ₂) = (t^p, t^q, r^{(λ-n)/p}, r^{(μ-n)/q})``."""
    return Power(p), Power(q), PowerWeight((lam - n) / p), PowerWeight((mu - n) / q)


# ---------------------------------------------------------------------------
# Spanne relations


def spanne_exponent_check(p, q, lam, mu, alpha, n, tol=1e-9) -> Verdict:
    """The power-law relations ``1/p - 1/q = α/n``, ``λ/p = μ/q``, ``0 <= λ < n - αp``, ``1 <= p < n/α``."""
    params = {"p": p, "q": q, "lambda": lam, "mu": mu, "alpha": alpha, "n": n}
    if min(p, q) <= 0 or n <= 0 or alpha < 0 or lam < 0 or mu < 0:
        return Verdict(FAILS, reason="parameters must be positive", details=params)
    if alpha == 0:
        return Verdict(INCONCLUSIVE, reason="degenerate: alpha = 0 requires p = q",
                       details={**params, "p_equals_q": abs(p - q) <= tol})
    checks = {
        "sobolev": abs(1.0 / p - 1.0 / q - alpha / n) <= tol,
        "lambda_over_p_equals_mu_over_q": abs(lam / p - mu / q) <= tol,
        "lambda_below_n_minus_alpha_p": lam < n - alpha * p - tol,
        "p_range": 1.0 <= p < n / alpha,
    }
    bad = [k for k, v in checks.items() if not v]
    return Verdict(FAILS if bad else HOLDS, witness=bad or None,
                   reason="" if not bad else "violated: " + ", ".join(bad), details={**params, **checks})
