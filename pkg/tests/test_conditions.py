import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from orliczmorrey.conditions import (cianchi_conditions, integrability_near_zero, inverse_ratio_bound, power_model,
                                     sobolev_q, spanne_exponent_check, zygmund_condition)
from orliczmorrey.norms import PowerWeight
from orliczmorrey.young import IndicatorLinf, Power


def _zygmund_oracle(p, q, lam, mu, n, log_factor):
    """Closed-form LHS/φ₂ for the power model, by sympy."""
    u = sp.symbols("u", positive=True)
    # φ₁(s)/Φ^{-1}(s^{-n}) = s^{λ/p} is nondecreasing, so the ess inf over (t, ∞) is t^{λ/p};
    # with t = r u the r-dependence is r^{λ/p - n/q}, which equals φ₂(r) when λ/p = μ/q
    assert sp.simplify(lam / p - n / q - (mu - n) / q) == 0
    integrand = u ** (lam / p - sp.Rational(n) / q - 1)
    if log_factor:
        integrand = integrand * (1 + sp.log(u))
    return float(sp.integrate(integrand, (u, 1, sp.oo)))


SPANNE = (sp.Integer(2), sp.Integer(4), sp.Rational(2, 5), sp.Rational(4, 5), 1)


def test_zygmund_spanne_constant_matches_sympy():
    p, q, lam, mu, n = SPANNE
    for log_factor, frozen in ((False, 20.0), (True, 420.0)):
        exact = _zygmund_oracle(p, q, lam, mu, n, log_factor)
        assert exact == pytest.approx(frozen, rel=1e-12)
        rep = zygmund_condition(*power_model(2, 4, 0.4, 0.8, 1), 1, log_factor=log_factor)
        assert rep.ok
        assert rep.constant == pytest.approx(exact, rel=1e-6)


def test_zygmund_fails_on_mismatch_and_divergence():
    rep = zygmund_condition(*power_model(2, 4, 0.4, 0.6, 1), 1)
    assert rep.status == "fails" and rep.witness is not None
    rep = zygmund_condition(*power_model(2, 4, 0.8, 1.6, 1), 1)
    assert rep.status == "fails"
    assert rep.reason.startswith("outer integral diverges")


def test_zygmund_borderline_inconclusive():
    # λ/p = n/q exactly: the outer integrand decays like 1/t
    rep = zygmund_condition(Power(2), Power(4), PowerWeight(-0.25), PowerWeight(0.0), 1)
    assert rep.status == "inconclusive"


def test_integrability_examples():
    assert integrability_near_zero(Power(3), 2).ok
    assert integrability_near_zero(Power(2), 2).ok
    assert integrability_near_zero(Power(2), 3).status == "inconclusive"
    assert integrability_near_zero(IndicatorLinf(), 3).status == "fails"
    assert integrability_near_zero(Power(4), 3, use_conjugate=False).ok


def test_integrability_constant():
    # conjugate of t^2 is t^2/4; ∫_0^1 t^2/4 t^{-2} dt = 1/4
    assert integrability_near_zero(Power(2), 2).constant == pytest.approx(0.25, rel=1e-6)


def test_sobolev_q():
    assert sobolev_q(0.5, 1) == pytest.approx(3.0)
    assert sobolev_q(1.0, 2) == pytest.approx(3.0)


@pytest.mark.parametrize("p,alpha,n", [(2.0, 0.25, 1), (1.5, 0.2, 1), (3.0, 0.5, 2)])
def test_cianchi_power_pairs_hold(p, alpha, n):
    q = 1 / (1 / p - alpha / n)
    weak, strong = cianchi_conditions(Power(p), Power(q), alpha, n)
    assert weak.ok and strong.ok


def test_cianchi_p_one_dichotomy():
    alpha, n = 0.25, 1
    q = 1 / (1 - alpha / n)
    weak, strong = cianchi_conditions(Power(1.0), Power(q), alpha, n)
    assert weak.ok
    assert strong.status != "holds"
    assert [pt.status for pt in strong.parts][-1] != "holds"


def test_cianchi_rejects_bad_alpha():
    with pytest.raises(ValueError):
        cianchi_conditions(Power(2), Power(4), 1.0, 1)


def test_inverse_ratio_bound_power():
    # Φ = t^2, Ψ = t^4, p = 4: Φ^{-1}(r) / (r^{1/4} Ψ^{-1}(r)) = 1
    sup, drift = inverse_ratio_bound(Power(2), Power(4), 4.0)
    assert sup == pytest.approx(1.0, rel=1e-8)
    assert drift < 1e-8


def test_spanne_examples():
    assert spanne_exponent_check(2, 4, 0.4, 0.8, 0.25, 1).ok
    v = spanne_exponent_check(2, 4, 0.4, 0.6, 0.25, 1)
    assert v.status == "fails" and "lambda_over_p_equals_mu_over_q" in v.witness
    assert spanne_exponent_check(2, 2, 0.4, 0.4, 0.0, 1).status == "inconclusive"
    assert spanne_exponent_check(2, 4, 0.6, 1.2, 0.25, 1).status == "fails"


# --- properties ---------------------------------------------------------


@given(st.floats(0.1, 0.7), st.floats(0.1, 0.95))
def test_zygmund_agrees_with_spanne_on_sobolev_tuples(alpha, frac):
    n = 1
    p = 1.1 + frac * (n / alpha - 1.1) * 0.9
    q = 1 / (1 / p - alpha / n)
    k_max = n / q
    lam = frac * n
    k = k_max - lam / p
    if abs(k) < 0.08:
        return
    mu = q * lam / p
    z = zygmund_condition(*power_model(p, q, lam, mu, n), n)
    s = spanne_exponent_check(p, q, lam, mu, alpha, n)
    assert z.ok == s.ok


@given(st.floats(1.1, 3.0), st.floats(0.05, 0.5))
def test_zygmund_constant_power_formula(p, k):
    # φ₁/Φ^{-1} = s^{λ/p} and the integrand is t^{-1-k}: the constant is 1/k
    n, q = 1, 4.0
    lam = p * (n / q - k)
    if lam < 0:
        return
    mu = q * lam / p
    rep = zygmund_condition(*power_model(p, q, lam, mu, n), n)
    assert rep.ok
    assert rep.constant == pytest.approx(1 / k, rel=1e-5)
