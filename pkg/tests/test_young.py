import math
import warnings

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from orliczmorrey.young import (ConstructionError, ExpMinusLinear, IndicatorLinf, LogType, PiecewiseLinear, Power,
                                builtin_kinds, check_young, cianchi_construct, cianchi_psi_p, delta2_test,
                                dominates_globally, from_spec, indices_verdict, nabla2_test, sobolev_conjugate,
                                type_indices)

R = np.geomspace(1e-4, 1e4, 81)


# frozen oracles: sympy closed forms, evaluated once
def _power_conjugate_oracle(p, s):
    r, S = sp.symbols("r s", positive=True)
    expr = r * S - r**p
    crit = sp.solve(sp.diff(expr, r), r)[0]
    return float(sp.simplify(expr.subs(r, crit)).subs(S, s))


def test_power_conjugate_matches_legendre_closed_form():
    for p, s in [(sp.Rational(3), 1.0), (sp.Rational(3, 2), 2.0), (sp.Rational(2), 0.3)]:
        got = Power(float(p)).conjugate().eval(s)
        assert got == pytest.approx(_power_conjugate_oracle(p, s), rel=1e-9)


def test_power_three_conjugate_frozen():
    # 2 (1/3)^{3/2}
    assert Power(3).conjugate().eval(1.0) == pytest.approx(0.38490017945975052, rel=1e-10)


def test_exp_minus_linear_conjugate_is_log_type():
    got = ExpMinusLinear().conjugate().eval(R[20:70])
    assert np.allclose(got, LogType().eval(R[20:70]), rtol=1e-8)


def test_indicator_conjugate_is_identity():
    assert IndicatorLinf().conjugate() == Power(1.0)
    assert Power(1.0).conjugate() == IndicatorLinf()
    assert IndicatorLinf(2.0).conjugate().eval(3.0) == 6.0


def test_generalized_inverse_of_indicator_and_power():
    phi = IndicatorLinf()
    assert phi.inverse(0.0) == pytest.approx(1.0)
    assert phi.inverse(5.0) == pytest.approx(1.0)
    assert Power(2).inverse(9.0) == pytest.approx(3.0, rel=1e-9)
    assert Power(2).inverse(0.0) == 0.0


def test_piecewise_linear_exact_conjugate():
    phi = PiecewiseLinear([[1, 1], [2, 3]])
    s = np.array([0.5, 1.0, 1.5, 2.0])
    r = np.linspace(0, 100, 200001)
    numeric = np.array([np.max(x * r - phi.eval(r)) for x in s])
    assert np.allclose(phi.conjugate().eval(s), numeric, atol=1e-6)
    # slopes beyond the tail slope make the supremum infinite
    assert phi.conjugate().eval(3.0) == math.inf


def test_non_convex_table_rejected():
    with pytest.raises(ValueError, match="convex"):
        PiecewiseLinear([[1, 2], [2, 3]])
    with pytest.raises(ValueError):
        from_spec({"kind": "piecewise_linear_convex", "knots": [[1, 2], [2, 3]]})


def test_power_below_one_rejected():
    with pytest.raises(ValueError):
        Power(0.5)


@pytest.mark.parametrize("text,expected", [("power:2", Power(2)), ("exp_minus_linear", ExpMinusLinear()),
                                           ('{"kind": "power", "p": 3}', Power(3))])
def test_spec_dsl(text, expected):
    assert from_spec(text) == expected


@pytest.mark.parametrize("bad", ["power", "cube:3", {"p": 2}, {"kind": "nope"}, {"kind": "power"}])
def test_spec_dsl_errors(bad):
    with pytest.raises(ValueError):
        from_spec(bad)


@pytest.mark.parametrize("name", sorted(builtin_kinds()))
def test_spec_round_trip(name):
    phi = builtin_kinds()[name]
    assert from_spec(phi.to_spec()) == phi


@pytest.mark.parametrize("name", sorted(builtin_kinds()))
def test_builtins_are_young(name):
    assert check_young(builtin_kinds()[name]) == []


def test_delta2_and_nabla2_verdicts():
    assert delta2_test(Power(2)).ok
    assert delta2_test(Power(2)).value == pytest.approx(4.0)
    assert delta2_test(IndicatorLinf()).status == "fails"
    assert delta2_test(ExpMinusLinear()).status == "fails"
    assert nabla2_test(Power(2)).ok
    assert nabla2_test(Power(1)).status == "fails"
    assert nabla2_test(LogType(), (1e-3, 1e3, 121)).status == "fails"


def test_type_indices_of_power():
    ti = type_indices(Power(2.5))
    assert ti.a_phi == pytest.approx(2.5, abs=1e-6)
    assert ti.b_phi == pytest.approx(2.5, abs=1e-6)
    assert indices_verdict(Power(2.5)).ok
    assert indices_verdict(Power(1.0)).status == "fails"


def test_type_indices_excluded_samples_warn():
    with pytest.warns(RuntimeWarning):
        ti = type_indices(IndicatorLinf(), (0.1, 10, 21))
    assert ti.excluded > 0


def test_cianchi_construction_against_sympy():
    # Phi = t^{3/2}, p = 2: the conjugate is 4 t^3 / 27, A(s) = 4 s / 27, result 243/32 s^6
    t, s, r = sp.symbols("t s r", positive=True)
    conj = sp.Rational(4, 27) * t**3
    A = sp.integrate(conj / t**3, (t, 0, s))
    Ainv = sp.solve(sp.Eq(A, r), s)[0]
    closed = sp.integrate(r * Ainv.subs(r, r**2) ** 2, (r, 0, s))
    assert sp.simplify(closed - sp.Rational(243, 32) * s**6) == 0
    _, phi_p = cianchi_construct(Power(1.5), 2.0)
    x = np.geomspace(1e-2, 1e2, 9)
    assert np.allclose(phi_p.eval(x), 243 / 32 * x**6, rtol=5e-3)


def test_cianchi_borderline_and_divergent_rejected():
    with pytest.raises(ConstructionError) as exc:
        cianchi_construct(Power(2), 2.0)
    assert exc.value.verdict == "borderline"
    with pytest.raises(ConstructionError) as exc:
        cianchi_construct(Power(3), 2.0)
    assert exc.value.verdict == "divergent"
    with pytest.raises(ValueError):
        cianchi_construct(Power(2), 1.0)


def test_cianchi_psi_power():
    # Psi = t^4, p = 2: B(s) = s^2/2, the complementary function of Psi_p is s^4/2,
    # so Psi_p(r) = (3/4) r (r/2)^{1/3}
    psi_p = cianchi_psi_p(Power(4), 2.0)
    x = np.geomspace(0.1, 10, 5)
    assert np.allclose(psi_p.eval(x), 0.75 * x * (x / 2) ** (1 / 3), rtol=5e-3)


def test_sobolev_conjugate_inverse_exact():
    psi = sobolev_conjugate(Power(2), 0.25, 1)
    t = np.geomspace(1e-3, 1e3, 7)
    assert np.allclose(psi.inverse(t), t ** 0.5 * t ** -0.25, rtol=1e-9)
    # and Psi is the power q = 1/(1/2 - 1/4) = 4
    assert np.allclose(psi.eval(t), t**4, rtol=1e-6)
    with pytest.raises(ValueError):
        sobolev_conjugate(Power(2), 1.5, 1)


def test_global_domination():
    v = dominates_globally(Power(2, 4.0), Power(2))
    assert v.status == "dominated"
    assert v.value == pytest.approx(0.5, rel=0.03)
    assert dominates_globally(Power(2), Power(3)).status == "not_dominated"


# --- properties ---------------------------------------------------------


@given(st.floats(1.0, 6.0), st.floats(1e-5, 1e5))
def test_inverse_is_right_inverse_for_powers(p, s):
    phi = Power(p)
    assert phi.eval(phi.inverse(s)) == pytest.approx(s, rel=1e-8)


@given(st.sampled_from(sorted(builtin_kinds())), st.floats(-6, 6))
def test_sandwich_inequality(name, lr):
    phi = builtin_kinds()[name]
    r = 10.0**lr
    prod = phi.inverse(r) * phi.conjugate().inverse(r)
    assert r * (1 - 1e-6) <= prod <= 2 * r * (1 + 1e-6)


@given(st.sampled_from(sorted(builtin_kinds())), st.floats(1e-3, 1e2), st.floats(1e-3, 1e2))
def test_young_inequality(name, a, b):
    phi = builtin_kinds()[name]
    lhs = a * b
    rhs = phi.eval(a) + phi.conjugate().eval(b)
    assert lhs <= rhs * (1 + 1e-7) + 1e-12


@given(st.floats(1.05, 5.0), st.floats(1e-3, 1e3))
def test_conjugate_involution_on_powers(p, s):
    phi = Power(p)
    twice = phi.conjugate().conjugate().eval(s)
    assert twice == pytest.approx(phi.eval(s), rel=1e-5)


@given(st.sampled_from(sorted(builtin_kinds())))
def test_inverse_monotone(name):
    phi = builtin_kinds()[name]
    inv = phi.inverse(R)
    assert np.all(np.diff(inv) >= -1e-12 * inv[1:])
