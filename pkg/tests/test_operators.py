import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from orliczmorrey.field import Grid, indicator_ball, random_bumps, step_field, uniform_grid
from orliczmorrey.operators import (RadialWeight, RieszConfig, StepFunction, WeightSpec, commutator, commutator_at,
                                    commutator_fused, fractional_maximal, hardy, hardy_best_constant, hardy_report,
                                    hardy_star, maximal_domination_constant, offset_kernel, riesz_at, riesz_potential,
                                    singular_cell_weight, verify_hardy)

G = uniform_grid(1, 4.0, 4096)
CHI = indicator_ball(G, 0.0, 1.0)
ORACLE_0 = 4.0                      # 2 ∫_0^1 y^{-1/2} dy
ORACLE_2 = 2 * (math.sqrt(3) - 1)   # ∫_1^3 y^{-1/2} dy


def test_riesz_point_oracles():
    v0, v2 = riesz_at(CHI, 0.5, [0.0, 2.0])
    assert v0 == pytest.approx(ORACLE_0, rel=5e-3)
    assert v2 == pytest.approx(ORACLE_2, rel=5e-3)


def test_riesz_grid_oracles():
    out = riesz_potential(CHI, RieszConfig(0.5))
    x = G.axes()[0]
    i0 = np.searchsorted(x, 0.0)  # cell centre just right of 0
    assert out.values[i0] == pytest.approx(ORACLE_0, rel=5e-3)
    i2 = int(np.argmin(np.abs(x - 2.0)))
    exact = 2 * (math.sqrt(x[i2] + 1) - math.sqrt(x[i2] - 1))
    assert out.values[i2] == pytest.approx(exact, rel=5e-3)


def test_direct_and_convolution_agree():
    f = random_bumps(uniform_grid(1, 2.0, 512), seed=3, nonneg=False)
    a = riesz_potential(f, RieszConfig(0.3, "direct")).values
    b = riesz_potential(f, RieszConfig(0.3, "convolution")).values
    assert np.allclose(a, b, rtol=1e-10, atol=1e-12)


def test_direct_and_convolution_agree_2d():
    f = random_bumps(uniform_grid(2, 2.0, 48), seed=3)
    a = riesz_potential(f, RieszConfig(1.0, "direct")).values
    b = riesz_potential(f, RieszConfig(1.0, "convolution")).values
    assert np.allclose(a, b, rtol=1e-10, atol=1e-12)


def test_dilation_law():
    # I_α(f(·/s))(s x) = s^α I_α f(x): the discrete kernel scales exactly with the grid
    N = 1024
    fine = Grid((N,), 8.0 / N, -4.0)
    coarse = Grid((N,), 16.0 / N, -8.0)
    a = riesz_potential(indicator_ball(fine, 0.0, 1.0), RieszConfig(0.5)).values
    b = riesz_potential(indicator_ball(coarse, 0.0, 2.0), RieszConfig(0.5)).values
    assert np.allclose(b, 2**0.5 * a, rtol=1e-3)


def test_riesz_2d_disc_center():
    # ∫_{|y|<1} |y|^{α-2} dy = 2π/α
    g = uniform_grid(2, 1.5, 192)
    f = indicator_ball(g, 0.0, 1.0)
    v = riesz_at(f, 1.0, [0.0, 0.0])[0]
    assert v == pytest.approx(2 * math.pi, rel=0.01)


def test_singular_weights():
    assert singular_cell_weight(0.5, (0.01,)) == pytest.approx(2 * 0.005**0.5 / 0.5)
    K = offset_kernel(uniform_grid(1, 1.0, 4), 0.5)
    assert K.shape == (7,)
    assert K[3] == singular_cell_weight(0.5, (0.5,))


def test_riesz_config_errors():
    with pytest.raises(ValueError):
        RieszConfig(0.5, "fast")
    with pytest.raises(ValueError):
        riesz_potential(CHI, RieszConfig(1.0))
    with pytest.raises(ValueError):
        riesz_at(CHI, 1.5, [0.0])


def test_maximal_of_indicator():
    M = fractional_maximal(indicator_ball(uniform_grid(1, 4.0, 1024), 0.0, 1.0), 0.5)
    assert M.values.max() == pytest.approx(math.sqrt(2), rel=5e-3)


def test_maximal_alpha_zero_bounded_by_sup():
    f = random_bumps(uniform_grid(1, 2.0, 256), seed=1)
    assert fractional_maximal(f, 0.0).values.max() <= f.values.max() * (1 + 1e-12)


def test_maximal_domination_2d():
    g = uniform_grid(2, 2.0, 48)
    f = random_bumps(g, seed=2)
    M = fractional_maximal(f, 1.0)
    I = riesz_potential(f, RieszConfig(1.0))
    assert np.all(M.values <= maximal_domination_constant(2, 1.0) * I.values * 1.05)


def test_commutator_constant_b_is_zero():
    f = random_bumps(uniform_grid(1, 2.0, 256), seed=4)
    b = f.with_values(np.full(f.shape, 2.7))
    assert np.all(commutator(b, f, RieszConfig(0.5)).values == 0.0)


def test_commutator_step_oracle():
    # b = χ_{x>=0}, f = χ_{[-1,1]}: [b, I_{1/2}] f(1) = ∫_{-1}^{0} |1-y|^{-1/2} dy = 2(√2 - 1)
    g = uniform_grid(1, 4.0, 4096)
    v = commutator_at(step_field(g), indicator_ball(g, 0.0, 1.0), 0.5, [1.0], b_at=1.0)[0]
    assert v == pytest.approx(2 * (math.sqrt(2) - 1), rel=0.01)


def test_commutator_fused_matches():
    g = uniform_grid(1, 2.0, 256)
    f = random_bumps(g, seed=5)
    b = random_bumps(g, seed=6, nonneg=False)
    a = commutator(b, f, RieszConfig(0.5)).values
    c = commutator_fused(b, f, RieszConfig(0.5)).values
    assert np.allclose(a, c, rtol=1e-9, atol=1e-11)


def test_commutator_grid_mismatch():
    with pytest.raises(ValueError):
        commutator(G.zeros(), uniform_grid(1, 4.0, 512).zeros(), RieszConfig(0.5))


# --- Hardy -------------------------------------------------------------

PLAIN = WeightSpec(RadialWeight(-2.0), RadialWeight(0.0), RadialWeight(1.0))


def test_hardy_values():
    one = StepFunction.constant(1.0)
    assert hardy(one, RadialWeight(-2.0), 3.0).value == pytest.approx(1 / 3, rel=1e-9)
    assert hardy(one, RadialWeight(-2.0), 3.0, log_factor=True).value == pytest.approx(2 / 3, rel=1e-9)
    assert hardy_star(one, RadialWeight(-2.0), 3.0).value == pytest.approx(2 / 3, rel=1e-9)


def test_hardy_best_constant():
    B, det = hardy_best_constant(PLAIN)
    assert B == pytest.approx(1.0, abs=1e-6)
    assert det["tail_resolved"]
    B, _ = hardy_best_constant(WeightSpec(PLAIN.w, PLAIN.v1, PLAIN.v2, True))
    assert B == pytest.approx(2.0, abs=1e-6)


def test_hardy_zero_weight():
    B, _ = hardy_best_constant(WeightSpec(RadialWeight.from_spec({"kind": "zero"})))
    assert B == 0.0


def test_hardy_verify_sharp():
    v = verify_hardy(PLAIN)
    assert v.ok
    assert v.value >= 0.95 * v.details["B"]


def test_hardy_divergent_tail_inconclusive():
    rep = hardy_report(WeightSpec(RadialWeight(-0.5), RadialWeight(0.0), RadialWeight(1.0)))
    assert rep.status == "inconclusive"


def test_step_function_validation():
    with pytest.raises(ValueError):
        StepFunction([0.0, 1.0], [2.0, 1.0])
    with pytest.raises(ValueError):
        StepFunction([1.0, 0.5], [1.0, 2.0])
    g = StepFunction.indicator_after(2.0)
    assert list(g(np.array([1.0, 2.0, 2.5]))) == [0.0, 0.0, 1.0]


def test_weight_spec_round_trip():
    ws = WeightSpec(RadialWeight(-2.0, 3.0, 1.0), RadialWeight(0.5), RadialWeight(1.0), True)
    back = WeightSpec.from_dict(ws.to_dict())
    assert back.to_dict() == ws.to_dict()


# --- properties ---------------------------------------------------------

G_SMALL = uniform_grid(1, 2.0, 128)


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.floats(0.1, 0.9), st.floats(-3, 3))
def test_riesz_linear(s1, s2, alpha, c):
    f, g = random_bumps(G_SMALL, s1, nonneg=False), random_bumps(G_SMALL, s2, nonneg=False)
    cfg = RieszConfig(alpha)
    lhs = riesz_potential(f * c + g, cfg).values
    rhs = c * riesz_potential(f, cfg).values + riesz_potential(g, cfg).values
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


@given(st.integers(0, 10**6), st.floats(0.1, 0.9))
def test_riesz_positive(seed, alpha):
    f = random_bumps(G_SMALL, seed)
    assert np.all(riesz_potential(f, RieszConfig(alpha)).values >= 0)


@given(st.integers(0, 10**6), st.sampled_from([0.25, 0.5]))
def test_maximal_domination_1d(seed, alpha):
    f = random_bumps(G_SMALL, seed)
    M = fractional_maximal(f, alpha).values
    I = riesz_potential(f, RieszConfig(alpha)).values
    assert np.all(M <= maximal_domination_constant(1, alpha) * I * 1.05)


@given(st.integers(0, 10**6), st.floats(-4, 4))
def test_commutator_shift_invariant(seed, c):
    f = random_bumps(G_SMALL, seed)
    b = random_bumps(G_SMALL, seed + 1, nonneg=False)
    cfg = RieszConfig(0.5)
    a = commutator(b, f, cfg).values
    s = commutator(b.with_values(b.values + c), f, cfg).values
    assert np.allclose(a, s, rtol=1e-9, atol=1e-9)


@given(st.lists(st.floats(0.01, 100.0), min_size=1, max_size=4, unique=True),
       st.lists(st.floats(0.0, 5.0), min_size=4, max_size=4))
def test_hardy_inequality_for_steps(knots, incs):
    k = np.sort(knots)
    v = np.cumsum(incs[:len(k)])
    if v[-1] == 0:
        v[-1] = 1.0
    g = StepFunction(k, v)
    v_ = verify_hardy(PLAIN, g_family=[g], t_grid=np.geomspace(1e-2, 1e2, 21))
    assert v_.ok
