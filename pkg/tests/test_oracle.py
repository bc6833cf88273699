import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cograph.dynamics import CoupledState, System, integrate
from cograph.errors import InvalidInputError
from cograph.fields import AlphaProfile, BoundsLedger, OmegaSpec, constants_of
from cograph.graph import BaseMeasure
from cograph.interpolation import FluxInterpolation
from cograph.metrics import AtomSet1D, inf_bound_curve, sup_bound_curve, wasserstein_1d
from cograph.oracle import (
    BernoulliParams,
    bernoulli_closed_form,
    bruteforce_w2,
    bruteforce_wp,
    comparison_lemma_check,
    reference_integrate,
)

ONES2 = np.ones((2, 2)) - np.eye(2)


def two_vertex():
    return System(BaseMeasure.line(2), FluxInterpolation(), AlphaProfile("sigmoid", slope=4, center=1),
                  OmegaSpec.constant(1.0))


def test_reference_stationary():
    traj = reference_integrate(CoupledState(np.ones(2), ONES2), two_vertex(), 1e-2, 1.0)
    assert np.all(traj.r == 1.0) and np.all(traj.eta == ONES2)


def test_reference_richardson_reaches_rk4():
    sys_ = two_vertex()
    init = CoupledState(np.array([2.0, 0.0]), ONES2)
    rk = integrate(init, sys_, "rk4-coupled", 1e-3, 1.0).r[-1]
    plain = reference_integrate(init, sys_, 1e-3, 1.0, record_every=1.0).r[-1]
    extrap = reference_integrate(init, sys_, 1e-3, 1.0, record_every=1.0, levels=3).r[-1]
    # plain Euler is first order; three Richardson levels lift it past 1e-8
    assert np.abs(plain - rk).max() > 1e-5
    assert np.abs(extrap - rk).max() < 1e-8


def test_reference_validation():
    with pytest.raises(InvalidInputError):
        reference_integrate(CoupledState(np.ones(2), ONES2), two_vertex(), 0.0, 1.0)


def test_bruteforce_examples():
    assert bruteforce_w2(AtomSet1D.dirac(1.0), AtomSet1D.dirac(4.0)) == pytest.approx(3.0)
    a = AtomSet1D([0.0, 1.0], [0.5, 0.5])
    b = AtomSet1D([0.0, 2.0], [0.5, 0.5])
    assert bruteforce_w2(a, a) == 0
    assert bruteforce_w2(a, b) == pytest.approx(1 / math.sqrt(2), rel=1e-15)


def test_bruteforce_size_limit():
    five = AtomSet1D(np.arange(5.0), np.full(5, 0.2))
    with pytest.raises(InvalidInputError):
        bruteforce_w2(five, five)


def test_bruteforce_full_enumeration_agrees_with_permutations():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a = AtomSet1D(rng.normal(size=3), rng.dirichlet(np.ones(3)))
        b = AtomSet1D(rng.normal(size=3), rng.dirichlet(np.ones(3)))
        full = bruteforce_wp(a, b, 2, full_enumeration=True)
        perm = bruteforce_wp(a, b, 2, full_enumeration=False)
        assert full == pytest.approx(perm, abs=1e-12)
        assert full == pytest.approx(wasserstein_1d(2, a, b), abs=1e-10)


def test_bernoulli_examples():
    t = np.linspace(0, 10, 21)
    np.testing.assert_allclose(bernoulli_closed_form(BernoulliParams(2.0, 4.0, 0.5), t), 0.5, rtol=1e-14)
    np.testing.assert_allclose(bernoulli_closed_form(BernoulliParams(1.0, 1.0, 2.0), t),
                               2 * np.exp(t) / (2 * np.exp(t) - 1), rtol=1e-14)
    assert np.all(bernoulli_closed_form(BernoulliParams(1.0, 1.0, 0.0), t) == 0)
    assert bernoulli_closed_form(BernoulliParams(3.0, 1.5, 0.1), [30.0])[0] == pytest.approx(2.0)


def test_bernoulli_matches_sup_curve_with_unit_ledger():
    unit = BoundsLedger(L_Phi=1.0, C_V=1.0, C_V_L2=1.0, L_V=1.0, C_omega=1.0, L_omega=0.0,
                        omega_star=1.0, eta_star=1.0, alpha_prime_star=1.0, M=1.0, norm_r0_inf=2.0,
                        norm_r0_L2=1.0, norm_eta0_inf=1.0, eta0_min=1.0, r0_min=0.0, mu_K=1.0)
    t = np.linspace(0, 5, 11)
    np.testing.assert_allclose(sup_bound_curve(unit, t),
                               bernoulli_closed_form(BernoulliParams(1.0, 1.0, 2.0), t), rtol=1e-13)


@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.0, 5))
def test_bernoulli_solves_ode(a, b, y0):
    t = np.array([0.3, 0.7])
    h = 1e-6
    p = BernoulliParams(a, b, y0)
    y = bernoulli_closed_form(p, t)
    dy = (bernoulli_closed_form(p, t + h) - bernoulli_closed_form(p, t - h)) / (2 * h)
    np.testing.assert_allclose(dy, a * y - b * y * y, atol=1e-5 * max(1.0, y0 ** 2 * b))


def test_comparison_equal_functions():
    t = np.linspace(0, 3, 6001)
    g = bernoulli_closed_form(BernoulliParams(1.0, 1.0, 2.0), t)
    rep = comparison_lemma_check(g, g, t, phi=lambda y: y - y * y)
    assert rep.passed and rep["comparison"].worst == 0
    assert rep["g_solves_equality"].passed


def test_comparison_reports_first_violation():
    t = np.linspace(0, 1, 11)
    f = np.where(t > 0.45, 2.0, 0.0)
    rep = comparison_lemma_check(f, np.ones_like(t), t)
    assert not rep.passed and rep["comparison"].witness == pytest.approx(0.5)
    assert comparison_lemma_check(np.zeros(11), np.ones(11), t, direction="lower")["comparison"].witness == 0.0


def test_comparison_with_run_envelopes():
    sys_ = two_vertex()
    alpha = sys_.velocity.with_box(0.0, 2.0)
    sys_ = System(sys_.mu, sys_.flux, alpha, sys_.omega)
    init = CoupledState(np.array([2.0, 0.0]), ONES2)
    traj = integrate(init, sys_, dt=1e-2, t_end=10)
    led = constants_of(sys_.flux, alpha, sys_.omega, ONES2, init.r, sys_.mu)
    up = comparison_lemma_check(traj.diagnostics["r_max"], sup_bound_curve(led, traj.times), traj.times)
    low = comparison_lemma_check(traj.diagnostics["r_min"], inf_bound_curve(led, 0.0, traj.times),
                                 traj.times, direction="lower")
    assert up.passed and low.passed
