import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cograph.dynamics import CoupledState, System, integrate
from cograph.errors import ContractViolation, InvalidInputError
from cograph.fields import BoundsLedger, OmegaSpec, StaticVelocity
from cograph.graph import BaseMeasure
from cograph.graph_ce import AtomicDisintegration, advect
from cograph.interpolation import FluxInterpolation
from cograph.metrics import (
    AtomSet1D,
    contraction_dissipation,
    diameter,
    dmu_sup,
    inf_bound_curve,
    l2mu_d2,
    sup_bound_curve,
    wasserstein_1d,
)
from cograph.oracle import bruteforce_wp


def ledger(**kw):
    base = dict(L_Phi=1.0, C_V=1.0, C_V_L2=1.0, L_V=1.0, C_omega=1.0, L_omega=0.0, omega_star=1.0,
                eta_star=1.0, alpha_prime_star=1.0, M=1.0, norm_r0_inf=2.0, norm_r0_L2=1.0,
                norm_eta0_inf=1.0, eta0_min=1.0, r0_min=0.0, mu_K=1.0)
    base.update(kw)
    return BoundsLedger(**base)


def test_w1d_examples():
    for p in (1, 2):
        assert wasserstein_1d(p, AtomSet1D.dirac(0.3), AtomSet1D.dirac(-1.2)) == pytest.approx(1.5)
    a = AtomSet1D([0.0, 1.0], [0.5, 0.5])
    b = AtomSet1D([0.0, 2.0], [0.5, 0.5])
    assert wasserstein_1d(2, a, a) == 0
    assert wasserstein_1d(2, a, b) == pytest.approx(1 / math.sqrt(2), rel=1e-15)


def test_w1d_rejects_unnormalized():
    with pytest.raises(ContractViolation):
        AtomSet1D([0.0, 1.0], [0.5, 0.6])
    with pytest.raises(InvalidInputError):
        wasserstein_1d(3, AtomSet1D.dirac(0), AtomSet1D.dirac(1))


atoms = st.lists(st.tuples(st.floats(-10, 10), st.floats(0.05, 1.0)), min_size=1, max_size=4)


def to_set(pairs):
    x = np.array([p[0] for p in pairs])
    w = np.array([p[1] for p in pairs])
    w = w / w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    return AtomSet1D(x, w)


@settings(max_examples=100, deadline=None)
@given(atoms, atoms, st.sampled_from([1, 2]))
def test_w1d_matches_bruteforce(pa, pb, p):
    a, b = to_set(pa), to_set(pb)
    assert wasserstein_1d(p, a, b) == pytest.approx(bruteforce_wp(a, b, p), abs=1e-10)


@given(atoms, atoms, atoms)
def test_w1d_triangle_inequality(pa, pb, pc):
    a, b, c = to_set(pa), to_set(pb), to_set(pc)
    assert wasserstein_1d(2, a, c) <= wasserstein_1d(2, a, b) + wasserstein_1d(2, b, c) + 1e-9


def test_l2mu_examples():
    mu = BaseMeasure.line(2)
    s = AtomicDisintegration.from_lists(mu, [[0.0, 1.0], [3.0]], [[0.5, 0.5], [1.0]])
    t = AtomicDisintegration.from_lists(mu, [[0.0, 2.0], [3.0]], [[0.5, 0.5], [1.0]])
    assert l2mu_d2(s, s) == 0
    assert l2mu_d2(s, t) == pytest.approx(0.5, rel=1e-15)
    r1, r2 = np.array([1.0, 4.0]), np.array([0.0, 2.0])
    mono = l2mu_d2(AtomicDisintegration.monokinetic(mu, r1), AtomicDisintegration.monokinetic(mu, r2))
    assert mono == pytest.approx(math.sqrt(((r1 - r2) ** 2) @ mu.weights))


def test_l2mu_requires_shared_marginal():
    a = AtomicDisintegration.monokinetic(BaseMeasure.line(2), [0.0, 1.0])
    b = AtomicDisintegration.monokinetic(BaseMeasure(np.arange(2.0), [0.25, 0.75]), [0.0, 1.0])
    with pytest.raises(InvalidInputError):
        l2mu_d2(a, b)


def _frozen_run():
    mu = BaseMeasure.line(2)
    V = np.array([[0.0, 1.0], [-1.0, 0.0]])
    sys_ = System(mu, FluxInterpolation(), StaticVelocity(V), OmegaSpec.constant(0.0))
    traj = integrate(CoupledState(np.array([2.0, 0.0]), np.zeros((2, 2))), sys_, dt=0.1, t_end=1)
    return mu, sys_, traj


def test_dmu_sup_identical_and_frozen():
    mu, sys_, traj = _frozen_run()
    a = AtomicDisintegration.from_lists(mu, [[1.0, 2.0], [0.0]], [[0.5, 0.5], [1.0]])
    b = AtomicDisintegration.from_lists(mu, [[1.5, 2.0], [0.5]], [[0.5, 0.5], [1.0]])
    ta, tb = advect(a, traj, sys_), advect(b, traj, sys_)
    assert dmu_sup(ta, ta) == 0
    assert dmu_sup(ta, tb) == pytest.approx(l2mu_d2(a, b), rel=1e-15)


def test_dissipation_trivial_cases():
    mu = BaseMeasure.line(3)
    rng = np.random.default_rng(0)
    A = rng.normal(size=(3, 3))
    V, eta = A - A.T, np.abs(A + A.T)
    np.fill_diagonal(eta, 0)
    r = rng.uniform(0, 1, 3)
    assert contraction_dissipation(r, r, V, eta, mu) == (0.0, 0.0)
    _, bound = contraction_dissipation(r + 0.3, r, V, eta, mu)
    assert abs(bound) < 1e-15


def test_dissipation_hypotheses():
    mu = BaseMeasure.line(2)
    with pytest.raises(ContractViolation):
        contraction_dissipation([1, 0], [0, 0], np.ones((2, 2)) - np.eye(2), np.zeros((2, 2)), mu)
    with pytest.raises(ContractViolation):
        contraction_dissipation([1, 0], [0, 0], np.zeros((2, 2)), np.zeros((2, 2)), mu,
                                FluxInterpolation("product-mean"))


def test_dissipation_identity_matches_finite_difference():
    rng = np.random.default_rng(4)
    mu = BaseMeasure.uniform(rng.uniform(0, 1, (4, 1)))
    A = rng.normal(size=(4, 4))
    V = A - A.T
    sys_ = System(mu, FluxInterpolation(), StaticVelocity(V), OmegaSpec.constant(1.0))
    eta0 = np.ones((4, 4)) - np.eye(4)
    r1, r2 = rng.uniform(0.5, 2, 4), rng.uniform(0.5, 2, 4)
    h = 1e-4
    run = lambda r: integrate(CoupledState(r, eta0), sys_, "rk4-coupled", h, 2 * h).r
    a, b = run(r1), run(r2)
    D2 = ((a - b) ** 2) @ mu.weights
    fd = (D2[2] - D2[0]) / (2 * h)
    ident, bound = contraction_dissipation(a[1], b[1], V, eta0, mu)
    assert fd == pytest.approx(ident, abs=1e-6)
    assert ident <= bound + 1e-15


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10_000))
def test_dissipation_derivative_below_bound(n, seed):
    rng = np.random.default_rng(seed)
    mu = BaseMeasure.uniform(rng.uniform(0, 1, (n, 1)))
    A = rng.normal(size=(n, n))
    eta = rng.uniform(0, 2, (n, n))
    eta = eta + eta.T
    np.fill_diagonal(eta, 0)
    ident, bound = contraction_dissipation(rng.normal(size=n), rng.normal(size=n), A - A.T, eta, mu)
    assert ident <= bound + 1e-12 * max(1.0, abs(bound))


def test_bound_curves_examples():
    t = np.linspace(0, 8, 17)
    flat = ledger(norm_r0_inf=1.0)
    np.testing.assert_allclose(sup_bound_curve(flat, t), 1.0, rtol=1e-15)
    np.testing.assert_allclose(sup_bound_curve(ledger(), t), 2 * np.exp(t) / (2 * np.exp(t) - 1), rtol=1e-14)
    assert sup_bound_curve(ledger(M=3.0, mu_K=1.5), [200.0])[0] == pytest.approx(2.0)
    np.testing.assert_allclose(inf_bound_curve(ledger(), 1.0, t), 1.0, rtol=1e-15)
    assert np.all(inf_bound_curve(ledger(), 0.0, t) == 0)
    expected = 0.5 * np.exp(t) / (1 + 0.5 * (np.exp(t) - 1))
    np.testing.assert_allclose(inf_bound_curve(ledger(r0_min=0.5), 0.5, t), expected, rtol=1e-14)
    assert inf_bound_curve(ledger(), 0.5, [100.0])[0] == pytest.approx(1.0)


def test_bound_curves_reject_degenerate_ledger():
    with pytest.raises(InvalidInputError):
        sup_bound_curve(ledger(alpha_prime_star=0.0), [0.0])
    with pytest.raises(InvalidInputError):
        inf_bound_curve(ledger(), -0.1, [0.0])


def test_bound_curves_large_times_do_not_overflow():
    with np.errstate(over="raise"):
        v = sup_bound_curve(ledger(alpha_prime_star=50.0), [1e4])
    assert v[0] == pytest.approx(1.0)


def test_diameter():
    assert diameter([3.0, 3.0, 3.0]) == 0
    assert diameter([2.0, 0.0]) == 2
    np.testing.assert_array_equal(diameter(np.array([[1.0, 2.0], [0.0, 5.0]])), [1.0, 5.0])
