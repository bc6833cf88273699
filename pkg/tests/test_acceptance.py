"""End-to-end acceptance suite; a per-criterion PASS/FAIL summary is printed at the end."""
import numpy as np
import pytest

from cograph.cli import write_outputs
from cograph.config import PRESETS, preset_config
from cograph.dynamics import CoupledState, System, eta_lower_bound_curve
from cograph.fields import AlphaProfile, OmegaSpec
from cograph.graph import BaseMeasure
from cograph.interpolation import FluxInterpolation
from cograph.metrics import AtomSet1D, inf_bound_curve, sup_bound_curve, wasserstein_1d
from cograph.oracle import bruteforce_w2, convergence_study, reference_integrate
from cograph.scenarios import build, execute

criterion = pytest.mark.criterion
NAMES = sorted(PRESETS)
MONOTONE = [n for n in NAMES if preset_config(n).monotone]


def trajectories(result):
    out = [result.trajectory]
    if "pair" in result.extras:
        out.append(result.extras["pair"]["second"])
    return out


@criterion(1, "mass conservation on every preset, runtime < 10 s each")
@pytest.mark.parametrize("name", NAMES)
def test_criterion_01_mass(runs, name):
    res = runs[name]
    assert res.blowup is None
    for traj in trajectories(res):
        M = traj.r[0] @ traj.weights
        assert np.abs(traj.r @ traj.weights - M).max() <= 1e-10
    assert runs.seconds[name] < 10.0


def _positivity_applies(sc):
    om = sc.system.omega
    omega_ok = om.c >= 0 if om.kind == "constant" else float(om.W.min()) >= 0
    return (sc.config.flux.kind == "upwind" and sc.ledger.eta0_min > 0
            and sc.ledger.r0_min >= 0 and omega_ok)


POSITIVE = [n for n in NAMES if _positivity_applies(build(preset_config(n)))]


@criterion(2, "positivity on upwind presets with positive edge weights")
@pytest.mark.parametrize("name", POSITIVE)
def test_criterion_02_positivity(runs, name):
    res = runs[name]
    for traj in trajectories(res):
        scale = np.abs(traj.r[0]).max()
        assert traj.r.min() >= -1e-10 * scale


@criterion(3, "edge-weight lower and upper envelopes")
@pytest.mark.parametrize("name", NAMES)
def test_criterion_03_eta_envelope(runs, name):
    res = runs[name]
    led = build(preset_config(name)).ledger
    for traj in trajectories(res):
        t = traj.times - traj.times[0]
        d = traj.diagnostics
        low = eta_lower_bound_curve(led.eta0_min, led.omega_star, t)
        assert np.all(d["eta_min"] >= low - 1e-9)
        top = np.maximum(np.abs(d["eta_min"]), np.abs(d["eta_max"]))
        assert top.max() <= led.norm_eta0_inf + led.C_omega + 1e-9


@criterion(4, "consensus on the n = 2, 8, 64 presets within 60 s")
@pytest.mark.parametrize("name,target,t_end", [("consensus-n2", 1e-3, 10.0),
                                               ("consensus-n8", 1e-2, 20.0),
                                               ("consensus-n64", 1e-2, 20.0)])
def test_criterion_04_consensus(runs, name, target, t_end):
    res = runs[name]
    traj = res.trajectory
    assert traj.times[-1] == pytest.approx(t_end)
    final = traj.r[-1]
    assert np.ptp(final) < target
    led = build(preset_config(name)).ledger
    assert np.abs(final - led.M / led.mu_K).max() <= 1e-3
    assert runs.seconds[name] < 60.0


@criterion(5, "Bernoulli sup/inf envelopes on every monotone preset")
@pytest.mark.parametrize("name", MONOTONE)
def test_criterion_05_bernoulli(runs, name):
    res = runs[name]
    led = build(preset_config(name)).ledger
    traj = res.trajectory
    t = traj.times - traj.times[0]
    assert np.all(traj.r.max(axis=1) <= sup_bound_curve(led, t) + 1e-6)
    assert np.all(traj.r.min(axis=1) >= inf_bound_curve(led, led.r0_min, t) - 1e-6)


@criterion(6, "monokinetic atoms reproduce the density trajectory")
def test_criterion_06_monokinetic(runs):
    cfg = preset_config("monokinetic")
    assert cfg.integrator.dt == 1e-3 and cfg.integrator.t_end == 10
    res = runs["monokinetic"]
    assert res.summary["max_atoms_minus_euler"] <= 1e-8
    assert res.report["monokinetic_consistency"].passed


@criterion(7, "dissipation inequality at every interior time")
def test_criterion_07_dissipation(runs):
    res = runs["dissipation"]
    pair = res.extras["pair"]
    fd, bound = pair["fd"][1:-1], pair["bound"][1:-1]
    assert fd.size > 100
    scale = max(1.0, np.abs(pair["bound"]).max())
    assert np.all(fd <= bound + 1e-6 * scale)


@criterion(8, "Picard fixed point agrees with RK4 and contracts")
def test_criterion_08_picard(runs):
    res = runs["picard"]
    assert preset_config("picard").experiment.horizon == 0.1
    assert res.summary["picard_vs_rk4"] <= 1e-6
    assert max(res.summary["picard_ratios"]) < 1.0


@criterion(9, "probe flow satisfies linear growth and Lipschitz bounds")
def test_criterion_09_flow(runs):
    rep = runs["flow"].extras["flow"]
    assert rep["linear_growth"].passed and rep["lipschitz"].passed
    assert rep.info["max_lipschitz_ratio"] <= np.exp(rep.info["C_bar"] * 1.0)


@criterion(10, "stability ratio below the envelope")
def test_criterion_10_stability(runs):
    rep = runs["stability"].extras["stability"]
    assert not rep.info["identical_inits"]
    assert np.isfinite(rep.info["envelope"])
    assert rep.info["ratio"] <= rep.info["envelope"]


@criterion(11, "quantile W2 equals brute-force W2 on 500 random instances")
def test_criterion_11_transport_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(500):
        sets = []
        for _side in range(2):
            k = int(rng.integers(1, 5))
            x = rng.normal(0, 2, k)
            if k > 1 and rng.random() < 0.2:
                x[1] = x[0]
            w = rng.dirichlet(np.ones(k))
            w[-1] = 1.0 - w[:-1].sum()
            sets.append(AtomSet1D(x, w))
        a, b = sets
        worst = max(worst, abs(wasserstein_1d(2, a, b) - bruteforce_w2(a, b)))
    assert worst <= 1e-10


def _order_scenario():
    mu = BaseMeasure.line(2)
    W = np.ones((2, 2, 2))
    W[0, 1, 0] = W[1, 0, 0] = 4.0
    system = System(mu, FluxInterpolation(), AlphaProfile("identity"), OmegaSpec.kernel(W))
    init = CoupledState(np.array([4.0, 0.0]), np.ones((2, 2)) - np.eye(2))
    return init, system


@pytest.fixture(scope="module")
def order_reference():
    init, system = _order_scenario()
    return init, system, reference_integrate(init, system, 1e-4, 1.0, record_every=1.0, levels=3)


@criterion(12, "RK4 global error scales as dt^4 across three halvings")
@pytest.mark.parametrize("scheme", ["rk4-coupled", "rk4-with-exact-eta"])
def test_criterion_12_scheme_order(order_reference, scheme):
    init, system, ref = order_reference
    errors, ratios = convergence_study(init, system, scheme, [2e-2, 1e-2, 5e-3, 2.5e-3], 1.0, ref)
    assert len(ratios) == 3
    for r in ratios:
        assert 16.0 / 2 <= r <= 16.0 * 2, (errors, ratios)


@criterion(13, "byte-identical CSV on repeated runs")
@pytest.mark.parametrize("name", NAMES)
def test_criterion_13_determinism(runs, tmp_path, name):
    first = write_outputs(runs[name], tmp_path / "a") / "trajectory.csv"
    second = write_outputs(execute(preset_config(name)), tmp_path / "b") / "trajectory.csv"
    assert first.read_bytes() == second.read_bytes()
