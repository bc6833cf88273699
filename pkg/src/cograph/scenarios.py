"""Build systems from configs, run them, and collect diagnostics and checks."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import CSV_COLUMNS, PAIR_COLUMNS
from .dynamics import (CoupledState, System, dtilde_inf, eta_lower_bound_curve, integrate,
                       mass_drift, picard_solve, positivity_check)
from .errors import BlowUpError
from .fields import AlphaProfile, InteractionKernelSpec, OmegaSpec, StaticVelocity, constants_of
from .graph import BaseMeasure, off_diagonal
from .graph_ce import AtomicDisintegration, Probes, advect, flow_property_suite, stability_experiment
from .interpolation import FluxInterpolation
from .metrics import contraction_dissipation, diameter, inf_bound_curve, sup_bound_curve
from .report import Report

MASS_TOL = 1e-10
ETA_TOL = 1e-9
ENVELOPE_TOL = 1e-6
MONOKINETIC_TOL = 1e-8
PICARD_TOL = 1e-6
DISSIPATION_TOL = 1e-6


@dataclass
class Scenario:
    config: object
    mu: BaseMeasure
    system: System
    init: CoupledState
    ledger: object

    @property
    def bounds_available(self):
        L = self.ledger
        return (self.config.monotone and L.M > 0 and L.eta_star > 0
                and L.alpha_prime_star > 0 and L.r0_min >= 0)


@dataclass
class RunResult:
    columns: list
    rows: list
    summary: dict
    report: Report
    trajectory: object = None
    blowup: Optional[str] = None
    extras: dict = field(default_factory=dict)


def _points(g):
    if g.placement == "uniform-random":
        return np.random.default_rng(g.seed).uniform(0.0, 1.0, (g.n, g.dimension))
    if g.dimension == 1:
        return np.linspace(0.0, 1.0, g.n)[:, None] if g.n > 1 else np.zeros((1, 1))
    side = max(2, math.ceil(g.n ** (1.0 / g.dimension) - 1e-9))
    axis = np.linspace(0.0, 1.0, side)
    grid = itertools.islice(itertools.product(axis, repeat=g.dimension), g.n)
    return np.array(list(grid))


def _initial_density(i, n):
    if i.kind == "constant":
        return np.full(n, i.value)
    if i.kind == "uniform-random":
        return np.random.default_rng(i.seed).uniform(i.lo, i.hi, n)
    if i.kind == "explicit":
        return np.array(i.values, dtype=float)
    r = np.zeros(n)
    r[list(i.subset)] = i.value
    return r


def build(cfg):
    """Assemble measure, system, initial state and ledger from a config."""
    g = cfg.graph
    pts = _points(g)
    if g.weights == "explicit":
        w = np.array(g.weight_values, dtype=float)
        w = w / w.sum()
    else:
        w = np.full(g.n, 1.0 / g.n)
    mu = BaseMeasure(pts, w)
    r0 = _initial_density(cfg.init_r, g.n)

    if cfg.eta0.kind == "constant":
        eta0 = np.full((g.n, g.n), cfg.eta0.value)
    else:
        eta0 = np.exp(-mu.pairwise_sq_distances() / (2.0 * cfg.eta0.length ** 2))
    np.fill_diagonal(eta0, 0.0)

    o = cfg.omega
    if o.kind == "constant":
        omega = OmegaSpec("constant", o.value, omega_star=o.star)
    elif o.kernel == "ones":
        omega = OmegaSpec.ones(g.n, o.star)
    else:
        omega = OmegaSpec.gaussian(mu, o.length, o.star)

    v = cfg.velocity
    if v.kind == "alpha":
        kind = "identity" if v.alpha == "identity-on-box" else v.alpha
        velocity = AlphaProfile(kind, v.slope, v.center, v.scale, v.amplitude)
        if cfg.monotone:
            velocity = velocity.with_box(0.0, float(np.abs(r0).max()))
    else:
        K = (InteractionKernelSpec.gaussian(mu, v.length) if v.kernel == "gaussian"
             else InteractionKernelSpec.quadratic(mu))
        velocity = K if v.kind == "kernel" else StaticVelocity(K.values(r0, mu))

    flux = FluxInterpolation(cfg.flux.kind)
    system = System(mu, flux, velocity, omega)
    ledger = constants_of(flux, velocity, omega, eta0, r0, mu)
    return Scenario(cfg, mu, system, CoupledState(r0, eta0), ledger)


def _fmt(x):
    return "" if x is None else repr(float(x))


def _row_indices(n_records, stride):
    idx = list(range(0, n_records, stride))
    if idx[-1] != n_records - 1:
        idx.append(n_records - 1)
    return idx


def _omega_min(sc, traj):
    om = sc.system.omega
    if om.kind == "constant" or sc.mu.n < 2:
        return om.c if om.kind == "constant" else math.inf
    return min(float(off_diagonal(om.values(traj.r[k], sc.mu)).min()) for k in range(len(traj)))


def _trajectory_checks(sc, traj, rep, summary, tag=""):
    L, cfg = sc.ledger, sc.config
    d = traj.diagnostics
    t = traj.times - traj.times[0]
    drift = mass_drift(traj)
    summary[f"max_mass_drift{tag}"] = drift
    rep.add(f"mass_conservation{tag}", drift <= MASS_TOL * max(1.0, abs(L.M)), drift)

    om = sc.system.omega
    omega_nonneg = om.c >= 0 if om.kind == "constant" else float(om.W.min()) >= 0
    if cfg.flux.kind == "upwind" and L.eta0_min > 0 and L.r0_min >= 0 and omega_nonneg:
        pos = positivity_check(traj, L.norm_r0_inf)["positivity"]
        rep.checks[f"positivity{tag}"] = pos
        pos.name = f"positivity{tag}"

    if sc.mu.n > 1:
        top = float(np.maximum(np.abs(d["eta_min"]), np.abs(d["eta_max"])).max())
        cap = L.norm_eta0_inf + L.C_omega
        rep.add(f"eta_upper_envelope{tag}", top <= cap + ETA_TOL, top - cap)
        if _omega_min(sc, traj) >= L.omega_star - 1e-12 * max(1.0, L.omega_star):
            low = eta_lower_bound_curve(L.eta0_min, L.omega_star, t)
            gap = float((low - d["eta_min"]).max())
            rep.add(f"eta_lower_envelope{tag}", gap <= ETA_TOL, gap)
        else:
            summary[f"eta_lower_envelope{tag}"] = "skipped: omega fell below omega_star"

    if cfg.monotone and L.r0_min >= 0:
        gap = float((d["r_max"] - L.norm_r0_inf).max())
        rep.add(f"sup_norm_monotone{tag}", gap <= ETA_TOL, gap)
    if sc.bounds_available:
        up = sup_bound_curve(L, t)
        lo = inf_bound_curve(L, max(L.r0_min, 0.0), t)
        gap_up = float((d["r_max"] - up).max())
        gap_lo = float((lo - d["r_min"]).max())
        rep.add(f"bernoulli_upper{tag}", gap_up <= ENVELOPE_TOL, gap_up)
        rep.add(f"bernoulli_lower{tag}", gap_lo <= ENVELOPE_TOL, gap_lo)


def _base_rows(sc, traj, idx, columns):
    d = traj.diagnostics
    t = traj.times - traj.times[0]
    diam = diameter(traj.r)
    bounds = sc.bounds_available
    if bounds:
        up = sup_bound_curve(sc.ledger, t)
        lo = inf_bound_curve(sc.ledger, max(sc.ledger.r0_min, 0.0), t)
    values = {
        "t": traj.times, "mass": d["mass"], "r_min": d["r_min"], "r_max": d["r_max"],
        "diameter": diam, "eta_min": d["eta_min"], "eta_max": d["eta_max"],
        "sup_bound": up if bounds else None, "inf_bound": lo if bounds else None,
    }
    return [[_fmt(None if values[c] is None else values[c][k]) for c in columns] for k in idx]


def _columns(cfg, pair):
    allowed = CSV_COLUMNS + (PAIR_COLUMNS if pair else ())
    want = cfg.outputs.diagnostics
    if "all" in want:
        return list(allowed)
    return ["t"] + [c for c in allowed if c in want and c != "t"]


def execute(cfg):
    """Run a scenario; never writes files.  Blow-ups are captured in the result."""
    sc = build(cfg)
    integ, x = cfg.integrator, cfg.experiment
    full = x.kind in ("pair", "monokinetic", "stability", "flow")
    stride = 1 if full else integ.record_stride
    out_stride = integ.record_stride if full else 1
    pair = x.kind == "pair"
    columns = _columns(cfg, pair)
    summary = {"scenario": x.kind, "n": sc.mu.n, "M": sc.ledger.M}
    summary.update({f"ledger.{k}": v for k, v in sc.ledger.__dict__.items()})
    rep = Report()
    try:
        traj = integrate(sc.init, sc.system, integ.scheme, integ.dt, integ.t_end, stride)
    except BlowUpError as exc:
        part = exc.partial
        base_cols = [c for c in columns if c not in PAIR_COLUMNS]
        rows = _base_rows(sc, part, _row_indices(len(part), out_stride), base_cols)
        summary["blowup"] = str(exc)
        summary["rows_written"] = len(rows)
        return RunResult(base_cols, rows, summary, rep, part, str(exc))

    idx = _row_indices(len(traj), out_stride)
    summary["final_time"] = float(traj.times[-1])
    summary["final_diameter"] = diameter(traj.r[-1])
    summary["final_r"] = [float(v) for v in traj.r[-1]]
    summary["min_r"] = float(traj.r.min())
    summary["max_r"] = float(traj.r.max())
    _trajectory_checks(sc, traj, rep, summary)
    if x.target_diameter is not None:
        final = traj.r[-1]
        target = sc.ledger.M / sc.ledger.mu_K
        dev = float(np.abs(final - target).max())
        summary["consensus_deviation"] = dev
        rep.add("consensus_diameter", diameter(final) < x.target_diameter, diameter(final))
        rep.add("consensus_value", dev <= 1e-3, dev)

    base_cols = [c for c in columns if c not in PAIR_COLUMNS]
    rows = _base_rows(sc, traj, idx, base_cols)
    extras = {}
    if pair:
        rows = _pair(sc, traj, idx, columns, rows, rep, summary, extras)
    elif x.kind == "monokinetic":
        atoms = advect(AtomicDisintegration.monokinetic(sc.mu, sc.init.r), traj, sc.system, integ.dt)
        dev = float(np.abs(atoms.positions - traj.r).max())
        summary["max_atoms_minus_euler"] = dev
        rep.add("monokinetic_consistency", dev <= MONOKINETIC_TOL, dev)
    elif x.kind == "stability":
        a, b = stability_inits(sc)
        srep = stability_experiment(a, b, traj, sc.system, sc.ledger, integ.dt)
        for k in ("ratio", "envelope", "D", "initial", "C_bar", "Cal_C_bar"):
            summary[f"stability_{k}"] = srep.info[k]
        rep.checks.update(srep.checks)
        extras["stability"] = srep
    elif x.kind == "flow":
        probes = Probes.default(sc.mu.n, sc.ledger.norm_r0_inf)
        at = advect(AtomicDisintegration.monokinetic(sc.mu, sc.init.r), traj, sc.system,
                    integ.dt, probes=probes)
        frep = flow_property_suite(at, sc.ledger)
        for k in ("C_tilde", "C_bar", "m2_star", "max_lipschitz_ratio"):
            summary[f"flow_{k}"] = frep.info[k]
        rep.checks.update(frep.checks)
        extras["flow"] = frep
    elif x.kind == "picard":
        _picard(sc, rep, summary, extras)
    return RunResult(columns, rows, summary, rep, traj, None, extras)


def stability_inits(sc):
    """Two atomic initial data differing by one shifted atom."""
    x = sc.config.experiment
    rng = np.random.default_rng(x.seed)
    n, k = sc.mu.n, x.atoms
    pos = sc.init.r[:, None] + x.spread * rng.uniform(-1.0, 1.0, (n, k))
    w = rng.uniform(0.5, 1.5, (n, k))
    w /= w.sum(axis=1, keepdims=True)
    a = AtomicDisintegration.from_lists(sc.mu, list(pos), list(w))
    shifted = pos.copy()
    shifted[x.vertex, 0] += x.perturbation
    b = AtomicDisintegration.from_lists(sc.mu, list(shifted), list(w))
    return a, b


def _pair(sc, traj, idx, columns, rows, rep, summary, extras):
    cfg = sc.config
    x, integ = cfg.experiment, cfg.integrator
    rng = np.random.default_rng(x.seed)
    r2 = sc.init.r + x.perturbation * rng.uniform(-1.0, 1.0, sc.mu.n)
    r2 = np.maximum(r2, 0.0)
    init2 = CoupledState(r2, sc.init.eta)
    traj2 = integrate(init2, sc.system, integ.scheme, integ.dt, integ.t_end, 1)
    _trajectory_checks(sc, traj2, rep, summary, "_second")
    m = sc.mu.weights
    D2 = ((traj.r - traj2.r) ** 2) @ m
    V = sc.system.velocity.V
    K = len(traj)
    ident = np.zeros(K)
    bound = np.zeros(K)
    for k in range(K):
        ident[k], bound[k] = contraction_dissipation(traj.r[k], traj2.r[k], V, traj.eta[k],
                                                     sc.mu, sc.system.flux)
    fd = np.full(K, np.nan)
    dt = np.diff(traj.times)
    fd[1:-1] = (D2[2:] - D2[:-2]) / (dt[1:] + dt[:-1])
    scale = max(1.0, float(np.abs(bound).max()))
    excess = fd[1:-1] - bound[1:-1]
    worst = float(excess.max()) if excess.size else 0.0
    rep.add("dissipation_inequality", worst <= DISSIPATION_TOL * scale, worst)
    summary["dissipation_max_excess"] = worst
    summary["dissipation_identity_vs_fd"] = float(np.abs(fd[1:-1] - ident[1:-1]).max()) if K > 2 else 0.0
    pos = (D2[1:] > 0) & (D2[:-1] > 0)
    with np.errstate(divide="ignore"):
        rates = -np.diff(np.log(np.where(D2 > 0, D2, np.nan))) / dt
    summary["measured_decay_rate"] = float(np.nanmean(rates[pos])) if np.any(pos) else 0.0
    summary["lambda_inf"] = float(np.min(((V * traj.eta[0]) @ m)))
    dist = np.sqrt(D2)
    extra = {"l2mu_d2": dist, "dissipation_lhs": fd, "dissipation_rhs": bound}
    out = []
    for row, k in zip(rows, idx):
        vals = list(row)
        for c in columns:
            if c in extra:
                v = extra[c][k]
                vals.append("" if not np.isfinite(v) else _fmt(v))
        out.append(vals)
    extras["pair"] = {"second": traj2, "D2": D2, "fd": fd, "bound": bound, "identity": ident}
    return out


def _picard(sc, rep, summary, extras):
    x, integ = sc.config.experiment, sc.config.integrator
    ptraj, prep = picard_solve(sc.init, sc.system, x.horizon, integ.dt, x.max_iters, x.tol)
    rk = integrate(sc.init, sc.system, integ.scheme, integ.dt, x.horizon, 1)
    dist = dtilde_inf(ptraj, rk, sc.mu.weights)
    _, half = picard_solve(sc.init, sc.system, 0.5 * x.horizon, integ.dt, x.max_iters, x.tol)
    summary.update({
        "picard_iterations": prep.iterations,
        "picard_ratios": prep.ratios,
        "picard_vs_rk4": dist,
        "picard_first_ratio_half_horizon": half.ratios[0] if half.ratios else 0.0,
    })
    rep.add("picard_converged", prep.converged, prep.distances[-1])
    rep.add("picard_agreement", dist <= PICARD_TOL, dist)
    worst = max(prep.ratios, default=0.0)
    rep.add("picard_contraction", worst < 1.0, worst)
    if prep.ratios and half.ratios:
        rep.add("picard_ratio_trend", half.ratios[0] < prep.ratios[0], half.ratios[0] - prep.ratios[0])
    extras["picard"] = (ptraj, prep, rk)
