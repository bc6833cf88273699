"""Atomic solutions of the graph continuity equation.

A disintegration is a finite set of atoms ``(xi, p)`` at every vertex.  Atoms
move along the characteristics of the mean-field velocity

    X(xi, i) = -sum_{j != i} m_j sum_k p_jk Phi(xi, xi_jk; V[r]_ij) eta_ij

while their weights stay fixed.  The driving pair ``(r, eta)`` comes from a
recorded trajectory of the density system.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import BLOWUP_FACTOR, rhs_r
from .errors import BlowUpError, InvalidInputError
from .graph import as_density
from .metrics import AtomSet1D, l2mu_d2
from .report import Report


@dataclass(frozen=True)
class AtomicDisintegration:
    """Atoms stored flat: ``positions``, ``probs`` and ``owner`` vertex, grouped by owner."""

    mu: object
    positions: np.ndarray
    probs: np.ndarray
    owner: np.ndarray

    def __post_init__(self):
        x = np.array(self.positions, dtype=float)
        p = np.array(self.probs, dtype=float)
        o = np.array(self.owner, dtype=np.int64)
        if not (x.ndim == p.ndim == o.ndim == 1 and x.shape == p.shape == o.shape):
            raise InvalidInputError("positions, probs and owner must be aligned 1-D arrays")
        if np.any(np.diff(o) < 0) or (o.size and (o[0] < 0 or o[-1] >= self.mu.n)):
            raise InvalidInputError("owners must be sorted vertex indices")
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("atom positions must be finite")
        if np.any(p <= 0):
            raise InvalidInputError("atom weights must be positive")
        totals = np.bincount(o, weights=p, minlength=self.mu.n)
        if np.any(np.abs(totals - 1.0) > 1e-12 * np.maximum(1, np.bincount(o, minlength=self.mu.n))):
            raise InvalidInputError("atom weights must sum to 1 at every vertex")
        for a in (x, p, o):
            a.setflags(write=False)
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "owner", o)

    @classmethod
    def from_lists(cls, mu, positions, weights):
        if len(positions) != mu.n or len(weights) != mu.n:
            raise InvalidInputError("need one atom list per vertex")
        owner = np.concatenate([np.full(len(x), i) for i, x in enumerate(positions)])
        return cls(mu, np.concatenate([np.ravel(x) for x in positions]),
                   np.concatenate([np.ravel(w) for w in weights]), owner)

    @classmethod
    def monokinetic(cls, mu, r):
        """One atom of weight 1 at ``r_i`` on every vertex."""
        r = as_density(r, mu.n)
        return cls(mu, r, np.ones(mu.n), np.arange(mu.n))

    @property
    def mass(self):
        """Weight ``m_i p_ik`` of every atom in the joint measure."""
        return self.mu.weights[self.owner] * self.probs

    def with_positions(self, x):
        return AtomicDisintegration(self.mu, x, self.probs, self.owner)

    def vertex_atoms(self, i):
        sel = self.owner == i
        return AtomSet1D(self.positions[sel], self.probs[sel])

    def first_moment(self):
        return float(self.mass @ self.positions)

    def second_moment(self):
        return float(self.mass @ self.positions ** 2)


def _field(x_eval, owner_eval, atoms_x, atoms_owner, atoms_mass, V, eta, flux):
    Vab = V[owner_eval[:, None], atoms_owner[None, :]]
    Eab = eta[owner_eval[:, None], atoms_owner[None, :]]
    F = flux(x_eval[:, None], atoms_x[None, :], Vab)
    return -(F * Eab) @ atoms_mass


def field_X(sigma, r, eta, system, xi, i):
    """Mean-field velocity at position ``xi`` over vertex ``i``."""
    if not 0 <= i < system.n:
        raise InvalidInputError(f"vertex {i} out of range")
    r = as_density(r, system.n)
    eta = np.asarray(getattr(eta, "values", eta), dtype=float)
    if eta.shape != (system.n, system.n):
        raise InvalidInputError("eta has the wrong shape")
    V = system.velocity.values(r, system.mu)
    out = _field(np.array([float(xi)]), np.array([i]), sigma.positions, sigma.owner,
                 sigma.mass, V, eta, system.flux)
    return float(out[0])


class _Hermite:
    """Cubic Hermite interpolation of a recorded (r, eta) trajectory.

    Node derivatives come from the right-hand side itself, so the
    interpolation error is fourth order in the record spacing.
    """

    def __init__(self, traj, system):
        self.t = traj.times
        self.r, self.eta = traj.r, traj.eta
        self.dr = np.array([rhs_r(traj.r[k], traj.eta[k], system) for k in range(len(traj))])
        self.de = np.array([system.omega.values(traj.r[k], system.mu) for k in range(len(traj))]) - traj.eta

    def __call__(self, t):
        k = int(np.searchsorted(self.t, t, side="right")) - 1
        k = min(max(k, 0), self.t.size - 2)
        h = self.t[k + 1] - self.t[k]
        s = (t - self.t[k]) / h
        if s == 0.0:
            return self.r[k], self.eta[k]
        if s == 1.0:
            return self.r[k + 1], self.eta[k + 1]
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        r = h00 * self.r[k] + h10 * h * self.dr[k] + h01 * self.r[k + 1] + h11 * h * self.dr[k + 1]
        e = h00 * self.eta[k] + h10 * h * self.de[k] + h01 * self.eta[k + 1] + h11 * h * self.de[k + 1]
        return r, e


@dataclass(frozen=True)
class Probes:
    """Passive test atoms: they follow the field but do not contribute to it."""

    owner: np.ndarray
    positions: np.ndarray

    @classmethod
    def default(cls, n, r0_sup):
        """``u in {0, R, 2R}`` at every vertex, ``R = max |r0|``."""
        u = np.array([0.0, r0_sup, 2.0 * r0_sup])
        return cls(np.repeat(np.arange(n), u.size), np.tile(u, n))


@dataclass
class AtomTrajectory:
    times: np.ndarray
    positions: np.ndarray
    template: AtomicDisintegration
    probes: Optional[Probes] = None
    probe_positions: Optional[np.ndarray] = None

    def at(self, k):
        return self.template.with_positions(self.positions[k])

    def __len__(self):
        return self.times.size


def advect(sigma0, euler_traj, system, dt=None, probes=None, record_stride=1):
    """Push atoms (and optional probes) along the self-consistent field with RK4.

    Each RK4 stage evaluates the field with the stage positions of the atoms
    themselves and with ``(r, eta)`` interpolated from ``euler_traj`` at the
    stage time.  Weights never change.
    """
    times = euler_traj.times
    if dt is None:
        dt = float(times[1] - times[0]) if times.size > 1 else 1.0
    if not dt > 0:
        raise InvalidInputError("dt must be > 0")
    if times.size > 1 and np.diff(times).max() > dt * (1 + 1e-9):
        raise InvalidInputError("trajectory records are coarser than dt")
    interp = _Hermite(euler_traj, system)
    t0, T = float(times[0]), float(times[-1])
    n_steps = max(1, int(round((T - t0) / dt)))
    own, mass = sigma0.owner, sigma0.mass
    N = own.size
    P = 0 if probes is None else probes.owner.size
    all_owner = own if P == 0 else np.concatenate([own, probes.owner])
    y = sigma0.positions.copy() if P == 0 else np.concatenate([sigma0.positions, probes.positions])
    limit = BLOWUP_FACTOR * max(1.0, float(np.abs(y).max()))
    vel = system.velocity

    def F(t, y):
        r, eta = interp(t)
        V = vel.values(r, system.mu)
        return _field(y, all_owner, y[:N], own, mass, V, eta, system.flux)

    rec_t, rec_y = [t0], [y]
    for k in range(n_steps):
        t = t0 + k * dt
        k1 = F(t, y)
        k2 = F(t + 0.5 * dt, y + 0.5 * dt * k1)
        k3 = F(t + 0.5 * dt, y + 0.5 * dt * k2)
        k4 = F(t + dt, y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(y.sum()) or np.abs(y).max() > limit:
            raise BlowUpError(f"atoms blew up at step {k + 1}")
        if (k + 1) % record_stride == 0 or k + 1 == n_steps:
            rec_t.append(t0 + (k + 1) * dt)
            rec_y.append(y)
    Y = np.array(rec_y)
    return AtomTrajectory(np.array(rec_t), Y[:, :N], sigma0, probes, Y[:, N:] if P else None)


def flow_constants(ledger, second_moment, horizon):
    """Growth constant, Lipschitz constant and stability envelope."""
    eta_b = ledger.eta_bound
    root_cv = math.sqrt(ledger.C_V_L2)
    c_bar = ledger.L_Phi * root_cv * eta_b
    c_tilde = c_bar * max(1.0, math.sqrt(second_moment))
    big = (ledger.L_Phi * eta_b) ** 2 * ledger.C_V_L2
    log_cal = 0.5 * (math.log(big) + big * horizon ** 2) if big > 0 else -math.inf
    cal_c_bar = math.exp(min(log_cal, 700.0))
    exponent = c_bar * horizon + cal_c_bar * horizon
    # the envelope grows doubly exponentially in the horizon; past float range it is +inf
    envelope = math.sqrt(2.0) * math.exp(exponent) if exponent < 700 else math.inf
    return {"C_tilde": c_tilde, "C_bar": c_bar, "Cal_C_bar": cal_c_bar, "envelope": envelope}


def flow_property_suite(sigma_traj, ledger, rtol=1e-9):
    """Check linear growth, Lipschitz dependence and time continuity of the probe flow."""
    if sigma_traj.probes is None:
        raise InvalidInputError("trajectory carries no probes; pass probes to advect")
    t = sigma_traj.times
    T = float(t[-1] - t[0])
    m2 = max(sigma_traj.at(k).second_moment() for k in range(len(sigma_traj)))
    c = flow_constants(ledger, m2, T)
    f = sigma_traj.probe_positions
    u = f[0]
    tt = (t - t[0])[:, None]
    rep = Report(info=dict(c, m2_star=m2))

    bound = np.exp(c["C_tilde"] * tt) * (1.0 + np.abs(u))[None, :]
    excess = np.abs(f) - bound * (1 + rtol)
    rep.add("linear_growth", excess.max() <= 0, float(excess.max()),
            _witness(excess, t), f"C_tilde={c['C_tilde']:.4g}")

    own = sigma_traj.probes.owner
    ia, ib = np.triu_indices(u.size, k=1)
    same = own[ia] == own[ib]
    ia, ib = ia[same], ib[same]
    diff0 = np.abs(u[ia] - u[ib])
    diff = np.abs(f[:, ia] - f[:, ib])
    excess = diff - np.exp(c["C_bar"] * tt) * diff0[None, :] * (1 + rtol) - 1e-14
    ratio = np.max(diff[:, diff0 > 0] / diff0[diff0 > 0], initial=0.0)
    rep.add("lipschitz", excess.max(initial=-1.0) <= 0, float(excess.max(initial=0.0)),
            _witness(excess, t) if excess.size else None,
            f"C_bar={c['C_bar']:.4g} max_ratio={ratio:.6g}")
    rep.info["max_lipschitz_ratio"] = float(ratio)

    if t.size > 1:
        steps = np.abs(np.diff(f, axis=0)).max(axis=1)
        speed = c["C_tilde"] * (1.0 + np.abs(f).max())
        excess = steps - speed * np.diff(t) * (1 + rtol)
        rep.add("time_continuity", excess.max() <= 0, float(excess.max()), None,
                f"speed_bound={speed:.4g}")
    return rep


def _witness(excess, t):
    k, j = np.unravel_index(int(np.argmax(excess)), excess.shape)
    return (float(t[k]), int(j))


def stability_experiment(init_a, init_b, euler_traj, system, ledger, dt=None):
    """Advect two initial disintegrations and compare with the stability envelope.

    Reports ``ratio = sup_t L2mu_d2(sigma_a, sigma_b) / L2mu_d2(init_a, init_b)``
    and the envelope ``sqrt(2) exp(C_bar T + Cal_C_bar(T) T)``.
    """
    if np.any(init_a.mu.weights != init_b.mu.weights):
        raise InvalidInputError("initial disintegrations do not share the vertex measure")
    tra = advect(init_a, euler_traj, system, dt)
    trb = advect(init_b, euler_traj, system, dt)
    dists = np.array([l2mu_d2(tra.at(k), trb.at(k)) for k in range(len(tra))])
    d0 = l2mu_d2(init_a, init_b)
    T = float(tra.times[-1] - tra.times[0])
    m2 = max(max(tra.at(k).second_moment(), trb.at(k).second_moment()) for k in range(len(tra)))
    c = flow_constants(ledger, m2, T)
    rep = Report(info=dict(c, D=float(dists.max()), initial=d0, distances=dists, times=tra.times))
    if d0 == 0.0:
        rep.info["ratio"] = 0.0
        rep.info["identical_inits"] = True
        rep.add("stability", dists.max() == 0.0, float(dists.max()), None, "identical initial data")
        return rep
    ratio = float(dists.max() / d0)
    rep.info["ratio"] = ratio
    rep.info["identical_inits"] = False
    rep.add("stability", ratio <= c["envelope"], ratio - c["envelope"], None,
            f"ratio={ratio:.6g} envelope={c['envelope']:.6g}")
    return rep
