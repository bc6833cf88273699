"""Time integration of the coupled density / edge-weight system.

    dr_i/dt   = -sum_j Phi(r_i, r_j; V[r]_ij) eta_ij m_j
    deta/dt   = omega[r] - eta

Schemes
-------
euler               explicit Euler on (r, eta)
rk4-coupled         classical RK4 on (r, eta)
rk4-with-exact-eta  exponential RK4 (Cox-Matthews); the linear decay of eta
                    is integrated exactly and r sees classical RK4 stages
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, HorizonTooLongError, InvalidInputError
from .graph import SYMMETRIC, EdgeField, as_density, off_diagonal
from .report import Report

SCHEMES = ("rk4-with-exact-eta", "rk4-coupled", "euler")
BLOWUP_FACTOR = 1e3


@dataclass(frozen=True)
class System:
    """Everything the right-hand side needs besides the state."""

    mu: object
    flux: object
    velocity: object
    omega: object

    @property
    def n(self):
        return self.mu.n


@dataclass(frozen=True)
class CoupledState:
    r: np.ndarray
    eta: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        r = as_density(self.r)
        eta = self.eta.values if isinstance(self.eta, EdgeField) else self.eta
        eta = np.array(eta, dtype=float)
        if eta.shape != (r.shape[0], r.shape[0]):
            raise InvalidInputError(f"eta shape {eta.shape} does not match {r.shape[0]} vertices")
        EdgeField(eta, SYMMETRIC)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "eta", eta)


# right-hand side ------------------------------------------------------------

def rhs_r(r, eta, system):
    V = system.velocity.values(r, system.mu)
    F = system.flux(r[:, None], r[None, :], V)
    return -(F * eta) @ system.mu.weights


def rhs(state, system):
    """Return ``(dr, deta)`` at ``state``."""
    dr = rhs_r(state.r, state.eta, system)
    deta = system.omega.values(state.r, system.mu) - state.eta
    return dr, 0.5 * (deta + deta.T)


# one-step methods -------------------------------------------------------------

def _check(stage, *arrays):
    for a in arrays:
        if not math.isfinite(a.sum()):
            raise BlowUpError(f"non-finite value in stage {stage}")


def _sym(eta):
    return 0.5 * (eta + eta.T)


def _step_euler(r, eta, dt, sys_):
    dr = rhs_r(r, eta, sys_)
    de = sys_.omega.values(r, sys_.mu) - eta
    _check("k1", dr, de)
    return r + dt * dr, _sym(eta + dt * de)


def _step_rk4(r, eta, dt, sys_):
    mu, om = sys_.mu, sys_.omega

    def f(rr, ee, stage):
        a, b = rhs_r(rr, ee, sys_), om.values(rr, mu) - ee
        _check(stage, a, b)
        return a, b

    k1r, k1e = f(r, eta, "k1")
    k2r, k2e = f(r + 0.5 * dt * k1r, eta + 0.5 * dt * k1e, "k2")
    k3r, k3e = f(r + 0.5 * dt * k2r, eta + 0.5 * dt * k2e, "k3")
    k4r, k4e = f(r + dt * k3r, eta + dt * k3e, "k4")
    r_new = r + dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
    e_new = eta + dt / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e)
    return r_new, _sym(e_new)


def phi_functions(z):
    """``(phi1, phi2, phi3)`` of the exponential integrators at scalar ``z``."""
    if abs(z) <= 1.0:
        # Taylor series phi_k(z) = sum_j z^j / (j + k)!
        out = []
        for k in (1, 2, 3):
            term, total = 1.0 / math.factorial(k), 0.0
            for j in range(30):
                total += term
                term *= z / (j + k + 1)
            out.append(total)
        return tuple(out)
    ez = math.exp(z)
    p1 = (ez - 1.0) / z
    p2 = (p1 - 1.0) / z
    p3 = (p2 - 0.5) / z
    return p1, p2, p3


@dataclass(frozen=True)
class _EtdCoefficients:
    E: float
    E2: float
    Q: float
    f1: float
    f2: float
    f3: float

    @classmethod
    def for_step(cls, dt):
        p1, p2, p3 = phi_functions(-dt)
        half = phi_functions(-0.5 * dt)[0]
        return cls(
            E=math.exp(-dt),
            E2=math.exp(-0.5 * dt),
            Q=0.5 * dt * half,
            f1=dt * (p1 - 3.0 * p2 + 4.0 * p3),
            f2=dt * (2.0 * p2 - 4.0 * p3),
            f3=dt * (4.0 * p3 - p2),
        )


def _step_etdrk4(r, eta, dt, sys_, co=None):
    co = co or _EtdCoefficients.for_step(dt)
    mu, om = sys_.mu, sys_.omega

    def f(rr, ee, stage):
        a, b = rhs_r(rr, ee, sys_), om.values(rr, mu)
        _check(stage, a, b)
        return a, b

    Nr0, Ne0 = f(r, eta, "k1")
    ra, ea = r + 0.5 * dt * Nr0, co.E2 * eta + co.Q * Ne0
    Nra, Nea = f(ra, ea, "k2")
    rb, eb = r + 0.5 * dt * Nra, co.E2 * eta + co.Q * Nea
    Nrb, Neb = f(rb, eb, "k3")
    rc, ec = r + dt * Nrb, co.E2 * ea + co.Q * (2.0 * Neb - Ne0)
    Nrc, Nec = f(rc, ec, "k4")
    r_new = r + dt / 6.0 * (Nr0 + 2.0 * Nra + 2.0 * Nrb + Nrc)
    e_new = co.E * eta + co.f1 * Ne0 + co.f2 * (Nea + Neb) + co.f3 * Nec
    return r_new, _sym(e_new)


def step_rk4(state, dt, system):
    """One classical RK4 step on the concatenated (r, eta) system."""
    if dt <= 0:
        raise InvalidInputError("dt must be > 0")
    r, eta = _step_rk4(state.r, state.eta, dt, system)
    return CoupledState(r, eta, state.t + dt)


def step_eta_exact(state, dt, omega, mu):
    """Exponential update of eta with omega frozen at the current density.

    Exact whenever omega is constant in time.
    """
    if dt <= 0:
        raise InvalidInputError("dt must be > 0")
    w = omega.values(state.r, mu)
    return _sym(math.exp(-dt) * state.eta - math.expm1(-dt) * w)


_STEPPERS = {"euler": _step_euler, "rk4-coupled": _step_rk4, "rk4-with-exact-eta": _step_etdrk4}


def step(state, dt, system, scheme="rk4-with-exact-eta"):
    if scheme not in _STEPPERS:
        raise InvalidInputError(f"unknown scheme {scheme!r}")
    r, eta = _STEPPERS[scheme](state.r, state.eta, dt, system)
    return CoupledState(r, eta, state.t + dt)


# trajectories -------------------------------------------------------------

@dataclass
class Trajectory:
    """Recorded states with per-time diagnostics.

    ``r`` has shape (K, n) and ``eta`` shape (K, n, n).
    """

    times: np.ndarray
    r: np.ndarray
    eta: np.ndarray
    weights: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise InvalidInputError("trajectory times must be strictly increasing")
        if self.r.shape[0] != self.times.shape[0] or self.eta.shape[0] != self.times.shape[0]:
            raise InvalidInputError("trajectory states not aligned with times")
        if not self.diagnostics:
            self.diagnostics = diagnostics_of(self.r, self.eta, self.weights)

    def __len__(self):
        return self.times.shape[0]

    def state(self, k):
        return CoupledState(self.r[k], self.eta[k], float(self.times[k]))

    @property
    def final(self):
        return self.state(-1)

    def truncated(self, k):
        """First ``k`` records."""
        return Trajectory(self.times[:k], self.r[:k], self.eta[:k], self.weights)


def diagnostics_of(r, eta, weights):
    n = r.shape[1]
    mask = ~np.eye(n, dtype=bool)
    if n > 1:
        offd = eta[:, mask]
        eta_min, eta_max = offd.min(axis=1), offd.max(axis=1)
    else:
        eta_min = eta_max = np.zeros(r.shape[0])
    return {
        "mass": r @ weights,
        "r_min": r.min(axis=1),
        "r_max": r.max(axis=1),
        "eta_min": eta_min,
        "eta_max": eta_max,
    }


def integrate(init, system, scheme="rk4-with-exact-eta", dt=1e-3, t_end=1.0, record_stride=1):
    """Fixed-step integration from ``init`` over ``[init.t, init.t + t_end]``.

    Records every ``record_stride`` steps and always the last step.  Raises
    :class:`BlowUpError` (carrying the partial trajectory) if ``r`` stops
    being finite or grows beyond 1e3 times its initial sup norm.
    """
    if not dt > 0 or not t_end > 0:
        raise InvalidInputError("dt and t_end must be > 0")
    if record_stride < 1:
        raise InvalidInputError("record_stride must be >= 1")
    if scheme not in _STEPPERS:
        raise InvalidInputError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    n_steps = max(1, int(round(t_end / dt)))
    stepper = _STEPPERS[scheme]
    extra = {}
    if scheme == "rk4-with-exact-eta":
        extra["co"] = _EtdCoefficients.for_step(dt)
    r, eta = init.r.copy(), init.eta.copy()
    scale = float(np.abs(r).max())
    limit = BLOWUP_FACTOR * (scale if scale > 0 else 1.0)
    rec_t, rec_r, rec_e = [init.t], [r], [eta]

    def partial():
        return Trajectory(np.array(rec_t), np.array(rec_r), np.array(rec_e), system.mu.weights)

    for k in range(1, n_steps + 1):
        try:
            r, eta = stepper(r, eta, dt, system, **extra)
        except BlowUpError as exc:
            raise BlowUpError(f"step {k}: {exc}", partial()) from None
        if not (np.all(np.isfinite(r)) and np.abs(r).max() <= limit):
            raise BlowUpError(f"step {k}: |r| exceeded {limit:.3g}", partial())
        if k % record_stride == 0 or k == n_steps:
            rec_t.append(init.t + k * dt)
            rec_r.append(r)
            rec_e.append(eta)
    return partial()


def mass_drift(traj):
    mass = traj.diagnostics["mass"]
    return float(np.abs(mass - mass[0]).max())


def positivity_check(traj, scale=None):
    """Check ``min_i r_i(t) >= -1e-10 * scale`` at every record (scale = max |r0|)."""
    if scale is None:
        scale = float(np.abs(traj.r[0]).max())
    tol = 1e-10 * scale
    rep = Report()
    bad = traj.r < -tol
    worst = float(-traj.r.min()) if traj.r.size else 0.0
    if np.any(bad):
        k, i = np.argwhere(bad)[0]
        rep.add("positivity", False, worst, (float(traj.times[k]), int(i)))
    else:
        rep.add("positivity", True, max(worst, 0.0))
    return rep


def eta_lower_bound_curve(eta0_min, omega_star, times):
    """``eta0_min e^{-t} + omega_star (1 - e^{-t})``."""
    if omega_star < 0:
        raise InvalidInputError("omega_star must be >= 0")
    t = np.asarray(times, dtype=float)
    return eta0_min * np.exp(-t) - omega_star * np.expm1(-t)


def dtilde_inf(a, b, weights):
    """``sup_t ||r_a - r_b||_{L2_mu} + sup_t max |eta_a - eta_b|`` on aligned grids."""
    if a.r.shape != b.r.shape:
        raise InvalidInputError("trajectories are not aligned")
    dr = np.sqrt(((a.r - b.r) ** 2) @ weights).max()
    de = np.abs(a.eta - b.eta).max()
    return float(dr + de)


# Picard iteration ---------------------------------------------------------

@dataclass
class PicardReport:
    iterations: int
    distances: list
    ratios: list
    converged: bool


def _cumtrapz(values, h):
    out = np.zeros_like(values)
    out[1:] = np.cumsum(0.5 * h * (values[1:] + values[:-1]), axis=0)
    return out


def picard_solve(init, system, horizon, dt=1e-3, max_iters=50, tol=1e-12):
    """Iterate the integral solution map on a fixed grid.

    Each sweep evaluates ``r0 - int rhs`` and ``eta0 + int (omega - eta)`` with
    the composite trapezoid rule.  Stops once consecutive iterates are closer
    than ``tol`` in the ``dtilde_inf`` distance.  Three ratios >= 1 in a row
    raise :class:`HorizonTooLongError`.
    """
    if not horizon > 0 or not dt > 0:
        raise InvalidInputError("horizon and dt must be > 0")
    K = max(1, int(round(horizon / dt)))
    h = horizon / K
    times = init.t + h * np.arange(K + 1)
    m = system.mu.weights
    R = np.repeat(init.r[None, :], K + 1, axis=0)
    E = np.repeat(init.eta[None, :, :], K + 1, axis=0)
    dists, ratios = [], []
    stalled = 0
    for it in range(1, max_iters + 1):
        G = np.array([rhs_r(R[k], E[k], system) for k in range(K + 1)])
        Om = np.array([system.omega.values(R[k], system.mu) for k in range(K + 1)]) - E
        R_new = init.r[None, :] + _cumtrapz(G, h)
        E_new = init.eta[None, :, :] + _cumtrapz(Om, h)
        E_new = 0.5 * (E_new + E_new.transpose(0, 2, 1))
        if not (np.all(np.isfinite(R_new)) and np.all(np.isfinite(E_new))):
            raise HorizonTooLongError(f"iterate {it} is not finite; split the horizon")
        d = float(np.sqrt(((R_new - R) ** 2) @ m).max() + np.abs(E_new - E).max())
        if dists:
            ratio = d / dists[-1] if dists[-1] > 0 else 0.0
            ratios.append(ratio)
            stalled = stalled + 1 if ratio >= 1.0 else 0
        dists.append(d)
        R, E = R_new, E_new
        if d < tol:
            traj = Trajectory(times, R, E, m)
            return traj, PicardReport(it, dists, ratios, True)
        if stalled >= 3:
            raise HorizonTooLongError(
                f"no contraction over horizon {horizon}: ratios {ratios[-3:]}; "
                "split it into shorter sub-intervals"
            )
    return Trajectory(times, R, E, m), PicardReport(max_iters, dists, ratios, False)
