"""One-dimensional transport distances, disintegrated metrics and bound curves."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, InvalidInputError
from .graph import ANTISYMMETRIC, SYMMETRIC, EdgeField, as_density

NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class AtomSet1D:
    """Discrete probability measure on the real line."""

    positions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = np.array(self.positions, dtype=float).ravel()
        w = np.array(self.weights, dtype=float).ravel()
        if x.shape != w.shape or x.size == 0:
            raise InvalidInputError("positions and weights must be non-empty and aligned")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(w))):
            raise InvalidInputError("atoms must be finite")
        if np.any(w <= 0):
            raise InvalidInputError("atom weights must be positive")
        if abs(w.sum() - 1.0) > NORMALIZATION_TOL * w.size:
            raise ContractViolation(f"atom weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "weights", w)

    @classmethod
    def dirac(cls, x):
        return cls(np.array([float(x)]), np.array([1.0]))

    def second_moment(self):
        return float(self.weights @ self.positions ** 2)


def _quantile_table(s):
    order = np.argsort(s.positions, kind="stable")
    cum = np.cumsum(s.weights[order])
    cum[-1] = 1.0
    return s.positions[order], cum


def wasserstein_1d(p, a, b):
    """W_p between two atom sets via the monotone (quantile) coupling."""
    if p not in (1, 2):
        raise InvalidInputError("p must be 1 or 2")
    xa, ca = _quantile_table(a)
    xb, cb = _quantile_table(b)
    breaks = np.union1d(ca, cb)
    lower = np.concatenate(([0.0], breaks[:-1]))
    mass = breaks - lower
    mid = 0.5 * (breaks + lower)
    ia = np.minimum(np.searchsorted(ca, mid), xa.size - 1)
    ib = np.minimum(np.searchsorted(cb, mid), xb.size - 1)
    cost = mass @ np.abs(xa[ia] - xb[ib]) ** p
    return float(cost ** (1.0 / p))


def _same_marginal(s1, s2):
    w1, w2 = np.asarray(s1.mu.weights), np.asarray(s2.mu.weights)
    if w1.shape != w2.shape or np.any(w1 != w2):
        raise InvalidInputError("disintegrations do not share the vertex measure")
    return w1


def l2mu_d2(sigma1, sigma2):
    """``(sum_i m_i W2(sigma1_i, sigma2_i)^2)^{1/2}`` for disintegrations on the same graph."""
    m = _same_marginal(sigma1, sigma2)
    d2 = np.array([
        wasserstein_1d(2, sigma1.vertex_atoms(i), sigma2.vertex_atoms(i)) ** 2
        for i in range(m.size)
    ])
    return float(np.sqrt(d2 @ m))


def dmu_sup(traj1, traj2):
    """Sup over recorded times of :func:`l2mu_d2`."""
    t1, t2 = np.asarray(traj1.times), np.asarray(traj2.times)
    if t1.shape != t2.shape or np.any(t1 != t2):
        raise InvalidInputError("trajectories are recorded on different time grids")
    return max(l2mu_d2(traj1.at(k), traj2.at(k)) for k in range(t1.size))


def _values(field, symmetry):
    if isinstance(field, EdgeField):
        v = field.values
        if field.symmetry != symmetry:
            EdgeField(v, symmetry)
        return v
    return EdgeField(field, symmetry).values


def contraction_dissipation(r1, r2, V, eta, mu, flux=None):
    """Exact rate of change of the squared distance and its upper bound.

    For two upwind solutions driven by the same density-independent ``V``
    and ``eta``, with ``D = r1 - r2``:

    * ``derivative``: ``-2 sum_i m_i D_i [D_i sum_j V+_ij eta_ij m_j - sum_j D_j V-_ij eta_ij m_j]``
    * ``bound``: ``-sum_i m_i D_i^2 sum_j V_ij eta_ij m_j``

    and ``derivative <= bound`` always.
    """
    if flux is not None and not flux.is_upwind:
        raise ContractViolation("dissipation identity needs the upwind flux")
    try:
        Vv = _values(V, ANTISYMMETRIC)
        ev = _values(eta, SYMMETRIC)
    except (ContractViolation, InvalidInputError) as exc:
        raise ContractViolation(f"hypotheses unmet: {exc}") from None
    m = mu.weights
    D = as_density(r1, mu.n) - as_density(r2, mu.n)
    vp = np.maximum(Vv, 0.0) * ev
    vm = np.maximum(-Vv, 0.0) * ev
    inner = D * (vp @ m) - vm @ (D * m)
    derivative = -2.0 * float((m * D) @ inner)
    bound = -float((m * D ** 2) @ ((Vv * ev) @ m))
    return derivative, bound


def _bernoulli(y0, rate, a_over_b, times):
    # y' = rate y (1 - y / a_over_b), written to avoid overflow in e^{rate t}
    t = np.asarray(times, dtype=float)
    decay = np.exp(-rate * t)
    return y0 / (decay + (y0 / a_over_b) * (1.0 - decay))


def _bound_rate(ledger, eta_star):
    eta_star = ledger.eta_star if eta_star is None else float(eta_star)
    for name, val in (("M", ledger.M), ("eta_star", eta_star),
                      ("alpha_prime_star", ledger.alpha_prime_star), ("mu_K", ledger.mu_K)):
        if not val > 0:
            raise InvalidInputError(f"bound curve needs {name} > 0, got {val!r}")
    return ledger.alpha_prime_star * eta_star * ledger.M, ledger.M / ledger.mu_K


def sup_bound_curve(ledger, times, eta_star=None):
    """Upper Bernoulli envelope for ``max_i r_i(t)``.

    Starts at ``||r0||_inf`` and tends to ``M / mu(K)``.  ``eta_star`` overrides
    the ledger value, for instance with the infimum measured along a run.
    """
    rate, limit = _bound_rate(ledger, eta_star)
    return _bernoulli(ledger.norm_r0_inf, rate, limit, times)


def inf_bound_curve(ledger, r0_min, times, eta_star=None):
    """Lower Bernoulli envelope for ``min_i r_i(t)`` starting at ``r0_min``."""
    if r0_min < 0:
        raise InvalidInputError("r0_min must be >= 0")
    rate, limit = _bound_rate(ledger, eta_star)
    return _bernoulli(float(r0_min), rate, limit, times)


def diameter(r):
    """``max r - min r``; row-wise for a (K, n) array."""
    r = np.asarray(r, dtype=float)
    d = np.ptp(r, axis=-1)
    return float(d) if r.ndim == 1 else d
