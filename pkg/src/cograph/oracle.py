"""Deliberately naive reference computations used to cross-check the fast paths."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

from .dynamics import BLOWUP_FACTOR, Trajectory, integrate, rhs
from .errors import BlowUpError, InvalidInputError
from .report import Report

MAX_ATOMS = 4


def reference_integrate(init, system, dt_fine, t_end, record_every=None, levels=1):
    """Explicit Euler with step ``dt_fine``, optionally Richardson-extrapolated.

    ``levels > 1`` reruns Euler with steps ``dt_fine / 2**k`` and eliminates
    the leading error terms, still using nothing but Euler steps.  Records
    every ``record_every`` time units (default: every step of the coarsest run).
    """
    if not dt_fine > 0 or not t_end > 0 or levels < 1:
        raise InvalidInputError("dt_fine, t_end must be > 0 and levels >= 1")
    n_coarse = int(round(t_end / dt_fine))
    stride = 1 if record_every is None else max(1, int(round(record_every / dt_fine)))
    runs = [_euler_run(init, system, dt_fine / 2 ** k, n_coarse * 2 ** k, stride * 2 ** k)
            for k in range(levels)]
    times = runs[0][0]
    # Aitken-Neville tableau for errors in powers of h with ratio 2
    table_r = [run[1] for run in runs]
    table_e = [run[2] for run in runs]
    for j in range(1, levels):
        f = 2.0 ** j
        table_r = [(f * table_r[i + 1] - table_r[i]) / (f - 1.0) for i in range(len(table_r) - 1)]
        table_e = [(f * table_e[i + 1] - table_e[i]) / (f - 1.0) for i in range(len(table_e) - 1)]
    return Trajectory(times, table_r[0], table_e[0], system.mu.weights)


def _euler_run(init, system, h, steps, stride):
    r, eta = init.r.copy(), init.eta.copy()
    scale = max(float(np.abs(r).max()), 1.0)
    ts, rs, es = [init.t], [r], [eta]
    for k in range(1, steps + 1):
        dr, de = rhs(SimpleNamespace(r=r, eta=eta), system)
        r = r + h * dr
        eta = eta + h * de
        eta = 0.5 * (eta + eta.T)
        if not np.all(np.isfinite(r)) or np.abs(r).max() > BLOWUP_FACTOR * scale:
            raise BlowUpError(f"reference integrator blew up at step {k}")
        if k % stride == 0 or k == steps:
            ts.append(init.t + k * h)
            rs.append(r)
            es.append(eta)
    return np.array(ts), np.array(rs), np.array(es)


def _plan_cost(plan, xa, xb, p):
    return float((plan * np.abs(xa[:, None] - xb[None, :]) ** p).sum())


def _north_west(wa, wb):
    plan = np.zeros((wa.size, wb.size))
    ra, rb = wa.copy(), wb.copy()
    i = j = 0
    while i < wa.size and j < wb.size:
        q = min(ra[i], rb[j])
        plan[i, j] = q
        ra[i] -= q
        rb[j] -= q
        if ra[i] <= rb[j]:
            i += 1
        else:
            j += 1
    return plan


def _vertex_plans(wa, wb):
    # basic solutions: m + n - 1 cells, solve the marginal equations exactly
    m, n = wa.size, wb.size
    cells = [(i, j) for i in range(m) for j in range(n)]
    rhs_ = np.concatenate([wa, wb])
    for chosen in itertools.combinations(range(len(cells)), m + n - 1):
        A = np.zeros((m + n, m + n - 1))
        for col, c in enumerate(chosen):
            i, j = cells[c]
            A[i, col] = 1.0
            A[m + j, col] = 1.0
        sol, *_ = np.linalg.lstsq(A, rhs_, rcond=None)
        if np.abs(A @ sol - rhs_).max() > 1e-12 or sol.min() < -1e-14:
            continue
        plan = np.zeros((m, n))
        for col, c in enumerate(chosen):
            plan[cells[c]] = max(sol[col], 0.0)
        yield plan


def bruteforce_wp(a, b, p=2, full_enumeration=None):
    """Optimal transport cost by scanning basic feasible couplings.

    Candidates are north-west-corner plans for every ordering of both atom
    lists; for small problems every vertex of the coupling polytope is added.
    """
    if a.positions.size > MAX_ATOMS or b.positions.size > MAX_ATOMS:
        raise InvalidInputError(f"brute force supports at most {MAX_ATOMS} atoms per side")
    xa, wa, xb, wb = a.positions, a.weights, b.positions, b.weights
    if full_enumeration is None:
        full_enumeration = xa.size * xb.size <= 9
    best = np.inf
    for pa in itertools.permutations(range(xa.size)):
        for pb in itertools.permutations(range(xb.size)):
            pa_, pb_ = np.array(pa), np.array(pb)
            plan = _north_west(wa[pa_], wb[pb_])
            best = min(best, _plan_cost(plan, xa[pa_], xb[pb_], p))
    if full_enumeration:
        for plan in _vertex_plans(wa, wb):
            best = min(best, _plan_cost(plan, xa, xb, p))
    return float(best ** (1.0 / p))


def bruteforce_w2(a, b):
    return bruteforce_wp(a, b, 2)


@dataclass(frozen=True)
class BernoulliParams:
    """``y' = a y - b y^2`` with ``y(0) = y0``."""

    a: float
    b: float
    y0: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and self.y0 >= 0):
            raise InvalidInputError("need a > 0, b > 0 and y0 >= 0")


def bernoulli_closed_form(params, times):
    """``y0 a e^{at} / (a + b y0 (e^{at} - 1))``."""
    t = np.asarray(times, dtype=float)
    a, b, y0 = params.a, params.b, params.y0
    e = np.exp(a * t)
    return y0 * a * e / (a + b * y0 * (e - 1.0))


def comparison_lemma_check(f_samples, g_samples, times=None, direction="upper", phi=None, rtol=1e-6):
    """Check ``f <= g`` (``direction="upper"``) or ``f >= g`` pointwise.

    If ``phi`` is given, ``g`` is also checked to solve ``g' = phi(g)`` in
    integral form with the trapezoid rule.  That quadrature error is O(h^2) in
    the sample spacing, so the samples must resolve ``g`` to within ``rtol``.
    """
    f = np.asarray(f_samples, dtype=float)
    g = np.asarray(g_samples, dtype=float)
    if f.shape != g.shape:
        raise InvalidInputError("f and g samples are not aligned")
    if direction not in ("upper", "lower"):
        raise InvalidInputError("direction must be 'upper' or 'lower'")
    scale = max(1.0, float(np.abs(g).max(initial=0.0)))
    tol = rtol * scale
    gap = f - g if direction == "upper" else g - f
    rep = Report()
    bad = gap > tol
    t = np.arange(f.size, dtype=float) if times is None else np.asarray(times, dtype=float)
    if np.any(bad):
        k = int(np.argmax(bad))
        rep.add("comparison", False, float(gap.max()), float(t[k]))
    else:
        rep.add("comparison", True, float(max(gap.max(initial=0.0), 0.0)))
    if phi is not None:
        vals = phi(g)
        integral = np.concatenate(([0.0], np.cumsum(0.5 * np.diff(t) * (vals[1:] + vals[:-1]))))
        resid = np.abs(g - g[0] - integral).max()
        rep.add("g_solves_equality", resid <= tol, float(resid))
    return rep


def convergence_study(init, system, scheme, dts, t_end, reference):
    """Final-time errors of ``scheme`` against ``reference`` and their successive ratios.

    The error is the larger of the sup-norm gaps in ``r`` and in ``eta``.
    """
    errors = []
    for dt in dts:
        traj = integrate(init, system, scheme, dt, t_end)
        errors.append(max(float(np.abs(traj.r[-1] - reference.r[-1]).max()),
                          float(np.abs(traj.eta[-1] - reference.eta[-1]).max())))
    ratios = [errors[k] / errors[k + 1] for k in range(len(errors) - 1)]
    return errors, ratios
