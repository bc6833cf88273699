"""Velocity fields V[r], edge feedback omega[r] and the constants they induce.

Every velocity object exposes ``values(r, mu) -> ndarray`` (exactly
antisymmetric) and every omega object ``values(r, mu) -> ndarray`` (exactly
symmetric).  The public ``velocity_from_*`` and ``omega_eval`` wrap them into
validated :class:`EdgeField` objects.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import ContractViolation, InvalidInputError
from .graph import ANTISYMMETRIC, SYMMETRIC, EdgeField, as_density, off_diagonal
from .report import Report


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


# velocity fields -----------------------------------------------------------

@dataclass(frozen=True)
class InteractionKernelSpec:
    """Symmetric bounded kernel table ``K[i, j] = K(x_i, x_j)``.

    The induced velocity is ``V[i, j] = -sum_k (K[j, k] - K[i, k]) r_k m_k``.
    """

    K: np.ndarray
    name: str = "table"
    pointwise = False

    def __post_init__(self):
        K = _frozen(self.K)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise InvalidInputError(f"kernel table must be square, got {K.shape}")
        if not np.all(np.isfinite(K)):
            raise InvalidInputError("kernel table has non-finite entries")
        if np.any(K != K.T):
            raise InvalidInputError("kernel table must be symmetric")
        object.__setattr__(self, "K", K)

    @classmethod
    def gaussian(cls, mu, length):
        if length <= 0:
            raise InvalidInputError("kernel length must be positive")
        d2 = mu.pairwise_sq_distances()
        return cls(np.exp(-d2 / (2.0 * length ** 2)), "gaussian")

    @classmethod
    def quadratic(cls, mu):
        return cls(mu.pairwise_sq_distances(), "quadratic")

    def values(self, r, mu):
        if r.shape[0] != self.K.shape[0] or mu.n != self.K.shape[0]:
            raise InvalidInputError("kernel, density and measure sizes differ")
        c = self.K @ (r * mu.weights)
        return c[:, None] - c[None, :]


@dataclass(frozen=True)
class StaticVelocity:
    """A fixed antisymmetric velocity that ignores the density."""

    V: np.ndarray
    pointwise = False

    def __post_init__(self):
        V = _frozen(self.V)
        EdgeField(V, ANTISYMMETRIC)
        object.__setattr__(self, "V", V)

    def values(self, r, mu):
        if r.shape[0] != self.V.shape[0]:
            raise InvalidInputError("velocity and density sizes differ")
        return self.V


ALPHA_KINDS = ("sigmoid", "tanh-scaled", "identity", "custom")


@dataclass(frozen=True)
class AlphaProfile:
    """Increasing profile ``alpha`` giving the pointwise velocity alpha(r_i) - alpha(r_j).

    Kinds
    -----
    sigmoid      ``1 / (1 + exp(-slope (x - center)))``
    tanh-scaled  ``amplitude * tanh((x - center) / scale)``
    identity     ``x``
    custom       user ``func`` and ``deriv`` (both vectorized)

    ``box = (lo, hi)`` is the working interval; evaluations outside it are
    rejected because the lower bound on alpha' no longer applies there.
    """

    kind: str = "sigmoid"
    slope: float = 1.0
    center: float = 0.0
    scale: float = 1.0
    amplitude: float = 1.0
    box: Optional[tuple] = None
    func: Optional[Callable] = field(default=None, compare=False)
    deriv: Optional[Callable] = field(default=None, compare=False)
    pointwise = True

    def __post_init__(self):
        if self.kind not in ALPHA_KINDS:
            raise InvalidInputError(f"unknown alpha kind {self.kind!r}")
        if self.kind == "custom" and self.func is None:
            raise InvalidInputError("custom alpha needs func")
        if self.slope <= 0 or self.scale <= 0 or self.amplitude <= 0:
            raise InvalidInputError("slope, scale and amplitude must be positive")
        if self.box is not None:
            lo, hi = map(float, self.box)
            if not lo <= hi:
                raise InvalidInputError("alpha box needs lo <= hi")
            object.__setattr__(self, "box", (lo, hi))

    def with_box(self, lo, hi):
        return replace(self, box=(float(lo), float(hi)))

    def alpha(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "sigmoid":
            return 0.5 * (1.0 + np.tanh(0.5 * self.slope * (x - self.center)))
        if self.kind == "tanh-scaled":
            return self.amplitude * np.tanh((x - self.center) / self.scale)
        if self.kind == "identity":
            return x.copy()
        return np.asarray(self.func(x), dtype=float)

    def dalpha(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "sigmoid":
            s = 0.5 * (1.0 + np.tanh(0.5 * self.slope * (x - self.center)))
            return self.slope * s * (1.0 - s)
        if self.kind == "tanh-scaled":
            return self.amplitude / self.scale / np.cosh((x - self.center) / self.scale) ** 2
        if self.kind == "identity":
            return np.ones_like(x)
        if self.deriv is not None:
            return np.asarray(self.deriv(x), dtype=float)
        h = 1e-6
        return (self.alpha(x + h) - self.alpha(x - h)) / (2 * h)

    def _require_box(self):
        if self.box is None:
            raise InvalidInputError("alpha profile has no working box")
        return self.box

    def alpha_prime_star(self):
        """Infimum of alpha' on the box (attained at an endpoint for unimodal alpha')."""
        lo, hi = self._require_box()
        if self.kind == "custom":
            return float(self.dalpha(np.linspace(lo, hi, 2001)).min())
        return float(min(self.dalpha(lo), self.dalpha(hi)))

    def alpha_prime_sup(self):
        lo, hi = self._require_box()
        if self.kind == "custom":
            return float(self.dalpha(np.linspace(lo, hi, 2001)).max())
        return float(self.dalpha(np.clip(self.center, lo, hi)))

    def oscillation(self):
        """``alpha(hi) - alpha(lo)``, the sup of |V| over the box."""
        lo, hi = self._require_box()
        if self.kind == "custom":
            a = self.alpha(np.linspace(lo, hi, 2001))
            return float(a.max() - a.min())
        return float(self.alpha(hi) - self.alpha(lo))

    def values(self, r, mu=None):
        if self.box is not None:
            lo, hi = self.box
            tol = 1e-9 * max(1.0, abs(lo), abs(hi))
            if r.min() < lo - tol or r.max() > hi + tol:
                i = int(np.argmax(np.maximum(lo - r, r - hi)))
                raise ContractViolation(
                    f"density {r[i]!r} at vertex {i} leaves the alpha box [{lo}, {hi}]",
                    witness=(i, float(r[i])),
                )
        a = self.alpha(r)
        return a[:, None] - a[None, :]


def velocity_from_kernel(spec, r, mu):
    r = as_density(r, mu.n)
    return EdgeField(spec.values(r, mu), ANTISYMMETRIC)


def velocity_from_alpha(alpha, r):
    r = as_density(r)
    return EdgeField(alpha.values(r), ANTISYMMETRIC)


def monotonicity_suite(alpha, samples=10_000, seed=0):
    """Randomized check of the monotonic-velocity conditions for ``alpha``.

    With ``V(a, c) = alpha(a) - alpha(c)``:

    * ``a > b`` gives ``V+(a, c) >= V+(b, c)``, strictly once ``a > c``;
    * ``a < b`` gives ``V-(a, c) >= V-(b, c)``, strictly once ``a < c``;
    * ``a = b`` gives equal velocities;
    * ``V(a, a) = 0``.

    The strict parts only apply where the positive (negative) part can be
    nonzero, otherwise no increasing profile could satisfy them.
    """
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    lo, hi = alpha.box if alpha.box is not None else (0.0, 2.0)
    rng = np.random.default_rng(seed)
    a, b, c = (rng.uniform(lo, hi, samples) for _ in range(3))
    gap = 1e-8 * max(1.0, hi - lo)
    V = lambda x, y: alpha.alpha(x) - alpha.alpha(y)
    rep = Report()

    def record(name, bad, excess, args):
        if np.any(bad):
            k = int(np.argmax(bad))
            rep.add(name, False, float(excess[k]), tuple(float(x[k]) for x in args))
        else:
            rep.add(name, True, float(np.max(excess, initial=0.0)))

    hi_, lo_ = np.maximum(a, b), np.minimum(a, b)
    vp_hi = np.maximum(V(hi_, c), 0.0)
    vp_lo = np.maximum(V(lo_, c), 0.0)
    distinct = hi_ - lo_ > gap
    strict = distinct & (hi_ - c > gap)
    bad = distinct & ((vp_hi < vp_lo) | (strict & (vp_hi <= vp_lo)))
    record("outflow_order", bad, vp_lo - vp_hi, (hi_, lo_, c))

    vm_lo = np.maximum(-V(lo_, c), 0.0)
    vm_hi = np.maximum(-V(hi_, c), 0.0)
    strict = distinct & (c - lo_ > gap)
    bad = distinct & ((vm_lo < vm_hi) | (strict & (vm_lo <= vm_hi)))
    record("inflow_order", bad, vm_hi - vm_lo, (lo_, hi_, c))

    diff = np.abs(V(a, c) - V(a.copy(), c))
    record("equal_arguments", diff > 0, diff, (a, c))

    self_v = np.abs(V(a, a))
    record("zero_on_diagonal", self_v > 0, self_v, (a,))
    return rep


# edge feedback ---------------------------------------------------------------

@dataclass(frozen=True)
class OmegaSpec:
    """Edge feedback ``omega[r]``: a constant or ``sum_k W[i, j, k] r_k m_k``.

    ``omega_star`` is a declared lower bound, checked on every evaluation with
    a nonnegative density.
    """

    kind: str = "constant"
    c: float = 1.0
    W: Optional[np.ndarray] = None
    omega_star: Optional[float] = None

    def __post_init__(self):
        if self.kind == "constant":
            if not np.isfinite(self.c):
                raise InvalidInputError("omega constant must be finite")
            if self.omega_star is None:
                object.__setattr__(self, "omega_star", float(self.c))
        elif self.kind == "kernel":
            if self.W is None:
                raise InvalidInputError("kernel omega needs a table W")
            W = _frozen(self.W)
            if W.ndim != 3 or W.shape[0] != W.shape[1] or W.shape[1] != W.shape[2]:
                raise InvalidInputError(f"omega table must be (n, n, n), got {W.shape}")
            if not np.all(np.isfinite(W)):
                raise InvalidInputError("omega table has non-finite entries")
            if np.any(W != W.transpose(1, 0, 2)):
                raise InvalidInputError("omega table must be symmetric in its first two indices")
            object.__setattr__(self, "W", W)
        else:
            raise InvalidInputError(f"unknown omega kind {self.kind!r}")

    @classmethod
    def constant(cls, c):
        return cls("constant", float(c))

    @classmethod
    def kernel(cls, W, omega_star=None):
        return cls("kernel", W=W, omega_star=omega_star)

    @classmethod
    def ones(cls, n, omega_star=None):
        return cls.kernel(np.ones((n, n, n)), omega_star)

    @classmethod
    def gaussian(cls, mu, length, omega_star=None):
        d2 = mu.pairwise_sq_distances()
        W = np.exp(-(d2[:, None, :] + d2[None, :, :]) / (2.0 * length ** 2))
        return cls.kernel(W, omega_star)

    def values(self, r, mu):
        n = r.shape[0]
        if self.kind == "constant":
            out = np.full((n, n), self.c)
        else:
            if self.W.shape[0] != n or mu.n != n:
                raise InvalidInputError("omega table, density and measure sizes differ")
            out = self.W @ (r * mu.weights)
            out = 0.5 * (out + out.T)
        np.fill_diagonal(out, 0.0)
        if self.kind == "kernel" and self.omega_star is not None and n > 1 and r.min() >= 0:
            offd = off_diagonal(out)
            k = int(np.argmin(offd))
            tol = 1e-9 * max(1.0, abs(self.omega_star))
            if offd[k] < self.omega_star - tol:
                raise ContractViolation(
                    f"omega value {offd[k]!r} below declared omega_star {self.omega_star!r}",
                    witness=float(offd[k]),
                )
        return out

    def bound(self, mass_abs):
        """Sup-norm bound given ``sum_k |r_k| m_k``."""
        if self.kind == "constant":
            return abs(self.c)
        return float(np.abs(self.W).max() * mass_abs)

    def lipschitz(self, mu):
        if self.kind == "constant":
            return 0.0
        return float(np.sqrt((self.W ** 2 @ mu.weights).max()))


def omega_eval(spec, r, mu):
    r = as_density(r, mu.n)
    return EdgeField(spec.values(r, mu), SYMMETRIC)


# constants ---------------------------------------------------------------

@dataclass(frozen=True)
class BoundsLedger:
    """Scalar constants of the a priori, stability and long-time estimates.

    ``C_V`` bounds ``|V|`` pointwise and ``C_V_L2`` bounds
    ``sup_i sum_j V_ij^2 m_j``.  All entries are nonnegative except the
    signed mass ``M``.
    """

    L_Phi: float
    C_V: float
    C_V_L2: float
    L_V: float
    C_omega: float
    L_omega: float
    omega_star: float
    eta_star: float
    alpha_prime_star: float
    M: float
    norm_r0_inf: float
    norm_r0_L2: float
    norm_eta0_inf: float
    eta0_min: float
    r0_min: float
    mu_K: float

    def __post_init__(self):
        for name, val in self.__dict__.items():
            if not np.isfinite(val):
                raise InvalidInputError(f"ledger entry {name} is not finite")
            if name not in ("M", "eta0_min", "r0_min") and val < 0:
                raise InvalidInputError(f"ledger entry {name} is negative")

    @property
    def eta_bound(self):
        """Sup bound on |eta| along the run."""
        return self.norm_eta0_inf + self.C_omega


def constants_of(flux, velocity, omega, eta0, r0, mu):
    """Collect the ledger for a scenario.

    Alpha velocities get their box set to ``[0, max r0]`` when none is given.
    Kernel velocities use the certificate
    ``|V_ij| <= max_k |K_ik - K_jk| * sum_k |r_k| m_k``, valid along any run
    that keeps ``r >= 0`` (mass is conserved).
    """
    r0 = as_density(r0, mu.n)
    eta0 = eta0.values if isinstance(eta0, EdgeField) else np.asarray(eta0, dtype=float)
    m = mu.weights
    M = float(r0 @ m)
    l1 = float(np.abs(r0) @ m)
    norm_inf = float(np.abs(r0).max())
    norm_l2 = float(np.sqrt((r0 ** 2) @ m))
    eta_offd = off_diagonal(eta0) if mu.n > 1 else np.zeros(1)
    eta0_min = float(eta_offd.min())
    eta0_inf = float(np.abs(eta_offd).max())

    aps = 0.0
    if isinstance(velocity, AlphaProfile):
        alpha = velocity if velocity.box is not None else velocity.with_box(0.0, norm_inf)
        C_V = alpha.oscillation()
        C_V_L2 = C_V ** 2
        L_V = 2.0 * alpha.alpha_prime_sup()
        aps = alpha.alpha_prime_star()
    elif isinstance(velocity, InteractionKernelSpec):
        K = velocity.K
        spread = np.abs(K[:, None, :] - K[None, :, :]).max()
        C_V = float(spread * l1)
        C_V_L2 = C_V ** 2
        L_V = float(2.0 * np.sqrt((K ** 2 @ m).max()))
    elif isinstance(velocity, StaticVelocity):
        V = velocity.V
        C_V = float(np.abs(V).max())
        C_V_L2 = float(((V ** 2) @ m).max())
        L_V = 0.0
    else:
        raise InvalidInputError(f"unsupported velocity {type(velocity).__name__}")

    C_omega = omega.bound(l1)
    if omega.omega_star is not None:
        omega_star = float(omega.omega_star)
    elif np.all(r0 >= 0) and mu.n > 1:
        W = omega.W
        offd = W[~np.eye(mu.n, dtype=bool)]
        omega_star = float(max(offd.min(), 0.0) * M)
    else:
        omega_star = 0.0
    eta_star = max(min(eta0_min, omega_star), 0.0)
    return BoundsLedger(
        L_Phi=float(flux.lipschitz),
        C_V=C_V,
        C_V_L2=C_V_L2,
        L_V=L_V,
        C_omega=float(C_omega),
        L_omega=omega.lipschitz(mu),
        omega_star=max(omega_star, 0.0),
        eta_star=eta_star,
        alpha_prime_star=aps,
        M=M,
        norm_r0_inf=norm_inf,
        norm_r0_L2=norm_l2,
        norm_eta0_inf=eta0_inf,
        eta0_min=eta0_min,
        r0_min=float(r0.min()),
        mu_K=float(m.sum()),
    )
