"""Weighted point clouds, edge fields and the nonlocal gradient/divergence.

Vertex densities are plain 1-D float arrays of length ``n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, InvalidInputError

SYMMETRIC = "symmetric"
ANTISYMMETRIC = "antisymmetric"
NONE = "none"
_SYMMETRIES = (SYMMETRIC, ANTISYMMETRIC, NONE)


def as_density(r, n=None):
    """Validate and return a vertex density as a float array."""
    r = np.asarray(r, dtype=float)
    if r.ndim != 1:
        raise InvalidInputError(f"density must be 1-D, got shape {r.shape}")
    if n is not None and r.shape[0] != n:
        raise InvalidInputError(f"density has {r.shape[0]} entries, expected {n}")
    if not np.all(np.isfinite(r)):
        raise InvalidInputError("density has non-finite entries")
    return r


@dataclass(frozen=True)
class BaseMeasure:
    """Vertices ``points`` (n, d) with probability weights ``weights`` (n,)."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.asarray(self.weights, dtype=float)
        if pts.ndim != 2 or w.ndim != 1 or pts.shape[0] != w.shape[0]:
            raise InvalidInputError("points must be (n, d) and weights (n,)")
        if w.shape[0] < 1:
            raise InvalidInputError("need at least one vertex")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(w))):
            raise InvalidInputError("non-finite points or weights")
        if np.any(w <= 0):
            raise InvalidInputError("weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise InvalidInputError(f"weights sum to {w.sum()!r}, not 1")
        n = pts.shape[0]
        if n > 1:
            diff = pts[:, None, :] - pts[None, :, :]
            dist = np.sqrt((diff ** 2).sum(-1)) + np.eye(n)
            if np.any(dist == 0):
                raise InvalidInputError("vertex positions must be pairwise distinct")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def n(self):
        return self.weights.shape[0]

    @property
    def dimension(self):
        return self.points.shape[1]

    def pairwise_sq_distances(self):
        diff = self.points[:, None, :] - self.points[None, :, :]
        return (diff ** 2).sum(-1)

    @classmethod
    def uniform(cls, points):
        pts = np.asarray(points, dtype=float)
        n = pts.shape[0]
        return cls(pts, np.full(n, 1.0 / n))

    @classmethod
    def line(cls, n, weights=None):
        """``n`` equispaced points on [0, 1]; uniform weights unless given."""
        pts = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
        w = np.full(n, 1.0 / n) if weights is None else weights
        return cls(pts, w)


@dataclass(frozen=True)
class EdgeField:
    """Dense n x n edge function with zero diagonal and a symmetry tag."""

    values: np.ndarray
    symmetry: str = NONE
    tol: float = field(default=0.0, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InvalidInputError(f"edge field must be square, got {v.shape}")
        if self.symmetry not in _SYMMETRIES:
            raise InvalidInputError(f"unknown symmetry {self.symmetry!r}")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("edge field has non-finite entries")
        if np.any(np.diag(v) != 0):
            raise InvalidInputError("edge field diagonal must be exactly 0")
        if self.symmetry == SYMMETRIC:
            _check_pair(v, v.T, self.tol, "symmetric")
        elif self.symmetry == ANTISYMMETRIC:
            _check_pair(v, -v.T, self.tol, "antisymmetric")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0]

    def __getitem__(self, idx):
        return self.values[idx]

    @classmethod
    def constant(cls, n, c):
        v = np.full((n, n), float(c))
        np.fill_diagonal(v, 0.0)
        return cls(v, SYMMETRIC)


def _check_pair(a, b, tol, name):
    err = np.abs(a - b)
    if err.max(initial=0.0) > tol:
        i, j = np.unravel_index(np.argmax(err), err.shape)
        raise ContractViolation(f"edge field is not {name} at ({i}, {j})", witness=(int(i), int(j)))


def off_diagonal(values):
    """Off-diagonal entries of a square array, flattened."""
    n = values.shape[0]
    return values[~np.eye(n, dtype=bool)]


def nonlocal_gradient(phi):
    """Edge field ``phi[j] - phi[i]``; exactly antisymmetric."""
    phi = as_density(phi)
    return EdgeField(phi[None, :] - phi[:, None], ANTISYMMETRIC)


def nonlocal_divergence(j, mu):
    """Vertex density ``sum_k j[i, k] m_k`` for an antisymmetric edge field."""
    if not isinstance(j, EdgeField):
        j = EdgeField(j, NONE)
    if j.n != mu.n:
        raise InvalidInputError("edge field and measure sizes differ")
    if j.symmetry != ANTISYMMETRIC:
        _check_pair(j.values, -j.values.T, 0.0, "antisymmetric")
    return j.values @ mu.weights


def adjointness_defect(phi, j, mu):
    """Residual of the discrete integration-by-parts identity.

    Returns ``|sum_i phi_i div(j)_i m_i + 1/2 sum_ij grad(phi)_ij j_ij m_i m_j|``,
    which vanishes for antisymmetric ``j``.
    """
    phi = as_density(phi, mu.n)
    div = nonlocal_divergence(j, mu)
    grad = nonlocal_gradient(phi).values
    m = mu.weights
    jv = j.values if isinstance(j, EdgeField) else np.asarray(j, dtype=float)
    lhs = np.dot(phi * div, m)
    rhs = 0.5 * m @ (grad * jv) @ m
    return float(abs(lhs + rhs))
