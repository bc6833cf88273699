"""Flux interpolations: upwind and the two product means, plus user-defined ones."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidInputError
from .report import Report

KINDS = ("upwind", "product-mean", "product-max")


def _upwind(a, b, v):
    return a * np.maximum(v, 0.0) - b * np.maximum(-v, 0.0)


def _product_mean(a, b, v):
    return 0.5 * (a + b) * v


def _product_max(a, b, v):
    return np.maximum(a, b) * v


_BUILTIN = {"upwind": _upwind, "product-mean": _product_mean, "product-max": _product_max}


@dataclass(frozen=True)
class FluxInterpolation:
    """Ternary map ``Phi(a, b; v)`` with a declared Lipschitz constant.

    ``kind="custom"`` requires ``func`` (vectorized over numpy arrays) and ``lipschitz``.
    """

    kind: str = "upwind"
    func: Optional[Callable] = None
    lipschitz: float = 1.0

    def __post_init__(self):
        if self.kind == "custom":
            if self.func is None:
                raise InvalidInputError("custom flux needs a function")
        elif self.kind not in _BUILTIN:
            raise InvalidInputError(f"unknown flux kind {self.kind!r}; choose from {KINDS}")
        elif self.func is not None:
            raise InvalidInputError("func is only accepted for kind='custom'")
        if not (np.isfinite(self.lipschitz) and self.lipschitz > 0):
            raise InvalidInputError("lipschitz constant must be positive")

    @classmethod
    def custom(cls, func, lipschitz):
        return cls("custom", func, float(lipschitz))

    def __call__(self, a, b, v):
        """Vectorized evaluation (broadcasting); no input validation."""
        f = self.func if self.kind == "custom" else _BUILTIN[self.kind]
        return f(a, b, v)

    def eval(self, a, b, v):
        """Scalar evaluation with finiteness checks."""
        vals = (a, b, v)
        if not all(np.isfinite(x) for x in vals):
            raise InvalidInputError(f"non-finite flux arguments {vals}")
        return float(self(float(a), float(b), float(v)))

    @property
    def is_upwind(self):
        return self.kind == "upwind"


def admissibility_suite(phi, samples=10_000, seed=0):
    """Randomized check of the admissibility axioms of ``phi``.

    Properties: degeneracy in the velocity and in the densities, both
    Lipschitz inequalities with the declared constant, positive one-homogeneity
    and joint antisymmetry.  Each entry keeps the worst excess and its inputs.
    """
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    L = phi.lipschitz

    def draw():
        x = rng.uniform(-5.0, 5.0, samples)
        # exact zeros and ties exercise the kinks
        x[rng.random(samples) < 0.05] = 0.0
        return x

    a, b, c, d, v, w = (draw() for _ in range(6))
    b = np.where(rng.random(samples) < 0.05, a, b)
    alpha = np.exp(rng.uniform(-3.0, 3.0, samples))
    rep = Report()

    def record(name, excess, scale, args):
        tol = 1e-12 * np.maximum(1.0, scale)
        bad = excess - tol
        k = int(np.argmax(bad))
        witness = tuple(float(x[k]) for x in args)
        rep.add(name, bad[k] <= 0, max(float(excess[k]), 0.0), witness)

    zero = np.zeros(samples)
    out = np.abs(phi(a, b, zero))
    record("degeneracy_velocity", out, zero, (a, b, zero))
    out = np.abs(phi(zero, zero, v))
    record("degeneracy_density", out, zero, (zero, zero, v))

    lhs = np.abs(phi(a, b, w) - phi(a, b, v))
    rhs = L * (np.abs(a) + np.abs(b)) * np.abs(w - v)
    record("lipschitz_velocity", lhs - rhs, rhs, (a, b, w, v))

    lhs = np.abs(phi(a, b, v) - phi(c, d, v))
    rhs = L * (np.abs(a - c) + np.abs(b - d)) * np.abs(v)
    record("lipschitz_density", lhs - rhs, rhs, (a, b, c, d, v))

    lhs = phi(alpha * a, alpha * b, w)
    rhs = alpha * phi(a, b, w)
    record("homogeneity", np.abs(lhs - rhs), np.abs(rhs), (alpha, a, b, w))

    lhs = phi(a, b, -v)
    rhs = -phi(b, a, v)
    record("joint_antisymmetry", np.abs(lhs - rhs), np.abs(rhs), (a, b, v))
    return rep
