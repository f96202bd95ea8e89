"""Producer cost functions on the aggregate domain ``m C``.

All families share one form, ``c(y) = <b, y> + kappa ||y||^2 / 2`` with
``b >= 0`` and ``kappa >= 0``, so every cost is convex, nondecreasing on the
orthant, separable across goods and has ``c(0) = 0``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInputError
from .sets import FeasibleSet

ZERO = "zero"
LINEAR = "linear"
QUADRATIC_CLIPPED = "quadratic-clipped"


class CostFunction:
    def __init__(self, n: int, linear=None, kappa: float = 0.0, family: str | None = None):
        b = np.zeros(n) if linear is None else np.asarray(linear, dtype=float).reshape(-1)
        if b.shape != (n,):
            raise InvalidInputError("linear coefficient has wrong dimension")
        if np.any(b < 0) or not np.all(np.isfinite(b)):
            raise InvalidInputError("linear cost coefficients must be finite and nonnegative")
        if kappa < 0 or not math.isfinite(kappa):
            raise InvalidInputError("kappa must be finite and nonnegative")
        self.n = n
        self.b = b
        self.b.setflags(write=False)
        self.kappa = float(kappa)
        if family is None:
            family = QUADRATIC_CLIPPED if kappa > 0 else (LINEAR if np.any(b > 0) else ZERO)
        self.family = family

    @classmethod
    def zero(cls, n: int) -> "CostFunction":
        return cls(n, family=ZERO)

    @classmethod
    def linear(cls, coef) -> "CostFunction":
        coef = np.asarray(coef, dtype=float).reshape(-1)
        return cls(coef.shape[0], coef, family=LINEAR)

    @classmethod
    def quadratic_clipped(cls, lam: float, domain: FeasibleSet, linear=None) -> "CostFunction":
        """Quadratic cost whose curvature makes the largest gradient norm on ``domain`` equal ``lam``."""
        b = np.zeros(domain.n) if linear is None else np.asarray(linear, dtype=float)
        nb = float(np.linalg.norm(b))
        if lam < nb:
            raise InvalidInputError("lam must be at least ||linear||")
        if domain.is_box:
            U = domain.upper
            # ||b + kappa U||^2 = lam^2, positive root in kappa
            A, B, C = float(U @ U), 2.0 * float(b @ U), nb * nb - lam * lam
            kappa = (-B + math.sqrt(B * B - 4 * A * C)) / (2 * A)
        else:
            kappa = (lam - nb) / domain.radius
        return cls(domain.n, b, kappa, family=QUADRATIC_CLIPPED)

    def value(self, y) -> float:
        y = np.asarray(y, dtype=float)
        return float(self.b @ y + 0.5 * self.kappa * (y @ y))

    def good_value(self, j: int, yj):
        return self.b[j] * yj + 0.5 * self.kappa * yj * yj

    def gradient(self, y) -> np.ndarray:
        return self.b + self.kappa * np.asarray(y, dtype=float)

    def lipschitz(self, domain: FeasibleSet) -> float:
        """Exact l2 Lipschitz modulus of ``c`` on ``domain``."""
        if domain.is_box:
            return float(np.linalg.norm(self.b + self.kappa * domain.upper))
        return float(np.linalg.norm(self.b) + self.kappa * domain.radius)

    def good_lipschitz(self, domain: FeasibleSet) -> np.ndarray:
        """Per-good moduli of ``c_j`` on ``[0, U_j]`` (box domains)."""
        return self.b + self.kappa * domain.upper

    @property
    def is_zero(self) -> bool:
        return self.kappa == 0 and not np.any(self.b > 0)

    def supply(self, p, domain: FeasibleSet, mu: float = 0.0):
        """Maximize ``<p, y> - c(y) - mu ||y||^2 / 2`` over ``domain``.

        Returns ``(value, y)``. With zero total curvature the maximizer is not
        unique; the coordinatewise smallest one is returned (0 on ties).
        """
        if mu < 0:
            raise InvalidInputError("mu must be nonnegative")
        p = np.asarray(p, dtype=float)
        g = p - self.b
        s = self.kappa + mu
        if s > 0:
            y = domain.project(g / s)
        elif domain.is_box:
            y = np.where(g > 0, domain.upper, 0.0)
        else:
            gp = np.maximum(g, 0.0)
            norm = float(np.linalg.norm(gp))
            y = gp * (domain.radius / norm) if norm > 0 else np.zeros(self.n)
        value = float(p @ y) - self.value(y) - 0.5 * mu * float(y @ y)
        return value, y

    def fingerprint(self):
        return (self.family, tuple(self.b.tolist()), self.kappa)

    def __repr__(self):
        return f"CostFunction(family={self.family!r}, b={self.b.tolist()}, kappa={self.kappa:g})"
