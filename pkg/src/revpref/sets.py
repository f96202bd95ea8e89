"""Feasible consumption sets and the price set.

Two set shapes are supported: an axis-aligned box ``[0, u]`` and the
nonnegative part of a Euclidean ball ``{x >= 0, ||x||_2 <= rho}``. Both are
convex, compact, have nonempty interior and live in the nonnegative orthant,
and both have an exact closed-form Euclidean projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

BOX = "box"
NONNEG_BALL = "nonneg-ball"


def _as_vector(x, n=None, name="x"):
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be a vector, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise InvalidInputError(f"{name} has dimension {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} must be finite")
    return arr


def project_nonneg_ball(x, radius):
    """Euclidean projection onto ``{x >= 0, ||x||_2 <= radius}``.

    Clipping to the orthant and then scaling radially is exact here because
    the ball is centred at the origin, which lies in the orthant.
    """
    y = np.maximum(x, 0.0)
    norm = np.linalg.norm(y)
    if norm > radius:
        y = y * (radius / norm)
    return y


@dataclass(frozen=True)
class FeasibleSet:
    """Consumption set ``C`` shared by all consumers.

    Use :meth:`box` or :meth:`nonneg_ball` to build one.
    """

    kind: str
    n: int
    upper: np.ndarray | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("dimension must be a positive integer")
        if self.kind == BOX:
            u = _as_vector(self.upper, self.n, "upper")
            if np.any(u <= 0):
                raise InvalidInputError("box caps must be positive")
            u = u.copy()
            u.setflags(write=False)
            object.__setattr__(self, "upper", u)
        elif self.kind == NONNEG_BALL:
            if self.radius is None or not np.isfinite(self.radius) or self.radius <= 0:
                raise InvalidInputError("ball radius must be positive and finite")
            object.__setattr__(self, "radius", float(self.radius))
        else:
            raise InvalidInputError(f"unknown set kind {self.kind!r}")

    @classmethod
    def box(cls, upper) -> "FeasibleSet":
        u = _as_vector(upper, name="upper")
        return cls(BOX, u.shape[0], upper=u)

    @classmethod
    def unit_box(cls, n: int) -> "FeasibleSet":
        return cls.box(np.ones(n))

    @classmethod
    def nonneg_ball(cls, radius: float, n: int) -> "FeasibleSet":
        return cls(NONNEG_BALL, int(n), radius=radius)

    @property
    def diameter(self) -> float:
        """l2 diameter ``D``."""
        if self.kind == BOX:
            return float(np.linalg.norm(self.upper))
        # ||x - y||^2 = ||x||^2 + ||y||^2 - 2<x, y> <= 2 rho^2 on the orthant,
        # attained by two distinct scaled basis vectors.
        return self.radius * (np.sqrt(2.0) if self.n > 1 else 1.0)

    @property
    def diameter_inf(self) -> float:
        """l-infinity diameter ``D_inf``."""
        if self.kind == BOX:
            return float(np.max(self.upper))
        return self.radius

    @property
    def is_box(self) -> bool:
        return self.kind == BOX

    def scaled(self, m: float) -> "FeasibleSet":
        """The Minkowski multiple ``m C`` (domain of the cost function)."""
        if m <= 0:
            raise InvalidInputError("scale must be positive")
        if self.kind == BOX:
            return FeasibleSet.box(self.upper * m)
        return FeasibleSet.nonneg_ball(self.radius * m, self.n)

    def project(self, x) -> np.ndarray:
        x = _as_vector(x, self.n)
        if self.kind == BOX:
            return np.clip(x, 0.0, self.upper)
        return project_nonneg_ball(x, self.radius)

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,) or not np.all(np.isfinite(x)):
            return False
        if np.any(x < -tol):
            return False
        if self.kind == BOX:
            return bool(np.all(x <= self.upper + tol))
        return bool(np.linalg.norm(x) <= self.radius + tol)

    def interior_point(self) -> np.ndarray:
        if self.kind == BOX:
            return self.upper / 2.0
        return np.full(self.n, self.radius / (2.0 * np.sqrt(self.n)))

    def sample(self, rng, size: int) -> np.ndarray:
        """Uniform-ish random points of the set, shape ``(size, n)``."""
        if self.kind == BOX:
            return rng.uniform(0.0, 1.0, size=(size, self.n)) * self.upper
        x = np.abs(rng.standard_normal((size, self.n)))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        r = self.radius * rng.uniform(0.0, 1.0, size=(size, 1)) ** (1.0 / self.n)
        return x * r

    def fingerprint(self) -> tuple:
        if self.kind == BOX:
            return (self.kind, tuple(self.upper.tolist()))
        return (self.kind, self.n, self.radius)


def project(feasible: FeasibleSet, x) -> np.ndarray:
    """Euclidean projection of ``x`` onto ``feasible``."""
    return feasible.project(x)


def project_prices(p, lam: float) -> np.ndarray:
    """Projection onto the price set ``{p >= 0, ||p||_2 <= lam}``."""
    if not lam > 0:
        raise InvalidInputError("price radius must be positive")
    return project_nonneg_ball(_as_vector(p, name="p"), float(lam))
