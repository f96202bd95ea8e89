"""Consumer valuation families and their demand solvers.

A valuation is a concave function on the consumption set. Besides value and
supergradient evaluation, every valuation knows how to compute its demand,
i.e. the bundle that maximizes ``v(x) - <p, x>`` over the feasible set.
Closed forms are used wherever the family admits one; the generic fallback
is projected gradient ascent with step ``1/beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidInputError
from .sets import FeasibleSet, project_nonneg_ball

QUADRATIC = "quadratic"
SEPARABLE = "separable-concave"
APPENDIX_C = "appendix-c"


def default_tol(feasible: FeasibleSet) -> float:
    return 1e-9 * max(1.0, feasible.diameter)


def projected_gradient_ascent(grad, project, x0, step, tol, max_iter):
    """Maximize a smooth concave function by projected gradient ascent.

    Stops once successive iterates move by at most ``tol``.

    Returns
    -------
    x : ndarray
        Final iterate.
    residual : float
        Norm of the last gradient-mapping step ``||x_{k+1} - x_k|| / step``.
    iterations : int
    """
    x = project(np.asarray(x0, dtype=float))
    for k in range(1, max_iter + 1):
        x_new = project(x + step * grad(x))
        move = float(np.linalg.norm(x_new - x))
        x = x_new
        if move <= tol:
            return x, move / step, k
    raise ConvergenceError(
        f"projected gradient ascent did not reach tol={tol:g} in {max_iter} iterations",
        best=x,
        residual=move / step,
    )


class Valuation:
    """Interface shared by valuation families."""

    family: str = ""
    separable: bool = False

    @property
    def alpha(self) -> float:
        """Strong-concavity modulus on the consumption set."""
        raise NotImplementedError

    @property
    def smoothness(self) -> float:
        raise NotImplementedError

    def value(self, x) -> float:
        raise NotImplementedError

    def supergradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def lipschitz(self, feasible: FeasibleSet) -> float:
        raise NotImplementedError

    def demand(self, feasible: FeasibleSet, p, tol: float | None = None) -> np.ndarray:
        raise NotImplementedError

    def utility(self, x, p) -> float:
        return self.value(x) - float(np.dot(p, x))

    def fingerprint(self) -> tuple:
        raise NotImplementedError


class QuadraticValuation(Valuation):
    """``v(x) = <a, x> - x^T Q x / 2`` with ``Q`` symmetric positive semidefinite.

    ``curvature`` may be a matrix or a vector holding the diagonal of ``Q``.
    """

    family = QUADRATIC

    def __init__(self, a, curvature):
        a = np.asarray(a, dtype=float).reshape(-1)
        Q = np.asarray(curvature, dtype=float)
        if Q.ndim == 0:
            Q = np.full(a.shape[0], float(Q))
        if Q.ndim == 1:
            Q = np.diag(Q)
        if Q.shape != (a.shape[0], a.shape[0]):
            raise InvalidInputError("curvature shape does not match linear term")
        if not np.allclose(Q, Q.T, atol=1e-12):
            raise InvalidInputError("curvature matrix must be symmetric")
        eig = np.linalg.eigvalsh(Q)
        if eig[0] < -1e-12:
            raise InvalidInputError("curvature matrix must be positive semidefinite")
        self.a = a
        self.Q = Q
        self._diag = np.diag(Q).copy()
        self.is_diagonal = bool(np.count_nonzero(Q - np.diag(self._diag)) == 0)
        self.separable = self.is_diagonal
        self._alpha = max(float(eig[0]), 0.0)
        self._beta = max(float(eig[-1]), 0.0)
        for arr in (self.a, self.Q, self._diag):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def alpha(self) -> float:
        return self._alpha

    @property
    def smoothness(self) -> float:
        return self._beta

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.is_diagonal:
            return float(self.a @ x - 0.5 * (self._diag * x) @ x)
        return float(self.a @ x - 0.5 * x @ self.Q @ x)

    def supergradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.is_diagonal:
            return self.a - self._diag * x
        return self.a - self.Q @ x

    def lipschitz(self, feasible: FeasibleSet) -> float:
        if feasible.is_box and feasible.n <= 12:
            # ||a - Qx|| is convex in x, so its maximum over a box sits at a vertex.
            corners = np.array(np.meshgrid(*[[0.0, u] for u in feasible.upper])).reshape(feasible.n, -1).T
            return float(np.max(np.linalg.norm(self.a - corners @ self.Q, axis=1)))
        reach = feasible.radius if not feasible.is_box else float(np.linalg.norm(feasible.upper))
        return float(np.linalg.norm(self.a) + self._beta * reach)

    def good_lipschitz(self, feasible: FeasibleSet) -> np.ndarray:
        """Per-good moduli ``max |a_j - q_j x_j|`` on ``[0, u_j]`` (diagonal, box)."""
        if not (self.is_diagonal and feasible.is_box):
            raise InvalidInputError("per-good moduli need a diagonal curvature and a box set")
        return np.maximum(np.abs(self.a), np.abs(self.a - self._diag * feasible.upper))

    def demand(self, feasible, p, tol=None):
        g = self.a - np.asarray(p, dtype=float)
        if self.is_diagonal and feasible.is_box:
            q = self._diag
            with np.errstate(divide="ignore", invalid="ignore"):
                x = np.where(q > 0, g / np.where(q > 0, q, 1.0), 0.0)
            # linear coordinates: take the whole cap when the margin is >= 0
            x = np.where(q > 0, x, np.where(g >= 0, feasible.upper, 0.0))
            return np.clip(x, 0.0, feasible.upper)
        if not feasible.is_box and self.is_diagonal and np.all(self._diag == self._diag[0]):
            q = self._diag[0]
            if q > 0:
                return project_nonneg_ball(g / q, feasible.radius)
            gp = np.maximum(g, 0.0)
            norm = np.linalg.norm(gp)
            return gp * (feasible.radius / norm) if norm > 0 else np.zeros_like(gp)
        return self._solve_iteratively(feasible, g, tol)

    def _solve_iteratively(self, feasible, g, tol):
        if tol is None:
            tol = default_tol(feasible)
        beta = self._beta
        if beta <= 0:
            raise InvalidInputError("iterative demand needs positive curvature")
        if self._alpha > 0:
            cap = int(math.ceil(10.0 * beta / self._alpha * math.log(1.0 / tol))) + 10
        else:
            cap = 200_000
        x, _, _ = projected_gradient_ascent(
            lambda x: g - self.Q @ x, feasible.project, feasible.interior_point(), 1.0 / beta, tol, cap
        )
        return x

    def fingerprint(self):
        return (self.family, tuple(self.a.tolist()), tuple(self.Q.ravel().tolist()))

    def __repr__(self):
        return f"QuadraticValuation(a={self.a.tolist()}, alpha={self._alpha:g})"


@dataclass(frozen=True)
class ScalarConcave:
    """One-good piece ``a x + w log(1 + x) - q x^2 / 2`` with ``w, q >= 0``."""

    a: float
    w: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        if self.w < 0 or self.q < 0:
            raise InvalidInputError("w and q must be nonnegative")

    def value(self, x):
        return self.a * x + self.w * np.log1p(x) - 0.5 * self.q * x * x

    def deriv(self, x):
        return self.a + self.w / (1.0 + x) - self.q * x

    def alpha(self, cap):
        return self.q + self.w / (1.0 + cap) ** 2

    def smoothness(self):
        return self.q + self.w

    def lipschitz(self, cap):
        return max(abs(self.deriv(0.0)), abs(self.deriv(cap)))

    def demand(self, price, cap):
        """Largest maximizer of ``value(x) - price * x`` on ``[0, cap]``."""
        if self.deriv(cap) >= price:
            return cap
        if self.deriv(0.0) <= price:
            return 0.0
        # root of (a - price)(1 + x) + w - q x (1 + x) = 0 inside (0, cap)
        g = self.a - price
        if self.q == 0:
            x = (g + self.w) / (-g)
        else:
            b1 = self.q - g
            c1 = -(g + self.w)
            disc = math.sqrt(b1 * b1 - 4.0 * self.q * c1)
            x = (2.0 * -c1) / (b1 + disc) if b1 >= 0 else (-b1 + disc) / (2.0 * self.q)
        return min(max(x, 0.0), cap)

    def fingerprint(self):
        return ("scalar", self.a, self.w, self.q)


@dataclass(frozen=True)
class AppendixCPiece:
    """The one-good lower-bound valuation on ``[0, 1]``.

    Its derivative is ``lam`` on ``[0, 1/lam]`` and ``1/x`` on ``[1/lam, 1]``,
    with ``v(0) = 0``. When ``interval = (lo, hi)`` is given, the derivative is
    raised to the constant ``1/lo`` on ``(lo, hi)``; this lifts the best
    achievable revenue from 1 to ``hi / lo``.
    """

    lam: float
    interval: tuple[float, float] | None = None

    def __post_init__(self):
        if not self.lam > 1:
            raise InvalidInputError("appendix-c construction needs lam > 1")
        if self.interval is not None:
            lo, hi = map(float, self.interval)
            if not (1.0 / self.lam - 1e-15 <= lo < hi <= 1.0):
                raise InvalidInputError(
                    f"perturbation interval {self.interval} must satisfy 1/lam <= lo < hi <= 1"
                )
            object.__setattr__(self, "interval", (lo, hi))

    @property
    def _knots(self):
        if self.interval is None:
            return 1.0, 1.0
        return self.interval

    def _base(self, x):
        return self.lam * x if x <= 1.0 / self.lam else 1.0 + math.log(self.lam * x)

    def value(self, x):
        x = float(x)
        lo, hi = self._knots
        if x <= lo:
            return self._base(x)
        slope = 1.0 / lo
        v_hi = self._base(lo) + slope * (hi - lo)
        if x <= hi:
            return self._base(lo) + slope * (x - lo)
        return v_hi + math.log(x / hi)

    def deriv(self, x):
        """Left derivative (``lam`` at 0); always a supergradient."""
        x = float(x)
        lo, hi = self._knots
        if x <= 1.0 / self.lam:
            return self.lam
        if lo < x <= hi:
            return 1.0 / lo
        return 1.0 / x

    def alpha(self, cap):
        return 0.0

    def smoothness(self):
        return math.inf

    def lipschitz(self, cap):
        return self.lam

    def demand(self, price, cap):
        """Largest maximizer; the left derivative is scanned segment by segment."""
        if cap != 1.0:
            raise InvalidInputError("appendix-c valuation is defined on [0, 1]")
        price = float(price)
        lo, hi = self._knots
        if price <= 0:
            return 1.0
        inv = 1.0 / price
        if inv > hi:
            return min(1.0, inv)
        if 1.0 / lo >= price and hi > lo:
            return hi
        if inv > 1.0 / self.lam:
            return min(lo, inv)
        if self.lam >= price:
            return 1.0 / self.lam
        return 0.0

    def fingerprint(self):
        return ("appendix-c", self.lam, self.interval)


class SeparableValuation(Valuation):
    """Sum of one-good pieces, ``v(x) = sum_j v_j(x_j)``; box sets only."""

    separable = True

    def __init__(self, pieces, family: str = SEPARABLE):
        self.pieces = tuple(pieces)
        if not self.pieces:
            raise InvalidInputError("need at least one good")
        self.family = family

    @property
    def n(self) -> int:
        return len(self.pieces)

    def _caps(self, feasible):
        if not feasible.is_box:
            raise InvalidInputError("separable valuations require a box consumption set")
        return feasible.upper

    @property
    def alpha(self) -> float:
        # Moduli for the unit box; Market reports the set-specific value.
        return min(piece.alpha(1.0) for piece in self.pieces)

    def alpha_on(self, feasible) -> float:
        caps = self._caps(feasible)
        return min(piece.alpha(u) for piece, u in zip(self.pieces, caps))

    @property
    def smoothness(self) -> float:
        return max(piece.smoothness() for piece in self.pieces)

    def value(self, x) -> float:
        return float(sum(piece.value(xj) for piece, xj in zip(self.pieces, np.asarray(x, dtype=float))))

    def supergradient(self, x) -> np.ndarray:
        return np.array([piece.deriv(xj) for piece, xj in zip(self.pieces, np.asarray(x, dtype=float))])

    def lipschitz(self, feasible) -> float:
        caps = self._caps(feasible)
        return float(np.linalg.norm([piece.lipschitz(u) for piece, u in zip(self.pieces, caps)]))

    def good_lipschitz(self, feasible) -> np.ndarray:
        caps = self._caps(feasible)
        return np.array([piece.lipschitz(u) for piece, u in zip(self.pieces, caps)])

    def demand(self, feasible, p, tol=None):
        caps = self._caps(feasible)
        p = np.asarray(p, dtype=float)
        return np.array([piece.demand(pj, u) for piece, pj, u in zip(self.pieces, p, caps)])

    def fingerprint(self):
        return (self.family,) + tuple(piece.fingerprint() for piece in self.pieces)

    def __repr__(self):
        return f"SeparableValuation({list(self.pieces)})"


def appendix_c_valuation(lam: float, interval=None) -> SeparableValuation:
    return SeparableValuation([AppendixCPiece(lam, interval)], family=APPENDIX_C)


class ApproximateConsumer(Valuation):
    """A consumer that buys a bundle within ``eps`` of its best utility.

    The exact demand ``x*`` is shrunk toward the zero bundle until the utility
    shortfall reaches ``eps`` (or the zero bundle is reached). Value and
    supergradients are those of the wrapped valuation.
    """

    def __init__(self, base: Valuation, eps: float):
        if eps < 0:
            raise InvalidInputError("eps must be nonnegative")
        self.base = base
        self.eps = float(eps)
        self.family = base.family
        self.separable = base.separable

    @property
    def alpha(self):
        return self.base.alpha

    @property
    def smoothness(self):
        return self.base.smoothness

    def value(self, x):
        return self.base.value(x)

    def supergradient(self, x):
        return self.base.supergradient(x)

    def lipschitz(self, feasible):
        return self.base.lipschitz(feasible)

    def alpha_on(self, feasible):
        if hasattr(self.base, "alpha_on"):
            return self.base.alpha_on(feasible)
        return self.base.alpha

    def demand(self, feasible, p, tol=None):
        x_star = self.base.demand(feasible, p, tol)
        if self.eps == 0:
            return x_star
        best = self.base.utility(x_star, p)

        def loss(t):
            return best - self.base.utility((1.0 - t) * x_star, p)

        if loss(1.0) <= self.eps:
            return np.zeros_like(x_star)
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if loss(mid) <= self.eps:
                lo = mid
            else:
                hi = mid
        return (1.0 - lo) * x_star

    def fingerprint(self):
        return ("approx", self.eps) + self.base.fingerprint()
