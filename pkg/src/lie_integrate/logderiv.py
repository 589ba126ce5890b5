"""Right logarithmic derivatives of paths in the algebra.

Two independent routes are provided: the integral ``int_0^1 exp(s ad g) g' ds``
(Gauss-Legendre on [0, 1]) and the definition through the inverse of the
right-translation differential of the Dynkin product. They are cross-checked
in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .algebra import Decomposition, LieAlgebra, adjoint, exp_ad
from .bch import DEFAULT_CONFIG, BchConfig, bch, bch_differential_at_zero_right
from .errors import InvalidArgument, NumericFailure
from .factorization import DEFAULT_NEWTON, FactorizedPath, NewtonConfig, component_derivatives
from .numerics import QuadratureRule, gauss_legendre, richardson_derivative

DEFAULT_RULE = gauss_legendre(16)


@dataclass(frozen=True)
class SmoothPath:
    """A path ``t -> value(t)`` in the algebra on ``interval``.

    Without an analytic ``derivative`` the derivative is a Richardson
    extrapolated central difference with step ``step``.
    """

    value: Callable[[float], np.ndarray]
    derivative: Callable[[float], np.ndarray] | None = None
    interval: tuple[float, float] = (0.0, 1.0)
    step: float = 1e-5

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.value(t), dtype=float)

    def velocity(self, t: float) -> np.ndarray:
        if self.derivative is not None:
            return np.asarray(self.derivative(t), dtype=float)
        return richardson_derivative(self.value, t, self.step, *self.interval)

    def derivative_mismatch(self, n_probe: int = 5) -> float:
        """Largest gap between the supplied derivative and finite differences."""
        if self.derivative is None:
            return 0.0
        lo, hi = self.interval
        ts = np.linspace(lo, hi, n_probe + 2)[1:-1]
        return max(float(np.linalg.norm(self.derivative(t) - richardson_derivative(self.value, t, self.step, lo, hi)))
                   for t in ts)

    @classmethod
    def polynomial(cls, coefficients: Sequence, interval=(0.0, 1.0)) -> "SmoothPath":
        """``sum_k coefficients[k] t^k`` with its exact derivative."""
        cs = np.asarray(coefficients, dtype=float)
        if cs.ndim != 2:
            raise InvalidArgument("polynomial path needs a list of coefficient vectors")

        def value(t):
            return sum(c * t ** k for k, c in enumerate(cs))

        def deriv(t):
            return sum(k * c * t ** (k - 1) for k, c in enumerate(cs) if k > 0) if len(cs) > 1 \
                else np.zeros(cs.shape[1])

        return cls(value, deriv, tuple(interval))

    @classmethod
    def straight(cls, x, interval=(0.0, 1.0)) -> "SmoothPath":
        x = np.asarray(x, dtype=float)
        return cls(lambda t: t * x, lambda t: x.copy(), tuple(interval))

    @classmethod
    def constant(cls, x, interval=(0.0, 1.0)) -> "SmoothPath":
        x = np.asarray(x, dtype=float)
        return cls(lambda t: x.copy(), lambda t: np.zeros_like(x), tuple(interval))


def _check_t(p: SmoothPath, t: float):
    lo, hi = p.interval
    if not lo <= t <= hi:
        raise InvalidArgument(f"t = {t} outside the path interval {p.interval}")


def maurer_cartan(L: LieAlgebra, x, v, q: QuadratureRule = DEFAULT_RULE) -> np.ndarray:
    """``int_0^1 exp(s ad x) v ds`` by quadrature."""
    ad = adjoint(L, x)
    v = L.vector(v)
    if not np.any(ad):
        return v.copy()
    return q.integrate(lambda s: scipy.linalg.expm(s * ad) @ v)


def log_derivative(L: LieAlgebra, p: SmoothPath, t: float, q: QuadratureRule = DEFAULT_RULE) -> np.ndarray:
    """Right logarithmic derivative via the Maurer-Cartan integral."""
    _check_t(p, t)
    return maurer_cartan(L, p(t), p.velocity(t), q)


def log_derivative_by_definition(L: LieAlgebra, p: SmoothPath, t: float,
                                 cfg: BchConfig = DEFAULT_CONFIG) -> np.ndarray:
    """``D rho_{p(t)}(0)^{-1} p'(t)`` using the series differential."""
    _check_t(p, t)
    d = bch_differential_at_zero_right(L, p(t), cfg)
    try:
        return np.linalg.solve(d, p.velocity(t))
    except np.linalg.LinAlgError:
        raise NumericFailure("right differential is singular", float(np.linalg.cond(d))) from None


def product_path(L: LieAlgebra, a: SmoothPath, b: SmoothPath, cfg: BchConfig = DEFAULT_CONFIG) -> SmoothPath:
    """Pointwise ``a(t) * b(t)``; derivative always by finite differences."""
    lo = max(a.interval[0], b.interval[0])
    hi = min(a.interval[1], b.interval[1])
    return SmoothPath(lambda t: bch(L, a(t), b(t), cfg), None, (lo, hi), max(a.step, b.step))


def product_rule_residual(L: LieAlgebra, a: SmoothPath, b: SmoothPath, t: float,
                          cfg: BchConfig = DEFAULT_CONFIG, q: QuadratureRule = DEFAULT_RULE) -> float:
    """``|delta(a*b) - delta(a) - exp(ad a) delta(b)|`` at ``t``."""
    ab = product_path(L, a, b, cfg)
    lhs = log_derivative(L, ab, t, q)
    rhs = log_derivative(L, a, t, q) + exp_ad(L, a(t)) @ log_derivative(L, b, t, q)
    return float(np.linalg.norm(lhs - rhs))


def structural_sum(L: LieAlgebra, components: Sequence, derivatives: Sequence,
                   q: QuadratureRule = DEFAULT_RULE) -> np.ndarray:
    """``sum_j exp(ad x1)...exp(ad x_{j-1}) int_0^1 exp(s ad xj) xj' ds``."""
    total = np.zeros(L.dim)
    prefix = np.eye(L.dim)
    for xj, dj in zip(components, derivatives):
        total = total + prefix @ maurer_cartan(L, xj, dj, q)
        prefix = prefix @ exp_ad(L, xj)
    return total


def structural_identity_residual(L: LieAlgebra, D: Decomposition, x, y, t: float,
                                 cfg: BchConfig = DEFAULT_CONFIG, newton: NewtonConfig = DEFAULT_NEWTON,
                                 q: QuadratureRule = DEFAULT_RULE, h: float | None = None,
                                 richardson: bool = True, path: FactorizedPath | None = None) -> float:
    """Residual of the identity recovering x from the chart components of ``(t x) * y``.

    ``h``/``richardson`` control the finite differences of the components;
    pass a prebuilt ``path`` to share its cache between calls.
    """
    x = L.vector(x)
    if path is None:
        path = FactorizedPath(L, D, x, y, cfg, newton, probe_points=0)
    comps = path.at(t).components
    derivs = component_derivatives(path, t, h, richardson)
    return float(np.linalg.norm(x - structural_sum(L, comps, derivs, q)))
