"""Local group representation ``pi(z) = e^{a(z1)} ... e^{a(zn)}`` on the chart.

``pi`` is only defined where the chart factorization succeeds; nothing here
extends it beyond the chart.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.linalg

from .algebra import Decomposition
from .bch import DEFAULT_CONFIG, BchConfig, bch
from .errors import ChartOutOfRange, InvalidArgument
from .factorization import (DEFAULT_NEWTON, ChartPoint, FactorizedPath, NewtonConfig, empirical_chart_radius,
                            factorize)
from .numerics import derivative
from .representation import Representation, apply, exp_op, orthogonality_residual

DEFAULT_GRID = tuple(np.linspace(0.0, 1.0, 21))
FD_STEP = 1e-4


@dataclass(eq=False)
class LocalRepresentation:
    representation: Representation
    decomposition: Decomposition
    bch_cfg: BchConfig = DEFAULT_CONFIG
    newton_cfg: NewtonConfig = DEFAULT_NEWTON
    chart_probe_directions: int = 8
    chart_probe_seed: int = 0

    def __post_init__(self):
        if self.decomposition.dim != self.representation.algebra.dim:
            raise InvalidArgument("decomposition and representation live on different algebras")

    @property
    def algebra(self):
        return self.representation.algebra

    def factorize(self, z, initial=None) -> ChartPoint:
        return factorize(self.algebra, self.decomposition, z, self.bch_cfg, self.newton_cfg, initial)

    def path(self, x, y, **kwargs) -> FactorizedPath:
        return FactorizedPath(self.algebra, self.decomposition, x, y, self.bch_cfg, self.newton_cfg, **kwargs)

    @cached_property
    def chart_radius(self) -> float:
        """Empirical radius within which factorization succeeded (see ``empirical_chart_radius``)."""
        return empirical_chart_radius(self.algebra, self.decomposition, self.bch_cfg, self.newton_cfg,
                                      self.chart_probe_directions, self.chart_probe_seed)


def operator_of(R: Representation, point: ChartPoint) -> np.ndarray:
    out = np.eye(R.dim_H)
    for comp in point.components:
        if np.any(comp):
            out = out @ exp_op(R, comp)
    return out


def pi(LR: LocalRepresentation, z) -> np.ndarray:
    """Product of ``exp_op`` over the chart components of ``z``, in block order."""
    return operator_of(LR.representation, LR.factorize(z))


def unitarity_residual(LR: LocalRepresentation, z) -> float:
    return orthogonality_residual(pi(LR, z))


def multiplicativity_residual(LR: LocalRepresentation, x, y) -> float:
    """``|pi(x*y) - pi(x) pi(y)|`` in operator 2-norm."""
    L = LR.algebra
    x, y = L.vector(x), L.vector(y)
    lhs = pi(LR, bch(L, x, y, LR.bch_cfg))
    rhs = pi(LR, x) @ pi(LR, y)
    return float(np.linalg.norm(lhs - rhs, 2))


def _gamma(LR, path, v):
    R = LR.representation
    return lambda t: operator_of(R, path.at(t)) @ v


def ode_residual(LR: LocalRepresentation, x, y, v, grid: Sequence[float] = DEFAULT_GRID,
                 h: float = FD_STEP, richardson: bool = True, path: FactorizedPath | None = None) -> float:
    """``max_t |gamma'(t) - a(x) gamma(t)|`` with ``gamma(t) = pi((t x) * y) v``.

    gamma' is a finite difference (one-sided at the ends of [0, 1]).
    """
    L = LR.algebra
    x = L.vector(x)
    v = np.asarray(v, dtype=float)
    if path is None:
        path = LR.path(x, y, probe_points=0)
    gamma = _gamma(LR, path, v)
    ax = apply(LR.representation, x)
    worst = 0.0
    for t in grid:
        try:
            d = derivative(gamma, t, h, richardson, 0.0, 1.0)
            worst = max(worst, float(np.linalg.norm(d - ax @ gamma(t))))
        except ChartOutOfRange as exc:
            exc.t = t if exc.t is None else exc.t
            raise
    return worst


def uniqueness_check(LR: LocalRepresentation, x, y, v, grid: Sequence[float] = DEFAULT_GRID,
                     path: FactorizedPath | None = None) -> float:
    """``max_t |pi((t x) * y) v - e^{t a(x)} pi(y) v|``: both sides solve the same IVP."""
    L = LR.algebra
    x = L.vector(x)
    v = np.asarray(v, dtype=float)
    if path is None:
        path = LR.path(x, y, probe_points=0)
    gamma = _gamma(LR, path, v)
    ax = apply(LR.representation, x)
    start = gamma(0.0)
    return max(float(np.linalg.norm(gamma(t) - scipy.linalg.expm(t * ax) @ start)) for t in grid)


def derived_rep_residual(LR: LocalRepresentation, x, v, h: float = FD_STEP, richardson: bool = True) -> float:
    """``|d/dt pi(t x) v at 0 - a(x) v|``."""
    L = LR.algebra
    x = L.vector(x)
    v = np.asarray(v, dtype=float)
    d = derivative(lambda t: pi(LR, t * x) @ v, 0.0, h, richardson)
    return float(np.linalg.norm(d - apply(LR.representation, x) @ v))


def order_independence_residual(LR: LocalRepresentation, z, order: Sequence[int]) -> float:
    """``|pi(z) - pi'(z)|`` where pi' uses the same blocks in ``order``."""
    other = LocalRepresentation(LR.representation, LR.decomposition.reordered(order), LR.bch_cfg, LR.newton_cfg)
    return float(np.linalg.norm(pi(LR, z) - pi(other, z), 2))


def lipschitz_witness(LR: LocalRepresentation, zs: Sequence) -> float:
    """Largest ``|pi(z1) - pi(z2)| / |z1 - z2|`` over consecutive sample pairs."""
    ops = [pi(LR, z) for z in zs]
    worst = 0.0
    for (z1, p1), (z2, p2) in zip(zip(zs, ops), zip(zs[1:], ops[1:])):
        dz = float(np.linalg.norm(np.asarray(z1) - np.asarray(z2)))
        if dz > 0:
            worst = max(worst, float(np.linalg.norm(p1 - p2, 2)) / dz)
    return worst
