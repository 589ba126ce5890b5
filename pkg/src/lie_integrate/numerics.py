"""Small numerical helpers: Gauss-Legendre rules, finite differences, sampling."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes and weights on [0, 1]."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable[[float], np.ndarray], a: float = 0.0, b: float = 1.0):
        """Approximate the integral of ``f`` over [a, b].

        ``f`` may return scalars or arrays; the weighted sum is taken over the
        leading (node) axis.
        """
        span = b - a
        total = None
        for s, w in zip(self.nodes, self.weights):
            val = w * np.asarray(f(a + span * s))
            total = val if total is None else total + val
        return span * total


@lru_cache(maxsize=None)
def gauss_legendre(n: int = 16) -> QuadratureRule:
    if n < 1:
        raise ValueError("need at least one node")
    x, w = np.polynomial.legendre.leggauss(n)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights)


def central_difference(f, t: float, h: float):
    return (np.asarray(f(t + h)) - np.asarray(f(t - h))) / (2.0 * h)


def _one_sided(f, t: float, h: float):
    # second-order; h < 0 gives the backward variant
    f0, f1, f2 = (np.asarray(f(t + k * h)) for k in range(3))
    # written in differences so that constants give exactly zero
    return (4.0 * (f1 - f0) - (f2 - f0)) / (2.0 * h)


def richardson_derivative(f, t: float, h: float, lo: float = -np.inf, hi: float = np.inf):
    """Derivative of ``f`` at ``t`` from second-order differences at steps h, h/2.

    The two estimates are combined as (4 D(h/2) - D(h)) / 3. Central differences
    are used unless ``t`` is within ``h`` of an end of [lo, hi], in which case a
    one-sided stencil pointing into the interval is used.
    """
    if t - h < lo:
        d1, d2 = _one_sided(f, t, h), _one_sided(f, t, h / 2)
    elif t + h > hi:
        d1, d2 = _one_sided(f, t, -h), _one_sided(f, t, -h / 2)
    else:
        d1, d2 = central_difference(f, t, h), central_difference(f, t, h / 2)
    return (4.0 * d2 - d1) / 3.0


def derivative(f, t: float, h: float, richardson: bool = True, lo: float = -np.inf, hi: float = np.inf):
    if richardson:
        return richardson_derivative(f, t, h, lo, hi)
    if t - h < lo:
        return _one_sided(f, t, h)
    if t + h > hi:
        return _one_sided(f, t, -h)
    return central_difference(f, t, h)


def sample_ball(rng: np.random.Generator, dim: int, radius: float, size: int | None = None) -> np.ndarray:
    """Uniform samples from the closed l2 ball of ``radius`` in R^dim."""
    shape = (dim,) if size is None else (size, dim)
    g = rng.standard_normal(shape)
    norms = np.linalg.norm(g, axis=-1, keepdims=True)
    u = rng.random(() if size is None else (size, 1))
    return g / norms * radius * np.power(u, 1.0 / dim)


def sample_unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.standard_normal(dim)
    return g / np.linalg.norm(g)


def observed_order(r_coarse: float, r_fine: float, ratio: float = 2.0) -> float:
    """Empirical convergence order from residuals at steps h and h/ratio."""
    if r_fine <= 0 or r_coarse <= 0:
        return float("nan")
    return float(np.log(r_coarse / r_fine) / np.log(ratio))
