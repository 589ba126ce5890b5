"""Chart factorization ``z = x1*x2*...*xn`` with ``xj`` in the j-th summand.

The map (x1, ..., xn) -> x1*...*xn has the identity as differential at the
origin (under block concatenation), so projecting z onto the summands is a
second-order accurate seed and Newton converges quickly near 0. Failure of
Newton is how leaving the chart is detected.
"""

from __future__ import annotations

import threading
import warnings
from dataclasses import dataclass, field

import numpy as np

from .algebra import Decomposition, LieAlgebra
from .bch import DEFAULT_CONFIG, BchConfig, bch, bch_multi_batch
from .errors import BchDomainWarning, ChartOutOfRange, InvalidArgument
from .numerics import derivative


@dataclass(frozen=True)
class NewtonConfig:
    max_iter: int = 50
    fd_step: float = 1e-7
    residual_tol: float = 1e-12
    step_tol: float = 1e-13
    max_halvings: int = 8
    # iterates with a component beyond this norm are treated as having left the chart
    component_bound: float = 1.5


DEFAULT_NEWTON = NewtonConfig()


@dataclass(frozen=True)
class ChartPoint:
    components: tuple
    residual: float
    coords: np.ndarray = field(repr=False)
    iterations: int = 0

    @property
    def n(self) -> int:
        return len(self.components)

    def stacked(self) -> np.ndarray:
        return np.concatenate(self.components)


def _residual_fn(L, D, z, cfg):
    def F(c):
        c = np.asarray(c)
        if c.ndim == 1:
            return bch_multi_batch(L, D.components_batch(c[None]), cfg)[0] - z
        return bch_multi_batch(L, D.components_batch(c), cfg) - z
    return F


def factorize(L: LieAlgebra, D: Decomposition, z, cfg: BchConfig = DEFAULT_CONFIG,
              newton: NewtonConfig = DEFAULT_NEWTON, initial=None) -> ChartPoint:
    """Solve ``bch_multi(x1, ..., xn) = z`` for ``xj`` in block j.

    ``initial`` (concatenated block coordinates) overrides the projection seed;
    used for warm starts along paths.
    """
    z = L.vector(z)
    if D.dim != L.dim:
        raise InvalidArgument("decomposition does not match the algebra dimension")
    if initial is None:
        c = np.concatenate(D.block_coordinates(z))
    else:
        c = np.array(initial, dtype=float)
    if D.n == 1:
        return ChartPoint((z.copy(),), 0.0, np.concatenate(D.block_coordinates(z)), 0)

    F = _residual_fn(L, D, z, cfg)
    with warnings.catch_warnings():
        # domain is policed by component_bound here
        warnings.simplefilter("ignore", BchDomainWarning)
        f = F(c)
        r = float(np.linalg.norm(f))
        jac = None
        r_prev = np.inf
        for it in range(1, newton.max_iter + 1):
            if r <= newton.residual_tol:
                c, f, r = _polish(F, c, f, r, jac)
                return _point(D, c, r, it - 1)
            # a forward-difference Jacobian only buys linear convergence anyway, so it is
            # reused while the residual keeps contracting fast
            if jac is None or r > 1e-3 * r_prev:
                jac = _fd_jacobian(F, c, f, newton.fd_step)
            r_prev = r
            try:
                step = np.linalg.solve(jac, -f)
            except np.linalg.LinAlgError:
                raise ChartOutOfRange("singular Jacobian in chart Newton iteration",
                                      D.from_block_coordinates(c), r) from None
            lam = 1.0
            for _ in range(newton.max_halvings + 1):
                c_new = c + lam * step
                f_new = F(c_new)
                r_new = float(np.linalg.norm(f_new))
                if r_new < r:
                    break
                lam *= 0.5
            c, f, r = c_new, f_new, r_new
            comps = D.from_block_coordinates(c)
            if max(float(np.linalg.norm(x)) for x in comps) > newton.component_bound or not np.isfinite(r):
                raise ChartOutOfRange("Newton iterate left the chart domain", comps, r)
            if lam * np.linalg.norm(step) <= newton.step_tol:
                if r <= 1e3 * newton.residual_tol:
                    return _point(D, c, r, it)
                raise ChartOutOfRange("Newton stalled away from a solution", comps, r)
    raise ChartOutOfRange(f"Newton did not converge in {newton.max_iter} iterations",
                          D.from_block_coordinates(c), r)


def _fd_jacobian(F, c, f, h):
    # forward differences, all columns in one batched series evaluation
    shifted = c[None, :] + h * np.eye(len(c))
    return ((F(shifted) - f[None, :]) / h).T


def _polish(F, c, f, r, jac):
    # one extra step with the last Jacobian; keeps solutions smooth in z for finite differences
    if jac is None or r == 0.0:
        return c, f, r
    try:
        c_new = c + np.linalg.solve(jac, -f)
    except np.linalg.LinAlgError:
        return c, f, r
    f_new = F(c_new)
    r_new = float(np.linalg.norm(f_new))
    if r_new < r:
        return c_new, f_new, r_new
    return c, f, r


def _point(D, c, r, it):
    return ChartPoint(tuple(D.from_block_coordinates(c)), r, c.copy(), it)


class FactorizedPath:
    """The path ``t -> factorize((t x) * y)`` sampled with warm starts.

    Computed samples are cached; the cache is guarded by a lock so a path can
    be shared between threads. Consecutive solves are kept within
    ``max_jump`` of each other (in stacked component norm) by bisecting the
    parameter step, which keeps Newton in its quadratic basin.
    """

    def __init__(self, L: LieAlgebra, D: Decomposition, x, y, cfg: BchConfig = DEFAULT_CONFIG,
                 newton: NewtonConfig = DEFAULT_NEWTON, derivative_step: float = 1e-5,
                 interval: tuple[float, float] = (0.0, 1.0), max_jump: float = 0.05, probe_points: int = 21):
        self.L, self.D = L, D
        self.x, self.y = L.vector(x), L.vector(y)
        self.cfg, self.newton = cfg, newton
        self.derivative_step = derivative_step
        self.interval = interval
        self.max_jump = max_jump
        self._cache: dict[float, ChartPoint] = {}
        self._lock = threading.Lock()
        try:
            self._cache[0.0] = factorize(L, D, self.y, cfg, newton)
        except ChartOutOfRange as exc:
            exc.t = 0.0
            raise
        self.lipschitz_estimate = 0.0
        if probe_points:
            self._probe(probe_points)

    def target(self, t: float) -> np.ndarray:
        return bch(self.L, t * self.x, self.y, self.cfg)

    def _probe(self, k: int):
        grid = np.linspace(*self.interval, k)
        prev = self.at(grid[0])
        for a, b in zip(grid[:-1], grid[1:]):
            cur = self.at(b)
            jump = float(np.linalg.norm(cur.stacked() - prev.stacked()))
            self.lipschitz_estimate = max(self.lipschitz_estimate, jump / (b - a))
            prev = cur

    def at(self, t: float) -> ChartPoint:
        t = float(t)
        with self._lock:
            hit = self._cache.get(t)
            if hit is not None:
                return hit
            start = min(self._cache, key=lambda s: abs(s - t))
            return self._advance(start, t, depth=0)

    __call__ = at

    def _advance(self, t0: float, t: float, depth: int) -> ChartPoint:
        base = self._cache[t0]
        try:
            pt = factorize(self.L, self.D, self.target(t), self.cfg, self.newton, initial=base.coords)
            ok = float(np.linalg.norm(pt.stacked() - base.stacked())) <= self.max_jump
        except ChartOutOfRange as exc:
            if depth >= 30:
                exc.t = t
                raise
            pt, ok = None, False
        if not ok:
            if depth >= 30:
                raise ChartOutOfRange("path factorization jumps; chart lost", base.components,
                                      None if pt is None else pt.residual, t)
            mid = 0.5 * (t0 + t)
            self._advance(t0, mid, depth + 1)
            return self._advance(mid, t, depth + 1)
        self._cache[t] = pt
        return pt

    def components(self, t: float) -> tuple:
        return self.at(t).components


def component_derivative(P: FactorizedPath, t: float, j: int, h: float | None = None,
                         richardson: bool = True) -> np.ndarray:
    """Finite-difference derivative of the j-th chart component at ``t``.

    Central differences in the interior, one-sided at the interval ends;
    Richardson-combined over steps h and h/2 unless ``richardson`` is False.
    """
    if not 0 <= j < P.D.n:
        raise InvalidArgument(f"component index {j} out of range")
    h = P.derivative_step if h is None else h
    lo, hi = P.interval
    return derivative(lambda s: P.at(s).components[j], t, h, richardson, lo, hi)


def component_derivatives(P: FactorizedPath, t: float, h: float | None = None, richardson: bool = True) -> list:
    return [component_derivative(P, t, j, h, richardson) for j in range(P.D.n)]


def empirical_chart_radius(L: LieAlgebra, D: Decomposition, cfg: BchConfig = DEFAULT_CONFIG,
                           newton: NewtonConfig = DEFAULT_NEWTON, directions: int = 8, seed: int = 0,
                           limit: float = 2.0) -> float:
    """Smallest, over random directions u, of the largest r with ``factorize(r u)`` succeeding.

    Bisection assumes success along a ray is an interval starting at 0; the
    number is a witness, not a certified chart radius.
    """
    rng = np.random.default_rng(seed)

    def ok(z):
        try:
            return factorize(L, D, z, cfg, newton).residual <= 1e-11
        except ChartOutOfRange:
            return False

    best = limit
    for _ in range(directions):
        u = rng.standard_normal(L.dim)
        u /= np.linalg.norm(u)
        if ok(best * u):
            continue
        lo, hi = 0.0, best
        for _ in range(20):
            mid = 0.5 * (lo + hi)
            if ok(mid * u):
                lo = mid
            else:
                hi = mid
        best = lo
    return best
