"""Truncated Dynkin series for the local product ``x*y = log(e^x e^y)``.

Dynkin's commutator form groups naturally by words in the two letters
x (0) and y (1): every term of total order m is a rational multiple of the
right-nested bracket ``[w1, [w2, ... [w_{m-1}, w_m]...]]`` of a word w of
length m. The coefficient of a word is

    c(w) = sum_n (-1)^(n-1) / (n m) * sum over splittings of w into n
           nonempty blocks x^r y^s of prod 1/(r! s!)

which we evaluate exactly with integer dynamic programming and only then
round to float. Nested brackets of all words of a given length are built
level by level by prepending a letter, i.e. one ``ad`` application per word.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .algebra import LieAlgebra, adjoint
from .errors import BchDomainWarning, InvalidArgument, NumericFailure

MAX_SUPPORTED_ORDER = 16


@dataclass(frozen=True)
class BchConfig:
    max_order: int = 12
    term_tolerance: float = 1e-14
    domain_radius: float = math.log(2.0) / 2.0

    def __post_init__(self):
        if int(self.max_order) != self.max_order or self.max_order < 1:
            raise InvalidArgument("max_order must be an integer >= 1")
        if self.max_order > MAX_SUPPORTED_ORDER:
            raise InvalidArgument(f"max_order above {MAX_SUPPORTED_ORDER} is not supported")
        if not (self.term_tolerance > 0 and self.domain_radius > 0):
            raise InvalidArgument("tolerances must be positive")


DEFAULT_CONFIG = BchConfig()


@dataclass
class BchResult:
    value: np.ndarray
    orders_used: int
    last_term_norm: float
    domain_violation: bool = False
    warnings: list[str] = field(default_factory=list)


# -- exact coefficients ---------------------------------------------------------


def word_coefficient(word: Sequence[int]) -> Fraction:
    """Exact Dynkin coefficient of a word over {0, 1} (0 = first operand)."""
    m = len(word)
    if m == 0:
        raise ValueError("empty word")
    # g[j][n] = j! * sum over splittings of word[:j] into n blocks of prod 1/(r! s!)
    g = [dict() for _ in range(m + 1)]
    g[0][0] = 1
    for j in range(1, m + 1):
        ones = 0
        # scan blocks word[i:j] backwards; valid while it reads 0...01...1
        seen_zero = False
        for i in range(j - 1, -1, -1):
            if word[i] == 1:
                if seen_zero:
                    break
                ones += 1
            else:
                seen_zero = True
            zeros = (j - i) - ones
            weight = math.comb(j, i) * math.comb(j - i, zeros)
            for n, val in g[i].items():
                g[j][n + 1] = g[j].get(n + 1, 0) + val * weight
    total = Fraction(0)
    denom = m * math.factorial(m)
    for n, val in g[m].items():
        total += Fraction((-1) ** (n - 1) * val, n * denom)
    return total


def _word(idx: int, m: int) -> tuple[int, ...]:
    # first letter is the most significant bit
    return tuple((idx >> (m - 1 - p)) & 1 for p in range(m))


@lru_cache(maxsize=None)
def order_coefficients(m: int) -> np.ndarray:
    """Float coefficients of all 2^m words of length m, indexed by word bits."""
    coeffs = np.zeros(2 ** m)
    for idx in range(2 ** m):
        if m >= 2 and (idx & 1) == ((idx >> 1) & 1):
            continue  # innermost bracket [a, a] vanishes
        coeffs[idx] = float(word_coefficient(_word(idx, m)))
    coeffs.setflags(write=False)
    return coeffs


@lru_cache(maxsize=None)
def right_differential_coefficients(n_terms: int) -> tuple[float, ...]:
    """Coefficients a_k with ``D rho_x(0) = sum_k a_k (ad x)^k``.

    The part of ``(eps y) * x`` linear in eps comes only from the words
    x^(m-1) y and x^(m-2) y x (letters relabelled so that y is the
    first operand); both reduce to ``(ad x)^(m-1) y``.
    """
    out = []
    for m in range(1, n_terms + 1):
        if m == 1:
            out.append(float(word_coefficient((0,))))
            continue
        a = word_coefficient((1,) * (m - 1) + (0,))
        b = word_coefficient((1,) * (m - 2) + (0, 1))
        out.append(float(a - b))
    return tuple(out)


# -- series evaluation ----------------------------------------------------------


@lru_cache(maxsize=None)
def _reduced_coefficients(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients over prefixes p of length m-2 for the words p+xy and p+yx.

    Words ending in xx or yy bracket to zero and [p, [y, x]] = -[p, [x, y]],
    so the order-m term is sum_p (c(p xy) - c(p yx)) [p, [x, y]]. The second
    array holds |c(p xy)| + |c(p yx)| for the truncation bound.
    """
    c = order_coefficients(m).reshape(-1, 4)
    return c[:, 1] - c[:, 2], np.abs(c[:, 1]) + np.abs(c[:, 2])


def _dynkin(L: LieAlgebra, X: np.ndarray, Y: np.ndarray, cfg: BchConfig):
    """Series for a batch of operand pairs; X, Y have shape (batch, dim).

    Row r of ``level[b]`` holds the nested bracket [p_r, [x, y]] for the r-th
    prefix of the current length. Truncation is per batch member: the order-m
    term can cancel to zero while later orders do not (so(3) at order 4), so
    we stop on the cancellation-free bound sum_w |c_w| |[w]| falling below
    ``term_tolerance`` at two successive orders for every member.
    """
    c = L.structure_tensor
    adxt = np.einsum("bi,ijk->bjk", X, c)  # transposed ad matrices, rows act on row vectors
    adyt = np.einsum("bi,ijk->bjk", Y, c)
    total = X + Y
    last = np.linalg.norm(total, axis=1)
    quiet = np.zeros(len(X), dtype=int)
    ones = np.ones(L.dim)
    used = 1
    level = np.einsum("bi,bij->bj", Y, adxt)[:, None, :]  # [x, y]
    for m in range(2, cfg.max_order + 1):
        if m > 2:
            level = np.concatenate((level @ adxt, level @ adyt), axis=1)
        coeffs, abs_coeffs = _reduced_coefficients(m)
        term = coeffs @ level
        total = total + term
        last = np.sqrt(np.einsum("bd,bd->b", term, term))
        used = m
        if last.min() >= cfg.term_tolerance:
            # bound >= |term|, so no member can be quiet; skip the row norms
            quiet[:] = 0
            continue
        bound = np.sqrt(np.square(level) @ ones) @ abs_coeffs
        quiet = np.where(bound < cfg.term_tolerance, quiet + 1, 0)
        if quiet.min() >= 2:
            break
    if not np.all(np.isfinite(total)):
        raise NumericFailure("Dynkin series produced non-finite values")
    return total, used, last


def bch_info(L: LieAlgebra, x, y, cfg: BchConfig = DEFAULT_CONFIG) -> BchResult:
    """Dynkin series with truncation metadata; never warns."""
    x, y = L.vector(x), L.vector(y)
    msgs = []
    size = math.sqrt(x @ x) + math.sqrt(y @ y)
    violation = size >= 2.0 * cfg.domain_radius
    if violation:
        msgs.append(f"|x| + |y| = {size:.4g} outside the convergence ball "
                    f"(2 * domain_radius = {2 * cfg.domain_radius:.4g})")
    total, used, last = _dynkin(L, x[None], y[None], cfg)
    return BchResult(total[0], used, float(last[0]), violation, msgs)


def bch(L: LieAlgebra, x, y, cfg: BchConfig = DEFAULT_CONFIG) -> np.ndarray:
    """``x*y`` truncated at ``cfg.max_order`` or once two successive orders are negligible.

    Out-of-domain operands produce a :class:`BchDomainWarning`; the series is
    still evaluated.
    """
    res = bch_info(L, x, y, cfg)
    for msg in res.warnings:
        warnings.warn(msg, BchDomainWarning, stacklevel=2)
    return res.value


def bch_multi(L: LieAlgebra, xs: Sequence, cfg: BchConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Left fold ``((x1*x2)*x3)*...``."""
    if len(xs) == 0:
        raise InvalidArgument("need at least one factor")
    acc = L.vector(xs[0])
    for x in xs[1:]:
        acc = bch(L, acc, x, cfg)
    return acc


def bch_multi_batch(L: LieAlgebra, xs: np.ndarray, cfg: BchConfig = DEFAULT_CONFIG) -> np.ndarray:
    """``bch_multi`` over a batch; ``xs`` has shape (batch, n_factors, dim). No domain warnings."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 3 or xs.shape[2] != L.dim or xs.shape[1] == 0:
        raise InvalidArgument(f"expected shape (batch, n, {L.dim}), got {xs.shape}")
    acc = xs[:, 0]
    for j in range(1, xs.shape[1]):
        acc, _, _ = _dynkin(L, acc, xs[:, j], cfg)
    return acc


def bch_differential_at_zero_right(L: LieAlgebra, x, cfg: BchConfig = DEFAULT_CONFIG,
                                   n_terms: int = 30) -> np.ndarray:
    """Matrix of ``y -> d/de (e y) * x`` at e = 0.

    Summed from the exact series coefficients in powers of ``ad x``;
    ``n_terms`` terms are kept (far beyond float precision for |x| <= 1).
    """
    x = L.vector(x)
    if L.norm(x) >= cfg.domain_radius:
        warnings.warn(f"|x| = {L.norm(x):.4g} outside the convergence ball", BchDomainWarning, stacklevel=2)
    ad = adjoint(L, x)
    coeffs = right_differential_coefficients(n_terms)
    out = np.zeros_like(ad)
    # Horner in ad x
    for a in reversed(coeffs):
        out = out @ ad + a * np.eye(L.dim)
    cond = float(np.linalg.cond(out))
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericFailure(f"right differential is singular (condition number {cond:.3e})", cond)
    return out
