"""Matrix representations of a Lie algebra on R^N and their identity checks.

The Hilbert space is R^N with the standard inner product; the dense domain is
all of it, so invariance of the domain under the one-parameter groups and
essential skew-adjointness of skew generators hold trivially. Complex
representations are realified on input.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.linalg

from .algebra import LieAlgebra, exp_ad
from .errors import InvalidArgument, PreconditionFailure
from .logderiv import DEFAULT_RULE, SmoothPath, log_derivative
from .numerics import QuadratureRule, derivative
from .report import CheckRecord, VerificationReport

HOMOMORPHISM_TOL = 1e-10
SKEW_TOL = 1e-12
FINITE_DIM_NOTE = "trivially satisfied (finite dimension)"


def realify(m: np.ndarray) -> np.ndarray:
    """Real 2N x 2N form of a complex N x N matrix, acting on (Re v, Im v)."""
    m = np.asarray(m, dtype=complex)
    a, b = m.real, m.imag
    return np.block([[a, -b], [b, a]])


class Representation:
    """Linear map from the algebra basis to real square matrices.

    Homomorphism and (when ``skew`` is claimed) skew-symmetry are validated
    at construction; with ``strict=False`` a failing representation is still
    built so that negative controls can be exercised.
    """

    def __init__(self, algebra: LieAlgebra, matrices, skew: bool = False, name: str = "", strict: bool = True):
        mats = np.array(matrices, dtype=float)
        if mats.ndim != 3 or mats.shape[0] != algebra.dim or mats.shape[1] != mats.shape[2]:
            raise InvalidArgument(
                f"expected {algebra.dim} square matrices, got array of shape {mats.shape}")
        if not np.all(np.isfinite(mats)):
            raise InvalidArgument("non-finite matrix entries")
        mats.setflags(write=False)
        self.algebra = algebra
        self.matrices = mats
        self.skew = bool(skew)
        self.name = name
        self.homomorphism_residual, self.homomorphism_location = self._homomorphism_residual()
        self.skew_residual = float(max(np.max(np.abs(m + m.T)) for m in mats)) if self.skew else float("nan")
        if strict:
            if self.homomorphism_residual > HOMOMORPHISM_TOL:
                raise PreconditionFailure(
                    f"representation {name!r} is not a homomorphism: residual {self.homomorphism_residual:.3e} "
                    f"at basis pair {self.homomorphism_location}")
            if self.skew and self.skew_residual > SKEW_TOL:
                raise PreconditionFailure(
                    f"representation {name!r} claimed skew but residual is {self.skew_residual:.3e}")

    @classmethod
    def from_complex(cls, algebra: LieAlgebra, matrices, skew: bool = False, name: str = "", strict: bool = True):
        return cls(algebra, [realify(m) for m in matrices], skew, name, strict)

    @property
    def dim_H(self) -> int:
        return self.matrices.shape[1]

    def _homomorphism_residual(self):
        c = self.algebra.structure_tensor
        mats = self.matrices
        worst, where = 0.0, None
        for i in range(len(mats)):
            for j in range(i + 1, len(mats)):
                lhs = np.tensordot(c[i, j], mats, axes=1)
                rhs = mats[i] @ mats[j] - mats[j] @ mats[i]
                r = float(np.linalg.norm(lhs - rhs, 2))
                if r > worst:
                    worst, where = r, (i, j)
        return worst, where

    def validate(self) -> VerificationReport:
        rep = VerificationReport(config={"representation": self.name})
        loc = None
        if self.homomorphism_location is not None:
            i, j = self.homomorphism_location
            loc = [self.algebra.basis_names[i], self.algebra.basis_names[j]]
        rep.add(CheckRecord("homomorphism", self.homomorphism_residual, HOMOMORPHISM_TOL,
                            details={"location": loc}))
        if self.skew:
            rep.add(CheckRecord("skew", self.skew_residual, SKEW_TOL,
                                details={"A1": FINITE_DIM_NOTE, "A2": FINITE_DIM_NOTE}))
        return rep

    def to_dict(self, algebra_ref: str = "") -> dict:
        return {"algebra": algebra_ref or self.algebra.name, "dim_H": self.dim_H,
                "matrices": [m.ravel().tolist() for m in self.matrices], "skew": self.skew}

    def __repr__(self):
        return f"<Representation {self.name!r} dim_H={self.dim_H} skew={self.skew}>"


def representation_from_dict(data: dict, algebra: LieAlgebra, name: str = "", strict: bool = True) -> Representation:
    """Parse ``{"dim_H": N, "matrices": [...], "skew": bool}``.

    Each matrix is row-major: either a flat list of N*N numbers or a list of rows.
    """
    try:
        n = int(data["dim_H"])
        raw = data["matrices"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgument(f"representation {name!r}: missing or malformed field ({exc})") from None
    mats = []
    for k, m in enumerate(raw):
        a = np.asarray(m, dtype=float)
        if a.ndim == 1:
            if a.size != n * n:
                raise InvalidArgument(f"representation {name!r}: matrices[{k}] has {a.size} entries, expected {n * n}")
            a = a.reshape(n, n)
        if a.shape != (n, n):
            raise InvalidArgument(f"representation {name!r}: matrices[{k}] has shape {a.shape}")
        mats.append(a)
    return Representation(algebra, mats, bool(data.get("skew", False)), name or data.get("name", ""), strict)


# -- operations -------------------------------------------------------------------


def apply(R: Representation, x) -> np.ndarray:
    x = R.algebra.vector(x)
    return np.tensordot(x, R.matrices, axes=1)


def exp_op(R: Representation, x) -> np.ndarray:
    return scipy.linalg.expm(apply(R, x))


def orthogonality_residual(u: np.ndarray) -> float:
    return float(np.linalg.norm(u.T @ u - np.eye(u.shape[0]), 2))


def commutation_residual(R: Representation, x, y) -> float:
    """Operator 2-norm of ``e^{a(x)} a(y) e^{-a(x)} - a(exp(ad x) y)``."""
    L = R.algebra
    x, y = L.vector(x), L.vector(y)
    lhs = exp_op(R, x) @ apply(R, y) @ exp_op(R, -x)
    rhs = apply(R, exp_ad(L, x) @ y)
    return float(np.linalg.norm(lhs - rhs, 2))


def constancy_residual(R: Representation, x, y, grid: Sequence[float], v) -> float:
    """``max_s |F(s) - F(0)|`` for ``F(s) = e^{(1-s)a(x)} a(exp(s ad x) y) e^{(s-1)a(x)} v``."""
    L = R.algebra
    x, y = L.vector(x), L.vector(y)
    v = np.asarray(v, dtype=float)

    def F(s):
        return exp_op(R, (1 - s) * x) @ (apply(R, exp_ad(L, s * x) @ y) @ (exp_op(R, (s - 1) * x) @ v))

    f0 = F(0.0)
    return max((float(np.linalg.norm(F(s) - f0)) for s in grid), default=0.0)


def duhamel_residual(R: Representation, x, y, t: float, v, q: QuadratureRule = DEFAULT_RULE) -> float:
    """``|e^{tB}v - e^{tA}v - int_0^t e^{sB}(B-A)e^{(t-s)A}v ds|`` with A = a(x), B = a(y)."""
    A, B = apply(R, x), apply(R, y)
    v = np.asarray(v, dtype=float)
    if t == 0:
        return 0.0
    lhs = scipy.linalg.expm(t * B) @ v - scipy.linalg.expm(t * A) @ v
    diff = B - A
    integral = q.integrate(lambda s: scipy.linalg.expm(s * B) @ (diff @ (scipy.linalg.expm((t - s) * A) @ v)), 0.0, t)
    return float(np.linalg.norm(lhs - integral))


def fsss_pairing_residual(R: Representation, x, y, v, w) -> float:
    """``|<-e^{a(x)} a(y) v, w> - <e^{a(x)} v, a(exp(ad x) y) w>|``; needs a skew representation."""
    if not R.skew:
        raise PreconditionFailure("pairing identity requires a skew-symmetric representation")
    L = R.algebra
    x, y = L.vector(x), L.vector(y)
    v, w = np.asarray(v, dtype=float), np.asarray(w, dtype=float)
    u = exp_op(R, x)
    lhs = -(u @ (apply(R, y) @ v)) @ w
    rhs = (u @ v) @ (apply(R, exp_ad(L, x) @ y) @ w)
    return float(abs(lhs - rhs))


def derpath_residual(R: Representation, p: SmoothPath, t: float, v, q: QuadratureRule = DEFAULT_RULE,
                     h: float = 1e-4, richardson: bool = True) -> float:
    """Gap between the finite-difference derivative of ``t -> e^{a(p(t))} v`` and
    ``a(delta(p)_t) e^{a(p(t))} v``."""
    L = R.algebra
    v = np.asarray(v, dtype=float)
    fd = derivative(lambda s: exp_op(R, p(s)) @ v, t, h, richardson, *p.interval)
    delta = log_derivative(L, p, t, q)
    exact = apply(R, delta) @ (exp_op(R, p(t)) @ v)
    return float(np.linalg.norm(fd - exact))
