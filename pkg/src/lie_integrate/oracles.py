"""Group-level oracles in a faithful matrix realization.

These never touch the Dynkin series: they exponentiate, multiply and take
principal matrix logarithms, then pull results back to algebra coordinates.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import NumericFailure
from .representation import Representation, apply


def pull_back(R: Representation, m: np.ndarray) -> np.ndarray:
    """Coordinates of the matrix ``m`` in the span of the representation's basis images."""
    basis = R.matrices.reshape(len(R.matrices), -1).T
    coords, *_ = np.linalg.lstsq(basis, np.asarray(m).ravel(), rcond=None)
    gap = np.linalg.norm(basis @ coords - np.asarray(m).ravel())
    if gap > 1e-8 * max(1.0, np.linalg.norm(m)):
        raise NumericFailure(f"matrix is not in the image of the representation (gap {gap:.2e})")
    return coords


def principal_log(m: np.ndarray) -> np.ndarray:
    out = scipy.linalg.logm(m)
    if np.iscomplexobj(out):
        if np.abs(out.imag).max() > 1e-10:
            raise NumericFailure("principal logarithm is not real")
        out = out.real
    return out


def bch_log_oracle(R: Representation, xs) -> np.ndarray:
    """``log(e^{X1} ... e^{Xn})`` pulled back to coordinates."""
    g = np.eye(R.dim_H)
    for x in xs:
        g = g @ scipy.linalg.expm(apply(R, x))
    return pull_back(R, principal_log(g))


def iwasawa_components(R: Representation, z) -> list[np.ndarray]:
    """Factor ``exp(a(z)) = K A N`` by QR and return the logs of K, A, N in coordinates.

    K is orthogonal, A positive diagonal, N unipotent upper triangular; the
    sign normalization makes diag(A) positive.
    """
    g = scipy.linalg.expm(apply(R, z))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs
    r = signs[:, None] * r
    a = np.diag(np.diag(r))
    n = np.linalg.solve(a, r)
    return [pull_back(R, principal_log(f)) for f in (q, a, n)]
