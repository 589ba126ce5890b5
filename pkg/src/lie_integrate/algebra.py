"""Finite-dimensional real Lie algebras given by structure constants.

Elements are plain numpy coordinate vectors in the declared basis and linear
maps (``ad x``, ``exp(ad x)``, chart differentials) are plain square arrays.
The norm on the algebra is the l2 norm of coordinates; operator bounds use
the induced 2-norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import InvalidArgument, PreconditionFailure
from .report import CheckRecord, VerificationReport

JACOBI_TOL = 1e-12
PROJECTOR_TOL = 1e-10


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class LieAlgebra:
    """Real Lie algebra of dimension ``dim`` with bracket from structure constants.

    ``brackets`` is an iterable of ``(i, j, k, value)`` meaning that the
    k-th coordinate of [e_i, e_j] is ``value``. Entries with i < j are the
    canonical form; the antisymmetric completion is automatic. Entries given
    with i > j are accepted and flipped. Conflicting duplicates and nonzero
    diagonal entries are kept as defects and reported by :func:`validate`.
    """

    def __init__(self, dim: int, brackets: Iterable[Sequence[float]] = (), basis_names: Sequence[str] | None = None,
                 name: str = ""):
        if int(dim) != dim or dim < 1:
            raise InvalidArgument(f"dim must be a positive integer, got {dim!r}")
        self.dim = int(dim)
        self.name = name
        if basis_names is None:
            basis_names = [f"e{i}" for i in range(self.dim)]
        if len(basis_names) != self.dim:
            raise InvalidArgument(f"expected {self.dim} basis names, got {len(basis_names)}")
        self.basis_names = tuple(str(b) for b in basis_names)

        c = np.zeros((self.dim, self.dim, self.dim))
        declared: dict[tuple[int, int, int], float] = {}
        defects = []
        for pos, entry in enumerate(brackets):
            if len(entry) != 4:
                raise InvalidArgument(f"brackets[{pos}]: expected [i, j, k, value], got {entry!r}")
            i, j, k = (int(v) for v in entry[:3])
            value = float(entry[3])
            if any(int(v) != v for v in entry[:3]):
                raise InvalidArgument(f"brackets[{pos}]: indices must be integers")
            if not all(0 <= v < self.dim for v in (i, j, k)):
                raise InvalidArgument(f"brackets[{pos}]: index out of range for dim {self.dim}")
            if not np.isfinite(value):
                raise InvalidArgument(f"brackets[{pos}]: non-finite value")
            if i == j:
                if value != 0.0:
                    defects.append(((i, i, k), abs(value)))
                continue
            if i > j:
                i, j, value = j, i, -value
            key = (i, j, k)
            if key in declared:
                if declared[key] != value:
                    defects.append((key, abs(declared[key] - value)))
                continue
            declared[key] = value
            c[i, j, k] = value
            c[j, i, k] = -value
        self._c = _frozen(c)
        self._antisymmetry_defects = tuple(defects)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_structure_tensor(cls, c: np.ndarray, basis_names=None, name: str = "", tol: float = 0.0):
        c = np.asarray(c, dtype=float)
        dim = c.shape[0]
        entries = [(i, j, k, c[i, j, k]) for i in range(dim) for j in range(i + 1, dim)
                   for k in range(dim) if abs(c[i, j, k]) > tol]
        return cls(dim, entries, basis_names, name)

    @classmethod
    def from_matrices(cls, matrices: Sequence[np.ndarray], basis_names=None, name: str = "", tol: float = 1e-13):
        """Structure constants of the matrix Lie algebra spanned by ``matrices``."""
        mats = np.asarray(matrices, dtype=float)
        dim = mats.shape[0]
        flat = mats.reshape(dim, -1).T
        if np.linalg.matrix_rank(flat) < dim:
            raise InvalidArgument("basis matrices are linearly dependent")
        c = np.zeros((dim, dim, dim))
        for i in range(dim):
            for j in range(i + 1, dim):
                comm = mats[i] @ mats[j] - mats[j] @ mats[i]
                coords, *_ = np.linalg.lstsq(flat, comm.ravel(), rcond=None)
                if np.linalg.norm(flat @ coords - comm.ravel()) > 1e-10:
                    raise InvalidArgument(f"span of matrices is not closed under the commutator ({i}, {j})")
                coords[np.abs(coords) <= tol] = 0.0
                c[i, j] = coords
                c[j, i] = -coords
        return cls.from_structure_tensor(c, basis_names, name)

    # -- accessors ------------------------------------------------------------

    @property
    def structure_tensor(self) -> np.ndarray:
        """Dense array ``c[i, j, k]`` = k-th coordinate of [e_i, e_j]."""
        return self._c

    @property
    def brackets(self) -> list[tuple[int, int, int, float]]:
        d = self.dim
        return [(i, j, k, float(self._c[i, j, k])) for i in range(d) for j in range(i + 1, d)
                for k in range(d) if self._c[i, j, k] != 0.0]

    def basis_vector(self, i: int | str) -> np.ndarray:
        if isinstance(i, str):
            i = self.basis_names.index(i)
        e = np.zeros(self.dim)
        e[i] = 1.0
        return e

    def vector(self, x) -> np.ndarray:
        """Coerce ``x`` to a coordinate vector of this algebra."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise InvalidArgument(f"expected a vector of length {self.dim}, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InvalidArgument("non-finite coordinates")
        return x

    def norm(self, x) -> float:
        return float(np.linalg.norm(x))

    def nilpotency_class(self) -> int | None:
        """Length of the lower central series g > [g,g] > ... > 0, or None if it stalls."""
        span = np.eye(self.dim)
        for k in range(1, self.dim + 2):
            imgs = np.einsum("ijk,jm->kim", self._c, span).reshape(self.dim, -1)
            if not np.any(imgs):
                return k
            u, s, _ = np.linalg.svd(imgs, full_matrices=False)
            nxt = u[:, s > 1e-10 * max(1.0, s[0])]
            if nxt.shape[1] == span.shape[1]:
                return None
            span = nxt
        return None

    def is_nilpotent(self) -> bool:
        return self.nilpotency_class() is not None

    def __eq__(self, other):
        if not isinstance(other, LieAlgebra):
            return NotImplemented
        return (self.dim == other.dim and self.basis_names == other.basis_names
                and np.array_equal(self._c, other._c))

    def __hash__(self):
        return hash((self.dim, self.basis_names, self._c.tobytes()))

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<LieAlgebra{label} dim={self.dim}>"


# -- operations ---------------------------------------------------------------


def bracket(L: LieAlgebra, x, y) -> np.ndarray:
    x, y = L.vector(x), L.vector(y)
    return np.einsum("i,j,ijk->k", x, y, L.structure_tensor)


def adjoint(L: LieAlgebra, x) -> np.ndarray:
    """Matrix of ``ad x`` acting on coordinates: ``adjoint(x) @ y == bracket(x, y)``."""
    x = L.vector(x)
    return np.einsum("i,ijk->kj", x, L.structure_tensor)


def exp_ad(L: LieAlgebra, x) -> np.ndarray:
    """``exp(ad x)`` by scaling and squaring (scipy's Pade-13 kernel)."""
    return scipy.linalg.expm(adjoint(L, x))


def conjugation_differential_at_zero(L: LieAlgebra, x) -> np.ndarray:
    """Differential at 0 of ``y -> x*y*(-x)``; in closed form this is ``exp(ad x)``."""
    return exp_ad(L, x)


def validate(L: LieAlgebra, tol: float = JACOBI_TOL) -> VerificationReport:
    """Antisymmetry and Jacobi residuals of the declared structure constants.

    Never raises; violations are located in the record details.
    """
    report = VerificationReport(config={"algebra": L.name, "tolerance": tol})
    c = L.structure_tensor

    anti = 0.0
    anti_where = None
    for key, gap in L._antisymmetry_defects:
        if gap > anti:
            anti, anti_where = gap, list(key)
    completed = float(np.max(np.abs(c + c.transpose(1, 0, 2)), initial=0.0))
    if completed > anti:
        anti = completed
    report.add(CheckRecord("antisymmetry", anti, tol, details={"location": anti_where}))

    # J[i,j,k,:] = [e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]]
    t = np.einsum("jkm,imn->ijkn", c, c)
    jac = t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)
    abs_jac = np.abs(jac)
    worst = float(abs_jac.max(initial=0.0))
    where = None
    if worst > 0.0:
        i, j, k, n = np.unravel_index(np.argmax(abs_jac), abs_jac.shape)
        where = {"triple": [int(i), int(j), int(k)], "coordinate": int(n),
                 "names": [L.basis_names[int(i)], L.basis_names[int(j)], L.basis_names[int(k)]]}
    report.add(CheckRecord("jacobi", worst, tol, details={"location": where}))
    return report


# -- decompositions ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Ordered direct-sum decomposition of the algebra into subspaces.

    ``blocks[j]`` is a ``dim x dim_j`` matrix whose columns span the j-th
    subspace. Projectors onto each summand along the others are computed once.
    """

    blocks: tuple
    names: tuple = ()
    condition_number: float = field(init=False)
    projectors: tuple = field(init=False)
    _inverse: np.ndarray = field(init=False, repr=False)
    _slices: tuple = field(init=False, repr=False)

    def __post_init__(self):
        blocks = []
        for j, b in enumerate(self.blocks):
            b = np.atleast_2d(np.asarray(b, dtype=float))
            if b.ndim != 2:
                raise InvalidArgument(f"block {j} must be a matrix")
            blocks.append(_frozen(b))
        if not blocks:
            raise InvalidArgument("decomposition needs at least one block")
        dim = blocks[0].shape[0]
        if any(b.shape[0] != dim for b in blocks):
            raise InvalidArgument("all blocks must have the same number of rows (the algebra dimension)")
        full = np.hstack(blocks)
        if full.shape != (dim, dim):
            raise PreconditionFailure(
                f"block column counts sum to {full.shape[1]}, need {dim} for a direct sum")
        cond = float(np.linalg.cond(full))
        if not np.isfinite(cond) or cond > 1e12:
            raise PreconditionFailure(f"blocks do not form a direct sum (condition number {cond:.3e})")
        inv = np.linalg.inv(full)
        slices, start = [], 0
        for b in blocks:
            slices.append(slice(start, start + b.shape[1]))
            start += b.shape[1]
        projectors = tuple(_frozen(b @ inv[s]) for b, s in zip(blocks, slices))
        names = tuple(self.names) if self.names else tuple(f"a{j + 1}" for j in range(len(blocks)))
        if len(names) != len(blocks):
            raise InvalidArgument("one name per block required")
        object.__setattr__(self, "blocks", tuple(blocks))
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "condition_number", cond)
        object.__setattr__(self, "projectors", projectors)
        object.__setattr__(self, "_inverse", _frozen(inv))
        object.__setattr__(self, "_slices", tuple(slices))
        # partition of identity; raise only if construction went numerically wrong
        self._check_projectors()

    @classmethod
    def trivial(cls, dim: int) -> "Decomposition":
        return cls((np.eye(dim),), ("g",))

    @classmethod
    def coordinate_blocks(cls, dim: int, groups: Sequence[Sequence[int]], names=()) -> "Decomposition":
        eye = np.eye(dim)
        return cls(tuple(eye[:, list(g)] for g in groups), tuple(names))

    @property
    def n(self) -> int:
        return len(self.blocks)

    @property
    def dim(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def block_dims(self) -> tuple[int, ...]:
        return tuple(b.shape[1] for b in self.blocks)

    def _check_projectors(self):
        d = self.dim
        total = sum(self.projectors)
        worst = float(np.max(np.abs(total - np.eye(d))))
        for j, pj in enumerate(self.projectors):
            for k, pk in enumerate(self.projectors):
                if j != k:
                    worst = max(worst, float(np.max(np.abs(pj @ pk))))
        if worst > PROJECTOR_TOL:
            raise PreconditionFailure(f"projectors fail partition of identity (residual {worst:.3e})")

    def projector_residual(self) -> float:
        d = self.dim
        worst = float(np.max(np.abs(sum(self.projectors) - np.eye(d))))
        for j, pj in enumerate(self.projectors):
            for k, pk in enumerate(self.projectors):
                if j != k:
                    worst = max(worst, float(np.max(np.abs(pj @ pk))))
        return worst

    def block_coordinates(self, x) -> list[np.ndarray]:
        """Coordinates of each component of ``x`` in its block's column basis."""
        c = self._inverse @ np.asarray(x, dtype=float)
        return [c[s] for s in self._slices]

    def from_block_coordinates(self, coords: np.ndarray) -> list[np.ndarray]:
        """Split a concatenated block-coordinate vector into algebra components."""
        return [b @ coords[s] for b, s in zip(self.blocks, self._slices)]

    def components_batch(self, coords: np.ndarray) -> np.ndarray:
        """(batch, total) block coordinates -> (batch, n, dim) components."""
        return np.stack([coords[:, s] @ b.T for b, s in zip(self.blocks, self._slices)], axis=1)

    def in_block_residual(self, j: int, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(self.projectors[j] @ x - x))

    def reordered(self, order: Sequence[int]) -> "Decomposition":
        order = list(order)
        if sorted(order) != list(range(self.n)):
            raise InvalidArgument(f"{order} is not a permutation of the blocks")
        return Decomposition(tuple(self.blocks[j] for j in order), tuple(self.names[j] for j in order))

    def to_list(self) -> list:
        """Blocks as lists of column vectors (the file format)."""
        return [b.T.tolist() for b in self.blocks]


def project(D: Decomposition, x) -> list[np.ndarray]:
    x = np.asarray(x, dtype=float)
    if x.shape != (D.dim,):
        raise InvalidArgument(f"expected a vector of length {D.dim}, got shape {x.shape}")
    return [p @ x for p in D.projectors]


# -- file format -------------------------------------------------------------


def algebra_from_dict(data: dict, name: str = "") -> tuple[LieAlgebra, dict[str, Decomposition]]:
    """Parse an algebra definition.

    Returns the algebra and a name -> Decomposition map. A single
    ``"decomposition"`` key yields the entry ``"default"``; the optional
    ``"decompositions"`` object adds named ones. Without either, the trivial
    one-block decomposition is returned as ``"default"``.
    """
    if not isinstance(data, dict):
        raise InvalidArgument("algebra definition must be a JSON object")
    for key in ("dim", "brackets"):
        if key not in data:
            raise InvalidArgument(f"missing required key {key!r}")
    dim = data["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise InvalidArgument("'dim' must be an integer")
    L = LieAlgebra(dim, data["brackets"], data.get("basis"), name=data.get("name", name))
    decomps: dict[str, Decomposition] = {}

    def parse_blocks(blocks, where):
        names = ()
        if isinstance(blocks, dict):
            # named form {"blocks": [...], "names": [...]}
            names = tuple(blocks.get("names", ()))
            blocks, where = blocks.get("blocks"), f"{where}.blocks"
        if not isinstance(blocks, list) or not blocks:
            raise InvalidArgument(f"{where}: expected a non-empty list of blocks")
        out = []
        for j, cols in enumerate(blocks):
            cols = np.asarray(cols, dtype=float)
            if cols.ndim != 2 or cols.shape[1] != dim:
                raise InvalidArgument(f"{where}[{j}]: each block is a list of column vectors of length {dim}")
            out.append(cols.T)
        return Decomposition(tuple(out), names)

    if "decomposition" in data:
        decomps["default"] = parse_blocks(data["decomposition"], "decomposition")
    for dname, blocks in data.get("decompositions", {}).items():
        decomps[dname] = parse_blocks(blocks, f"decompositions.{dname}")
    if not decomps:
        decomps["default"] = Decomposition.trivial(dim)
    return L, decomps


def algebra_to_dict(L: LieAlgebra, decompositions: dict[str, Decomposition] | None = None) -> dict:
    out = {"dim": L.dim, "basis": list(L.basis_names), "brackets": [list(b) for b in L.brackets]}
    if L.name:
        out["name"] = L.name
    if decompositions:
        out["decompositions"] = {k: {"names": list(d.names), "blocks": d.to_list()}
                                 for k, d in decompositions.items()}
    return out
