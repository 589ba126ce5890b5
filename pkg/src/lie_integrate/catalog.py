"""Built-in fixture algebras, decompositions and representations.

Every claim an entry makes (skew generators, nilpotency, blocks being
subalgebras, the oracle representation being faithful) is re-checked when
the entry is built; nothing is trusted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import Decomposition, LieAlgebra, bracket, validate
from .errors import PreconditionFailure
from .representation import Representation

SO3_BRACKETS = [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (0, 2, 1, -1.0)]


@dataclass
class CatalogEntry:
    name: str
    algebra: LieAlgebra
    decompositions: dict[str, Decomposition]
    representations: dict[str, Representation]
    oracle: str | None = None  # name of a faithful representation used by matrix-log oracles
    notes: str = ""
    claims: dict = field(default_factory=dict)

    @property
    def oracle_representation(self) -> Representation | None:
        return None if self.oracle is None else self.representations[self.oracle]

    def check(self) -> None:
        """Re-validate every claimed property; raise with the location on failure."""
        rep = validate(self.algebra)
        for rec in rep.failures:
            raise PreconditionFailure(f"{self.name}: algebra {rec.check_name} violated at {rec.details['location']}")
        for rname, r in self.representations.items():
            for rec in r.validate().failures:
                raise PreconditionFailure(f"{self.name}/{rname}: {rec.check_name} residual {rec.residual:.3e}")
        if "nilpotent" in self.claims and self.algebra.is_nilpotent() != self.claims["nilpotent"]:
            raise PreconditionFailure(f"{self.name}: nilpotency claim does not hold")
        for dname in self.claims.get("subalgebra_blocks", ()):
            D = self.decompositions[dname]
            for j, b in enumerate(D.blocks):
                for u in b.T:
                    for w in b.T:
                        if D.in_block_residual(j, bracket(self.algebra, u, w)) > 1e-12:
                            raise PreconditionFailure(f"{self.name}/{dname}: block {D.names[j]} is not a subalgebra")
        if self.oracle is not None:
            mats = self.oracle_representation.matrices
            if np.linalg.matrix_rank(mats.reshape(len(mats), -1)) < self.algebra.dim:
                raise PreconditionFailure(f"{self.name}: oracle representation {self.oracle} is not faithful")


# -- matrix helpers ------------------------------------------------------------


def unit(n: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((n, n))
    m[i, j] = 1.0
    return m


def so3_generators() -> np.ndarray:
    """Skew 3x3 generators of rotations about the coordinate axes."""
    return np.array([
        [[0, 0, 0], [0, 0, -1], [0, 1, 0]],
        [[0, 0, 1], [0, 0, 0], [-1, 0, 0]],
        [[0, -1, 0], [1, 0, 0], [0, 0, 0]],
    ], dtype=float)


def spin_matrices(j: int) -> np.ndarray:
    """Real skew generators of the (2j+1)-dimensional irreducible so(3) representation.

    Built from the standard ladder-operator matrices and conjugated into the
    real spherical-harmonic basis, where integer-spin generators are real.
    """
    if int(j) != j or j < 0:
        raise ValueError("only integer spin has a real form")
    j = int(j)
    ms = np.arange(j, -j - 1, -1)
    n = len(ms)
    jp = np.zeros((n, n), dtype=complex)
    for a in range(1, n):
        m = ms[a]
        jp[a - 1, a] = np.sqrt(j * (j + 1) - m * (m + 1))
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    jz = np.diag(ms).astype(complex)
    pos = {int(m): a for a, m in enumerate(ms)}
    u = np.zeros((n, n), dtype=complex)
    s = 1 / np.sqrt(2)
    for r, m in enumerate(range(-j, j + 1)):
        sign = (-1) ** abs(m)
        if m > 0:
            u[r, pos[-m]], u[r, pos[m]] = s, sign * s
        elif m == 0:
            u[r, pos[0]] = 1.0
        else:
            u[r, pos[m]], u[r, pos[-m]] = 1j * s, -1j * sign * s
    out = [u @ (-1j * g) @ u.conj().T for g in (jx, jy, jz)]
    if max(np.abs(g.imag).max() for g in out) > 1e-12:
        raise AssertionError("real-basis transform failed")
    return np.array([g.real for g in out])


def su2_generators() -> np.ndarray:
    """-i sigma_k / 2, complex 2x2."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return np.array([-0.5j * s for s in (sx, sy, sz)])


def rotation_block(n_blocks: int, k: int) -> np.ndarray:
    j = np.array([[0.0, -1.0], [1.0, 0.0]])
    m = np.zeros((2 * n_blocks, 2 * n_blocks))
    m[2 * k:2 * k + 2, 2 * k:2 * k + 2] = j
    return m


# -- entries ---------------------------------------------------------------------


def so3_algebra() -> LieAlgebra:
    return LieAlgebra(3, SO3_BRACKETS, ["e1", "e2", "e3"], name="so3")


def so3() -> CatalogEntry:
    L = so3_algebra()
    return CatalogEntry(
        "so3", L,
        {"axes": Decomposition.coordinate_blocks(3, [[0], [1], [2]], ["a1", "a2", "a3"])},
        {"defining": Representation(L, so3_generators(), skew=True, name="defining"),
         "spin2": Representation(L, spin_matrices(2), skew=True, name="spin2")},
        oracle="defining",
        notes="[e_i, e_j] = eps_ijk e_k; three one-dimensional blocks (Euler-angle chart)",
        claims={"nilpotent": False, "subalgebra_blocks": ["axes"]},
    )


def su2_realified() -> CatalogEntry:
    L = LieAlgebra(3, SO3_BRACKETS, ["u1", "u2", "u3"], name="su2-realified")
    return CatalogEntry(
        "su2-realified", L,
        {"torus+complement": Decomposition.coordinate_blocks(3, [[2], [0, 1]], ["t", "m"])},
        {"defining-realified": Representation.from_complex(L, su2_generators(), skew=True,
                                                           name="defining-realified")},
        oracle="defining-realified",
        notes="-i sigma/2 acting on C^2, realified to R^4",
        claims={"nilpotent": False},
    )


def heisenberg3() -> CatalogEntry:
    L = LieAlgebra(3, [(0, 1, 2, 1.0)], ["p", "q", "z"], name="heisenberg3")
    upper = np.array([unit(3, 0, 1), unit(3, 1, 2), unit(3, 0, 2)])
    quotient = np.array([rotation_block(2, 0), rotation_block(2, 1), np.zeros((4, 4))])
    return CatalogEntry(
        "heisenberg3", L,
        {"p+qz": Decomposition.coordinate_blocks(3, [[0], [1, 2]], ["p", "qz"])},
        {"upper-triangular": Representation(L, upper, skew=False, name="upper-triangular"),
         "center-quotient": Representation(L, quotient, skew=True, name="center-quotient")},
        oracle="upper-triangular",
        notes="[p, q] = z; skew representation factors through the abelian quotient",
        claims={"nilpotent": True, "subalgebra_blocks": ["p+qz"]},
    )


def sl2() -> CatalogEntry:
    L = LieAlgebra(3, [(0, 1, 2, 1.0), (0, 2, 0, -2.0), (1, 2, 1, 2.0)], ["e", "f", "h"], name="sl2")
    iwasawa = Decomposition((np.array([[1.0], [-1.0], [0.0]]),
                             np.array([[0.0], [0.0], [1.0]]),
                             np.array([[1.0], [0.0], [0.0]])), ("K", "A", "N"))
    defining = np.array([unit(2, 0, 1), unit(2, 1, 0), np.diag([1.0, -1.0])])
    return CatalogEntry(
        "sl2", L,
        {"iwasawa": iwasawa},
        {"defining": Representation(L, defining, skew=False, name="defining")},
        oracle="defining",
        notes="basis (e, f, h); Iwasawa blocks K = R(e - f), A = R h, N = R e",
        claims={"nilpotent": False, "subalgebra_blocks": ["iwasawa"]},
    )


def upper_triangular3() -> CatalogEntry:
    mats = [unit(3, 0, 0), unit(3, 1, 1), unit(3, 2, 2), unit(3, 0, 1), unit(3, 1, 2), unit(3, 0, 2)]
    L = LieAlgebra.from_matrices(mats, ["d1", "d2", "d3", "n12", "n23", "n13"], name="upper-triangular-3")
    return CatalogEntry(
        "upper-triangular-3", L,
        {"diagonal+strict": Decomposition.coordinate_blocks(6, [[0, 1, 2], [3, 4, 5]], ["diag", "strict"])},
        {"defining": Representation(L, np.array(mats), skew=False, name="defining")},
        oracle="defining",
        notes="solvable Borel subalgebra of gl(3)",
        claims={"nilpotent": False, "subalgebra_blocks": ["diagonal+strict"]},
    )


def abelian4() -> CatalogEntry:
    L = LieAlgebra(4, [], ["c1", "c2", "c3", "c4"], name="abelian-4")
    return CatalogEntry(
        "abelian-4", L,
        {"pairs": Decomposition.coordinate_blocks(4, [[0, 1], [2, 3]], ["b1", "b2"])},
        {"rotations": Representation(L, np.array([rotation_block(4, k) for k in range(4)]), skew=True,
                                     name="rotations"),
         "diagonal": Representation(L, np.array([unit(4, k, k) for k in range(4)]), skew=False, name="diagonal")},
        oracle="diagonal",
        notes="degenerate control: every bracket vanishes",
        claims={"nilpotent": True, "subalgebra_blocks": ["pairs"]},
    )


def broken_so3() -> CatalogEntry:
    """Negative control: so(3) defining representation with one entry off by 1e-3."""
    L = so3_algebra()
    mats = so3_generators()
    mats[0, 0, 1] += 1e-3
    return CatalogEntry(
        "so3-broken", L,
        {"axes": Decomposition.coordinate_blocks(3, [[0], [1], [2]], ["a1", "a2", "a3"])},
        {"perturbed": Representation(L, mats, skew=True, name="perturbed", strict=False)},
        oracle=None,
        notes="deliberately invalid; not part of load_catalog()",
    )


_BUILDERS = {
    "so3": so3,
    "su2-realified": su2_realified,
    "heisenberg3": heisenberg3,
    "sl2": sl2,
    "upper-triangular-3": upper_triangular3,
    "abelian-4": abelian4,
}

NEGATIVE_CONTROLS = {"so3-broken": broken_so3}


def load_catalog() -> list[CatalogEntry]:
    entries = []
    for build in _BUILDERS.values():
        entry = build()
        entry.check()
        entries.append(entry)
    return entries


def entry_names(include_controls: bool = False) -> list[str]:
    names = list(_BUILDERS)
    if include_controls:
        names += list(NEGATIVE_CONTROLS)
    return names


def get_entry(name: str) -> CatalogEntry:
    if name in _BUILDERS:
        entry = _BUILDERS[name]()
        entry.check()
        return entry
    if name in NEGATIVE_CONTROLS:
        return NEGATIVE_CONTROLS[name]()
    raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(entry_names(True))}")
