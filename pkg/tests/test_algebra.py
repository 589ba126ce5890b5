import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lie_integrate.algebra import (Decomposition, LieAlgebra, adjoint, algebra_from_dict, algebra_to_dict,
                                   bracket, exp_ad, project, validate)
from lie_integrate.catalog import get_entry, so3_generators
from lie_integrate.errors import InvalidArgument, PreconditionFailure
from lie_integrate.numerics import central_difference, observed_order

from conftest import CATALOG, ball, coords


def commutator(a, b):
    return a @ b - b @ a


def test_so3_bracket_matches_rotation_generators(so3):
    L = so3.algebra
    gens = so3_generators()
    for i in range(3):
        for j in range(3):
            expected = commutator(gens[i], gens[j])
            got = np.einsum("k,kab->ab", bracket(L, L.basis_vector(i), L.basis_vector(j)), gens)
            np.testing.assert_array_equal(got, expected)
    np.testing.assert_array_equal(bracket(L, [1, 0, 0], [0, 1, 0]), [0, 0, 1])


def test_heisenberg_bracket_matches_upper_triangular(heis):
    L = heis.algebra
    P, Q, Z = np.zeros((3, 3, 3))
    P[0, 1] = Q[1, 2] = Z[0, 2] = 1.0
    assert np.array_equal(commutator(Q, P), -Z)
    np.testing.assert_array_equal(bracket(L, L.basis_vector("q"), L.basis_vector("p")), [0, 0, -1])


@pytest.mark.parametrize("name", CATALOG)
def test_bracket_self_is_zero(name, rng):
    L = get_entry(name).algebra
    x = rng.standard_normal(L.dim)
    assert np.abs(bracket(L, x, x)).max() <= 1e-15


def test_bracket_rejects_wrong_length(so3):
    with pytest.raises(InvalidArgument):
        bracket(so3.algebra, [1, 0], [0, 1, 0])
    with pytest.raises(InvalidArgument):
        adjoint(so3.algebra, [np.nan, 0, 0])


def test_adjoint_columns_are_brackets(so3):
    L = so3.algebra
    ad3 = adjoint(L, [0, 0, 1])
    np.testing.assert_array_equal(ad3, so3_generators()[2])
    np.testing.assert_array_equal(ad3[:2, :2], [[0, -1], [1, 0]])
    assert not np.any(adjoint(L, np.zeros(3)))


@pytest.mark.parametrize("name", ["so3", "su2-realified", "heisenberg3", "sl2", "abelian-4"])
def test_adjoint_traceless_on_nilpotent_and_semisimple(name, rng):
    L = get_entry(name).algebra
    for _ in range(20):
        assert abs(np.trace(adjoint(L, rng.standard_normal(L.dim)))) <= 1e-14


def test_heisenberg_exp_ad_terminates(heis):
    L = heis.algebra
    np.testing.assert_array_equal(exp_ad(L, [1, 0, 0]) @ [0, 1, 0], [0, 1, 1])


@given(ball(3, 1.0))
def test_exp_ad_inverse(x):
    L = get_entry("so3").algebra
    assert np.abs(exp_ad(L, x) @ exp_ad(L, -x) - np.eye(3)).max() <= 1e-12
    np.testing.assert_array_equal(exp_ad(L, np.zeros(3)), np.eye(3))


@pytest.mark.parametrize("name", CATALOG)
@given(data=st.data())
def test_exp_ad_is_automorphism(name, data):
    L = get_entry(name).algebra
    x, u, v = (data.draw(ball(L.dim, 1.0)) for _ in range(3))
    E = exp_ad(L, x)
    assert np.linalg.norm(bracket(L, E @ u, E @ v) - E @ bracket(L, u, v)) <= 1e-9


@pytest.mark.parametrize("name", CATALOG)
@given(data=st.data())
def test_adjoint_linear(name, data):
    L = get_entry(name).algebra
    x, y = data.draw(coords(L.dim)), data.draw(coords(L.dim))
    a, b = data.draw(st.floats(-3, 3)), data.draw(st.floats(-3, 3))
    lhs = adjoint(L, a * x + b * y)
    rhs = a * adjoint(L, x) + b * adjoint(L, y)
    assert np.abs(lhs - rhs).max() <= 1e-13


def test_exp_ad_derivative_is_bracket(sl2, rng):
    L = sl2.algebra
    x, y = rng.standard_normal(3), rng.standard_normal(3)
    f = lambda t: exp_ad(L, t * x) @ y  # noqa: E731
    errs = [np.linalg.norm(central_difference(f, 0.0, h) - bracket(L, x, y)) for h in (1e-3, 1e-4)]
    assert errs[1] < 1e-7
    assert abs(observed_order(errs[0], errs[1], ratio=10) - 2) < 0.3


def test_exp_ad_accuracy_against_eigendecomposition(so3, rng):
    # ad x on so(3) is skew with eigenvalues 0, +-i|x|: Rodrigues' formula is exact
    L = so3.algebra
    for _ in range(20):
        x = rng.standard_normal(3) * rng.uniform(0.1, 5.0)
        th = np.linalg.norm(x)
        K = adjoint(L, x) / th
        rodrigues = np.eye(3) + np.sin(th) * K + (1 - np.cos(th)) * K @ K
        assert np.abs(exp_ad(L, x) - rodrigues).max() <= 1e-13 * max(1.0, th)


def test_project_sums_to_identity(rng):
    D = get_entry("upper-triangular-3").decompositions["diagonal+strict"]
    for _ in range(100):
        x = rng.standard_normal(6)
        parts = project(D, x)
        assert np.linalg.norm(sum(parts) - x) <= 1e-10
        for j, p in enumerate(parts):
            assert D.in_block_residual(j, p) <= 1e-10


def test_project_block_member(so3):
    D = so3.decompositions["axes"]
    parts = project(D, [0.3, 0, 0])
    np.testing.assert_array_equal(parts[0], [0.3, 0, 0])
    assert not np.any(parts[1]) and not np.any(parts[2])


def test_project_sl2_compact_part(sl2):
    D = sl2.decompositions["iwasawa"]
    parts = project(D, [1, -1, 0])
    np.testing.assert_allclose(parts[0], [1, -1, 0], atol=1e-15)
    assert np.abs(parts[1]).max() <= 1e-15 and np.abs(parts[2]).max() <= 1e-15
    # explicit projector onto the K block
    np.testing.assert_allclose(D.projectors[0] @ [1, -1, 0], [1, -1, 0], atol=1e-15)


def test_decomposition_rejects_dependent_blocks():
    with pytest.raises(PreconditionFailure):
        Decomposition((np.array([[1.0], [0.0]]), np.array([[2.0], [0.0]])))


def test_decomposition_projectors():
    D = get_entry("sl2").decompositions["iwasawa"]
    P = D.projectors
    assert np.abs(sum(P) - np.eye(3)).max() <= 1e-10
    for j in range(3):
        for k in range(3):
            if j != k:
                assert np.abs(P[j] @ P[k]).max() <= 1e-10
    assert D.projector_residual() <= 1e-10


def test_validate_so3_exact(so3):
    rep = validate(so3.algebra)
    assert rep.passed
    assert rep.get("jacobi").residual == 0.0 and rep.get("antisymmetry").residual == 0.0


def test_validate_locates_perturbed_constant(so3):
    bad = [list(b) for b in so3.algebra.brackets]
    bad[0][3] += 1e-6
    bad.append([0, 2, 2, 1e-6])
    rep = validate(LieAlgebra(3, bad))
    jac = rep.get("jacobi")
    assert not jac.passed
    assert jac.details["location"]["triple"] is not None


def test_validate_reports_conflicting_duplicate():
    L = LieAlgebra(2, [[0, 1, 0, 1.0], [1, 0, 0, -0.5]])
    rec = validate(L).get("antisymmetry")
    assert not rec.passed and rec.details["location"] is not None


def test_validate_abelian():
    rep = validate(LieAlgebra(4))
    assert rep.passed


def test_sparse_input_completion():
    L = LieAlgebra(3, [[1, 0, 2, -1.0]])
    np.testing.assert_array_equal(bracket(L, [1, 0, 0], [0, 1, 0]), [0, 0, 1])


def test_from_matrices_reproduces_structure(so3):
    L = LieAlgebra.from_matrices(so3_generators())
    np.testing.assert_allclose(L.structure_tensor, so3.algebra.structure_tensor, atol=1e-14)


def test_nilpotency():
    assert get_entry("heisenberg3").algebra.nilpotency_class() == 2
    assert get_entry("abelian-4").algebra.nilpotency_class() == 1
    assert get_entry("so3").algebra.nilpotency_class() is None


@pytest.mark.parametrize("name", CATALOG)
def test_dict_round_trip(name):
    e = get_entry(name)
    L2, decomps = algebra_from_dict(algebra_to_dict(e.algebra, e.decompositions))
    assert L2 == e.algebra
    for k, D in e.decompositions.items():
        for a, b in zip(decomps[k].blocks, D.blocks):
            np.testing.assert_array_equal(a, b)


def test_missing_decomposition_is_trivial():
    L, decomps = algebra_from_dict({"dim": 2, "brackets": []})
    assert list(decomps) == ["default"] and decomps["default"].n == 1


@pytest.mark.parametrize("data", [
    {"brackets": []},
    {"dim": "3", "brackets": []},
    {"dim": 2, "brackets": [[0, 5, 1, 1.0]]},
    {"dim": 2, "brackets": [[0, 1, 1]]},
    {"dim": 2, "brackets": [], "decomposition": [[[1, 0, 0]]]},
])
def test_malformed_definitions(data):
    with pytest.raises(InvalidArgument):
        algebra_from_dict(data)
