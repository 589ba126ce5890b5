import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lie_integrate.algebra import LieAlgebra, bracket, exp_ad
from lie_integrate.catalog import broken_so3, get_entry, so3_algebra, so3_generators, spin_matrices
from lie_integrate.errors import InvalidArgument, PreconditionFailure
from lie_integrate.logderiv import SmoothPath
from lie_integrate.numerics import gauss_legendre, observed_order, sample_ball, sample_unit
from lie_integrate.representation import (Representation, apply, commutation_residual, constancy_residual,
                                          derpath_residual, duhamel_residual, exp_op, fsss_pairing_residual,
                                          orthogonality_residual, realify, representation_from_dict)

from conftest import CATALOG, ball

REPS = [(n, r) for n in CATALOG for r in get_entry(n).representations]
SKEW_REPS = [(n, r) for n, r in REPS if get_entry(n).representations[r].skew]


def rep(name, rname):
    return get_entry(name).representations[rname]


def test_apply_linear_and_zero(so3):
    R = so3.representations["defining"]
    assert not np.any(apply(R, np.zeros(3)))
    np.testing.assert_array_equal(apply(R, [1, 0, 0]), so3_generators()[0])
    with pytest.raises(InvalidArgument):
        apply(R, [1, 0])


@pytest.mark.parametrize("j", [1, 2, 3])
def test_spin_representations(j):
    R = Representation(so3_algebra(), spin_matrices(j), skew=True)
    assert R.dim_H == 2 * j + 1
    assert R.homomorphism_residual <= 1e-10
    assert R.skew_residual <= 1e-12


def test_rotation_by_pi(so3):
    R = so3.representations["defining"]
    np.testing.assert_allclose(exp_op(R, [0, 0, np.pi]), np.diag([-1.0, -1.0, 1.0]), atol=1e-15)


@pytest.mark.parametrize("name,rname", REPS)
def test_exp_op_inverse(name, rname, rng):
    R = rep(name, rname)
    x = sample_ball(rng, R.algebra.dim, 2.0)
    assert np.abs(exp_op(R, x) @ exp_op(R, -x) - np.eye(R.dim_H)).max() <= 1e-12
    np.testing.assert_array_equal(exp_op(R, np.zeros(R.algebra.dim)), np.eye(R.dim_H))


@pytest.mark.parametrize("name,rname", SKEW_REPS)
@given(data=st.data())
def test_skew_exponentials_preserve_inner_product(name, rname, data):
    R = rep(name, rname)
    U = exp_op(R, data.draw(ball(R.algebra.dim, 2.0)))
    assert orthogonality_residual(U) <= 1e-11
    v, w = data.draw(ball(R.dim_H, 1.0)), data.draw(ball(R.dim_H, 1.0))
    assert abs((U @ v) @ (U @ w) - v @ w) <= 1e-11


@pytest.mark.parametrize("name,rname", REPS)
@given(data=st.data())
def test_apply_respects_brackets(name, rname, data):
    R = rep(name, rname)
    L = R.algebra
    x, y = data.draw(ball(L.dim, 2.0)), data.draw(ball(L.dim, 2.0))
    A, B = apply(R, x), apply(R, y)
    gap = np.linalg.norm(apply(R, bracket(L, x, y)) - (A @ B - B @ A), 2)
    assert gap <= 1e-10 * (1 + np.linalg.norm(x) * np.linalg.norm(y))


@pytest.mark.parametrize("name,rname", REPS)
@given(data=st.data())
def test_commutation(name, rname, data):
    R = rep(name, rname)
    x, y = data.draw(ball(R.algebra.dim, 2.0)), data.draw(ball(R.algebra.dim, 2.0))
    assert commutation_residual(R, x, y) <= 1e-9


def test_commutation_trivial_cases(so3, rng):
    R = so3.representations["spin2"]
    y = sample_ball(rng, 3, 1.0)
    assert commutation_residual(R, np.zeros(3), y) == 0.0
    Ra = get_entry("abelian-4").representations["rotations"]
    assert commutation_residual(Ra, sample_ball(rng, 4, 1.0), sample_ball(rng, 4, 1.0)) <= 1e-15


def test_commutation_non_skew_sl2(sl2, rng):
    R = sl2.representations["defining"]
    for _ in range(20):
        assert commutation_residual(R, sample_ball(rng, 3, 1.0), sample_ball(rng, 3, 1.0)) <= 1e-9


def test_constancy(so3):
    R = so3.representations["defining"]
    grid = np.linspace(0, 1, 11)
    assert constancy_residual(R, [0.7, 0, 0], [0, 0.5, 0], grid, np.eye(3)[0]) <= 1e-9
    assert constancy_residual(R, [0.7, 0, 0], [0, 0.5, 0], [0.0], np.eye(3)[0]) == 0.0
    Ra = get_entry("abelian-4").representations["diagonal"]
    assert constancy_residual(Ra, [0.1, 0.2, 0, 0], [0, 0, 0.3, 0], grid, np.ones(4)) <= 1e-15


@pytest.mark.parametrize("name,rname", REPS)
def test_constancy_catalog(name, rname, rng):
    R = rep(name, rname)
    for _ in range(5):
        x, y = sample_ball(rng, R.algebra.dim, 1.0), sample_ball(rng, R.algebra.dim, 1.0)
        assert constancy_residual(R, x, y, np.linspace(0, 1, 11), sample_unit(rng, R.dim_H)) <= 1e-9


def test_duhamel_trivial(so3, rng):
    R = so3.representations["spin2"]
    x, v = sample_ball(rng, 3, 1.0), sample_unit(rng, 5)
    assert duhamel_residual(R, x, x, 0.8, v) <= 1e-15
    assert duhamel_residual(R, x, sample_ball(rng, 3, 1.0), 0.0, v) == 0.0


def test_duhamel_heisenberg_quadrature_converged(heis):
    R = heis.representations["upper-triangular"]
    v = np.eye(3)[0]
    r16 = duhamel_residual(R, [0.3, 0, 0], [0, 0.3, 0], 1.0, v)
    r32 = duhamel_residual(R, [0.3, 0, 0], [0, 0.3, 0], 1.0, v, gauss_legendre(32))
    assert r16 <= 1e-8 and r32 <= 1e-8


@pytest.mark.parametrize("name,rname", REPS)
def test_duhamel_catalog(name, rname, rng):
    R = rep(name, rname)
    for _ in range(5):
        x, y = sample_ball(rng, R.algebra.dim, 1.0), sample_ball(rng, R.algebra.dim, 1.0)
        assert duhamel_residual(R, x, y, rng.uniform(-1, 1), sample_unit(rng, R.dim_H)) <= 1e-9


@pytest.mark.parametrize("name,rname", SKEW_REPS)
def test_fsss_pairing(name, rname, rng):
    R = rep(name, rname)
    d, n = R.algebra.dim, R.dim_H
    for _ in range(10):
        x, y = sample_ball(rng, d, 1.0), sample_ball(rng, d, 1.0)
        assert fsss_pairing_residual(R, x, y, sample_unit(rng, n), sample_unit(rng, n)) <= 1e-10
    assert fsss_pairing_residual(R, x, np.zeros(d), sample_unit(rng, n), sample_unit(rng, n)) == 0.0


def test_fsss_requires_skew(sl2):
    with pytest.raises(PreconditionFailure):
        fsss_pairing_residual(sl2.representations["defining"], [0.1, 0, 0], [0, 0.1, 0], [1, 0], [0, 1])


def test_derpath_straight_and_constant(so3, rng):
    R = so3.representations["defining"]
    v = sample_unit(rng, 3)
    assert derpath_residual(R, SmoothPath.constant([0.1, 0.2, 0.0]), 0.5, v) <= 1e-12
    assert derpath_residual(R, SmoothPath.straight([0.3, -0.2, 0.1]), 0.5, v) <= 1e-9


def test_derpath_so3_refinement(so3):
    R = so3.representations["defining"]
    p = SmoothPath.polynomial([[0, 0, 0], [0.4, 0, 0], [0, 0, 0.2]])
    v = np.ones(3) / np.sqrt(3)
    assert derpath_residual(R, p, 0.5, v) <= 1e-7
    coarse = derpath_residual(R, p, 0.5, v, h=1e-2, richardson=False)
    fine = derpath_residual(R, p, 0.5, v, h=5e-3, richardson=False)
    assert abs(observed_order(coarse, fine) - 2) < 0.3


def test_broken_fixture_has_teeth():
    e = broken_so3()
    R = e.representations["perturbed"]
    assert R.homomorphism_residual > 1e-10
    assert not R.validate().passed
    rng = np.random.default_rng(3)
    worst = max(commutation_residual(R, sample_ball(rng, 3, 2.0), sample_ball(rng, 3, 2.0)) for _ in range(10))
    assert worst >= 1e-5
    with pytest.raises(PreconditionFailure):
        Representation(R.algebra, R.matrices, skew=True)


def test_realify_preserves_products(rng):
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    np.testing.assert_allclose(realify(a @ b), realify(a) @ realify(b), atol=1e-14)


def test_representation_from_dict_flat_and_nested(so3):
    L = so3.algebra
    flat = {"dim_H": 3, "matrices": [m.ravel().tolist() for m in so3_generators()], "skew": True}
    nested = {"dim_H": 3, "matrices": [m.tolist() for m in so3_generators()], "skew": True}
    for data in (flat, nested):
        np.testing.assert_array_equal(representation_from_dict(data, L).matrices, so3_generators())
    with pytest.raises(InvalidArgument):
        representation_from_dict({"dim_H": 3, "matrices": [[0.0] * 8] * 3}, L)
    with pytest.raises(InvalidArgument):
        representation_from_dict({"matrices": []}, L)


def test_validate_records_finite_dimension_notes(so3):
    rec = so3.representations["spin2"].validate().get("skew")
    assert "finite dimension" in rec.details["A1"] and "finite dimension" in rec.details["A2"]


def test_commutation_uses_exp_ad(so3, rng):
    # direct restatement with explicit conjugation, as a cross-check of the residual's definition
    R = so3.representations["spin2"]
    x, y = sample_ball(rng, 3, 1.0), sample_ball(rng, 3, 1.0)
    lhs = exp_op(R, x) @ apply(R, y) @ exp_op(R, -x)
    rhs = apply(R, exp_ad(R.algebra, x) @ y)
    assert abs(np.linalg.norm(lhs - rhs, 2) - commutation_residual(R, x, y)) <= 1e-15


def test_exp_op_accuracy_up_to_norm_ten(rng):
    """Relative error at most 1e-13 for |A| <= 10 against closed forms."""
    L = so3_algebra()
    R = Representation(L, so3_generators(), skew=True)
    for _ in range(20):
        axis = sample_unit(rng, 3)
        theta = rng.uniform(0, 10)
        K = apply(R, axis)
        rodrigues = np.eye(3) + np.sin(theta) * K + (1 - np.cos(theta)) * K @ K
        got = exp_op(R, theta * axis)
        assert np.linalg.norm(got - rodrigues, 2) <= 1e-13 * np.linalg.norm(rodrigues, 2)
    # non-normal case with known eigenvectors: A = V diag(l) V^-1
    V = np.array([[1.0, 0.3, 0.0], [0.0, 1.0, 0.2], [0.1, 0.0, 1.0]])
    lam = np.array([3.0, -4.0, 1.5])
    A = V @ np.diag(lam) @ np.linalg.inv(V)
    assert np.linalg.norm(A, 2) <= 10
    ref = V @ np.diag(np.exp(lam)) @ np.linalg.inv(V)
    got = exp_op(Representation(LieAlgebra(1), [A]), [1.0])
    assert np.linalg.norm(got - ref, 2) <= 1e-13 * np.linalg.norm(ref, 2)
