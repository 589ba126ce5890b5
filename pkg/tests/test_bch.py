import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lie_integrate.algebra import LieAlgebra, bracket, exp_ad
from lie_integrate.bch import (BchConfig, bch, order_coefficients, bch_differential_at_zero_right, bch_info, bch_multi,
                               bch_multi_batch, right_differential_coefficients, word_coefficient)
from lie_integrate.catalog import get_entry
from lie_integrate.errors import BchDomainWarning, InvalidArgument
from lie_integrate.numerics import central_difference, sample_ball
from lie_integrate.oracles import bch_log_oracle

from conftest import CATALOG, ball

X, Y = 0, 1
ORACLE_ENTRIES = [n for n in CATALOG if get_entry(n).oracle is not None]


def explicit_low_order(L, x, y):
    """x + y + [x,y]/2 + ([x,[x,y]] + [y,[y,x]])/12 - [y,[x,[x,y]]]/24."""
    b = lambda u, v: bracket(L, u, v)  # noqa: E731
    xy = b(x, y)
    return x + y + xy / 2 + (b(x, xy) + b(y, b(y, x))) / 12 - b(y, b(x, xy)) / 24


def test_word_coefficients_low_order():
    assert word_coefficient((X,)) == 1 and word_coefficient((Y,)) == 1
    # [x,y] carries c(xy) - c(yx)
    assert word_coefficient((X, Y)) - word_coefficient((Y, X)) == Fraction(1, 2)
    # [x,[x,y]] gets 1/12 after folding the xyx-type words onto it
    c = {w: word_coefficient(w) for w in [(X, X, Y), (X, Y, X), (Y, X, Y), (Y, Y, X)]}
    assert c[(X, X, Y)] - c[(X, Y, X)] == Fraction(1, 12)
    assert c[(Y, Y, X)] - c[(Y, X, Y)] == Fraction(1, 12)


def test_right_differential_coefficients_are_bernoulli():
    # ad / (e^ad - 1) = sum B_k ad^k / k!
    a = right_differential_coefficients(7)
    expected = [1, -1 / 2, 1 / 12, 0, -1 / 720, 0, 1 / 30240]
    np.testing.assert_allclose(a, expected, atol=1e-17)


@pytest.mark.parametrize("name", ["so3", "sl2", "upper-triangular-3"])
def test_fourth_order_truncation_matches_explicit_terms(name, rng):
    L = get_entry(name).algebra
    cfg = BchConfig(max_order=4)
    for _ in range(10):
        x, y = sample_ball(rng, L.dim, 0.3), sample_ball(rng, L.dim, 0.3)
        np.testing.assert_allclose(bch(L, x, y, cfg), explicit_low_order(L, x, y), atol=1e-15)


def test_abelian_is_addition(rng):
    L = get_entry("abelian-4").algebra
    x, y = rng.standard_normal(4), rng.standard_normal(4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BchDomainWarning)
        np.testing.assert_array_equal(bch(L, x, y), x + y)


def test_heisenberg_exact(heis):
    L = heis.algebra
    a, b = 0.8, -0.6
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BchDomainWarning)
        z = bch(L, [a, 0, 0], [0, b, 0])
    np.testing.assert_allclose(z, [a, b, a * b / 2], atol=1e-16)


def test_so3_against_log_oracle(so3):
    L, R = so3.algebra, so3.oracle_representation
    x, y = 0.3 * L.basis_vector(0), 0.2 * L.basis_vector(1)
    assert np.linalg.norm(bch(L, x, y) - bch_log_oracle(R, [x, y])) <= 1e-10


def test_so3_triple_against_log_oracle(so3):
    L, R = so3.algebra, so3.oracle_representation
    xs = [0.2 * L.basis_vector(k) for k in range(3)]
    assert np.linalg.norm(bch_multi(L, xs) - bch_log_oracle(R, xs)) <= 1e-9


@pytest.mark.parametrize("name", ORACLE_ENTRIES)
def test_truncation_monotone(name, rng):
    e = get_entry(name)
    L, R = e.algebra, e.oracle_representation
    for _ in range(5):
        x, y = sample_ball(rng, L.dim, 0.3), sample_ball(rng, L.dim, 0.3)
        ref = bch_log_oracle(R, [x, y])
        res = [np.linalg.norm(bch(L, x, y, BchConfig(max_order=k)) - ref) for k in (4, 8, 12)]
        assert res[0] >= res[1] >= res[2] or res[2] <= 1e-14


def test_zero_operands(so3, rng):
    L = so3.algebra
    x = sample_ball(rng, 3, 0.3)
    np.testing.assert_array_equal(bch(L, x, np.zeros(3)), x)
    np.testing.assert_array_equal(bch(L, np.zeros(3), x), x)
    np.testing.assert_array_equal(bch_multi(L, [x]), x)
    np.testing.assert_array_equal(bch_multi(L, [x, np.zeros(3), np.zeros(3)]), x)


@pytest.mark.parametrize("name", CATALOG)
@given(data=st.data())
def test_inverse_cancels(name, data):
    L = get_entry(name).algebra
    x = data.draw(ball(L.dim, 0.34))
    assert np.linalg.norm(bch(L, x, -x)) <= 1e-12


@pytest.mark.parametrize("name", CATALOG)
@given(data=st.data())
def test_symmetry(name, data):
    L = get_entry(name).algebra
    x, y = data.draw(ball(L.dim, 0.3)), data.draw(ball(L.dim, 0.3))
    assert np.linalg.norm(bch(L, x, y) + bch(L, -y, -x)) <= 1e-10


@given(ball(3, 0.3), ball(3, 0.3), st.floats(0.0, 1.0))
def test_second_order_agreement(x, y, s):
    # x*y - (x + y + [x,y]/2) is cubic in the operands
    L = get_entry("sl2").algebra
    s = max(s, 1e-3)
    gap = bch(L, s * x, s * y) - (s * x + s * y + bracket(L, s * x, s * y) / 2)
    assert np.linalg.norm(gap) <= s ** 3 * (np.linalg.norm(x) + np.linalg.norm(y)) ** 3 + 1e-16


@pytest.mark.parametrize("name", ["heisenberg3", "upper-triangular-3"])
def test_nilpotent_exact_at_class(name, rng):
    e = get_entry(name)
    L = e.algebra
    if L.nilpotency_class() is None:
        # strictly upper triangular part of the 3x3 upper triangular algebra
        L = LieAlgebra.from_structure_tensor(L.structure_tensor[3:, 3:, 3:])
    k = L.nilpotency_class()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BchDomainWarning)
        for _ in range(20):
            x, y = rng.uniform(-1, 1, L.dim), rng.uniform(-1, 1, L.dim)
            ref = bch(L, x, y, BchConfig(max_order=k))
            for order in (k + 1, 12):
                assert np.linalg.norm(bch(L, x, y, BchConfig(max_order=order)) - ref) <= 1e-14


def test_domain_warning_and_metadata(so3):
    L = so3.algebra
    with pytest.warns(BchDomainWarning):
        bch(L, [0.5, 0, 0], [0, 0.5, 0])
    info = bch_info(L, [0.5, 0, 0], [0, 0.5, 0])
    assert info.domain_violation and info.warnings
    info = bch_info(L, [0.1, 0, 0], [0, 0.1, 0])
    assert not info.domain_violation and info.orders_used >= 2


def test_invalid_inputs(so3):
    L = so3.algebra
    with pytest.raises(InvalidArgument):
        bch(L, [np.inf, 0, 0], [0, 0, 0])
    with pytest.raises(InvalidArgument):
        BchConfig(max_order=0)
    with pytest.raises(InvalidArgument):
        BchConfig(term_tolerance=-1.0)
    with pytest.raises(InvalidArgument):
        bch_multi(L, [])


def test_batch_agrees_with_fold(sl2, rng):
    L = sl2.algebra
    xs = np.array([[sample_ball(rng, 3, 0.1) for _ in range(3)] for _ in range(5)])
    batch = bch_multi_batch(L, xs)
    for b in range(5):
        np.testing.assert_allclose(batch[b], bch_multi(L, list(xs[b])), atol=1e-16)


def test_right_differential_identity_at_zero(so3):
    np.testing.assert_array_equal(bch_differential_at_zero_right(so3.algebra, np.zeros(3)), np.eye(3))


@pytest.mark.parametrize("name", CATALOG)
def test_right_differential_fixes_x(name, rng):
    L = get_entry(name).algebra
    x = sample_ball(rng, L.dim, 0.3)
    np.testing.assert_allclose(bch_differential_at_zero_right(L, x) @ x, x, atol=1e-15)


def test_right_differential_finite_difference(so3, rng):
    L = so3.algebra
    x = 0.4 * L.basis_vector(2)
    with pytest.warns(BchDomainWarning):  # 0.4 is just past ln(2)/2
        M = bch_differential_at_zero_right(L, x)
    errs = []
    for h in (1e-3, 5e-4):
        fd = np.column_stack([central_difference(lambda e: bch(L, e * L.basis_vector(k), x), 0.0, h)
                              for k in range(3)])
        errs.append(np.abs(fd - M).max())
    assert errs[1] <= 1e-7
    assert errs[1] < errs[0] / 3  # second order: ratio ~4


def test_conjugation_differential_is_exp_ad(sl2, rng):
    # d/de x * (e y) * (-x) at 0 is e^{ad x} y
    L = sl2.algebra
    x, y = sample_ball(rng, 3, 0.2), sample_ball(rng, 3, 1.0)
    fd = central_difference(lambda e: bch_multi(L, [x, e * y, -x]), 0.0, 1e-4)
    np.testing.assert_allclose(fd, exp_ad(L, x) @ y, atol=1e-8)


def naive_series(L, x, y, max_order):
    """Sum over every word of each order, right-nested, no reduction."""
    total = np.zeros(L.dim)
    for m in range(1, max_order + 1):
        coeffs = order_coefficients(m)
        for idx in range(2 ** m):
            if coeffs[idx] == 0.0:
                continue
            letters = [(idx >> (m - 1 - p)) & 1 for p in range(m)]
            vec = y if letters[-1] else x
            for a in reversed(letters[:-1]):
                vec = bracket(L, y if a else x, vec)
            total = total + coeffs[idx] * vec
    return total


@pytest.mark.parametrize("name", ["so3", "sl2", "upper-triangular-3"])
def test_reduced_words_match_full_expansion(name, rng):
    L = get_entry(name).algebra
    cfg = BchConfig(max_order=8, term_tolerance=1e-300)
    for _ in range(3):
        x, y = sample_ball(rng, L.dim, 0.3), sample_ball(rng, L.dim, 0.3)
        np.testing.assert_allclose(bch(L, x, y, cfg), naive_series(L, x, y, 8), rtol=0, atol=1e-15)
