import numpy as np
import pytest

from lie_integrate.algebra import validate
from lie_integrate.catalog import (NEGATIVE_CONTROLS, CatalogEntry, entry_names, get_entry, load_catalog,
                                   spin_matrices)
from lie_integrate.errors import PreconditionFailure
from lie_integrate.representation import Representation, commutation_residual


def test_catalog_contents():
    names = [e.name for e in load_catalog()]
    assert names == ["so3", "su2-realified", "heisenberg3", "sl2", "upper-triangular-3", "abelian-4"]
    assert "so3-broken" in NEGATIVE_CONTROLS and "so3-broken" not in entry_names()
    assert "so3-broken" in entry_names(include_controls=True)
    with pytest.raises(KeyError):
        get_entry("nope")


def test_required_fixtures():
    so3 = get_entry("so3")
    assert so3.decompositions["axes"].block_dims == (1, 1, 1)
    assert so3.representations["spin2"].dim_H == 5
    heis = get_entry("heisenberg3")
    assert heis.decompositions["p+qz"].block_dims == (1, 2)
    assert not heis.representations["upper-triangular"].skew and heis.representations["center-quotient"].skew
    assert get_entry("sl2").decompositions["iwasawa"].names == ("K", "A", "N")
    assert get_entry("upper-triangular-3").decompositions["diagonal+strict"].block_dims == (3, 3)


@pytest.mark.parametrize("name", entry_names())
def test_entries_revalidate(name):
    e = get_entry(name)
    e.check()
    assert validate(e.algebra).passed
    for R in e.representations.values():
        assert R.validate().passed


def test_spin2_passes_validation():
    R = get_entry("so3").representations["spin2"]
    assert R.homomorphism_residual <= 1e-10 and R.skew_residual <= 1e-12


def test_sl2_commutation_without_skew():
    R = get_entry("sl2").representations["defining"]
    rng = np.random.default_rng(1)
    assert max(commutation_residual(R, rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)) for _ in range(20)) <= 1e-9


def test_abelian_bch_is_addition():
    from lie_integrate.bch import bch
    L = get_entry("abelian-4").algebra
    x, y = np.array([0.1, 0, 0.2, 0]), np.array([0, -0.1, 0, 0.05])
    np.testing.assert_array_equal(bch(L, x, y), x + y)


def test_false_claims_are_caught():
    e = get_entry("so3")
    lying = CatalogEntry("liar", e.algebra, e.decompositions, e.representations, claims={"nilpotent": True})
    with pytest.raises(PreconditionFailure):
        lying.check()
    bad_rep = Representation(e.algebra, spin_matrices(1) * 1.01, skew=True, strict=False)
    with pytest.raises(PreconditionFailure):
        CatalogEntry("liar", e.algebra, e.decompositions, {"r": bad_rep}).check()


def test_broken_fixture_fails_validation():
    e = get_entry("so3-broken")
    assert not e.representations["perturbed"].validate().passed
