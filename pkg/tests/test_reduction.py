import math

import numpy as np
import pytest

from pairsieve.enumeration import EnumerationCapError
from pairsieve.lattice import LatticeBasis, gen_random_lattice
from pairsieve.reduction import (
    ReductionConfig,
    babai_nearest_plane,
    complete_to_unimodular,
    dist_estimate,
    hkz_reduce,
    lambda1_estimate,
    lll_reduce,
)
from pairsieve.verify import enum_cvp, enum_svp


def is_unimodular(u):
    return np.issubdtype(u.dtype, np.integer) and round(abs(np.linalg.det(u.astype(float)))) == 1


def lovasz_ok(basis, delta=0.99):
    gs = basis.gso
    n = basis.rank
    for i in range(1, n):
        if any(abs(gs.mu[i, j]) > 0.5 + 1e-9 for j in range(i)):
            return False
        if gs.bsq[i] < (delta - gs.mu[i, i - 1] ** 2) * gs.bsq[i - 1] * (1 - 1e-9):
            return False
    return True


def test_config_validation():
    with pytest.raises(ValueError):
        ReductionConfig(delta=0.2)
    with pytest.raises(ValueError):
        ReductionConfig(u=1)
    assert ReductionConfig().u_for(6) == 6


def test_lll_identity():
    red = lll_reduce(LatticeBasis.identity(4))
    assert red.basis == LatticeBasis.identity(4)


def test_lll_finds_unit_vector():
    red = lll_reduce(LatticeBasis.from_columns([[1, 0], [100, 1]]))
    assert min(np.linalg.norm(red.basis.matrix, axis=1)) == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_lll_unimodular_same_lattice(seed):
    basis = gen_random_lattice(8, seed=seed)
    red = lll_reduce(basis)
    assert is_unimodular(red.transform)
    np.testing.assert_array_equal(red.transform @ basis.numer, red.basis.numer)
    assert lovasz_ok(red.basis)


def test_lambda1_estimate_identity():
    assert lambda1_estimate(LatticeBasis.identity(5)) == 1.0


@pytest.mark.parametrize("n", range(2, 11))
def test_lambda1_bracket(n):
    for seed in range(3):
        basis = gen_random_lattice(n, seed=100 * n + seed)
        lam = enum_svp(basis)[0]
        est = lambda1_estimate(basis)
        assert lam * (1 - 1e-12) <= est <= 2 ** (n / 2) * lam


def test_lambda1_homogeneous():
    basis = gen_random_lattice(5, seed=4)
    assert lambda1_estimate(basis.scaled(3)) == pytest.approx(3 * lambda1_estimate(basis), rel=1e-12)


def test_babai_orthogonal_examples():
    z2 = LatticeBasis.identity(2)
    p = babai_nearest_plane(z2, (0.4, 0.6))
    assert p.coeffs == (0, 1)
    assert p.norm() == pytest.approx(math.sqrt(0.32), rel=1e-12)
    assert babai_nearest_plane(LatticeBasis.from_rows([[2, 1], [0, 3]]), (4, 5)).norm() == 0.0


@pytest.mark.parametrize("n", range(2, 9))
def test_dist_estimate_bracket(n, rng):
    basis = gen_random_lattice(n, seed=7 * n)
    for _ in range(3):
        t = rng.uniform(-20, 20, n).round(3)
        d = enum_cvp(basis, t)[0]
        assert d * (1 - 1e-12) <= dist_estimate(basis, t) <= 2 ** (n / 2) * d + 1e-12


def test_dist_estimate_homogeneous():
    basis = gen_random_lattice(4, seed=1)
    t = np.array([1.25, -3.5, 2.0, 0.75])
    assert dist_estimate(basis.scaled(5), 5 * t) == pytest.approx(5 * dist_estimate(basis, t), rel=1e-12)


def test_complete_to_unimodular():
    for a in ([3, 5], [0, 0, 1], [6, 10, 15], [-4, 9, 0, 7]):
        w = complete_to_unimodular(a)
        assert is_unimodular(w)
        np.testing.assert_array_equal(w[0], a)
    with pytest.raises(ValueError):
        complete_to_unimodular([2, 4])


def test_hkz_identity():
    assert hkz_reduce(LatticeBasis.identity(5)).basis == LatticeBasis.identity(5)


@pytest.mark.parametrize("n", range(2, 9))
def test_hkz_first_vector_is_shortest(n):
    basis = gen_random_lattice(n, seed=31 + n)
    red = hkz_reduce(basis)
    assert is_unimodular(red.transform)
    np.testing.assert_array_equal(red.transform @ basis.numer, red.basis.numer)
    assert np.linalg.norm(red.basis.matrix[0]) == pytest.approx(enum_svp(basis)[0], rel=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_hkz_profile(seed):
    basis = gen_random_lattice(6, seed=seed)
    rb = hkz_reduce(basis).basis
    gs = rb.gso
    for i in range(rb.rank):
        proj = gs.bstar[i:]
        # projection of b_i..b_n orthogonal to b_1..b_{i-1}
        coords = rb.matrix[i:] @ proj.T / np.sqrt(gs.bsq[i:])
        sub = LatticeBasis(np.rint(coords * 1e6).astype(np.int64))
        lam = enum_svp(sub)[0] / 1e6
        assert math.sqrt(gs.bsq[i]) == pytest.approx(lam, rel=1e-5)


def test_hkz_cap(monkeypatch):
    monkeypatch.setenv("GSL_ENUM_CAP", "3")
    with pytest.raises(EnumerationCapError):
        hkz_reduce(gen_random_lattice(4, seed=0))
