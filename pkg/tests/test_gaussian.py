import json
import math
import warnings

import numpy as np
import pytest
from scipy import stats

from pairsieve.gaussian import (
    CosetMassTable,
    SamplerParameterWarning,
    coset_coeffs,
    coset_masses,
    klein_coeffs,
    klein_sample,
    mass_truncated,
    rho,
    squared_coset_sampler,
    support_points,
    tail_probability,
)
from pairsieve.lattice import LatticeBasis, SampleList, Shift, gen_random_lattice, label_codes
from pairsieve.verify import tail_check

# theta-series values computed independently at 30 digits
THETA_Z_1 = 1.08643481121330801457531612151
THETA_2Z_1 = 1.00000697468471241799127935746
THETA_2Z1_1 = 0.0864278365285955965840367640545
THETA_Z_SHIFT03_2 = 1.99999568940778691139529716902
THETA_Z2_SHIFTED_15 = 2.25191410513881000369291906078
E_MINUS_PI = 0.0432139182637722497744177371717
E_MINUS_2PI = 0.00186744273170798881443021293483

Z1, Z2 = LatticeBasis.identity(1), LatticeBasis.identity(2)


def test_rho_examples():
    assert rho([0, 0], 1) == 1.0
    assert rho([1, 0], 1) == pytest.approx(E_MINUS_PI, rel=1e-15)
    lhs = rho([1, 0], 1) * rho([0, 1], 1)
    rhs = rho([1, 1], math.sqrt(2)) * rho([1, -1], math.sqrt(2))
    assert lhs == pytest.approx(E_MINUS_2PI, rel=1e-14)
    assert rhs == pytest.approx(E_MINUS_2PI, rel=1e-14)
    with pytest.raises(ValueError):
        rho([1], 0)


def test_mass_z():
    m = mass_truncated(Z1, None, 1.0)
    assert m.value == pytest.approx(THETA_Z_1, rel=1e-12)
    assert 0 <= m.error_bound <= 1e-9 * m.value


def test_mass_sublattice_smaller():
    assert mass_truncated(LatticeBasis.from_rows([[2]]), None, 1.0).value < mass_truncated(Z1, None, 1.0).value
    assert mass_truncated(LatticeBasis.from_rows([[2]]), None, 1.0).value == pytest.approx(THETA_2Z_1, rel=1e-12)


def test_mass_product_structure():
    assert mass_truncated(Z2, None, 1.0).value == pytest.approx(THETA_Z_1 ** 2, rel=1e-10)
    assert mass_truncated(Z2, [0.3, 0.1], 1.5).value == pytest.approx(THETA_Z2_SHIFTED_15, rel=1e-10)
    assert mass_truncated(Z1, [0.3], 2.0).value == pytest.approx(THETA_Z_SHIFT03_2, rel=1e-10)


def test_mass_basis_invariant():
    basis = gen_random_lattice(3, seed=5)
    other = LatticeBasis(np.array([[1, 1, 0], [0, 1, 0], [0, 0, 1]]) @ basis.numer)
    t = [0.3, -1.2, 2.5]
    assert mass_truncated(basis, t, 7.0).value == pytest.approx(mass_truncated(other, t, 7.0).value, rel=1e-12)


def test_growth_bound_lemma():
    basis = gen_random_lattice(3, seed=2)
    ref = mass_truncated(basis, None, 1.0)
    for s in (1.0, 2.5, 6.0):
        top = mass_truncated(basis, [0.5, 0.25, -1.0], s)
        assert top.value - top.error_bound <= s ** 3 * (ref.value + ref.error_bound)


def test_support_points_sum_to_mass():
    coeffs, masses = support_points(Z2, [0.2, 0.7], 3.0)
    pts = coeffs - np.array([0.2, 0.7])
    np.testing.assert_allclose(masses, rho(pts, 3.0), rtol=1e-12)
    assert masses.sum() == pytest.approx(mass_truncated(Z2, [0.2, 0.7], 3.0).value, rel=1e-14)


def test_coset_masses_z1():
    tab = coset_masses(Z1, None, 1.0)
    assert tab.masses["0"] == pytest.approx(THETA_2Z_1, rel=1e-12)
    assert tab.masses["1"] == pytest.approx(THETA_2Z1_1, rel=1e-12)
    assert tab.total == pytest.approx(THETA_Z_1, rel=1e-12)
    assert tab.p_max == pytest.approx(THETA_2Z_1 / THETA_Z_1, rel=1e-12)


def test_coset_partition_and_collision(rng):
    for _ in range(5):
        t = rng.uniform(-1, 1, 2)
        tab = coset_masses(Z2, t, 1.3)
        whole = mass_truncated(Z2, t, 1.3)
        assert abs(tab.total - whole.value) <= 5 * whole.error_bound + 1e-14 * whole.value
        half = 1.3 / math.sqrt(2)
        rhs = mass_truncated(Z2, None, half).value * mass_truncated(Z2, t, half).value
        assert np.sum(tab.values ** 2) == pytest.approx(rhs, rel=1e-8)


def test_table_statistics_and_json():
    tab = coset_masses(LatticeBasis.from_rows([[2, 1], [1, 3]]), [0.25, 0.5], 1.7)
    assert tab.p_col == pytest.approx(float(np.sum(tab.probs ** 2)))
    assert tab.p_max == pytest.approx(tab.values.max() / tab.total)
    doc = json.loads(tab.to_json())
    assert set(doc["masses"]) == {"00", "10", "01", "11"}
    back = CosetMassTable.from_json(tab.to_json())
    np.testing.assert_array_equal(back.values, tab.values)
    assert back.s == tab.s and back.eps == tab.eps


def test_klein_zero_frequency(rng):
    rows = klein_coeffs(Z1, Shift.zero(1), 1.0, rng, 100_000)
    assert abs(np.mean(rows[:, 0] == 0) - 1 / THETA_Z_1) <= 0.005


def test_klein_large_s_cosets_uniform(rng):
    basis = LatticeBasis.from_rows([[2, 1], [1, 3]])
    rows = klein_coeffs(basis, Shift.zero(2), 100.0, rng, 100_000)
    counts = np.bincount(label_codes(rows), minlength=4)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_klein_symmetry(rng):
    rows = klein_coeffs(LatticeBasis.from_rows([[2, 1], [1, 3]]), Shift.zero(2), 6.0, rng, 100_000, exact=True)
    keys, counts = np.unique(rows, axis=0, return_counts=True)
    freq = {tuple(k): c for k, c in zip(keys.tolist(), counts)}
    for k, c in freq.items():
        other = freq.get(tuple(-v for v in k), 0)
        p = (c + other) / 2 / len(rows)
        sigma = math.sqrt(2 * p * (1 - p) / len(rows))
        assert abs(c - other) / len(rows) <= 3 * sigma + 3 / len(rows)


def test_klein_sample_shapes_and_warning(rng):
    basis = LatticeBasis.from_rows([[2, 1], [1, 3]])
    with pytest.warns(SamplerParameterWarning):
        klein_sample(basis, None, 1.0, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        lst = klein_sample(basis, [0.5, 0.5], 100.0, rng, size=7)
    assert isinstance(lst, SampleList) and len(lst) == 7
    with pytest.raises(ValueError):
        klein_sample(basis, None, -1.0, rng)


def test_klein_reproducible():
    a = klein_coeffs(Z2, Shift.of([0.1, 0.2]), 3.0, np.random.default_rng(1), 50)
    b = klein_coeffs(Z2, Shift.of([0.1, 0.2]), 3.0, np.random.default_rng(1), 50)
    np.testing.assert_array_equal(a, b)


def test_coset_coeffs_stay_in_coset(rng):
    basis = gen_random_lattice(3, seed=1)
    for code in range(8):
        rows = coset_coeffs(basis, Shift.of([0.5, 0.0, -1.0]), 8.0, code, rng, 200)
        assert np.all(label_codes(rows) == code)


def test_squared_sampler_z1_label_law(rng):
    tab = coset_masses(Z1, None, 1.0)
    p0, p1 = tab.probs
    lst = squared_coset_sampler(tab, 20_000, Z1, None, rng)
    codes = lst.codes()
    assert np.all(codes[0::2] == codes[1::2])
    frac0 = np.mean(codes[0::2] == 0)
    expect = p0 ** 2 / (p0 ** 2 + p1 ** 2)
    assert abs(frac0 - expect) <= 4 * math.sqrt(expect * (1 - expect) / 20_000)


def test_squared_sampler_degenerate_table(rng):
    tab = CosetMassTable(2.0, 2, np.array([0.0, 0.0, 1.0, 0.0]), 1e-9)
    lst = squared_coset_sampler(tab, 100, Z2, None, rng)
    assert len(lst) == 200 and np.all(lst.codes() == 2)


def test_tail_probability_monotone():
    assert tail_probability(3, 1.0) > tail_probability(3, 4.0)


def test_tail_bound_holds(rng):
    basis = gen_random_lattice(2, seed=9)
    rows = tail_check(basis, [0.5, 0.5], 3.0, 100_000, rng, radii=np.linspace(2, 8, 13))
    assert rows and all(r["ok"] for r in rows)
