import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairsieve.lattice import (
    BasisFormatError,
    CosetLabel,
    DegenerateBasisError,
    LatticeBasis,
    LatticePoint,
    SampleList,
    Shift,
    average,
    coset_label,
    gen_random_lattice,
    gram_schmidt,
    label_codes,
    parse_basis,
    serialize_basis,
)


def pt(coeffs, basis=None, t=None):
    basis = basis or LatticeBasis.identity(len(coeffs))
    return LatticePoint(tuple(coeffs), basis, Shift.of(t, basis.dim))


def test_gram_schmidt_identity():
    gs = gram_schmidt(LatticeBasis.identity(2))
    np.testing.assert_array_equal(gs.bstar, np.eye(2))
    assert gs.gs_norm == 1.0


def test_gram_schmidt_hand_example():
    gs = gram_schmidt(LatticeBasis.from_columns([[1, 0], [1, 2]]))
    np.testing.assert_allclose(gs.bstar[0], [1, 1])
    np.testing.assert_allclose(gs.bstar[1], [-1, 1])
    assert gs.gs_norm == pytest.approx(math.sqrt(2), rel=1e-15)


@pytest.mark.parametrize("n", [5, 8, 12])
def test_gram_schmidt_reconstruction(n):
    basis = gen_random_lattice(n, seed=n)
    gs = gram_schmidt(basis)
    err = np.abs(basis.matrix - gs.recompose()).max() / np.abs(basis.matrix).max()
    assert err <= 1e-9
    off = gs.bstar @ gs.bstar.T - np.diag(gs.bsq)
    assert np.abs(off).max() <= 1e-9 * gs.bsq.max()


def test_singular_basis_rejected():
    with pytest.raises(DegenerateBasisError, match="degenerate basis"):
        gram_schmidt(LatticeBasis.from_rows([[1, 2], [2, 4]]))


@pytest.mark.parametrize("coeffs,bits", [((3, 5), (1, 1)), ((0, 0, 0, 0), (0, 0, 0, 0)), ((-2, 7, 4), (0, 1, 0))])
def test_coset_label(coeffs, bits):
    assert coset_label(pt(coeffs)).bits == bits


def test_label_code_roundtrip():
    lab = CosetLabel((1, 0, 1))
    assert lab.code == 5
    assert CosetLabel.from_code(5, 3) == lab
    assert str(lab) == "101" and CosetLabel.parse("101") == lab
    assert (lab ^ CosetLabel((1, 1, 0))).bits == (0, 1, 1)
    np.testing.assert_array_equal(label_codes(np.array([[1, 0, 1], [-1, 2, 3]])), [5, 5])


def test_label_group_has_2n_elements():
    assert len({CosetLabel.from_code(c, 4) for c in range(16)}) == 16


@pytest.mark.parametrize("p,q,expect", [((2, 0), (0, 0), (1, 0)), ((1, 1), (3, 1), (2, 1))])
def test_average(p, q, expect):
    assert average(pt(p), pt(q)).coeffs == expect


def test_average_parity_mismatch():
    with pytest.raises(ValueError, match="not congruent mod 2L"):
        average(pt((1, 0)), pt((0, 1)))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-10**6, 10**6), min_size=1, max_size=6), st.data())
def test_average_integer_identity(a, data):
    b = [x + 2 * data.draw(st.integers(-10**6, 10**6)) for x in a]
    avg = average(pt(a), pt(b))
    assert [2 * v for v in avg.coeffs] == [x + y for x, y in zip(a, b)]
    assert avg.label().bits == tuple(((x + y) // 2) & 1 for x, y in zip(a, b))


def test_norm_examples():
    assert pt((3, 4)).norm() == 5.0
    assert pt((0, 0), t=(0.5, 0)).norm() == 0.5
    diag = LatticeBasis.from_rows([[2, 0], [0, 3]])
    assert pt((1, 1), diag).norm() == pytest.approx(math.sqrt(13), rel=1e-15)
    assert pt((1, 1), diag).sq_norm() == 13
    np.testing.assert_allclose(pt((1, 1), diag, (1, 1)).to_ambient(), [1, 2])


def test_shift_is_exact():
    sh = Shift.of(["1/3", 0.5])
    assert sh.values == (Fraction(1, 3), Fraction(1, 2))
    with pytest.raises(ValueError):
        Shift.of([1, 2], 3)


def test_rational_basis_normalized():
    b = LatticeBasis.from_rows([["1/2", 0], [0, "3/4"]])
    assert b.den == 4
    assert b.scale == Fraction(1, 4)
    np.testing.assert_array_equal(b.prim, [[2, 0], [0, 3]])
    assert b.scaled(4) == LatticeBasis.from_rows([[2, 0], [0, 3]])


def test_gen_random_lattice_deterministic():
    assert gen_random_lattice(1, seed=3).numer[0, 0] != 0
    assert gen_random_lattice(6, seed=11) == gen_random_lattice(6, seed=11)
    assert gen_random_lattice(6, seed=11) != gen_random_lattice(6, seed=12)
    kn = gen_random_lattice(5, "knapsack", seed=2)
    assert kn == gen_random_lattice(5, "knapsack", seed=2)
    with pytest.raises(ValueError):
        gen_random_lattice(3, "bogus")


def test_gen_random_full_rank_many_seeds():
    for seed in range(100):
        b = gen_random_lattice(6, seed=seed)
        assert abs(np.linalg.det(b.matrix)) > 0.5


def test_parse_text_identity():
    basis, target = parse_basis("2\n1 0\n0 1\n")
    assert basis == LatticeBasis.identity(2) and target is None


def test_parse_malformed_rows():
    with pytest.raises(BasisFormatError):
        parse_basis("2\n1 0\n0 1\n1 1\n")
    with pytest.raises(BasisFormatError):
        parse_basis("x\n")
    with pytest.raises(DegenerateBasisError):
        parse_basis("2\n1 1\n2 2\n")


def test_parse_json_with_target():
    basis, target = parse_basis(json.dumps({"dim": 2, "basis": [[1, 0], [0, 2]], "target": ["1/2", 1]}))
    assert basis == LatticeBasis.from_rows([[1, 0], [0, 2]])
    assert target.values == (Fraction(1, 2), Fraction(1))
    with pytest.raises(BasisFormatError):
        parse_basis(json.dumps({"dim": 2, "basis": [[1, 0], [0, 2]], "target": [1]}))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(0, 10**6), st.integers(1, 12))
def test_serialize_roundtrip(n, seed, den):
    basis = gen_random_lattice(n, seed=seed).scaled(Fraction(1, den))
    for fmt in ("text", "json"):
        assert parse_basis(serialize_basis(basis, fmt))[0] == basis


def test_parse_from_path(tmp_path):
    f = tmp_path / "b.txt"
    f.write_text(serialize_basis(LatticeBasis.identity(3)))
    assert parse_basis(f)[0] == LatticeBasis.identity(3)
    assert parse_basis(str(f))[0] == LatticeBasis.identity(3)


def test_sample_list_views():
    lst = SampleList(np.array([[1, 0], [0, 3]]), LatticeBasis.identity(2), Shift.zero(2))
    assert len(lst) == 2
    assert [p.coeffs for p in lst] == [(1, 0), (0, 3)]
    np.testing.assert_allclose(lst.norms(), [1, 3])
    np.testing.assert_array_equal(lst.codes(), [1, 2])
    empty = lst.with_coeffs(np.zeros((0, 2), dtype=np.int64))
    assert len(empty) == 0 and empty.norms().size == 0
    with pytest.raises(ValueError):
        SampleList(np.zeros((1, 3)), LatticeBasis.identity(2), Shift.zero(2))
