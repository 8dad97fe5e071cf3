import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairsieve.enumeration import points_within
from pairsieve.gaussian import coset_masses, reduced_context
from pairsieve.lattice import LatticeBasis, SampleList, Shift, gen_random_lattice, lattice_vector
from pairsieve.reduction import ReductionConfig, hkz_reduce
from pairsieve.sieve import (
    InvalidRejectionError,
    PreconditionError,
    SieveConfig,
    SquareSamplerRejection,
    loss_product_bound,
    pair_and_average,
    predicted_M_prime,
    prepare_start,
    reject_all,
    reject_and_average,
    required_M,
    start_radius,
    start_threshold,
    trivial_rejection,
)

Z2 = LatticeBasis.identity(2)


def lst(rows, basis=Z2, t=None):
    return SampleList(np.array(rows, dtype=np.int64).reshape(-1, basis.rank), basis, Shift.of(t, basis.dim))


def test_pair_and_average_examples():
    assert pair_and_average(lst([(2, 0), (0, 0), (1, 1), (3, 1)])).coeffs.tolist() == [[1, 0], [2, 1]]
    assert len(pair_and_average(lst([(0, 0), (1, 0), (0, 1), (1, 1)]))) == 0
    assert pair_and_average(lst([(0, 0), (2, 0), (4, 0)])).coeffs.tolist() == [[1, 0]]
    assert len(pair_and_average(lst(np.zeros((0, 2))))) == 0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6)), max_size=60))
def test_pair_and_average_length_and_membership(rows):
    basis = LatticeBasis.identity(3)
    inp = lst(rows or np.zeros((0, 3)), basis)
    out = pair_and_average(inp)
    counts = np.bincount(inp.codes(), minlength=8) if len(inp) else np.zeros(8, dtype=int)
    assert len(out) == int(np.sum(counts // 2))
    assert out.coeffs.dtype == np.int64
    # outputs are midpoints of consecutive same-coset inputs
    groups: dict[int, list] = {}
    for r, c in zip(inp.coeffs.tolist(), inp.codes().tolist()):
        groups.setdefault(c, []).append(r)
    expect = sorted(tuple((a + b) // 2 for a, b in zip(g[j], g[j + 1]))
                    for g in groups.values() for j in range(0, len(g) - 1, 2))
    assert sorted(map(tuple, out.coeffs.tolist())) == expect


def test_pair_order_by_first_index():
    out = pair_and_average(lst([(1, 0), (0, 0), (3, 0), (2, 0)]))
    assert out.coeffs.tolist() == [[2, 0], [1, 0]]


def test_reject_and_average_basics(rng):
    inp = lst([(2, 0), (0, 0), (1, 1), (3, 1)])
    assert reject_and_average(inp, 0, trivial_rejection, rng) is inp
    np.testing.assert_array_equal(reject_and_average(inp, 1, trivial_rejection, rng).coeffs,
                                  pair_and_average(inp).coeffs)
    assert len(reject_and_average(inp, 1, reject_all, rng)) == 0
    with pytest.raises(ValueError):
        reject_and_average(inp, -1, trivial_rejection, rng)


@pytest.mark.parametrize("bad", [[0, 0], [0, 4], [-1], np.array([0.5])])
def test_invalid_rejection(rng, bad):
    inp = lst([(2, 0), (0, 0), (1, 1), (3, 1)])
    with pytest.raises(InvalidRejectionError, match="invalid rejection function"):
        reject_and_average(inp, 1, lambda c, s, r: np.asarray(bad), rng)


def test_trace_records(rng):
    rows = rng.integers(-5, 6, (64, 2))
    trace = []
    out = reject_and_average(lst(rows), 2, trivial_rejection, rng, trace=trace.append)
    assert [r["step"] for r in trace] == [1, 2]
    assert trace[0]["M_in"] == 64 and trace[-1]["M_out"] == len(out)
    assert set(trace[0]) == {"step", "M_in", "M_out", "min_norm", "coset_histogram_digest"}


def test_sieve_config():
    SieveConfig(ell=0, M=0)
    with pytest.raises(ValueError):
        SieveConfig(ell=-1, M=4)
    with pytest.raises(ValueError):
        SieveConfig(ell=1, M=4, kappa=0.5)


def test_square_rejection_reads_labels_only(rng):
    tab = coset_masses(Z2, None, 2.0)
    f = SquareSamplerRejection([tab], kappa=1)
    codes = rng.integers(0, 4, 4096)
    idx = f(codes, 0, rng)
    assert len(idx) % 2 == 0 and len(np.unique(idx)) == len(idx)
    assert np.all(codes[idx[0::2]] == codes[idx[1::2]])
    assert len(idx) // 2 <= f.target_pairs(4096, 0)


def test_prepare_start_zn():
    out = prepare_start(LatticeBasis.identity(4), None, 64, None, 100.0, np.random.default_rng(0))
    assert out.sublattice.rank == 4 and out.y.is_zero
    assert len(out.samples) == 64
    # coordinate std of D_{Z,s} is s / sqrt(2 pi)
    assert np.std(out.samples.ambient()) == pytest.approx(100 / math.sqrt(2 * math.pi), rel=0.2)


def test_prepare_start_diag():
    basis = LatticeBasis.from_rows([[1, 0], [0, 10**6]])
    out = prepare_start(basis, None, 16, 2, 1000.0, np.random.default_rng(0))
    assert 1 < start_radius(1000.0, 2) < 10**6
    assert out.sublattice.rank == 1
    np.testing.assert_array_equal(out.sublattice.numer, [[1, 0]])


def test_prepare_start_precondition():
    basis = gen_random_lattice(3, seed=0)
    with pytest.raises(PreconditionError):
        prepare_start(basis, [0.5, 0.5, 0.5], 8, None, 1.0, np.random.default_rng(0))
    with pytest.raises(ValueError):
        prepare_start(basis, None, 8, None, 1.0, np.random.default_rng(0), check="bogus")


@pytest.mark.parametrize("seed", range(4))
def test_prepare_start_contains_short_shifted_vectors(seed):
    rng = np.random.default_rng(seed)
    n, u = 4, 2
    basis = gen_random_lattice(n, seed=40 + seed)
    t = rng.uniform(-3, 3, n).round(2)
    shift = Shift.of(t, n)
    from pairsieve.reduction import dist_estimate

    s_hat = start_threshold(n, u, dist_estimate(basis, t))
    out = prepare_start(basis, t, 32, u, s_hat, rng)
    radius = s_hat / (10 * u ** (n / u) * math.sqrt(math.log2(n)))
    red, rb = reduced_context(basis)
    gs = rb.prim_gso
    tc = gs.coords(shift.array / float(rb.scale))
    coeffs, _ = points_within(gs.mu, gs.bsq, tc, (radius / float(rb.scale)) ** 2)
    full = red.to_input_coeffs(coeffs)
    assert len(full) > 0
    sub = out.sublattice.numer.astype(float)
    for c in full:
        diff = np.asarray(c, dtype=np.int64) - out.offset
        vec = diff.astype(float) @ basis.matrix
        sol, *_ = np.linalg.lstsq(sub.T / out.sublattice.den, vec, rcond=None)
        assert np.allclose(sol, np.rint(sol), atol=1e-6)
        assert np.allclose(np.rint(sol) @ out.sublattice.matrix, vec, atol=1e-6)


def test_start_samples_in_shifted_sublattice():
    basis = gen_random_lattice(3, seed=3)
    out = prepare_start(basis, [1.5, -2.25, 0.5], 20, None, 5.0, np.random.default_rng(1), check="off")
    full = out.to_input_coeffs(out.samples.coeffs)
    np.testing.assert_allclose(full.astype(float) @ basis.matrix - np.array([1.5, -2.25, 0.5]),
                               out.samples.ambient(), atol=1e-9)


def test_required_m_monotone():
    tab = coset_masses(Z2, [0.1, 0.3], 2.0)
    vals = [[required_M(tab, ell, kappa) for kappa in (1, 2, 8)] for ell in range(4)]
    assert all(a <= b for row in vals for a, b in zip(row, row[1:]))
    assert all(vals[i][j] <= vals[i + 1][j] for i in range(3) for j in range(3))
    assert required_M(tab, 0, 1) == math.ceil(1 / tab.p_max)


def test_predicted_m_prime():
    assert predicted_M_prime(Z2, None, 2.0, 0, 2, 10_000) == 10_000
    value = predicted_M_prime(Z2, None, 2.0, 2, 2, 10_000)
    assert 0 <= value <= 10_000
    lhs, rhs = loss_product_bound(Z2, None, 2.0, 2)
    assert lhs >= rhs * (1 - 1e-9)
    assert value == math.ceil(10_000 / 64 ** 2 * lhs)
