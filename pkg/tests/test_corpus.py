import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emcert.corpus import Candidate, GridFunction, evaluate, lattice_grid, refine_levels, sample_on_grid
from emcert.errors import DimensionError, GridError, OffGridQuery

coord = st.floats(min_value=0.0, max_value=1e3, allow_nan=False, allow_infinity=False)


def test_affine_at_ones():
    assert evaluate(Candidate.affine([0.5, 0.5]), [1, 1]) == 1.0


def test_product():
    assert evaluate(Candidate.product(2), [2, 2]) == 4.0


def test_arithmetic_mean():
    assert evaluate(Candidate.arithmetic_mean(2), [0, 2]) == 1.0


@pytest.mark.parametrize(
    "f, u, expected",
    [
        (Candidate.maximum(3), [0.5, 3.0, 1.0], 3.0),
        (Candidate.minimum(3), [0.5, 3.0, 1.0], 0.5),
        (Candidate.projection(3, 2), [0.5, 3.0, 1.0], 3.0),
        (Candidate.constant(2, 1.5), [7.0, 0.0], 1.5),
        (Candidate.affine([0.6, 0.6]), [0, 0], 1.0 - 1.2),
        (Candidate.affine([0.6, 0.6], clamp=True), [0, 0], 0.0),
    ],
)
def test_closed_forms(f, u, expected):
    assert evaluate(f, u) == pytest.approx(expected, abs=1e-15)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        evaluate(Candidate.product(2), [1.0, 2.0, 3.0])


def test_negative_coordinate_rejected():
    with pytest.raises(GridError):
        evaluate(Candidate.product(2), [1.0, -2.0])


def test_table_lookup_and_off_grid():
    f = Candidate.from_table(GridFunction([[0, 0], [2, 2]], [0.0, 4.0]))
    assert evaluate(f, [2, 2]) == 4.0
    with pytest.raises(OffGridQuery, match="off-grid query"):
        evaluate(f, [1, 1])


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="affine", K=2, w=(1.0,)),
        dict(kind="projection", K=2, k=3),
        dict(kind="projection", K=2, k=0),
        dict(kind="constant", K=1, c=-1.0),
        dict(kind="product", K=0),
        dict(kind="median", K=2),
    ],
)
def test_invalid_candidates(kwargs):
    with pytest.raises(ValueError):
        Candidate(**kwargs)


class TestSampleOnGrid:
    def test_product(self):
        g = sample_on_grid(Candidate.product(2), [(0, 0), (2, 2)])
        assert g.values.tolist() == [0.0, 4.0]

    def test_constant(self):
        g = sample_on_grid(Candidate.constant(2, 1), [(0, 0), (1, 3), (5, 2)])
        assert g.values.tolist() == [1.0, 1.0, 1.0]

    def test_affine(self):
        g = sample_on_grid(Candidate.affine([0.5, 0.5]), [(0, 0), (2, 0), (0, 2), (2, 2)])
        np.testing.assert_allclose(g.values, [0, 1, 1, 2], atol=1e-15)

    def test_duplicates_rejected(self):
        with pytest.raises(GridError, match="duplicate"):
            sample_on_grid(Candidate.product(2), [(0, 0), (1, 1), (0, 0)])

    def test_negative_values_rejected(self):
        with pytest.raises(GridError, match="negative"):
            sample_on_grid(Candidate.affine([0.6, 0.6]), lattice_grid(2, [0, 1, 2]))

    def test_grid_is_read_only(self):
        g = sample_on_grid(Candidate.product(2), [(0, 0), (2, 2)])
        with pytest.raises(ValueError):
            g.values[0] = 3.0

    def test_lookup_reproduces_evaluate(self):
        f = Candidate.maximum(3)
        g = sample_on_grid(f, lattice_grid(3, [0, 0.5, 1, 3]))
        for p in g.points:
            assert g.lookup(p) == evaluate(f, p)


class TestLattice:
    def test_two_levels(self):
        assert lattice_grid(2, [0, 2]) == [(0, 0), (0, 2), (2, 0), (2, 2)]

    def test_one_dim(self):
        assert lattice_grid(1, [0, 1, 3]) == [(0,), (1,), (3,)]

    def test_cube(self):
        assert len(lattice_grid(3, [0, 1])) == 8

    def test_cap(self):
        with pytest.raises(GridError, match="grid too large"):
            lattice_grid(7, list(range(8)))

    @pytest.mark.parametrize("levels", [[], [1, 0], [0, 0, 1], [-1, 1]])
    def test_bad_levels(self, levels):
        with pytest.raises(GridError):
            lattice_grid(2, levels)

    def test_refine_doubles_range_and_density(self):
        assert refine_levels([0, 1, 2]) == [0, 0.5, 1, 1.5, 2, 4]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=5))
def test_affine_is_one_at_ones(w):
    f = Candidate.affine(w)
    assert abs(evaluate(f, [1.0] * len(w)) - 1.0) <= 1e-12


def test_mean_equals_uniform_affine():
    rng = np.random.default_rng(3)
    for K in (1, 2, 5):
        mean, aff = Candidate.arithmetic_mean(K), Candidate.affine([1.0 / K] * K)
        for u in rng.uniform(0, 10, size=(100, K)):
            assert abs(evaluate(mean, u) - evaluate(aff, u)) <= 1e-12


@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=8, unique=True))
def test_sample_then_lookup(points):
    f = Candidate.product(2)
    g = sample_on_grid(f, points)
    assert all(g.lookup(p) == evaluate(f, p) for p in points)
    assert all(math.isfinite(v) and v >= 0 for v in g.values)
