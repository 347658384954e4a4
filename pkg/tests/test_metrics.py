import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randlam import analytics
from randlam.core_model import Chord, FiniteLamination, StepFunction
from randlam.fragmentation import FragState
from randlam.metrics import (
    GridSample,
    MatrixPointCloud,
    TreePointCloud,
    boxdim_estimate,
    covering_number,
    dyadic_deltas,
    gh_upper_bound,
    hausdorff_laminations,
    rescale_factor,
    rescaled_discrete,
    step_sup_diff,
    sup_diff,
)

GRID = np.linspace(0, 1, 101)
ONE = StepFunction([0.2, 0.6], [0, 1, 0])


def one_chord_state():
    s = FragState()
    s.trial_selfsimilar(0.2, 0.6)
    return s


def test_sup_diff_examples():
    f = GridSample.of(ONE, GRID)
    zero = GridSample(GRID, np.zeros_like(GRID))
    assert sup_diff(f, f) == 0
    assert sup_diff(f, zero) == 1
    assert step_sup_diff(ONE, 0.0) == 1
    assert gh_upper_bound(f, f) == 0
    assert gh_upper_bound(f, zero) == 2
    with pytest.raises(ValueError):
        sup_diff(f, GridSample(GRID[:5], GRID[:5]))


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3).map(np.array))
def test_sup_diff_triangle(shift):
    g = np.linspace(0, 1, 7)
    f, gg, h = (GridSample(g, np.sin(g * (k + 1)) + shift[k]) for k in range(3))
    assert abs(sup_diff(f, h) - sup_diff(gg, h)) <= sup_diff(f, gg) + 1e-12


def test_gh_bound_grows_under_refinement():
    coarse = np.linspace(0, 1, 11)
    fine = np.linspace(0, 1, 101)
    f = lambda x: np.sin(7 * x)
    g = lambda x: np.cos(3 * x)
    assert gh_upper_bound(GridSample.of(f, fine), GridSample.of(g, fine)) >= \
        gh_upper_bound(GridSample.of(f, coarse), GridSample.of(g, coarse))


def test_rescaled_one_chord():
    c = analytics.constants()
    x = rescaled_discrete(one_chord_state(), [0.1, 0.3])
    plateau = 3 * c.kappa * analytics.beta_fn(c.beta + 1, c.beta + 1)
    assert x.values[0] == 0
    assert x.values[1] == pytest.approx(plateau, rel=1e-12)
    assert rescale_factor("self-similar", 1) * 2 == pytest.approx(2 * plateau)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=2, max_size=40))
def test_tree_pseudo_metric(values):
    f = np.array(values)
    cloud = TreePointCloud(f)
    n = len(f)
    for i in range(n):
        row = cloud.distances_from(i)
        assert row[i] == pytest.approx(0, abs=1e-12)
        assert np.all(row >= -1e-12)
        for j in range(n):
            assert row[j] == pytest.approx(cloud.distance(j, i), abs=1e-12)
    d = np.array([cloud.distances_from(i) for i in range(n)])
    assert np.all(d[:, :, None] <= d[:, None, :] + d.T[None, :, :] + 1e-9)


def test_covering_examples():
    three = MatrixPointCloud(np.ones((3, 3)) - np.eye(3))
    assert covering_number(three, 0.4) == (3, 3)
    assert covering_number(three, 2.0)[0] == 1
    single = TreePointCloud(np.array([0.0]))
    for d in (0.01, 0.1, 1.0):
        assert covering_number(single, d) == (1, 1)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 3), min_size=1, max_size=60), st.floats(0.01, 1.0))
def test_packing_below_cover(values, delta):
    cloud = TreePointCloud(np.array(values))
    cover, packing = covering_number(cloud, delta)
    assert 1 <= packing <= cover <= len(values)


def test_tree_cover_matches_matrix_cover():
    f = np.abs(np.cumsum(np.random.default_rng(3).normal(size=300)))
    tree = TreePointCloud(f)
    mat = MatrixPointCloud(np.array([tree.distances_from(i) for i in range(len(f))]))
    for d in (0.3, 1.0, 4.0):
        assert tree.greedy_centers(d) == mat.greedy_centers(d)


def test_boxdim_segment_and_point():
    deltas = dyadic_deltas(3, 9)
    seg = boxdim_estimate(TreePointCloud(np.linspace(0, 1, 4096)), deltas)
    assert 0.9 <= seg.slope <= 1.1
    point = boxdim_estimate(TreePointCloud(np.zeros(5)), deltas)
    assert point.slope == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        boxdim_estimate(TreePointCloud(np.zeros(5)), [0.5, 0.25])


def test_hausdorff_examples():
    a = FiniteLamination([Chord(0.2, 0.6)])
    # these two chords cross, so B is a plain chord set
    b = [Chord(0.2, 0.6), Chord(0.2001, 0.6001)]
    assert hausdorff_laminations(a, a) <= 1e-3
    assert hausdorff_laminations(a, b) <= 1e-3 + 1e-3
    assert hausdorff_laminations(a, b) == pytest.approx(hausdorff_laminations(b, a))
    with pytest.raises(ValueError):
        hausdorff_laminations(a, [])
