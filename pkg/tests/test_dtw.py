import numpy as np
import pytest

from oracles import brute_dtw_min_mean
from phoneval.abx.dtw import EmptySequence, dtw_distance, frame_distances, min_mean_path

METRICS = ("angular", "cosine", "euclidean")


def test_identical_sequences_zero():
    rng = np.random.default_rng(0)
    for metric in METRICS:
        for _ in range(10):
            x = rng.standard_normal((int(rng.integers(1, 8)), 4))
            assert dtw_distance(x, x, metric) == 0.0


def test_single_frame_pair():
    a = np.array([[1.0, 0.0]])
    b = np.array([[0.0, 1.0]])
    assert dtw_distance(a, b, "angular") == pytest.approx(0.5)
    assert dtw_distance(a, b, "cosine") == pytest.approx(1.0)
    assert dtw_distance(a, b, "euclidean") == pytest.approx(np.sqrt(2))


def test_matches_path_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        costs = rng.uniform(0, 1, size=(n, m))
        assert min_mean_path(costs) == pytest.approx(brute_dtw_min_mean(costs), abs=1e-12)


def test_min_mean_beats_unnormalized_argmin():
    # a long cheap detour must not win once costs are averaged
    costs = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.5]])
    assert min_mean_path(costs) == pytest.approx(brute_dtw_min_mean(costs), abs=1e-12)


def test_symmetry():
    rng = np.random.default_rng(3)
    for metric in METRICS:
        a = rng.standard_normal((4, 3))
        b = rng.standard_normal((6, 3))
        assert dtw_distance(a, b, metric) == pytest.approx(dtw_distance(b, a, metric), abs=1e-12)


def test_zero_norm_frames():
    zero = np.zeros((2, 3))
    one = np.ones((2, 3))
    assert dtw_distance(zero, zero, "angular") == 0.0
    assert dtw_distance(zero, one, "angular") == pytest.approx(0.5)
    assert dtw_distance(zero, one, "cosine") == pytest.approx(1.0)


def test_angular_range():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((10, 4))
    b = rng.standard_normal((12, 4))
    d = frame_distances(a, b, "angular")
    assert np.all(d >= 0) and np.all(d <= 1)


def test_empty_sequence():
    with pytest.raises(EmptySequence):
        dtw_distance(np.zeros((0, 3)), np.zeros((2, 3)))
