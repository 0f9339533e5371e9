import itertools

import numpy as np
import pytest

from distmirror.core import SampleSet
from distmirror.errors import MirrorError, UnequalSampleSizes
from distmirror.transport import (
    DistanceMatrix,
    cost_matrix,
    distance_matrix,
    read_distance_matrix,
    wasserstein_exact,
    write_distance_matrix,
)


def make(points, set_id="s"):
    return SampleSet(id=set_id, samples=np.atleast_2d(np.asarray(points, dtype=float)))


def brute_force_cost(a, b, p):
    """Factorial enumeration over all couplings; the independent oracle."""
    n = a.n
    best = np.inf
    for perm in itertools.permutations(range(n)):
        total = sum(
            np.linalg.norm(a.samples[i] - b.samples[perm[i]]) ** p for i in range(n)
        )
        best = min(best, (total / n) ** (1.0 / p))
    return best


def test_cost_matrix_singletons():
    np.testing.assert_allclose(cost_matrix(make([[0.0]]), make([[3.0]]), 1), [[3.0]])


def test_cost_matrix_squared_distances():
    a = make([[0.0], [1.0]])
    b = make([[1.0], [2.0]])
    np.testing.assert_allclose(cost_matrix(a, b, 2), [[1.0, 4.0], [0.0, 1.0]])


def test_cost_matrix_zero_diagonal():
    a = make(np.arange(6, dtype=float).reshape(3, 2))
    np.testing.assert_array_equal(np.diagonal(cost_matrix(a, a, 1)), np.zeros(3))


def test_cost_matrix_dimension_mismatch():
    with pytest.raises(MirrorError):
        cost_matrix(make([[0.0]]), make([[0.0, 1.0]]), 1)


def test_wasserstein_singletons():
    plan = wasserstein_exact(make([[0.0]]), make([[3.0]]), 1)
    assert plan.cost == pytest.approx(3.0)


def test_wasserstein_two_points():
    # both pairings attain ( |0-1| + |1-2| ) / 2 = ( |0-2| + |1-1| ) / 2 = 1
    plan = wasserstein_exact(make([[0.0], [1.0]]), make([[1.0], [2.0]]), 1)
    assert plan.cost == pytest.approx(1.0, abs=1e-12)


def test_wasserstein_self_distance_zero():
    rng = np.random.default_rng(3)
    a = make(rng.standard_normal((5, 3)))
    plan = wasserstein_exact(a, a, 2)
    assert plan.cost == pytest.approx(0.0, abs=1e-12)


def test_unequal_sizes_rejected():
    with pytest.raises(UnequalSampleSizes):
        wasserstein_exact(make([[0.0], [1.0]]), make([[0.0]]), 1)


@pytest.mark.parametrize("p", [1, 2])
def test_matches_brute_force(p):
    rng = np.random.default_rng(11 + p)
    for _ in range(25):
        n = rng.integers(1, 6)
        q = rng.integers(2, 4)
        a = make(rng.standard_normal((n, q)), "a")
        b = make(rng.standard_normal((n, q)), "b")
        plan = wasserstein_exact(a, b, p)
        assert plan.cost == pytest.approx(brute_force_cost(a, b, p), abs=1e-12)


def test_plan_permutation_attains_cost():
    rng = np.random.default_rng(7)
    for p in (1, 2, 1.5):
        a = make(rng.standard_normal((8, 2)), "a")
        b = make(rng.standard_normal((8, 2)), "b")
        plan = wasserstein_exact(a, b, p)
        perm = plan.permutation
        assert sorted(perm) == list(range(8))
        recomputed = (
            np.mean(
                np.linalg.norm(a.samples - b.samples[perm], axis=1) ** p
            )
            ** (1.0 / p)
        )
        assert plan.cost == pytest.approx(recomputed, abs=1e-12)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_1d_fast_path_matches_assignment(p):
    rng = np.random.default_rng(23)
    from scipy.optimize import linear_sum_assignment

    for _ in range(20):
        n = int(rng.integers(2, 40))
        a = make(rng.standard_normal((n, 1)), "a")
        b = make(rng.standard_normal((n, 1)), "b")
        fast = wasserstein_exact(a, b, p).cost
        costs = cost_matrix(a, b, p)
        rows, cols = linear_sum_assignment(costs)
        slow = float(costs[rows, cols].mean() ** (1.0 / p))
        assert fast == pytest.approx(slow, abs=1e-12)


def test_large_sample_gaussian_w1():
    # population W1 between equal-variance normals is |mu1 - mu2|
    rng = np.random.default_rng(42)
    a = make(rng.normal(0.0, 1.0, (5000, 1)), "a")
    b = make(rng.normal(2.0, 1.0, (5000, 1)), "b")
    w = wasserstein_exact(a, b, 1).cost
    assert abs(w - 2.0) / 2.0 < 0.05


def test_distance_matrix_single_set():
    dm = distance_matrix([make([[0.0]], "a")], 1)
    np.testing.assert_array_equal(dm.values, [[0.0]])


def test_distance_matrix_three_singletons():
    sets = [make([[0.0]], "a"), make([[1.0]], "b"), make([[3.0]], "c")]
    dm = distance_matrix(sets, 1)
    np.testing.assert_allclose(dm.values, [[0, 1, 3], [1, 0, 2], [3, 2, 0]])
    assert dm.metric == "w1"


def test_distance_matrix_recomputation_oracle():
    rng = np.random.default_rng(19)
    sets = [make(rng.standard_normal((6, 2)), f"s{i}") for i in range(5)]
    for p in (1, 2):
        dm = distance_matrix(sets, p)
        assert np.array_equal(dm.values, dm.values.T)
        for i in range(5):
            for j in range(5):
                expect = 0.0 if i == j else wasserstein_exact(sets[i], sets[j], p).cost
                assert dm.values[i, j] == pytest.approx(expect, abs=1e-15)


def test_metric_axioms_on_sampled_triples():
    rng = np.random.default_rng(29)
    for p in (1, 2):
        sets = [make(rng.standard_normal((5, 2)), f"s{i}") for i in range(6)]
        dm = distance_matrix(sets, p).values
        assert np.all(dm >= 0)
        for i, j, k in itertools.permutations(range(6), 3):
            assert dm[i, j] <= dm[i, k] + dm[k, j] + 1e-9


def test_distance_matrix_thread_count_invariance(monkeypatch):
    rng = np.random.default_rng(31)
    sets = [make(rng.standard_normal((30, 1)), f"s{i}") for i in range(8)]
    monkeypatch.setenv("MIRROR_THREADS", "1")
    one = distance_matrix(sets, 2).values
    monkeypatch.setenv("MIRROR_THREADS", "4")
    four = distance_matrix(sets, 2).values
    assert np.array_equal(one, four)


def test_distance_matrix_csv_round_trip(tmp_path):
    rng = np.random.default_rng(37)
    sets = [make(rng.standard_normal((4, 2)), f"s{i}") for i in range(4)]
    dm = distance_matrix(sets, 1)
    path = tmp_path / "dm.csv"
    write_distance_matrix(dm, path)
    back = read_distance_matrix(path)
    assert back.ids == dm.ids
    np.testing.assert_array_equal(back.values, dm.values)
    assert back.metric == "external"


def test_reader_symmetrizes_small_asymmetry(tmp_path):
    path = tmp_path / "dm.csv"
    path.write_text("a,b\n0.0,1.0000000001\n0.9999999999,0.0\n")
    dm = read_distance_matrix(path)
    assert dm.values[0, 1] == pytest.approx(1.0, abs=1e-12)
    assert dm.values[0, 1] == dm.values[1, 0]


def test_reader_rejects_large_asymmetry(tmp_path):
    path = tmp_path / "dm.csv"
    path.write_text("a,b\n0.0,1.5\n1.0,0.0\n")
    with pytest.raises(MirrorError, match="asymmetric"):
        read_distance_matrix(path)


def test_distance_matrix_invariants_enforced():
    with pytest.raises(MirrorError):
        DistanceMatrix(ids=("a", "b"), values=np.array([[0.0, 1.0], [2.0, 0.0]]), metric="w1")
    with pytest.raises(MirrorError):
        DistanceMatrix(ids=("a", "b"), values=np.array([[0.0, -1.0], [-1.0, 0.0]]), metric="w1")
