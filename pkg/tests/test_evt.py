import math

import numpy as np
import pytest

from tailtrend import (DegenerateTailError, NonPositiveDataError, TailSlice,
                       combined_index, hill_estimator, moment_estimator,
                       moment_scale, tail_slice)

E = math.e


def slice_of(values, k):
    return tail_slice(np.asarray(values, dtype=float), k)


# ---------------------------------------------------------------------------
# tail_slice

def test_tail_slice_basic():
    assert tail_slice([3, 1, 2], 1).order_stats.tolist() == [2.0, 3.0]


def test_tail_slice_all_ties():
    assert tail_slice([5, 5, 5, 5], 2).order_stats.tolist() == [5.0, 5.0, 5.0]


def test_tail_slice_shuffled_range():
    rng = np.random.default_rng(0)
    values = rng.permutation(np.arange(1, 501, dtype=float))
    got = tail_slice(values, 30)
    assert got.order_stats.tolist() == sorted(values.tolist())[-31:]
    assert got.n == 500
    assert got.k == 30
    assert got.threshold == 470.0


@pytest.mark.parametrize("k", [0, -3, 5, 6])
def test_tail_slice_k_out_of_range(k):
    with pytest.raises(ValueError) as err:
        tail_slice([1.0, 2.0, 3.0, 4.0, 5.0], k)
    assert f"k={k}" in str(err.value) and "n=5" in str(err.value)


def test_tail_slice_matches_full_sort_oracle_exhaustively():
    rng = np.random.default_rng(7)
    for n in range(2, 13):
        for _ in range(30):
            values = rng.integers(0, 6, size=n).astype(float)  # many ties
            rng.shuffle(values)
            for k in range(1, n):
                expected = sorted(values.tolist())[n - k - 1:]
                assert tail_slice(values, k).order_stats.tolist() == expected


# ---------------------------------------------------------------------------
# Hill estimator

def test_hill_simple_exponents():
    assert hill_estimator(slice_of([1.0, E, E ** 2], 2)) == pytest.approx(1.5, abs=1e-14)


def test_hill_all_tied_is_zero():
    assert hill_estimator(slice_of([3.3] * 6, 4)) == 0.0


def test_hill_rejects_nonpositive():
    with pytest.raises(NonPositiveDataError) as err:
        hill_estimator(TailSlice(np.array([-1.0, 2.0, 3.0]), n=10))
    assert "-1.0" in str(err.value)


def test_hill_consistent_for_pareto():
    # Pareto(gamma=0.5): replication mean of Hill at n=500, k=50 is near 0.5
    rng = np.random.default_rng(11)
    gamma = 0.5
    estimates = []
    for _ in range(1000):
        x = (1.0 - rng.random(500)) ** (-gamma)
        estimates.append(hill_estimator(tail_slice(x, 50)))
    assert np.mean(estimates) == pytest.approx(gamma, abs=0.2)
    assert np.mean(estimates) == pytest.approx(gamma, abs=0.03)  # actual margin


def test_hill_error_decreases_with_n_for_pareto():
    # Hill is exactly unbiased for Pareto, so the replication-mean error is
    # pure sampling noise whose scale shrinks with k*reps; seed pinned.
    rng = np.random.default_rng(6)
    gamma = 0.5
    errs = []
    for n in (500, 5000, 50000):
        k = int(math.isqrt(n))
        means = [hill_estimator(tail_slice((1.0 - rng.random(n)) ** (-gamma), k))
                 for _ in range(200)]
        errs.append(abs(np.mean(means) - gamma))
    assert errs[0] > errs[1] > errs[2]


# ---------------------------------------------------------------------------
# moment estimator and scale

def test_moment_simple_exponents():
    # M1 = 1.5, M2 = 2.5 -> 1.5 + 1 - 0.5/(1 - 2.25/2.5) = -2.5
    assert moment_estimator(slice_of([1.0, E, E ** 2], 2)) == pytest.approx(-2.5, rel=1e-12)


def test_moment_scale_simple_exponents():
    # gamma_minus = -4, a = 1 * 1.5 * 5
    assert moment_scale(slice_of([1.0, E, E ** 2], 2)) == pytest.approx(7.5, rel=1e-12)


def test_moment_rejects_ties_and_k1():
    with pytest.raises(DegenerateTailError):
        moment_estimator(slice_of([2.0, 2.0, 2.0], 2))
    with pytest.raises(DegenerateTailError):
        moment_estimator(slice_of([1.0, 2.0], 1))  # k=1 always degenerates
    with pytest.raises(DegenerateTailError):
        moment_scale(slice_of([2.0, 2.0, 2.0], 2))


def test_moment_rejects_nonpositive():
    with pytest.raises(NonPositiveDataError):
        moment_estimator(TailSlice(np.array([0.0, 2.0, 3.0]), n=5))


def test_moment_mean_near_gamma_for_gpd():
    rng = np.random.default_rng(5)
    gamma = 0.1
    estimates = []
    for _ in range(1000):
        x = ((1.0 - rng.random(500)) ** (-gamma) - 1.0) / gamma
        estimates.append(moment_estimator(tail_slice(x, 50)))
    assert np.mean(estimates) == pytest.approx(gamma, abs=0.25)


def test_moment_goes_to_zero_for_exponential():
    rng = np.random.default_rng(9)
    abs_means = []
    for n in (500, 5000, 50000):
        k = int(math.isqrt(n))
        means = [moment_estimator(tail_slice(rng.exponential(size=n), k))
                 for _ in range(50)]
        abs_means.append(abs(np.mean(means)))
    assert abs_means[0] > abs_means[2]
    assert abs_means[2] < 0.05


def test_moment_scale_equivariance():
    rng = np.random.default_rng(13)
    x = np.exp(rng.normal(size=40))
    base = moment_scale(tail_slice(x, 12))
    for b in (2.0 ** 10, 3.7, 0.125):
        assert moment_scale(tail_slice(b * x, 12)) == pytest.approx(b * base, rel=1e-12)


def test_moment_scale_near_gpd_truth():
    # for GPD, the scale function at t = n/k is t^gamma
    rng = np.random.default_rng(17)
    gamma, n, k = 0.1, 500, 50
    estimates = []
    for _ in range(300):
        x = ((1.0 - rng.random(n)) ** (-gamma) - 1.0) / gamma
        estimates.append(moment_scale(tail_slice(x, k)))
    truth = (n / k) ** gamma
    assert np.mean(estimates) == pytest.approx(truth, rel=0.3)


def test_hill_and_moment_scale_invariance():
    rng = np.random.default_rng(19)
    x = np.exp(rng.normal(size=60))
    t = tail_slice(x, 20)
    for b in (2.0 ** 12, 5.3):
        tb = tail_slice(b * x, 20)
        assert hill_estimator(tb) == pytest.approx(hill_estimator(t), rel=1e-12, abs=1e-13)
        assert moment_estimator(tb) == pytest.approx(moment_estimator(t), rel=1e-12, abs=1e-13)


# ---------------------------------------------------------------------------
# combined index

def test_combined_index_mean_of_two():
    # hill of (1, e^a) at k=1 is exactly a
    s1 = slice_of([1.0, math.exp(0.1)], 1)
    s2 = slice_of([1.0, math.exp(0.3)], 1)
    assert combined_index([s1, s2], "hill") == pytest.approx(0.2, rel=1e-12)


def test_combined_index_single_group_identity():
    s1 = slice_of([1.0, E, E ** 2], 2)
    assert combined_index([s1], "hill") == hill_estimator(s1)
    assert combined_index([s1], "moment") == moment_estimator(s1)


def test_combined_index_error_annotates_group():
    good = slice_of([1.0, 2.0, 3.0], 2)
    bad = TailSlice(np.array([-1.0, 2.0, 3.0]), n=5)
    with pytest.raises(NonPositiveDataError) as err:
        combined_index([good, bad], "hill")
    assert "group 2" in str(err.value)


def test_combined_index_requires_shared_k():
    with pytest.raises(ValueError):
        combined_index([slice_of([1, 2, 3], 2), slice_of([1, 2, 3], 1)], "hill")
    with pytest.raises(ValueError):
        combined_index([slice_of([1, 2, 3], 2)], "weird")


def test_combined_index_concentrates_on_many_groups():
    # averaging the per-group moment estimates over 200 groups shrinks the
    # variance enough that one panel's combined estimate lands near gamma
    rng = np.random.default_rng(np.random.SeedSequence(23, spawn_key=(0,)))
    gamma, n, k = 0.1, 500, 30
    slices = []
    for _ in range(200):
        x = ((1.0 - rng.random(n)) ** (-gamma) - 1.0) / gamma
        slices.append(tail_slice(x, k))
    assert combined_index(slices, "moment") == pytest.approx(gamma, abs=0.05)


# ---------------------------------------------------------------------------
# high threshold tracks the tail quantile function (k = floor(sqrt(n)))

@pytest.mark.parametrize("family", ["gpd", "pareto", "cauchy"])
def test_threshold_tracks_tail_quantile(family):
    from tailtrend import sample_base

    gamma = {"gpd": 0.1, "pareto": 0.5, "cauchy": 1.0}[family]
    n = 10000
    k = int(math.isqrt(n))
    t = n / k
    if family == "gpd":
        u_t = (t ** gamma - 1.0) / gamma
    elif family == "pareto":
        u_t = t ** gamma
    else:
        u_t = math.tan(math.pi * (0.5 - 1.0 / t))
    ratios = []
    for rep in range(100):
        rng = np.random.default_rng(np.random.SeedSequence(29, spawn_key=(rep,)))
        x = sample_base(family, gamma, n, rng)
        ratios.append(tail_slice(x, k).threshold / u_t)
    assert abs(np.median(ratios) - 1.0) < 0.05
