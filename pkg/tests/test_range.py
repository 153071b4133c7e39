import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from erws import from_ab, make_params
from erws.errors import IncrementError
from erws import range_analysis as ra
from erws.simulator import run_path

N = 10**6


def test_range_examples():
    assert list(ra.range_of_sequence([0, 1, 1, 2, 1])) == [1, 2, 2, 3, 3]
    assert list(ra.range_of_sequence([4] * 6)) == [1] * 6
    with pytest.raises(IncrementError):
        ra.range_of_sequence([0, 1, 3])


@given(st.lists(st.sampled_from([-1, 0, 1]), min_size=1, max_size=300))
def test_interval_identity_and_monotonicity(incs):
    x = np.concatenate(([0], np.cumsum(incs)))
    r = ra.range_of_sequence(x)
    assert np.array_equal(r, ra.distinct_count_range(x))
    assert r[0] == 1
    assert set(np.diff(r).tolist()) <= {0, 1}


def test_interval_identity_on_walk_paths():
    rng = np.random.default_rng(3)
    for i in range(1000):
        b = rng.uniform(0.1, 1)
        p = from_ab(rng.uniform(-b, b), b, rng.uniform())
        x = np.concatenate(([0], np.cumsum(run_path(p, 150, i))))
        assert np.array_equal(ra.range_of_sequence(x), ra.distinct_count_range(x))


def test_generators_are_unit_increment():
    for x in (ra.staircase(ra.sqrt_growth, 3, 10**4), ra.zigzag(ra.sqrt_growth, 10**4),
              ra.one_sided_toucher(ra.sqrt_growth, 10**4),
              ra.oscillating_staircase(ra.sqrt_growth, 0.1, 10**4)):
        assert x[0] == 0
        assert np.abs(np.diff(x)).max() <= 1


@pytest.mark.parametrize("c", [-2, 0, 3])
def test_case_i_staircase(c):
    rep = ra.lemma31_case_i(ra.sqrt_growth, c, N)
    assert rep.target == abs(c)
    assert rep.passed, rep
    assert rep.tolerance == pytest.approx(2 / math.sqrt(N // 2) + 1e-9)


def test_case_i_oscillating_zero():
    eps = 0.05
    x = ra.oscillating_staircase(ra.sqrt_growth, eps, N)
    r = ra.range_of_sequence(x)
    k = np.arange(N // 2, N + 1)
    assert (r[k] / np.sqrt(k)).max() <= 2 * eps + 2 / math.sqrt(N // 2)


def test_case_ii_bands():
    touch = ra.lemma31_case_ii(ra.sqrt_growth, N, "toucher")
    zz = ra.lemma31_case_ii(ra.sqrt_growth, N, "zigzag")
    assert touch.passed and zz.passed
    assert touch.limsup_estimate == pytest.approx(1, abs=0.01)
    assert zz.limsup_estimate == pytest.approx(2, abs=0.01)


def test_other_growth_function():
    f = lambda n: np.power(np.maximum(n, 1.0), 0.7)
    assert ra.lemma31_case_i(f, -1.5, 10**5).passed
    assert ra.lemma31_case_ii(f, 10**5, "zigzag").passed


def test_range_series_shapes_and_csv():
    p = from_ab(0.1, 0.8, 0.5)
    rs = ra.simulate_range_series(p, 5000, 8, seed=1)
    assert rs.r.shape == rs.s.shape == (8, rs.checkpoints.size)
    assert np.all(np.diff(rs.r, axis=1) >= 0)
    rows = list(rs.csv_rows())
    assert len(rows) == 8 * rs.checkpoints.size
    assert rows[0][5] == ""        # Sigma_1 = 1 < e: normalization skipped
    assert ra.RangeSeries.CSV_HEADER[-1] == "norm_value"


def test_lazy_symmetric_range_sublinear():
    p = make_params(0.5, 0.5, 0.0, 0.5)
    rs = ra.simulate_range_series(p, 10**5, 50, seed=2)
    frac = np.median(rs.r, axis=0) / rs.checkpoints
    assert frac[-1] < frac[rs.checkpoints.searchsorted(1000)] < frac[4]


def test_subcritical_ensemble_small():
    out = ra.range_scaling_ensemble(from_ab(0, 0.8, 0.5), 10**4, 50, seed=3)
    assert out["band"] == pytest.approx((0.8, 2.4))
    assert 0 <= out["fraction_in_band"] <= 1


def test_supercritical_ensemble_small():
    out = ra.range_scaling_ensemble(from_ab(0.75, 0.9, 1), 10**5, 40, seed=4)
    assert out["conditioned_count"] > 20
    assert out["median_ratio"] == pytest.approx(1, abs=0.05)
