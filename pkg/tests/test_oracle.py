import math

import numpy as np
import pytest
from scipy import stats

from erws import from_ab, make_params
from erws.errors import CapError
from erws.oracle import (JointLaw, enumerate_paths, exact_joint_law, exact_moment,
                         exact_range_law)
from erws.range_analysis import distinct_count_range
from erws.simulator import run_batch

GRID = [from_ab(f * b, b, s) for b in (0.3, 0.9) for f in (-1, -0.5, 0, 0.5, 1)
        for s in (0, 0.5, 1)]


def test_n1_law():
    law = exact_joint_law(from_ab(0.1, 0.4, 0.3), 1)
    assert law.table == {(1, 0): 0.3, (0, 1): pytest.approx(0.7)}


def test_n2_hand_enumeration(half_stop):
    law = exact_joint_law(half_stop, 2)
    assert law.table == {(2, 0): 0.5, (1, 0): 0.5}
    assert exact_moment(law, 1, 0) == 1.5
    assert exact_moment(law, 1, 1) == 2.5
    assert exact_moment(law, 0, 0) == 1.0


@pytest.mark.parametrize("params", GRID)
def test_normalization_and_support(params):
    law = exact_joint_law(params, 12)
    assert abs(law.total() - 1) <= 1e-12
    assert all(1 <= i + j <= 12 for i, j in law.table)


@pytest.mark.parametrize("params", GRID[::3])
def test_joint_law_matches_path_enumeration(params):
    n = 7
    law = exact_joint_law(params, n)
    agg = {}
    for path, w in enumerate_paths(params, n):
        key = (path.count(1), path.count(-1))
        agg.setdefault(key, []).append(w)
    for key in set(agg) | set(law.table):
        assert law.table.get(key, 0.0) == pytest.approx(math.fsum(agg.get(key, [])), abs=1e-15)


def test_json_round_trip():
    law = exact_joint_law(from_ab(0.2, 0.7, 0.6), 6)
    back = JointLaw.from_json(law.to_json())
    assert back == law
    obj = __import__("json").loads(law.to_json())
    assert set(obj) == {"n", "entries"}
    assert set(obj["entries"][0]) == {"n_plus", "n_minus", "p"}


def test_caps():
    p = from_ab(0, 0.5, 0.5)
    with pytest.raises(CapError):
        exact_joint_law(p, 4001)
    with pytest.raises(CapError):
        exact_range_law(p, 15)
    with pytest.raises(ValueError):
        exact_moment(exact_joint_law(p, 2), 5, 4)


def test_range_law_examples(half_stop):
    assert exact_range_law(half_stop, 2) == {2: 0.5, 3: 0.5}
    for params in GRID[:5]:
        assert exact_range_law(params, 1) == {2: 1.0}
        assert math.fsum(exact_range_law(params, 9).values()) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("params", GRID[1::4])
def test_range_law_matches_distinct_counts(params):
    n = 8
    law = exact_range_law(params, n)
    direct = {}
    for path, w in enumerate_paths(params, n):
        r = distinct_count_range(np.concatenate(([0], np.cumsum(path))))[-1]
        direct.setdefault(int(r), []).append(w)
    mean_law = math.fsum(r * p for r, p in law.items())
    mean_direct = math.fsum(r * w for r, ws in direct.items() for w in ws)
    assert mean_law == pytest.approx(mean_direct, rel=1e-13)
    for r in set(law) | set(direct):
        assert law.get(r, 0.0) == pytest.approx(math.fsum(direct.get(r, [])), abs=1e-15)


def _chi2_against(observed: dict, expected: dict, total: int):
    keys = sorted(expected)
    obs = np.array([observed.get(k, 0) for k in keys], dtype=float)
    exp = np.array([expected[k] * total for k in keys])
    # pool sparse cells so every expected count is >= 5
    order = np.argsort(exp)
    o_pool, e_pool, acc_o, acc_e = [], [], 0.0, 0.0
    for i in order:
        acc_o += obs[i]
        acc_e += exp[i]
        if acc_e >= 5:
            o_pool.append(acc_o)
            e_pool.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e:
        o_pool[-1] += acc_o
        e_pool[-1] += acc_e
    assert sum(observed.values()) == total
    return stats.chisquare(o_pool, e_pool)


@pytest.mark.slow
@pytest.mark.parametrize("params", [from_ab(0.3, 0.6, 1.0), from_ab(-0.4, 0.9, 0.3)])
def test_sampler_matches_joint_law_chi_square(params):
    n, reps = 8, 10**6
    finals, _ = run_batch(params, n, 31337, reps)
    s, sig = finals[:, 0], finals[:, 1]
    keys, counts = np.unique(np.stack([(sig + s) // 2, (sig - s) // 2]), axis=1,
                             return_counts=True)
    observed = {(int(i), int(j)): int(c) for (i, j), c in zip(keys.T, counts)}
    res = _chi2_against(observed, exact_joint_law(params, n).table, reps)
    assert res.pvalue > 0.01


@pytest.mark.slow
def test_sampler_matches_range_law_chi_square():
    params = from_ab(0.2, 0.7, 0.5)
    n, reps = 10, 200_000
    finals, _ = run_batch(params, n, 4242, reps)
    r = finals[:, 3] - finals[:, 2] + 1
    vals, counts = np.unique(r, return_counts=True)
    observed = {int(v): int(c) for v, c in zip(vals, counts)}
    res = _chi2_against(observed, exact_range_law(params, n), reps)
    assert res.pvalue > 0.01
