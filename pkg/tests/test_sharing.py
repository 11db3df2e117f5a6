import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cachemarket import sharing as sh
from cachemarket.errors import ParameterError

demand_lists = st.lists(st.floats(0, 100), min_size=1, max_size=7)


def shapley_by_orders(demands, omega=1.0):
    # average marginal cost over all K! arrival orders
    k = len(demands)
    psi = np.zeros(k)
    orders = list(itertools.permutations(range(k)))
    for order in orders:
        cur = 0.0
        for i in order:
            new = max(cur, demands[i])
            psi[i] += omega * (new - cur)
            cur = new
    return psi / len(orders)


def test_char_fn():
    p = sh.RentProblem(2.0, (3, 6, 12))
    assert sh.char_fn([], p) == 0
    assert sh.char_fn([1], p) == 12
    assert sh.char_fn(range(3), p) == 24


def test_sub_additive_exhaustive():
    rng = np.random.default_rng(3)
    for k in range(1, 7):
        p = sh.RentProblem(1.3, tuple(rng.uniform(0, 10, k)))
        players = range(k)
        for mask in range(1 << k):
            c1 = [i for i in players if mask >> i & 1]
            rest = [i for i in players if not mask >> i & 1]
            for m2 in range(1 << len(rest)):
                c2 = [rest[j] for j in range(len(rest)) if m2 >> j & 1]
                assert sh.char_fn(c1 + c2, p) <= sh.char_fn(c1, p) + sh.char_fn(c2, p) + 1e-12


def test_worked_example():
    p = sh.RentProblem(1.0, (3, 6, 12))
    assert sh.shapley_exact(p).psi == pytest.approx((1, 2.5, 8.5), abs=1e-12)
    assert sh.airport_share(p).psi == pytest.approx((1, 2.5, 8.5), abs=1e-12)


@given(demand_lists, st.floats(0.1, 10))
def test_exact_matches_permutation_average(d, omega):
    p = sh.RentProblem(omega, tuple(d))
    np.testing.assert_allclose(sh.shapley_exact(p).psi, shapley_by_orders(d, omega), rtol=1e-12, atol=1e-12)


@given(demand_lists)
def test_axioms(d):
    p = sh.RentProblem(1.0, tuple(d))
    for alloc in (sh.shapley_exact(p), sh.airport_share(p)):
        assert sum(alloc.psi) == pytest.approx(alloc.total, abs=1e-12 * max(1.0, alloc.total))
        assert all(x >= 0 for x in alloc.psi)
        for i, j in itertools.combinations(range(len(d)), 2):
            if d[i] == d[j]:
                assert alloc.psi[i] == pytest.approx(alloc.psi[j], abs=1e-12)
            if d[i] < d[j]:
                assert alloc.psi[i] <= alloc.psi[j] + 1e-12
            if d[i] == 0:
                assert alloc.psi[i] == 0


def test_additivity():
    rng = np.random.default_rng(11)
    k = 5
    u, v = rng.uniform(0, 5, k), rng.uniform(0, 5, k)
    pu, pv = sh.RentProblem(1.0, tuple(u)), sh.RentProblem(1.0, tuple(v))
    summed = sh.shapley_value(lambda c: sh.char_fn(c, pu) + sh.char_fn(c, pv), k)
    np.testing.assert_allclose(summed, np.add(sh.shapley_exact(pu).psi, sh.shapley_exact(pv).psi),
                               atol=1e-12)


def test_equal_demands_split_evenly():
    a = sh.airport_share(sh.RentProblem(2.0, (4, 4, 4, 4)))
    assert a.psi == (2.0, 2.0, 2.0, 2.0)


def test_single_mno_pays_all():
    assert sh.airport_share(sh.RentProblem(3.0, (5,))).psi == (15.0,)


@given(st.lists(st.floats(0.01, 100), min_size=1, max_size=12, unique=True))
def test_update_count_quadratic(d):
    a = sh.airport_share(sh.RentProblem(1.0, tuple(d)))
    k = len(d)
    assert a.updates == k * (k + 1) // 2


def test_rejections():
    with pytest.raises(ParameterError):
        sh.RentProblem(1.0, ())
    with pytest.raises(ParameterError):
        sh.RentProblem(1.0, (1, -1))
    with pytest.raises(ParameterError):
        sh.shapley_exact(sh.RentProblem(1.0, tuple(range(21))))
