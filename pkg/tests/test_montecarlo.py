import math

import numpy as np
import pytest
from scipy import stats

from cachemarket import delay, geometry, montecarlo as mc
from cachemarket.caching import CatalogParams, hit_prob_exact
from cachemarket.delay import QueueParams
from cachemarket.errors import InfeasibleError, ParameterError
from cachemarket.geometry import NetworkParams

NET0 = NetworkParams(sigma2=0.0)


def test_coverage_matches_interference_limited():
    est = mc.simulate_coverage(NET0, mc.SimConfig(seed=1, trials=50_000))
    assert est.contains(geometry.interference_limited(NET0).p_c)


def test_coverage_density_free_without_noise():
    a = mc.simulate_coverage(NET0, mc.SimConfig(seed=2, trials=40_000))
    b = mc.simulate_coverage(NET0.with_(lam=4e-4), mc.SimConfig(seed=3, trials=40_000))
    assert a.ci_low <= b.ci_high and b.ci_low <= a.ci_high


def test_tiny_threshold_always_covered():
    est = mc.simulate_coverage(NET0.with_(t_bar=1e-9), mc.SimConfig(trials=5_000))
    assert est.estimate == 1.0


def test_coverage_with_noise_matches_exact_integral():
    net = NetworkParams(lam=2e-6)
    est = mc.simulate_coverage(net, mc.SimConfig(seed=4, trials=50_000))
    assert est.contains(geometry.coverage_exact(net).p_c)


def test_deterministic():
    cfg = mc.SimConfig(seed=9, trials=20_000)
    assert mc.simulate_coverage(NET0, cfg) == mc.simulate_coverage(NET0, cfg)
    q = QueueParams(phi=50.0)
    qc = mc.SimConfig(seed=9, trials=20_000)
    assert mc.simulate_queue(q, qc) == mc.simulate_queue(q, qc)


def test_ppp_counts_are_poisson():
    rng = np.random.default_rng(5)
    mean = 1e-4 * math.pi * 300.0**2
    counts = mc.ppp_counts(1e-4, 300.0, 10_000, rng)
    ks = np.arange(counts.min(), counts.max() + 1)
    obs = np.array([(counts == k).sum() for k in ks], dtype=float)
    exp = stats.poisson.pmf(ks, mean) * len(counts)
    # pool sparse tails until every bin expects at least 5
    ob, eb, acc_o, acc_e = [], [], 0.0, 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= 5:
            ob.append(acc_o)
            eb.append(acc_e)
            acc_o = acc_e = 0.0
    ob[-1] += acc_o
    eb[-1] += acc_e
    eb = np.array(eb) * sum(ob) / sum(eb)
    assert stats.chisquare(ob, eb, ddof=1).pvalue > 0.01


def test_hit_rate_against_exact():
    cat = CatalogParams(F=1000, nu=0.5, S=30)
    est = mc.simulate_hit_rate(cat, mc.SimConfig(trials=1_000_000))
    p = hit_prob_exact(cat)
    assert abs(est.estimate - p) <= 3 * math.sqrt(p * (1 - p) / est.n)


def test_hit_rate_edges():
    cfg = mc.SimConfig(trials=10_000)
    assert mc.simulate_hit_rate(CatalogParams(F=100, nu=0.8, S=100), cfg).estimate == 1.0
    assert mc.simulate_hit_rate(CatalogParams(F=100, nu=0.8, S=0), cfg).estimate == 0.0


@pytest.mark.parametrize("cv", [0.5, 1.0, 2.0, 3.0])
def test_sampler_moments(cv):
    x = mc.sample_with_cv(2.0, cv, 400_000, np.random.default_rng(0))
    assert x.mean() == pytest.approx(2.0, rel=0.01)
    assert x.std() / x.mean() == pytest.approx(cv, rel=0.02)


def test_mm2_queue_erlang_c():
    # exact M/M/2 sojourn: tau + C(2, a) tau / (2 - a) with a = phi tau
    tau, phi = 1.0, 1.2
    a = phi * tau
    p0 = 1 / (1 + a + a * a / (2 * (1 - a / 2)))
    c = a * a / (2 * (1 - a / 2)) * p0
    exact = tau + c * tau / (2 - a)
    est = mc.simulate_queue(QueueParams(m=2, tau=tau, phi=phi, c_a=1, c_s=1), mc.SimConfig(trials=400_000))
    assert est.estimate == pytest.approx(exact, rel=0.02)


def test_light_traffic_sojourn_is_service_time():
    q = QueueParams(phi=1e-3)
    est = mc.simulate_queue(q, mc.SimConfig(trials=50_000, warmup=0))
    assert est.estimate == pytest.approx(q.tau, rel=0.02)


def test_queue_rejections():
    with pytest.raises(InfeasibleError):
        mc.simulate_queue(QueueParams(phi=300.0), mc.SimConfig(trials=100))
    with pytest.raises(ParameterError):
        mc.simulate_queue(QueueParams(m=9, phi=1.0), mc.SimConfig(trials=100))


def test_small_window_rejected():
    with pytest.raises(ParameterError):
        mc.simulate_coverage(NET0, mc.SimConfig(trials=100, region_radius=100.0))
