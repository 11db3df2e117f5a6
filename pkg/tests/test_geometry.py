import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from cachemarket import geometry as g
from cachemarket.errors import ParameterError

BASE = g.NetworkParams()


def beta_mpmath(t_bar, alpha):
    # original form: (2 T^d / alpha) E_g[g^d (Gamma(-d, T g) - Gamma(-d))], d = 2/alpha
    d = mp.mpf(2) / alpha
    f = lambda x: mp.exp(-x) * x**d * (mp.gammainc(-d, t_bar * x) - mp.gamma(-d))
    return float(2 * mp.mpf(t_bar) ** d / alpha * mp.quad(f, [0, 1, 10, mp.inf]))


@pytest.mark.parametrize("t_bar,alpha", [(10.0, 5.0), (1.0, 3.0), (100.0, 4.0), (0.1, 6.0)])
def test_beta_matches_mpmath_gamma_form(t_bar, alpha):
    got = g.compute_beta(BASE.with_(t_bar=t_bar, alpha=alpha))
    assert got == pytest.approx(beta_mpmath(t_bar, alpha), rel=1e-8)


def test_beta_tail_integral_identity():
    # beta - 1 = T^d * int_{T^-d}^inf du / (1 + u^(alpha/2))
    t, a = 10.0, 5.0
    d = 2 / a
    rho = float(t**d * mp.quad(lambda u: 1 / (1 + u ** (a / 2)), [t**-d, mp.inf]))
    assert g.compute_beta(BASE) == pytest.approx(1 + rho, rel=1e-9)


def test_beta_small_threshold_tends_to_one():
    # all interference terms vanish; the constant part of the bracket leaves 1
    assert g.compute_beta(BASE.with_(t_bar=1e-8)) == pytest.approx(1.0, abs=1e-3)


def test_beta_independent_of_power():
    assert g.compute_beta(BASE.with_(p=7.0)) == pytest.approx(g.compute_beta(BASE), rel=1e-6)


def test_exact_noise_free_single_channel_is_inverse_beta():
    net = BASE.with_(sigma2=0.0, subchannels=1)
    res = g.coverage_exact(net)
    assert res.p_c == pytest.approx(1 / res.beta, abs=1e-8)


@pytest.mark.parametrize("L", [1, 2, 6, 12])
def test_exact_noise_free_matches_interference_limited(L):
    net = BASE.with_(sigma2=0.0, subchannels=L)
    assert g.coverage_exact(net).p_c == pytest.approx(g.interference_limited(net).p_c, abs=1e-8)


def test_dense_network_approaches_interference_limited():
    net = BASE.with_(lam=1e2)
    assert abs(g.coverage_exact(net).p_c - g.interference_limited(net).p_c) < 1e-4


def test_closed_form_noise_free_reduction():
    net = BASE.with_(sigma2=0.0)
    b = g.compute_beta(net)
    assert g.coverage_closed_form(net, b).p_c == pytest.approx(6 / (b + 5), rel=1e-15)


def test_closed_form_many_subchannels():
    assert g.coverage_closed_form(BASE.with_(sigma2=0.0, subchannels=10**6)).p_c > 1 - 1e-5


def test_baseline_closed_form_gap():
    exact = g.coverage_exact(BASE).p_c
    closed = g.coverage_closed_form(BASE).p_c
    assert abs(closed - exact) / exact < 0.01
    assert exact == pytest.approx(0.71891, abs=1e-4)


def _gap(alpha, t_bar, L, lam):
    net = BASE.with_(alpha=alpha, t_bar=t_bar, subchannels=L, lam=lam)
    b = g.compute_beta(net)
    exact = g.coverage_exact(net, b).p_c
    return abs(g.coverage_closed_form(net, b).p_c - exact) / exact


@given(alpha=st.floats(3, 6), t_bar=st.floats(1, 100), L=st.integers(1, 12),
       lam=st.floats(1e-4, 1e-2))
def test_closed_form_tracks_exact_when_dense(alpha, t_bar, L, lam):
    assert _gap(alpha, t_bar, L, lam) <= 0.05


def test_closed_form_worst_case_sparse():
    # below ~1e-5 BS/m^2 the noise term dominates and the approximation drifts;
    # measured worst case over the full sweep is ~19%
    rng = np.random.default_rng(1)
    worst = max(_gap(rng.uniform(3, 6), rng.uniform(1, 100), int(rng.integers(1, 13)),
                     10 ** rng.uniform(-6, -2)) for _ in range(400))
    assert 0.05 < worst < 0.2


@given(L=st.integers(1, 11), t_bar=st.floats(0.5, 50))
def test_closed_form_monotone(L, t_bar):
    net = BASE.with_(t_bar=t_bar, subchannels=L)
    pc = g.coverage_closed_form(net).p_c
    assert g.coverage_closed_form(net.with_(subchannels=L + 1)).p_c >= pc
    assert g.coverage_closed_form(net.with_(p=2.0)).p_c >= pc
    assert g.coverage_closed_form(net.with_(t_bar=t_bar * 1.5)).p_c <= pc
    assert g.coverage_closed_form(net.with_(sigma2=1e-12)).p_c <= pc


def test_throughput_values():
    assert g.throughput(BASE, 0.0) == 0.0
    G = g.throughput(BASE, 0.5)
    assert G == pytest.approx(0.5 * 1e9 / 6 * math.log2(11), rel=1e-15)
    assert G == pytest.approx(2.883e8, rel=1e-3)
    assert g.throughput(BASE.with_(bandwidth=2e9), 0.5) == 2 * G


@pytest.mark.parametrize("kw", [{"alpha": 2.0}, {"lam": 0.0}, {"subchannels": 0}, {"eta": 1.0},
                                {"t_bar": 0.0}, {"bandwidth": -1.0}, {"subchannels": 1.5}])
def test_invalid_network_params(kw):
    with pytest.raises(ParameterError):
        BASE.with_(**kw)


def test_derived_intensities():
    assert BASE.lambda_a == BASE.lam
    assert BASE.lambda_i == BASE.lam / 6


def test_unknown_method():
    with pytest.raises(ParameterError):
        g.coverage(BASE, "nope")
