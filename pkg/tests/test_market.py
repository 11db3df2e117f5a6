import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cachemarket import market as mk, oracles
from cachemarket import mno_solver as ms
from cachemarket.caching import CatalogParams
from cachemarket.delay import DelayBudget, QueueParams
from cachemarket.errors import InfeasibleError, NumericalError, ParameterError
from cachemarket.geometry import NetworkParams

NET = NetworkParams()
W3 = (3e8, 5e8, 1e9)
INP = mk.InpParams(theta=10.0, p_circuit=1.0, k_mnos=3, p=1.0)


def fixture_consts(nu=3.0, widths=W3):
    cat = CatalogParams(nu=nu)
    return [ms.build_constants(NET.with_(bandwidth=w), cat, QueueParams(), DelayBudget()) for w in widths]


@pytest.fixture(scope="module")
def demands():
    return mk.summarize_demands(fixture_consts())


def synthetic(t, u, nu):
    return mk.DemandSummary((t,), (u,), t * u, 0, nu)


def test_pbar():
    assert INP.pbar == 10.0 * (3 * 1.0 + 1.0)


def test_single_mno_summary():
    d = mk.summarize_demands(fixture_consts(widths=(5e8,)))
    assert d.argmax_k == 0 and d.ut_max == d.t_const[0] * d.u_const[0]


def test_widest_band_has_largest_demand(demands):
    assert demands.argmax_k == 2
    assert demands.u_const[0] < demands.u_const[1] < demands.u_const[2]


def test_demand_constants_price_free():
    # T, U from q*(omega)/omega must not depend on the omega used
    for c in fixture_consts():
        q1 = ms.best_response(c, omega=1.0).q_star
        q17 = ms.best_response(c, omega=17.0).q_star / 17.0
        t1, t17 = (c.a_const + c.r_const) / q1, (c.a_const + c.r_const) / q17
        assert t17 == pytest.approx(t1, rel=1e-10)


def test_tie_break_lowest_index():
    c = fixture_consts(widths=(5e8, 5e8))
    assert mk.summarize_demands(c).argmax_k == 0


def test_empty_and_mixed_nu_rejected():
    with pytest.raises(ParameterError):
        mk.summarize_demands([])
    with pytest.raises(ParameterError):
        mk.summarize_demands(fixture_consts(nu=3.0)[:1] + fixture_consts(nu=2.5)[:1])


def test_converges_to_stationary_point(demands):
    out = mk.solve_equilibrium(demands, INP)
    w, f = mk.closed_form_optimum(demands, INP)
    assert out.omega_star == pytest.approx(w, rel=1e-7)
    assert out.z_star == pytest.approx(f, rel=1e-9)
    assert out.iterations <= 20
    assert out.meta["objective_gap"] < 1e-6 * abs(out.z_star)
    assert out.meta["constraint_ratio"] == pytest.approx(1.0, abs=1e-6)
    assert out.meta["q0_profit"] == pytest.approx(-out.z_star, rel=1e-9)


def test_z_non_increasing(demands):
    zs = [z for _, z, _ in mk.solve_equilibrium(demands, INP).history]
    assert all(b <= a + 1e-12 * abs(a) for a, b in zip(zs, zs[1:]))


def test_matches_price_grid(demands):
    out = mk.solve_equilibrium(demands, INP)
    g = oracles.grid_search_q1(demands, INP)
    assert abs(out.z_star - g.value) <= 0.005 * abs(g.value)
    assert out.z_star <= g.value + 1e-15


@pytest.mark.parametrize("omega0", [0.1, 1.0, 100.0])
def test_initialisation_robust(demands, omega0):
    ref = mk.solve_equilibrium(demands, INP)
    out = mk.solve_equilibrium(demands, INP, omega0=omega0)
    assert out.omega_star == pytest.approx(ref.omega_star, rel=1e-6)
    assert out.z_star == pytest.approx(ref.z_star, rel=1e-6)


def test_fixed_point(demands):
    out = mk.solve_equilibrium(demands, INP)
    st0 = mk.SgaState(out.z_star, out.omega_star)
    nxt = mk.sga_step(st0, demands, INP)
    assert nxt.omega == pytest.approx(out.omega_star, rel=1e-9)
    assert nxt.z == pytest.approx(out.z_star, rel=1e-9)


def test_monomial_touches_at_expansion_point(demands):
    st0 = mk.initial_state(demands, INP, 3.0)
    nxt = mk.sga_step(st0, demands, INP)
    zp = st0.z + nxt.offset
    e = 1 / (demands.nu - 1)
    post = zp + demands.ut_max * st0.omega ** (-e)
    mono = nxt.e_coef * zp**nxt.alpha_bar * st0.omega**nxt.beta_bar
    assert mono == pytest.approx(post, rel=1e-12)
    assert 0 < nxt.alpha_bar <= 1 and nxt.beta_bar < 0


@given(w=st.floats(0.05, 500.0))
def test_every_iterate_feasible(demands, w):
    st0 = mk.initial_state(demands, INP, w)
    nxt = mk.sga_step(st0, demands, INP)
    e = 1 / (demands.nu - 1)
    lhs = demands.t_star * INP.pbar / nxt.omega
    assert lhs <= (nxt.z + demands.ut_max * nxt.omega ** (-e)) * (1 + 1e-9)


def test_power_price_raises_objective(demands):
    z1 = mk.solve_equilibrium(demands, INP).z_star
    z2 = mk.solve_equilibrium(demands, INP.with_(theta=20.0)).z_star
    assert z2 > z1


def test_power_price_moves_optimal_price(demands):
    # omega* ~ pbar^((nu-1)/(nu-2)); at nu = 3 doubling theta quadruples it
    w1 = mk.solve_equilibrium(demands, INP).omega_star
    w2 = mk.solve_equilibrium(demands, INP.with_(theta=20.0)).omega_star
    assert w2 / w1 == pytest.approx(4.0, rel=1e-6)


@given(nu=st.floats(2.1, 10.0), t=st.floats(0.01, 1.0), u=st.floats(0.5, 50.0), pbar=st.floats(1, 100))
def test_random_markets_match_closed_form(nu, t, u, pbar):
    d = synthetic(t, u, nu)
    inp = mk.InpParams(theta=pbar, p_circuit=0.0, k_mnos=1, p=1.0)
    w, f = mk.closed_form_optimum(d, inp)
    if not 1e-30 < w < 1e30:
        return
    out = mk.solve_equilibrium(d, inp, max_iter=400)
    assert out.z_star == pytest.approx(f, rel=1e-6)


def test_no_equilibrium_at_nu_two():
    d = mk.summarize_demands(fixture_consts(nu=2.0))
    with pytest.raises(InfeasibleError):
        mk.solve_equilibrium(d, INP)


def test_non_convergence_carries_history(demands):
    with pytest.raises(NumericalError) as ei:
        mk.solve_equilibrium(demands, INP, max_iter=2)
    assert len(ei.value.history) == 3


def test_price_response_matches_leader_model(demands):
    lam, s = demands.demand(2, 5.0)
    assert lam == demands.t_const[2] / 5.0
    assert lam * s * 5.0 == pytest.approx(demands.ut_max * 5.0 ** (-0.5), rel=1e-14)
