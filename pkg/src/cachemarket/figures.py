"""Plot-ready tables for the evaluation figures (ids 3-12). Data only, no rendering."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import caching, pipeline, scenario
from .errors import ParameterError

FOLLOWER_NU = tuple(float(x) for x in np.round(np.arange(1.1, 10.0 + 1e-9, 0.1), 10))
MARKET_NU = tuple(float(x) for x in np.round(np.arange(2.2, 10.0 + 1e-9, 0.2), 10))
FOLLOWER_W = (1e9, 9e8, 6e8, 3e8)
COST_GRID = ((10.0, 1.0), (20.0, 1.0), (10.0, 2.0), (20.0, 2.0))  # (theta, p_c)


@dataclass(frozen=True)
class FigureOptions:
    omega: float = 10.0  # follower price for figures 5-6
    nu: float = 3.0  # Zipf exponent for the convergence trace
    theta: float = 10.0
    p_circuit: float = 1.0


def fig3(opts):
    rows = []
    for nu in (0.5, 1.5, 2.5):
        cat = caching.CatalogParams(F=1000, nu=nu)
        for s in range(1, 1001):
            c = cat.with_(S=s)
            rows.append((nu, s, caching.hit_prob_exact(c), caching.hit_prob_asymptotic(c)))
    return ("nu", "S", "p_hit_exact", "p_hit_asymptotic"), rows


def fig4(opts):
    _, rows = fig3(opts)
    return ("nu", "S", "rel_error"), [(nu, s, abs(a - e) / e) for nu, s, e, a in rows]


def _follower_rows(opts):
    base = scenario.baseline()
    for w in FOLLOWER_W:
        for nu in FOLLOWER_NU:
            sc = replace(base, catalog=base.catalog.with_(nu=nu), mnos=({"label": "mno", "bandwidth": w},))
            rep = pipeline.run_followers(sc, omega=opts.omega, strict=False)
            yield w, nu, rep.responses[0], sc.network.xi


def fig5(opts):
    rows = [(w, nu, s.lambda_star, s.r_star) for w, nu, s, _ in _follower_rows(opts)]
    return ("W", "nu", "lambda_star", "r_star"), rows


def fig6(opts):
    rows = [(w, nu, s.s_star, xi / s.lambda_star, int(s.diagnostics["s_exceeds_F"]))
            for w, nu, s, xi in _follower_rows(opts)]
    return ("W", "nu", "s_star", "ue_per_bs", "s_exceeds_F"), rows


def _market(nu, theta, p_c):
    sc = scenario.three_mno(nu=nu)
    sc = replace(sc, inp=sc.inp.with_(theta=theta, p_circuit=p_c))
    return pipeline.run_solve(sc)


def fig7(opts):
    rows = []
    for theta, p_c in COST_GRID:
        rep = _market(opts.nu, theta, p_c)
        rows += [(theta, p_c, it, w, z) for it, z, w in rep.market.history]
    return ("theta", "p_c", "iteration", "omega", "z"), rows


def _market_sweep(opts):
    for nu in MARKET_NU:
        yield nu, _market(nu, opts.theta, opts.p_circuit)


def fig8(opts):
    return ("nu", "omega_star", "z_star"), [(nu, r.market.omega_star, r.market.z_star)
                                            for nu, r in _market_sweep(opts)]


def _per_mno(opts, idx):
    rows = []
    for nu, r in _market_sweep(opts):
        rows.append((nu, *(d[idx] for d in r.market.demands)))
    return rows


def fig9(opts):
    return ("nu", "lambda_1", "lambda_2", "lambda_3"), _per_mno(opts, 0)


def fig10(opts):
    return ("nu", "s_1", "s_2", "s_3"), _per_mno(opts, 1)


def fig11(opts):
    rows = [(nu, r.allocation.total, *r.allocation.psi) for nu, r in _market_sweep(opts)]
    return ("nu", "rent", "psi_1", "psi_2", "psi_3"), rows


def fig12(opts):
    rows = []
    for theta, p_c in COST_GRID:
        for nu in MARKET_NU:
            rows.append((theta, p_c, nu, _market(nu, theta, p_c).market.profit))
    return ("theta", "p_c", "nu", "profit"), rows


FIGURES = {3: fig3, 4: fig4, 5: fig5, 6: fig6, 7: fig7, 8: fig8, 9: fig9, 10: fig10, 11: fig11, 12: fig12}


def reproduce(fig_id: int, opts: FigureOptions | None = None):
    try:
        fn = FIGURES[int(fig_id)]
    except (KeyError, ValueError):
        raise ParameterError(f"unknown figure id {fig_id!r}; choose from {sorted(FIGURES)}") from None
    return fn(opts or FigureOptions())
