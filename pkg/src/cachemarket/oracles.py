"""Brute-force deterministic oracles for the optimisation layers.

None of these use the dual machinery they check: they only evaluate the
primal objective and constraints on grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market import DemandSummary, InpParams, leader_objective
from .mno_solver import GpConstants, log_dual_q


@dataclass(frozen=True)
class GridResult:
    value: float
    x: float
    y: float = float("nan")


def _feasible_min(consts, omega, lam, s):
    ll, ss = np.meshgrid(lam, s, indexing="ij")
    lhs = consts.a_const / ll + consts.v_const * ss ** (1.0 - consts.nu)
    ok = (lhs <= 1.0) & (consts.r_const / ll <= 1.0)
    obj = np.where(ok, omega * ll * ss, np.inf)
    i, j = np.unravel_index(np.argmin(obj), obj.shape)
    return obj[i, j], i, j


def grid_search_gp(consts: GpConstants, omega: float = 1.0, n: int = 400, zooms: int = 1) -> GridResult:
    """Minimum of omega lam S over feasible points of an n x n log grid.

    The first grid covers every candidate optimum: lam in [max(A,R), 1e3 max(A,R)]
    and V S^(1-nu) in (1e-3, 1). Each zoom re-grids +-2 cells around the best point.
    """
    nu = consts.nu
    lam_lo = max(consts.a_const, consts.r_const)
    lam = np.geomspace(lam_lo, 1e3 * lam_lo, n)
    s = np.geomspace(consts.v_const ** (1 / (nu - 1)), (1e3 * consts.v_const) ** (1 / (nu - 1)), n)
    best, i, j = _feasible_min(consts, omega, lam, s)
    for _ in range(zooms):
        if not np.isfinite(best):
            break
        li, hi_ = max(i - 2, 0), min(i + 2, n - 1)
        lj, hj = max(j - 2, 0), min(j + 2, n - 1)
        lam = np.geomspace(lam[li], lam[hi_], n)
        s = np.geomspace(s[lj], s[hj], n)
        cand, i, j = _feasible_min(consts, omega, lam, s)
        best = min(best, cand)
    return GridResult(float(best), float(lam[i]), float(s[j]))


def grid_search_dual_r(consts: GpConstants, step: float = 1e-4) -> GridResult:
    r = np.linspace(0.0, 1.0, int(round(1 / step)) + 1)
    vals = np.array([log_dual_q(float(x), consts) for x in r])
    k = int(np.argmax(vals))
    return GridResult(float(vals[k]), float(r[k]))


def grid_search_q1(d: DemandSummary, inp: InpParams, lo: float = 1e-6, hi: float = 1e6,
                   step_log10: float = 1e-3) -> GridResult:
    """Global minimum of the leader objective over a log-spaced price grid."""
    k = int(round((np.log10(hi) - np.log10(lo)) / step_log10)) + 1
    w = np.logspace(np.log10(lo), np.log10(hi), k)
    f = leader_objective(w, d, inp)
    i = int(np.argmin(f))
    return GridResult(float(f[i]), float(w[i]))
