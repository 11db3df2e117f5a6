"""MNO best response: minimum-cost (lambda, S) under the expected-delay budget.

The Markov surrogate E[D] <= gamma D_th, with the asymptotic hit probability
and S + 1 ~ S, gives the geometric program

    min  omega lam S
    s.t. A / lam + V S^(1-nu) <= 1
         R / lam <= 1

It has one degree of difficulty. Normality and orthogonality leave a single
free dual variable r = delta_2 in [0, 1], so the dual is a 1-D concave
maximisation with a closed-form optimum. The primal is recovered from the dual
optimum through the standard GP relations: objective term = delta_1 q*, and
each constraint term = delta_i / (sum of that constraint's deltas).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.special import xlogy

from . import caching, delay, geometry
from .caching import CatalogParams
from .delay import DelayBudget, QueueParams
from .errors import InfeasibleError, ParameterError
from .geometry import NetworkParams

FEAS_TOL = 1e-9


@dataclass(frozen=True)
class GpConstants:
    """Delay model E[D] = c1 + c2/lam + c3 S^(1-nu) and the normalised GP coefficients."""

    c1: float
    c2: float
    c3: float
    a_const: float
    v_const: float
    r_const: float
    nu: float
    F: int
    d_bh: float = float("nan")
    throughput: float = float("nan")


@dataclass(frozen=True)
class GpSolution:
    r_star: float
    q_star: float
    lambda_star: float
    s_star: float
    omega: float
    dual_vars: tuple = (float("nan"),) * 4
    diagnostics: dict = field(default_factory=dict)

    @property
    def s_int(self) -> int:
        """Whole files to cache; at least one, as the hit-probability asymptotics assume."""
        return _round_cache(self.s_star)

    @property
    def cache_intensity(self) -> float:
        """lam* S*, cached files per unit area."""
        return self.lambda_star * self.s_star


def build_constants(net: NetworkParams, cat: CatalogParams, q: QueueParams, budget: DelayBudget,
                    *, coverage_method: str = "closed_form", d_bh: float | None = None,
                    throughput: float | None = None) -> GpConstants:
    """Collect the GP coefficients for one MNO.

    ``d_bh`` and ``throughput`` override the values computed from the queue
    and the coverage model.
    """
    nu = cat.nu
    if nu < 1:
        raise ParameterError(
            f"the GP route needs nu > 1 (got {nu}); use fixed_lambda_response for 0 < nu < 1")
    if throughput is None:
        throughput = geometry.throughput(net, geometry.coverage(net, coverage_method).p_c)
    if d_bh is None:
        d_bh = delay.backhaul_delay(q)
    h_f = caching.harmonic_exact(cat.F, nu)
    zeta = caching.zeta_riemann(nu)
    c1 = d_bh * (1.0 - zeta / h_f)
    c2 = net.eta * net.xi * cat.x_f / throughput
    c3 = d_bh / ((nu - 1.0) * h_f)
    slack = budget.bound - c1
    if slack <= 0:
        raise InfeasibleError(
            f"delay budget gamma*D_th = {budget.bound:.6g} s does not exceed C1 = {c1:.6g} s")
    a, v, r = c2 / slack, c3 / slack, c2 / budget.bound
    if not (a > 0 and v > 0 and r > 0):
        raise InfeasibleError(f"GP needs A, V, R > 0 (got A={a:.6g}, V={v:.6g}, R={r:.6g})")
    return GpConstants(c1, c2, c3, a, v, r, nu, cat.F, d_bh, throughput)


def _nu(consts, nu):
    nu = consts.nu if nu is None else nu
    if not nu > 1:
        raise ParameterError(f"GP solution requires nu > 1, got {nu}")
    return nu


def solve_dual_r(consts: GpConstants, nu: float | None = None) -> float:
    """Maximiser of the one-variable dual on [0, 1].

    d log q / dr = log(A (r + 1/(nu-1)) / (r R)) is strictly decreasing. For
    R <= A it stays positive on (0, 1], so q peaks at r = 1. Otherwise the
    stationary point 1 / ((nu-1)(R/A - 1)) is positive and is clipped at 1.
    """
    nu = _nu(consts, nu)
    ratio = consts.r_const / consts.a_const
    if ratio <= 1.0:
        return 1.0
    return max(0.0, min(1.0, 1.0 / ((nu - 1.0) * (ratio - 1.0))))


def log_dual_q(r: float, consts: GpConstants, nu: float | None = None, omega: float = 1.0) -> float:
    nu = _nu(consts, nu)
    if not 0.0 <= r <= 1.0:
        raise ParameterError(f"dual variable r must lie in [0, 1], got {r}")
    e = 1.0 / (nu - 1.0)
    a, v, big_r = consts.a_const, consts.v_const, consts.r_const
    base = math.log(omega) + e * math.log((nu - 1.0) * v)
    if r == 1.0:
        return base + math.log(a) + (nu / (nu - 1.0)) * math.log(nu / (nu - 1.0))
    if r == 0.0:
        return base + math.log(big_r) + e * math.log(e)
    # (R/(1-r))^(1-r) (1-r)^(1-r) collapses to R^(1-r)
    return (base + r * math.log(a) - float(xlogy(r, r)) + (1.0 - r) * math.log(big_r)
            + float(xlogy(r + e, r + e)))


def eval_dual_q(r: float, consts: GpConstants, nu: float | None = None, omega: float = 1.0) -> float:
    return math.exp(log_dual_q(r, consts, nu, omega))


def best_response(consts: GpConstants, nu: float | None = None, omega: float = 1.0) -> GpSolution:
    if not omega > 0:
        raise ParameterError(f"price must be positive, got {omega}")
    nu = _nu(consts, nu)
    e = 1.0 / (nu - 1.0)
    r = solve_dual_r(consts, nu)
    q = eval_dual_q(r, consts, nu, omega)
    a, v, big_r = consts.a_const, consts.v_const, consts.r_const
    if r > 0:
        mu1 = r + e  # sum of deltas in the delay constraint
        lam = a * mu1 / r
        s = (v * (nu - 1.0) * mu1) ** e
    else:  # pragma: no cover - r* > 0 whenever A > 0
        lam = big_r
        s = (v / (1.0 - a / big_r)) ** e
    deltas = (1.0, r, e, 1.0 - r)
    return GpSolution(r, q, lam, s, omega, deltas, _diagnostics(consts, nu, lam, s))


def _round_cache(s: float) -> int:
    return max(1, int(math.ceil(s - 1e-9)))


def _diagnostics(consts, nu, lam, s):
    a, v, big_r = consts.a_const, consts.v_const, consts.r_const
    delay_lhs = a / lam + v * s ** (1.0 - nu)
    s_int = _round_cache(s)
    return {
        "method": "gp",
        "delay_constraint": delay_lhs,
        "fronthaul_constraint": big_r / lam,
        "primal_feasible": delay_lhs <= 1 + FEAS_TOL and big_r / lam <= 1 + FEAS_TOL,
        "rounded_feasible": a / lam + v * s_int ** (1.0 - nu) <= 1 + FEAS_TOL,
        "s_exceeds_F": s > consts.F,
        "s_below_one": s < 1.0,
    }


def fixed_lambda_response(net: NetworkParams, cat: CatalogParams, q: QueueParams,
                          budget: DelayBudget, omega: float = 1.0, slack: float = 1.05,
                          *, coverage_method: str = "closed_form") -> GpSolution:
    """Route for 0 < nu < 1: hold lam at slack x its feasibility bound and size the cache
    from the fixed-fraction law s ~ P_hit^(1/(1-nu))."""
    if not 0 < cat.nu < 1:
        raise ParameterError(f"fixed-lambda route needs 0 < nu < 1, got {cat.nu}")
    if slack <= 1:
        raise ParameterError("slack must exceed 1 to stay off the S = F boundary")
    g = geometry.throughput(net, geometry.coverage(net, coverage_method).p_c)
    d_bh = delay.backhaul_delay(q)
    lam_min = net.eta * net.xi * cat.x_f / (budget.bound * g)
    lam = slack * lam_min
    d_fh = delay.fronthaul_delay(net.with_(lam=lam), g, cat.x_f)
    p_req = 1.0 - (budget.bound - d_fh) / d_bh
    if p_req <= 0:
        s = 0.0
    else:
        frac = caching.fraction_for_hit_prob(p_req, cat.nu)
        s = min(float(cat.F), max(0.0, frac * (cat.F + 1) - 1.0))
    s_int = min(cat.F, math.ceil(s - 1e-9))
    achieved = delay.total_delay(d_fh, d_bh, caching.hit_prob_exact(cat.with_(S=s_int)))
    diag = {
        "method": "fixed_lambda",
        "required_hit_prob": p_req,
        "lambda_min": lam_min,
        "expected_delay_exact_hit": achieved,
        "meets_budget_exact_hit": achieved <= budget.bound * (1 + FEAS_TOL),
        "s_exceeds_F": s >= cat.F,
    }
    return GpSolution(float("nan"), omega * lam * s, lam, s, omega, diagnostics=diag)


def solve_mno(net: NetworkParams, cat: CatalogParams, q: QueueParams, budget: DelayBudget,
              omega: float = 1.0, *, coverage_method: str = "closed_form",
              slack: float = 1.05) -> GpSolution:
    """Dispatch on the Zipf exponent: GP for nu > 1, fixed-lambda route for nu < 1."""
    if cat.nu < 1:
        return fixed_lambda_response(net, cat, q, budget, omega, slack, coverage_method=coverage_method)
    consts = build_constants(net, cat, q, budget, coverage_method=coverage_method)
    return best_response(consts, omega=omega)


def dual_feasibility_residual(sol: GpSolution, consts: GpConstants) -> float:
    """Largest mismatch between the deltas implied by the primal point and sol.dual_vars."""
    nu = consts.nu
    d1, d2, d3, d4 = sol.dual_vars
    mu1 = d2 + d3
    t_a = consts.a_const / sol.lambda_star
    t_v = consts.v_const * sol.s_star ** (1.0 - nu)
    res = [
        abs(sol.omega * sol.lambda_star * sol.s_star / (d1 * sol.q_star) - 1.0),
        abs(t_a - d2 / mu1),
        abs(t_v - d3 / mu1),
        abs(d1 - d2 - d4),
        abs(d1 + (1 - nu) * d3),
    ]
    if d4 > 0:
        res.append(abs(consts.r_const / sol.lambda_star - 1.0))
    return max(res)

