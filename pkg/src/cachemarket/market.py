"""InP pricing: successive GP (SGA) on the leader's one-dimensional problem.

The leader anticipates each MNO's demand through the dual-derived response
lam = T / omega, S = U omega^(-1/(nu-1)) and caches the largest one, so it
minimises

    f(omega) = T pbar / omega - U T omega^(-1/(nu-1))

(cost minus revenue, i.e. minus the profit). In epigraph form the constraint
T pbar / omega <= z + U T omega^(-e) is a posynomial ratio, and each SGA step
replaces the denominator by its AM-GM monomial at the current point.

f has a finite minimiser only for nu > 2, where the optimal profit is
positive and z* < 0. The condensation needs a positive variable, so the
epigraph variable is shifted, z' = z + K with K > -z, and K is carried as a
constant term on the numerator side. The shifted inner GP has zero degrees
of difficulty and is solved in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import InfeasibleError, NumericalError, ParameterError
from .mno_solver import GpConstants, eval_dual_q, solve_dual_r

OFFSET_MARGIN = 1.1  # K >= 1.1 (-z) keeps z' away from zero
OFFSET_FLOOR = 0.1  # K >= 0.1 T pbar / omega keeps the constant term non-negligible
AMGM_TOL = 1e-9
COLLAPSE_RATIO = 1e-3  # z' below this fraction of K means K < -z*
MAX_OFFSET_RAISES = 60


@dataclass(frozen=True)
class InpParams:
    """theta: price of areal power [currency / W]; p_circuit: circuit power [W]."""

    theta: float = 10.0
    p_circuit: float = 1.0
    k_mnos: int = 3
    p: float = 1.0

    def __post_init__(self):
        if not self.theta > 0:
            raise ParameterError(f"theta must be positive, got {self.theta}")
        if self.p_circuit < 0:
            raise ParameterError(f"circuit power must be non-negative, got {self.p_circuit}")
        if int(self.k_mnos) != self.k_mnos or self.k_mnos < 1:
            raise ParameterError(f"number of MNOs must be an integer >= 1, got {self.k_mnos}")
        if not self.p > 0:
            raise ParameterError(f"transmit power must be positive, got {self.p}")
        object.__setattr__(self, "k_mnos", int(self.k_mnos))

    @property
    def pbar(self) -> float:
        """Power cost per BS, theta (K p + p_c)."""
        return self.theta * (self.k_mnos * self.p + self.p_circuit)

    def with_(self, **kw) -> "InpParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class DemandSummary:
    t_const: tuple
    u_const: tuple
    ut_max: float
    argmax_k: int
    nu: float

    @property
    def t_star(self) -> float:
        return self.t_const[self.argmax_k]

    @property
    def u_star(self) -> float:
        return self.u_const[self.argmax_k]

    def demand(self, k: int, omega: float) -> tuple[float, float]:
        return price_response(self.t_const[k], self.u_const[k], self.nu, omega)


def price_response(t: float, u: float, nu: float, omega: float) -> tuple[float, float]:
    """(lam, S) the leader expects from an MNO with constants (T, U) at price omega."""
    return t / omega, u * omega ** (-1.0 / (nu - 1.0))


def demand_constants(consts: GpConstants) -> tuple[float, float]:
    nu = consts.nu
    q1 = eval_dual_q(solve_dual_r(consts), consts, omega=1.0)  # q*/omega
    t = (consts.a_const + consts.r_const) / q1
    u = (consts.v_const * (nu - 1.0) / q1) ** (1.0 / (nu - 1.0))
    return t, u


def summarize_demands(consts_list) -> DemandSummary:
    consts_list = list(consts_list)
    if not consts_list:
        raise ParameterError("need at least one MNO")
    nus = {c.nu for c in consts_list}
    if len(nus) != 1:
        raise ParameterError(f"all MNOs must share one Zipf exponent, got {sorted(nus)}")
    tu = [demand_constants(c) for c in consts_list]
    uts = [t * u for t, u in tu]
    k = max(range(len(uts)), key=lambda i: (uts[i], -i))  # lowest index wins ties
    return DemandSummary(tuple(t for t, _ in tu), tuple(u for _, u in tu), uts[k], k, nus.pop())


def leader_objective(omega: float, d: DemandSummary, inp: InpParams) -> float:
    """Cost minus revenue per unit area, T pbar / omega - U T omega^(-1/(nu-1))."""
    e = 1.0 / (d.nu - 1.0)
    return d.t_star * inp.pbar / omega - d.ut_max * omega ** (-e)


@dataclass(frozen=True)
class SgaState:
    z: float
    omega: float
    offset: float = float("nan")
    alpha_bar: float = float("nan")
    beta_bar: float = float("nan")
    e_coef: float = float("nan")
    iteration: int = 0
    converged: bool = False


def initial_state(d: DemandSummary, inp: InpParams, omega0: float = 1.0) -> SgaState:
    if not omega0 > 0:
        raise ParameterError(f"initial price must be positive, got {omega0}")
    return SgaState(z=leader_objective(omega0, d, inp), omega=omega0)


def _condensed_step(z, w, k, c, ut, nu):
    """Closed-form optimum of the condensed GP with offset k at expansion point (z, w)."""
    e = 1.0 / (nu - 1.0)
    rev = ut * w ** (-e)
    zp = z + k
    q_bar = zp + rev
    a_bar = zp / q_bar
    b_bar = -rev / ((nu - 1.0) * q_bar)
    log_e = math.log(q_bar) - a_bar * math.log(zp) - b_bar * math.log(w)
    if 1.0 + b_bar <= 0:
        raise NumericalError(
            f"condensed GP unbounded at omega = {w:.6g}: 1 + beta_bar = {1 + b_bar:.3g} <= 0",
            history=[(0, z, w)])
    # dual weights of the two numerator terms c/omega and k
    d1 = -b_bar / a_bar
    d2 = (1.0 + b_bar) / a_bar
    mu = 1.0 / a_bar
    log_zp = (d1 * (math.log(c / d1) - log_e) + d2 * (math.log(k / d2) - log_e) + mu * math.log(mu))
    w_new = (c / k) * (1.0 + b_bar) / (-b_bar)
    return log_zp, w_new, a_bar, b_bar, log_e


def sga_step(state: SgaState, d: DemandSummary, inp: InpParams, nu: float | None = None) -> SgaState:
    """One condensation + closed-form GP solve. Returns the new iterate, with the
    condensation parameters of the expansion point that produced it.

    If the offset is too small for the inner problem (the shifted optimum
    would collapse onto z' = 0, i.e. -z* > K), K is raised tenfold and the
    step is repeated at the same expansion point. Every K gives a conservative
    approximation touching at (z, omega), so z never increases.
    """
    nu = d.nu if nu is None else nu
    e = 1.0 / (nu - 1.0)
    z, w = state.z, state.omega
    c = d.t_star * inp.pbar
    k = max(OFFSET_MARGIN * max(-z, 0.0), OFFSET_FLOOR * c / w)
    for _ in range(MAX_OFFSET_RAISES):
        log_zp, w_new, a_bar, b_bar, log_e = _condensed_step(z, w, k, c, d.ut_max, nu)
        if log_zp - math.log(k) > math.log(COLLAPSE_RATIO):
            break
        k *= 10.0
    else:
        raise NumericalError(f"no workable offset found at omega = {w:.6g}", history=[(state.iteration, z, w)])
    zp_new = math.exp(log_zp)
    z_new = zp_new - k
    # monomial must under-estimate the posynomial it replaced
    mono = math.exp(log_e + a_bar * log_zp + b_bar * math.log(w_new))
    post = zp_new + d.ut_max * w_new ** (-e)
    if mono > post * (1 + AMGM_TOL):
        raise NumericalError(f"AM-GM bound violated: monomial {mono:.17g} > posynomial {post:.17g}")
    return SgaState(z_new, w_new, k, a_bar, b_bar, math.exp(log_e), state.iteration + 1, False)


@dataclass(frozen=True)
class MarketOutcome:
    omega_star: float
    z_star: float
    iterations: int
    history: tuple
    revenue: float  # omega lam S of the largest demand
    cost: float  # theta Y(lam) = T pbar / omega
    demands: tuple  # per MNO (lam_k, S_k) at omega*
    argmax_k: int
    meta: dict = field(default_factory=dict)

    @property
    def profit(self) -> float:
        return -self.z_star

    @property
    def cache_intensities(self) -> tuple:
        return tuple(lam * s for lam, s in self.demands)

    @property
    def rent(self) -> float:
        return self.omega_star * max(self.cache_intensities)


def solve_equilibrium(d: DemandSummary, inp: InpParams, nu: float | None = None, tol: float = 1e-9,
                      max_iter: int = 200, omega0: float = 1.0) -> MarketOutcome:
    nu = d.nu if nu is None else nu
    if not nu > 2:
        raise InfeasibleError(
            f"leader problem has no finite optimal price for nu <= 2 (got nu = {nu}): "
            "profit grows without bound as omega -> 0 or omega -> inf")
    state = initial_state(d, inp, omega0)
    hist = [(0, state.z, state.omega)]
    for _ in range(max_iter):
        new = sga_step(state, d, inp, nu)
        hist.append((new.iteration, new.z, new.omega))
        change = max(abs(new.z - state.z) / max(abs(state.z), 1e-300),
                     abs(new.omega - state.omega) / state.omega)
        state = new
        if change < tol:
            state = replace(state, converged=True)
            break
    if not state.converged:
        raise NumericalError(f"SGA did not converge in {max_iter} iterations", history=hist)
    w = state.omega
    e = 1.0 / (nu - 1.0)
    demands = tuple(d.demand(k, w) for k in range(len(d.t_const)))
    revenue = d.ut_max * w ** (-e)
    cost = d.t_star * inp.pbar / w
    lam_m, s_m = demands[d.argmax_k]
    meta = {
        "q0_profit": w * lam_m * s_m - inp.theta * lam_m * (inp.k_mnos * inp.p + inp.p_circuit),
        "objective_gap": abs(state.z - (cost - revenue)),
        "constraint_ratio": cost / (state.z + revenue) if state.z + revenue > 0 else float("inf"),
        "offset": state.offset,
    }
    return MarketOutcome(w, state.z, state.iteration, tuple(hist), revenue, cost, demands,
                         d.argmax_k, meta)


def closed_form_optimum(d: DemandSummary, inp: InpParams) -> tuple[float, float]:
    """Stationary point of f for nu > 2: omega* = (pbar (nu-1) / U)^((nu-1)/(nu-2))."""
    nu = d.nu
    if not nu > 2:
        raise InfeasibleError("closed-form optimum exists only for nu > 2")
    w = (inp.pbar * (nu - 1.0) / d.u_star) ** ((nu - 1.0) / (nu - 2.0))
    return w, leader_objective(w, d, inp)
