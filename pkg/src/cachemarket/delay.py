"""Fronthaul, backhaul (G/G/m) and total expected delay, plus the feasibility report."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InfeasibleError, ParameterError
from .geometry import NetworkParams


@dataclass(frozen=True)
class QueueParams:
    """Cloud-server queue: m servers, mean service time tau [s], arrival rate phi [1/s],
    coefficients of variation c_a (inter-arrival) and c_s (service)."""

    m: int = 1
    tau: float = 5e-3
    phi: float = 0.8
    c_a: float = 2.0
    c_s: float = 1.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ParameterError(f"server count must be an integer >= 1, got {self.m}")
        if not (self.tau > 0 and self.c_a > 0 and self.c_s > 0):
            raise ParameterError("tau, c_a and c_s must be positive")
        if self.phi < 0:
            raise ParameterError(f"arrival rate must be non-negative, got {self.phi}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def rho(self) -> float:
        """Per-server utilisation phi * tau / m."""
        return self.phi * self.tau / self.m


@dataclass(frozen=True)
class DelayBudget:
    d_th: float = 1e-3
    gamma: float = 0.1

    def __post_init__(self):
        if not self.d_th > 0:
            raise ParameterError(f"delay threshold must be positive, got {self.d_th}")
        if not 0 < self.gamma < 1:
            raise ParameterError(f"violation probability must lie in (0, 1), got {self.gamma}")

    @property
    def bound(self) -> float:
        """gamma * D_th, the Markov-inequality bound on the expected delay."""
        return self.gamma * self.d_th


def fronthaul_delay(params: NetworkParams, g: float, x_f: float) -> float:
    """E[D_fh] = eta xi x_f / (lam G)."""
    if not g > 0:
        raise InfeasibleError(f"throughput must be positive for a finite fronthaul delay, got {g}")
    return params.eta * params.xi * x_f / (params.lam * g)


def mmm_wait(q: QueueParams) -> float:
    """Approximate M/M/m mean waiting time tau rho^(sqrt(2(m+1)) - 1) / (m (1 - rho))."""
    rho = q.rho
    if rho >= 1:
        raise InfeasibleError(f"backhaul queue unstable: rho = {rho:.6g} >= 1")
    if rho == 0:
        return 0.0
    return q.tau * rho ** (math.sqrt(2 * (q.m + 1)) - 1) / (q.m * (1 - rho))


def backhaul_delay(q: QueueParams) -> float:
    """Expected G/G/m sojourn: (c_a^2 + c_s^2)/2 * W(M/M/m) + tau."""
    return 0.5 * (q.c_a**2 + q.c_s**2) * mmm_wait(q) + q.tau


def total_delay(d_fh: float, d_bh: float, p_hit: float) -> float:
    if not 0.0 <= p_hit <= 1.0:
        raise ParameterError(f"hit probability must lie in [0, 1], got {p_hit}")
    return d_fh + d_bh * (1.0 - p_hit)


@dataclass(frozen=True)
class FeasibilityReport:
    d_fh: float
    bound: float  # gamma * D_th
    feasible: bool  # E[D_fh] <= gamma D_th
    degenerate: bool  # equality: the whole catalogue must be cached (S = F)
    strict: bool  # E[D_fh] < gamma D_th, required before the GP solve
    max_ue_per_bs: float | None = None  # gamma D_th G / (eta x_f)
    lambda_min: float | None = None  # eta xi x_f / (gamma D_th G)

    def message(self) -> str:
        if self.strict:
            return f"feasible: E[D_fh] = {self.d_fh:.6g} s < gamma*D_th = {self.bound:.6g} s"
        extra = ""
        if self.lambda_min is not None:
            extra = f"; BS intensity must be at least {self.lambda_min:.6g} /m^2"
        if self.degenerate:
            return f"degenerate: E[D_fh] equals gamma*D_th = {self.bound:.6g} s, requires S = F" + extra
        return (f"infeasible: E[D_fh] = {self.d_fh:.6g} s exceeds gamma*D_th = {self.bound:.6g} s "
                f"for every cache size" + extra)


def feasibility_check(d_fh: float, budget: DelayBudget, *, net: NetworkParams | None = None,
                      throughput: float | None = None, x_f: float | None = None,
                      rtol: float = 1e-12) -> FeasibilityReport:
    """Whether some S <= F meets the delay budget, i.e. E[D_fh] <= gamma D_th.

    With ``net``, ``throughput`` and ``x_f`` it also reports the admissible
    UE-per-BS ratio and the matching lower bound on the BS intensity.
    """
    bound = budget.bound
    degenerate = math.isclose(d_fh, bound, rel_tol=rtol, abs_tol=0.0)
    feasible = d_fh <= bound or degenerate
    max_ratio = lam_min = None
    if throughput is not None and x_f is not None and net is not None:
        max_ratio = bound * throughput / (net.eta * x_f)
        lam_min = net.eta * net.xi * x_f / (bound * throughput)
    return FeasibilityReport(d_fh, bound, feasible, degenerate, feasible and not degenerate,
                             max_ratio, lam_min)
