"""Backward induction on one scenario: follower GPs, leader SGA, rent split."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import __version__, delay, geometry, scenario
from .errors import CacheMarketError, InfeasibleError
from .market import DemandSummary, MarketOutcome, solve_equilibrium, summarize_demands
from .mno_solver import GpConstants, GpSolution, best_response, build_constants, fixed_lambda_response
from .sharing import CostAllocation, RentProblem, airport_share


class StageError(CacheMarketError):
    """Wraps a module error with the pipeline stage it came from."""

    def __init__(self, stage: str, err: CacheMarketError):
        super().__init__(f"[{stage}] {err}")
        self.stage = stage
        self.cause = err
        self.exit_code = err.exit_code


@dataclass
class RunReport:
    labels: tuple
    constants: list
    responses: list
    feasibility: list
    demands: DemandSummary | None = None
    market: MarketOutcome | None = None
    allocation: CostAllocation | None = None
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"provenance": dict(self.provenance), "mno": []}
        for k, lab in enumerate(self.labels):
            c: GpConstants | None = self.constants[k]
            s: GpSolution = self.responses[k]
            row = {"label": lab, "method": s.diagnostics.get("method", "gp")}
            if c is not None:
                row.update({"A": c.a_const, "V": c.v_const, "R": c.r_const})
            row.update({"r_star": s.r_star, "q_star": s.q_star, "lambda_star": s.lambda_star,
                        "s_star": s.s_star, "s_int": s.s_int, "cache_intensity": s.cache_intensity,
                        "feasibility": self.feasibility[k].message()})
            if self.demands is not None:
                row["T"] = self.demands.t_const[k]
                row["U"] = self.demands.u_const[k]
            if self.market is not None:
                lam, sz = self.market.demands[k]
                row["lambda_eq"], row["s_eq"] = lam, sz
            if self.allocation is not None:
                row["psi"] = self.allocation.psi[k]
            out["mno"].append(row)
        if self.market is not None:
            m = self.market
            out["market"] = {"omega_star": m.omega_star, "z_star": m.z_star, "profit": m.profit,
                             "revenue": m.revenue, "cost": m.cost, "iterations": m.iterations,
                             "argmax": self.labels[m.argmax_k], "rent": m.rent}
        if self.allocation is not None:
            out["sharing"] = {"total": self.allocation.total, "sum_psi": sum(self.allocation.psi)}
        return out


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except StageError:
        raise
    except CacheMarketError as err:
        raise StageError(name, err) from err


def follower_stage(sc: scenario.Scenario, omega: float, strict: bool = True):
    consts, sols, feas = [], [], []
    for k in range(len(sc.mnos)):
        net = sc.mno_network(k)
        g = geometry.throughput(net, geometry.coverage(net, sc.solver.coverage_method).p_c)
        if sc.catalog.nu < 1:
            c = None
            sol = fixed_lambda_response(net, sc.catalog, sc.queue, sc.budget, omega,
                                        coverage_method=sc.solver.coverage_method)
        else:
            c = build_constants(net, sc.catalog, sc.queue, sc.budget, throughput=g)
            sol = best_response(c, omega=omega)
        # fronthaul check at the chosen intensity; reports the minimum intensity too
        rep = delay.feasibility_check(delay.fronthaul_delay(net.with_(lam=sol.lambda_star), g, sc.catalog.x_f),
                                      sc.budget, net=net, throughput=g, x_f=sc.catalog.x_f)
        if strict and sol.s_star > sc.catalog.F:
            raise InfeasibleError(
                f"{sc.labels()[k]}: delay budget gamma*D_th = {sc.budget.bound:.6g} s needs "
                f"S* = {sol.s_star:.6g} > F = {sc.catalog.F} cached files; even with the whole "
                f"catalogue cached the BS intensity must be at least {rep.lambda_min:.6g} /m^2")
        consts.append(c)
        sols.append(sol)
        feas.append(rep)
    return consts, sols, feas


def provenance(sc: scenario.Scenario, seed=None) -> dict:
    return {"config_hash": scenario.config_hash(sc), "seed": seed, "version": __version__}


def run_followers(sc: scenario.Scenario, omega: float | None = None, strict: bool = True) -> RunReport:
    """Best responses only. With strict=False an S* above F is flagged, not raised."""
    omega = sc.solver.omega if omega is None else omega
    consts, sols, feas = _stage("follower", follower_stage, sc, omega, strict)
    return RunReport(sc.labels(), consts, sols, feas, provenance=provenance(sc))


def run_solve(sc: scenario.Scenario) -> RunReport:
    rep = run_followers(sc, omega=1.0)
    rep.demands = _stage("demand", summarize_demands, rep.constants)
    rep.market = _stage("leader", solve_equilibrium, rep.demands, sc.inp, tol=sc.solver.tol,
                        max_iter=sc.solver.max_iter, omega0=sc.solver.omega0)
    prob = RentProblem(rep.market.omega_star, rep.market.cache_intensities, rep.labels)
    rep.allocation = _stage("sharing", airport_share, prob)
    return rep
