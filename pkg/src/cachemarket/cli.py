"""Command-line scenario runner.

Exit codes: 0 ok, 2 config/parameter error, 3 infeasible model,
4 numerical failure, 5 oracle validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import tomli
import tomli_w

from . import caching, delay, figures, geometry, montecarlo, oracles, pipeline, scenario
from .errors import CacheMarketError, OracleMismatch
from .scenario import ConfigError

log = logging.getLogger("cachemarket")

COVERAGE_COLS = ("point", "label", "alpha", "t_bar", "lam", "L", "beta", "p_c_exact", "p_c_closed",
                 "p_c_interference_limited", "throughput")
HITPROB_COLS = ("point", "F", "nu", "S", "p_hit_exact", "p_hit_asymptotic", "rel_error")
DELAY_COLS = ("point", "label", "lam", "S", "d_fh", "d_bh", "p_hit", "d_total", "bound", "feasible")
MNO_COLS = ("point", "label", "W", "nu", "omega", "r_star", "q_star", "lambda_star", "s_star", "s_int",
            "cache_intensity", "A", "V", "R", "primal_feasible", "s_exceeds_F")
SOLVE_COLS = ("point", "omega_star", "z_star", "profit", "rent", "iterations", "argmax")
VALIDATE_COLS = ("check", "statistic", "reference", "tolerance", "verdict")


def _setup_logging():
    level = os.environ.get("CACHEMARKET_LOG", "warn").lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _parse_value(text: str):
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def load_scenario(args) -> scenario.Scenario:
    if args.config:
        sc = scenario.load(args.config)
    else:
        sc = scenario.preset_scenario(args.preset or "baseline")
    for item in args.set or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            sc = sc.set(key.strip(), _parse_value(val.strip()))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"--set {item}: {exc}") from exc
    return sc


def _fmt(v):
    if isinstance(v, bool):
        return int(v)
    return v


def write_csv(header, rows, out) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    text = buf.getvalue()
    _emit(text, out)
    return text


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _sweep(sc, fn):
    """fn(point_value, scenario) -> list of rows; rows come back in sweep order."""
    pts = sc.points()
    if len(pts) <= 1:
        return [r for p in pts for r in fn(*p)]
    with ThreadPoolExecutor(max_workers=min(8, len(pts))) as ex:
        chunks = list(ex.map(lambda p: fn(*p), pts))
    return [r for c in chunks for r in c]


def _point(v):
    return "" if v is None else v


def cmd_coverage(args):
    sc = load_scenario(args)

    def rows(v, s):
        out = []
        for k, lab in enumerate(s.labels()):
            net = s.mno_network(k)
            beta = geometry.compute_beta(net)
            exact = geometry.coverage_exact(net, beta).p_c
            closed = geometry.coverage_closed_form(net, beta).p_c
            il = geometry.interference_limited(net, beta).p_c
            out.append((_point(v), lab, net.alpha, net.t_bar, net.lam, net.subchannels, beta, exact,
                        closed, il, geometry.throughput(net, closed)))
        return out

    write_csv(COVERAGE_COLS, _sweep(sc, rows), args.out)
    return 0


def cmd_hitprob(args):
    sc = load_scenario(args)
    over = {k: getattr(args, k) for k in ("F", "nu", "S") if getattr(args, k) is not None}
    if over:
        sc = replace(sc, catalog=sc.catalog.with_(**over))

    def rows(v, s):
        cat = s.catalog
        exact = caching.hit_prob_exact(cat) if args.method in ("exact", "both") else ""
        asym = caching.hit_prob_asymptotic(cat) if args.method in ("asymptotic", "both") else ""
        rel = abs(asym - exact) / exact if args.method == "both" and exact > 0 else ""
        return [(_point(v), cat.F, cat.nu, cat.S, exact, asym, rel)]

    write_csv(HITPROB_COLS, _sweep(sc, rows), args.out)
    return 0


def cmd_delay(args):
    sc = load_scenario(args)

    def rows(v, s):
        out = []
        d_bh = delay.backhaul_delay(s.queue)
        p_hit = caching.hit_prob_exact(s.catalog)
        for k, lab in enumerate(s.labels()):
            net = s.mno_network(k)
            g = geometry.throughput(net, geometry.coverage(net, s.solver.coverage_method).p_c)
            d_fh = delay.fronthaul_delay(net, g, s.catalog.x_f)
            rep = delay.feasibility_check(d_fh, s.budget, net=net, throughput=g, x_f=s.catalog.x_f)
            if not rep.strict:
                log.warning("%s: %s", lab, rep.message())
            total = delay.total_delay(d_fh, d_bh, p_hit)
            out.append((_point(v), lab, net.lam, s.catalog.S, d_fh, d_bh, p_hit, total,
                        s.budget.bound, total <= s.budget.bound))
        return out

    write_csv(DELAY_COLS, _sweep(sc, rows), args.out)
    return 0


def cmd_mno_solve(args):
    sc = load_scenario(args)
    omega = sc.solver.omega if args.omega is None else args.omega

    def rows(v, s):
        rep = pipeline.run_followers(s, omega=omega, strict=False)
        out = []
        for k, lab in enumerate(rep.labels):
            c, sol = rep.constants[k], rep.responses[k]
            a, vv, r = (c.a_const, c.v_const, c.r_const) if c is not None else ("", "", "")
            out.append((_point(v), lab, s.mno_network(k).bandwidth, s.catalog.nu, omega, sol.r_star,
                        sol.q_star, sol.lambda_star, sol.s_star, sol.s_int, sol.cache_intensity, a, vv, r,
                        sol.diagnostics.get("primal_feasible", sol.diagnostics.get("meets_budget_exact_hit")),
                        sol.diagnostics["s_exceeds_F"]))
        return out

    write_csv(MNO_COLS, _sweep(sc, rows), args.out)
    return 0


def _toml_clean(obj):
    if isinstance(obj, dict):
        return {k: _toml_clean(v) for k, v in obj.items() if v is not None}
    if isinstance(obj, (list, tuple)):
        return [_toml_clean(v) for v in obj]
    return obj


def cmd_solve(args):
    sc = load_scenario(args)
    if sc.sweep is not None:
        def rows(v, s):
            rep = pipeline.run_solve(s)
            m = rep.market
            return [(_point(v), m.omega_star, m.z_star, m.profit, m.rent, m.iterations, rep.labels[m.argmax_k])]
        write_csv(SOLVE_COLS, _sweep(sc, rows), args.out)
        return 0
    rep = pipeline.run_solve(sc)
    rep.provenance["seed"] = args.seed
    text = tomli_w.dumps(_toml_clean(rep.to_dict()))
    if args.out and Path(args.out).suffix == "":
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        (d / "report.toml").write_text(text, encoding="utf-8")
        mno = rep.to_dict()["mno"]
        cols = list(mno[0])
        write_csv(cols, [[r.get(c, "") for c in cols] for r in mno], d / "mnos.csv")
        write_csv(("iteration", "z", "omega"), rep.market.history, d / "sga_history.csv")
    else:
        _emit(text, args.out)
    return 0


def cmd_reproduce(args):
    opts = figures.FigureOptions(omega=args.omega, nu=args.nu, theta=args.theta, p_circuit=args.p_circuit)
    header, rows = figures.reproduce(args.figure, opts)
    write_csv(header, rows, args.out)
    return 0


def validation_rows(sc: scenario.Scenario, seed: int, trials: int = 100_000,
                    queue_departures: int = 1_000_000, corrupt_beta: float = 1.0):
    rows = []
    net = sc.mno_network(0).with_(sigma2=0.0)
    beta = geometry.compute_beta(net) * corrupt_beta
    ref = geometry.interference_limited(net, beta).p_c
    est = montecarlo.simulate_coverage(net, montecarlo.SimConfig(seed=seed, trials=trials))
    rows.append(("coverage", est.estimate, ref, f"99% CI [{est.ci_low!r}, {est.ci_high!r}]", est.contains(ref)))

    cat = sc.catalog
    if cat.S == 0:
        cat = cat.with_(S=max(1, math.ceil(0.03 * cat.F)))
    p = caching.hit_prob_exact(cat)
    hit = montecarlo.simulate_hit_rate(cat, montecarlo.SimConfig(seed=seed, trials=10 * trials))
    tol = 3 * math.sqrt(p * (1 - p) / hit.n)
    rows.append(("hit_rate", hit.estimate, p, tol, abs(hit.estimate - p) <= tol))

    d_bh = delay.backhaul_delay(sc.queue)
    qs = montecarlo.simulate_queue(sc.queue, montecarlo.SimConfig(seed=seed, trials=queue_departures))
    rows.append(("queue", qs.estimate, d_bh, 0.05, abs(qs.estimate - d_bh) / d_bh <= 0.05))

    if sc.catalog.nu > 1:
        rep = pipeline.run_followers(sc, omega=1.0, strict=False)
        for lab, c, sol in zip(rep.labels, rep.constants, rep.responses):
            g = oracles.grid_search_gp(c, omega=sol.omega)
            rel = (g.value - sol.q_star) / sol.q_star
            rows.append((f"gp_grid[{lab}]", g.value, sol.q_star, 0.01, -1e-9 <= rel <= 0.01))
    return rows


def cmd_validate(args):
    sc = load_scenario(args)
    rows = validation_rows(sc, args.seed, args.trials, args.departures, args.corrupt_beta)
    write_csv(VALIDATE_COLS, [(c, s, r, t, "pass" if ok else "FAIL") for c, s, r, t, ok in rows], args.out)
    failed = [r[0] for r in rows if not r[4]]
    if failed:
        raise OracleMismatch(f"validation failed: {', '.join(failed)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML scenario file")
    common.add_argument("--preset", choices=sorted(scenario.PRESETS), help="built-in scenario (default baseline)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one field, e.g. catalog.nu=3 or mnos.0.bandwidth=5e8")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--format", choices=("csv",), default="csv")

    p = argparse.ArgumentParser(prog="cachemarket", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, cols=None, **kw):
        epilog = f"columns: {', '.join(cols)}" if cols else None
        sp = sub.add_parser(name, parents=[common], help=help_, description=help_, epilog=epilog, **kw)
        sp.set_defaults(func=fn)
        return sp

    add("coverage", cmd_coverage, "coverage probability and throughput per MNO", COVERAGE_COLS)
    sp = add("hitprob", cmd_hitprob, "exact and asymptotic cache-hit probability", HITPROB_COLS)
    sp.add_argument("--F", type=int)
    sp.add_argument("--nu", type=float)
    sp.add_argument("--S", type=int)
    sp.add_argument("--method", choices=("exact", "asymptotic", "both"), default="both")
    add("delay", cmd_delay, "fronthaul, backhaul and total expected delay", DELAY_COLS)
    sp = add("mno-solve", cmd_mno_solve, "follower best responses only", MNO_COLS)
    sp.add_argument("--omega", type=float, help="price seen by the MNOs (default solver.omega)")
    add("solve", cmd_solve, "full pipeline: best responses, SGA price, Shapley split "
        "(TOML report; --out DIR also writes CSV tables; a sweep gives one CSV row per point)", SOLVE_COLS)
    sp = add("reproduce", cmd_reproduce, "plot-ready data for an evaluation figure")
    sp.add_argument("figure", type=int, choices=sorted(figures.FIGURES))
    sp.add_argument("--omega", type=float, default=10.0, help="follower price for figures 5-6")
    sp.add_argument("--nu", type=float, default=3.0, help="Zipf exponent for figure 7")
    sp.add_argument("--theta", type=float, default=10.0)
    sp.add_argument("--p-circuit", type=float, default=1.0)
    sp = add("validate", cmd_validate, "Monte Carlo and grid oracles against the analytics", VALIDATE_COLS)
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--departures", type=int, default=1_000_000)
    sp.add_argument("--corrupt-beta", type=float, default=1.0,
                    help="multiply beta by this factor (sensitivity testing)")
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CacheMarketError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
