"""Leader equilibrium over nu and the (theta, p_c) cost grid, with the closed-form check.

The SGA fixed point is compared against the stationary point of the leader
objective; the last column is their relative gap in z*.
"""

from dataclasses import replace

from cachemarket import figures, market, pipeline, scenario

print("theta  p_c   nu     omega*        z*            iters  gap_vs_closed_form")
for theta, p_c in figures.COST_GRID:
    for nu in figures.MARKET_NU[::5]:
        sc = scenario.three_mno(nu=nu)
        sc = replace(sc, inp=sc.inp.with_(theta=theta, p_circuit=p_c))
        rep = pipeline.run_solve(sc)
        m = rep.market
        w_cf, z_cf = market.closed_form_optimum(rep.demands, sc.inp)
        print(f"{theta:5g}  {p_c:3g}  {nu:4.1f}  {m.omega_star:12.6g}  {m.z_star:12.6g}  {m.iterations:5d}  "
              f"{abs(m.z_star - z_cf) / abs(z_cf):.2e}")
