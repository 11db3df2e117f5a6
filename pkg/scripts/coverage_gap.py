"""Closed-form vs exact-integral coverage across BS density and path loss.

Prints the worst relative gap per lower bound on lambda; the approximation
degrades in sparse, noise-limited deployments.
"""

import numpy as np

from cachemarket import geometry, scenario

base = scenario.baseline().network
lams = np.geomspace(1e-6, 1e-2, 25)
rows = []
for alpha in (3.0, 4.0, 5.0, 6.0):
    for t_bar in (1.0, 10.0, 100.0):
        for L in (1, 6, 12):
            net0 = base.with_(alpha=alpha, t_bar=t_bar, subchannels=L)
            beta = geometry.compute_beta(net0)
            for lam in lams:
                net = net0.with_(lam=float(lam))
                ex = geometry.coverage_exact(net, beta).p_c
                cf = geometry.coverage_closed_form(net, beta).p_c
                rows.append((lam, alpha, t_bar, L, abs(cf - ex) / ex))

rows = np.array(rows)
print("lambda_min   worst_gap   at (alpha, T, L)")
for lo in (1e-6, 1e-5, 1e-4, 1e-3):
    sel = rows[rows[:, 0] >= lo * (1 - 1e-12)]
    k = sel[:, 4].argmax()
    print(f"{lo:9.0e}   {sel[k, 4]:9.3%}   ({sel[k, 1]:g}, {sel[k, 2]:g}, {sel[k, 3]:g})")
