"""Two-phase displacement on the u2 = 0 edge.

Water (1, 0) displaces oil (0, 0). The fast wave curve of the oil state
contains the water state, so the whole solution is one fast group: a
rarefaction from the water state down to the tangency point followed by a
shock into oil. The shock state is compared with the scalar tangent
construction s* = sqrt(C / (A + C)).

    python3 demos/edge_buckley_leverett.py [A C]
"""

import math
import sys

from rieff import CoreyModel, l1_compare, simulate, solve_riemann

A, C = (float(v) for v in sys.argv[1:3]) if len(sys.argv) >= 3 else (1.0, 1.0)
model = CoreyModel(A, 1.0, C)
sol = solve_riemann(model, (1.0, 0.0), (0.0, 0.0))

s_star = math.sqrt(C / (A + C))
f_star = A * s_star ** 2 / (A * s_star ** 2 + C * (1 - s_star) ** 2)
shock = [w for w in sol.fast_group if w.kind == "shock"][0]
print(f"shock state    {shock.left.u1:.12f}  (tangent construction {s_star:.12f})")
print(f"shock speed    {shock.speed_left:.12f}  (f(s*)/s* = {f_star / s_star:.12f})")
print(f"group          {[w.kind for w in sol.fast_group]}")

for N in (100, 200, 400, 800):
    g = simulate(model, (1.0, 0.0), (0.0, 0.0), N, 0.5)
    front = g.x[(g.u1 < 0.5 * s_star)][0]
    print(f"N = {N:4d}  L1 = {l1_compare(g, sol, 0.5, model):.5f}  front at x = {front:.4f}"
          f" (exact {0.5 * f_star / s_star:.4f})  clamps = {g.clamp_events}")
