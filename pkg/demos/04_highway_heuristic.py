"""Nonlinear delays: the electrical ranking as a heuristic.

On a 17-junction highway graph with quartic delays, link conductances are
replaced by f / tau(f) at equilibrium. The resulting ranking of single-link
improvements (u = 3) is compared with re-solving the equilibrium.
"""

from wardrop_electric.generators import la_highway
from wardrop_electric.ndp import electrical_sweep, exact_sweep, ranking
from wardrop_electric.wardrop import solve_convex

agree = 0
for seed in range(5):
    game = la_highway(m=4.0, seed=seed)
    eq = solve_convex(game)
    approx, exact = electrical_sweep(game, 3.0, eq=eq), exact_sweep(game, 3.0, eq=eq)
    top_a, top_e = ranking(approx)[:3], ranking(exact)[:3]
    agree += top_a[0] == top_e[0]
    print(f"draw {seed}: exact top-3 {top_e}  electrical top-3 {top_a}  "
          f"gain on exact best {exact[top_e[0]]:.3f} vs estimate {approx[top_e[0]]:.3f}")
print(f"top link agrees in {agree}/5 draws (no error bound exists for this case)")
