"""Where should a single improvement go?

Three links: a parallel pair (slopes 3 and 2) feeding a single link
(slope 1), with 3 units of traffic. Dividing one link's slope by 1 + u
lowers the total travel time; which link to pick depends on how big the
improvement is.
"""

from wardrop_electric.generators import example1
from wardrop_electric.ndp import Intervention, InterventionCostModel, algorithm1, delta_cost_exact
from wardrop_electric.resistor import effective_resistances, from_affine, solve_voltage
from wardrop_electric.wardrop import solve_affine

game = example1()
eq = solve_affine(game)
print(f"equilibrium flows {eq.f.round(4).tolist()}  total travel time {eq.social_cost:.4f}")

# The resistor view: conductance 1/a per link. With zero offsets the
# equilibrium flow *is* the electrical current.
rn = from_affine(game)
volt = solve_voltage(rn, 0, 2, game.m)
r = effective_resistances(rn)
for e in range(3):
    a, f, y, re = game.a[e], eq.f[e], volt.y[e], r[rn.resistor_link(e)]
    print(f"link {e}: a={a:g} flow={f:.3f} current={y:.3f} r={re:.4f}  slope at u=0: {a * f * y:.3f}")

print("\n   u   gain(e0)  gain(e1)  gain(e2)   best")
for u in (0.25, 0.5, 1.0, 2.0, 4.0, 10.0):
    gains = [delta_cost_exact(game, Intervention(e, u), eq)[0] for e in range(3)]
    best = max(range(3), key=lambda e: gains[e])
    print(f"{u:5.2f}  " + "  ".join(f"{g:8.4f}" for g in gains) + f"   e{best}")

# The steepest link at u = 0 (e2) is not the winner for large u (e1): the
# choice of link and of magnitude cannot be separated.
for umax in (0.5, 10.0):
    res = algorithm1(game, InterventionCostModel(u_max=umax), d=None)
    print(f"Algorithm 1 with u_max={umax:g}: link {res.chosen_link}, gain {res.objective:.4f}")
