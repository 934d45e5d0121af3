"""Bracketing a link's effective resistance from its neighbourhood.

Cutting everything beyond hop distance d raises the resistance; shorting
it into one node lowers it. On a square grid the bracket closes quickly;
on two binary trees joined at the roots it never closes.
"""

from wardrop_electric.generators import central_link, double_tree, double_tree_roots, resistor_view, square_grid
from wardrop_electric.localres import resistance_bounds
from wardrop_electric.resistor import effective_resistances
from wardrop_electric.walks import double_tree_lower_closed_form

side = 41
rn = resistor_view(square_grid(side))
l = central_link(side)
r = effective_resistances(rn, [l])[l]
print(f"grid {side}x{side}, central link {l}: exact r = {r:.5f} (infinite lattice: 1/2)")
print(" d   r_lower   r_upper   (r_U - 1/2)/(1/2)   (1/2 - r_L)/(1/2)")
for d in range(1, 6):
    b = resistance_bounds(rn, l, d)
    print(f"{d:2d}  {b.lower:.5f}   {b.upper:.5f}   {(b.upper - 0.5) / 0.5:10.5f}        {(0.5 - b.lower) / 0.5:10.5f}")

print("\ndouble tree (depth d + 4), root link")
print(" d   r_lower   closed form   gap")
for d in range(1, 9):
    tree = double_tree(d + 4)
    b = resistance_bounds(tree, double_tree_roots(d + 4), d)
    print(f"{d:2d}  {b.lower:.6f}  {double_tree_lower_closed_form(d):.6f}     {b.gap:.4f}")
print("the gap tends to 1/3: a random walk on a tree escapes to infinity")
