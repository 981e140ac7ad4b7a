"""Weight-tail norms, dual weights, and the pairing (predual) bound against
the global Morrey-type norm.

Run:  python3 demos/pairing_bound.py
"""

import math

from morrey_sparse.grid import Grid3
from morrey_sparse.fields import bump_gradient, localized_field, random_solenoidal_field
from morrey_sparse.morrey import MorreyParams, WeightSpec, gm_norm
from morrey_sparse.predual import (
    HOLDER_CONSTANT,
    dual_weight,
    dual_weight_power_law,
    pairing_integral,
    predual_bound,
    stieltjes_predual_integral,
    weight_tail_norm,
)

w = WeightSpec(nu=0.5, rho=0.25, theta=math.inf)
print("tail norms of w(s) = s^(-1/2) 1_[1/4, 1] (sup form):")
for t in (0.1, 0.25, 0.5, 0.9, 1.0):
    print(f"  ||w||_(t={t:4.2f}, inf) = {weight_tail_norm(w, t):.6f}")

print("\ndual weight of the truncated power law (theta = 2):")
w2 = WeightSpec(nu=1.0, rho=0.25, theta=2.0)
for t in (0.3, 0.5, 0.8):
    print(f"  w~({t}) = {dual_weight(w2, t, 'tilde'):.6f}")
print(f"untruncated closed form at t=0.5, nu=1, theta=3: "
      f"{dual_weight_power_law(1.0, 3.0, 0.5):.6f} "
      f"(= (nu theta - 1) t^(nu-1) = {2.0 * 0.5**0.0:.6f})")

grid = Grid3(16)
print(f"\npairing bound vs global norm, frozen constant C = {HOLDER_CONSTANT:.4f}:")
print(f"{'pair':>4} {'int |f||g|':>12} {'C0(f) * gm(g)':>14} {'ratio':>7}")
params = MorreyParams.default(grid, w, p=2.0)
for i in range(5):
    f = localized_field(grid, kmax=4, seed=600 + 2 * i, radius=0.85)
    g = random_solenoidal_field(grid, kmax=4, seed=601 + 2 * i)
    lhs = pairing_integral(f, g)
    rhs = predual_bound(f, 2.0, w).value * gm_norm(g, params).value
    print(f"{i:4d} {lhs:12.5f} {rhs:14.5f} {lhs / rhs:7.3f}")

print("\nscale-Stieltjes integral of a shell bump (exact step summation):")
ws = WeightSpec(nu=1.5, rho=0.02, theta=2.0)
for r in (0.2, 0.4):
    g32 = Grid3(32)
    f = bump_gradient(g32, (16, 16, 16), 0.5 * r, r)
    val = stieltjes_predual_integral(f, 2.0, ws, (16, 16, 16))
    print(f"  bump radius {r}: integral = {val:.6e}")
print("(the integral grows like r^(2 * [(3/p'-1) + (nu theta - 1)/theta]) here)")
