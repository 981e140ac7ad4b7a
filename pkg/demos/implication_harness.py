"""The sparseness implication harness: a premise-holding vortex blob, the
constructed counterexample, and a small sweep summary.

Both sides of each premise are degree-1 homogeneous, so only geometry (not
amplitude) decides a verdict; the demo shows the one knob that works.

Run:  python3 demos/implication_harness.py   (about a minute: one n=64 grid)
"""

from morrey_sparse.grid import Grid3, biot_savart, curl
from morrey_sparse.fields import vorticity_blob
from morrey_sparse.sparseness import admissible_pair, kappa, semi_mixed, superlevel_sets
from morrey_sparse.verify import (
    SweepConfig,
    check_lemma_l2,
    counterexample_field,
    summarize,
    sweep,
)

grid = Grid3(64)
pair = admissible_pair(0.85)
r = 0.8

print("1) concentrated vortex blob: the premise holds with margin and the")
print("   six super-level sets are comfortably semi-mixed")
u = biot_savart(vorticity_blob(grid, (32, 32, 32), sigma=0.15))
rep = check_lemma_l2(u, pair, r)
print(f"   premise: {rep.premise_lhs:.4e} <= {rep.premise_rhs:.4e}  "
      f"(ratio {rep.premise_lhs / rep.premise_rhs:.2f}) -> holds={rep.premise_holds}")
print(f"   conclusion (kappa r = {kappa(pair) * r:.3f}): {rep.conclusion_holds}; "
      f"worst set density {max(rep.per_set_densities):.3f} vs delta={pair.delta}")

print("\n2) widening the same blob breaks the premise (geometry, not amplitude):")
for sigma in (0.2, 0.3):
    u2 = biot_savart(vorticity_blob(grid, (32, 32, 32), sigma=sigma))
    rep2 = check_lemma_l2(u2, pair, r)
    print(f"   sigma={sigma}: ratio {rep2.premise_lhs / rep2.premise_rhs:.2f} "
          f"-> holds={rep2.premise_holds}, verdict={rep2.verdict}")

print("\n3) constructed counterexample: semi-mixedness defeated, premise falsified")
uc = counterexample_field(0.6, admissible_pair(0.75), grid)
pair75 = admissible_pair(0.75)
sets = superlevel_sets(curl(uc), pair75.lam)
res = semi_mixed(sets["S_1+"], kappa(pair75) * 0.6, pair75.delta)
repc = check_lemma_l2(uc, pair75, 0.6)
print(f"   S_1+ max density {res.max_density:.3f} (> delta={pair75.delta}) at {res.witness}")
print(f"   premise ratio {repc.premise_lhs / repc.premise_rhs:.1f} >> 1 "
      f"-> holds={repc.premise_holds}; implication verdict={repc.verdict}")

print("\n4) small random sweep (premise rarely attainable at this resolution;")
print("   every report must still satisfy the implication):")
cfg = SweepConfig(n=32, deltas=(0.75, 0.85), scales=(0.4, 0.85), seeds=tuple(range(5)),
                  kmax=8, adversarial=True)
s = summarize(sweep(cfg))
print(f"   {s.total} reports: {s.premise_holding} premise-holding, "
      f"{s.degenerate} degenerate, {s.violations} violations, "
      f"{s.marginal_violations} marginal violations")
