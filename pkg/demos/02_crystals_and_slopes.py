"""Standard crystals, their invariant checkers, and Newton slopes.

The two building blocks are cyclic Frobenius crystals of rank h: one whose
cycle carries h-1 factors of p (slope (h-1)/h) and one carrying h+1 factors
(slope (h+1)/h).  Their pairing-compatible direct sum is the "pair" kind.
Internal homs with a twist shift slopes by integers; the twist-2 hom of the
two blocks exhibits the slope difference 2/h that the deformation group
inherits.
"""

from crystal_lab import (ExtensionContext, PrecisionContext,
                         check_horizontality, check_pairing_compat,
                         direct_sum, hom_crystal, make_standard_crystal,
                         newton_slopes, orthogonal_complement, slope_report)

ctx = PrecisionContext(3, 8, 32)

print("-- the two slope blocks at height h = 3 --")
sub = make_standard_crystal(ctx, 3, "sub1")
sup = make_standard_crystal(ctx, 3, "super1")
print("F of the small block (rows):", sub.frobenius.constant_layer())
print("slopes:", newton_slopes(sub), "and", newton_slopes(sup))

print("\n-- invariant checkers --")
pair = make_standard_crystal(ctx, 3, "pair")
print("horizontality:", check_horizontality(pair).passed)
rep = check_pairing_compat(pair)
print("pairing: symmetric", rep.symmetric, "| Frobenius-compatible",
      rep.frobenius_compatible, "| flat", rep.flat, "| perfect", rep.perfect)

print("\n-- internal hom and the twist --")
for tw in (0, 2):
    hom = hom_crystal(sup, sub, twist=tw)
    print(f"Hom(super, sub) twist {tw}: slopes {newton_slopes(hom)}"
          + (f"  (stored with formal twist {hom.frobenius_shift})"
             if hom.frobenius_shift else ""))

for h in (2, 3, 5, 10):
    print(f"slope report at h = {h}:",
          slope_report(ExtensionContext(ctx, h)).to_json()["slope"])

print("\n-- orthogonal complements --")
sl = make_standard_crystal(ctx, 3, "slope1", rho=2)
amb = direct_sum(pair, sl)
vecs = []
for k in range(sl.rank):
    v = [0] * amb.rank
    v[pair.rank + k] = 1
    vecs.append(v)
res = orthogonal_complement(amb, vecs)
print("perp of the slope-1 block has rank", res.presentation.rank,
      "and slopes", newton_slopes(res.presentation))
