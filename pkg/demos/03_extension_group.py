"""The extension group: canonical data, assembly, Baer sum three ways.

An extension of the big slope block by the small one is canonicalized by
three h x h matrices (xi, v, m).  Witness images are the trivial classes;
the Baer sum can be computed componentwise or through either order of the
pullback/pushout diagram, and the three answers agree entrywise.
"""

import random

from crystal_lab import (ExtensionContext, ExtensionData, PrecisionContext,
                         Untrivializable,
                         assemble_crystal, baer_sum, check_horizontality,
                         check_pairing_compat, from_alpha, int_scale,
                         trivialize)
from crystal_lab.sampling import (perturb_xi_antisym, random_extension,
                                  random_witness, witness_support)

ctx = PrecisionContext(3, 8, 32)
ectx = ExtensionContext(ctx, 3)
rng = random.Random(2024)

print("-- a trivial class and its assembled crystal --")
w = random_witness(rng, ectx, witness_support(ectx))
e = from_alpha(w)
c = assemble_crystal(e)
print("rank:", c.rank)
print("horizontality:", check_horizontality(c).passed,
      "| pairing:", check_pairing_compat(c).passed)

print("\n-- trivialize recovers the witness --")
out = trivialize(e)
print("witness recovered exactly:", out.alpha == w.alpha)

print("\n-- a genuinely nontrivial class --")
bad = perturb_xi_antisym(e, 0, 1)
verdict = trivialize(bad)
assert isinstance(verdict, Untrivializable)
print("trivialize says:", verdict.reason)
cb = assemble_crystal(bad)
print("yet it is an honest crystal:", check_horizontality(cb).passed,
      check_pairing_compat(cb).passed)

print("\n-- Baer sum, three ways --")
e2 = random_extension(rng, ectx, nontrivial=True)
fast = baer_sum(e, e2, "fast")
pp = baer_sum(e, e2, "pullback_pushout")
pop = baer_sum(e, e2, "pushout_pullback")
print("componentwise == pullback-then-pushout:", fast == pp)
print("componentwise == pushout-then-pullback:", fast == pop)

zero = ExtensionData.zero(ectx)
print("identity law:", baer_sum(e2, zero, "pullback_pushout") == e2)
print("inverse law:", baer_sum(e2, int_scale(e2, -1)) == zero)

acc = e2
for _ in range(ctx.p - 1):
    acc = baer_sum(acc, e2)
print(f"{ctx.p}-fold sum equals scaling by {ctx.p}:",
      acc == int_scale(e2, ctx.p))
