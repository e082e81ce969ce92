"""Deformation points, their group law, and the JSON/CLI surface.

A point over k[t]/(t^n) is an extension class plus filtration coordinates;
addition is the Baer sum on one factor and coordinatewise addition on the
other.  Over the dual numbers the h-1 free coordinates reduce the law to
vector addition.  The same objects round-trip through the JSON files the
command-line driver consumes.
"""

import json
import random
import subprocess
import sys
import tempfile
from pathlib import Path

from crystal_lab import (ExtensionContext, PrecisionContext, add_points,
                         identity_point, negate_point, point_from_tangent,
                         random_geometric_point, serialize,
                         tangent_coordinates, truncate_point)

ctx = PrecisionContext(3, 8, 32)
ectx = ExtensionContext(ctx, 3)
rng = random.Random(7)

print("-- the group of points over k[t]/(t^6) --")
y = random_geometric_point(rng, ectx, 6, nontrivial=True)
z = random_geometric_point(rng, ectx, 6)
ident = identity_point(ectx, 6)
print("commutative:", add_points(y, z) == add_points(z, y))
print("identity:   ", add_points(y, ident) == y)
print("inverses:   ", add_points(y, negate_point(y)) == ident)

print("\n-- base change commutes with addition --")
print(truncate_point(add_points(y, z), 3)
      == add_points(truncate_point(y, 3), truncate_point(z, 3)))

print("\n-- the tangent space is (h-1)-dimensional vector addition --")
a = point_from_tangent(ectx, [1, 2])
b = point_from_tangent(ectx, [2, 2])
print("coords(a) =", tangent_coordinates(a), " coords(b) =",
      tangent_coordinates(b))
print("coords(a + b) =", tangent_coordinates(add_points(a, b)),
      " (mod 3 addition)")

print("\n-- the CLI speaks the same JSON --")
with tempfile.TemporaryDirectory() as tmp:
    epath = Path(tmp) / "e.json"
    epath.write_text(json.dumps(serialize.extension_to_json(y.extension)))
    out = subprocess.run(
        [sys.executable, "-m", "crystal_lab.cli", "trivialize", str(epath)],
        capture_output=True, text=True)
    doc = json.loads(out.stdout)
    print("trivialize exit code", out.returncode,
          "| trivializable:", doc["trivializable"],
          "| failing equation:", doc.get("equation"))
    out = subprocess.run(
        [sys.executable, "-m", "crystal_lab.cli", "probe", "--p", "3",
         "--h", "3", "--n", "6", "--samples", "10", "--seed", "1"],
        capture_output=True, text=True)
    print("probe:", out.stdout.strip())
