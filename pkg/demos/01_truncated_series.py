"""Tour of the coefficient ring W[[t]]/(p^N, t^(M+1)).

Everything is exact: residues mod p^N, truncation at degree M, and a fixed
Frobenius lift acting by t |-> t^p.  The one subtle point is that formal
antidifferentiation divides by integers that may be divisible by p, so it
either refuses (no antiderivative exists over the integers) or returns its
answer at a reduced p-adic precision.
"""

from crystal_lab import (OneForm, PrecisionContext, TruncatedSeries,
                         derivative, frobenius_pullback, integrate,
                         oneform_pullback)
from crystal_lab.errors import NonIntegrable

ctx = PrecisionContext(p=3, N=8, M=32)
print(f"working ring: Z/{ctx.p}^{ctx.N} [[t]] / t^{ctx.M + 1}")

one = TruncatedSeries.one(ctx)
t = TruncatedSeries.monomial(ctx, 1)

print("\n-- ring arithmetic is exact quotient arithmetic --")
print("(1 + t)(1 - t)      =", (one + t) * (one - t))
print("t^M * t             =", TruncatedSeries.monomial(ctx, ctx.M) * t)

small = PrecisionContext(3, 2, 4)
s = TruncatedSeries(small, (3, 1))
print("(3 + t)^2 mod 3^2   =", s * s, "   (the 9 vanishes)")

print("\n-- differentiation and its partial inverse --")
cubed = TruncatedSeries.monomial(ctx, 3)
d = derivative(cubed)
print("d(t^3)              =", d)
back = integrate(d)
print("integrate(d(t^3))   =", back, f"  at reduced precision N = {back.context.N}")

print("a unit t^2 dt has no antiderivative over W:")
try:
    integrate(OneForm(TruncatedSeries.monomial(ctx, 2)))
except NonIntegrable as exc:
    print("  NonIntegrable at body degree", exc.degree)

print("\n-- the Frobenius lift --")
f = one + t + TruncatedSeries.monomial(ctx, 4)
print("phi*(1 + t + t^4)   =", frobenius_pullback(f))
w = OneForm(one)
print("phi*(dt)            =", oneform_pullback(w))
a, b = one + t, one - t
assert frobenius_pullback(a * b) == frobenius_pullback(a) * frobenius_pullback(b)
print("phi* is a ring map:  phi*(ab) = phi*(a) phi*(b)  (checked)")
