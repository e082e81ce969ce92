"""F-crystal presentations over the truncated ring and their invariants.

A presentation fixes a basis: the Frobenius and connection matrices have
column j equal to the coordinates of the image of basis vector j, and the
pairing matrix is the Gram matrix of the basis.  Frobenius is linear (not
just semilinear) because the coefficient field is F_p, which is what makes
Newton slopes readable off a characteristic polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (ContextMismatch, NonInvertible, NotConstant, NotPerfect,
                     NotStable, PrecisionInsufficient, UnsupportedHeight)
from .padic_series import PrecisionContext, TruncatedSeries, p_valuation
from .series_matrix import SeriesMatrix, det_mod_p

STANDARD_WEIGHT = 2  # Frobenius scales the cup-product pairing by p^2


@dataclass(frozen=True)
class FCrystalPresentation:
    """Rank-r module with Frobenius, connection and pairing matrices.

    frobenius_shift records a formal Tate twist: the intended Frobenius is
    p^frobenius_shift times the stored (always p-integral) matrix.  It is
    zero everywhere except for internal-hom constructions whose twist does
    not clear denominators.
    """

    context: PrecisionContext
    rank: int
    frobenius: SeriesMatrix
    connection: SeriesMatrix  # matrix of one-form bodies
    pairing: SeriesMatrix
    weight: int
    frobenius_shift: int = 0

    def __post_init__(self):
        for name in ("frobenius", "connection", "pairing"):
            m = getattr(self, name)
            if m.rows != self.rank or m.cols != self.rank:
                raise ValueError(f"{name} must be {self.rank}x{self.rank}")
            if m.context != self.context:
                raise ValueError(f"{name} context differs from presentation context")

    def is_constant(self) -> bool:
        return self.connection.is_zero() and self.frobenius.is_constant()


@dataclass(frozen=True)
class SlopeMultiset:
    """Newton slopes with multiplicities, sorted ascending."""

    entries: tuple  # of (Fraction, int)

    @classmethod
    def from_pairs(cls, pairs):
        merged = {}
        for s, m in pairs:
            merged[s] = merged.get(s, 0) + m
        return cls(tuple(sorted((Fraction(s), int(m)) for s, m in merged.items()
                                if m)))

    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.entries)

    def weighted_sum(self) -> Fraction:
        return sum((s * m for s, m in self.entries), Fraction(0))

    def shift(self, k: int) -> "SlopeMultiset":
        return SlopeMultiset(tuple((s + k, m) for s, m in self.entries))

    def to_json(self):
        return [[str(s), m] for s, m in self.entries]

    def __str__(self):
        return "{" + ", ".join(f"{s} x{m}" for s, m in self.entries) + "}"


@dataclass(frozen=True)
class HorizontalityReport:
    passed: bool
    residual: SeriesMatrix


@dataclass(frozen=True)
class PairingReport:
    symmetric: bool
    frobenius_compatible: bool
    flat: bool
    perfect: bool
    residuals: dict = field(compare=False)

    @property
    def passed(self) -> bool:
        """The three structural pairing identities; perfectness is reported
        separately because totally isotropic summands carry a zero Gram block."""
        return self.symmetric and self.frobenius_compatible and self.flat


def _check_height(h):
    if not (2 <= h <= 10):
        raise UnsupportedHeight(f"height must lie in [2, 10], got {h}")


def make_standard_crystal(ctx: PrecisionContext, h: int, kind: str,
                          rho: int | None = None) -> FCrystalPresentation:
    """Constant normal-form crystals.

    sub1:   rank h, cyclic Frobenius with one p on each step except the
            wrap-around step (slope (h-1)/h).
    super1: rank h, cyclic with one p on each step and p^2 on the wrap-around
            (slope (h+1)/h).
    slope1: rank rho, Frobenius p times the identity, identity pairing.
    pair:   sub1 (+) super1 with the unimodular antidiagonal pairing between
            the two blocks.
    """
    _check_height(h)
    p = ctx.p

    def cyclic(wrap_weight):
        rows = [[0] * h for _ in range(h)]
        for i in range(h):
            rows[(i + 1) % h][i] = wrap_weight if i == h - 1 else p
        return SeriesMatrix.from_int_rows(ctx, rows)

    if kind in ("sub1", "super1"):
        f = cyclic(1 if kind == "sub1" else p * p)
        return FCrystalPresentation(ctx, h, f, SeriesMatrix.zeros(ctx, h, h),
                                    SeriesMatrix.zeros(ctx, h, h), STANDARD_WEIGHT)
    if kind == "slope1":
        if rho is None or rho < 0:
            raise ValueError("slope1 requires a non-negative rank rho")
        f = SeriesMatrix.identity(ctx, rho, scale=p)
        return FCrystalPresentation(ctx, rho, f, SeriesMatrix.zeros(ctx, rho, rho),
                                    SeriesMatrix.identity(ctx, rho), STANDARD_WEIGHT)
    if kind == "pair":
        sub = make_standard_crystal(ctx, h, "sub1")
        sup = make_standard_crystal(ctx, h, "super1")
        f = SeriesMatrix.block(ctx, [
            [sub.frobenius, SeriesMatrix.zeros(ctx, h, h)],
            [SeriesMatrix.zeros(ctx, h, h), sup.frobenius]])
        ident = SeriesMatrix.identity(ctx, h)
        g = SeriesMatrix.block(ctx, [
            [SeriesMatrix.zeros(ctx, h, h), ident],
            [ident, SeriesMatrix.zeros(ctx, h, h)]])
        return FCrystalPresentation(ctx, 2 * h, f, SeriesMatrix.zeros(ctx, 2 * h, 2 * h),
                                    g, STANDARD_WEIGHT)
    raise ValueError(f"unknown kind {kind!r}")


def direct_sum(c1: FCrystalPresentation, c2: FCrystalPresentation) -> FCrystalPresentation:
    if c1.context != c2.context or c1.weight != c2.weight \
            or c1.frobenius_shift != c2.frobenius_shift:
        raise ValueError("direct sum requires matching context, weight and shift")
    ctx = c1.context
    z12 = SeriesMatrix.zeros(ctx, c1.rank, c2.rank)
    z21 = SeriesMatrix.zeros(ctx, c2.rank, c1.rank)

    def blk(a, b):
        return SeriesMatrix.block(ctx, [[a, z12], [z21, b]])

    return FCrystalPresentation(ctx, c1.rank + c2.rank,
                                blk(c1.frobenius, c2.frobenius),
                                blk(c1.connection, c2.connection),
                                blk(c1.pairing, c2.pairing),
                                c1.weight, c1.frobenius_shift)


def check_horizontality(c: FCrystalPresentation) -> HorizontalityReport:
    """Machine form of the compatibility dF + A.F = F.phi*(A).p t^(p-1).

    The residual is trusted through degree M-1 (differentiation loses the
    top coefficient), so the verdict ignores the degree-M layer.
    """
    if c.rank == 0:
        return HorizontalityReport(True, c.frobenius)
    f, a = c.frobenius, c.connection
    residual = f.derivative_bodies() + (a @ f) - (f @ a.oneform_pullback_bodies())
    return HorizontalityReport(residual.is_zero_through(c.context.M - 1), residual)


def check_pairing_compat(c: FCrystalPresentation) -> PairingReport:
    """Pairing symmetry, Frobenius compatibility at the declared weight,
    flatness against the connection, and perfectness (unit Gram determinant)."""
    if c.rank == 0:
        z = c.pairing
        return PairingReport(True, True, True, True, {"frobenius": z, "flat": z})
    ctx = c.context
    g, f, a = c.pairing, c.frobenius, c.connection
    sym = g == g.transpose()

    w_eff = c.weight - 2 * c.frobenius_shift
    lhs = f.transpose() @ g @ f
    rhs = g.phi_pullback()
    if w_eff >= 0:
        rhs = rhs.scale_int(ctx.p ** w_eff)
    else:
        lhs = lhs.scale_int(ctx.p ** (-w_eff))
    frob_res = lhs - rhs
    frob = frob_res.is_zero()

    flat_res = g.derivative_bodies() - (a.transpose() @ g) - (g @ a)
    flat = flat_res.is_zero_through(ctx.M - 1)

    perfect = det_mod_p(g.constant_layer(), ctx.p) != 0
    return PairingReport(sym, frob, flat, perfect,
                         {"frobenius": frob_res, "flat": flat_res})


# -- characteristic polynomials and Newton polygons --------------------------


def _charpoly_generalized_permutation(rows):
    """Char poly for matrices with at most one nonzero per row and column,
    via cycle decomposition.  Returns None if the shape does not apply."""
    n = len(rows)
    image = {}
    seen_rows = set()
    for j in range(n):
        hits = [i for i in range(n) if rows[i][j]]
        if len(hits) > 1:
            return None
        if hits:
            i = hits[0]
            if i in seen_rows:
                return None
            seen_rows.add(i)
            image[j] = (i, rows[i][j])
    factors = []  # (cycle_length, cycle_weight)
    visited = set()
    for j0 in image:
        if j0 in visited:
            continue
        path = []
        j = j0
        while j in image and j not in path:
            if j in visited:
                break
            path.append(j)
            j = image[j][0]
        if j in path:  # closed a cycle
            start = path.index(j)
            cyc = path[start:]
            w = 1
            for jj in cyc:
                w *= image[jj][1]
            factors.append((len(cyc), w))
            visited.update(path)
        else:
            visited.update(path)
    # poly = x^(n - sum lengths) * prod (x^L - W), coefficients high->low
    poly = [1]
    for length, w in factors:
        new = [0] * (len(poly) + length)
        for i, cc in enumerate(poly):
            new[i] += cc
            new[i + length] -= cc * w
        poly = new
    pad = n + 1 - len(poly)
    return poly + [0] * pad


def _charpoly_berkowitz(rows):
    """Division-free characteristic polynomial; coefficients high->low."""
    n = len(rows)
    poly = [1]
    for k in range(1, n + 1):
        a = rows[k - 1][k - 1]
        r_vec = rows[k - 1][:k - 1]
        c_vec = [rows[i][k - 1] for i in range(k - 1)]
        col = [1, -a]
        vec = c_vec
        for j in range(2, k + 1):
            if j > 2:
                vec = [sum(rows[i][l] * vec[l] for l in range(k - 1))
                       for i in range(k - 1)]
            col.append(-sum(r_vec[l] * vec[l] for l in range(k - 1)))
        new = [0] * (k + 1)
        for i in range(k + 1):
            s = 0
            lo = max(0, i - (len(col) - 1))
            for j in range(lo, min(i, k - 1) + 1):
                s += col[i - j] * poly[j]
            new[i] = s
        poly = new
    return poly


def charpoly_int(rows):
    """Exact characteristic polynomial det(xI - A) of an integer matrix.

    Coefficients are returned from x^n down to x^0.
    """
    fast = _charpoly_generalized_permutation(rows)
    if fast is not None:
        return fast
    return _charpoly_berkowitz(rows)


def _lower_hull(points):
    """Lower convex hull of (x, y) points sorted by x; returns the vertices."""
    hull = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] if it lies on or above segment hull[-2] -> pt
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def newton_slopes(c: FCrystalPresentation) -> SlopeMultiset:
    """Slopes of the p-adic Newton polygon of the characteristic polynomial
    of the Frobenius at the closed point t = 0.

    The canonical integer lift of the Frobenius matrix is taken as exact
    data.  Coefficients that vanish as residues carry the precision-capped
    valuation (zero means "at least N"), so a vanishing determinant block
    contributes slopes reported as N.  A finite polygon slope exceeding N
    cannot be expressed on the precision scale and raises
    PrecisionInsufficient.  The formal Tate twist shifts every slope.
    """
    if not c.is_constant():
        raise NotConstant("newton_slopes requires a constant presentation")
    n = c.rank
    if n == 0:
        return SlopeMultiset(())
    ctx = c.context
    p, N = ctx.p, ctx.N
    rows = c.frobenius.constant_layer()
    coeffs = charpoly_int(rows)  # x^n .. x^0
    a = [coeffs[n - i] for i in range(n + 1)]  # a[i] = coeff of x^i

    points = [(i, Fraction(p_valuation(a[i], p))) for i in range(n + 1) if a[i]]
    z = points[0][0]  # leading zero coefficients: valuations off the scale
    hull = _lower_hull(points)

    pairs = []
    if z > 0:
        pairs.append((Fraction(N), z))
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slope = Fraction(y1 - y2, x2 - x1)
        if slope > N:
            raise PrecisionInsufficient(
                f"polygon slope {slope} exceeds the p-adic precision {N}")
        pairs.append((slope, x2 - x1))
    ms = SlopeMultiset.from_pairs(pairs)
    if c.frobenius_shift:
        ms = ms.shift(c.frobenius_shift)
    return ms


# -- internal hom with a Tate twist ------------------------------------------


def _fraction_inverse(rows):
    n = len(rows)
    a = [[Fraction(x) for x in row] for row in rows]
    inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            raise NonInvertible("zero determinant at the working precision")
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            inv[k], inv[piv] = inv[piv], inv[k]
        f = a[k][k]
        a[k] = [x / f for x in a[k]]
        inv[k] = [x / f for x in inv[k]]
        for i in range(n):
            if i != k and a[i][k] != 0:
                g = a[i][k]
                a[i] = [x - g * y for x, y in zip(a[i], a[k])]
                inv[i] = [x - g * y for x, y in zip(inv[i], inv[k])]
    return inv


def hom_crystal(c1: FCrystalPresentation, c2: FCrystalPresentation,
                twist: int) -> FCrystalPresentation:
    """Internal hom on r1*r2 basis vectors with Frobenius
    p^twist * (F1^(-T) kron F2), computed over the fraction-field lift.

    If the twist leaves negative p-valuations, the stored matrix is scaled
    p-integral and the deficit is recorded in frobenius_shift, so slope
    arithmetic still reports twist + s2 - s1.
    """
    if c1.context != c2.context:
        raise ContextMismatch("hom_crystal requires a shared context")
    if not (c1.is_constant() and c2.is_constant()):
        raise NotConstant("hom_crystal requires constant presentations")
    ctx = c1.context
    p = ctx.p
    f1 = c1.frobenius.constant_layer()
    f2 = c2.frobenius.constant_layer()
    inv1 = _fraction_inverse(f1)
    r1, r2 = c1.rank, c2.rank
    n = r1 * r2
    tw = Fraction(p) ** twist if twist >= 0 else Fraction(1, p ** (-twist))

    entries = {}
    min_v = 0
    for i in range(r1):
        for k in range(r1):
            base = inv1[k][i] * tw  # (F1^-T)[i][k] = F1^-1[k][i]
            if base == 0:
                continue
            for j in range(r2):
                for l in range(r2):
                    x = base * f2[j][l]
                    if x == 0:
                        continue
                    entries[(i * r2 + j, k * r2 + l)] = x
                    v = p_valuation(x.numerator, p) - p_valuation(x.denominator, p)
                    min_v = min(min_v, v)
    shift = min_v  # <= 0
    scale = p ** (-shift)
    mod = ctx.modulus
    rows = [[0] * n for _ in range(n)]
    for (i, j), x in entries.items():
        y = x * scale  # p-integral by the choice of shift
        if y.denominator % p == 0:
            raise NonInvertible("scaled hom entry is not p-integral")
        rows[i][j] = (y.numerator % mod) * pow(y.denominator, -1, mod) % mod
    f = SeriesMatrix.from_int_rows(ctx, rows)
    return FCrystalPresentation(ctx, n, f, SeriesMatrix.zeros(ctx, n, n),
                                SeriesMatrix.zeros(ctx, n, n), 0, shift)


# -- orthogonal complements ---------------------------------------------------


@dataclass(frozen=True)
class ComplementResult:
    presentation: FCrystalPresentation
    basis: SeriesMatrix  # columns are ambient coordinates of the new basis
    free_rows: tuple


def _as_subspace_matrix(ctx, rank, vectors):
    cols = []
    for vec in vectors:
        if len(vec) != rank:
            raise ValueError("subspace vector has wrong length")
        cols.append(vec)
    rows = [[cols[j][i] for j in range(len(cols))] for i in range(rank)]
    return SeriesMatrix.from_series_rows(ctx, rows)


def induced_subpresentation(c: FCrystalPresentation, basis: SeriesMatrix,
                            free_rows) -> FCrystalPresentation:
    """Presentation induced on the span of basis columns.

    basis restricted to free_rows must be the identity; coordinates of
    images are read off there and the full closure equations are verified,
    raising NotStable when the span is not preserved.
    """
    ctx = c.context
    free_rows = list(free_rows)
    rhs_f = c.frobenius @ basis.phi_pullback()
    f_new = rhs_f.select_rows(free_rows)
    if basis @ f_new != rhs_f:
        raise NotStable("computed complement is not Frobenius-stable")
    rhs_a = basis.derivative_bodies() + (c.connection @ basis)
    a_new = rhs_a.select_rows(free_rows)
    check = basis @ a_new
    if not (check - rhs_a).is_zero_through(ctx.M - 1):
        raise NotStable("computed complement is not connection-stable")
    a_new = a_new.truncate_degree(ctx.M - 1) if ctx.M >= 1 else a_new
    g_new = basis.transpose() @ c.pairing @ basis
    return FCrystalPresentation(ctx, basis.cols, f_new, a_new, g_new,
                                c.weight, c.frobenius_shift)


def orthogonal_complement(c: FCrystalPresentation, subspace) -> ComplementResult:
    """Perpendicular of the span of the given coordinate vectors.

    Requires the pairing restricted to the subspace to be perfect (unit
    Gram determinant).  Solves the annihilator equations by elimination
    over the local ring with unit pivots chosen at minimal p-valuation,
    ties broken by lowest row then column.
    """
    ctx = c.context
    s = _as_subspace_matrix(ctx, c.rank, subspace)
    d = s.cols
    if d == 0:
        basis = SeriesMatrix.identity(ctx, c.rank)
        return ComplementResult(c, basis, tuple(range(c.rank)))
    gram = s.transpose() @ c.pairing @ s
    if det_mod_p(gram.constant_layer(), ctx.p) == 0:
        raise NotPerfect("pairing restricted to the subspace is degenerate")

    bt = s.transpose() @ c.pairing
    b = [[bt.entry(i, j) for j in range(c.rank)] for i in range(d)]
    pivot_cols = []
    pivot_rows = []
    for step in range(d):
        best = None
        for i in range(d):
            if i in pivot_rows:
                continue
            for j in range(c.rank):
                if j in pivot_cols:
                    continue
                c0 = b[i][j].constant_term()
                if c0 == 0:
                    continue
                v = p_valuation(c0, ctx.p)
                key = (v, i, j)
                if best is None or key < best:
                    best = key
        if best is None or best[0] > 0:
            raise NotPerfect("no unit pivot available during elimination")
        _, pi, pj = best
        inv = b[pi][pj].inverse()
        b[pi] = [x * inv for x in b[pi]]
        for i in range(d):
            if i != pi and not b[i][pj].is_zero():
                f = b[i][pj]
                b[i] = [x - f * y for x, y in zip(b[i], b[pi])]
        pivot_rows.append(pi)
        pivot_cols.append(pj)

    free_cols = [j for j in range(c.rank) if j not in pivot_cols]
    zero = TruncatedSeries.zero(ctx)
    one = TruncatedSeries.one(ctx)
    cols = []
    for fcol in free_cols:
        vec = [zero] * c.rank
        vec[fcol] = one
        for prow, pcol in zip(pivot_rows, pivot_cols):
            vec[pcol] = -b[prow][fcol]
        cols.append(vec)
    basis = _as_subspace_matrix(ctx, c.rank, cols)
    pres = induced_subpresentation(c, basis, free_cols)
    return ComplementResult(pres, basis, tuple(free_cols))
