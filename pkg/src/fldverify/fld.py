"""Linear algebra over the rational-function field of the coordinates:
functional-linear-dependence detection and verification, constant-coefficient
rank, numeric functional rank, the first-order-symmetry construction from an
FLD relation, parametric FLD conditions and class-membership reports.
"""

from __future__ import annotations

import random

from gmpy2 import mpq

import numpy as np

from .linalg import (bareiss_echelon, clear_denominators, field_rank,
                     poly_nullspace, qi_rank, qi_solve)
from .phasespace import Chart, Hamiltonian, Symmetry, poisson
from .poly import Poly, mon_degree
from .ratexpr import RatExpr, collect, derive, eval_numeric, zero
from .scalars import ONE, QI, ZERO


class FLDError(ValueError):
    pass


# -- momentum matrices -----------------------------------------------------------


class MomentumMatrix:
    """One row per symmetry; columns are the chart's six quadratic momentum
    monomials p1^2, p2^2, p3^2, p1p2, p1p3, p2p3; entries free of momenta."""

    def __init__(self, chart: Chart, labels, rows):
        self.chart = chart
        self.labels = list(labels)
        self.rows = rows

    @staticmethod
    def from_symmetries(chart: Chart, symmetries) -> "MomentumMatrix":
        labels = []
        rows = []
        pg = chart.momentum_gids()
        cols = [((pg[i], 1), (pg[j], 1)) if i != j else ((pg[i], 2),)
                for i, j in chart.quad_monomials()]
        for s in symmetries:
            expr = s.s0_expr() if isinstance(s, Symmetry) else s
            label = s.label if isinstance(s, Symmetry) else f"row{len(labels)}"
            decomp = collect(expr, pg)
            row = []
            for mono in decomp:
                if mon_degree(mono) != 2:
                    raise FLDError(f"{label}: non-quadratic momentum term")
            for col in cols:
                row.append(decomp.get(col, zero(chart.ctx)))
            labels.append(label)
            rows.append(row)
        return MomentumMatrix(chart, labels, rows)


class FLDRelation:
    """Coefficients f_k with sum f_k * S_k^0 = 0, polynomial-normalized."""

    def __init__(self, labels, coeffs):
        if all(c.is_zero() for c in coeffs):
            raise FLDError("FLD relation with all-zero coefficients")
        self.labels = list(labels)
        self.coeffs = normalize_vector(coeffs)

    def is_functional(self) -> bool:
        return any(not c.is_const() for c in self.coeffs)

    def __repr__(self):
        inner = ", ".join(f"{l}: {c!r}" for l, c in zip(self.labels, self.coeffs))
        return f"<FLD {inner}>"


def normalize_vector(coeffs):
    """Clear denominators, remove integer content, fix the sign so the first
    nonzero coefficient has positive real part (positive imaginary if the real
    part vanishes)."""
    if not coeffs:
        return coeffs
    ctx = coeffs[0].ctx
    polys = clear_denominators(list(coeffs))
    qs = []
    for p in polys:
        for c in p.terms.values():
            if c.re:
                qs.append(c.re)
            if c.im:
                qs.append(c.im)
    if not qs:
        return [RatExpr.from_poly(p) for p in polys]
    num_gcd = 0
    den_lcm = 1
    for q in qs:
        num_gcd = _gcd(num_gcd, abs(q.numerator))
        den_lcm = _lcm(den_lcm, q.denominator)
    scale = QI(mpq(den_lcm, num_gcd)) if num_gcd else ONE
    polys = [p.scale(scale) for p in polys]
    lead = next(p for p in polys if not p.is_zero()).leading_coeff()
    if lead.re < 0 or (not lead.re and lead.im < 0):
        polys = [p.scale(QI(-1)) for p in polys]
    return [RatExpr.from_poly(p) for p in polys]


def _gcd(a, b):
    a, b = int(a), int(b)
    while b:
        a, b = b, a % b
    return a


def _lcm(a, b):
    a, b = int(a), int(b)
    return a * b // _gcd(a, b) if a and b else a or b


# -- kernels and ranks ---------------------------------------------------------------


def fld_kernel(m: MomentumMatrix) -> list[FLDRelation]:
    """Basis of the left kernel over the rational-function field.

    Computed by fraction-free elimination on the transpose; every returned
    relation is re-verified against the rows before being handed back.
    """
    ctx = m.chart.ctx
    nr = len(m.rows)
    if nr == 0:
        return []
    cols = [clear_denominators([m.rows[r][c] for r in range(nr)])
            for c in range(len(m.rows[0]))]
    transposed = [[cols[c][r] for r in range(nr)] for c in range(len(cols))]
    kernel = poly_nullspace(transposed, ctx)
    out = []
    for vec in kernel:
        rel = FLDRelation(m.labels, vec)
        if not _kernel_selfcheck(m, rel):
            raise FLDError("kernel self-check failed; elimination is inconsistent")
        out.append(rel)
    return out


def _kernel_selfcheck(m: MomentumMatrix, rel: FLDRelation) -> bool:
    for c in range(len(m.rows[0])):
        s = zero(m.chart.ctx)
        for r in range(len(m.rows)):
            if not rel.coeffs[r].is_zero() and not m.rows[r][c].is_zero():
                s = s + rel.coeffs[r] * m.rows[r][c]
        if not s.is_zero():
            return False
    return True


def verify_fld(rel: FLDRelation, symmetries) -> bool:
    """True iff sum f_k * S_k^0 is identically zero."""
    if len(rel.coeffs) != len(symmetries):
        raise FLDError("label/symmetry count mismatch")
    total = None
    for c, s in zip(rel.coeffs, symmetries):
        expr = s.s0_expr() if isinstance(s, Symmetry) else s
        term = c * expr
        total = term if total is None else total + term
    return total.is_zero()


def span_vectors(exprs, ctx):
    """Exact coefficient vectors of expressions over a shared monomial basis.

    Entries are brought over a common denominator first, so constant linear
    relations between the expressions map to relations between the vectors.
    """
    exprs = list(exprs)
    dens = []
    for e in exprs:
        if not e.den.is_one() and not any(e.den == d for d in dens):
            dens.append(e.den)
    polys = []
    for e in exprs:
        p = e.num
        for d in dens:
            if d == e.den:
                continue
            p = p * d
        polys.append(p)
    keys = sorted({m for p in polys for m in p.terms})
    index = {m: i for i, m in enumerate(keys)}
    vecs = []
    for p in polys:
        v = [ZERO] * len(keys)
        for m, c in p.terms.items():
            v[index[m]] = c
        vecs.append(v)
    return keys, vecs


def constant_rank(symmetries, ctx=None) -> int:
    """Rank over the scalars of the expanded momentum parts."""
    exprs = [s.s0_expr() if isinstance(s, Symmetry) else s for s in symmetries]
    if not exprs:
        return 0
    _, vecs = span_vectors(exprs, exprs[0].ctx)
    return qi_rank(vecs)


def in_constant_span(target, exprs):
    """Exact coefficients writing target as a constant combination, or None."""
    allv = list(exprs) + [target]
    _, vecs = span_vectors(allv, target.ctx)
    cols = vecs[:-1]
    b = vecs[-1]
    n = len(b)
    return qi_solve([[col[i] for i in range(n)] for col in cols], b)


# -- numeric functional rank --------------------------------------------------------------


def random_phase_point(ctx, rng, bound_params=None):
    """Random complex values for every generator, mirroring the CLI sampling
    box: components uniform in [-2,-1/2] u [1/2,2].  Relation atoms get the
    principal square root of their relation; other atoms are independent
    transcendentals and receive independent values."""
    def draw():
        def comp():
            v = rng.uniform(0.5, 2.0)
            return -v if rng.random() < 0.5 else v
        return complex(comp(), comp())

    values = {}
    for g in ctx.gens:
        if g.relation is not None:
            continue
        if bound_params and g.name in bound_params:
            values[g.gid] = complex(bound_params[g.name])
        else:
            values[g.gid] = draw()
    for g in ctx.gens:
        if g.relation is not None:
            values[g.gid] = g.relation.eval(values) ** 0.5
    return values


def functional_rank(exprs, chart: Chart, trials: int = 8, seed: int = 0,
                    bound_params=None) -> int:
    """Maximum over sampled points of the numeric Jacobian rank of exprs with
    respect to all coordinates and momenta (relative tolerance 1e-8)."""
    if trials < 5:
        raise FLDError("functional_rank needs at least 5 trials")
    ctx = chart.ctx
    var_gids = chart.coordinate_gids() + chart.momentum_gids()
    jac = [[derive(e, v) for v in var_gids] for e in exprs]
    rng = random.Random(seed)
    best = 0
    failures = 0
    done = 0
    while done < trials:
        values = random_phase_point(ctx, rng, bound_params)
        try:
            rows = []
            for r in jac:
                rows.append([_eval_at(e, values) for e in r])
        except ArithmeticError:
            failures += 1
            if failures > 50 * trials:
                raise FLDError("all sampled points hit singularities")
            continue
        a = np.array(rows, dtype=complex)
        s = np.linalg.svd(a, compute_uv=False)
        if len(s):
            best = max(best, int(np.sum(s > 1e-8 * max(s[0], 1e-300))))
        done += 1
    return best


def _eval_at(e: RatExpr, values: dict) -> complex:
    den = e.den.eval(values)
    if abs(den) < 1e-12:
        raise ArithmeticError("singular point")
    return e.num.eval(values) / den


# -- the first-order-symmetry construction ----------------------------------------------------


class CTensor:
    """c_k^{ij} = sum_l (d f_l / d x_k) a_l^{ij}, with its consistency checks."""

    def __init__(self, chart: Chart, entries: dict):
        self.chart = chart
        self.entries = entries  # (k, i, j) with i<=j -> RatExpr

    def c(self, k: int, i: int, j: int) -> RatExpr:
        if i > j:
            i, j = j, i
        return self.entries[(k, i, j)]

    def defect_conditions(self):
        """The defining identities a genuine FLD relation must satisfy."""
        out = []
        for i in range(3):
            out.append(self.c(i, i, i))
            for j in range(3):
                if i != j:
                    out.append(self.c(j, i, i) + self.c(i, i, j).scale(QI(2)))
        out.append(self.c(2, 0, 1) + self.c(0, 1, 2) + self.c(1, 2, 0))
        return out

    def lemma_conditions(self):
        """Derivative identities d_i(c_k^{ij} - c_j^{ik}) for distinct i,j,k.

        The corresponding identities with repeated indices hold only up to the
        scalar rescaling freedom of the relation; what survives of them is that
        the normalized first-order candidates are divergence-free, which
        killing_candidates checks directly.
        """
        cg = self.chart.coordinate_gids()
        out = []
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    if len({i, j, k}) == 3:
                        out.append(derive(self.c(k, i, j) - self.c(j, i, k), cg[i]))
        return out

    def lemma_ok(self) -> bool:
        return all(c.is_zero() for c in self.lemma_conditions())


def c_tensor(rel: FLDRelation, symmetries, chart: Chart) -> CTensor:
    """Build the coefficient tensor of the first-order condition.

    The relation is solved for a pivot momentum part (the last symmetry with a
    nonzero coefficient) and differentiated; the defining identities are
    asserted before returning.
    """
    pivot = max(k for k, c in enumerate(rel.coeffs) if not c.is_zero())
    fp = rel.coeffs[pivot]
    fs = {}
    for k, c in enumerate(rel.coeffs):
        if k == pivot or c.is_zero():
            continue
        fs[k] = -(c / fp)
    from .phasespace import quadratic_matrix
    mats = {}
    for k in fs:
        s = symmetries[k]
        mats[k] = s.s0_matrix() if isinstance(s, Symmetry) else quadratic_matrix(chart, s)
    cg = chart.coordinate_gids()
    entries = {}
    for k in range(3):
        dfs = {l: derive(f, cg[k]) for l, f in fs.items()}
        for i in range(3):
            for j in range(i, 3):
                total = zero(chart.ctx)
                for l, df in dfs.items():
                    if not df.is_zero():
                        total = total + df * mats[l][i][j]
                entries[(k, i, j)] = total
    ct = CTensor(chart, entries)
    for cond in ct.defect_conditions():
        if not cond.is_zero():
            raise FLDError("defining identities violated: input is not a genuine "
                           "FLD relation of Killing tensors")
    return ct


def _normalize_direction(comps, ctx):
    """Strip the common scalar-function factor of a component row.

    The row of the first-order condition is only determined up to an overall
    function; the direction (1, B/A, C/A) cleared of denominators and content
    is the candidate first-order form proper.
    """
    lead = next((k for k, c in enumerate(comps) if not c.is_zero()), None)
    if lead is None:
        return None
    ratios = []
    for k, c in enumerate(comps):
        if k < lead:
            ratios.append(zero(ctx))
        elif k == lead:
            ratios.append(one_expr(ctx))
        else:
            ratios.append(c / comps[lead])
    return normalize_vector(ratios)


def one_expr(ctx):
    from .ratexpr import one
    return one(ctx)


def killing_candidates(ct: CTensor, hamiltonian: Hamiltonian | None = None):
    """The three candidate first-order forms read from the rows of the
    first-order potential condition.

    Each row is normalized by its overall scalar-function factor; the
    normalized form is flagged with whether the raw row vanishes, whether the
    form commutes with the kinetic term, whether it is divergence-free, and
    whether it annihilates the potential.
    """
    chart = ct.chart
    rows = [
        (ct.c(0, 0, 1) - ct.c(1, 0, 0), ct.c(0, 1, 1) - ct.c(1, 0, 1), ct.c(0, 1, 2) - ct.c(1, 0, 2)),
        (ct.c(0, 0, 2) - ct.c(2, 0, 0), ct.c(0, 1, 2) - ct.c(2, 0, 1), ct.c(0, 2, 2) - ct.c(2, 0, 2)),
        (ct.c(1, 0, 2) - ct.c(2, 0, 1), ct.c(1, 1, 2) - ct.c(2, 1, 1), ct.c(1, 2, 2) - ct.c(2, 1, 2)),
    ]
    cg = chart.coordinate_gids()
    out = []
    for comps in rows:
        direction = _normalize_direction(list(comps), chart.ctx)
        if direction is None:
            out.append({"expr": zero(chart.ctx), "zero": True, "killing": None,
                        "divergence_free": None, "annihilates_potential": None})
            continue
        expr = zero(chart.ctx)
        for a, c in enumerate(direction):
            expr = expr + c * chart.p(a)
        killing = poisson(chart.kinetic, expr, chart).is_zero()
        div_free = all(derive(direction[a], cg[a]).is_zero() for a in range(3))
        annihilates = None
        if hamiltonian is not None:
            annihilates = poisson(expr, hamiltonian.potential, chart).is_zero()
        out.append({"expr": expr, "zero": False, "killing": killing,
                    "divergence_free": div_free,
                    "annihilates_potential": annihilates})
    if all(c["zero"] for c in out):
        raise FLDError("all first-order candidates vanish; inconsistent input")
    return out


# -- parametric families -------------------------------------------------------------------


def fld_conditions(m: MomentumMatrix, param_names) -> list[Poly]:
    """Parameter polynomials whose common zeros are exactly the FLD points.

    Every maximal minor of the momentum matrix is expanded in coordinate
    monomials; the coefficients are polynomials in the declared parameters.
    """
    ctx = m.chart.ctx
    pgids = {ctx.get(p).gid for p in param_names}
    rows = [clear_denominators(r) for r in m.rows]
    nr = len(rows)
    nc = len(rows[0])
    if nr > nc:
        raise FLDError("more rows than columns; family cannot be independent")
    import itertools
    conds = []
    seen = set()
    for cols in itertools.combinations(range(nc), nr):
        minor = [[rows[r][c] for c in cols] for r in range(nr)]
        det = _poly_det(minor, ctx)
        for p in _split_by_monomials(det, pgids, ctx):
            key = frozenset(p.terms.items())
            if key not in seen:
                seen.add(key)
                conds.append(p)
    return conds


def _poly_det(m, ctx) -> Poly:
    n = len(m)
    if n == 1:
        return m[0][0]
    # cofactor expansion along the sparsest column
    best = min(range(n), key=lambda c: sum(0 if m[r][c].is_zero() else len(m[r][c].terms) + 1
                                           for r in range(n)))
    det = Poly.zero(ctx)
    sign = 1
    for r in range(n):
        a = m[r][best]
        s = 1 if (r + best) % 2 == 0 else -1
        if a.is_zero():
            continue
        sub = [[m[rr][cc] for cc in range(n) if cc != best] for rr in range(n) if rr != r]
        term = a * _poly_det(sub, ctx)
        det = det + (term if s > 0 else -term)
    return det


def _split_by_monomials(p: Poly, pgids, ctx) -> list[Poly]:
    groups: dict = {}
    for m, c in p.terms.items():
        par = []
        rest = []
        for g, e in m:
            (par if g in pgids else rest).append((g, e))
        groups.setdefault(tuple(rest), {})[tuple(par)] = c
    return [Poly(ctx, terms) for terms in groups.values()]


def evaluate_conditions(conds: list[Poly], bindings: dict, ctx) -> list[Poly]:
    """Substitute parameter values (RatExpr) into condition polynomials."""
    from .ratexpr import substitute
    out = []
    for p in conds:
        e = substitute(RatExpr.from_poly(p), bindings)
        if not e.is_poly():
            raise FLDError("parameter substitution produced a denominator")
        out.append(e.num)
    return out


# -- class membership ----------------------------------------------------------------------


def class_membership(basis, J: RatExpr, H: Hamiltonian, potential_terms=None,
                     seed: int = 0) -> dict:
    """Membership report for the distinguished class of FLD bases.

    Checks: (1) the kinetic momentum part and J^2 lie in the constant span of
    the basis momentum parts; (2) the span is contained in the span of its
    adjoint images under J; (3) the potential family has two functionally
    independent directions; plus the FLD kernel of the basis.
    """
    chart = H.chart
    s0s = [b.s0_expr() if isinstance(b, Symmetry) else b for b in basis]
    h0_in = in_constant_span(chart.kinetic, s0s) is not None
    j2_in = in_constant_span(J * J, s0s) is not None
    ad_images = [poisson(J, e, chart) for e in s0s]
    _, vecs_all = span_vectors(ad_images + s0s, chart.ctx)
    ad_vecs = vecs_all[:len(ad_images)]
    base_rank = qi_rank(ad_vecs)
    ad_closed = all(qi_rank(ad_vecs + [v]) == base_rank for v in vecs_all[len(ad_images):])
    mm = MomentumMatrix.from_symmetries(chart, basis)
    kernel = fld_kernel(mm)
    two_param = None
    if potential_terms is not None:
        two_param = functional_rank(potential_terms, chart, seed=seed) == 2
    return {
        "h0_and_j2_in_span": h0_in and j2_in,
        "h0_in_span": h0_in,
        "j2_in_span": j2_in,
        "ad_span_contains_basis": ad_closed,
        "two_parameter_potential": two_param,
        "fld_kernel": kernel,
        "in_class": bool(h0_in and j2_in and ad_closed and kernel
                         and (two_param is not False)),
    }
