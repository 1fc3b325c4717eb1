"""Charts, Hamiltonians, second-order symmetries and the Poisson bracket.

A Chart owns an ordered list of canonical coordinate/momentum pairs, a
kinetic term quadratic in the momenta, and whatever atoms its expressions
need.  All operations are pure; charts are frozen after construction apart
from jet atoms interned on demand.

The bracket convention is {f,g} = sum_i (df/dq_i dg/dp_i - df/dp_i dg/dq_i),
and the adjoint action of a first-order symmetry is Ad_J(S) = {J, S}.
"""

from __future__ import annotations

from .context import Context
from .poly import Poly, mon_degree
from .ratexpr import (RatExpr, RatExprError, collect, derive, gen_expr, one,
                      substitute, zero)
from .scalars import ONE, QI

# momentum-monomial column order for quadratic forms: the squares then the
# mixed products (1,2), (1,3), (2,3); indices are 0-based positions
QUAD_INDEX = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


class ChartError(ValueError):
    pass


class Chart:
    """A canonical coordinate system with a quadratic-in-momenta kinetic term."""

    def __init__(self, ctx: Context, coords, momenta, kinetic: RatExpr,
                 name: str = "chart", flat_frame=None):
        self.ctx = ctx
        self.coords = [ctx.get(c) if isinstance(c, str) else c for c in coords]
        self.momenta = [ctx.get(m) if isinstance(m, str) else m for m in momenta]
        if len(self.coords) != len(self.momenta):
            raise ChartError("coordinate/momentum lists differ in length")
        self.kinetic = kinetic
        self.name = name
        # expressions of the six flat-space linear generators p1,p2,p3,
        # J12,J13,J23 over this chart, when the chart is an image of flat space
        self.flat_frame = flat_frame
        self._check_kinetic()

    def _check_kinetic(self):
        by_deg = {}
        for mono, coeff in collect(self.kinetic, self.momentum_gids()).items():
            by_deg.setdefault(mon_degree(mono), []).append(coeff)
        if set(by_deg) != {2}:
            raise ChartError("kinetic term must be homogeneous of degree 2 in momenta")

    def momentum_gids(self):
        return [m.gid for m in self.momenta]

    def coordinate_gids(self):
        return [c.gid for c in self.coords]

    def dim(self) -> int:
        return len(self.coords)

    def q(self, i: int) -> RatExpr:
        return gen_expr(self.ctx, self.coords[i].gid)

    def p(self, i: int) -> RatExpr:
        return gen_expr(self.ctx, self.momenta[i].gid)

    def quad_monomials(self):
        """The six (0-based i<=j) momentum pair indices in column order."""
        if self.dim() != 3:
            raise ChartError("quadratic monomial table is for 3D charts")
        return QUAD_INDEX

    def kinetic_matrix(self):
        """Symmetric 3x3 matrix G with kinetic = sum g^ij p_i p_j."""
        return quadratic_matrix(self, self.kinetic)

    def __repr__(self):
        return f"<Chart {self.name}: {'/'.join(c.name for c in self.coords)}>"


def quadratic_matrix(chart: Chart, expr: RatExpr):
    """Coefficient matrix a^ij of a quadratic momentum form (a^ij symmetric)."""
    n = chart.dim()
    pg = chart.momentum_gids()
    half = QI.from_rational(1, 2)
    rows = [[zero(chart.ctx) for _ in range(n)] for _ in range(n)]
    for mono, coeff in collect(expr, pg).items():
        if mon_degree(mono) != 2:
            raise ChartError("expression is not purely quadratic in momenta")
        if len(mono) == 1:
            i = pg.index(mono[0][0])
            rows[i][i] = coeff
        else:
            i = pg.index(mono[0][0])
            j = pg.index(mono[1][0])
            c = coeff.scale(half)
            rows[i][j] = c
            rows[j][i] = c
    return rows


class Hamiltonian:
    def __init__(self, chart: Chart, potential: RatExpr):
        if set(potential.gids()) & set(chart.momentum_gids()):
            raise ChartError("potential must be free of momenta")
        self.chart = chart
        self.potential = potential
        self.expr = chart.kinetic + potential


class Symmetry:
    """A second-order constant of the motion split as S = S0 + W."""

    def __init__(self, chart: Chart, label: str, s0: dict, w: RatExpr):
        self.chart = chart
        self.label = label
        # s0 maps (i, j) с i<=j to the coefficient a^ij (= a^ji)
        self.s0 = {}
        for (i, j), c in s0.items():
            if i > j:
                i, j = j, i
            self.s0[(i, j)] = c
        self.w = w
        self._s0_expr = None

    @staticmethod
    def from_expr(chart: Chart, label: str, expr: RatExpr) -> "Symmetry":
        """Split an expression quadratic in momenta plus a scalar part."""
        s0 = {}
        w = zero(chart.ctx)
        pg = chart.momentum_gids()
        half = QI.from_rational(1, 2)
        for mono, coeff in collect(expr, pg).items():
            d = mon_degree(mono)
            if d == 0:
                w = coeff
            elif d == 2:
                if len(mono) == 1:
                    i = pg.index(mono[0][0])
                    s0[(i, i)] = coeff
                else:
                    i = pg.index(mono[0][0])
                    j = pg.index(mono[1][0])
                    s0[(i, j)] = coeff.scale(half)
            else:
                raise ChartError(f"{label}: momentum degree {d} term in a 2nd-order symmetry")
        return Symmetry(chart, label, s0, w)

    def s0_expr(self) -> RatExpr:
        if self._s0_expr is None:
            chart = self.chart
            total = zero(chart.ctx)
            two = QI(2)
            for (i, j), a in self.s0.items():
                term = a * chart.p(i) * chart.p(j)
                if i != j:
                    term = term.scale(two)
                total = total + term
            self._s0_expr = total
        return self._s0_expr

    def expr(self) -> RatExpr:
        return self.s0_expr() + self.w

    def s0_matrix(self):
        n = self.chart.dim()
        rows = [[zero(self.chart.ctx) for _ in range(n)] for _ in range(n)]
        for (i, j), a in self.s0.items():
            rows[i][j] = a
            rows[j][i] = a
        return rows

    def __repr__(self):
        return f"<Symmetry {self.label}>"


# -- the canonical Poisson bracket ------------------------------------------------

def poisson(f: RatExpr, g: RatExpr, chart: Chart) -> RatExpr:
    out = zero(chart.ctx)
    for q, p in zip(chart.coords, chart.momenta):
        dgp = derive(g, p.gid)
        if not dgp.is_zero():
            dfq = derive(f, q.gid)
            if not dfq.is_zero():
                out = out + dfq * dgp
        dfp = derive(f, p.gid)
        if not dfp.is_zero():
            dgq = derive(g, q.gid)
            if not dgq.is_zero():
                out = out - dfp * dgq
    return out


def symmetry_residual(H: Hamiltonian, S: Symmetry) -> dict:
    """collect({H, S}, momenta): S is a constant of the motion iff all zero."""
    br = poisson(H.expr, S.expr(), H.chart)
    return collect(br, H.chart.momentum_gids())


def is_conserved(H: Hamiltonian, expr: RatExpr) -> bool:
    return poisson(H.expr, expr, H.chart).is_zero()


# -- Bertrand-Darboux machinery ------------------------------------------------------

def _invert3(m, ctx):
    a, b, c = m[0]
    d, e, f = m[1]
    g, h, k = m[2]
    det = a * (e * k - f * h) - b * (d * k - f * g) + c * (d * h - e * g)
    if det.is_zero():
        raise ChartError("kinetic matrix is singular")
    adj = [
        [e * k - f * h, c * h - b * k, b * f - c * e],
        [f * g - d * k, a * k - c * g, c * d - a * f],
        [d * h - e * g, b * g - a * h, a * e - b * d],
    ]
    return [[x / det for x in row] for row in adj]


def killing_residual(chart: Chart, s0_expr: RatExpr) -> RatExpr:
    """Degree-3 part of {kinetic, S0}; zero iff S0 is a Killing tensor."""
    return poisson(chart.kinetic, s0_expr, chart)


def _dw_candidate(chart: Chart, a_matrix, grad_v):
    g_inv = _invert3(chart.kinetic_matrix(), chart.ctx)
    av = [sum((a_matrix[i][j] * grad_v[j] for j in range(3)), zero(chart.ctx))
          for i in range(3)]
    return [sum((g_inv[i][j] * av[j] for j in range(3)), zero(chart.ctx))
            for i in range(3)]


def _closedness(chart: Chart, dw):
    out = []
    cg = chart.coordinate_gids()
    for i in range(3):
        for j in range(i + 1, 3):
            out.append(derive(dw[j], cg[i]) - derive(dw[i], cg[j]))
    return out


class NotKillingError(ChartError):
    def __init__(self, residual):
        self.residual = residual
        super().__init__("momentum part is not a Killing tensor of the kinetic term")


def bd_equations(s0, chart: Chart, base: str = "V"):
    """Integrability conditions on an abstract potential for S0 + W to be a symmetry.

    Returns the cross-derivative residuals of the candidate dW as expressions
    linear in the jet atoms of the abstract potential `base`.
    """
    if isinstance(s0, Symmetry):
        a = s0.s0_matrix()
        s0e = s0.s0_expr()
    else:
        a = quadratic_matrix(chart, s0)
        s0e = s0
    kr = killing_residual(chart, s0e)
    if not kr.is_zero():
        raise NotKillingError(kr)
    grad = [gen_expr(chart.ctx, chart.ctx.jet(base, (c,)).gid) for c in chart.coordinate_gids()]
    return _closedness(chart, _dw_candidate(chart, a, grad))


def bd_residual(H: Hamiltonian, s0) -> list:
    """Closedness residuals of the candidate dW at the concrete potential of H.

    All zero iff some W exists making S0 + W a constant of the motion.
    """
    chart = H.chart
    if isinstance(s0, Symmetry):
        a = s0.s0_matrix()
        s0e = s0.s0_expr()
    else:
        a = quadratic_matrix(chart, s0)
        s0e = s0
    kr = killing_residual(chart, s0e)
    if not kr.is_zero():
        raise NotKillingError(kr)
    grad = [derive(H.potential, c) for c in chart.coordinate_gids()]
    return _closedness(chart, _dw_candidate(chart, a, grad))


# -- chart changes -----------------------------------------------------------------------

def transport(e: RatExpr, bindings: dict, target_ctx: Context) -> RatExpr:
    """Rebuild e over another generator table.

    bindings maps source gids to target RatExpr; source generators absent from
    it are carried over by name.
    """
    src = e.ctx

    def carry(gid):
        b = bindings.get(gid)
        if b is not None:
            return b
        name = src.gens[gid].name
        if name not in target_ctx:
            raise ChartError(f"generator {name!r} has no image in the target chart")
        return gen_expr(target_ctx, target_ctx.get(name).gid)

    def conv(p: Poly) -> RatExpr:
        out = zero(target_ctx)
        for m, c in p.terms.items():
            term = RatExpr.from_poly(Poly.const(target_ctx, c))
            for g, ex in m:
                term = term * carry(g) ** ex
            out = out + term
        return out

    num = conv(e.num)
    den = conv(e.den)
    if den.is_zero():
        raise ChartError("chart change makes a denominator identically zero")
    return num / den


def induced_momentum_images(pulls: list, coord_gids: list, momentum_exprs: list):
    """Canonical momentum images for a point transformation.

    pulls[a] expresses old coordinate a over the new chart; the old momenta
    become (K^-T) p' with K the Jacobian of the pulls, which preserves all
    canonical brackets.
    """
    if not pulls:
        return []
    ctx = pulls[0].ctx
    n = len(pulls)
    jac = [[derive(pulls[a], coord_gids[b]) for b in range(n)] for a in range(n)]
    inv = _invert3(jac, ctx) if n == 3 else _invert_general(jac, ctx)
    out = []
    for a in range(n):
        img = zero(ctx)
        for b in range(n):
            img = img + inv[b][a] * momentum_exprs[b]
        out.append(img)
    return out


class PointMap:
    """A point transformation with its induced canonical momentum transform.

    pull maps each source coordinate name to its expression over the target
    chart; momenta transform with the inverse-transpose Jacobian, which keeps
    the map canonical.
    """

    def __init__(self, source: Chart, target: Chart, pull: dict):
        self.source = source
        self.target = target
        self.pull = {}
        for c in source.coords:
            if c.name not in pull:
                raise ChartError(f"missing image for source coordinate {c.name!r}")
            self.pull[c.gid] = pull[c.name]
        n = source.dim()
        pulls = [self.pull[c.gid] for c in source.coords]
        images = induced_momentum_images(
            pulls, target.coordinate_gids(), [target.p(b) for b in range(n)])
        self.momentum_images = {source.momenta[a].gid: images[a] for a in range(n)}

    def bindings(self) -> dict:
        out = dict(self.pull)
        out.update(self.momentum_images)
        return out


def _invert_general(m, ctx):
    n = len(m)
    aug = [[m[i][j] for j in range(n)] + [one(ctx) if i == j else zero(ctx) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not aug[r][col].is_zero()), None)
        if piv is None:
            raise ChartError("singular Jacobian: point map is not invertible")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = one(ctx) / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and not aug[r][col].is_zero():
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def change_chart(e: RatExpr, pmap: PointMap) -> RatExpr:
    """Rewrite a source-chart expression over the target chart."""
    return transport(e, pmap.bindings(), pmap.target.ctx)


def canonical_check(pmap: PointMap) -> bool:
    """True iff the transformed pairs satisfy the canonical bracket relations."""
    tgt = pmap.target
    n = pmap.source.dim()
    qs = [pmap.pull[c.gid] for c in pmap.source.coords]
    ps = [pmap.momentum_images[m.gid] for m in pmap.source.momenta]
    for a in range(n):
        for b in range(n):
            qp = poisson(qs[a], ps[b], tgt)
            want = one(tgt.ctx) if a == b else zero(tgt.ctx)
            if not (qp - want).is_zero():
                return False
            if not poisson(qs[a], qs[b], tgt).is_zero():
                return False
            if not poisson(ps[a], ps[b], tgt).is_zero():
                return False
    return True


# -- Hamilton-Jacobi -------------------------------------------------------------------------

def hj_residual(H: Hamiltonian, action: RatExpr, energy: RatExpr) -> RatExpr:
    """H with every momentum replaced by dS/dq, minus E."""
    chart = H.chart
    if set(action.gids()) & set(chart.momentum_gids()):
        raise ChartError("action function must be free of momenta")
    bind = {}
    for q, p in zip(chart.coords, chart.momenta):
        bind[p.gid] = derive(action, q.gid)
    return substitute(H.expr, bind) - energy
