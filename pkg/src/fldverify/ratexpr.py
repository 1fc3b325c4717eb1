"""Canonical rational expressions and their differential algebra.

A RatExpr is a fraction num/den of sparse polynomials over one generator
table.  Canonicalisation keeps the denominator free of relation generators
(cleared by conjugation), cancels common monomial content, opportunistically
cancels an exact polynomial factor, and scales the denominator monic under
graded-lex.  Equality of values is decided by the cross-multiplication test,
so full multivariate gcd is never required.

Zero testing treats atoms without relations as independent transcendentals:
an identity that holds for an arbitrary function reduces to the zero
polynomial here, while one that holds only for special functions does not.
"""

from __future__ import annotations

from .context import Context
from .poly import EMPTY, Poly, mon_degree, mon_mul
from .scalars import ONE, QI, ZERO

_CANCEL_LIMIT = 600  # skip opportunistic division above this many terms


class RatExprError(ArithmeticError):
    pass


class RatExpr:
    __slots__ = ("ctx", "num", "den")

    def __init__(self, ctx, num: Poly, den: Poly):
        self.ctx = ctx
        self.num = num
        self.den = den

    # -- canonical construction --------------------------------------------

    @staticmethod
    def make(num: Poly, den: Poly) -> "RatExpr":
        ctx = num.ctx
        if ctx.relation_gids:
            num = num.reduce()
            den = den.reduce()
        if den.is_zero():
            raise RatExprError("zero denominator")
        if num.is_zero():
            return RatExpr(ctx, num, Poly.const(ctx, ONE))
        # clear relation generators out of the denominator
        rel = den.gids() & ctx.relation_gids
        for g in sorted(rel):
            a, b = den.split(g)
            if b.is_zero():
                continue
            conj = a - b * Poly.gen(ctx, g)
            num = num * conj
            den = (den * conj).reduce()
            if den.is_zero():
                raise RatExprError("degenerate quadratic relation while clearing denominator")
        # cancel common monomial content
        common = _monomial_content(num, den)
        if common:
            num = num.map_monomials(lambda m: _mon_strip(m, common))
            den = den.map_monomials(lambda m: _mon_strip(m, common))
        # opportunistic exact cancellation
        if not den.is_const() and len(num.terms) <= _CANCEL_LIMIT and len(den.terms) <= _CANCEL_LIMIT:
            try:
                num = num.divexact(den)
                den = Poly.const(ctx, ONE)
            except ArithmeticError:
                try:
                    q = den.divexact(num)
                    if not (q.gids() & ctx.relation_gids):
                        num = Poly.const(ctx, ONE)
                        den = q
                except ArithmeticError:
                    pass
        # monic denominator
        lc = den.leading_coeff()
        if not lc.is_one():
            inv = lc.inv()
            num = num.scale(inv)
            den = den.scale(inv)
        return RatExpr(ctx, num, den)

    @staticmethod
    def from_poly(p: Poly) -> "RatExpr":
        return RatExpr.make(p, Poly.const(p.ctx, ONE))

    # -- predicates -----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def const_value(self) -> QI:
        if not self.is_const():
            raise RatExprError("not a constant expression")
        if self.num.is_zero():
            return ZERO
        return self.num.const_value() / self.den.const_value()

    def is_poly(self) -> bool:
        return self.den.is_one()

    def gids(self) -> set:
        return self.num.gids() | self.den.gids()

    # -- arithmetic -------------------------------------------------------------

    def __add__(self, other: "RatExpr") -> "RatExpr":
        if self.den == other.den:
            return RatExpr.make(self.num + other.num, self.den)
        return RatExpr.make(self.num * other.den + other.num * self.den,
                            self.den * other.den)

    def __sub__(self, other: "RatExpr") -> "RatExpr":
        if self.den == other.den:
            return RatExpr.make(self.num - other.num, self.den)
        return RatExpr.make(self.num * other.den - other.num * self.den,
                            self.den * other.den)

    def __neg__(self) -> "RatExpr":
        return RatExpr(self.ctx, -self.num, self.den)

    def __mul__(self, other: "RatExpr") -> "RatExpr":
        if self.num.is_zero() or other.num.is_zero():
            return zero(self.ctx)
        return RatExpr.make(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RatExpr") -> "RatExpr":
        if other.num.is_zero():
            raise RatExprError("division by an expression that is identically zero")
        return RatExpr.make(self.num * other.den, self.den * other.num)

    def __pow__(self, k: int) -> "RatExpr":
        if not isinstance(k, int):
            raise RatExprError("only integer exponents are supported")
        if k < 0:
            if self.num.is_zero():
                raise RatExprError("negative power of zero")
            return RatExpr.make(self.den ** (-k), self.num ** (-k))
        return RatExpr.make(self.num ** k, self.den ** k)

    def scale(self, c: QI) -> "RatExpr":
        return RatExpr.make(self.num.scale(c), self.den)

    # -- equality ------------------------------------------------------------------

    def equals(self, other: "RatExpr") -> bool:
        """Value equality via the cross-multiplication test."""
        d = self.num * other.den - other.num * self.den
        if self.ctx.relation_gids:
            d = d.reduce()
        return d.is_zero()

    def __eq__(self, other) -> bool:
        return isinstance(other, RatExpr) and self.equals(other)

    def __hash__(self):
        raise TypeError("RatExpr is unhashable; compare with .equals")

    def __repr__(self):
        if self.den.is_one():
            return repr(self.num)
        return f"({self.num!r})/({self.den!r})"


# -- constructors ------------------------------------------------------------------

def zero(ctx: Context) -> RatExpr:
    return RatExpr(ctx, Poly.zero(ctx), Poly.const(ctx, ONE))


def one(ctx: Context) -> RatExpr:
    return const(ctx, ONE)


def const(ctx: Context, c: QI) -> RatExpr:
    return RatExpr(ctx, Poly.const(ctx, c), Poly.const(ctx, ONE))


def integer(ctx: Context, n: int, d: int = 1) -> RatExpr:
    return const(ctx, QI.from_rational(n, d))


def gen_expr(ctx: Context, gid: int) -> RatExpr:
    return RatExpr(ctx, Poly.gen(ctx, gid), Poly.const(ctx, ONE))


def sym(ctx: Context, name: str) -> RatExpr:
    """The generator with this name, as an expression."""
    return gen_expr(ctx, ctx.get(name).gid)


# -- helpers --------------------------------------------------------------------------

def _monomial_content(a: Poly, b: Poly):
    mins: dict = None
    for p in (a, b):
        for m in p.terms:
            d = dict(m)
            if mins is None:
                mins = d
            else:
                for g in list(mins):
                    e = d.get(g, 0)
                    if e < mins[g]:
                        if e:
                            mins[g] = e
                        else:
                            del mins[g]
                if not mins:
                    return None
    return mins or None


def _mon_strip(m, common: dict):
    out = []
    for g, e in m:
        r = e - common.get(g, 0)
        if r:
            out.append((g, r))
    return tuple(out)


# -- differentiation --------------------------------------------------------------------

def derive(e: RatExpr, coord) -> RatExpr:
    """Total derivative with respect to a coordinate (gid or name)."""
    ctx = e.ctx
    cgid = ctx.get(coord).gid if isinstance(coord, str) else coord
    dn = _poly_derive(e.num, cgid)
    if e.den.is_const():
        if e.den.is_one():
            return dn
        return dn.scale(e.den.const_value().inv())
    dd = _poly_derive(e.den, cgid)
    den_e = RatExpr.from_poly(e.den)
    if dd.is_zero():
        return RatExpr.make(dn.num, dn.den) / den_e
    num_e = RatExpr.from_poly(e.num)
    return (dn * den_e - num_e * dd) / (den_e * den_e)


def _poly_derive(p: Poly, cgid: int) -> RatExpr:
    ctx = p.ctx
    out = zero(ctx)
    for g in sorted(p.gids()):
        dg = ctx.derivative_of(g, cgid)
        if dg.is_zero():
            continue
        part = p.partial(g)
        if part.is_zero():
            continue
        out = out + RatExpr.from_poly(part) * dg
    return out


# -- substitution ------------------------------------------------------------------------

def substitute(e: RatExpr, bindings: dict) -> RatExpr:
    """Simultaneous substitution generator -> RatExpr, then canonicalisation.

    Keys may be names or gids.  Substituting for a relation generator is only
    allowed when the image satisfies the relation.
    """
    ctx = e.ctx
    norm: dict = {}
    for k, v in bindings.items():
        g = ctx.get(k) if isinstance(k, str) else ctx.gens[k]
        norm[g.gid] = v
        if g.relation is not None:
            img = v * v - substitute(RatExpr.from_poly(g.relation), bindings)
            if not img.is_zero():
                raise RatExprError(
                    f"substitution for {g.name!r} violates its quadratic relation")
    num = _poly_subs(e.num, norm)
    den = _poly_subs(e.den, norm)
    if den.is_zero():
        raise RatExprError("substitution makes a denominator identically zero")
    return num / den


def _poly_subs(p: Poly, bindings: dict) -> RatExpr:
    ctx = p.ctx
    if not (p.gids() & set(bindings)):
        return RatExpr.from_poly(p)
    out = zero(ctx)
    pow_cache: dict = {}
    for m, c in p.terms.items():
        keep = []
        factor = None
        for g, ex in m:
            if g in bindings:
                key = (g, ex)
                f = pow_cache.get(key)
                if f is None:
                    f = bindings[g] ** ex
                    pow_cache[key] = f
                factor = f if factor is None else factor * f
            else:
                keep.append((g, ex))
        term = RatExpr.from_poly(Poly(ctx, {tuple(keep): c}))
        if factor is not None:
            term = term * factor
        out = out + term
    return out


# -- structure extraction ---------------------------------------------------------------------

def collect(e: RatExpr, vars) -> dict:
    """Decompose e = sum(monomial-in-vars * coefficient).

    vars is an iterable of names or gids; e must be polynomial in them
    (denominator free of vars).  Keys of the result are monomial tuples
    ((gid, exp), ...) over vars; values are RatExpr free of vars.
    """
    ctx = e.ctx
    vgids = {ctx.get(v).gid if isinstance(v, str) else v for v in vars}
    if e.den.gids() & vgids:
        raise RatExprError("denominator involves collection variables")
    groups: dict = {}
    for m, c in e.num.terms.items():
        vm = []
        rest = []
        for g, ex in m:
            (vm if g in vgids else rest).append((g, ex))
        key = tuple(vm)
        bucket = groups.setdefault(key, {})
        rm = tuple(rest)
        cur = bucket.get(rm)
        bucket[rm] = c if cur is None else cur + c
    out = {}
    for key, bucket in groups.items():
        p = Poly(ctx, {m: c for m, c in bucket.items() if not c.is_zero()})
        if p.is_zero():
            continue
        out[key] = RatExpr.make(p, e.den)
    return out


def coefficient(e: RatExpr, vars, mono) -> RatExpr:
    """Coefficient of one vars-monomial of e (zero if absent)."""
    return collect(e, vars).get(mono, zero(e.ctx))


# -- numeric evaluation -----------------------------------------------------------------------

def eval_numeric(e: RatExpr, point: dict, atom_values: dict | None = None) -> complex:
    """Floating evaluation at a point; raises on a near-vanishing denominator.

    point/atom_values map names or gids to complex numbers; relation atoms
    missing from the maps are evaluated as the principal square root of their
    relation.
    """
    ctx = e.ctx
    values: dict = {}
    for src in (point, atom_values or {}):
        for k, v in src.items():
            gid = ctx.get(k).gid if isinstance(k, str) else k
            values[gid] = complex(v)
    needed = e.gids()
    for g in needed:
        if g in values:
            continue
        gen = ctx.gens[g]
        if gen.relation is not None:
            values[g] = _eval_poly_at(gen.relation, values) ** 0.5
        else:
            raise RatExprError(f"no numeric value for generator {gen.name!r}")
    den_val = _eval_poly_at(e.den, values)
    scale = max(1.0, sum(abs(c.to_complex()) * _mon_abs(m, values)
                         for m, c in e.den.terms.items()))
    if abs(den_val) < 1e-12 * scale:
        raise RatExprError("denominator vanishes near the evaluation point")
    return _eval_poly_at(e.num, values) / den_val


def _eval_poly_at(p: Poly, values: dict) -> complex:
    total = 0j
    for m, c in p.terms.items():
        v = c.to_complex()
        for g, e in m:
            v *= values[g] ** e
        total += v
    return total


def _mon_abs(m, values) -> float:
    v = 1.0
    for g, e in m:
        v *= abs(values[g]) ** e
    return v


# -- arith entry point matching the operation table --------------------------------------------

def arith(lhs: RatExpr, rhs, op: str) -> RatExpr:
    """Field arithmetic dispatcher: add, sub, mul, div, pow (integer rhs)."""
    if op == "add":
        return lhs + rhs
    if op == "sub":
        return lhs - rhs
    if op == "mul":
        return lhs * rhs
    if op == "div":
        return lhs / rhs
    if op == "pow":
        return lhs ** rhs
    raise RatExprError(f"unknown operation {op!r}")
