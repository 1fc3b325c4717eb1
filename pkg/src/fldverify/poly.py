"""Sparse multivariate polynomials over Gaussian rationals.

A monomial is a sorted tuple of (generator id, exponent) pairs with positive
exponents; a Poly maps monomials to nonzero QI coefficients.  Generators
declared with a quadratic relation g^2 = P never appear with exponent above 1:
even powers are rewritten through the relation on construction.

The monomial order is graded lexicographic in generator declaration order,
which makes leading terms (and hence all canonical forms) reproducible.
"""

from __future__ import annotations

from .scalars import QI, ZERO, ONE

Monomial = tuple  # tuple[(gid, exp), ...] sorted by gid

EMPTY: Monomial = ()


def mon_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        ga, ea = a[i]
        gb, eb = b[j]
        if ga == gb:
            out.append((ga, ea + eb))
            i += 1
            j += 1
        elif ga < gb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def mon_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mon_divides(a: Monomial, b: Monomial) -> bool:
    """True iff monomial a divides monomial b."""
    i = 0
    na = len(a)
    db = dict(b)
    for g, e in a:
        if db.get(g, 0) < e:
            return False
    return True


def mon_div(b: Monomial, a: Monomial) -> Monomial:
    """b / a, assuming a divides b."""
    da = dict(a)
    out = []
    for g, e in b:
        r = e - da.get(g, 0)
        if r < 0:
            raise ArithmeticError("monomial division underflow")
        if r:
            out.append((g, r))
    return tuple(out)


def mon_cmp(a: Monomial, b: Monomial) -> int:
    """Graded-lex compare: >0 if a > b."""
    da, db = mon_degree(a), mon_degree(b)
    if da != db:
        return 1 if da > db else -1
    # lex by generator id ascending; larger exponent earlier wins
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        ga, ea = a[i]
        gb, eb = b[j]
        if ga == gb:
            if ea != eb:
                return 1 if ea > eb else -1
            i += 1
            j += 1
        elif ga < gb:
            return 1
        else:
            return -1
    if i < na:
        return 1
    if j < nb:
        return -1
    return 0


class Poly:
    __slots__ = ("ctx", "terms")

    def __init__(self, ctx, terms: dict):
        self.ctx = ctx
        self.terms = terms

    # -- constructors ----------------------------------------------------

    @staticmethod
    def zero(ctx) -> "Poly":
        return Poly(ctx, {})

    @staticmethod
    def const(ctx, c: QI) -> "Poly":
        return Poly(ctx, {} if c.is_zero() else {EMPTY: c})

    @staticmethod
    def gen(ctx, gid: int, exp: int = 1) -> "Poly":
        p = Poly(ctx, {((gid, exp),): ONE})
        return p.reduce() if gid in ctx.relation_gids and exp > 1 else p

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and EMPTY in self.terms)

    def const_value(self) -> QI:
        if not self.terms:
            return ZERO
        return self.terms.get(EMPTY, ZERO)

    def is_one(self) -> bool:
        return len(self.terms) == 1 and self.terms.get(EMPTY, ZERO).is_one()

    def gids(self) -> set:
        s = set()
        for m in self.terms:
            for g, _ in m:
                s.add(g)
        return s

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            cur = out.get(m)
            if cur is None:
                out[m] = c
            else:
                s = cur + c
                if s.is_zero():
                    del out[m]
                else:
                    out[m] = s
        return Poly(self.ctx, out)

    def __neg__(self) -> "Poly":
        return Poly(self.ctx, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, c: QI) -> "Poly":
        if c.is_zero():
            return Poly(self.ctx, {})
        if c.is_one():
            return self
        return Poly(self.ctx, {m: cf * c for m, cf in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.terms or not other.terms:
            return Poly(self.ctx, {})
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        out: dict = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                m = mon_mul(ma, mb)
                c = ca * cb
                cur = out.get(m)
                if cur is None:
                    out[m] = c
                else:
                    s = cur + c
                    if s.is_zero():
                        del out[m]
                    else:
                        out[m] = s
        p = Poly(self.ctx, out)
        return p.reduce() if self.ctx.relation_gids else p

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ArithmeticError("negative power of a polynomial")
        r = Poly.const(self.ctx, ONE)
        b = self
        while k:
            if k & 1:
                r = r * b
            b = b * b if k > 1 else b
            k >>= 1
        return r

    # -- relation reduction ----------------------------------------------

    def reduce(self) -> "Poly":
        """Rewrite even powers of relation generators via g^2 = P."""
        rel = self.ctx.relation_gids
        if not rel:
            return self
        pending = list(self.terms.items())
        out: dict = {}
        gens = self.ctx.gens
        while pending:
            m, c = pending.pop()
            hit = None
            for g, e in m:
                if e >= 2 and g in rel:
                    hit = (g, e)
                    break
            if hit is None:
                cur = out.get(m)
                if cur is None:
                    out[m] = c
                else:
                    s = cur + c
                    if s.is_zero():
                        del out[m]
                    else:
                        out[m] = s
                continue
            g, e = hit
            rest = tuple((gg, ee) for gg, ee in m if gg != g)
            if e % 2:
                rest = mon_mul(rest, ((g, 1),))
            p_pow = gens[g].relation ** (e // 2)
            for mp, cp in p_pow.terms.items():
                pending.append((mon_mul(rest, mp), c * cp))
        return Poly(self.ctx, out)

    # -- leading data (graded lex) -------------------------------------------

    def leading_monomial(self) -> Monomial:
        it = iter(self.terms)
        best = next(it)
        for m in it:
            if mon_cmp(m, best) > 0:
                best = m
        return best

    def leading_coeff(self) -> QI:
        return self.terms[self.leading_monomial()]

    def total_degree(self) -> int:
        return max((mon_degree(m) for m in self.terms), default=0)

    # -- calculus ---------------------------------------------------------

    def partial(self, gid: int) -> "Poly":
        """Formal partial derivative with respect to one generator."""
        out: dict = {}
        for m, c in self.terms.items():
            for idx, (g, e) in enumerate(m):
                if g == gid:
                    nc = c * QI(e)
                    if e == 1:
                        nm = m[:idx] + m[idx + 1:]
                    else:
                        nm = m[:idx] + ((g, e - 1),) + m[idx + 1:]
                    cur = out.get(nm)
                    out[nm] = nc if cur is None else cur + nc
                    break
        return Poly(self.ctx, {m: c for m, c in out.items() if not c.is_zero()})

    # -- exact division -----------------------------------------------------

    def divexact(self, d: "Poly") -> "Poly":
        """Exact division self/d; raises ArithmeticError if d does not divide.

        If d involves relation generators, both sides are first multiplied by
        the conjugate so the divisor becomes relation-free.
        """
        if d.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if d.is_const():
            return self.scale(d.const_value().inv())
        num, den = self, d
        for g in sorted(den.gids() & self.ctx.relation_gids):
            a, b = den.split(g)
            if b.is_zero():
                continue
            conj = a - b * Poly.gen(self.ctx, g)
            num = num * conj
            den = (den * conj).reduce()
        lm = den.leading_monomial()
        lc = den.terms[lm]
        lc_inv = lc.inv()
        rem = num
        q: dict = {}
        while rem.terms:
            rm = rem.leading_monomial()
            if not mon_divides(lm, rm):
                raise ArithmeticError("inexact polynomial division")
            qm = mon_div(rm, lm)
            qc = rem.terms[rm] * lc_inv
            q[qm] = qc
            rem = rem - Poly(self.ctx, {qm: qc}) * den
        return Poly(self.ctx, q)

    def split(self, gid: int) -> tuple["Poly", "Poly"]:
        """Write self = A + B*g for a relation generator g; returns (A, B)."""
        a: dict = {}
        b: dict = {}
        for m, c in self.terms.items():
            e = 0
            rest = m
            for idx, (g, ee) in enumerate(m):
                if g == gid:
                    e = ee
                    rest = m[:idx] + m[idx + 1:]
                    break
            if e == 0:
                a[m] = c
            elif e == 1:
                b[rest] = c
            else:
                raise ArithmeticError("unreduced relation generator power")
        return Poly(self.ctx, a), Poly(self.ctx, b)

    # -- evaluation ---------------------------------------------------------

    def eval(self, values: dict) -> complex:
        """Numeric evaluation; values maps gid -> complex."""
        total = 0j
        for m, c in self.terms.items():
            v = c.to_complex()
            for g, e in m:
                v *= values[g] ** e
            total += v
        return total

    # -- misc -----------------------------------------------------------------

    def map_monomials(self, fn) -> "Poly":
        out: dict = {}
        for m, c in self.terms.items():
            nm = fn(m)
            cur = out.get(nm)
            out[nm] = c if cur is None else cur + c
        return Poly(self.ctx, {m: c for m, c in out.items() if not c.is_zero()})

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        names = {g.gid: g.name for g in self.ctx.gens}
        bits = []
        for m in sorted(self.terms, key=lambda m: (-mon_degree(m), m)):
            c = self.terms[m]
            mono = "*".join(f"{names[g]}^{e}" if e > 1 else names[g] for g, e in m)
            bits.append(f"{c!r}*{mono}" if mono else f"{c!r}")
        return " + ".join(bits)
