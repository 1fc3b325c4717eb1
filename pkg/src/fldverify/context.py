"""Generator tables.

A Context is an append-only table of generators: coordinates, momenta,
parameters and differential atoms.  Declaration order fixes the monomial
order, so canonical forms are reproducible.  Atoms come in three flavours:

* rule atoms   -- carry explicit derivation rules d(atom)/d(coord),
                  e.g. an exponential E with dE/dtheta = E, or a radical
                  w standing for xi^(1/3) with dw/dxi = 1/(3 w^2);
* fun atoms    -- an abstract function F(u) of a stored argument; its
                  coordinate derivatives materialise the primed atom F'(u)
                  by the chain rule;
* relation atoms -- satisfy g^2 = P for a polynomial P free of g; their
                  derivatives follow by implicit differentiation.

Jet atoms model the partial derivatives of an abstract potential; deriving
one increments its multi-index (mixed partials commute, the index is a
sorted multiset of coordinates).
"""

from __future__ import annotations

from .scalars import QI

COORD = "coordinate"
MOMENTUM = "momentum"
PARAM = "parameter"
ATOM = "atom"


class Generator:
    __slots__ = ("gid", "name", "kind", "relation", "rules", "fun_arg",
                 "prime_name", "jet_base", "jet_index")

    def __init__(self, gid: int, name: str, kind: str):
        self.gid = gid
        self.name = name
        self.kind = kind
        self.relation = None      # Poly P with self**2 == P
        self.rules = None         # dict coord_gid -> RatExpr
        self.fun_arg = None       # RatExpr argument of an abstract function
        self.prime_name = None    # name of the derivative atom of a fun atom
        self.jet_base = None      # base name for jet atoms
        self.jet_index = None     # sorted tuple of coordinate gids

    def __repr__(self):
        return f"<gen {self.name}:{self.kind}>"


class ContextError(ValueError):
    pass


class Context:
    """Append-only generator table; existing entries are never modified."""

    def __init__(self):
        self.gens: list[Generator] = []
        self.by_name: dict[str, Generator] = {}
        self.relation_gids: set[int] = set()
        self._deriv_cache: dict[tuple[int, int], object] = {}

    # -- declaration ----------------------------------------------------

    def _new(self, name: str, kind: str) -> Generator:
        if name in self.by_name:
            raise ContextError(f"generator {name!r} already declared")
        if name == "i":
            raise ContextError("'i' is reserved for the imaginary unit")
        g = Generator(len(self.gens), name, kind)
        self.gens.append(g)
        self.by_name[name] = g
        return g

    def coordinate(self, name: str) -> Generator:
        return self._new(name, COORD)

    def momentum(self, name: str) -> Generator:
        return self._new(name, MOMENTUM)

    def parameter(self, name: str) -> Generator:
        return self._new(name, PARAM)

    def atom(self, name: str) -> Generator:
        return self._new(name, ATOM)

    def atom_with_rules(self, name: str, rules) -> Generator:
        """rules: dict mapping coordinate name -> RatExpr (may use the atom)."""
        g = self._new(name, ATOM)
        g.rules = {}
        for coord_name, expr in rules.items():
            cg = self.get(coord_name)
            if cg.kind != COORD:
                raise ContextError(f"derivation rule of {name!r} wrt non-coordinate {coord_name!r}")
            g.rules[cg.gid] = expr
        return g

    def set_rules(self, name: str, rules) -> Generator:
        """Attach derivation rules to a plain atom (used when a rule mentions
        the atom itself, which therefore has to exist first)."""
        g = self.get(name)
        if g.kind != ATOM or g.rules is not None or g.relation is not None:
            raise ContextError(f"cannot attach rules to {name!r}")
        g.rules = {}
        for coord_name, expr in rules.items():
            cg = self.get(coord_name)
            if cg.kind != COORD:
                raise ContextError(f"derivation rule of {name!r} wrt non-coordinate {coord_name!r}")
            g.rules[cg.gid] = expr
        return g

    def atom_with_relation(self, name: str, relation) -> Generator:
        """relation: Poly P with name**2 = P; P must not involve the atom."""
        g = self._new(name, ATOM)
        for mon, _ in relation.terms.items():
            for gid, _e in mon:
                if gid == g.gid:
                    raise ContextError(f"relation of {name!r} mentions the atom itself")
        g.relation = relation
        self.relation_gids.add(g.gid)
        return g

    def atom_fun(self, name: str, argument, prime_name: str) -> Generator:
        """Abstract function atom F(argument); its derivative atom is prime_name."""
        g = self._new(name, ATOM)
        g.fun_arg = argument
        g.prime_name = prime_name
        return g

    def jet(self, base: str, index: tuple[int, ...]) -> Generator:
        """Intern the jet atom for d^|index| base / d(coords in index)."""
        index = tuple(sorted(index))
        if index:
            name = base + "_" + "".join(self.gens[g].name for g in index)
        else:
            name = base
        g = self.by_name.get(name)
        if g is not None:
            if g.jet_base != base:
                raise ContextError(f"name collision interning jet atom {name!r}")
            return g
        g = self._new(name, ATOM)
        g.jet_base = base
        g.jet_index = index
        return g

    # -- lookup -----------------------------------------------------------

    def get(self, name: str) -> Generator:
        g = self.by_name.get(name)
        if g is None:
            raise ContextError(f"undeclared symbol {name!r}")
        return g

    def __contains__(self, name: str) -> bool:
        return name in self.by_name

    # -- differentiation table ---------------------------------------------

    def derivative_of(self, gid: int, coord_gid: int):
        """Total derivative d(gen)/d(generator) as a RatExpr (cached).

        Differentiation is normally with respect to a coordinate; formal
        differentiation with respect to a momentum is also supported (used by
        the Poisson bracket), in which case every other generator is constant.
        """
        key = (gid, coord_gid)
        cached = self._deriv_cache.get(key)
        if cached is not None:
            return cached
        from . import ratexpr as rx

        g = self.gens[gid]
        wrt_coord = self.gens[coord_gid].kind == COORD
        if gid == coord_gid:
            out = rx.one(self)
        elif not wrt_coord or g.kind in (COORD, MOMENTUM, PARAM):
            out = rx.zero(self)
        elif g.relation is not None:
            # g^2 = P  =>  dg = P_q/(2g) = P_q*g/(2P)
            pq = g.relation.partial(coord_gid)
            if pq.is_zero():
                out = rx.zero(self)
            else:
                from .poly import Poly
                num = pq * Poly.gen(self, gid)
                den = g.relation.scale(QI(2))
                out = rx.RatExpr.make(num, den)
        elif g.rules is not None:
            out = g.rules.get(coord_gid)
            if out is None:
                out = rx.zero(self)
        elif g.fun_arg is not None:
            prime = self.by_name.get(g.prime_name)
            if prime is None:
                prime = self.atom_fun(g.prime_name, g.fun_arg, g.prime_name + "'")
            du = rx.derive(g.fun_arg, coord_gid)
            out = rx.gen_expr(self, prime.gid) * du
        elif g.jet_base is not None:
            j = self.jet(g.jet_base, g.jet_index + (coord_gid,))
            out = rx.gen_expr(self, j.gid)
        else:
            # plain atom with no differential structure: treated as constant
            out = rx.zero(self)
        self._deriv_cache[key] = out
        return out
