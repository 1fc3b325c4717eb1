"""Independent numerical oracle: random-point zero pre-checks, compiled
Hamiltonian flows (fixed-step leapfrog / rk4) and conservation-drift reports.

Abstract function atoms must be instantiated (rationally) before anything here
can run; relation atoms are evaluated as principal square roots, which is
consistent along a trajectory because the symbolic gradients already carry the
implicit-differentiation rules.
"""

from __future__ import annotations

import random

from .fld import random_phase_point
from .phasespace import Chart, Hamiltonian
from .ratexpr import RatExpr, RatExprError, derive, substitute, zero
from .scalars import QI


class NumericError(ValueError):
    pass


# -- random-point zero pre-check ----------------------------------------------------


def numeric_zero(e: RatExpr, trials: int = 20, tol: float = 1e-9, seed: int = 0,
                 bound_params=None):
    """Evaluate at random points; returns (all_below_tolerance, worst_residual).

    The tolerance is relative to the term-wise magnitude of the numerator, so
    cancellation is measured against the size of what is cancelling.
    """
    if trials < 10:
        raise NumericError("numeric_zero needs at least 10 trials")
    ctx = e.ctx
    rng = random.Random(seed)
    worst = 0.0
    done = 0
    failures = 0
    while done < trials:
        values = random_phase_point(ctx, rng, bound_params)
        try:
            den = e.den.eval(values)
            scale_den = max(abs(c.to_complex()) * _mon_mag(m, values)
                            for m, c in e.den.terms.items())
            if abs(den) < 1e-10 * scale_den:
                raise ArithmeticError
            num = e.num.eval(values)
            scale = sum(abs(c.to_complex()) * _mon_mag(m, values)
                        for m, c in e.num.terms.items())
        except (ArithmeticError, OverflowError):
            failures += 1
            if failures > 50 * trials:
                raise NumericError("could not find nonsingular points")
            continue
        resid = abs(num) / max(scale, 1.0)
        worst = max(worst, resid)
        done += 1
    return worst < tol, worst


def _mon_mag(m, values) -> float:
    v = 1.0
    for g, e in m:
        v *= abs(values[g]) ** e
    return v


# -- rational instantiation of abstract functions --------------------------------------


F_LIBRARY = {
    "u": lambda u, ctx: u,
    "u2": lambda u, ctx: u * u,
    "inv": lambda u, ctx: _inv(u, ctx),
    "runge": lambda u, ctx: _runge(u, ctx),
}


def _inv(u, ctx):
    from .ratexpr import one
    return one(ctx) / u


def _runge(u, ctx):
    from .ratexpr import one
    return one(ctx) / (one(ctx) + u * u)


def instantiate_atoms(ctx, fun_choices: dict) -> dict:
    """Bindings replacing abstract atoms by rational expressions.

    fun_choices maps fun-atom base names to F_LIBRARY keys.  Primed atoms get
    the derivative template; rule atoms whose rules become rational Laurent
    expressions in one coordinate get their exact antiderivative.  Raises when
    an atom cannot be rationally instantiated (e.g. a logarithm).
    """
    bindings: dict = {}
    # abstract functions first: walk prime chains
    for g in ctx.gens:
        if g.fun_arg is None or g.name not in fun_choices:
            continue
        tmpl_name = fun_choices[g.name]
        if tmpl_name not in F_LIBRARY:
            raise NumericError(f"unknown instantiation template {tmpl_name!r}")
        cur = F_LIBRARY[tmpl_name](g.fun_arg, ctx)
        name = g.name
        while True:
            bindings[name] = cur
            gen = ctx.by_name.get(name)
            if gen is None or gen.prime_name is None or gen.prime_name not in ctx:
                break
            # derivative template via d(template)/d(arg) = chain-free quotient
            cur = _template_derivative(cur, gen.fun_arg, ctx)
            name = gen.prime_name
    # rule atoms that become integrable
    changed = True
    while changed:
        changed = False
        for g in ctx.gens:
            if g.rules is None or g.name in bindings:
                continue
            rules = {c: substitute(rexpr, bindings) if (rexpr.gids() & set(_bound_gids(ctx, bindings))) else rexpr
                     for c, rexpr in g.rules.items()}
            nonzero = {c: r for c, r in rules.items() if not r.is_zero()}
            if len(nonzero) != 1:
                continue
            cvar, rate = next(iter(nonzero.items()))
            if g.gid in rate.gids():
                continue  # self-referential (exponential-type); not rational
            unbound = [ctx.gens[gg] for gg in rate.gids()
                       if ctx.gens[gg].kind == "atom" and gg not in _bound_gids(ctx, bindings)
                       and ctx.gens[gg].relation is None]
            if unbound:
                continue
            anti = _antiderivative(rate, cvar)
            if anti is None:
                raise NumericError(
                    f"atom {g.name!r} has no rational antiderivative under this instantiation")
            bindings[g.name] = anti
            changed = True
    return bindings


def _bound_gids(ctx, bindings):
    return {ctx.get(n).gid for n in bindings}


def _template_derivative(expr: RatExpr, arg: RatExpr, ctx):
    """d(expr)/d(arg) when expr is a rational function of arg alone."""
    gids = arg.gids()
    if not gids:
        raise NumericError("constant argument for an abstract function")
    # differentiate along any coordinate the argument depends on
    for gid in sorted(gids):
        da = derive(arg, gid)
        if not da.is_zero():
            return derive(expr, gid) / da
    raise NumericError("argument of abstract function has vanishing differential")


def _antiderivative(rate: RatExpr, coord_gid: int):
    """Exact antiderivative of a Laurent polynomial in one generator, or None."""
    from .ratexpr import collect, gen_expr
    ctx = rate.ctx
    # rate = sum c_k * x^k with k integer (denominator a pure power of x)
    if rate.den.gids() - {coord_gid}:
        return None
    neg = 0
    if not rate.den.is_const():
        mons = list(rate.den.terms)
        if len(mons) != 1:
            return None
        neg = mons[0][0][1]
    try:
        out = zero(ctx)
        xg = gen_expr(ctx, coord_gid)
        for mono, coeff in collect(RatExpr.from_poly(rate.num), [coord_gid]).items():
            k = (mono[0][1] if mono else 0) - neg
            if k == -1:
                return None
            out = out + coeff * xg ** (k + 1) / _int(ctx, k + 1)
        scale = rate.den.leading_coeff() if not rate.den.is_const() else rate.den.const_value()
        return out / _const(ctx, scale)
    except RatExprError:
        return None


def _int(ctx, n):
    from .ratexpr import integer
    return integer(ctx, n)


def _const(ctx, c):
    from .ratexpr import const
    return const(ctx, c)


# -- compiled evaluation --------------------------------------------------------------


class CompiledExpr:
    """An expression compiled to a Python closure over phase-space values."""

    def __init__(self, expr: RatExpr, chart: Chart, params: dict):
        ctx = chart.ctx
        self.expr = expr
        gids = expr.gids()
        order: list[int] = []
        names = {}
        for gid in sorted(gids):
            g = ctx.gens[gid]
            names[gid] = f"v{gid}"
            if g.kind == "atom" and g.relation is None:
                raise NumericError(
                    f"expression still contains the abstract atom {g.name!r}; instantiate first")
        lines = ["def _f(vals):"]
        for gid in sorted(gids):
            g = ctx.gens[gid]
            if g.relation is not None:
                rel = _poly_src(g.relation, names)
                lines.append(f"    v{gid} = ({rel}) ** 0.5")
            else:
                lines.append(f"    v{gid} = vals[{gid}]")
        num = _poly_src(expr.num, names)
        den = _poly_src(expr.den, names)
        if expr.den.is_one():
            lines.append(f"    return ({num})")
        else:
            lines.append(f"    d = ({den})")
            lines.append("    if abs(d) < 1e-280: raise ZeroDivisionError")
            lines.append(f"    return ({num}) / d")
        ns: dict = {}
        exec("\n".join(lines), ns)
        self._fn = ns["_f"]
        base = {}
        for g in ctx.gens:
            if g.kind == "parameter":
                if g.name in params:
                    base[g.gid] = complex(params[g.name])
                elif g.gid in gids:
                    raise NumericError(f"parameter {g.name!r} has no value")
        self.base = base

    def __call__(self, values: dict) -> complex:
        vals = dict(self.base)
        vals.update(values)
        return self._fn(vals)


def _poly_src(p, names) -> str:
    if p.is_zero():
        return "0j"
    terms = []
    for mono, c in p.terms.items():
        cc = c.to_complex()
        factors = [f"complex({cc.real!r},{cc.imag!r})"]
        for g, e in mono:
            ref = names.get(g, f"v{g}")
            factors.append(ref if e == 1 else f"{ref}**{e}")
        terms.append("*".join(factors))
    return "+".join(terms)


# -- trajectories ------------------------------------------------------------------------


class TrajectorySample:
    __slots__ = ("time", "coords", "momenta")

    def __init__(self, time, coords, momenta):
        self.time = time
        self.coords = coords
        self.momenta = momenta


class TrajectoryResult:
    def __init__(self, samples, dt, steps, truncated=False):
        self.samples = samples
        self.dt = dt
        self.steps = steps
        self.truncated = truncated


def trajectory(H: Hamiltonian, params: dict, q0, p0, dt: float, steps: int,
               integrator: str = "rk4") -> TrajectoryResult:
    """Fixed-step integration of the flow of H with compiled exact gradients."""
    chart = H.chart
    n = chart.dim()
    cg = chart.coordinate_gids()
    pg = chart.momentum_gids()
    dHdp = [CompiledExpr(derive(H.expr, g), chart, params) for g in pg]
    dHdq = [CompiledExpr(derive(H.expr, g), chart, params) for g in cg]

    def rhs(q, p):
        vals = {}
        for i in range(n):
            vals[cg[i]] = q[i]
            vals[pg[i]] = p[i]
        dq = [f(vals) for f in dHdp]
        dp = [-f(vals) for f in dHdq]
        return dq, dp

    if integrator == "leapfrog":
        km = chart.kinetic_matrix()
        if any((not km[i][j].is_zero()) if i != j else (not km[i][i].is_const())
               for i in range(n) for j in range(n)):
            raise NumericError("leapfrog requires a constant diagonal kinetic term")
        masses = [km[i][i].const_value().to_complex() for i in range(n)]
    q = [complex(v) for v in q0]
    p = [complex(v) for v in p0]
    samples = [TrajectorySample(0.0, tuple(q), tuple(p))]
    truncated = False
    for step in range(1, steps + 1):
        try:
            if integrator == "rk4":
                k1q, k1p = rhs(q, p)
                q2 = [q[i] + 0.5 * dt * k1q[i] for i in range(n)]
                p2 = [p[i] + 0.5 * dt * k1p[i] for i in range(n)]
                k2q, k2p = rhs(q2, p2)
                q3 = [q[i] + 0.5 * dt * k2q[i] for i in range(n)]
                p3 = [p[i] + 0.5 * dt * k2p[i] for i in range(n)]
                k3q, k3p = rhs(q3, p3)
                q4 = [q[i] + dt * k3q[i] for i in range(n)]
                p4 = [p[i] + dt * k3p[i] for i in range(n)]
                k4q, k4p = rhs(q4, p4)
                q = [q[i] + dt / 6.0 * (k1q[i] + 2 * k2q[i] + 2 * k3q[i] + k4q[i]) for i in range(n)]
                p = [p[i] + dt / 6.0 * (k1p[i] + 2 * k2p[i] + 2 * k3p[i] + k4p[i]) for i in range(n)]
            elif integrator == "leapfrog":
                vals = {cg[i]: q[i] for i in range(n)}
                vals.update({pg[i]: p[i] for i in range(n)})
                ph = [p[i] - 0.5 * dt * dHdq[i](vals) for i in range(n)]
                q = [q[i] + dt * 2.0 * masses[i] * ph[i] for i in range(n)]
                vals = {cg[i]: q[i] for i in range(n)}
                vals.update({pg[i]: ph[i] for i in range(n)})
                p = [ph[i] - 0.5 * dt * dHdq[i](vals) for i in range(n)]
            else:
                raise NumericError(f"unknown integrator {integrator!r}")
        except ZeroDivisionError:
            truncated = True
            break
        samples.append(TrajectorySample(step * dt, tuple(q), tuple(p)))
    return TrajectoryResult(samples, dt, steps, truncated)


def conservation_report(chart: Chart, params: dict, named_exprs: dict,
                        result: TrajectoryResult, absolute: set | None = None) -> dict:
    """Max drift per labelled expression along a trajectory.

    Relative drift |S(t)-S(0)| / max(1, |S(0)|) by default; labels listed in
    `absolute` (residuals that should vanish identically) report max |value|.
    """
    compiled = {k: CompiledExpr(e, chart, params) for k, e in named_exprs.items()}
    cg = chart.coordinate_gids()
    pg = chart.momentum_gids()
    out = {}
    for label, fn in compiled.items():
        vals0 = _sample_values(result.samples[0], cg, pg)
        if absolute and label in absolute:
            worst = 0.0
            for s in result.samples:
                worst = max(worst, abs(fn(_sample_values(s, cg, pg))))
            out[label] = worst
        else:
            ref = fn(vals0)
            worst = 0.0
            for s in result.samples[1:]:
                worst = max(worst, abs(fn(_sample_values(s, cg, pg)) - ref))
            out[label] = worst / max(1.0, abs(ref))
    return out


def _sample_values(s: TrajectorySample, cg, pg) -> dict:
    vals = {}
    for i, g in enumerate(cg):
        vals[g] = s.coords[i]
    for i, g in enumerate(pg):
        vals[g] = s.momenta[i]
    return vals
