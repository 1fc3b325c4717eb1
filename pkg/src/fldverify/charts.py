"""Programmatic builders for the standard charts and their distinguished
quadratic blocks: flat Cartesian coordinates, the null-pair chart adapted to
p1 + i p2, the exponential chart adapted to J12 + i J23, the Cartesian chart
extended by the cylindrical radius radical, and the stereographic sphere
chart.  Each flat chart carries expressions for the six linear generators
p1, p2, p3, J12, J13, J23 over its own phase space (its flat frame).
"""

from __future__ import annotations

from .context import Context
from .parser import parse
from .phasespace import Chart, PointMap
from .ratexpr import RatExpr, gen_expr, integer, sym
from .scalars import I, QI


def _base(ctx: Context, coords, momenta, params):
    for c in coords:
        ctx.coordinate(c)
    for m in momenta:
        ctx.momentum(m)
    for p in params:
        ctx.parameter(p)


def cartesian(params=(), name: str = "cart") -> Chart:
    ctx = Context()
    _base(ctx, ("x", "y", "z"), ("p1", "p2", "p3"), params)
    x, y, z = (sym(ctx, n) for n in ("x", "y", "z"))
    p1, p2, p3 = (sym(ctx, n) for n in ("p1", "p2", "p3"))
    frame = [p1, p2, p3, x * p2 - y * p1, x * p3 - z * p1, y * p3 - z * p2]
    kin = p1 * p1 + p2 * p2 + p3 * p3
    return Chart(ctx, ["x", "y", "z"], ["p1", "p2", "p3"], kin, name, flat_frame=frame)


def cartesian_with_radius(params=(), name: str = "cartR") -> Chart:
    """Cartesian chart with the radical R, R^2 = x^2 + y^2 (cylindrical radius)."""
    chart = cartesian(params, name)
    ctx = chart.ctx
    from .poly import Poly
    P = Poly.gen(ctx, ctx.get("x").gid, 2) + Poly.gen(ctx, ctx.get("y").gid, 2)
    ctx.atom_with_relation("R", P)
    return chart


def xieta(params=(), name: str = "xieta") -> Chart:
    """Null-pair chart xi = x + i y, eta = x - i y, z; kinetic 4 pxi peta + pz^2."""
    ctx = Context()
    _base(ctx, ("xi", "eta", "z"), ("pxi", "peta", "pz"), params)
    xi, eta, z = (sym(ctx, n) for n in ("xi", "eta", "z"))
    pxi, peta, pz = (sym(ctx, n) for n in ("pxi", "peta", "pz"))
    i = integer(ctx, 1).scale(I)
    half = integer(ctx, 1, 2)
    p1 = pxi + peta
    p2 = i * (pxi - peta)
    p3 = pz
    J12 = i * (xi * pxi - eta * peta)
    J13 = half * (xi + eta) * pz - z * (pxi + peta)
    J23 = i * half * (eta - xi) * pz + i * z * (peta - pxi)
    kin = integer(ctx, 4) * pxi * peta + pz * pz
    return Chart(ctx, ["xi", "eta", "z"], ["pxi", "peta", "pz"], kin, name,
                 flat_frame=[p1, p2, p3, J12, J13, J23])


def xieta_map(cart_chart: Chart, xieta_chart: Chart) -> PointMap:
    """Point map with x = (xi+eta)/2, y = i(eta-xi)/2, z = z."""
    t = xieta_chart.ctx
    xi, eta, z = (sym(t, n) for n in ("xi", "eta", "z"))
    half = integer(t, 1, 2)
    i = integer(t, 1).scale(I)
    return PointMap(cart_chart, xieta_chart,
                    {"x": half * (xi + eta), "y": i * half * (eta - xi), "z": z})


def xieta_blocks(chart: Chart) -> dict:
    """The generalized eigenbasis blocks for the adjoint action of peta.

    Three 3-chains {L1,M1,N1}, {L2,M2,N2}, {L3,M3,N3}, four 2-chains
    {M4,N4}, {M5,N5}, {M6,N6}, {M7,N7}, and the 1-chains N8, N9, N10.
    """
    ctx = chart.ctx
    p1, p2, p3, J12, J13, J23 = chart.flat_frame
    i = integer(ctx, 1).scale(I)
    half = integer(ctx, 1, 2)
    quarter = integer(ctx, 1, 4)
    two = integer(ctx, 2)
    Jm = J13 - i * J23
    Jp = J13 + i * J23
    pp = p1 + i * p2
    pm = p1 - i * p2
    return {
        "L1": -(half * J12 * J12),
        "L2": i * half * J12 * Jm,
        "L3": two * J13 * J13,
        "M1": -(i * half) * pp * J12,
        "M2": -(quarter * pp * Jm) - i * half * p3 * J12,
        "M3": -(two * p3 * J13),
        "M4": J13 * J13 + J23 * J23,
        "M5": i * J12 * Jp,
        "M6": i * p2 * Jm,
        "M7": -(two * i * pm * J12) - p3 * Jm,
        "N1": quarter * pp * pp,
        "N2": half * pp * p3,
        "N3": p3 * p3,
        "N4": -(p3 * Jp),
        "N5": -(half * pp * Jp),
        "N6": -(i * p2 * p3),
        "N7": p1 * p1 + p2 * p2 + p3 * p3,
        "N8": Jp * Jp,
        "N9": -(half * pm * Jp),
        "N10": quarter * pm * pm,
    }


def rho_theta_r(params=(), name: str = "rtr") -> Chart:
    """Exponential chart adapted to the rotation J12 + i J23.

    Coordinates (rho, theta, r) with the atom T = exp(theta).  The flat frame
    is derived from the point transformation itself (so it is canonical by
    construction); the radial momentum comes out as pr = 2 (J12 + i J23).
    """
    from .phasespace import induced_momentum_images
    ctx = Context()
    _base(ctx, ("rho", "theta", "r"), ("prho", "ptheta", "pr"), params)
    T = ctx.atom("T")
    one = integer(ctx, 1)
    ctx.set_rules("T", {"theta": gen_expr(ctx, T.gid)})
    rho, theta, r = (sym(ctx, n) for n in ("rho", "theta", "r"))
    prho, ptheta, pr = (sym(ctx, n) for n in ("prho", "ptheta", "pr"))
    Te = sym(ctx, "T")
    i = one.scale(I)
    quarter = integer(ctx, 1, 4)
    x = -(rho * (one / Te + Te * (quarter - r * r)))
    y = -(rho * r * Te)
    z = i * rho * (one / Te - Te * (quarter + r * r))
    cg = [ctx.get(n).gid for n in ("rho", "theta", "r")]
    p1, p2, p3 = induced_momentum_images([x, y, z], cg, [prho, ptheta, pr])
    J12 = x * p2 - y * p1
    J13 = x * p3 - z * p1
    J23 = y * p3 - z * p2
    kin = p1 * p1 + p2 * p2 + p3 * p3
    return Chart(ctx, ["rho", "theta", "r"], ["prho", "ptheta", "pr"], kin, name,
                 flat_frame=[p1, p2, p3, J12, J13, J23])


def rho_theta_r_map(cart_chart: Chart, rtr_chart: Chart) -> PointMap:
    t = rtr_chart.ctx
    rho, r = sym(t, "rho"), sym(t, "r")
    Te = sym(t, "T")
    one = integer(t, 1)
    quarter = integer(t, 1, 4)
    i = one.scale(I)
    x = -(rho * (one / Te + Te * (quarter - r * r)))
    y = -(rho * r * Te)
    z = i * rho * (one / Te - Te * (quarter + r * r))
    return PointMap(cart_chart, rtr_chart, {"x": x, "y": y, "z": z})


def case4_blocks(chart: Chart) -> dict:
    """Generalized eigenbasis blocks for the adjoint action of pr.

    {L1..L5}, {M1..M5}, {M6,M7,M8}, {N1..N5} are chains; L5, L6, M5, M8,
    N5, N6 span the kernel.  Normalizations make the chain equalities exact.
    """
    ctx = chart.ctx
    p1, p2, p3, J12, J13, J23 = chart.flat_frame
    i = integer(ctx, 1).scale(I)
    f = lambda n, d=1: integer(ctx, n, d)
    Jp = J12 + i * J23
    return {
        "L1": f(1, 24) * J12 * J12,
        "L2": i * f(1, 6) * J12 * J13,
        "L3": f(1, 3) * (J12 * J12 - J13 * J13 + i * J12 * J23),
        "L4": f(2) * i * Jp * J13,
        "L5": f(4) * Jp * Jp,
        "L6": J12 * J12 + J13 * J13 + J23 * J23,
        "M1": f(1, 24) * p1 * J12,
        "M2": f(1, 12) * (p2 * J12 + i * p1 * J13),
        "M3": i * f(1, 6) * (p1 * J23 + f(2) * p2 * J13 + p3 * J12),
        "M4": -(i * p1 * J13) + p2 * Jp - p3 * J13,
        "M5": -(f(4) * (p1 - i * p3) * Jp),
        "M6": f(1, 2) * (p2 * J12 - i * p1 * J13),
        "M7": -(f(2) * p1 * J12) - i * p1 * J23 + i * p3 * J12,
        "M8": -(f(2) * (i * p1 + p3) * J13) - f(2) * p2 * Jp,
        "N1": f(1, 24) * p1 * p1,
        "N2": f(1, 6) * p1 * p2,
        "N3": -(f(1, 3) * (p1 * p1 - p2 * p2 - i * p1 * p3)),
        "N4": -(f(2) * (p1 - i * p3) * p2),
        "N5": f(4) * (p1 - i * p3) * (p1 - i * p3),
        "N6": p1 * p1 + p2 * p2 + p3 * p3,
    }


def sphere_chart(params=()) -> Chart:
    """Stereographic chart of the constant-curvature 3-space."""
    ctx = Context()
    _base(ctx, ("x", "y", "z"), ("px", "py", "pz"), params)
    x, y, z = (sym(ctx, n) for n in ("x", "y", "z"))
    px, py, pz = (sym(ctx, n) for n in ("px", "py", "pz"))
    one = integer(ctx, 1)
    quarter = integer(ctx, 1, 4)
    conf = one + quarter * (x * x + y * y + z * z)
    kin = conf * conf * (px * px + py * py + pz * pz)
    return Chart(ctx, ["x", "y", "z"], ["px", "py", "pz"], kin, "sphere")


def sphere_killing_basis(chart: Chart) -> dict:
    """Rotation generators of the sphere in the stereographic chart."""
    ctx = chart.ctx
    x, y, z = (sym(ctx, n) for n in ("x", "y", "z"))
    px, py, pz = (sym(ctx, n) for n in ("px", "py", "pz"))
    one = integer(ctx, 1)
    quarter = integer(ctx, 1, 4)
    half = integer(ctx, 1, 2)
    return {
        "J12": x * py - y * px,
        "J13": x * pz - z * px,
        "J23": y * pz - z * py,
        "K1": (one + quarter * (x * x - y * y - z * z)) * px + half * x * y * py + half * x * z * pz,
        "K2": (one + quarter * (y * y - x * x - z * z)) * py + half * x * y * px + half * y * z * pz,
        "K3": (one + quarter * (z * z - x * x - y * y)) * pz + half * x * z * px + half * y * z * py,
    }


def sphere_embedding(chart: Chart) -> list:
    """The four embedding functions with sum of squares identically one."""
    ctx = chart.ctx
    x, y, z = (sym(ctx, n) for n in ("x", "y", "z"))
    four = integer(ctx, 4)
    r2 = x * x + y * y + z * z
    den = four + r2
    return [four * x / den, four * y / den, four * z / den, (four - r2) / den]


def jacobi_target(params=()) -> Chart:
    """Cartesian chart extended by the quadratic constants s2, s3 with
    s2^2 = 2 and s3^2 = 3 (used by the orthogonal three-body point map)."""
    chart = cartesian(params, "cart-sqrt")
    ctx = chart.ctx
    from .poly import Poly
    ctx.atom_with_relation("s2", Poly.const(ctx, QI(2)))
    ctx.atom_with_relation("s3", Poly.const(ctx, QI(3)))
    return chart


def jacobi_map(source: Chart, target: Chart) -> PointMap:
    """Orthogonal three-body map; source coordinates are the particle
    positions, target coordinates the adapted frame."""
    t = target.ctx
    x, y, z = (sym(t, n) for n in ("x", "y", "z"))
    s2, s3 = sym(t, "s2"), sym(t, "s3")
    three = integer(t, 3)
    two = integer(t, 2)
    six = integer(t, 6)
    inv_s3 = s3 / three
    inv_s2 = s2 / two
    inv_s6 = s2 * s3 / six
    return PointMap(source, target, {
        "x": inv_s3 * x - inv_s2 * y - inv_s6 * z,
        "y": inv_s3 * x + inv_s2 * y - inv_s6 * z,
        "z": inv_s3 * x + two * inv_s6 * z,
    })


def xyz_null_chart(params=(), name: str = "xyznull") -> Chart:
    """Chart X = x, Y = z - i y, Z = z + i y; kinetic pX^2 + 4 pY pZ."""
    ctx = Context()
    _base(ctx, ("X", "Y", "Z"), ("pX", "pY", "pZ"), params)
    X, Y, Z = (sym(ctx, n) for n in ("X", "Y", "Z"))
    pX, pY, pZ = (sym(ctx, n) for n in ("pX", "pY", "pZ"))
    i = integer(ctx, 1).scale(I)
    half = integer(ctx, 1, 2)
    p1 = pX
    p2 = -(i * (pY - pZ))
    p3 = pY + pZ
    J12 = -(i * X * (pY - pZ)) - i * half * (Y - Z) * pX
    J13 = X * (pY + pZ) - half * (Y + Z) * pX
    J23 = i * (Y * pY - Z * pZ)
    kin = pX * pX + integer(ctx, 4) * pY * pZ
    return Chart(ctx, ["X", "Y", "Z"], ["pX", "pY", "pZ"], kin, name,
                 flat_frame=[p1, p2, p3, J12, J13, J23])


def xyz_null_map(cart_chart: Chart, target: Chart) -> PointMap:
    t = target.ctx
    X, Y, Z = (sym(t, n) for n in ("X", "Y", "Z"))
    i = integer(t, 1).scale(I)
    half = integer(t, 1, 2)
    return PointMap(cart_chart, target,
                    {"x": X, "y": i * half * (Y - Z), "z": half * (Y + Z)})
