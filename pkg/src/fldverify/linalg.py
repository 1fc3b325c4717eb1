"""Exact linear algebra: fraction-free elimination over polynomial entries,
plain field elimination over rational expressions, and dense solvers over
Gaussian-rational scalars.

The fraction-free (Bareiss) route is the production path for kernels over the
rational-function field; the field-elimination route exists as an independent
oracle and the two are cross-checked in the test suite.
"""

from __future__ import annotations

from .poly import Poly
from .ratexpr import RatExpr, one, zero
from .scalars import ONE, QI, ZERO


# -- fraction-free elimination over Poly -----------------------------------------


def bareiss_echelon(rows: list[list[Poly]]):
    """Fraction-free row echelon form.

    Returns (echelon rows, pivot column list).  Entries stay polynomial at
    every step; each two-step quotient divides exactly.
    """
    if not rows:
        return [], []
    m = [list(r) for r in rows]
    nr, nc = len(m), len(m[0])
    ctx = m[0][0].ctx
    prev = Poly.const(ctx, ONE)
    pivots = []
    r = 0
    for c in range(nc):
        piv = next((k for k in range(r, nr) if not m[k][c].is_zero()), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        for k in range(r + 1, nr):
            mk = m[k]
            mkc = mk[c]
            for j in range(nc):
                num = pv * mk[j] - mkc * m[r][j]
                mk[j] = num.divexact(prev) if not num.is_zero() else num
        prev = pv
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return m[:r], pivots


def poly_nullspace(rows: list[list[Poly]], ctx) -> list[list[RatExpr]]:
    """Basis of the right nullspace over the rational-function field."""
    nc = len(rows[0]) if rows else 0
    ech, pivots = bareiss_echelon(rows)
    free = [c for c in range(nc) if c not in pivots]
    basis = []
    for fc in free:
        x = [zero(ctx)] * nc
        x[fc] = one(ctx)
        for r in range(len(pivots) - 1, -1, -1):
            pc = pivots[r]
            s = zero(ctx)
            for c in range(pc + 1, nc):
                if not ech[r][c].is_zero() and not x[c].is_zero():
                    s = s + RatExpr.from_poly(ech[r][c]) * x[c]
            x[pc] = -(s / RatExpr.from_poly(ech[r][pc]))
        basis.append(x)
    return basis


def poly_rank(rows: list[list[Poly]]) -> int:
    _, pivots = bareiss_echelon(rows)
    return len(pivots)


# -- field elimination over RatExpr (oracle route) ----------------------------------


def field_echelon(rows: list[list[RatExpr]]):
    """Gaussian elimination with division; returns (echelon rows, pivots)."""
    if not rows:
        return [], []
    m = [list(r) for r in rows]
    nr, nc = len(m), len(m[0])
    pivots = []
    r = 0
    for c in range(nc):
        piv = next((k for k in range(r, nr) if not m[k][c].is_zero()), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = m[r][c]
        m[r] = [x / inv for x in m[r]]
        for k in range(nr):
            if k != r and not m[k][c].is_zero():
                f = m[k][c]
                m[k] = [x - f * y for x, y in zip(m[k], m[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return m[:r], pivots


def field_nullspace(rows: list[list[RatExpr]], ctx) -> list[list[RatExpr]]:
    nc = len(rows[0]) if rows else 0
    ech, pivots = field_echelon(rows)
    free = [c for c in range(nc) if c not in pivots]
    basis = []
    for fc in free:
        x = [zero(ctx)] * nc
        x[fc] = one(ctx)
        for r in range(len(pivots) - 1, -1, -1):
            pc = pivots[r]
            s = zero(ctx)
            for c in range(pc + 1, nc):
                if not ech[r][c].is_zero() and not x[c].is_zero():
                    s = s + ech[r][c] * x[c]
            x[pc] = -s
        basis.append(x)
    return basis


def field_rank(rows: list[list[RatExpr]]) -> int:
    _, pivots = field_echelon(rows)
    return len(pivots)


def clear_denominators(row: list[RatExpr]) -> list[Poly]:
    """Scale a row by the product of its distinct denominators.

    Every entry becomes polynomial; each entry's own denominator occurs once
    in the product and cancels against it.
    """
    if not row:
        return []
    dens = []
    for e in row:
        if not e.den.is_one() and not any(e.den == d for d in dens):
            dens.append(e.den)
    out = []
    for e in row:
        p = e.num
        for d in dens:
            if d == e.den:
                continue
            p = p * d
        out.append(p)
    return out


# -- dense exact-scalar linear algebra ------------------------------------------------


def qi_echelon(rows: list[list[QI]]):
    if not rows:
        return [], []
    m = [list(r) for r in rows]
    nr, nc = len(m), len(m[0])
    pivots = []
    r = 0
    for c in range(nc):
        piv = next((k for k in range(r, nr) if not m[k][c].is_zero()), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = m[r][c].inv()
        m[r] = [x * inv for x in m[r]]
        for k in range(nr):
            if k != r and not m[k][c].is_zero():
                f = m[k][c]
                m[k] = [x - f * y for x, y in zip(m[k], m[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return m[:r], pivots


def qi_rank(rows: list[list[QI]]) -> int:
    _, pivots = qi_echelon(rows)
    return len(pivots)


def qi_solve(a_columns: list[list[QI]], b: list[QI]):
    """Solve sum_j x_j * column_j = b exactly; None if inconsistent."""
    nr = len(b)
    nc = len(a_columns)
    aug = [[a_columns[j][i] for j in range(nc)] + [b[i]] for i in range(nr)]
    ech, pivots = qi_echelon(aug)
    if nc in pivots:
        return None
    x = [ZERO] * nc
    for r, pc in enumerate(pivots):
        x[pc] = ech[r][nc]
    # verify (guards against underdetermined systems picking free vars = 0)
    for i in range(nr):
        s = ZERO
        for j in range(nc):
            if not x[j].is_zero():
                s = s + a_columns[j][i] * x[j]
        if s != b[i]:
            return None
    return x


def qi_mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    out = [[ZERO] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for t in range(k):
            c = ai[t]
            if c.is_zero():
                continue
            bt = b[t]
            for j in range(m):
                if not bt[j].is_zero():
                    oi[j] = oi[j] + c * bt[j]
    return out


def qi_identity(n):
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def qi_is_zero_matrix(a) -> bool:
    return all(x.is_zero() for row in a for x in row)
