"""Adjoint-action machinery on the 20-dimensional space of quadratic
momentum forms over flat 3-space: exact Ad matrices, nilpotency indices,
chains, and Jordan block structure for the eigenvalues 0, +-i, +-2i.
"""

from __future__ import annotations

from .fld import constant_rank, in_constant_span, span_vectors
from .linalg import qi_identity, qi_is_zero_matrix, qi_mat_mul, qi_rank, qi_solve
from .phasespace import Chart, poisson
from .ratexpr import RatExpr, zero
from .scalars import I, ONE, QI, ZERO


class AdjointError(ValueError):
    pass


class QuadraticBasis:
    """The 20 independent products of the six flat-space linear generators.

    One mixed product is omitted because the triple product of momentum and
    angular momentum vanishes identically; the omitted pair is recorded.
    """

    def __init__(self, chart: Chart, labels, elements, omitted: str):
        self.chart = chart
        self.labels = labels
        self.elements = elements
        self.omitted = omitted


FRAME_LABELS = ("p1", "p2", "p3", "J12", "J13", "J23")


def quadratic_basis(chart: Chart, omit: tuple[str, str] = ("p2", "J13")) -> QuadraticBasis:
    """Pairwise products of the flat frame with one redundant product omitted.

    The chart must carry a flat frame (expressions for p1, p2, p3, J12, J13,
    J23 over its own phase space).
    """
    frame = chart.flat_frame
    if frame is None:
        raise AdjointError("chart carries no flat frame; not an image of flat 3-space")
    lin = dict(zip(FRAME_LABELS, frame))
    # the identity resolving the redundancy
    ident = lin["p1"] * lin["J23"] - lin["p2"] * lin["J13"] + lin["p3"] * lin["J12"]
    if not ident.is_zero():
        raise AdjointError("flat frame does not satisfy the triple-product identity")
    labels = []
    elements = []
    for i, a in enumerate(FRAME_LABELS):
        for b in FRAME_LABELS[i:]:
            if (a, b) == omit or (b, a) == omit:
                continue
            labels.append(f"{a}*{b}")
            elements.append(lin[a] * lin[b])
    if len(elements) != 20:
        raise AdjointError("expected 20 basis elements")
    if constant_rank(elements) != 20:
        raise AdjointError("quadratic products are not independent in this chart")
    return QuadraticBasis(chart, labels, elements, f"{omit[0]}*{omit[1]}")


class AdMatrix:
    """Exact matrix of Ad_J = {J, .} on a quadratic basis (column j holds the
    coordinates of the image of basis element j)."""

    def __init__(self, basis: QuadraticBasis, J: RatExpr, matrix, label: str = "J"):
        self.basis = basis
        self.J = J
        self.matrix = matrix  # 20x20 nested list of QI
        self.label = label

    def column(self, j: int):
        return [self.matrix[i][j] for i in range(len(self.matrix))]


def ad_matrix(J: RatExpr, basis: QuadraticBasis, label: str = "J") -> AdMatrix:
    """Expand {J, basis_j} exactly back in the basis; the expansion must be
    exact, otherwise the image escapes the span and an error is raised."""
    chart = basis.chart
    n = len(basis.elements)
    images = [poisson(J, e, chart) for e in basis.elements]
    _, vecs = span_vectors(basis.elements + images, chart.ctx)
    basis_vecs = vecs[:n]
    m = len(basis_vecs[0])
    columns = [[basis_vecs[j][i] for j in range(n)] for i in range(m)]
    matrix = [[ZERO] * n for _ in range(n)]
    for j in range(n):
        img = vecs[n + j]
        sol = qi_solve([[basis_vecs[k][i] for i in range(m)] for k in range(n)], img)
        if sol is None:
            raise AdjointError(
                f"image of basis element {basis.labels[j]!r} escapes the span")
        for i in range(n):
            matrix[i][j] = sol[i]
    return AdMatrix(basis, J, matrix, label)


def nilpotency_index(m: AdMatrix):
    """Least k with Ad^k = 0, or None if the matrix is not nilpotent."""
    a = m.matrix
    n = len(a)
    power = a
    for k in range(1, n + 1):
        if qi_is_zero_matrix(power):
            return k
        power = qi_mat_mul(power, a)
    return None


class ChainReport:
    def __init__(self, seed_label, elements):
        self.seed_label = seed_label
        self.elements = elements

    @property
    def length(self) -> int:
        return len(self.elements)


def chain(J: RatExpr, seed: RatExpr, chart: Chart, seed_label: str = "seed",
          max_steps: int = 20) -> ChainReport:
    """The sequence seed, Ad_J seed, ... down to (but excluding) zero."""
    out = [seed]
    cur = seed
    for _ in range(max_steps):
        cur = poisson(J, cur, chart)
        if cur.is_zero():
            return ChainReport(seed_label, out)
        out.append(cur)
    raise AdjointError("chain did not terminate; operator is not nilpotent on the seed")


EIGENVALUES = (QI(0), I, -I, I * QI(2), -(I * QI(2)))


def jordan_structure(m: AdMatrix) -> dict:
    """Jordan block sizes per eigenvalue, from exact rank sequences.

    Only the eigenvalues 0, +-i, +-2i are supported; if they do not exhaust
    the spectrum the product of the corresponding maximal powers cannot
    annihilate the space and an error is raised.
    """
    a = m.matrix
    n = len(a)
    result = {}
    checker = qi_identity(n)
    for lam in EIGENVALUES:
        shifted = [[a[i][j] - (lam if i == j else ZERO) for j in range(n)]
                   for i in range(n)]
        # kernel dimension sequence
        dims = [0]
        power = qi_identity(n)
        while True:
            power = qi_mat_mul(power, shifted)
            dims.append(n - qi_rank(power))
            if dims[-1] == dims[-2]:
                break
        mult = dims[-1]
        if mult:
            blocks = []
            # number of blocks of size >= k is dims[k] - dims[k-1]
            ge = [dims[k] - dims[k - 1] for k in range(1, len(dims))]
            for k in range(len(ge)):
                exactly = ge[k] - (ge[k + 1] if k + 1 < len(ge) else 0)
                blocks.extend([k + 1] * exactly)
            result[lam] = sorted(blocks)
            top = qi_identity(n)
            for _ in range(len(dims) - 1):
                top = qi_mat_mul(top, shifted)
            checker = qi_mat_mul(checker, top)
    if not qi_is_zero_matrix(checker):
        raise AdjointError("spectrum contains an unsupported eigenvalue")
    return result


def eigenvalue_multiplicities(m: AdMatrix) -> dict:
    return {lam: sum(blocks) for lam, blocks in jordan_structure(m).items()}
