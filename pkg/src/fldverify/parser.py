"""S-expression DSL for exact expressions, plus a generic s-expression reader.

Expression grammar (UTF-8 text):

    expr   := NUMBER | SYMBOL | "(" OP expr+ ")"
    OP     := "+" | "-" | "*" | "/" | "^" | "neg"
    NUMBER := optional sign, decimal integer, optional "/" decimal integer

"^" takes an integer literal exponent only (negative allowed, via the
reciprocal).  The symbol "i" is reserved for the imaginary unit.  All other
symbols must be declared generators (or labels supplied by the caller).
Errors carry the source position.
"""

from __future__ import annotations

import re

from .context import Context
from .ratexpr import RatExpr, const, gen_expr, zero
from .scalars import I, QI

_NUMBER = re.compile(r"[+-]?\d+(/\d+)?\Z")
_OPS = ("+", "-", "*", "/", "^", "neg")


class ParseError(ValueError):
    def __init__(self, message: str, pos: tuple[int, int] | None = None):
        self.pos = pos
        if pos is not None:
            message = f"{pos[0]}:{pos[1]}: {message}"
        super().__init__(message)


class Symbol(str):
    """A bare symbol in a parsed s-expression."""


class Node:
    """Parsed s-expression node with its source position."""

    __slots__ = ("value", "pos")

    def __init__(self, value, pos):
        self.value = value
        self.pos = pos

    def __repr__(self):
        return f"Node({self.value!r})"


def tokenize(text: str):
    line, col = 1, 1
    i, n = 0, len(text)
    out = []
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == ";":  # comment to end of line
            while i < n and text[i] != "\n":
                i += 1
            continue
        pos = (line, col)
        if c in "()":
            out.append((c, c, pos))
            i += 1
            col += 1
            continue
        if c == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    buf.append(text[j + 1])
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            if j >= n:
                raise ParseError("unterminated string", pos)
            out.append(("STR", "".join(buf), pos))
            col += j - i + 1
            i = j + 1
            continue
        j = i
        while j < n and text[j] not in ' \t\r\n();"':
            j += 1
        tok = text[i:j]
        out.append(("ATOM", tok, pos))
        col += j - i
        i = j
    return out


def read_forms(text: str) -> list[Node]:
    """Read every top-level s-expression in the text."""
    toks = tokenize(text)
    forms = []
    idx = 0

    def rd(k):
        nonlocal idx
        kind, val, pos = toks[k]
        if kind == "(":
            items = []
            k += 1
            while True:
                if k >= len(toks):
                    raise ParseError("unbalanced parenthesis", pos)
                if toks[k][0] == ")":
                    return Node(items, pos), k + 1
                node, k = rd(k)
                items.append(node)
        if kind == ")":
            raise ParseError("unexpected ')'", pos)
        if kind == "STR":
            return Node(val, pos), k + 1
        return Node(Symbol(val), pos), k + 1

    while idx < len(toks):
        node, idx = rd(idx)
        forms.append(node)
    return forms


def read_one(text: str) -> Node:
    forms = read_forms(text)
    if len(forms) != 1:
        raise ParseError(f"expected a single expression, found {len(forms)}")
    return forms[0]


def _number(tok: str, ctx: Context) -> RatExpr:
    if "/" in tok:
        a, b = tok.split("/", 1)
        return const(ctx, QI.from_rational(int(a), int(b)))
    return const(ctx, QI.from_rational(int(tok)))


def eval_node(node: Node, ctx: Context, lookup=None) -> RatExpr:
    """Evaluate a parsed node to a RatExpr.

    lookup, if given, maps extra symbol names (labels) to expressions and is
    consulted before the generator table.
    """
    v = node.value
    if isinstance(v, Symbol):
        if _NUMBER.match(v):
            return _number(v, ctx)
        if v == "i":
            return const(ctx, I)
        if lookup is not None:
            hit = lookup.get(v)
            if hit is not None:
                return hit
        if v in ctx:
            return gen_expr(ctx, ctx.get(v).gid)
        raise ParseError(f"undeclared symbol {v!r}", node.pos)
    if isinstance(v, str):
        raise ParseError("string literal where an expression was expected", node.pos)
    if not v:
        raise ParseError("empty form", node.pos)
    head = v[0].value
    if not isinstance(head, Symbol) or head not in _OPS:
        raise ParseError(f"unknown operator {head!r}", v[0].pos)
    args = v[1:]
    if not args:
        raise ParseError(f"operator {head!r} needs at least one argument", node.pos)
    if head == "neg":
        if len(args) != 1:
            raise ParseError("neg takes one argument", node.pos)
        return -eval_node(args[0], ctx, lookup)
    if head == "^":
        if len(args) != 2:
            raise ParseError("^ takes a base and an integer exponent", node.pos)
        ev = args[1].value
        if not (isinstance(ev, Symbol) and re.fullmatch(r"[+-]?\d+", ev)):
            raise ParseError("exponent must be an integer literal", args[1].pos)
        base = eval_node(args[0], ctx, lookup)
        k = int(ev)
        if k < 0 and base.is_zero():
            raise ParseError("negative power of syntactic zero", node.pos)
        return base ** k
    vals = [eval_node(a, ctx, lookup) for a in args]
    if head == "+":
        out = vals[0]
        for w in vals[1:]:
            out = out + w
        return out
    if head == "-":
        if len(vals) == 1:
            return -vals[0]
        out = vals[0]
        for w in vals[1:]:
            out = out - w
        return out
    if head == "*":
        out = vals[0]
        for w in vals[1:]:
            out = out * w
        return out
    # division; reject syntactic zero denominators with a position
    out = vals[0]
    for a, w in zip(args[1:], vals[1:]):
        if w.is_zero():
            raise ParseError("division by zero", a.pos)
        out = out / w
    return out


def parse(text: str, ctx: Context, lookup=None) -> RatExpr:
    """Parse one DSL expression against a generator table."""
    return eval_node(read_one(text), ctx, lookup)


# -- serialisation back to the DSL -------------------------------------------------


def _unparse_scalar(c: QI) -> str:
    re_s = str(c.re)
    if not c.im:
        return re_s
    im_s = str(c.im)
    im_part = "i" if c.im == 1 else f"(* {im_s} i)"
    if not c.re:
        return im_part
    return f"(+ {re_s} {im_part})"


def _unparse_poly(p) -> str:
    if p.is_zero():
        return "0"
    names = {g.gid: g.name for g in p.ctx.gens}
    terms = []
    for mono in sorted(p.terms, key=lambda m: (sum(e for _, e in m), m)):
        c = p.terms[mono]
        factors = [f"(^ {names[g]} {e})" if e > 1 else names[g] for g, e in mono]
        cs = _unparse_scalar(c)
        if not factors:
            terms.append(cs)
        elif c.is_one():
            terms.append(factors[0] if len(factors) == 1 else "(* " + " ".join(factors) + ")")
        else:
            terms.append("(* " + cs + " " + " ".join(factors) + ")")
    if len(terms) == 1:
        return terms[0]
    return "(+ " + " ".join(terms) + ")"


def unparse(e: RatExpr) -> str:
    """Serialise an expression to DSL text; parsing it back gives an equal value."""
    num = _unparse_poly(e.num)
    if e.den.is_one():
        return num
    return f"(/ {num} {_unparse_poly(e.den)})"
