"""Machine-readable catalog: loader, schema checks and the verification
engine that re-derives every algebraic claim an entry makes.

Catalog files are s-expression documents, one (system ...) form per entry:

    (system ID
      (chart (coords A B C) (momenta A B C) (kinetic EXPR)
             (atom NAME raw (wrt COORD EXPR)... )
             (atom NAME raw (relation EXPR))
             (atom NAME fun of EXPR prime NAME2)
             (frame (p1 EXPR) ... (J23 EXPR)))          ; optional
      (params NAME ...)
      (hamiltonian EXPR)
      (killing NAME EXPR) ...
      (symmetry NAME (s0 ((i j) EXPR) ...) (w EXPR)) ...
      (fld (over NAME ...) (coeffs EXPR ...)) ...
      (bracket (A B) EXPR-in-labels) ...
      (identity EXPR-in-labels) ...
      (expect (constant-rank N) (functional-rank N) (unlisted-brackets-zero BOOL))
      (notes "..."))

s0 entries give the symmetric coefficient a^ij (1-based index pairs, i <= j);
the off-diagonal momentum monomial p_i p_j therefore carries 2 a^ij.  The
optional frame clause stores the six flat-space linear generators over the
chart, which is how entries authored in an adapted chart keep their original
flat-coordinates form available for cross-checking.
"""

from __future__ import annotations

import time

from .context import Context
from .fld import (FLDError, FLDRelation, MomentumMatrix, c_tensor, constant_rank,
                  fld_kernel, functional_rank, in_constant_span, killing_candidates,
                  span_vectors, verify_fld)
from .linalg import qi_rank
from .parser import Node, ParseError, Symbol, eval_node, read_forms
from .phasespace import (Chart, ChartError, Hamiltonian, Symmetry, bd_residual,
                         poisson, symmetry_residual)
from .ratexpr import RatExpr, derive, substitute, zero
from .scalars import QI


class CatalogError(ValueError):
    def __init__(self, message, pos=None):
        if pos is not None:
            message = f"{pos[0]}:{pos[1]}: {message}"
        super().__init__(message)


class BracketSpec:
    def __init__(self, a: str, b: str, rhs_node: Node, rhs: RatExpr):
        self.a = a
        self.b = b
        self.rhs_node = rhs_node
        self.rhs = rhs


class CatalogEntry:
    def __init__(self, entry_id: str, chart: Chart, hamiltonian: Hamiltonian,
                 killing: dict, symmetries: list, fld_relations: list,
                 brackets: list, identities: list, expect: dict, notes: str,
                 param_names: list):
        self.id = entry_id
        self.chart = chart
        self.hamiltonian = hamiltonian
        self.killing = killing
        self.symmetries = symmetries
        self.fld_relations = fld_relations
        self.brackets = brackets
        self.identities = identities
        self.expect = expect
        self.notes = notes
        self.param_names = param_names

    def symmetry(self, label: str) -> Symmetry:
        for s in self.symmetries:
            if s.label == label:
                return s
        raise KeyError(label)

    def labelled_exprs(self) -> dict:
        out = {k: v for k, v in self.killing.items()}
        for s in self.symmetries:
            out[s.label] = s.expr()
        return out

    def __repr__(self):
        return f"<CatalogEntry {self.id}>"


# -- loading ----------------------------------------------------------------------------


def _clauses(form: Node, head: str):
    return [n for n in form.value[1:]
            if isinstance(n.value, list) and n.value
            and isinstance(n.value[0].value, Symbol) and n.value[0].value == head]


def _clause(form: Node, head: str, required=True):
    hits = _clauses(form, head)
    if not hits:
        if required:
            raise CatalogError(f"missing ({head} ...) clause", form.pos)
        return None
    if len(hits) > 1:
        raise CatalogError(f"duplicate ({head} ...) clause", hits[1].pos)
    return hits[0]


def _symbols(node: Node) -> list[str]:
    out = []
    for n in node.value[1:]:
        if not isinstance(n.value, Symbol):
            raise CatalogError("expected a symbol", n.pos)
        out.append(str(n.value))
    return out


def _load_chart(form: Node, params: list[str]) -> Chart:
    chart_form = _clause(form, "chart")
    coords = _symbols(_clause(chart_form, "coords"))
    momenta = _symbols(_clause(chart_form, "momenta"))
    ctx = Context()
    for c in coords:
        ctx.coordinate(c)
    for m in momenta:
        ctx.momentum(m)
    for p in params:
        ctx.parameter(p)
    atom_forms = _clauses(chart_form, "atom")
    # first pass: declare every atom name
    specs = []
    for af in atom_forms:
        items = af.value
        if len(items) < 3 or not isinstance(items[1].value, Symbol):
            raise CatalogError("malformed atom clause", af.pos)
        name = str(items[1].value)
        kind = str(items[2].value)
        g = ctx.atom(name)
        specs.append((g, kind, af))
    # second pass: parse rules / relations / arguments
    for g, kind, af in specs:
        items = af.value
        if kind == "raw":
            rules = {}
            relation = None
            for sub in items[3:]:
                if not isinstance(sub.value, list) or not sub.value:
                    raise CatalogError("malformed atom subclause", sub.pos)
                head = str(sub.value[0].value)
                if head == "wrt":
                    coord = str(sub.value[1].value)
                    expr = eval_node(sub.value[2], ctx)
                    rules[ctx.get(coord).gid] = expr
                elif head == "relation":
                    rel = eval_node(sub.value[1], ctx)
                    if not rel.is_poly():
                        raise CatalogError("relation must be polynomial", sub.pos)
                    relation = rel.num
                else:
                    raise CatalogError(f"unknown atom subclause {head!r}", sub.pos)
            if relation is not None:
                for mon in relation.terms:
                    for gid, _e in mon:
                        if gid == g.gid:
                            raise CatalogError("relation mentions the atom itself", af.pos)
                g.relation = relation
                ctx.relation_gids.add(g.gid)
            if rules:
                g.rules = rules
        elif kind == "fun":
            # (atom NAME fun of EXPR prime NAME2)
            words = [str(n.value) if isinstance(n.value, Symbol) else None for n in items]
            try:
                of_idx = words.index("of")
                prime_idx = words.index("prime")
            except ValueError:
                raise CatalogError("fun atom needs 'of EXPR prime NAME'", af.pos)
            g.fun_arg = eval_node(items[of_idx + 1], ctx)
            g.prime_name = str(items[prime_idx + 1].value)
        else:
            raise CatalogError(f"unknown atom kind {kind!r}", af.pos)
    kinetic = eval_node(_clause(chart_form, "kinetic").value[1], ctx)
    frame = None
    frame_form = _clause(chart_form, "frame", required=False)
    if frame_form is not None:
        by_name = {}
        for sub in frame_form.value[1:]:
            by_name[str(sub.value[0].value)] = eval_node(sub.value[1], ctx)
        order = ("p1", "p2", "p3", "J12", "J13", "J23")
        if set(by_name) != set(order):
            raise CatalogError("frame must list p1 p2 p3 J12 J13 J23", frame_form.pos)
        frame = [by_name[k] for k in order]
    return Chart(ctx, coords, momenta, kinetic, name="chart", flat_frame=frame)


def load_entry(form: Node) -> CatalogEntry:
    items = form.value
    if not items or str(items[0].value) != "system":
        raise CatalogError("expected a (system ...) form", form.pos)
    if len(items) < 2 or not isinstance(items[1].value, Symbol):
        raise CatalogError("system form needs an identifier", form.pos)
    entry_id = str(items[1].value)
    params_form = _clause(form, "params", required=False)
    params = _symbols(params_form) if params_form is not None else []
    chart = _load_chart(form, params)
    ctx = chart.ctx
    h_expr = eval_node(_clause(form, "hamiltonian").value[1], ctx)
    potential = h_expr - chart.kinetic
    hamiltonian = Hamiltonian(chart, potential)
    killing = {}
    for kf in _clauses(form, "killing"):
        killing[str(kf.value[1].value)] = eval_node(kf.value[2], ctx)
    symmetries = []
    labels = set(killing)
    for sf in _clauses(form, "symmetry"):
        label = str(sf.value[1].value)
        if label in labels:
            raise CatalogError(f"duplicate label {label!r}", sf.pos)
        labels.add(label)
        s0_form = _clause(sf, "s0")
        s0 = {}
        for pair in s0_form.value[1:]:
            idx = pair.value[0]
            i = int(str(idx.value[0].value))
            j = int(str(idx.value[1].value))
            if not (1 <= i <= chart.dim() and 1 <= j <= chart.dim()):
                raise CatalogError("s0 index out of range", pair.pos)
            s0[(i - 1, j - 1)] = eval_node(pair.value[1], ctx)
        w_form = _clause(sf, "w", required=False)
        w = eval_node(w_form.value[1], ctx) if w_form is not None else zero(ctx)
        symmetries.append(Symmetry(chart, label, s0, w))
    by_label = {s.label: s for s in symmetries}
    fld_relations = []
    for ff in _clauses(form, "fld"):
        over = _symbols(_clause(ff, "over"))
        coeff_nodes = _clause(ff, "coeffs").value[1:]
        if len(over) != len(coeff_nodes):
            raise CatalogError("fld over/coeffs length mismatch", ff.pos)
        for lbl in over:
            if lbl not in by_label:
                raise CatalogError(f"fld references undefined symmetry {lbl!r}", ff.pos)
        coeffs = [eval_node(n, ctx) for n in coeff_nodes]
        fld_relations.append(FLDRelation(over, coeffs))
    lookup = {k: v for k, v in killing.items()}
    lookup.update({s.label: s.expr() for s in symmetries})
    brackets = []
    for bf in _clauses(form, "bracket"):
        pair = bf.value[1]
        a = str(pair.value[0].value)
        b = str(pair.value[1].value)
        for lbl in (a, b):
            if lbl not in lookup:
                raise CatalogError(f"bracket references undefined label {lbl!r}", bf.pos)
        rhs = eval_node(bf.value[2], ctx, lookup)
        brackets.append(BracketSpec(a, b, bf.value[2], rhs))
    identities = [eval_node(idf.value[1], ctx, lookup) for idf in _clauses(form, "identity")]
    expect = {"constant_rank": None, "functional_rank": None, "unlisted_zero": True}
    exf = _clause(form, "expect", required=False)
    if exf is not None:
        for sub in exf.value[1:]:
            head = str(sub.value[0].value)
            val = str(sub.value[1].value)
            if head == "constant-rank":
                expect["constant_rank"] = int(val)
            elif head == "functional-rank":
                expect["functional_rank"] = int(val)
            elif head == "unlisted-brackets-zero":
                expect["unlisted_zero"] = val == "true"
            else:
                raise CatalogError(f"unknown expectation {head!r}", sub.pos)
    notes_form = _clause(form, "notes", required=False)
    notes = notes_form.value[1].value if notes_form is not None else ""
    return CatalogEntry(entry_id, chart, hamiltonian, killing, symmetries,
                        fld_relations, brackets, identities, expect, notes, params)


def load_catalog(path_or_text) -> list[CatalogEntry]:
    """Load every entry of a catalog document; identifiers must be unique."""
    if "\n" in str(path_or_text) or str(path_or_text).lstrip().startswith("("):
        text = str(path_or_text)
    else:
        with open(path_or_text, "r", encoding="utf-8") as fh:
            text = fh.read()
    entries = []
    seen = set()
    for form in read_forms(text):
        e = load_entry(form)
        if e.id in seen:
            raise CatalogError(f"duplicate system id {e.id!r}", form.pos)
        seen.add(e.id)
        entries.append(e)
    return entries


def builtin_catalog_path() -> str:
    import importlib.resources as res
    return str(res.files("fldverify").joinpath("data/catalog.sexp"))


def load_builtin() -> list[CatalogEntry]:
    return load_catalog(builtin_catalog_path())


# -- verification ----------------------------------------------------------------------------


CHECK_NAMES = ("symmetry", "fld", "algebra", "bd", "funcdep", "rank", "class", "sphere")


class CheckRecord:
    def __init__(self, system: str, check: str, target: str, passed, detail: str = "",
                 seconds: float = 0.0, skipped: bool = False):
        self.system = system
        self.check = check
        self.target = target
        self.passed = passed
        self.detail = detail
        self.seconds = seconds
        self.skipped = skipped

    def as_dict(self):
        return {"system": self.system, "check": self.check, "target": self.target,
                "status": "skip" if self.skipped else ("pass" if self.passed else "fail"),
                "detail": self.detail, "seconds": round(self.seconds, 4)}

    def __repr__(self):
        status = "skip" if self.skipped else ("PASS" if self.passed else "FAIL")
        return f"[{status}] {self.system}/{self.check}:{self.target} {self.detail}"


def _timed(records, system, check, target, fn):
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # verification reports failures, it does not raise
        ok, detail = False, f"error: {exc}"
    records.append(CheckRecord(system, check, target, ok, detail,
                               time.perf_counter() - t0))


def check_symmetries(entry: CatalogEntry, records: list):
    H = entry.hamiltonian
    for label, j in entry.killing.items():
        def run(j=j):
            r = poisson(H.expr, j, H.chart)
            return r.is_zero(), "" if r.is_zero() else f"residual {r!r}"
        _timed(records, entry.id, "symmetry", label, run)
    for s in entry.symmetries:
        def run(s=s):
            res = symmetry_residual(H, s)
            bad = {k: v for k, v in res.items() if not v.is_zero()}
            return not bad, "" if not bad else f"{len(bad)} nonzero residual(s)"
        _timed(records, entry.id, "symmetry", s.label, run)


def check_fld(entry: CatalogEntry, records: list):
    by_label = {s.label: s for s in entry.symmetries}
    for idx, rel in enumerate(entry.fld_relations):
        def run(rel=rel):
            syms = [by_label[l] for l in rel.labels]
            ok = verify_fld(rel, syms)
            if not ok:
                return False, "combination does not vanish"
            if not rel.is_functional():
                return False, "all coefficients constant"
            ct = c_tensor(rel, syms, entry.chart)
            if not ct.lemma_ok():
                return True, "defect identities hold; derivative identities skipped"
            return True, ""
        _timed(records, entry.id, "fld", f"relation{idx}", run)


def check_algebra(entry: CatalogEntry, records: list):
    chart = entry.chart
    exprs = entry.labelled_exprs()
    listed = set()
    for spec in entry.brackets:
        listed.add(frozenset((spec.a, spec.b)))
        def run(spec=spec):
            r = poisson(exprs[spec.a], exprs[spec.b], chart) - spec.rhs
            return r.is_zero(), "" if r.is_zero() else "bracket mismatch"
        _timed(records, entry.id, "algebra", f"{{{spec.a},{spec.b}}}", run)
    if entry.expect["unlisted_zero"]:
        labels = list(exprs)
        def run_rest():
            bad = []
            for i in range(len(labels)):
                for j in range(i + 1, len(labels)):
                    key = frozenset((labels[i], labels[j]))
                    if key in listed:
                        continue
                    if not poisson(exprs[labels[i]], exprs[labels[j]], chart).is_zero():
                        bad.append(f"{{{labels[i]},{labels[j]}}}")
            return not bad, ", ".join(bad)
        _timed(records, entry.id, "algebra", "unlisted-zero", run_rest)


def check_bd(entry: CatalogEntry, records: list):
    H = entry.hamiltonian
    for s in entry.symmetries:
        def run(s=s):
            res = bd_residual(H, s)
            bad = [r for r in res if not r.is_zero()]
            return not bad, "" if not bad else f"{len(bad)} nonzero closedness residual(s)"
        _timed(records, entry.id, "bd", s.label, run)


def check_funcdep(entry: CatalogEntry, records: list):
    for idx, ident in enumerate(entry.identities):
        def run(ident=ident):
            return ident.is_zero(), "" if ident.is_zero() else "identity does not vanish"
        _timed(records, entry.id, "funcdep", f"identity{idx}", run)


def check_rank(entry: CatalogEntry, records: list, seed: int = 0):
    if entry.expect["constant_rank"] is not None:
        def run_c():
            got = constant_rank(entry.symmetries)
            want = entry.expect["constant_rank"]
            return got == want, f"got {got}, expected {want}"
        _timed(records, entry.id, "rank", "constant", run_c)
    if entry.expect["functional_rank"] is not None:
        def run_f():
            got = functional_rank([s.expr() for s in entry.symmetries],
                                  entry.chart, trials=8, seed=seed)
            want = entry.expect["functional_rank"]
            return got == want, f"got {got}, expected {want}"
        _timed(records, entry.id, "rank", "functional", run_f)


def potential_family_terms(entry: CatalogEntry):
    """Directions of the potential family: gradients along linearly entering
    parameters plus (for arbitrary-function entries) two instantiations of the
    abstract part."""
    from .numcheck import NumericError, instantiate_atoms
    V = entry.hamiltonian.potential
    ctx = entry.chart.ctx
    terms = []
    strength = {}
    for name in entry.param_names:
        g = ctx.get(name)
        dv = derive(V, g.gid)
        if dv.is_zero():
            continue
        if any(ctx.gens[gg].kind == "parameter" for gg in dv.gids()):
            continue  # enters nonlinearly: structural parameter
        terms.append(dv)
        strength[name] = zero(ctx)
    fun_bases = [g.name for g in ctx.gens if g.fun_arg is not None
                 and not g.name.endswith("'")]
    if fun_bases:
        vf = substitute(V, strength) if strength else V
        for tmpl in ("u", "u2"):
            try:
                bind = instantiate_atoms(ctx, {b: tmpl for b in fun_bases})
            except NumericError:
                continue
            needed = {k: v for k, v in bind.items() if ctx.get(k).gid in vf.gids()}
            terms.append(substitute(vf, needed) if needed else vf)
    return terms


def check_class(entry: CatalogEntry, records: list, seed: int = 0):
    if not entry.killing or len(entry.symmetries) < 5:
        records.append(CheckRecord(entry.id, "class", "membership", True,
                                   "not applicable", skipped=True))
        return
    J = next(iter(entry.killing.values()))
    chart = entry.chart

    def run():
        s0s = [s.s0_expr() for s in entry.symmetries]
        h0_in = in_constant_span(chart.kinetic, s0s) is not None
        j2_in = in_constant_span(J * J, s0s) is not None
        ad_images = [poisson(J, e, chart) for e in s0s]
        _, vecs = span_vectors(s0s + ad_images, chart.ctx)
        base = qi_rank(vecs[:len(s0s)])
        invariant = qi_rank(vecs) == base
        terms = potential_family_terms(entry)
        two_param = None
        if len(terms) >= 2:
            two_param = functional_rank(terms, chart, seed=seed) == 2
        kernel_nonempty = bool(entry.fld_relations)
        ok = h0_in and j2_in and invariant and kernel_nonempty and two_param is not False
        detail = (f"h0_in_span={h0_in} j2_in_span={j2_in} ad_invariant={invariant} "
                  f"two_param={two_param} fld={kernel_nonempty}")
        return ok, detail
    _timed(records, entry.id, "class", "membership", run)


def sphere_checks(entry: CatalogEntry, records: list):
    """Constant-curvature checks: the rotation generators commute with the
    kinetic term, the embedding functions square-sum to one, and the bracket
    table closes linearly."""
    from .charts import sphere_embedding
    chart = entry.chart

    def run_kill():
        bad = [lbl for lbl, j in entry.killing.items()
               if not poisson(chart.kinetic, j, chart).is_zero()]
        return not bad, ", ".join(bad)
    _timed(records, entry.id, "sphere", "killing-basis", run_kill)

    def run_embed():
        from .ratexpr import integer
        total = zero(chart.ctx)
        for s in sphere_embedding(chart):
            total = total + s * s
        r = total - integer(chart.ctx, 1)
        return r.is_zero(), "" if r.is_zero() else "embedding identity fails"
    _timed(records, entry.id, "sphere", "embedding", run_embed)

    def run_closure():
        gens = list(entry.killing.values())
        _, vecs = span_vectors(gens, chart.ctx)
        base = qi_rank(vecs)
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                br = poisson(gens[i], gens[j], chart)
                if br.is_zero():
                    continue
                _, v2 = span_vectors(gens + [br], chart.ctx)
                if qi_rank(v2) != base:
                    return False, "bracket escapes the linear span"
        return True, ""
    _timed(records, entry.id, "sphere", "closure", run_closure)


def verify_entry(entry: CatalogEntry, checks=None, seed: int = 0) -> list[CheckRecord]:
    """Run the requested named checks (all applicable ones by default)."""
    records: list[CheckRecord] = []
    selected = set(checks) if checks else set(CHECK_NAMES)
    unknown = selected - set(CHECK_NAMES)
    if unknown:
        raise CatalogError(f"unknown check name(s): {', '.join(sorted(unknown))}")
    is_sphere = not entry.symmetries and len(entry.killing) > 1
    if "symmetry" in selected:
        check_symmetries(entry, records)
    if "fld" in selected:
        check_fld(entry, records)
    if "algebra" in selected:
        check_algebra(entry, records)
    if "bd" in selected and entry.symmetries:
        check_bd(entry, records)
    if "funcdep" in selected:
        check_funcdep(entry, records)
    if "rank" in selected:
        check_rank(entry, records, seed)
    if "class" in selected and not is_sphere:
        check_class(entry, records, seed)
    if "sphere" in selected and is_sphere:
        sphere_checks(entry, records)
    return records
