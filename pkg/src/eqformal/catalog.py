"""Family catalog of homogeneous spaces and the batch runner producing verdict reports.

A catalog file is JSON with a ``families`` list.  Each family record has

* ``id`` and ``family`` (a display label),
* ``group`` and ``subgroup`` label templates, where ``{expr}`` is replaced by
  the value of an arithmetic expression in the parameters,
* ``params`` (names), ``rank`` (expression for the rank of the big group),
  ``minimum`` (smallest parameter value, default 1) and ``constraints``
  (boolean expressions), or an explicit ``instances`` list of parameter dicts,
* ``embedding``: recipe steps ``{"kind", "into", "parts", "matrix"}`` whose
  string fields are templates too,
* ``tag``: one of TAGS, ``expected_routes`` and optional ``facts``,
* ``transfer`` for shared-torus records: ``target`` (group, subgroup,
  embedding), ``links`` (Weyl-search links inside a classical group, each with
  ``within``, ``first`` and ``second`` subgroup specs) and ``declared_facts``,
* ``product`` for product records: ``shape`` (one of PRODUCT_SHAPES), ``free``
  (label of the group whose exterior algebra splits off) and, for the
  symmetric-diagonal shape, ``symmetric`` (the remaining symmetric factor),
* ``cases``: list of ``{"when": expr, ...}`` overriding any of the above,
* ``note``: free text.

Instances are enumerated lexicographically in the parameters and kept when the
group rank is at most the rank bound.
"""

from __future__ import annotations

import ast
import itertools
import json
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import cartanmodel as cm
from .cartanmodel import INCONCLUSIVE, YES, Verdict, format_series, series_mul
from .groebner import BudgetExceeded
from .liegroups import SearchBoundExceeded, embedding_from_recipe, make_group, weyl_orbit_search

PRODUCT_SHAPES = ("symmetric-diagonal", "full-diagonal", "fourfold-diagonal")
TAGS = ("direct", "equal-rank", "shared-torus", "product", "torus", "degree-only", "symmetric")
CATALOG_ENV = "EQFORMAL_CATALOG"
DEFAULT_CATALOG = Path(__file__).with_name("data") / "catalog.json"
ORACLE_MAX_DIMENSION = 40

_ALLOWED_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.BoolOp, ast.Compare, ast.Name, ast.Load,
                  ast.Constant, ast.Add, ast.Sub, ast.Mult, ast.FloorDiv, ast.Mod, ast.USub, ast.And, ast.Or,
                  ast.Not, ast.Eq, ast.NotEq, ast.Lt, ast.LtE, ast.Gt, ast.GtE)
_TEMPLATE = re.compile(r"\{([^{}]+)\}")


class CatalogError(ValueError):
    pass


_compiled = {}


def evaluate(expr: str, env: dict):
    """Evaluate an integer/boolean expression over the parameters; nothing else is allowed."""
    code = _compiled.get(expr)
    if code is None:
        tree = ast.parse(expr, mode="eval")
        for node in ast.walk(tree):
            if not isinstance(node, _ALLOWED_NODES):
                raise CatalogError(f"disallowed syntax in expression {expr!r}")
        code = _compiled[expr] = compile(tree, "<catalog>", "eval")
    try:
        return eval(code, {"__builtins__": {}}, env)
    except NameError as exc:
        raise CatalogError(f"unknown name in expression {expr!r}") from exc


def render(obj, env):
    """Substitute ``{expr}`` templates in every string of a nested structure."""
    if isinstance(obj, str):
        return _TEMPLATE.sub(lambda mt: str(evaluate(mt.group(1), env)), obj)
    if isinstance(obj, list):
        return [render(x, env) for x in obj]
    if isinstance(obj, dict):
        return {k: render(v, env) for k, v in obj.items()}
    return obj


@dataclass
class CatalogEntry:
    id: str
    family: str
    group: str
    subgroup: str
    tag: str
    expected_routes: list
    params: list = field(default_factory=list)
    rank: str | None = None
    minimum: int = 1
    constraints: list = field(default_factory=list)
    embedding: list | None = None
    facts: list = field(default_factory=list)
    transfer: dict | None = None
    product: dict | None = None
    cases: list = field(default_factory=list)
    instances: list | None = None
    note: str = ""

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise CatalogError(f"family {d.get('id')!r}: unknown fields {sorted(extra)}")
        try:
            e = cls(**d)
        except TypeError as exc:
            raise CatalogError(f"family {d.get('id')!r}: {exc}") from exc
        e.validate()
        return e

    def validate(self):
        tags = [self.tag] + [c["tag"] for c in self.cases if "tag" in c]
        for t in tags:
            if t not in TAGS:
                raise CatalogError(f"family {self.id}: unknown tag {t!r}")
        if self.instances is None and (not self.params or self.rank is None):
            raise CatalogError(f"family {self.id}: generated families need params and a rank expression")
        for c in self.cases:
            if "when" not in c:
                raise CatalogError(f"family {self.id}: every case needs a 'when' expression")

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class CatalogInstance:
    family: str
    params: dict
    group: str
    subgroup: str
    tag: str
    expected_routes: list
    embedding: list | None = None
    facts: list = field(default_factory=list)
    transfer: dict | None = None
    product: dict | None = None
    note: str = ""

    @property
    def label(self):
        return f"{self.group}/{self.subgroup}"


def default_catalog_path() -> Path:
    env = os.environ.get(CATALOG_ENV)
    return Path(env) if env else DEFAULT_CATALOG


def load_catalog(path=None) -> list[CatalogEntry]:
    path = Path(path) if path is not None else default_catalog_path()
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise CatalogError(f"catalog file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog file {path} is not valid JSON: {exc}") from exc
    entries = [CatalogEntry.from_dict(d) for d in data.get("families", [])]
    ids = [e.id for e in entries]
    if len(ids) != len(set(ids)):
        raise CatalogError("duplicate family ids in catalog")
    return entries


def _instantiate(e: CatalogEntry, env) -> CatalogInstance:
    fields = {"tag": e.tag, "expected_routes": e.expected_routes, "embedding": e.embedding, "facts": e.facts,
              "transfer": e.transfer, "product": e.product, "note": e.note, "group": e.group,
              "subgroup": e.subgroup}
    for case in e.cases:
        if evaluate(case["when"], env):
            fields.update({k: v for k, v in case.items() if k != "when"})
            break
    fields = render(fields, env)
    params = {k: env[k] for k in (e.params or sorted(env))}
    return CatalogInstance(family=e.id, params=params, **fields)


def generate_instances(e: CatalogEntry, max_rank=8) -> list[CatalogInstance]:
    """All instances of a family with group rank at most ``max_rank``, in lexicographic parameter order."""
    out = []
    if e.instances is not None:
        for env in e.instances:
            inst = _instantiate(e, dict(env))
            if make_group(inst.group, max_rank=10 ** 6).rank <= max_rank:
                out.append(inst)
        return out
    top = 2 * max_rank + 2
    for values in itertools.product(range(e.minimum, top + 1), repeat=len(e.params)):
        env = dict(zip(e.params, values))
        if evaluate(e.rank, env) > max_rank:
            continue
        if all(evaluate(c, env) for c in e.constraints):
            out.append(_instantiate(e, env))
    return out


# -- reduction to primitive checks ---------------------------------------------------------------

@dataclass
class PrimitiveCheck:
    """One unit of work: ``kind`` is "space", "weyl-link", "declared", "free" or "torus"."""

    kind: str
    group: str | None = None
    subgroup: str | None = None
    embedding: list | None = None
    facts: list = field(default_factory=list)
    role: str = "main"
    data: dict = field(default_factory=dict)


def reduce_entry(e) -> list[PrimitiveCheck]:
    """Primitive checks for an instance; a family record is reduced instance by instance."""
    if isinstance(e, CatalogEntry):
        return [c for inst in generate_instances(e) for c in reduce_entry(inst)]
    if e.tag not in TAGS:
        raise CatalogError(f"unknown tag {e.tag!r}")
    facts = [tuple(f) for f in e.facts]
    if e.tag in ("direct", "equal-rank", "degree-only", "symmetric"):
        return [PrimitiveCheck("space", e.group, e.subgroup, e.embedding, facts)]
    if e.tag == "torus":
        return [PrimitiveCheck("torus", e.group, e.subgroup)]
    if e.tag == "shared-torus":
        t = e.transfer or {}
        if "target" not in t:
            raise CatalogError(f"{e.label}: shared-torus instance without a transfer target")
        checks = []
        for link in t.get("links", []):
            checks.append(PrimitiveCheck("weyl-link", link["within"], role="link", data=link))
        for fact in t.get("declared_facts", []):
            checks.append(PrimitiveCheck("declared", role="link", data={"fact": fact}))
        tg = t["target"]
        checks.append(PrimitiveCheck("space", tg["group"], tg["subgroup"], tg.get("embedding"),
                                     [tuple(f) for f in tg.get("facts", [])], role="target"))
        checks.append(PrimitiveCheck("space", e.group, e.subgroup, e.embedding, facts, role="direct"))
        return checks
    if e.tag == "product":
        p = e.product or {}
        shape = p.get("shape")
        if shape not in PRODUCT_SHAPES:
            raise CatalogError(f"{e.label}: product shape must be one of {', '.join(PRODUCT_SHAPES)}")
        checks = [PrimitiveCheck("free", p["free"], role="free")]
        if shape == "symmetric-diagonal":
            s = p["symmetric"]
            checks.append(PrimitiveCheck("space", s["group"], s["subgroup"], s.get("embedding"),
                                         [tuple(f) for f in s.get("facts", [])], role="symmetric"))
        checks.append(PrimitiveCheck("space", e.group, e.subgroup, e.embedding, facts, role="direct"))
        return checks
    raise CatalogError(f"unknown tag {e.tag!r}")


# -- running checks ----------------------------------------------------------------------------

@dataclass
class Bounds:
    max_rank: int = 8
    time_budget: float = cm.DEFAULT_TIME_BUDGET
    oracle: bool = False
    oracle_max_dimension: int = ORACLE_MAX_DIMENSION
    consistency: bool = True

    def to_dict(self):
        return {"max_rank": self.max_rank, "time_budget": int(self.time_budget), "oracle": self.oracle,
                "oracle_max_dimension": self.oracle_max_dimension, "consistency": self.consistency}


def _oracle_report(m, v: Verdict, max_dim):
    from .oracle import build_borel_model, dga_cohomology_upto, model_complex, verify_fiber_surjectivity

    n = m.formal_dimension
    if n > max_dim:
        return {"skipped": f"formal dimension {n} above {max_dim}"}
    out = {}
    borel = build_borel_model(m)
    cx = model_complex(m)
    out["d_squared_zero"] = borel.d_squared_vanishes()
    if v.poincare is not None:
        dims = dga_cohomology_upto(cx, n, max_degree=max_dim)
        want = list(v.poincare) + [0] * (n + 1 - len(v.poincare))
        out["cohomology_matches"] = dims == want[:n + 1]
    if v.equivariantly_formal == YES:
        out["fiber_surjective"] = verify_fiber_surjectivity(borel, m, max_degree=max_dim, fiber=cx)
    return out


def run_space(group, subgroup, embedding=None, facts=(), bounds: Bounds | None = None) -> Verdict:
    """Check one space; attaches the brute-force oracle report when requested and feasible."""
    bounds = bounds or Bounds()
    g = make_group(group, max_rank=max(bounds.max_rank, 1))
    k = make_group(subgroup, max_rank=max(bounds.max_rank, 1))
    if embedding and g.explicit and k.explicit and (g.rank != k.rank or cm.certificate_feasible(g, k)):
        start = time.monotonic()
        if k.rank > g.rank:
            raise ValueError(f"rank of {k.label} ({k.rank}) exceeds rank of {g.label} ({g.rank})")
        m = cm.build_model(g, k, embedding)
        v = cm.check_model(m, bounds.time_budget)
        if bounds.oracle:
            v.oracle = _oracle_report(m, v, bounds.oracle_max_dimension)
        v.timing = time.monotonic() - start
        return v
    v = cm.check_space(g, k, embedding, bounds.time_budget, facts)
    # the oracle needs only the model, not the skipped certificate
    if (bounds.oracle and embedding and g.explicit and k.explicit
            and g.dimension - k.dimension <= bounds.oracle_max_dimension):
        v.oracle = _oracle_report(cm.build_model(g, k, embedding), v, bounds.oracle_max_dimension)
    return v


def _free_poincare(label):
    g = make_group(label, max_rank=10 ** 6)
    return cm.poincare_polynomial((), (), [d - 1 for d in g.generator_degrees])


def _link(check: PrimitiveCheck, bounds):
    d = check.data
    g = make_group(d["within"])
    first = embedding_from_recipe(d["first"]["subgroup"], d["first"]["embedding"], g)
    second = embedding_from_recipe(d["second"]["subgroup"], d["second"]["embedding"], g)
    w = weyl_orbit_search(g, first, second, max_rank=bounds.max_rank)
    return {"within": g.label, "first": d["first"]["subgroup"], "second": d["second"]["subgroup"],
            "weyl_element": None if w is None else {"permutation": list(w.perm), "signs": list(w.signs)}}


def run_instance(inst: CatalogInstance, bounds: Bounds | None = None) -> dict:
    """Verdict record for one instance; errors become report content."""
    bounds = bounds or Bounds()
    start = time.monotonic()
    try:
        v = _run_instance(inst, bounds)
    except (ValueError, BudgetExceeded, SearchBoundExceeded, RuntimeError) as exc:
        v = Verdict(inst.label, "error", "error", notes=[f"{type(exc).__name__}: {exc}"])
    v.timing = time.monotonic() - start
    return {
        "family": inst.family,
        "params": inst.params,
        "label": inst.label,
        "tag": inst.tag,
        "expected_routes": list(inst.expected_routes),
        "route_matches": v.route in inst.expected_routes,
        "verdict": v,
    }


def _run_instance(inst: CatalogInstance, bounds: Bounds) -> Verdict:
    checks = reduce_entry(inst)
    if inst.tag == "torus":
        g, k = make_group(inst.group), make_group(inst.subgroup)
        if g.rank < k.rank:
            raise ValueError(f"{inst.label}: subtorus larger than the torus")
        poincare = cm.poincare_polynomial((), (), [1] * (g.rank - k.rank))
        v = Verdict(inst.label, YES, YES, "torus-quotient",
                    {"kind": "torus-quotient", "free_degrees": [1] * (g.rank - k.rank)}, poincare)
        if bounds.oracle:
            v.oracle = _oracle_report(cm.build_model(g, k, "block"), v, bounds.oracle_max_dimension)
        return v
    if len(checks) == 1:
        c = checks[0]
        return run_space(c.group, c.subgroup, c.embedding, c.facts, bounds)
    if inst.tag == "shared-torus":
        return _run_transfer(inst, checks, bounds)
    return _run_product(inst, checks, bounds)


def _brief(v: Verdict):
    return {"space": v.space, "formal": v.formal, "equivariantly_formal": v.equivariantly_formal,
            "route": v.route, "poincare": v.poincare}


def _run_transfer(inst, checks, bounds):
    links, declared, notes = [], [], []
    ok = True
    target = direct = None
    for c in checks:
        if c.kind == "weyl-link":
            r = _link(c, bounds)
            links.append(r)
            if r["weyl_element"] is None:
                ok = False
                notes.append(f"no Weyl element found inside {r['within']} for {r['first']} vs {r['second']}")
        elif c.kind == "declared":
            declared.append(c.data["fact"])
        elif c.role == "target":
            target = run_space(c.group, c.subgroup, c.embedding, c.facts, bounds)
        elif c.role == "direct" and bounds.consistency:
            g, k = make_group(c.group), make_group(c.subgroup)
            if g.explicit and k.explicit or not g.explicit:
                direct = run_space(c.group, c.subgroup, c.embedding, c.facts, bounds)
    formal = eq = target.formal if ok else INCONCLUSIVE
    if ok:
        eq = target.equivariantly_formal
    witness = {"kind": "shared-torus", "links": links, "declared_facts": declared, "target": _brief(target)}
    poincare = None
    oracle = {}
    if direct is not None:
        witness["direct"] = _brief(direct)
        poincare = direct.poincare
        oracle = direct.oracle
        agree = (direct.formal, direct.equivariantly_formal) == (formal, eq) or not direct.all_yes
        notes.append("direct check agrees with the transfer" if agree and direct.all_yes
                     else "direct check inconclusive; transfer verdict stands" if agree
                     else "direct check disagrees with the transfer")
        if not agree:
            formal = eq = INCONCLUSIVE
    return Verdict(inst.label, formal, eq, "shared-torus-transfer", witness, poincare, notes, oracle)


def _run_product(inst, checks, bounds):
    free = sym = direct = None
    for c in checks:
        if c.kind == "free":
            free = _free_poincare(c.group)
        elif c.role == "symmetric":
            sym = run_space(c.group, c.subgroup, c.embedding, c.facts, bounds)
        elif c.role == "direct" and bounds.consistency:
            direct = run_space(c.group, c.subgroup, c.embedding, c.facts, bounds)
    p = inst.product
    formal = eq = YES
    poincare = free
    witness = {"kind": "product", "shape": p["shape"], "free_factor": p["free"]}
    if sym is not None:
        formal, eq = sym.formal, sym.equivariantly_formal
        witness["symmetric_factor"] = _brief(sym)
        poincare = series_mul(free, sym.poincare) if sym.poincare is not None else None
    notes, oracle = [], {}
    if direct is not None:
        witness["direct"] = _brief(direct)
        oracle = direct.oracle
        if direct.poincare is not None and poincare is not None and direct.poincare != poincare:
            notes.append("direct model Poincare polynomial differs from the product reduction")
            formal = eq = INCONCLUSIVE
        elif direct.all_yes:
            notes.append("direct check agrees with the product reduction")
    return Verdict(inst.label, formal, eq, "product-reduction", witness, poincare, notes, oracle)


# -- reports -------------------------------------------------------------------------------------

SCOPE_NOTE = "verified at the listed instances only; family statements for all parameters are not proved here"


@dataclass
class Report:
    bounds: dict
    results: list

    @property
    def counts(self):
        total = len(self.results)
        routes, families = {}, {}
        all_yes = inconclusive = errors = mismatched = 0
        for r in self.results:
            v = r["verdict"]
            routes[v["route"]] = routes.get(v["route"], 0) + 1
            families[r["family"]] = families.get(r["family"], 0) + 1
            if v["formal"] == YES and v["equivariantly_formal"] == YES:
                all_yes += 1
            elif "error" in (v["formal"], v["equivariantly_formal"]):
                errors += 1
            else:
                inconclusive += 1
            if not r["route_matches"]:
                mismatched += 1
        return {"instances": total, "all_yes": all_yes, "inconclusive": inconclusive, "errors": errors,
                "route_mismatches": mismatched, "by_route": routes, "by_family": families}

    @property
    def failures(self):
        return [r["label"] for r in self.results
                if not (r["verdict"]["formal"] == YES and r["verdict"]["equivariantly_formal"] == YES)
                or not r["route_matches"]]

    @property
    def all_yes(self):
        return not self.failures

    @property
    def inconclusive(self):
        return any(INCONCLUSIVE in (r["verdict"]["formal"], r["verdict"]["equivariantly_formal"])
                   for r in self.results)

    def to_dict(self, include_timing=True):
        results = []
        for r in self.results:
            r = dict(r)
            v = dict(r["verdict"])
            if not include_timing:
                v.pop("timing_ms", None)
            r["verdict"] = v
            results.append(r)
        d = {"format": "eqformal-report", "version": 1, "scope": SCOPE_NOTE, "bounds": self.bounds,
             "counts": self.counts, "failures": self.failures, "results": results}
        if include_timing:
            d["total_timing_ms"] = sum(r["verdict"].get("timing_ms") or 0 for r in self.results)
        return d

    def to_json(self, include_timing=True):
        return json.dumps(self.to_dict(include_timing), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != "eqformal-report":
            raise CatalogError("not an eqformal report")
        return cls(d["bounds"], d["results"])

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_table(self):
        rows = [("space", "formal", "eq. formal", "route", "Poincare", "oracle")]
        for r in self.results:
            v = r["verdict"]
            p = format_series(v["poincare"]) if v["poincare"] is not None else "-"
            rows.append((r["label"], v["formal"], v["equivariantly_formal"], v["route"] or "-", p,
                         _oracle_flag(v.get("oracle") or {})))
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        c = self.counts
        lines.append("")
        lines.append(f"{c['instances']} instances, {c['all_yes']} yes/yes, {c['inconclusive']} inconclusive, "
                     f"{c['errors']} errors, {c['route_mismatches']} route mismatches")
        lines.append(SCOPE_NOTE)
        for label in self.failures:
            lines.append(f"FAILED: {label}")
        return "\n".join(lines) + "\n"


def _oracle_flag(o):
    if not o:
        return "-"
    if "skipped" in o:
        return "skipped"
    checks = [o.get(k) for k in ("d_squared_zero", "cohomology_matches", "fiber_surjective") if k in o]
    return "ok" if all(checks) else "FAIL"


def run_catalog(entries, bounds: Bounds | None = None, families=None, progress=None) -> Report:
    """Run every instance of the given families; the result order follows the catalog order."""
    bounds = bounds or Bounds()
    results = []
    for e in entries:
        if families and e.id not in families:
            continue
        for inst in generate_instances(e, bounds.max_rank):
            r = run_instance(inst, bounds)
            r["verdict"] = r["verdict"].to_dict()
            results.append(r)
            if progress:
                progress(r)
    return Report(bounds.to_dict(), results)


def find_instance(entries, label, max_rank=8):
    """The first catalog instance whose label is ``label``."""
    for e in entries:
        for inst in generate_instances(e, max_rank):
            if inst.label == label:
                return inst
    return None
