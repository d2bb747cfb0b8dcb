"""Pure Sullivan models of homogeneous spaces and the formality deciders.

The model of G/K is H*(BK) (x) Lambda(v_1..v_n) with d v_j = psi_j, the
restriction of the j-th generator of H*(BG) to the maximal torus of K.  The
restrictions are computed in torus coordinates and then rewritten in K's own
invariant generators y_i, so that H*(BK) is the weighted polynomial ring Q[y].
Because Q[torus] is a free module over Q[y], regularity and ideal membership
give the same answers in either ring.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

from gmpy2 import mpq

from .exactpoly import Polynomial, parse_poly, substitute_linear, to_text
from .groebner import (BudgetExceeded, buchberger, complete_intersection_series, hilbert_series,
                       ideal_member, is_zero_dimensional, normal_form, staircase_dimension)
from .liegroups import GroupDatum, TorusMap, embedding_from_recipe, make_group
from .linalg import SparseEliminator

YES = "yes"
INCONCLUSIVE = "no-witness-found"
NOT_APPLICABLE = "not-applicable"

ROUTES = ("equal-rank", "kernel-dimension", "nested-ideal", "free-cohomology",
          "shared-torus-transfer", "degree-reasoning", "product-reduction", "torus-quotient")

DEFAULT_TIME_BUDGET = 60.0
EQUAL_RANK_CERTIFICATE_LIMIT = 5000
EQUAL_RANK_CERTIFICATE_SECONDS = 30.0
EQUAL_RANK_CERTIFICATE_MAX_RANK = 6


# -- series helpers ---------------------------------------------------------------

def series_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def poincare_polynomial(relation_degrees, base_degrees, free_degrees):
    """prod(1 - q^d)/prod(1 - q^e) * prod(1 + q^f) as a coefficient list, or None."""
    ell = complete_intersection_series(relation_degrees, base_degrees)
    if ell is None:
        return None
    out = ell
    for f in free_degrees:
        term = [0] * (f + 1)
        term[0] = 1
        term[f] += 1
        out = series_mul(out, term)
    return out


def format_series(coeffs):
    parts = []
    for d, c in enumerate(coeffs):
        if not c:
            continue
        mono = "1" if d == 0 else ("q" if d == 1 else f"q^{d}")
        parts.append(mono if c == 1 else (f"{c}" if d == 0 else f"{c}*{mono}"))
    return " + ".join(parts) if parts else "0"


# -- invariant coordinates -----------------------------------------------------------

def _weighted_monomials(weights, degree):
    """Exponent vectors with sum(w_i a_i) == degree, in a fixed order."""
    n = len(weights)
    out = []

    def rec(i, left, acc):
        if i == n:
            if left == 0:
                out.append(tuple(acc))
            return
        w = weights[i]
        for a in range(left // w, -1, -1):
            acc.append(a)
            rec(i + 1, left - a * w, acc)
            acc.pop()

    if n == 0:
        return [()] if degree == 0 else []
    rec(0, degree, [])
    return out


class InvariantCoordinates:
    """Rewrites Weyl-invariant torus polynomials of K in K's invariant generators."""

    def __init__(self, k: GroupDatum):
        k.require_explicit()
        self.group = k
        self.generators = k.invariant_generators
        self.weights = tuple(k.generator_degrees)
        self.nvars = k.rank
        self._gens = [_mpq_terms(g) for g in self.generators]
        self._products = {(0,) * self.nvars: {(0,) * self.nvars: mpq(1)}}
        self._solvers = {}
        # W of a product acts factorwise, so rewriting can proceed one factor at a time
        self._parts = []
        if len(k.factors) > 1:
            off = 0
            for f in k.factors:
                if f.rank:
                    self._parts.append((off, f.rank, InvariantCoordinates(f)))
                off += f.rank

    def _product(self, exps):
        """Torus terms (mpq) of the monomial ``exps`` in the generators."""
        p = self._products.get(exps)
        if p is None:
            i = max(j for j, a in enumerate(exps) if a)
            lower = list(exps)
            lower[i] -= 1
            p = _mul_terms(self._product(tuple(lower)), self._gens[i])
            self._products[exps] = p
        return p

    def product(self, exps) -> Polynomial:
        return Polynomial({e: Fraction(int(c.numerator), int(c.denominator)) for e, c in self._product(exps).items()},
                          self.nvars)

    def _solver(self, degree):
        if degree not in self._solvers:
            monos = _weighted_monomials(self.weights, degree)
            elim = SparseEliminator(track=True)
            for m in monos:
                if elim.add(self._product(m)) is not None:
                    raise ArithmeticError("invariant generators are algebraically dependent")
            self._solvers[degree] = (monos, elim)
        return self._solvers[degree]

    def rewrite(self, p: Polynomial) -> Polynomial:
        if p.nvars != self.nvars:
            raise ValueError("polynomial lives in the wrong torus")
        if self._parts:
            return self._rewrite_factorwise(p)
        out = {}
        for d in sorted(p.degrees()):
            part = {e: mpq(c.numerator, c.denominator) for e, c in p.terms.items() if 2 * sum(e) == d}
            monos, elim = self._solver(d)
            rest, combo = elim.reduce(part, {})
            if rest:
                raise ValueError(f"{to_text(Polynomial(p.terms, self.nvars), 's')} is not invariant "
                                 f"under the Weyl group of {self.group.label}")
            for k, c in combo.items():
                out[monos[k]] = -c
        back = {}
        for e, c in out.items():
            for t, v in self._product(e).items():
                back[t] = back.get(t, 0) + c * v
        if {t: v for t, v in back.items() if v} != _mpq_terms(p):
            raise ArithmeticError("rewriting in invariant generators failed verification")
        return Polynomial({e: Fraction(int(c.numerator), int(c.denominator)) for e, c in out.items() if c},
                          self.nvars, self.weights)

    def _rewrite_factorwise(self, p):
        # keys: (generator exponents of finished factors, torus exponents of the rest)
        current = {((), e): c for e, c in p.terms.items()}
        for off, r, sub in self._parts:
            groups = {}
            for (done, e), c in current.items():
                key = (done, e[:off] + (0,) * r + e[off + r:])
                groups.setdefault(key, {})[e[off:off + r]] = c
            current = {}
            for (done, rest), terms in groups.items():
                for y, c in sub.rewrite(Polynomial(terms, r)).terms.items():
                    key = (done + y, rest)
                    current[key] = current.get(key, 0) + c
        out = {done: c for (done, _), c in current.items() if c}
        return Polynomial(out, self.nvars, self.weights)

    def substitute(self, q: Polynomial) -> Polynomial:
        out = Polynomial.zero(self.nvars)
        for e, c in q.terms.items():
            out = out + self.product(e) * c
        return out


def _mpq_terms(p: Polynomial):
    return {e: mpq(c.numerator, c.denominator) for e, c in p.terms.items()}


def _mul_terms(a, b):
    out = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return {e: c for e, c in out.items() if c}


# -- the model -------------------------------------------------------------------

@dataclass
class CartanModel:
    group: GroupDatum
    subgroup: GroupDatum
    embedding: TorusMap | None
    fiber_degrees: tuple
    images: tuple               # psi_j in K's torus coordinates
    invariant_images: tuple     # psi_j in K's invariant generators
    base_degrees: tuple         # degrees of K's invariant generators
    corank: int

    @property
    def label(self):
        return f"{self.group.label}/{self.subgroup.label}"

    @property
    def image_degrees(self):
        return tuple(f + 1 for f in self.fiber_degrees)

    @property
    def formal_dimension(self):
        return self.group.dimension - self.subgroup.dimension

    def with_images(self, invariant_images, label_note="modified"):
        """A copy with replaced invariant-coordinate images (torus images dropped)."""
        return CartanModel(self.group, self.subgroup, None, self.fiber_degrees, (), tuple(invariant_images),
                           self.base_degrees, self.corank)


def build_model(group, subgroup, embedding=None) -> CartanModel:
    """The pure model of G/K for an explicit G and K.

    ``embedding`` is a TorusMap, an embedding kind, or a list of recipe steps.
    """
    g = make_group(group) if isinstance(group, str) else group
    k = make_group(subgroup) if isinstance(subgroup, str) else subgroup
    if not g.explicit:
        raise ValueError(f"{g.label} is degree-only; use degree_reasoning_check")
    k.require_explicit()
    if k.rank > g.rank:
        raise ValueError(f"rank of {k.label} exceeds rank of {g.label}")
    if k.dimension > g.dimension:
        raise ValueError(f"dimension of {k.label} exceeds dimension of {g.label}")
    if embedding is None:
        if k.label != g.label:
            raise ValueError("an embedding is required unless K = G")
        embedding = TorusMap(tuple(tuple(Fraction(int(i == j)) for j in range(g.rank)) for i in range(g.rank)),
                             g.rank, g.rank, g.label, g.label)
    elif isinstance(embedding, (str, list, tuple)):
        embedding = embedding_from_recipe(k, [embedding] if isinstance(embedding, str) else embedding, g)
    if embedding.source_rank != g.rank or embedding.target_rank != k.rank:
        raise ValueError(f"embedding shape {embedding.source_rank}x{embedding.target_rank} "
                         f"does not match ranks {g.rank} and {k.rank}")
    images = tuple(substitute_linear(p, embedding) for p in g.invariant_generators)
    coords = InvariantCoordinates(k)
    inv = tuple(coords.rewrite(p) for p in images)
    return CartanModel(g, k, embedding, tuple(d - 1 for d in g.generator_degrees), images, inv,
                       tuple(k.generator_degrees), g.rank - k.rank)


def pure_model(image_polys, fiber_degrees=None, base_degrees=None):
    """A model given directly by its images (for tests and negative controls)."""
    image_polys = tuple(image_polys)
    nv = image_polys[0].nvars if image_polys else 0
    base = tuple(base_degrees) if base_degrees is not None else (image_polys[0].weights if image_polys else ())
    imgs = tuple(p.with_weights(base) for p in image_polys)
    if fiber_degrees is None:
        fiber_degrees = tuple(p.degree() - 1 for p in imgs)
    t = make_group(f"T^{nv}")
    return CartanModel(t, t, None, tuple(fiber_degrees), (), imgs, base, len(imgs) - nv)


# -- splitting search -----------------------------------------------------------------

@dataclass
class SplittingWitness:
    regular_subset: tuple
    redundant_order: tuple
    membership_certificates: dict
    images: tuple = field(repr=False)
    base_degrees: tuple = ()
    elliptic_dimension: int = 0
    tie_break: str = "degree-match first, then lexicographic by index"
    coordinates: str = "invariant"
    basis: object = field(default=None, repr=False, compare=False)
    # filled in only by the nested-ideal route; keyed by redundant index, cofactors in the doubled ring
    borel_order: tuple = ()
    borel_certificates: dict = field(default_factory=dict)

    @property
    def zero_redundant(self):
        return tuple(j for j in self.redundant_order if not self.images[j])

    def verify(self):
        """Re-check regularity and every membership certificate from scratch."""
        reg = [self.images[i] for i in self.regular_subset]
        nv = len(self.base_degrees) if self.coordinates == "invariant" else (reg[0].nvars if reg else 0)
        if len(reg) != nv:
            return False
        if reg and not is_zero_dimensional(buchberger(reg)):
            return False
        for j in self.redundant_order:
            cof = self.membership_certificates[j]
            total = Polynomial.zero(self.images[j].nvars, self.images[j].weights)
            for c, g in zip(cof, reg):
                total = total + c * g
            if total != self.images[j]:
                return False
        if self.borel_order:
            earlier = [borel_difference(self.images[i], self.base_degrees) for i in self.regular_subset]
            for j in self.borel_order:
                target = borel_difference(self.images[j], self.base_degrees)
                total = Polynomial.zero(target.nvars, target.weights)
                for c, g in zip(self.borel_certificates[j], earlier):
                    total = total + c * g
                if total != target:
                    return False
                earlier.append(target)
        return True

    def to_dict(self):
        var = "y" if self.coordinates == "invariant" else "s"
        return {
            "regular_subset": list(self.regular_subset),
            "redundant_order": list(self.redundant_order),
            "images": [to_text(p, var) for p in self.images],
            "base_degrees": list(self.base_degrees),
            "certificates": {str(j): [to_text(c, var) for c in cof]
                             for j, cof in sorted(self.membership_certificates.items())},
            "elliptic_dimension": self.elliptic_dimension,
            "tie_break": self.tie_break,
            "coordinates": self.coordinates,
            "borel_order": list(self.borel_order),
            "borel_certificates": {str(j): [to_text(c, "z") for c in cof]
                                   for j, cof in sorted(self.borel_certificates.items())},
        }

    @classmethod
    def from_dict(cls, d):
        var = "y" if d["coordinates"] == "invariant" else "s"
        weights = tuple(d["base_degrees"]) if d["coordinates"] == "invariant" else None
        nv = len(d["base_degrees"]) if d["coordinates"] == "invariant" else len(d["regular_subset"])
        parse = lambda t: parse_poly(t, nv, var, weights)
        doubled = tuple(d["base_degrees"]) * 2
        parse_b = lambda t: parse_poly(t, 2 * len(d["base_degrees"]), "z", doubled)
        return cls(tuple(d["regular_subset"]), tuple(d["redundant_order"]),
                   {int(j): [parse(c) for c in cof] for j, cof in d["certificates"].items()},
                   tuple(parse(t) for t in d["images"]), tuple(d["base_degrees"]),
                   d["elliptic_dimension"], d["tie_break"], d["coordinates"],
                   borel_order=tuple(d.get("borel_order", ())),
                   borel_certificates={int(j): [parse_b(c) for c in cof]
                                       for j, cof in d.get("borel_certificates", {}).items()})


def _candidate_subsets(images, nvars, base_degrees):
    n = len(images)
    degs = [p.degree() for p in images]
    target = sorted(base_degrees)
    cands = []
    for subset in itertools.combinations(range(n), nvars):
        if any(not images[i] for i in subset):
            continue
        rel = [degs[i] for i in subset]
        if complete_intersection_series(rel, base_degrees) is None:
            continue
        cands.append(subset)
    match = [s for s in cands if sorted(degs[i] for i in s) == target]
    return match + [s for s in cands if s not in match]


def find_splitting(m: CartanModel, time_budget=DEFAULT_TIME_BUDGET, coordinates="invariant"):
    """First splitting witness in the search order, or None when the search is exhausted.

    Raises BudgetExceeded when the time budget runs out.
    """
    if coordinates == "invariant":
        images = m.invariant_images
        nvars = len(m.base_degrees)
        base = m.base_degrees
    elif coordinates == "torus":
        images = m.images
        nvars = m.subgroup.rank
        base = (2,) * nvars
    else:
        raise ValueError(f"unknown coordinate system {coordinates!r}")
    deadline = time.monotonic() + time_budget if time_budget else None

    def remaining():
        if deadline is None:
            return None
        left = deadline - time.monotonic()
        if left <= 0:
            raise BudgetExceeded(f"splitting search for {m.label} exceeded {time_budget}s")
        return left

    for subset in _candidate_subsets(images, nvars, base):
        reg = [images[i] for i in subset]
        gb = buchberger(reg, time_budget=remaining(), nvars=nvars, weights=base)
        if reg and not is_zero_dimensional(gb):
            continue
        order = tuple(sorted((j for j in range(len(images)) if j not in subset),
                             key=lambda j: (images[j].degree(), j)))
        live = [j for j in order if images[j]]
        if any(normal_form(images[j], gb) for j in live):
            continue
        certs = {j: [Polynomial.zero(nvars, images[j].weights) for _ in reg] for j in order}
        if live:
            tracked = buchberger(reg, track=True, time_budget=remaining())
            for j in live:
                mem = ideal_member(images[j], reg, gb=tracked)
                if not mem.member:
                    raise ArithmeticError("membership certificate disagrees with the normal form")
                certs[j] = mem.cofactors
        w = SplittingWitness(tuple(subset), order, certs, tuple(images), tuple(base),
                             staircase_dimension(gb), coordinates=coordinates)
        w.basis = gb
        return w
    return None


# -- verdicts ------------------------------------------------------------------------

@dataclass
class Verdict:
    space: str
    formal: str
    equivariantly_formal: str
    route: str | None = None
    witness: object = None
    poincare: list | None = None
    notes: list = field(default_factory=list)
    oracle: dict = field(default_factory=dict)
    timing: float | None = None

    @property
    def all_yes(self):
        return self.formal == YES and self.equivariantly_formal == YES

    def to_dict(self, include_timing=True):
        w = self.witness
        if w is not None and hasattr(w, "to_dict"):
            w = w.to_dict()
        d = {
            "space": self.space,
            "formal": self.formal,
            "equivariantly_formal": self.equivariantly_formal,
            "route": self.route,
            "witness": w,
            "poincare": list(self.poincare) if self.poincare is not None else None,
            "notes": list(self.notes),
            "oracle": dict(self.oracle),
        }
        if include_timing:
            d["timing_ms"] = None if self.timing is None else int(round(self.timing * 1000))
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["space"], d["formal"], d["equivariantly_formal"], d.get("route"), d.get("witness"),
                   d.get("poincare"), list(d.get("notes", [])), dict(d.get("oracle", {})),
                   None if d.get("timing_ms") is None else d["timing_ms"] / 1000)


def _witness_poincare(m, w):
    rel = [m.image_degrees[i] for i in w.regular_subset]
    free = [m.fiber_degrees[j] for j in w.redundant_order]
    return poincare_polynomial(rel, w.base_degrees, free)


def check_formality(m: CartanModel, time_budget=DEFAULT_TIME_BUDGET, coordinates="invariant") -> Verdict:
    """Formality from a splitting witness, with the Poincare polynomial of G/K."""
    start = time.monotonic()
    try:
        w = find_splitting(m, time_budget, coordinates)
    except BudgetExceeded as exc:
        return Verdict(m.label, INCONCLUSIVE, INCONCLUSIVE, None, None, None, [str(exc)],
                       timing=time.monotonic() - start)
    if w is None:
        return Verdict(m.label, INCONCLUSIVE, INCONCLUSIVE, None, None, None,
                       ["no regular subset with redundant images in its ideal"], timing=time.monotonic() - start)
    poincare = _witness_poincare(m, w)
    notes = []
    if coordinates == "invariant":
        gb = w.basis
        ell = complete_intersection_series([m.image_degrees[i] for i in w.regular_subset], w.base_degrees)
        hs = hilbert_series(gb, len(ell) + 1)
        if hs[:len(ell)] != ell or any(hs[len(ell):]):
            raise ArithmeticError(f"Hilbert series mismatch for {m.label}")
        notes.append("elliptic factor Hilbert series matches the complete-intersection formula")
    return Verdict(m.label, YES, NOT_APPLICABLE, None, w, poincare, notes, timing=time.monotonic() - start)


def equivariant_route(m: CartanModel, w: SplittingWitness) -> str:
    if m.corank == 0:
        return "equal-rank"
    if all(not w.images[j] for j in w.redundant_order):
        return "kernel-dimension"
    if w.elliptic_dimension == 1:
        return "free-cohomology"
    return "nested-ideal"


def borel_difference(p: Polynomial, base_degrees) -> Polynomial:
    """p(u) - p(w) in two copies u, w of the base ring."""
    base = tuple(base_degrees)
    r = len(base)
    p = p.with_weights(base)
    return p.embed(2 * r, 0, base + base) - p.embed(2 * r, r, base + base)


def borel_nested_order(w: SplittingWitness, time_budget=None):
    """Order the redundant images so each relation p(u) - p(w) lies in the ideal of the earlier ones.

    Returns ``(order, certificates)`` or None.  Greedy is complete because the
    ideal only grows as relations are accepted.
    """
    if w.coordinates != "invariant":
        raise ValueError("the Borel check needs invariant coordinates")
    deadline = time.monotonic() + time_budget if time_budget else None
    gens = [borel_difference(w.images[i], w.base_degrees) for i in w.regular_subset]
    pending = list(w.redundant_order)
    order, certs = [], {}
    while pending:
        for j in pending:
            target = borel_difference(w.images[j], w.base_degrees)
            left = None if deadline is None else max(deadline - time.monotonic(), 1e-3)
            mem = ideal_member(target, gens, time_budget=left)
            if mem.member:
                break
        else:
            return None
        order.append(j)
        certs[j] = mem.cofactors
        gens.append(target)
        pending.remove(j)
    return tuple(order), certs


def check_equivariant_formality(m: CartanModel, w: SplittingWitness, time_budget=DEFAULT_TIME_BUDGET) -> Verdict:
    """Equivariant formality of the isotropy action from a formality witness."""
    if w is None:
        raise ValueError("a splitting witness is required")
    route = equivariant_route(m, w)
    notes = []
    if route == "kernel-dimension":
        notes.append(f"{len(w.redundant_order)} images vanish, matching the corank {m.corank}")
    elif route == "nested-ideal":
        # ideal membership in one copy of H*(BK) does not pass to the doubled base
        try:
            found = borel_nested_order(w, time_budget)
        except BudgetExceeded as exc:
            found, reason = None, str(exc)
        else:
            reason = "some relation p(u) - p(w) is not in the ideal of the earlier ones"
        if found is None:
            return Verdict(m.label, YES, INCONCLUSIVE, None, w, _witness_poincare(m, w),
                           [f"no nested order in the doubled base: {reason}"])
        w.borel_order, w.borel_certificates = found
        notes.append("each redundant relation p(u) - p(w) lies in the ideal of the earlier ones")
    elif route == "free-cohomology":
        notes.append("the cohomology of G/K is a free graded-commutative algebra")
    return Verdict(m.label, YES, YES, route, w, _witness_poincare(m, w), notes)


def check_space(group, subgroup, embedding=None, time_budget=DEFAULT_TIME_BUDGET, facts=()) -> Verdict:
    """Full check of G/K: dispatches to equal-rank, degree reasoning or the model route."""
    start = time.monotonic()
    g = make_group(group) if isinstance(group, str) else group
    k = make_group(subgroup) if isinstance(subgroup, str) else subgroup
    label = f"{g.label}/{k.label}"
    if k.rank > g.rank:
        raise ValueError(f"rank of {k.label} ({k.rank}) exceeds rank of {g.label} ({g.rank})")
    if k.dimension > g.dimension:
        raise ValueError(f"dimension of {k.label} exceeds dimension of {g.label}")
    if g.rank == k.rank and (embedding is None or not g.explicit or not certificate_feasible(g, k)):
        v = equal_rank_verdict(g, k)
        if embedding is not None and g.explicit:
            v.notes.append("Groebner certificate skipped: equal-rank pair above the certificate limits")
    elif not g.explicit or not k.explicit:
        v = degree_reasoning_check(g.generator_degrees, k.generator_degrees, facts, label=label)
    else:
        m = build_model(g, k, embedding)
        v = check_model(m, time_budget)
    v.timing = time.monotonic() - start
    return v


def certificate_feasible(g: GroupDatum, k: GroupDatum) -> bool:
    """Whether an equal-rank pair is small enough for an explicit Groebner certificate."""
    chi = math.prod(g.generator_degrees) // max(1, math.prod(k.generator_degrees))
    return chi <= EQUAL_RANK_CERTIFICATE_LIMIT and k.rank <= EQUAL_RANK_CERTIFICATE_MAX_RANK


def check_model(m: CartanModel, time_budget=DEFAULT_TIME_BUDGET) -> Verdict:
    if m.corank == 0 and not certificate_feasible(m.group, m.subgroup):
        v = equal_rank_verdict(m.group, m.subgroup)
        v.notes.append("Groebner certificate skipped: quotient dimension above the certificate limit")
        return v
    budget = min(time_budget, EQUAL_RANK_CERTIFICATE_SECONDS) if m.corank == 0 else time_budget
    f = check_formality(m, budget)
    if f.formal != YES and m.corank == 0:
        v = equal_rank_verdict(m.group, m.subgroup)
        v.notes.append(f"Groebner certificate not completed within {budget:g} s: {'; '.join(f.notes)}")
        return v
    if f.formal != YES:
        return f
    e = check_equivariant_formality(m, f.witness, time_budget)
    e.notes = f.notes + e.notes
    e.timing = f.timing
    return e


def equal_rank_verdict(g: GroupDatum, k: GroupDatum) -> Verdict:
    """Equal rank: the restriction images form a regular sequence because H*(BK) is finite over H*(BG)."""
    if g.rank != k.rank:
        raise ValueError("not an equal-rank pair")
    poincare = complete_intersection_series(g.generator_degrees, k.generator_degrees)
    label = f"{g.label}/{k.label}"
    if poincare is None:
        return Verdict(label, INCONCLUSIVE, INCONCLUSIVE, None, None, None,
                       ["degree data incompatible with an equal-rank pair"])
    chi = sum(poincare)
    notes = [f"Euler characteristic {chi} = |W_G|/|W_K| = {g.weyl_order}/{k.weyl_order}"]
    if chi * k.weyl_order != g.weyl_order:
        return Verdict(label, INCONCLUSIVE, INCONCLUSIVE, None, None, poincare,
                       [f"Euler characteristic {chi} disagrees with Weyl group orders"])
    witness = {"kind": "equal-rank", "rank": g.rank, "relation_degrees": list(g.generator_degrees),
               "base_degrees": list(k.generator_degrees), "euler_characteristic": chi}
    return Verdict(label, YES, YES, "equal-rank", witness, poincare, notes)


# -- degree reasoning ---------------------------------------------------------------

KILLING_FORM_FACT = ("hit", 4, 4)


@dataclass
class DegreeBranch:
    assignment: tuple        # (K degree, G degree, power)
    elliptic: tuple          # (K degree, power) with power > 1
    free_degrees: tuple      # odd degrees of free generators
    poincare: list

    def to_dict(self):
        return {"assignment": [list(a) for a in self.assignment], "elliptic": [list(e) for e in self.elliptic],
                "free_degrees": list(self.free_degrees), "poincare": list(self.poincare)}


def _certified_zero(degree, remaining):
    """True if, in this branch, no monomial of ``degree`` in the remaining generators can appear.

    ``remaining`` maps a K degree to its minimal hit power; a pure power below
    that power cannot appear by minimality.
    """
    degs = sorted(remaining)
    for exps in _weighted_monomials(tuple(degs), degree):
        support = [i for i, a in enumerate(exps) if a]
        if len(support) == 1:
            e = degs[support[0]]
            if exps[support[0]] < remaining[e]:
                continue
        return False
    return True


def degree_reasoning_check(g_degrees, k_degrees, facts=(), label=None) -> Verdict:
    """Formality of G/K from degrees alone, by enumerating which generator hits which pure power.

    Each generator y of H*(BK) must be hit: some image psi_d contains y^(d/e)
    with nonzero coefficient, with d/e minimal.  Power 1 is a contractible
    pair.  The remaining images must then vanish for degree reasons.
    ``facts`` are ``("hit", e, d)`` triples forcing K degree ``e`` to be hit by
    G degree ``d``; the Killing-form fact is always included.
    """
    g_degrees = list(g_degrees)
    k_degrees = list(k_degrees)
    label = label or f"{g_degrees}/{k_degrees}"
    facts = set(tuple(f) for f in facts)
    if 4 in g_degrees and 4 in k_degrees:
        facts.add(KILLING_FORM_FACT)
    forced = {}
    for kind, e, d in sorted(facts):
        if kind != "hit":
            raise ValueError(f"unknown fact kind {kind!r}")
        if e not in k_degrees or d not in g_degrees:
            raise ValueError(f"fact ({kind}, {e}, {d}) names a degree that does not occur")
        forced[k_degrees.index(e)] = g_degrees.index(d)
    branches = []
    inconclusive = []

    def rec(i, used, assignment):
        if i == len(k_degrees):
            branches.append(tuple(assignment))
            return
        e = k_degrees[i]
        options = [forced[i]] if i in forced else range(len(g_degrees))
        for j in options:
            if j in used or g_degrees[j] % e:
                continue
            assignment.append((i, j, g_degrees[j] // e))
            rec(i + 1, used | {j}, assignment)
            assignment.pop()

    rec(0, frozenset(), [])
    results = []
    for br in branches:
        # minimality: a pure power y^p hit at degree d means no earlier image hits a smaller power of y
        remaining = {}
        ok = True
        for i, j, p in br:
            if p > 1:
                e = k_degrees[i]
                if e in remaining:
                    ok = False
                    break
                remaining[e] = p
        if not ok:
            inconclusive.append(br)
            continue
        used = {j for _, j, _ in br}
        free = []
        for j, d in enumerate(g_degrees):
            if j in used:
                continue
            if _certified_zero(d, remaining):
                free.append(d - 1)
            else:
                ok = False
                break
        if not ok:
            inconclusive.append(br)
            continue
        rel = [g_degrees[j] for _, j, p in br if p > 1]
        base = [k_degrees[i] for i, _, p in br if p > 1]
        poincare = poincare_polynomial(rel, base, free)
        results.append(DegreeBranch(tuple((k_degrees[i], g_degrees[j], p) for i, j, p in br),
                                    tuple(sorted((k_degrees[i], p) for i, _, p in br if p > 1)),
                                    tuple(sorted(free)), poincare))
    if not results or inconclusive:
        note = "no consistent assignment" if not results else f"{len(inconclusive)} branches not certified"
        return Verdict(label, INCONCLUSIVE, INCONCLUSIVE, None, {"branches": [b.to_dict() for b in results]},
                       None, [note])
    polys = {tuple(b.poincare) for b in results}
    corank = len(g_degrees) - len(k_degrees)
    if corank == 0:
        route = "equal-rank"
    elif all(not b.elliptic for b in results):
        route = "free-cohomology"
    else:
        route = "degree-reasoning"
    witness = {"kind": "degree-reasoning", "facts": [list(f) for f in sorted(facts)],
               "branches": [b.to_dict() for b in results]}
    notes = [f"{len(results)} consistent branch(es), each formal with vanishing leftover images"]
    return Verdict(label, YES, YES, route, witness, list(polys.pop()) if len(polys) == 1 else None, notes)
