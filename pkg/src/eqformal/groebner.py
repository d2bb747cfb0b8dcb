"""Ideal computations over Q for homogeneous ideals.

Buchberger's algorithm with the Gebauer-Moeller pair update, full normal forms,
ideal membership with explicit cofactors, zero-dimensionality, staircase
dimension and Hilbert series.  The monomial order is always the (weighted)
graded reverse lexicographic order, weights being the cohomological degrees
carried by the polynomials themselves.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

from gmpy2 import mpq

from .exactpoly import Polynomial, grevlex_key, monomial_degree


class BudgetExceeded(RuntimeError):
    """Raised when a computation overruns its time budget."""


@dataclass(frozen=True)
class MonomialOrder:
    kind: str = "grevlex"
    permutation: tuple | None = None

    def __post_init__(self):
        if self.kind != "grevlex":
            raise ValueError("only the graded reverse lexicographic order is supported")

    def key(self, weights):
        perm = self.permutation
        if perm is None:
            return lambda e: grevlex_key(e, weights)
        pw = tuple(weights[i] for i in perm)
        return lambda e: grevlex_key(tuple(e[i] for i in perm), pw)


GREVLEX = MonomialOrder()


@dataclass
class GroebnerBasis:
    generators: list
    order: MonomialOrder
    source_ideal: list
    nvars: int
    weights: tuple
    cofactors: list | None = field(default=None, repr=False)

    @property
    def leading_monomials(self):
        key = self.order.key(self.weights)
        return [max(g.terms, key=key) for g in self.generators]

    def __len__(self):
        return len(self.generators)


# -- internal helpers on raw term dicts -------------------------------------
#
# Inside the algorithm coefficients are gmpy2 rationals; every polynomial is
# homogeneous, so among its monomials the grevlex-largest is the one whose
# reversed exponent vector is lexicographically least.  That makes a plain
# min-heap on reversed exponents the reduction queue.

def _divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def _lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _coprime(a, b):
    return all(not (x and y) for x, y in zip(a, b))


def _quo(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _q(terms):
    return {e: mpq(c.numerator, c.denominator) for e, c in terms.items()}


def _frac(terms):
    return {e: Fraction(int(c.numerator), int(c.denominator)) for e, c in terms.items()}


def _sub_shifted(target, terms, coeff, shift, heap=None):
    # target -= coeff * x^shift * terms, in place
    for e, c in terms.items():
        m = tuple(x + y for x, y in zip(e, shift))
        old = target.get(m)
        if old is None:
            target[m] = -coeff * c
            if heap is not None:
                heapq.heappush(heap, m[::-1])
        else:
            v = old - coeff * c
            if v:
                target[m] = v
            else:
                del target[m]


class _Elem:
    __slots__ = ("terms", "lm", "cof")

    def __init__(self, terms, lm, cof):
        self.terms = terms
        self.lm = lm
        self.cof = cof


def _leading(terms):
    return min(terms, key=lambda e: e[::-1])


def _reduce(terms, cof, basis, deadline=None, keep_leading=False, quots=None):
    """Full reduction of homogeneous ``terms`` by monic ``basis`` elements.

    ``cof`` (a list of term dicts, or None) is updated alongside so that the
    result keeps the same expression in the source generators.  With
    ``keep_leading`` the leading term is left alone (tail reduction).  With
    ``quots`` the division quotients are accumulated per basis element.
    """
    f = dict(terms)
    rem = {}
    if keep_leading and f:
        lm = _leading(f)
        rem[lm] = f.pop(lm)
    heap = [e[::-1] for e in f]
    heapq.heapify(heap)
    steps = 0
    while heap:
        m = heapq.heappop(heap)[::-1]
        c = f.get(m)
        if c is None:
            continue
        for k, g in enumerate(basis):
            if _divides(g.lm, m):
                shift = _quo(m, g.lm)
                _sub_shifted(f, g.terms, c, shift, heap)
                if cof is not None:
                    for i, gc in enumerate(g.cof):
                        if gc:
                            _sub_shifted(cof[i], gc, c, shift)
                if quots is not None:
                    quots[k][shift] = quots[k].get(shift, 0) + c
                break
        else:
            rem[m] = c
            del f[m]
        steps += 1
        if deadline is not None and steps % 512 == 0 and time.monotonic() > deadline:
            raise BudgetExceeded("reduction exceeded its time budget")
    return rem, cof


def _make_monic(terms, cof):
    lm = _leading(terms)
    c = terms[lm]
    if c != 1:
        inv = 1 / c
        terms = {e: v * inv for e, v in terms.items()}
        if cof is not None:
            cof = [{e: v * inv for e, v in comp.items()} for comp in cof]
    return _Elem(terms, lm, cof)


def _spoly(a, b):
    lcm = _lcm(a.lm, b.lm)
    sa, sb = _quo(lcm, a.lm), _quo(lcm, b.lm)
    out = {}
    _sub_shifted(out, a.terms, -1, sa)
    _sub_shifted(out, b.terms, 1, sb)
    cof = None
    if a.cof is not None:
        cof = [dict() for _ in a.cof]
        for k in range(len(cof)):
            if a.cof[k]:
                _sub_shifted(cof[k], a.cof[k], -1, sa)
            if b.cof[k]:
                _sub_shifted(cof[k], b.cof[k], 1, sb)
    return out, cof


def _check_inputs(gens):
    gens = list(gens)
    if not gens:
        return gens, 0, ()
    nvars, weights = gens[0].nvars, gens[0].weights
    for g in gens:
        if g.nvars != nvars or g.weights != weights:
            raise ValueError("all generators must live in the same polynomial ring")
        if not g.is_homogeneous():
            raise ValueError(f"generator {g} is not homogeneous")
    return gens, nvars, weights


def buchberger(gens, order=GREVLEX, track=False, time_budget=None, nvars=None, weights=None):
    """Reduced Groebner basis of the ideal generated by ``gens``.

    With ``track=True`` every basis element carries cofactors expressing it in
    terms of the source generators.
    """
    gens, nv, w = _check_inputs(gens)
    if not gens:
        nv = nvars or 0
        w = tuple(weights) if weights is not None else (2,) * nv
        return GroebnerBasis([], order, [], nv, w, [] if track else None)
    if order.permutation is not None:
        return _permuted(gens, order, track, time_budget)
    key = order.key(w)
    deadline = time.monotonic() + time_budget if time_budget else None
    nsrc = len(gens)

    elems = []      # every element ever added (indices are stable)
    active = []     # indices currently in the basis
    pairs = []      # (sort key, i, j)

    def add(terms, cof):
        h = _make_monic(terms, cof)
        elems.append(h)
        hi = len(elems) - 1
        hlm = h.lm
        # Gebauer-Moeller update
        cand = [g for g in active]
        lcms = {g: _lcm(hlm, elems[g].lm) for g in cand}
        kept = []
        for idx, g1 in enumerate(cand):
            l1 = lcms[g1]
            if _coprime(hlm, elems[g1].lm):
                kept.append(g1)
                continue
            if any(_divides(lcms[g2], l1) for g2 in cand[idx + 1:]):
                continue
            if any(_divides(lcms[g2], l1) for g2 in kept):
                continue
            kept.append(g1)
        survivors = []
        for item in pairs:
            _, a, b = item
            l = _lcm(elems[a].lm, elems[b].lm)
            if _divides(hlm, l) and _lcm(elems[a].lm, hlm) != l and _lcm(hlm, elems[b].lm) != l:
                continue
            survivors.append(item)
        survivors.extend((key(lcms[g]), g, hi) for g in kept if not _coprime(hlm, elems[g].lm))
        survivors.sort(reverse=True)
        pairs[:] = survivors
        active[:] = [g for g in active if not _divides(hlm, elems[g].lm)] + [hi]

    for g in sorted(range(nsrc), key=lambda i: key(gens[i].leading_monomial()) if gens[i] else ()):
        src = gens[g]
        if not src:
            continue
        cof = None
        if track:
            cof = [dict() for _ in range(nsrc)]
            cof[g][(0,) * nv] = mpq(1)
        terms, cof = _reduce(_q(src._terms), cof, [elems[a] for a in active], deadline)
        if terms:
            add(terms, cof)

    while pairs:
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded("Buchberger exceeded its time budget")
        _, a, b = pairs.pop()
        s, cof = _spoly(elems[a], elems[b])
        if not s:
            continue
        terms, cof = _reduce(s, cof, [elems[k] for k in active], deadline)
        if terms:
            add(terms, cof)

    basis = [elems[k] for k in active]
    basis.sort(key=lambda e: key(e.lm))
    reduced = []
    for i, g in enumerate(basis):
        terms, cof = _reduce(g.terms, [dict(c) for c in g.cof] if track else None,
                             basis[:i] + basis[i + 1:], deadline, keep_leading=True)
        reduced.append(_Elem(terms, g.lm, cof))
    gens_out = [Polynomial._raw(_frac(r.terms), nv, w) for r in reduced]
    cofs = None
    if track:
        cofs = [[Polynomial._raw(_frac(c), nv, w) for c in r.cof] for r in reduced]
    return GroebnerBasis(gens_out, order, list(gens), nv, w, cofs)


def _permuted(gens, order, track, time_budget):
    """Basis for a permuted grevlex order: rename variables, compute, rename back."""
    perm = order.permutation
    nv, w = gens[0].nvars, gens[0].weights
    if sorted(perm) != list(range(nv)):
        raise ValueError("order permutation must be a permutation of the variables")
    pw = tuple(w[i] for i in perm)
    fwd = lambda p: Polynomial._raw({tuple(e[i] for i in perm): c for e, c in p._terms.items()}, nv, pw)
    inv = [0] * nv
    for j, i in enumerate(perm):
        inv[i] = j
    back = lambda p: Polynomial._raw({tuple(e[inv[i]] for i in range(nv)): c for e, c in p._terms.items()}, nv, w)
    gb = buchberger([fwd(g) for g in gens], GREVLEX, track, time_budget)
    cofs = [[back(c) for c in row] for row in gb.cofactors] if track else None
    return GroebnerBasis([back(g) for g in gb.generators], order, list(gens), nv, w, cofs)


def _as_elems(gb):
    out = []
    for i, g in enumerate(gb.generators):
        cof = [_q(c._terms) for c in gb.cofactors[i]] if gb.cofactors is not None else None
        out.append(_Elem(_q(g._terms), _leading_for(g, gb), cof))
    return out


def _leading_for(g, gb):
    key = gb.order.key(gb.weights)
    return max(g._terms, key=key)


def _homogeneous_parts(p):
    parts = {}
    for e, c in p._terms.items():
        parts.setdefault(monomial_degree(e, p.weights), {})[e] = c
    return [parts[d] for d in sorted(parts)]


def normal_form(p, gb):
    """Remainder of the complete multivariate division of ``p`` by ``gb``."""
    return division(p, gb)[1]


def division(p, gb):
    """Quotients ``q_k`` and remainder ``r`` with ``p = sum q_k g_k + r``."""
    if gb.generators and (p.nvars != gb.nvars or p.weights != gb.weights):
        raise ValueError("polynomial and basis live in different rings")
    if gb.order.permutation is not None:
        raise ValueError("division is only implemented for the standard order")
    elems = _as_elems(gb)
    quots = [dict() for _ in elems]
    rem = {}
    for part in _homogeneous_parts(p):
        r, _ = _reduce(_q(part), None, elems, quots=quots)
        rem.update(r)
    return ([Polynomial._raw(_frac(q), p.nvars, p.weights) for q in quots],
            Polynomial._raw(_frac(rem), p.nvars, p.weights))


@dataclass
class Membership:
    """Outcome of an ideal-membership test.

    When ``member`` is true, ``cofactors`` satisfy
    ``p == sum(c * g for c, g in zip(cofactors, generators))``.
    """

    member: bool
    polynomial: Polynomial
    generators: list
    cofactors: list | None = None
    basis: GroebnerBasis | None = field(default=None, repr=False)

    def __bool__(self):
        return self.member

    def verify(self):
        if not self.member:
            return normal_form(self.polynomial, self.basis) != 0
        total = Polynomial.zero(self.polynomial.nvars, self.polynomial.weights)
        for c, g in zip(self.cofactors, self.generators):
            total = total + c * g
        return total == self.polynomial


def ideal_member(p, gens, gb=None, time_budget=None):
    """Decide ``p in (gens)`` and return cofactors when it is."""
    gens = list(gens)
    if not p:
        zero = Polynomial.zero(p.nvars, p.weights)
        return Membership(True, p, gens, [zero] * len(gens), gb)
    if gb is None or gb.cofactors is None:
        gb = buchberger(gens, track=True, time_budget=time_budget, nvars=p.nvars, weights=p.weights)
    if not gb.generators:
        return Membership(False, p, gens, None, gb)
    quots, rem = division(p, gb)
    if rem:
        return Membership(False, p, gens, None, gb)
    cof = [Polynomial.zero(p.nvars, p.weights) for _ in gens]
    for q, row in zip(quots, gb.cofactors):
        if q:
            for i, c in enumerate(row):
                if c:
                    cof[i] = cof[i] + q * c
    return Membership(True, p, gens, cof, gb)


def is_zero_dimensional(gb):
    """True iff the leading-term ideal contains a pure power of every variable."""
    lms = gb.leading_monomials
    if any(not any(m) for m in lms):
        return True
    seen = set()
    for m in lms:
        support = [i for i, k in enumerate(m) if k]
        if len(support) == 1:
            seen.add(support[0])
    return len(seen) == gb.nvars


# -- Hilbert series of monomial ideals ----------------------------------------

def _minimalize(gens):
    gens = sorted(set(gens), key=sum)
    out = []
    for g in gens:
        if not any(_divides(h, g) for h in out):
            out.append(g)
    return out


def _poly_mul(a, b):
    out = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, 0) + x * y
    return {k: v for k, v in out.items() if v}


def _numerator(gens, weights, memo):
    """Hilbert numerator N(q) of R/(gens) as {degree: int}."""
    gens = _minimalize(gens)
    key = frozenset(gens)
    if key in memo:
        return memo[key]
    if any(not any(g) for g in gens):
        res = {}
    elif all(sum(1 for k in g if k) == 1 for g in gens):
        res = {0: 1}
        for g in gens:
            res = _poly_mul(res, {0: 1, monomial_degree(g, weights): -1})
    else:
        mixed = [g for g in gens if sum(1 for k in g if k) > 1]
        counts = [sum(1 for g in mixed if g[i]) for i in range(len(weights))]
        var = max(range(len(weights)), key=lambda i: counts[i])
        e = min(g[var] for g in mixed if g[var])
        pivot = tuple(e if i == var else 0 for i in range(len(weights)))
        plus = _numerator(gens + [pivot], weights, memo)
        colon = _numerator([tuple(max(a - b, 0) for a, b in zip(g, pivot)) for g in gens], weights, memo)
        shift = e * weights[var]
        res = dict(plus)
        for d, c in colon.items():
            res[d + shift] = res.get(d + shift, 0) + c
        res = {k: v for k, v in res.items() if v}
    memo[key] = res
    return res


def hilbert_numerator(monomials, weights):
    return _numerator([tuple(m) for m in monomials], tuple(weights), {})


def _series_from_numerator(num, weights, max_degree):
    coeffs = [0] * (max_degree + 1)
    for d, c in num.items():
        if d <= max_degree:
            coeffs[d] += c
    for w in weights:
        if w <= 0:
            raise ValueError("variable weights must be positive")
        for d in range(w, max_degree + 1):
            coeffs[d] += coeffs[d - w]
    return coeffs


def hilbert_series(gb, max_degree):
    """Counts of standard monomials in each cohomological degree ``0..max_degree``."""
    num = hilbert_numerator(gb.leading_monomials, gb.weights) if gb.generators else {0: 1}
    return _series_from_numerator(num, gb.weights, max_degree)


def staircase_dimension(gb):
    """Dimension of the quotient ring, or ``math.inf`` if it is not finite."""
    if not is_zero_dimensional(gb):
        return math.inf
    if gb.nvars == 0:
        return 0 if any(g for g in gb.generators) else 1
    lms = gb.leading_monomials
    bound = sum(monomial_degree(m, gb.weights) for m in lms) + 1
    return sum(hilbert_series(gb, bound))


def complete_intersection_series(relation_degrees, variable_degrees):
    """Coefficients of prod(1 - q^d) / prod(1 - q^e), or None if not a polynomial."""
    num = {0: 1}
    for d in relation_degrees:
        num = _poly_mul(num, {0: 1, d: -1})
    top = max(num) if num else 0
    coeffs = [0] * (top + 1)
    for d, c in num.items():
        coeffs[d] = c
    for e in variable_degrees:
        # divide by (1 - q^e): running sums with stride e
        out = [0] * len(coeffs)
        for d in range(len(coeffs)):
            out[d] = coeffs[d] + (out[d - e] if d >= e else 0)
        # exact division leaves nothing beyond the new top degree
        new_top = len(coeffs) - 1 - e
        if new_top < 0 or any(out[d] for d in range(new_top + 1, len(out))):
            return None
        coeffs = out[:new_top + 1]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if any(c < 0 for c in coeffs):
        return None
    return coeffs


def is_regular_system(polys, time_budget=None):
    """For n homogeneous polynomials in n variables: regular iff zero-dimensional."""
    polys = list(polys)
    if not polys:
        raise ValueError("empty system")
    n = polys[0].nvars
    if len(polys) != n:
        raise ValueError(f"{len(polys)} polynomials in {n} variables: only square systems are supported")
    if any(not p for p in polys):
        return False
    return is_zero_dimensional(buchberger(polys, time_budget=time_budget))


def s_polynomial(f, g):
    """S-polynomial of two homogeneous polynomials (both made monic first)."""
    s, _ = _spoly(_as_elem(f), _as_elem(g))
    return Polynomial._raw(_frac(s), f.nvars, f.weights)


def _as_elem(p):
    terms = _q(p.monic()._terms)
    return _Elem(terms, _leading(terms), None)
