"""Brute-force cohomology of pure differential algebras by exact linear algebra.

A pure algebra here is Q[y_1..y_r] (x) Lambda(x_1..x_n) with even y_i of given
weights, odd x_j of given degrees, d y = 0 and d x_j = p_j(y).  Its cohomology
is computed degree by degree from ranks of the differential on monomial bases,
independently of any Groebner machinery.  The complex splits by exterior
length, which keeps every linear system small.

Before any rank is taken, contractible pairs are cancelled: if d x_j has a
nonzero linear term c*y_k with y_k of the same weight, then d x_j is a
nonzerodivisor and the algebra is quasi-isomorphic to the pure algebra
without x_j and y_k, with y_k replaced by the solution of d x_j = 0.
"""

from __future__ import annotations

import itertools
from math import lcm
from dataclasses import dataclass

from gmpy2 import mpq

from .cartanmodel import CartanModel, _weighted_monomials
from .exactpoly import Polynomial
from .linalg import ModularEliminator, SparseEliminator


class ResourceBoundExceeded(RuntimeError):
    pass


DEFAULT_MAX_DEGREE = 40
DEFAULT_MAX_BASIS = 200000


class PureComplex:
    def __init__(self, even_weights, odd_degrees, differentials, max_basis=DEFAULT_MAX_BASIS):
        self.even_weights = tuple(even_weights)
        self.odd_degrees = tuple(odd_degrees)
        if len(differentials) != len(self.odd_degrees):
            raise ValueError("one differential per odd generator")
        for p, f in zip(differentials, self.odd_degrees):
            if p and (p.nvars != len(self.even_weights) or p.degrees() != {f + 1}):
                raise ValueError(f"differential {p} does not have degree {f + 1}")
        self.differentials = [{e: mpq(c.numerator, c.denominator) for e, c in p.terms.items()}
                              for p in differentials]
        self._init_integral()
        self.max_basis = max_basis
        self._basis = {}
        self._index = {}
        self._rank = {}
        self._rank_mod = {}
        self._reduced = {}

    @classmethod
    def _from_terms(cls, even_weights, odd_degrees, terms, max_basis):
        zero = [Polynomial.zero(len(even_weights), even_weights) for _ in odd_degrees]
        cx = cls(even_weights, odd_degrees, zero, max_basis)
        cx.differentials = [dict(t) for t in terms]
        cx._init_integral()
        return cx

    def _init_integral(self):
        # x_j -> D_j x_j with D_j the denominator lcm is an isomorphism of complexes
        self._integral = []
        for p in self.differentials:
            den = 1
            for c in p.values():
                den = lcm(den, int(c.denominator))
            self._integral.append({e: int(c * den) for e, c in p.items()})

    def reduced(self, candidates=None):
        """Cancel contractible pairs; returns (complex, kept variable indices).

        Only variables listed in ``candidates`` (default: all) are eliminated.
        Pairs are taken greedily by generator, then by variable index, so two
        complexes with matching linear terms make matching choices.
        """
        candidates = tuple(range(len(self.even_weights)) if candidates is None else candidates)
        if candidates in self._reduced:
            return self._reduced[candidates]
        weights = list(self.even_weights)
        degrees = list(self.odd_degrees)
        diffs = [dict(p) for p in self.differentials]
        kept = list(range(len(weights)))
        changed = True
        while changed:
            changed = False
            for j, p in enumerate(diffs):
                pick = None
                for k, name in enumerate(kept):
                    unit = tuple(int(i == k) for i in range(len(kept)))
                    if name in candidates and weights[k] == degrees[j] + 1 and p.get(unit):
                        pick = k
                        break
                if pick is None:
                    continue
                c = p[tuple(int(i == pick) for i in range(len(kept)))]
                value = {e: -v / c for e, v in p.items() if e[pick] == 0}
                del diffs[j], degrees[j]
                diffs = [_drop_variable(_substitute(q, pick, value), pick) for q in diffs]
                del weights[pick], kept[pick]
                changed = True
                break
        out = PureComplex._from_terms(weights, degrees, diffs, self.max_basis)
        self._reduced[candidates] = (out, tuple(kept))
        return self._reduced[candidates]

    def basis(self, n, s):
        """Monomials y^a x_S of total degree n with |S| = s, as (a, S) pairs."""
        key = (n, s)
        if key not in self._basis:
            out = []
            for S in itertools.combinations(range(len(self.odd_degrees)), s):
                rest = n - sum(self.odd_degrees[j] for j in S)
                if rest < 0:
                    continue
                for a in _weighted_monomials(self.even_weights, rest):
                    out.append((a, S))
                    if len(out) > self.max_basis:
                        raise ResourceBoundExceeded(f"basis in degree {n} exceeds {self.max_basis} elements")
            self._basis[key] = out
        return self._basis[key]

    def index(self, n, s):
        """Pivot position of each basis monomial of degree (n, s); lexicographic order limits fill-in."""
        key = (n, s)
        if key not in self._index:
            self._index[key] = {b: i for i, b in enumerate(sorted(self.basis(n, s)))}
        return self._index[key]

    def _eliminate(self, vectors, n, s):
        """Eliminator over degree (n, s) holding the given vectors, sparsest first."""
        pos = self.index(n, s)
        elim = SparseEliminator()
        for vec in sorted(vectors, key=len):
            elim.add({pos[k]: c for k, c in vec.items()})
        return elim

    def d(self, a, S, integral=False):
        """Differential of y^a x_S as a sparse vector {(a', S'): coeff}."""
        table = self._integral if integral else self.differentials
        out = {}
        for k, j in enumerate(S):
            sign = -1 if k % 2 else 1
            rest = S[:k] + S[k + 1:]
            for e, c in table[j].items():
                key = (tuple(x + y for x, y in zip(a, e)), rest)
                v = out.get(key, 0) + sign * c
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
        return out

    def rank_d(self, n, s):
        """Rank over Q of d from degree (n, s) to degree (n + 1, s - 1).

        The rank modulo a prime is taken when it is provably the rational one:
        a deficit would lower the cohomology at both (n, s) and (n + 1, s - 1),
        so it cannot occur when either is already zero modulo the prime.
        """
        key = (n, s)
        if key not in self._rank:
            if s == 0 or n < 0:
                self._rank[key] = 0
            elif self._cohomology_mod(n, s) == 0 or self._cohomology_mod(n + 1, s - 1) == 0:
                self._rank[key] = self._rank_modular(n, s)
            else:
                self._rank[key] = self.rank_exact(n, s)
        return self._rank[key]

    def rank_exact(self, n, s):
        if s == 0 or n < 0:
            return 0
        rows = [v for v in (self.d(a, S) for a, S in self.basis(n, s)) if v]
        return self._eliminate(rows, n + 1, s - 1).rank

    def _rank_modular(self, n, s):
        key = (n, s)
        if key not in self._rank_mod:
            if s == 0 or n < 0:
                self._rank_mod[key] = 0
            else:
                pos = self.index(n + 1, s - 1)
                rows = [v for v in (self.d(a, S, integral=True) for a, S in self.basis(n, s)) if v]
                elim = ModularEliminator()
                for vec in sorted(rows, key=len):
                    elim.add({pos[k]: c for k, c in vec.items()})
                self._rank_mod[key] = elim.rank
        return self._rank_mod[key]

    def _cohomology_mod(self, n, s):
        if n < 0 or s < 0 or s > len(self.odd_degrees):
            return 0
        return len(self.basis(n, s)) - self._rank_modular(n, s) - self._rank_modular(n - 1, s + 1)

    def cohomology_dimension(self, n, s):
        return len(self.basis(n, s)) - self.rank_d(n, s) - self.rank_d(n - 1, s + 1)

    def cohomology_upto(self, N):
        dims = []
        for n in range(N + 1):
            dims.append(sum(self.cohomology_dimension(n, s) for s in range(len(self.odd_degrees) + 1)))
        return dims

    def cocycles(self, n, s):
        """A basis of the cocycles in degree (n, s) as sparse vectors over basis keys."""
        basis = self.basis(n, s)
        if s == 0:
            return [{b: mpq(1)} for b in basis]
        elim = SparseEliminator(track=True)
        out = []
        for b in basis:
            dep = elim.add(self.d(*b))
            if dep is not None:
                out.append({basis[i]: c for i, c in dep.items()})
        return out

    def boundaries(self, n, s):
        if n == 0:
            return []
        return [v for v in (self.d(*b) for b in self.basis(n - 1, s + 1)) if v]

    def d_squared_vanishes(self):
        # d x_j lies in the polynomial part, on which d is zero
        return all(not self.d(e, ()) for p in self.differentials for e in p)


def _poly_mul(a, b):
    out = {}
    for e, c in a.items():
        for f, v in b.items():
            key = tuple(x + y for x, y in zip(e, f))
            w = out.get(key, 0) + c * v
            if w:
                out[key] = w
            else:
                out.pop(key, None)
    return out


def _substitute(p, k, value):
    """Replace variable k by the polynomial ``value`` (a term dict without variable k)."""
    out = {}
    powers = {0: {tuple(0 for _ in range(len(next(iter(p))) if p else 0)): mpq(1)}}
    for e, c in p.items():
        m = e[k]
        if m not in powers:
            top = max(powers)
            for i in range(top + 1, m + 1):
                powers[i] = _poly_mul(powers[i - 1], value)
        base = e[:k] + (0,) + e[k + 1:]
        for f, v in powers[m].items():
            key = tuple(x + y for x, y in zip(base, f))
            w = out.get(key, 0) + c * v
            if w:
                out[key] = w
            else:
                out.pop(key, None)
    return out


def _drop_variable(p, k):
    return {e[:k] + e[k + 1:]: c for e, c in p.items()}


def model_complex(m: CartanModel) -> PureComplex:
    return PureComplex(m.base_degrees, m.fiber_degrees, list(m.invariant_images))


@dataclass
class BorelModel:
    """Doubled-base pure model: d x_j = psi_j(u) - psi_j(w).

    ``base`` is "invariant" (two copies of H*(BK) in invariant generators) or
    "torus" (two copies of the torus coordinates of K).
    """

    model: CartanModel
    base: str
    even_weights: tuple
    differentials: tuple

    @property
    def copy_size(self):
        return len(self.even_weights) // 2

    def complex(self):
        return PureComplex(self.even_weights, self.model.fiber_degrees, list(self.differentials))

    def fiber_complex(self):
        r = self.copy_size
        fib = []
        for p in self.differentials:
            fib.append(Polynomial({e[r:]: c for e, c in p.terms.items() if not any(e[:r])}, r,
                                  self.even_weights[r:]))
        return PureComplex(self.even_weights[r:], self.model.fiber_degrees, fib)

    def d_squared_vanishes(self):
        return self.complex().d_squared_vanishes()


def build_borel_model(m: CartanModel, base="invariant") -> BorelModel:
    if base == "invariant":
        weights = tuple(m.base_degrees)
        images = m.invariant_images
    elif base == "torus":
        if not m.images and m.subgroup.rank:
            raise ValueError("this model carries no torus-coordinate images")
        weights = (2,) * m.subgroup.rank
        images = m.images
    else:
        raise ValueError(f"unknown Borel base {base!r}")
    r = len(weights)
    both = weights + weights
    diffs = []
    for p in images:
        p = p.with_weights(weights) if p.nvars else p
        diffs.append(p.embed(2 * r, 0, both) - p.embed(2 * r, r, both))
    return BorelModel(m, base, both, tuple(diffs))


def dga_cohomology_upto(model, N, max_degree=DEFAULT_MAX_DEGREE, reduce=True):
    """Exact Q-dimensions of cohomology in degrees 0..N."""
    if N > max_degree:
        raise ResourceBoundExceeded(f"degree bound {N} exceeds {max_degree}")
    if isinstance(model, CartanModel):
        cx = model_complex(model)
    elif isinstance(model, BorelModel):
        cx = model.complex()
    elif isinstance(model, PureComplex):
        cx = model
    else:
        raise TypeError("expected a CartanModel, BorelModel or PureComplex")
    if reduce:
        cx = cx.reduced()[0]
    return cx.cohomology_upto(N)


def fiber_surjectivity_report(b: BorelModel, N, max_degree=DEFAULT_MAX_DEGREE, fiber=None):
    """Per (degree, exterior length): (fiber cohomology dimension, dimension of the image).

    With I the ideal of the first base copy, 0 -> I -> B -> F -> 0 is exact, so
    a fiber cocycle z lifts to a Borel cocycle iff d_B(z) lies in d_B(I).  The
    image dimension is h minus the rank of these obstructions modulo d_B(I).
    ``fiber`` may supply an already-evaluated complex for F; the Cartan model
    complex qualifies, since negating d changes neither cocycles nor boundaries.

    Both sides are first reduced by cancelling contractible pairs, eliminating
    only fiber-copy variables of B; the reductions commute with restriction,
    so bidegrees in the report refer to the reduced complexes.
    """
    if N > max_degree:
        raise ResourceBoundExceeded(f"degree bound {N} exceeds {max_degree}")
    r = b.copy_size
    borel, kept_b = b.complex().reduced(range(r, 2 * r))
    fiber, kept_f = (fiber or b.fiber_complex()).reduced()
    if kept_b != tuple(range(r)) + tuple(r + i for i in kept_f):
        raise RuntimeError("Borel and fiber reductions diverged")
    zeros = (0,) * r
    report = {}
    for n in range(N + 1):
        for s in range(len(fiber.odd_degrees) + 1):
            h = fiber.cohomology_dimension(n, s)
            if h == 0:
                continue
            if s == 0:
                # polynomial classes lift to themselves
                report[(n, s)] = (h, h)
                continue
            elim = SparseEliminator()
            for v in fiber.boundaries(n, s):
                elim.add(v)
            reps = [z for z in fiber.cocycles(n, s) if elim.add(z) is None]
            obstructions = []
            for z in reps:
                dz = {}
                for (a, S), c in z.items():
                    for key, v in borel.d(zeros + a, S).items():
                        w = dz.get(key, 0) + c * v
                        if w:
                            dz[key] = w
                        else:
                            dz.pop(key, None)
                if dz:
                    obstructions.append(dz)
            if not obstructions:
                report[(n, s)] = (h, h)
                continue
            rows = [v for v in (borel.d(a, S) for a, S in borel.basis(n, s) if any(a[:r])) if v]
            ideal = borel._eliminate(rows, n + 1, s - 1)
            base_rank = ideal.rank
            pos = borel.index(n + 1, s - 1)
            for v in obstructions:
                ideal.add({pos[k]: c for k, c in v.items()})
            report[(n, s)] = (h, h - (ideal.rank - base_rank))
    return report


def verify_fiber_surjectivity(b: BorelModel, m: CartanModel | None = None, N=None,
                              max_degree=DEFAULT_MAX_DEGREE, fiber=None):
    """True iff setting the first base copy to zero is onto in cohomology up to degree N."""
    if N is None:
        N = (m or b.model).formal_dimension
    report = fiber_surjectivity_report(b, N, max_degree, fiber)
    return all(h == got for h, got in report.values())
