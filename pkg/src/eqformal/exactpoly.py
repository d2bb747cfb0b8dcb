"""Exact multivariate polynomials over the rationals, graded by cohomological degree.

Every variable carries a cohomological weight.  Torus coordinates of a
classifying space all have weight 2; polynomials written in the generators of
an invariant ring may carry other (even) weights.  Coefficients are
``fractions.Fraction`` and never floats.
"""

from __future__ import annotations

import re
from fractions import Fraction
from itertools import combinations
from numbers import Rational


def monomial_degree(exps, weights):
    return sum(e * w for e, w in zip(exps, weights))


def grevlex_key(exps, weights):
    """Sort key for the weighted graded reverse lexicographic order.

    Larger key means larger monomial: first by weighted degree, then the
    monomial with the smaller exponent in the last differing variable wins.
    """
    return (monomial_degree(exps, weights), tuple(-e for e in reversed(exps)))


def _as_fraction(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"inexact coefficient {c!r}; only integers and Fractions are allowed")


class Polynomial:
    """Immutable sparse polynomial ``{exponent tuple: Fraction}``."""

    __slots__ = ("_terms", "nvars", "weights", "_sorted")

    def __init__(self, terms=None, nvars=1, weights=None):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        self.nvars = nvars
        self.weights = tuple(weights) if weights is not None else (2,) * nvars
        if len(self.weights) != nvars:
            raise ValueError("one weight per variable is required")
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent vector {exps} for {nvars} variables")
            c = _as_fraction(c)
            if c:
                clean[exps] = clean.get(exps, 0) + c
                if not clean[exps]:
                    del clean[exps]
        self._terms = clean
        self._sorted = None

    @classmethod
    def _raw(cls, terms, nvars, weights):
        # trusted constructor: terms already normalized
        p = cls.__new__(cls)
        p._terms = terms
        p.nvars = nvars
        p.weights = weights
        p._sorted = None
        return p

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, nvars, weights=None):
        return cls({}, nvars, weights)

    @classmethod
    def constant(cls, c, nvars, weights=None):
        return cls({(0,) * nvars: c}, nvars, weights)

    @classmethod
    def one(cls, nvars, weights=None):
        return cls.constant(1, nvars, weights)

    @classmethod
    def variable(cls, i, nvars, weights=None):
        exps = [0] * nvars
        exps[i] = 1
        return cls({tuple(exps): 1}, nvars, weights)

    @classmethod
    def monomial(cls, exps, coeff=1, weights=None):
        return cls({tuple(exps): coeff}, len(exps), weights)

    # -- accessors ----------------------------------------------------------
    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        """Terms in descending monomial order."""
        if self._sorted is None:
            w = self.weights
            self._sorted = sorted(self._terms.items(), key=lambda t: grevlex_key(t[0], w), reverse=True)
        return self._sorted

    def coefficient(self, exps):
        return self._terms.get(tuple(exps), Fraction(0))

    def is_zero(self):
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def leading_term(self):
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        return self.items()[0]

    def leading_monomial(self):
        return self.leading_term()[0]

    def leading_coefficient(self):
        return self.leading_term()[1]

    def degrees(self):
        return {monomial_degree(e, self.weights) for e in self._terms}

    def degree(self):
        """Cohomological degree; ``-1`` for the zero polynomial."""
        ds = self.degrees()
        return max(ds) if ds else -1

    def is_homogeneous(self):
        return len(self.degrees()) <= 1

    def variables_used(self):
        return sorted({i for e in self._terms for i, k in enumerate(e) if k})

    # -- ring structure -----------------------------------------------------
    def _check(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other, self.nvars, self.weights)
        if other.nvars != self.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
        if other.weights != self.weights:
            raise ValueError("variable weights differ")
        return other

    def __add__(self, other):
        other = self._check(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Polynomial._raw(out, self.nvars, self.weights)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw({e: -c for e, c in self._terms.items()}, self.nvars, self.weights)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = _as_fraction(other)
            if not c:
                return Polynomial.zero(self.nvars, self.weights)
            return Polynomial._raw({e: v * c for e, v in self._terms.items()}, self.nvars, self.weights)
        other = self._check(other)
        out = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial._raw({e: c for e, c in out.items() if c}, self.nvars, self.weights)

    __rmul__ = __mul__

    def __truediv__(self, c):
        c = _as_fraction(c)
        return self * (1 / c)

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative power")
        result = Polynomial.one(self.nvars, self.weights)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return (self.nvars, self.weights, self._terms) == (other.nvars, other.weights, other._terms)
        if isinstance(other, (int, Fraction)):
            return self == Polynomial.constant(other, self.nvars, self.weights)
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, self.weights, frozenset(self._terms.items())))

    def monic(self):
        return self / self.leading_coefficient()

    def shift_monomial(self, exps):
        """Multiply by the monomial with exponent vector ``exps``."""
        return Polynomial._raw(
            {tuple(a + b for a, b in zip(e, exps)): c for e, c in self._terms.items()},
            self.nvars, self.weights)

    def with_weights(self, weights):
        return Polynomial._raw(dict(self._terms), self.nvars, tuple(weights))

    def embed(self, nvars, offset=0, weights=None):
        """Re-index into a larger ring, placing variable ``i`` at ``offset + i``."""
        if offset + self.nvars > nvars:
            raise ValueError("target ring too small")
        pad_l, pad_r = (0,) * offset, (0,) * (nvars - offset - self.nvars)
        return Polynomial._raw({pad_l + e + pad_r: c for e, c in self._terms.items()}, nvars,
                               tuple(weights) if weights is not None else (2,) * nvars)

    def evaluate(self, values):
        """Substitute polynomials (or scalars) for the variables."""
        values = list(values)
        if len(values) != self.nvars:
            raise ValueError("one value per variable is required")
        if not values:
            return self.coefficient(())
        sample = next((v for v in values if isinstance(v, Polynomial)), None)
        if sample is None:
            total = Fraction(0)
            for e, c in self._terms.items():
                term = c
                for v, k in zip(values, e):
                    if k:
                        term *= Fraction(v) ** k
                total += term
            return total
        values = [v if isinstance(v, Polynomial) else Polynomial.constant(v, sample.nvars, sample.weights)
                  for v in values]
        powers = [{0: Polynomial.one(sample.nvars, sample.weights)} for _ in values]
        out = Polynomial.zero(sample.nvars, sample.weights)
        for e, c in self._terms.items():
            term = Polynomial.constant(c, sample.nvars, sample.weights)
            for i, k in enumerate(e):
                if k:
                    cache = powers[i]
                    if k not in cache:
                        cache[k] = values[i] ** k
                    term = term * cache[k]
            out = out + term
        return out

    def __repr__(self):
        return f"Polynomial({to_text(self)!r}, nvars={self.nvars})"

    def __str__(self):
        return to_text(self)


def arith(a, b, op):
    """Exact ring arithmetic; ``op`` is one of ``add``, ``sub``, ``mul``."""
    if a.nvars != b.nvars:
        raise ValueError(f"variable count mismatch: {a.nvars} vs {b.nvars}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def _matrix_rows(tmap):
    return [list(r) for r in getattr(tmap, "matrix", tmap)]


def substitute_linear(p, tmap, target_weights=None):
    """Apply the ring map sending variable ``i`` to ``sum_j M[i][j] * s_j``.

    ``tmap`` is a TorusMap (anything with a ``matrix`` attribute) or a plain
    integer/rational matrix with one row per variable of ``p``.
    """
    rows = _matrix_rows(tmap)
    if len(rows) != p.nvars:
        raise ValueError(f"map has {len(rows)} source coordinates, polynomial has {p.nvars} variables")
    m = len(rows[0]) if rows else getattr(tmap, "target_rank", 0)
    weights = tuple(target_weights) if target_weights is not None else (2,) * m
    images = []
    for r in rows:
        if len(r) != m:
            raise ValueError("ragged substitution matrix")
        terms = {}
        for j, c in enumerate(r):
            if c:
                e = [0] * m
                e[j] = 1
                terms[tuple(e)] = c
        images.append(Polynomial(terms, m, weights))
    powers = [{0: Polynomial.one(m, weights)} for _ in images]
    out = {}
    for e, c in p._terms.items():
        term = Polynomial.constant(c, m, weights)
        for i, k in enumerate(e):
            if k:
                cache = powers[i]
                if k not in cache:
                    cache[k] = images[i] ** k
                term = term * cache[k]
                if not term:
                    break
        for te, tc in term._terms.items():
            v = out.get(te, 0) + tc
            if v:
                out[te] = v
            else:
                out.pop(te, None)
    return Polynomial._raw(out, m, weights)


def elementary_symmetric(k, vars, nvars, squared=False, weights=None):
    """``e_k`` in the listed variables (0-based), or in their squares."""
    vars = list(vars)
    if not 0 <= k <= len(vars):
        raise ValueError(f"k={k} out of range for {len(vars)} variables")
    step = 2 if squared else 1
    terms = {}
    for combo in combinations(vars, k):
        e = [0] * nvars
        for i in combo:
            e[i] += step
        terms[tuple(e)] = terms.get(tuple(e), 0) + 1
    return Polynomial(terms, nvars, weights)


def top_class(vars, nvars, weights=None):
    """The product of the listed variables (Euler class of an even orthogonal group)."""
    vars = list(vars)
    if not vars:
        raise ValueError("top_class needs at least one variable")
    e = [0] * nvars
    for i in vars:
        e[i] += 1
    return Polynomial({tuple(e): 1}, nvars, weights)


# -- canonical text form ------------------------------------------------------

def _fmt_coeff(c):
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def to_text(p, prefix="t"):
    """Canonical text such as ``2*t1^2 - 1/3*t1*t2`` (terms in descending order)."""
    if not p._terms:
        return "0"
    parts = []
    for idx, (e, c) in enumerate(p.items()):
        factors = [f"{prefix}{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k]
        mag = abs(c)
        if factors:
            body = "*".join(factors) if mag == 1 else _fmt_coeff(mag) + "*" + "*".join(factors)
        else:
            body = _fmt_coeff(mag)
        if idx == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


_TERM_RE = re.compile(r"\s*([+-])?\s*([^+-]+)")
_FACTOR_RE = re.compile(r"^([A-Za-z]+)(\d+)(?:\^(\d+))?$")
_NUMBER_RE = re.compile(r"^\d+(?:/\d+)?$")


def parse_poly(text, nvars, prefix="t", weights=None):
    """Inverse of :func:`to_text`; accepts any spacing and ``**`` for powers."""
    s = text.replace("**", "^").strip()
    if not s:
        raise ValueError("empty polynomial text")
    terms = {}
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM_RE.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial near {s[pos:]!r}")
        sign, body = m.group(1), m.group(2).strip()
        if sign is None and not first:
            raise ValueError(f"missing operator before {body!r}")
        first = False
        coeff = Fraction(-1 if sign == "-" else 1)
        exps = [0] * nvars
        for factor in body.split("*"):
            factor = factor.strip()
            if _NUMBER_RE.match(factor):
                coeff *= Fraction(factor)
                continue
            fm = _FACTOR_RE.match(factor)
            if not fm or fm.group(1) != prefix:
                raise ValueError(f"bad factor {factor!r}")
            i = int(fm.group(2)) - 1
            if not 0 <= i < nvars:
                raise ValueError(f"variable {factor!r} outside ring of {nvars} variables")
            exps[i] += int(fm.group(3) or 1)
        key = tuple(exps)
        terms[key] = terms.get(key, 0) + coeff
        pos = m.end()
    return Polynomial(terms, nvars, weights)
