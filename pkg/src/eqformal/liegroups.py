"""Compact Lie group data: ranks, invariant generators, torus embeddings, Weyl search.

Every group carries *ambient* torus coordinates (the usual diagonal-entry
coordinates) and *free* coordinates in which its polynomial ring is written.
For SU(n) and S(U(a)U(b)...) the last ambient coordinate is eliminated as minus
the sum of the others; for all other groups the two coincide.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .exactpoly import Polynomial, elementary_symmetric, substitute_linear, top_class
from .linalg import column_space, inverse, matmul, rank as matrix_rank

DEFAULT_MAX_RANK = 12

EXCEPTIONAL_DEGREES = {
    "E6": (4, 10, 12, 16, 18, 24),
    "E7": (4, 12, 16, 20, 24, 28, 36),
    "E8": (4, 16, 24, 28, 36, 40, 48, 60),
    "F4": (4, 12, 16, 24),
    "G2": (4, 12),
}
EXCEPTIONAL_DIMENSION = {"E6": 78, "E7": 133, "E8": 248, "F4": 52, "G2": 14}
EXCEPTIONAL_WEYL_ORDER = {"E6": 51840, "E7": 2903040, "E8": 696729600, "F4": 1152, "G2": 12}


class GroupLabelError(ValueError):
    pass


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True)
class WeylBlock:
    """A run of ambient coordinates permuted among themselves by the Weyl group.

    ``kind`` is "A" (permutations), "BC" (signed permutations), "D" (signed
    permutations with an even number of sign changes), "T" (trivial) or "X"
    (exceptional, no explicit action).
    """

    kind: str
    start: int
    stop: int

    @property
    def size(self):
        return self.stop - self.start


@dataclass(frozen=True)
class GroupDatum:
    label: str
    rank: int
    generator_degrees: tuple
    invariant_generators: tuple | None
    mode: str
    dimension: int
    weyl_order: int
    ambient_matrix: tuple = field(repr=False)
    free_rows: tuple = field(repr=False)
    weyl_blocks: tuple = field(repr=False)
    factors: tuple = field(default=(), repr=False)
    spans: tuple = field(default=(), repr=False)

    @property
    def ambient_dim(self):
        return len(self.ambient_matrix)

    @property
    def explicit(self):
        return self.mode == "explicit"

    @property
    def is_classical(self):
        return all(b.kind != "X" for b in self.weyl_blocks)

    def require_explicit(self):
        if not self.explicit:
            raise ValueError(f"{self.label} is available in degree-only mode; no invariant polynomials")

    def __str__(self):
        return self.label


def _identity(n):
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def _eliminated(n):
    """Ambient matrix for n coordinates summing to zero (last one eliminated)."""
    rows = [tuple(Fraction(int(i == j)) for j in range(n - 1)) for i in range(n - 1)]
    rows.append(tuple(Fraction(-1) for _ in range(n - 1)))
    return tuple(rows)


def _ambient_to_free(polys, amb):
    """Rewrite ambient-coordinate polynomials in free coordinates."""
    return tuple(substitute_linear(p, amb) for p in polys) if amb else tuple(polys)


def _simple(family, n, max_rank=DEFAULT_MAX_RANK):
    if family in EXCEPTIONAL_DEGREES:
        degs = EXCEPTIONAL_DEGREES[family]
        r = len(degs)
        return GroupDatum(family, r, degs, None, "degree-only", EXCEPTIONAL_DIMENSION[family],
                          EXCEPTIONAL_WEYL_ORDER[family], _identity(r), tuple(range(r)),
                          (WeylBlock("X", 0, r),), (), (r,))
    if n is None or n < 0:
        raise GroupLabelError(f"{family} needs a non-negative parameter")
    if family == "Spin":
        family = "SO"
    if family in ("SU", "U", "Sp") and n < 1:
        raise GroupLabelError(f"{family}({n}) is not a group in this catalog")
    if family == "SO" and n < 1:
        raise GroupLabelError("SO(n) needs n >= 1")
    label = f"T^{n}" if family == "T" else f"{family}({n})"
    if family == "SU":
        r, amb_n = n - 1, n
        amb = _eliminated(n)
        gens_amb = [elementary_symmetric(k, range(n), n) for k in range(2, n + 1)]
        blocks = (WeylBlock("A", 0, n),)
        dim, worder = n * n - 1, math.factorial(n)
        free = tuple(range(n - 1))
    elif family == "U":
        r, amb_n = n, n
        amb = _identity(n)
        gens_amb = [elementary_symmetric(k, range(n), n) for k in range(1, n + 1)]
        blocks = (WeylBlock("A", 0, n),)
        dim, worder = n * n, math.factorial(n)
        free = tuple(range(n))
    elif family == "Sp":
        r = amb_n = n
        amb = _identity(n)
        gens_amb = [elementary_symmetric(k, range(n), n, squared=True) for k in range(1, n + 1)]
        blocks = (WeylBlock("BC", 0, n),)
        dim, worder = n * (2 * n + 1), 2 ** n * math.factorial(n)
        free = tuple(range(n))
    elif family == "SO":
        m = n // 2
        r = amb_n = m
        amb = _identity(m)
        if n % 2:
            gens_amb = [elementary_symmetric(k, range(m), m, squared=True) for k in range(1, m + 1)]
            blocks = (WeylBlock("BC", 0, m),) if m else ()
            worder = 2 ** m * math.factorial(m)
        else:
            gens_amb = [elementary_symmetric(k, range(m), m, squared=True) for k in range(1, m)]
            gens_amb.append(top_class(range(m), m))
            blocks = (WeylBlock("D", 0, m),)
            worder = 2 ** (m - 1) * math.factorial(m)
        dim = n * (n - 1) // 2
        free = tuple(range(m))
    elif family == "T":
        r = amb_n = n
        amb = _identity(n)
        gens_amb = [Polynomial.variable(i, n) for i in range(n)]
        blocks = (WeylBlock("T", 0, n),) if n else ()
        dim, worder = n, 1
        free = tuple(range(n))
    else:
        raise GroupLabelError(f"unknown group family {family!r}")
    if r > max_rank:
        raise GroupLabelError(f"{label} has rank {r}, above the bound {max_rank}")
    gens = _ambient_to_free(gens_amb, amb)
    degs = tuple(g.degree() for g in gens)
    return GroupDatum(label, r, degs, gens, "explicit", dim, worder, amb, free, blocks, (), (amb_n,) if amb_n else ())


def _s_unitary(sizes, max_rank=DEFAULT_MAX_RANK):
    if not sizes or any(a < 1 for a in sizes):
        raise GroupLabelError("S(U(a)U(b)...) needs positive block sizes")
    n = sum(sizes)
    r = n - 1
    if r > max_rank:
        raise GroupLabelError(f"rank {r} above the bound {max_rank}")
    gens_amb = []
    blocks = []
    start = 0
    for bi, a in enumerate(sizes):
        idx = range(start, start + a)
        first = 2 if bi == len(sizes) - 1 else 1
        gens_amb.extend(elementary_symmetric(k, idx, n) for k in range(first, a + 1))
        blocks.append(WeylBlock("A", start, start + a))
        start += a
    amb = _eliminated(n)
    gens = _ambient_to_free(gens_amb, amb)
    label = "S(" + "".join(f"U({a})" for a in sizes) + ")"
    dim = sum(a * a for a in sizes) - 1
    worder = math.prod(math.factorial(a) for a in sizes)
    return GroupDatum(label, r, tuple(g.degree() for g in gens), gens, "explicit", dim, worder,
                      amb, tuple(range(n - 1)), tuple(blocks), (), tuple(sizes))


def product(factors):
    """Direct product; coordinates are concatenated factor by factor."""
    factors = tuple(factors)
    if len(factors) == 1:
        return factors[0]
    flat = []
    for f in factors:
        flat.extend(f.factors if f.factors else [f])
    factors = tuple(flat)
    rank = sum(f.rank for f in factors)
    amb = []
    free = []
    blocks = []
    gens = []
    mode = "explicit" if all(f.explicit for f in factors) else "degree-only"
    ro = ao = 0
    for f in factors:
        for row in f.ambient_matrix:
            amb.append(tuple([Fraction(0)] * ro + list(row) + [Fraction(0)] * (rank - ro - f.rank)))
        free.extend(ao + i for i in f.free_rows)
        blocks.extend(WeylBlock(b.kind, b.start + ao, b.stop + ao) for b in f.weyl_blocks)
        if mode == "explicit":
            gens.extend(g.embed(rank, ro) for g in f.invariant_generators)
        ro += f.rank
        ao += f.ambient_dim
    degs = tuple(d for f in factors for d in f.generator_degrees)
    return GroupDatum("x".join(f.label for f in factors), rank, degs,
                      tuple(gens) if mode == "explicit" else None, mode,
                      sum(f.dimension for f in factors), math.prod(f.weyl_order for f in factors),
                      tuple(amb), tuple(free), tuple(blocks), factors,
                      tuple(f.ambient_dim for f in factors))


_FACTOR_RE = re.compile(
    r"\s*(?:"
    r"S\((?P<su>(?:U\(\d+\))+)\)"
    r"|(?P<fam>SU|SO|Sp|Spin|U)\((?P<n>\d+)\)"
    r"|T\^(?P<t>\d+)"
    r"|(?P<exc>E6|E7|E8|F4|G2)"
    r"|(?P<one>1)"
    r")\s*(?:[x×*]\s*)?"
)


def parse_label(label, max_rank=DEFAULT_MAX_RANK):
    """Parse an ASCII group label such as ``SU(3)``, ``S(U(2)U(1))`` or ``SO(3)xSO(3)``."""
    if not isinstance(label, str) or not label.strip():
        raise GroupLabelError("empty group label")
    text = label.strip()
    pos = 0
    factors = []
    while pos < len(text):
        m = _FACTOR_RE.match(text, pos)
        if not m or m.end() == pos:
            raise GroupLabelError(f"unknown group label {label!r} (cannot parse at {text[pos:]!r})")
        pos = m.end()
        if m.group("su"):
            sizes = [int(x) for x in re.findall(r"\d+", m.group("su"))]
            factors.append(_s_unitary(sizes, max_rank))
        elif m.group("fam"):
            factors.append(_simple(m.group("fam"), int(m.group("n")), max_rank))
        elif m.group("t") is not None:
            factors.append(_simple("T", int(m.group("t")), max_rank))
        elif m.group("exc"):
            factors.append(_simple(m.group("exc"), None, max_rank))
        else:
            factors.append(_simple("T", 0, max_rank))
    g = product(factors)
    if g.rank > max_rank:
        raise GroupLabelError(f"{label} has rank {g.rank}, above the bound {max_rank}")
    return g


def make_group(label, params=None, max_rank=DEFAULT_MAX_RANK):
    """Build a group from a full label (``"SO(5)"``) or a family plus parameters (``"SO", 5``)."""
    if params is None:
        return parse_label(label, max_rank)
    if isinstance(params, int):
        params = (params,)
    params = tuple(params)
    if label == "S(U)":
        return _s_unitary(params, max_rank)
    if label == "T":
        return _simple("T", params[0], max_rank)
    if label in EXCEPTIONAL_DEGREES:
        return _simple(label, None, max_rank)
    if len(params) != 1:
        raise GroupLabelError(f"{label} takes exactly one parameter")
    return _simple(label, params[0], max_rank)


def weyl_order(g):
    return g.weyl_order


def group_dimension(g):
    return g.dimension


# -- torus maps ----------------------------------------------------------------

@dataclass(frozen=True)
class TorusMap:
    """Integer substitution from the big group's free torus coordinates to the subgroup's.

    Row i says where the i-th coordinate of the big group goes, as a
    combination of subgroup coordinates.
    """

    matrix: tuple
    source_rank: int
    target_rank: int
    source_label: str = ""
    target_label: str = ""

    def __post_init__(self):
        if len(self.matrix) != self.source_rank or any(len(r) != self.target_rank for r in self.matrix):
            raise EmbeddingError("torus map dimension mismatch")
        if self.target_rank and matrix_rank([list(r) for r in self.matrix]) != self.target_rank:
            raise EmbeddingError("torus map is not injective on the subgroup torus")

    def apply(self, p):
        return substitute_linear(p, self)


def identity_map(g):
    return TorusMap(_identity(g.rank), g.rank, g.rank, g.label, g.label)


def compose(outer, inner):
    """``outer`` maps G to H coordinates, ``inner`` maps H to K; the result maps G to K."""
    if outer.target_rank != inner.source_rank:
        raise EmbeddingError(f"cannot compose: {outer.target_rank} != {inner.source_rank}")
    if outer.source_rank == 0:
        mat = ()
    elif inner.target_rank == 0:
        mat = tuple(() for _ in range(outer.source_rank))
    else:
        mat = tuple(tuple(r) for r in matmul([list(r) for r in outer.matrix], [list(r) for r in inner.matrix]))
    return TorusMap(mat, outer.source_rank, inner.target_rank, outer.source_label, inner.target_label)


EMBEDDING_KINDS = (
    "identity", "block", "diagonal", "diagonal-double-block", "conjugate-double-block",
    "complex-in-quaternionic", "complex-in-real", "real-in-complex", "real-in-quaternionic",
    "real-in-quaternionic-literal", "quaternionic-in-real", "quaternionic-in-complex",
    "factorwise", "matrix",
)


def _kind_ambient(kind, n_big, n_small):
    """Ambient substitution (n_big rows, n_small columns) for a size-only embedding kind."""
    e = [[0] * n_small for _ in range(n_big)]
    if kind in ("identity", "complex-in-quaternionic", "complex-in-real"):
        if n_big != n_small:
            raise EmbeddingError(f"{kind} needs equal torus sizes, got {n_big} and {n_small}")
        for i in range(n_small):
            e[i][i] = 1
    elif kind == "block":
        if n_small > n_big:
            raise EmbeddingError(f"block embedding of {n_small} coordinates into {n_big}")
        for i in range(n_small):
            e[i][i] = 1
    elif kind in ("diagonal", "diagonal-double-block"):
        if kind == "diagonal-double-block" and n_big != 2 * n_small:
            raise EmbeddingError(f"{kind} needs {n_big} = 2 x {n_small}")
        if n_small and n_big % n_small:
            raise EmbeddingError(f"{kind} needs {n_big} to be a multiple of {n_small}")
        for c in range(n_big // n_small if n_small else 0):
            for i in range(n_small):
                e[c * n_small + i][i] = 1
    elif kind == "conjugate-double-block":
        if n_big != 2 * n_small:
            raise EmbeddingError(f"{kind} needs {n_big} = 2 x {n_small}")
        for i in range(n_small):
            e[i][i] = 1
            e[n_small + i][i] = -1
    elif kind in ("real-in-complex", "real-in-quaternionic", "quaternionic-in-real", "quaternionic-in-complex",
                  "real-in-quaternionic-literal"):
        if 2 * n_small > n_big:
            raise EmbeddingError(f"{kind} cannot place {n_small} coordinates into {n_big}")
        for i in range(n_small):
            e[2 * i][i] = 1
            if kind != "real-in-quaternionic-literal":
                e[2 * i + 1][i] = -1
    else:
        raise EmbeddingError(f"unknown embedding kind {kind!r}")
    return e


def _check_family(kind, big, small):
    fam_big = big.label.split("(")[0]
    fam_small = small.label.split("(")[0]
    expect = {
        "complex-in-quaternionic": ({"U"}, {"Sp"}),
        "complex-in-real": ({"U"}, {"SO"}),
        "real-in-complex": ({"SO"}, {"SU", "U"}),
        "real-in-quaternionic": ({"SO"}, {"Sp"}),
        "real-in-quaternionic-literal": ({"SO"}, {"Sp"}),
        "quaternionic-in-real": ({"Sp"}, {"SO"}),
        "quaternionic-in-complex": ({"Sp"}, {"SU", "U"}),
    }.get(kind)
    if expect is None:
        return
    if big.factors or small.factors or fam_small not in expect[0] or fam_big not in expect[1]:
        raise EmbeddingError(f"{kind} does not apply to {small.label} in {big.label}")
    n_small = int(small.label.split("(")[1].rstrip(")"))
    n_big = int(big.label.split("(")[1].rstrip(")"))
    need = {"complex-in-quaternionic": n_small, "complex-in-real": 2 * n_small, "real-in-complex": n_small,
            "real-in-quaternionic": n_small, "real-in-quaternionic-literal": n_small,
            "quaternionic-in-real": 4 * n_small, "quaternionic-in-complex": 2 * n_small}[kind]
    if n_big != need:
        raise EmbeddingError(f"{kind} maps {small.label} into the group of size {need}, not {big.label}")


def ambient_embedding(kind, big, small, parts=None, matrix=None):
    """Ambient-coordinate substitution for ``small`` inside ``big``."""
    if kind == "matrix":
        if matrix is None:
            raise EmbeddingError("matrix embedding needs an explicit matrix")
        e = [[Fraction(x) for x in row] for row in matrix]
        if len(e) != big.ambient_dim or any(len(r) != small.ambient_dim for r in e):
            raise EmbeddingError("explicit matrix has the wrong shape")
        return e
    if kind == "factorwise":
        big_spans = list(big.spans)
        small_spans = [f.ambient_dim for f in small.factors] if small.factors else [small.ambient_dim]
        small_parts = list(small.factors) if small.factors else [small]
        if parts is None or len(parts) != len(small_spans) or len(big_spans) != len(small_spans):
            raise EmbeddingError("factorwise embedding needs one part per factor on both sides")
        e = [[0] * small.ambient_dim for _ in range(big.ambient_dim)]
        ro = co = 0
        big_parts = list(big.factors) if big.factors else [None] * len(big_spans)
        for kind_i, nb, ns, sp, bp in zip(parts, big_spans, small_spans, small_parts, big_parts):
            if bp is not None:
                _check_family(kind_i, bp, sp)
            sub = _kind_ambient(kind_i, nb, ns)
            for i in range(nb):
                for j in range(ns):
                    e[ro + i][co + j] = sub[i][j]
            ro += nb
            co += ns
        return e
    _check_family(kind, big, small)
    return _kind_ambient(kind, big.ambient_dim, small.ambient_dim)


def standard_embedding(kind, big, small, parts=None, matrix=None):
    """TorusMap for the subgroup ``small`` of ``big`` given by a named embedding kind."""
    if isinstance(big, str):
        big = make_group(big)
    if isinstance(small, str):
        small = make_group(small)
    if not big.is_classical or not small.is_classical:
        raise EmbeddingError("explicit embeddings are only available for classical groups")
    if small.rank > big.rank:
        raise EmbeddingError(f"rank of {small.label} ({small.rank}) exceeds rank of {big.label} ({big.rank})")
    if kind == "identity":
        if big.rank != small.rank:
            raise EmbeddingError(f"identity needs equal ranks, got {big.rank} and {small.rank}")
        return TorusMap(_identity(big.rank), big.rank, small.rank, big.label, small.label)
    e = ambient_embedding(kind, big, small, parts, matrix)
    image = matmul(e, [list(r) for r in small.ambient_matrix]) if small.rank else [[] for _ in e]
    m = [image[i] for i in big.free_rows]
    back = matmul([list(r) for r in big.ambient_matrix], m) if big.rank else [[] for _ in image]
    if small.rank and back != image:
        raise EmbeddingError(f"{kind} does not send the torus of {small.label} into the torus of {big.label}")
    if small.rank == 0:
        mat = tuple(() for _ in range(big.rank))
    else:
        mat = tuple(tuple(Fraction(x) for x in row) for row in m)
    return TorusMap(mat, big.rank, small.rank, big.label, small.label)


def embedding_from_recipe(subgroup, steps, group):
    """Compose a chain of embedding steps ``subgroup -> ... -> group``.

    Each step is a dict with ``kind`` and ``into`` (the next group label), and
    optionally ``parts`` or ``matrix``.  The last step may omit ``into``.
    """
    g = make_group(group) if isinstance(group, str) else group
    cur = make_group(subgroup) if isinstance(subgroup, str) else subgroup
    if not steps:
        raise EmbeddingError("empty embedding recipe")
    total = None
    for i, step in enumerate(steps):
        if isinstance(step, str):
            step = {"kind": step}
        into = step.get("into")
        if into is None:
            if i != len(steps) - 1:
                raise EmbeddingError("only the last recipe step may omit 'into'")
            nxt = g
        else:
            nxt = make_group(into)
        if i == len(steps) - 1 and nxt.label != g.label:
            raise EmbeddingError(f"recipe ends in {nxt.label}, expected {g.label}")
        tm = standard_embedding(step["kind"], nxt, cur, step.get("parts"), step.get("matrix"))
        total = tm if total is None else compose(tm, total)
        cur = nxt
    return total


def ambient_image(g, tmap):
    """The subgroup torus written in the big group's ambient coordinates."""
    if tmap.source_rank != g.rank:
        raise EmbeddingError("torus map does not start at this group")
    if tmap.target_rank == 0:
        return [[] for _ in range(g.ambient_dim)]
    return matmul([list(r) for r in g.ambient_matrix], [list(r) for r in tmap.matrix])


# -- Weyl group -------------------------------------------------------------------

@dataclass(frozen=True)
class WeylElement:
    """Signed permutation of ambient coordinates: ``(w x)_i = signs[i] * x[perm[i]]``."""

    perm: tuple
    signs: tuple
    group: str = ""

    def act(self, vectors):
        return [[s * vectors[p][j] for j in range(len(vectors[p]))] for p, s in zip(self.perm, self.signs)]

    def inverse(self):
        n = len(self.perm)
        perm = [0] * n
        signs = [1] * n
        for i, (p, s) in enumerate(zip(self.perm, self.signs)):
            perm[p] = i
            signs[p] = s
        return WeylElement(tuple(perm), tuple(signs), self.group)

    def is_identity(self):
        return self.perm == tuple(range(len(self.perm))) and all(s == 1 for s in self.signs)

    def free_matrix(self, g):
        """Action on free coordinates as a substitution matrix (rows: old coordinates)."""
        amb = [list(r) for r in g.ambient_matrix]
        moved = self.act(amb)
        return [moved[i] for i in g.free_rows]

    def act_polynomial(self, g, p):
        return substitute_linear(p, self.free_matrix(g))


def is_legal(g, w):
    if len(w.perm) != g.ambient_dim or sorted(w.perm) != list(range(g.ambient_dim)):
        return False
    covered = set()
    for b in g.weyl_blocks:
        idx = range(b.start, b.stop)
        covered.update(idx)
        if any(not b.start <= w.perm[i] < b.stop for i in idx):
            return False
        flips = sum(1 for i in idx if w.signs[i] == -1)
        if b.kind in ("A", "T") and flips:
            return False
        if b.kind == "T" and any(w.perm[i] != i for i in idx):
            return False
        if b.kind == "D" and flips % 2:
            return False
        if b.kind == "X" and not all(w.perm[i] == i and w.signs[i] == 1 for i in idx):
            return False
    return all(w.perm[i] == i and w.signs[i] == 1 for i in range(g.ambient_dim) if i not in covered)


def random_weyl_element(g, rng):
    perm = list(range(g.ambient_dim))
    signs = [1] * g.ambient_dim
    for b in g.weyl_blocks:
        if b.kind in ("T", "X"):
            continue
        idx = list(range(b.start, b.stop))
        shuffled = idx[:]
        rng.shuffle(shuffled)
        for i, j in zip(idx, shuffled):
            perm[i] = j
        if b.kind in ("BC", "D"):
            for i in idx:
                signs[i] = rng.choice((1, -1))
            if b.kind == "D" and sum(1 for i in idx if signs[i] == -1) % 2:
                signs[idx[0]] *= -1
    return WeylElement(tuple(perm), tuple(signs), g.label)


class SearchBoundExceeded(RuntimeError):
    pass


def _block_of(g):
    owner = {}
    for bi, b in enumerate(g.weyl_blocks):
        for i in range(b.start, b.stop):
            owner[i] = bi
    return owner


def weyl_orbit_search(g, map1, map2, max_rank=8):
    """Find a legal Weyl element carrying the first subtorus onto the second.

    Returns a WeylElement ``w`` with ``w . image(map1) == image(map2)`` as
    subspaces of the ambient coordinate space, or None if there is none.
    """
    if not g.is_classical:
        raise ValueError(f"Weyl search needs a classical group, got {g.label}")
    if g.rank > max_rank:
        raise SearchBoundExceeded(f"rank {g.rank} exceeds the Weyl search bound {max_rank}")
    if (map1.source_rank, map1.target_rank) != (map2.source_rank, map2.target_rank):
        raise ValueError("torus maps must have matching shapes")
    k = map1.target_rank
    n = g.ambient_dim
    b1 = [[Fraction(x) for x in r] for r in ambient_image(g, map1)]
    b2 = [[Fraction(x) for x in r] for r in ambient_image(g, map2)]
    if k == 0:
        return WeylElement(tuple(range(n)), (1,) * n, g.label)
    owner = _block_of(g)
    kinds = {bi: b.kind for bi, b in enumerate(g.weyl_blocks)}
    # pivot rows: first k independent rows of b2
    pivots = []
    for i in range(n):
        if matrix_rank([b2[j] for j in pivots + [i]]) == len(pivots) + 1:
            pivots.append(i)
        if len(pivots) == k:
            break
    target_space = column_space(b2, k)

    def candidates(i):
        bi = owner.get(i)
        if bi is None:
            return [(i, 1)]
        kind = kinds[bi]
        blk = g.weyl_blocks[bi]
        out = []
        for j in range(blk.start, blk.stop):
            if kind == "T" and j != i:
                continue
            out.append((j, 1))
            if kind in ("BC", "D"):
                out.append((j, -1))
        return out

    def search(t, choice, used):
        if t == k:
            sub = [[s * x for x in b1[j]] for j, s in choice]
            gmat = matmul(inverse(sub), [b2[i] for i in pivots])
            c = matmul(b1, gmat)
            w = _match_rest(g, c, b2, dict(zip(pivots, choice)), owner, kinds)
            if w is not None and column_space(w.act(b1), k) == target_space:
                return w
            return None
        tried = set()
        for j, s in candidates(pivots[t]):
            # rows equal up to the chosen sign inside one block are interchangeable
            key = (owner.get(j), tuple(s * x for x in b1[j]))
            if j in used or key in tried:
                continue
            tried.add(key)
            rows = [[sg * x for x in b1[jj]] for jj, sg in choice] + [[s * x for x in b1[j]]]
            if matrix_rank(rows) != t + 1:
                continue
            w = search(t + 1, choice + [(j, s)], used | {j})
            if w is not None:
                return w
        return None

    return search(0, [], frozenset())


def _match_rest(g, c, b2, fixed, owner, kinds):
    """Complete a partial signed assignment so that row i of b2 equals sign * row perm[i] of c."""
    n = len(b2)
    perm = [None] * n
    signs = [1] * n
    used = set()
    for i, (j, s) in fixed.items():
        perm[i] = j
        signs[i] = s
        used.add(j)
    for i in range(n):
        if perm[i] is not None:
            continue
        bi = owner.get(i)
        if bi is None:
            if i in used or c[i] != b2[i]:
                return None
            perm[i] = i
            used.add(i)
            continue
        kind = kinds[bi]
        blk = g.weyl_blocks[bi]
        found = False
        for j in range(blk.start, blk.stop):
            if j in used or (kind == "T" and j != i):
                continue
            if c[j] == b2[i]:
                perm[i], signs[i] = j, 1
            elif kind in ("BC", "D") and [-x for x in c[j]] == b2[i]:
                perm[i], signs[i] = j, -1
            else:
                continue
            used.add(j)
            found = True
            break
        if not found:
            return None
    # within a +-class the parity of sign changes is forced; only a zero row frees it
    for bi, blk in enumerate(g.weyl_blocks):
        if kinds[bi] != "D":
            continue
        idx = range(blk.start, blk.stop)
        if sum(1 for i in idx if signs[i] == -1) % 2 == 0:
            continue
        zero = next((i for i in idx if i not in fixed and not any(b2[i])), None)
        if zero is not None:
            signs[zero] = -signs[zero]
            continue
        return None
    w = WeylElement(tuple(perm), tuple(signs), g.label)
    return w if is_legal(g, w) else None

