"""Small dense and sparse exact linear algebra over Q."""

from __future__ import annotations

import heapq
from fractions import Fraction


def matmul(a, b):
    if not a:
        return []
    inner = len(b)
    if any(len(row) != inner for row in a):
        raise ValueError("matrix dimension mismatch")
    cols = len(b[0]) if b else 0
    return [[sum((row[k] * b[k][j] for k in range(inner)), Fraction(0)) for j in range(cols)] for row in a]


def rref(rows, ncols=None):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    m = [[Fraction(x) for x in r] for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows):
    return len(rref(rows)[1]) if rows else 0


def transpose(a, ncols=None):
    if not a:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*a)]


def inverse(a):
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    red, piv = rref(aug, n)
    if piv != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in red]


def column_space(a, ncols):
    """Canonical basis (rref of the transpose) of the column space of an n x ncols matrix."""
    return [tuple(r) for r in rref(transpose(a, ncols), len(a))[0]]


def solve(a, b):
    """One solution x of a x = b (a is m x n, b is a vector), or None."""
    n = len(a[0]) if a else 0
    aug = [list(map(Fraction, row)) + [Fraction(v)] for row, v in zip(a, b)]
    red, piv = rref(aug, n + 1)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for row, c in zip(red, piv):
        x[c] = row[n]
    return x


class SparseEliminator:
    """Incremental echelon reduction of sparse vectors {index: Fraction}.

    Each stored row has its pivot at its smallest index.  ``add`` reduces a
    vector and keeps it when independent.  With ``track`` each stored row
    remembers the combination of inserted vectors it came from, so dependent
    insertions return kernel relations.
    """

    def __init__(self, track=False):
        self.rows = {}
        self.track = track
        self.combos = {}
        self.count = 0

    def reduce(self, vec, combo=None):
        vec = dict(vec)
        heap = list(vec)
        heapq.heapify(heap)
        seen = set()
        while heap:
            idx = heapq.heappop(heap)
            if idx in seen:
                continue
            seen.add(idx)
            c = vec.get(idx)
            if not c or idx not in self.rows:
                continue
            for k, v in self.rows[idx].items():
                nv = vec.get(k, 0) - c * v
                if nv:
                    if k not in vec:
                        heapq.heappush(heap, k)
                    vec[k] = nv
                else:
                    vec.pop(k, None)
            if combo is not None:
                _axpy(combo, self.combos[idx], -c)
        return vec, combo

    def add(self, vec):
        """Insert ``vec``; return None if independent, else the dependency combo."""
        ident = self.count
        self.count += 1
        combo = {ident: Fraction(1)} if self.track else None
        vec, combo = self.reduce(vec, combo)
        if not vec:
            return combo if self.track else {}
        piv = min(vec)
        inv = 1 / vec[piv]
        self.rows[piv] = {k: v * inv for k, v in vec.items()}
        if self.track:
            self.combos[piv] = {k: v * inv for k, v in combo.items()}
        return None

    @property
    def rank(self):
        return len(self.rows)

    def contains(self, vec):
        return not self.reduce(vec)[0]


def _axpy(target, src, a):
    for k, v in src.items():
        nv = target.get(k, 0) + a * v
        if nv:
            target[k] = nv
        else:
            target.pop(k, None)


MODULUS = (1 << 61) - 1


class ModularEliminator:
    """Echelon reduction of integer sparse vectors modulo a prime.

    The rank it reports never exceeds the rank of the same vectors over Q.
    """

    def __init__(self, modulus=MODULUS):
        self.p = modulus
        self.rows = {}

    def add(self, vec):
        p = self.p
        vec = {k: v % p for k, v in vec.items() if v % p}
        heap = list(vec)
        heapq.heapify(heap)
        while heap:
            idx = heapq.heappop(heap)
            c = vec.get(idx)
            if not c or idx not in self.rows:
                continue
            for k, v in self.rows[idx].items():
                nv = (vec.get(k, 0) - c * v) % p
                if nv:
                    if k not in vec:
                        heapq.heappush(heap, k)
                    vec[k] = nv
                else:
                    vec.pop(k, None)
        if not vec:
            return False
        piv = min(vec)
        inv = pow(vec[piv], -1, p)
        self.rows[piv] = {k: v * inv % p for k, v in vec.items()}
        return True

    @property
    def rank(self):
        return len(self.rows)
