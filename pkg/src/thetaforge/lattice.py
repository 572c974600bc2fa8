"""Exact integer-matrix tools: determinants, Smith form, cosets of Z^n / B Z^n, search."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import combinations, product
from typing import List, Optional, Sequence, Tuple

Matrix = List[List[int]]
Vector = Tuple[int, ...]

__all__ = [
    "as_matrix",
    "det",
    "adjugate",
    "matrix_basics",
    "matmul",
    "transpose",
    "identity",
    "determinantal_divisors",
    "SmithData",
    "smith",
    "hnf",
    "OrthoReport",
    "check_orthogonal",
    "CosetSystem",
    "cosets",
    "theorem_reps",
    "is_equivalent",
    "class_key",
    "congruence_reps",
    "search_orthogonal",
    "solve_exponent_system",
]


def as_matrix(rows: Sequence[Sequence[int]]) -> Matrix:
    m = [[int(v) for v in row] for row in rows]
    n = len(m)
    if n == 0 or any(len(row) != n for row in m):
        raise ValueError("matrix must be square and non-empty")
    return m


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(m: Sequence[Sequence[int]]) -> Matrix:
    return [list(col) for col in zip(*m)]


def matmul(x: Sequence[Sequence[int]], y: Sequence[Sequence[int]]) -> Matrix:
    yt = transpose(y)
    return [[sum(a * b for a, b in zip(row, col)) for col in yt] for row in x]


def matvec(m: Sequence[Sequence[int]], v: Sequence[int]) -> Vector:
    return tuple(sum(a * b for a, b in zip(row, v)) for row in m)


def det(m: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free elimination."""
    a = [list(row) for row in m]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _minor(m, i, j):
    return [row[:j] + row[j + 1:] for r, row in enumerate(m) if r != i]


def adjugate(m: Sequence[Sequence[int]]) -> Matrix:
    n = len(m)
    if n == 1:
        return [[1]]
    rows = [list(r) for r in m]
    return [[(-1) ** (i + j) * det(_minor(rows, j, i)) for j in range(n)] for i in range(n)]


def matrix_basics(m: Sequence[Sequence[int]]) -> Tuple[int, Matrix]:
    m = as_matrix(m)
    return det(m), adjugate(m)


def determinantal_divisors(m: Sequence[Sequence[int]]) -> List[int]:
    """``[d_0, ..., d_n]`` with ``d_k`` the gcd of all k x k minors (``d_0 = 1``)."""
    m = as_matrix(m)
    n = len(m)
    out = [1]
    for k in range(1, n + 1):
        g = 0
        for rows in combinations(range(n), k):
            for cols in combinations(range(n), k):
                g = math.gcd(g, det([[m[r][c] for c in cols] for r in rows]))
                if g == 1:
                    break
            if g == 1:
                break
        out.append(g)
    return out


# --------------------------------------------------------------------------
# Smith normal form
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SmithData:
    U: Matrix
    D: Matrix
    V: Matrix
    dk: List[int]
    sk: List[int]

    @property
    def diagonal(self) -> List[int]:
        return [self.D[i][i] for i in range(len(self.D))]


def smith(m: Sequence[Sequence[int]]) -> SmithData:
    """Unimodular U, V with ``U B V = D`` diagonal and ``D[i] | D[i+1]``."""
    b = as_matrix(m)
    n = len(b)
    if det(b) == 0:
        raise ValueError("Smith form requested for a singular matrix")
    A = [row[:] for row in b]
    U = identity(n)
    V = identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (A, V):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, c):  # row_dst += c * row_src
        for M in (A, U):
            M[dst] = [x + c * y for x, y in zip(M[dst], M[src])]

    def add_col(dst, src, c):
        for M in (A, V):
            for row in M:
                row[dst] += c * row[src]

    for t in range(n):
        while True:
            # move the smallest nonzero entry of the trailing block to (t, t)
            piv = min(((abs(A[i][j]), i, j) for i in range(t, n) for j in range(t, n) if A[i][j]),
                      default=None)
            _, pi, pj = piv
            swap_rows(t, pi)
            swap_cols(t, pj)
            p = A[t][t]
            dirty = False
            for i in range(t + 1, n):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    dirty = dirty or A[i][t] != 0
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    dirty = dirty or A[t][j] != 0
            if dirty:
                continue
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, n) if A[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if A[t][t] < 0:
            for M in (A, U):
                M[t] = [-x for x in M[t]]
    dk = determinantal_divisors(b)
    sk = [dk[k] // dk[k - 1] for k in range(1, n + 1)]
    diag = [A[i][i] for i in range(n)]
    if diag != sk:
        raise AssertionError(f"Smith diagonal {diag} disagrees with minor gcds {sk}")
    return SmithData(U, A, V, dk, sk)


def _inverse_unimodular(m: Matrix) -> Matrix:
    d = det(m)
    if abs(d) != 1:
        raise ValueError("matrix is not unimodular")
    return [[d * x for x in row] for row in adjugate(m)]


def hnf(m: Sequence[Sequence[int]]) -> Matrix:
    """Lower-triangular H = B W (W unimodular) with positive diagonal; same column lattice."""
    H = [list(r) for r in as_matrix(m)]
    n = len(H)
    for i in range(n):
        # gcd-combine columns i..n-1 so that row i is zero to the right of the diagonal
        for j in range(i + 1, n):
            while H[i][j]:
                c = H[i][i] // H[i][j]
                for row in H:
                    row[i] -= c * row[j]
                for row in H:
                    row[i], row[j] = row[j], row[i]
        if H[i][i] == 0:
            raise ValueError("singular matrix has no full-rank Hermite form")
        if H[i][i] < 0:
            for row in H:
                row[i] = -row[i]
    return H


def _reduce(H: Matrix, v: Sequence[int]) -> Vector:
    v = list(v)
    for i in range(len(H)):
        c = v[i] // H[i][i]
        if c:
            for r in range(i, len(H)):
                v[r] -= c * H[r][i]
    return tuple(v)


# --------------------------------------------------------------------------
# orthogonality
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OrthoReport:
    ok: bool
    diagonal: Tuple
    pair: Optional[Tuple[int, int]] = None
    value: object = 0

    def __bool__(self):
        return self.ok

    def message(self) -> str:
        if self.ok:
            return "orthogonal, diagonal " + ", ".join(str(x) for x in self.diagonal)
        i, j = self.pair
        return f"columns {i + 1} and {j + 1} are not orthogonal (entry {self.value})"


def check_orthogonal(m: Sequence[Sequence[int]], l: Sequence) -> OrthoReport:
    """Test whether ``B^T diag(l) B`` is diagonal; pairs are 0-based."""
    B = as_matrix(m)
    n = len(B)
    if len(l) != n:
        raise ValueError("weight vector length differs from matrix size")
    l = [Fraction(x) for x in l]
    if any(x <= 0 for x in l):
        raise ValueError("weights must be positive")

    def entry(i, j):
        v = sum(l[r] * B[r][i] * B[r][j] for r in range(n))
        return int(v) if v.denominator == 1 else v

    diag = tuple(entry(j, j) for j in range(n))
    for i in range(n):
        for j in range(i + 1, n):
            v = entry(i, j)
            if v:
                return OrthoReport(False, diag, (i, j), v)
    return OrthoReport(True, diag)


# --------------------------------------------------------------------------
# cosets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CosetSystem:
    B: Tuple[Tuple[int, ...], ...]
    reps: Tuple[Vector, ...]
    kind: str = "general"

    @property
    def k(self) -> int:
        return len(self.reps)


def class_key(adj: Matrix, k: int, v: Sequence[int]) -> Vector:
    """Invariant of the class of v: ``adj(B) v mod |det B|``."""
    return tuple(x % k for x in matvec(adj, v))


def is_equivalent(m: Sequence[Sequence[int]], u: Sequence[int], v: Sequence[int]) -> bool:
    """True iff ``u - v`` lies in ``B Z^n`` (exact rational solve of ``B y = u - v``)."""
    B = as_matrix(m)
    d, adj = matrix_basics(B)
    if d == 0:
        raise ValueError("singular matrix")
    diff = [a - b for a, b in zip(u, v)]
    return all(Fraction(x, d).denominator == 1 for x in matvec(adj, diff))


def cosets(m: Sequence[Sequence[int]]) -> CosetSystem:
    """Canonical representatives: the lexicographically least nonnegative vector per class."""
    B = as_matrix(m)
    n = len(B)
    sd = smith(B)
    Uinv = _inverse_unimodular(sd.U)
    H = hnf(B)
    reps = set()
    for v in product(*(range(s) for s in sd.sk)):
        reps.add(_reduce(H, matvec(Uinv, v)))
    k = abs(det(B))
    if len(reps) != k:
        raise AssertionError("coset count disagrees with |det B|")
    return CosetSystem(tuple(map(tuple, B)), tuple(sorted(reps)), "general")


def theorem_reps(m: Sequence[Sequence[int]], j: int = 0, centered: bool = False) -> Optional[CosetSystem]:
    """Representatives ``r e_j`` when column j of adj(B) has an entry coprime to k.

    ``centered`` uses r in ``[floor(-k/2)+1, floor(k/2)]`` instead of ``[0, k)``.
    Returns None when the coprimality condition fails.
    """
    B = as_matrix(m)
    n = len(B)
    d, adj = matrix_basics(B)
    k = abs(d)
    if k == 0:
        raise ValueError("singular matrix")
    if not any(math.gcd(adj[i][j], k) == 1 for i in range(n)):
        return None
    rs = range((-k) // 2 + 1, k // 2 + 1) if centered else range(k)
    reps = tuple(tuple(r if i == j else 0 for i in range(n)) for r in rs)
    return CosetSystem(tuple(map(tuple, B)), reps, "theorem")


def congruence_reps(m: Sequence[Sequence[int]]) -> List[Vector]:
    """Brute-force route: solve ``B c = 0 (mod d)`` with ``d = s_n(B)``; reps are ``B c / d``.

    Enumerates all of ``[0, d)^n``, so it is only meant as a cross-check.
    """
    B = as_matrix(m)
    n = len(B)
    d = smith(B).sk[-1]
    out = []
    for c in product(range(d), repeat=n):
        x = matvec(B, c)
        if all(v % d == 0 for v in x):
            out.append(tuple(v // d for v in x))
    return out


# --------------------------------------------------------------------------
# search
# --------------------------------------------------------------------------


def _canonical_sign(v: Sequence[int]) -> bool:
    for x in v:
        if x:
            return x > 0
    return False


def _dot(l, u, v):
    return sum(w * a * b for w, a, b in zip(l, u, v))


def _orthogonal_cliques(cols: List[Vector], l, n: int):
    """All increasing index tuples of n mutually orthogonal columns."""
    adj = {i: {j for j in range(i + 1, len(cols)) if _dot(l, cols[i], cols[j]) == 0}
           for i in range(len(cols))}

    def extend(chosen, cands):
        if len(chosen) == n:
            yield tuple(chosen)
            return
        for c in sorted(cands):
            yield from extend(chosen + [c], cands & adj[c])

    for i in range(len(cols)):
        yield from extend([i], adj[i])


def search_orthogonal(n: int, l: Sequence, entry_bound: int, max_det: int) -> List[Matrix]:
    """Orthogonal matrices with entries in ``[-bound, bound]`` and ``0 < det <= max_det``.

    One representative per orbit of column sign flips and permutations: columns
    are taken in enumeration order with first nonzero entry positive, and the
    last column is negated if needed to make the determinant positive.
    """
    if entry_bound < 1:
        raise ValueError("entry_bound must be at least 1")
    l = [Fraction(x) for x in l]
    if len(l) != n:
        raise ValueError("weight vector length differs from n")
    cols = [v for v in product(range(-entry_bound, entry_bound + 1), repeat=n) if _canonical_sign(v)]
    found = []
    for idx in _orthogonal_cliques(cols, l, n):
        M = transpose([cols[i] for i in idx])
        d = det(M)
        if d == 0:
            continue
        if d < 0:
            for row in M:
                row[-1] = -row[-1]
            d = -d
        if d <= max_det:
            found.append(M)
    found.sort(key=lambda M: (det(M), M))
    return found


def solve_exponent_system(targets: Sequence[int], bound: int, l_bound: Optional[int] = None):
    """All (l, B) with ``check_orthogonal(B, l).diagonal == targets`` inside the bounds.

    Weights range over ``1..l_bound`` (default ``max(targets)``) and entries over
    ``[-bound, bound]``; B must be nonsingular.
    """
    n = len(targets)
    l_bound = l_bound or max(targets)
    out = []
    for l in product(range(1, l_bound + 1), repeat=n):
        vecs = list(product(range(-bound, bound + 1), repeat=n))
        per_col = [[v for v in vecs if _dot(l, v, v) == t] for t in targets]
        if any(not c for c in per_col):
            continue

        def build(j, chosen):
            if j == n:
                M = transpose(chosen)
                if det(M) != 0:
                    out.append((tuple(l), M))
                return
            for v in per_col[j]:
                if all(_dot(l, v, u) == 0 for u in chosen):
                    build(j + 1, chosen + [v])

        build(0, [])
    return out
