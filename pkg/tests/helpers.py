"""Shared fixtures: named matrices and small independent oracles."""

import math
from fractions import Fraction
from itertools import product

from thetaforge.theta import ComboTerm, ThetaCombo, ThetaFactor

SIMPLEST = [[1, 1], [-1, 1]]
THREE = [[1, 1, 1], [2, -1, 0], [1, 1, -1]]
THREE_ADJ = [[1, 2, 1], [2, -2, 2], [3, 0, -3]]
HADAMARD = [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, -1, 1], [1, -1, 1, -1]]
DET22 = [[1, 1, 3], [1, -1, -3], [0, 3, -2]]
FIVE = [
    [1, 0, -1, -1, 1],
    [1, 0, 0, 2, 0],
    [0, 1, 1, 0, 1],
    [0, -1, 1, 0, 1],
    [-1, 0, -1, 1, 1],
]
NAMED = [(SIMPLEST, 2), (THREE, 6), (HADAMARD, 16), (DET22, 22), (FIVE, 24)]


def rational_solve(B, v):
    """Solve B y = v over Q by Gauss-Jordan elimination; None if singular."""
    n = len(B)
    M = [[Fraction(x) for x in row] + [Fraction(v[i])] for i, row in enumerate(B)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            return None
        M[c], M[p] = M[p], M[c]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c] / M[c][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [M[i][n] / M[i][i] for i in range(n)]


def same_class(B, u, v):
    y = rational_solve(B, [a - b for a, b in zip(u, v)])
    return all(x.denominator == 1 for x in y)


def brute_det(B):
    """Leibniz expansion."""
    n = len(B)
    total = 0
    for perm in product(range(n), repeat=n):
        if len(set(perm)) != n:
            continue
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = -1 if inv % 2 else 1
        for i in range(n):
            term *= B[i][perm[i]]
        total += term
    return total


def box_classes(B):
    """Group the points of [0, k)^n into classes mod B Z^n by rational solving."""
    k = abs(brute_det(B))
    n = len(B)
    reps = []
    for v in product(range(k), repeat=n):
        if not any(same_class(B, v, r) for r in reps):
            reps.append(v)
    return reps


def two_factor_formula(a, b, c, d, B):
    """Term list of the two-factor r e_1 formula, written out directly."""
    (b11, b12), (b21, b22) = B
    k = b11 * b22 - b12 * b21

    def up(x):
        return (x * x + x) // 2

    def dn(x):
        return (x * x - x) // 2

    terms = []
    for r in range(k):
        coeff = a ** up(r) * b ** dn(r)
        f1 = ThetaFactor(
            a ** (up(b11) + b11 * r) * b ** (dn(b11) + b11 * r) * c ** up(b21) * d ** dn(b21),
            a ** (dn(b11) - b11 * r) * b ** (up(b11) - b11 * r) * c ** dn(b21) * d ** up(b21),
        )
        f2 = ThetaFactor(
            a ** (up(b12) + b12 * r) * b ** (dn(b12) + b12 * r) * c ** up(b22) * d ** dn(b22),
            a ** (dn(b12) - b12 * r) * b ** (up(b12) - b12 * r) * c ** dn(b22) * d ** up(b22),
        )
        terms.append(ComboTerm(coeff, (f1, f2)))
    return ThetaCombo(tuple(terms)).sorted()


def two_by_two_cases():
    out = []
    for l1 in (1, 2, 3):
        for l2 in (1, 2, 3):
            for b11 in range(-3, 4):
                for b12 in range(-3, 4):
                    for b21 in range(-3, 4):
                        for b22 in range(-3, 4):
                            B = [[b11, b12], [b21, b22]]
                            k = b11 * b22 - b12 * b21
                            if k <= 0 or k > 12 or l1 * b11 * b12 + l2 * b21 * b22 != 0:
                                continue
                            if math.gcd(b21, b11 * b22) == 1 or math.gcd(b22, b12 * b21) == 1:
                                out.append(((l1, l2), B))
    return out
