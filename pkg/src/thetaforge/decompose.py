"""Covering-system decomposition of theta products into linear combinations."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import lattice
from .lattice import CosetSystem, as_matrix, check_orthogonal, class_key, det, matrix_basics
from .series import Monomial, rat
from .theta import ComboTerm, IndexPoly, LatticeSum, LatticeSummand, ThetaCombo, ThetaFactor

__all__ = [
    "Decomposition",
    "DecompositionError",
    "plan_reps",
    "decompose",
    "decompose_full",
    "decompose_sum_diff",
    "SCHROTER_PRESETS",
    "schroter_matrix",
    "schroter_factors",
    "quadform_sum",
    "quadform_decompose",
]


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True)
class Decomposition:
    combo: ThetaCombo
    cosets: CosetSystem
    fallback: bool  # True when theorem representatives were refused

    @property
    def note(self) -> str:
        if self.cosets.kind == "theorem":
            return "theorem representatives r*e_j"
        if self.fallback:
            return "no adjugate entry coprime to det; used general coset representatives"
        return "general coset representatives"


def plan_reps(B, reps: Union[None, str, CosetSystem] = None, j: Optional[int] = None,
              centered: bool = False) -> Tuple[CosetSystem, bool]:
    """Pick coset representatives.

    ``reps`` may be a CosetSystem, "theorem", "general", or None (theorem
    representatives when some column qualifies, else general ones).
    Returns the system and whether a requested theorem form fell back.
    """
    B = as_matrix(B)
    n = len(B)
    if isinstance(reps, CosetSystem):
        return reps, False
    if reps not in (None, "auto", "theorem", "general"):
        raise DecompositionError(f"unknown representative mode {reps!r}")
    if reps == "general":
        return lattice.cosets(B), False
    cols = [j] if j is not None else list(range(n))
    for c in cols:
        cs = lattice.theorem_reps(B, c, centered=centered)
        if cs is not None:
            return cs, False
    return lattice.cosets(B), True


def _validate_reps(B, cs: CosetSystem) -> None:
    d, adj = matrix_basics(B)
    k = abs(d)
    if len(cs.reps) != k:
        raise DecompositionError(f"{len(cs.reps)} representatives given but |det B| = {k}")
    keys = {class_key(adj, k, t) for t in cs.reps}
    if len(keys) != k:
        raise DecompositionError("coset representatives are not pairwise inequivalent")
    if any(len(t) != len(B) for t in cs.reps):
        raise DecompositionError("representative length differs from matrix size")


def _weights(factors: Sequence[ThetaFactor]) -> List:
    out = []
    for i, f in enumerate(factors):
        if not f.is_decomposable():
            raise DecompositionError(
                f"factor {i + 1} ({f}) is not decomposable: a*b must be a pure positive power of q")
        out.append(f.weight)
    return out


def _term(factors, B, t) -> Tuple[Monomial, Tuple[ThetaFactor, ...]]:
    n = len(B)
    coeff = Monomial()
    for i in range(n):
        a, b = factors[i].a, factors[i].b
        coeff = coeff * a ** ((t[i] * t[i] + t[i]) // 2) * b ** ((t[i] * t[i] - t[i]) // 2)
    out = []
    for j in range(n):
        A = Monomial()
        Bm = Monomial()
        for i in range(n):
            a, b = factors[i].a, factors[i].b
            x = B[i][j]
            up, dn = (x * x + x) // 2, (x * x - x) // 2
            A = A * a ** (up + x * t[i]) * b ** (dn + x * t[i])
            Bm = Bm * a ** (dn - x * t[i]) * b ** (up - x * t[i])
        out.append(ThetaFactor(A, Bm))
    return coeff, tuple(out)


def _canonical_order(terms: List[ComboTerm]) -> ThetaCombo:
    return ThetaCombo(tuple(sorted(terms, key=ComboTerm.sort_key)))


def decompose_full(factors: Sequence[ThetaFactor], B, reps=None, j: Optional[int] = None,
                   centered: bool = False) -> Decomposition:
    """Rewrite ``prod f(a_i, b_i)`` along the cosets of ``B Z^n``.

    Each representative t contributes
    ``prod a_i^((t_i^2+t_i)/2) b_i^((t_i^2-t_i)/2) * prod_j f(A_j, B_j)``.
    """
    B = as_matrix(B)
    n = len(B)
    factors = list(factors)
    if len(factors) != n:
        raise DecompositionError(f"{len(factors)} factors but a {n}x{n} matrix")
    l = _weights(factors)
    rep = check_orthogonal(B, l)
    if not rep.ok:
        raise DecompositionError("matrix is not orthogonal for the factor weights: " + rep.message())
    if det(B) == 0:
        raise DecompositionError("matrix is singular")
    cs, fellback = plan_reps(B, reps, j, centered)
    _validate_reps(B, cs)
    terms = [ComboTerm(*_term(factors, B, t)) for t in cs.reps]
    return Decomposition(_canonical_order(terms), cs, fellback)


def decompose(factors: Sequence[ThetaFactor], B, reps=None, j: Optional[int] = None,
              centered: bool = False) -> ThetaCombo:
    return decompose_full(factors, B, reps, j, centered).combo


def decompose_sum_diff(factors: Sequence[ThetaFactor], B, mode: str, reps=None,
                       j: Optional[int] = None) -> ThetaCombo:
    """``prod f(a_i,b_i) + prod f(-a_i,-b_i)`` (sum) or the difference (diff).

    Needs every column sum of B even; then negating all arguments multiplies the
    term of representative t by ``(-1)^(sum t)``, so half the terms cancel and
    the rest double.
    """
    if mode not in ("sum", "diff"):
        raise DecompositionError("mode must be 'sum' or 'diff'")
    B = as_matrix(B)
    n = len(B)
    for c in range(n):
        if sum(B[r][c] for r in range(n)) % 2:
            raise DecompositionError(f"column {c + 1} of B has an odd entry sum")
    d = decompose_full(factors, B, reps, j)
    want = 0 if mode == "sum" else 1
    terms = []
    for t in d.cosets.reps:
        if sum(t) % 2 == want:
            coeff, facs = _term(list(factors), B, t)
            terms.append(ComboTerm(coeff, facs, 2))
    return _canonical_order(terms)


# --------------------------------------------------------------------------
# Schroter-type presets
# --------------------------------------------------------------------------


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DecompositionError(msg)


def _positive(**kw) -> None:
    for k, v in kw.items():
        _require(isinstance(v, int) and v > 0, f"{k} must be a positive integer")


def _general(a, b, k1, k2):
    _positive(a=a, b=b, k1=k1, k2=k2)
    return [[1, -k1 * k2 * b], [k1, k2 * a]], (a, b)


def _classic(a, b):
    return _general(a, b, 1, 1)


def _mult_k(a, b, k):
    return _general(a, b, 1, k)


def _mult_k2(a, b, k):
    return _general(a, b, k, 1)


def _divided_k1_k2(a, b, k1, k2):
    _positive(a=a, b=b, k1=k1, k2=k2)
    _require((k1 * b) % k2 == 0 and a % k2 == 0, "needs k2 | k1*b and k2 | a")
    return [[1, -k1 * b // k2], [k1, a // k2]], (a, b)


def _divided_k(a, b, k):
    _positive(k=k)
    _require(a % k == 0, "needs k | a")
    return _divided_k1_k2(a, b, k, k)


def _divided_sum(a, b, k):
    _positive(a=a, b=b, k=k)
    _require(a % k == 0 and b % k == 0, "needs k | a and k | b")
    return _divided_k1_k2(a, b, 1, k)


def _scaled_k1_k2(a, b, k1, k2):
    _positive(a=a, b=b, k1=k1, k2=k2)
    return [[1, -k1 * k2 * b], [k1 * a, k2]], (a, b)


def _three_parameter(alpha, beta, gamma):
    from math import gcd

    _positive(alpha=alpha, beta=beta, gamma=gamma)
    _require(gcd(alpha, gamma) == 1, "needs gcd(alpha, gamma) = 1")
    return [[beta * gamma, -1], [1, alpha * beta]], (alpha, gamma)


def _signed_m(alpha, beta, m):
    _positive(alpha=alpha, beta=beta, m=m)
    _require(m > alpha * beta, "needs m > alpha*beta")
    return [[1, -beta], [alpha, m - alpha * beta]], (alpha * (m - alpha * beta), beta)


def _z_sum_a(k):
    return _classic(1, k)


def _z_sum_b(k):
    return _general(1, k, 2, 1)


SCHROTER_PRESETS = {
    "classic": _classic,
    "general": _general,
    "mult_k": _mult_k,
    "mult_k2": _mult_k2,
    "divided_k1_k2": _divided_k1_k2,
    "divided_k": _divided_k,
    "divided_sum": _divided_sum,
    "scaled_k1_k2": _scaled_k1_k2,
    "three_parameter": _three_parameter,
    "signed_m": _signed_m,
    "z_sum_a": _z_sum_a,
    "z_sum_b": _z_sum_b,
}


def schroter_matrix(preset: str, **params) -> Tuple[List[List[int]], Tuple[int, int]]:
    """Matrix B and weights l for a two-factor Schroter-type preset."""
    try:
        fn = SCHROTER_PRESETS[preset]
    except KeyError:
        raise DecompositionError(f"unknown preset {preset!r}; known: {', '.join(SCHROTER_PRESETS)}")
    try:
        return fn(**params)
    except TypeError as e:
        raise DecompositionError(f"bad parameters for {preset}: {e}") from None


def schroter_factors(l: Sequence, x: Monomial, y: Monomial) -> Tuple[ThetaFactor, ThetaFactor]:
    """``T(x, q^l1) T(y, q^l2)`` with ``T(x, Q) = f(xQ, Q/x)``."""
    Q1, Q2 = Monomial.q(l[0]), Monomial.q(l[1])
    return ThetaFactor(x * Q1, Q1 / x), ThetaFactor(y * Q2, Q2 / y)


# --------------------------------------------------------------------------
# quadratic forms
# --------------------------------------------------------------------------


def _fr_matrix(Q) -> List[List[Fraction]]:
    Q = [[Fraction(v) for v in row] for row in Q]
    n = len(Q)
    if any(len(r) != n for r in Q) or any(Q[i][j] != Q[j][i] for i in range(n) for j in range(n)):
        raise DecompositionError("Q must be a symmetric square matrix")
    return Q


def quadform_sum(Q, linear: Optional[Sequence] = None, parity: Optional[Sequence[int]] = None) -> LatticeSum:
    """``sum_x (-1)^(parity.x) q^(x^T Q x + linear.x)`` as a LatticeSum."""
    Q = _fr_matrix(Q)
    n = len(Q)
    linear = [Fraction(v) for v in (linear or [0] * n)]
    poly = IndexPoly(n)
    for i in range(n):
        for j in range(n):
            poly = poly + IndexPoly.var(n, i) * IndexPoly.var(n, j) * Q[i][j]
        poly = poly + IndexPoly.var(n, i) * linear[i]
    s = LatticeSummand(tuple(parity or [0] * n), IndexPoly.constant(n, 1), poly)
    return LatticeSum(n, (s,))


def quadform_decompose(Q, B, linear: Optional[Sequence] = None, parity: Optional[Sequence[int]] = None,
                       reps=None) -> ThetaCombo:
    """Split ``quadform_sum(Q, linear, parity)`` along ``x = B y + t``.

    Needs ``B^T Q B`` diagonal. Each coset contributes
    ``(-1)^(parity.t) q^(Q(t) + linear.t) prod_j f(s_j q^(M_j + c_j), s_j q^(M_j - c_j))``
    with ``M = B^T Q B``, ``c = 2 B^T Q t + B^T linear`` and ``s_j = (-1)^((parity B)_j)``.
    """
    Q = _fr_matrix(Q)
    B = as_matrix(B)
    n = len(B)
    if len(Q) != n:
        raise DecompositionError("Q and B differ in size")
    if det(B) == 0:
        raise DecompositionError("matrix is singular")
    linear = [Fraction(v) for v in (linear or [0] * n)]
    parity = [int(p) % 2 for p in (parity or [0] * n)]
    QB = [[sum(Q[i][r] * B[r][j] for r in range(n)) for j in range(n)] for i in range(n)]
    M = [[sum(B[r][i] * QB[r][j] for r in range(n)) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j and M[i][j] != 0:
                raise DecompositionError(f"B^T Q B is not diagonal: entry ({i + 1},{j + 1}) = {M[i][j]}")
    lin_B = [sum(linear[r] * B[r][j] for r in range(n)) for j in range(n)]
    par_B = [sum(parity[r] * B[r][j] for r in range(n)) % 2 for j in range(n)]
    cs, _ = plan_reps(B, reps)
    _validate_reps(B, cs)
    terms = []
    for t in cs.reps:
        Qt = [sum(Q[i][r] * t[r] for r in range(n)) for i in range(n)]
        const = sum(t[i] * Qt[i] for i in range(n)) + sum(linear[i] * t[i] for i in range(n))
        sign = -1 if sum(p * x for p, x in zip(parity, t)) % 2 else 1
        facs = []
        for j in range(n):
            c = 2 * sum(B[r][j] * Qt[r] for r in range(n)) + lin_B[j]
            s = -1 if par_B[j] else 1
            facs.append(ThetaFactor(Monomial(s, rat(M[j][j] + c)), Monomial(s, rat(M[j][j] - c))))
        terms.append(ComboTerm(Monomial(sign, rat(const)), tuple(facs)))
    return _canonical_order(terms)
