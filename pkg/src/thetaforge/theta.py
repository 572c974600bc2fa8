"""Theta functions, q-Pochhammer products, lattice sums and their expansion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product as cartesian
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .series import INF, Monomial, Rat, Series, arith, is_integral, rat

__all__ = [
    "ThetaFactor",
    "Pochhammer",
    "IndexPoly",
    "LatticeSummand",
    "LatticeSum",
    "ComboTerm",
    "ThetaCombo",
    "expand_theta",
    "expand_product_form",
    "expand_poch",
    "expand_lattice_sum",
    "expand_factor",
    "expand_combo",
    "expand_side",
    "dissect",
    "OpTerm",
    "Side",
    "phi",
    "psi",
    "chi",
    "fq",
    "jt",
]


# --------------------------------------------------------------------------
# exact quadratic bounds
# --------------------------------------------------------------------------


def _ceil_sqrt_bound(x: Fraction) -> int:
    """An integer >= sqrt(x) for rational x >= 0 (not necessarily tight)."""
    x = Fraction(x)
    if x <= 0:
        return 0
    n, d = x.numerator, x.denominator
    return math.isqrt(n * d) // d + 1


def quadratic_int_range(A, B, C) -> Optional[Tuple[int, int]]:
    """Integers n with ``A n^2 + B n + C <= 0`` (A > 0), as an inclusive range.

    Bounds come from the exact integer square root of the discriminant and
    are then corrected by evaluating the polynomial, so they are exact.
    """
    A, B, C = Fraction(A), Fraction(B), Fraction(C)
    if A <= 0:
        raise ValueError("leading coefficient must be positive")
    den = math.lcm(A.denominator, B.denominator, C.denominator)
    a, b, c = int(A * den), int(B * den), int(C * den)
    disc = b * b - 4 * a * c
    if disc < 0:
        return None
    s = math.isqrt(disc)

    def p(n):
        return a * n * n + b * n + c

    hi = (-b + s) // (2 * a)
    lo = -((b + s) // (2 * a))
    while p(hi + 1) <= 0:
        hi += 1
    while hi >= lo and p(hi) > 0:
        hi -= 1
    while p(lo - 1) <= 0:
        lo -= 1
    while lo <= hi and p(lo) > 0:
        lo += 1
    if lo > hi:
        return None
    return lo, hi


# --------------------------------------------------------------------------
# theta factors
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaFactor:
    """Ramanujan's ``f(a, b) = sum_n a^(n(n+1)/2) b^(n(n-1)/2)``."""

    a: Monomial
    b: Monomial

    def __post_init__(self):
        if self.a.qexp + self.b.qexp <= 0:
            raise ValueError(f"f({self.a}, {self.b}): q-weight of ab must be positive")

    @property
    def weight(self) -> Rat:
        """``l = qexp(a) + qexp(b)``."""
        return rat(self.a.qexp + self.b.qexp)

    def is_decomposable(self) -> bool:
        """True when ``ab = q^l`` exactly (no sign, no symbols)."""
        return (self.a * self.b).is_pure_q()

    def swapped(self) -> "ThetaFactor":
        return ThetaFactor(self.b, self.a)

    def canonical(self) -> "ThetaFactor":
        """Representative under ``f(a,b) = f(b,a)``."""
        ka = (self.a.qexp, self.a.vexp, self.a.sign)
        kb = (self.b.qexp, self.b.vexp, self.b.sign)
        return self if ka <= kb else self.swapped()

    def min_qexp(self) -> Rat:
        l = self.weight
        d = self.a.qexp - self.b.qexp
        center = Fraction(-d, 2 * l)
        best = None
        for n in (math.floor(center), math.ceil(center)):
            e = rat(Fraction(l * n * n + d * n, 2))
            best = e if best is None else min(best, e)
        return best

    def __str__(self) -> str:
        return f"f({self.a}, {self.b})"


def phi(m: Monomial) -> ThetaFactor:
    return ThetaFactor(m, m)


def psi(m: Monomial) -> ThetaFactor:
    return ThetaFactor(m, m ** 3)


def fq(m: Monomial) -> ThetaFactor:
    """``f(-m) = f(-m, -m^2) = (m; m)_inf``."""
    return ThetaFactor(-m, -(m ** 2))


@dataclass(frozen=True)
class Pochhammer:
    """``(x; base)_inf = prod_{k>=0} (1 - x base^k)``."""

    x: Monomial
    base: Monomial

    def __post_init__(self):
        if self.base.qexp <= 0:
            raise ValueError(f"({self.x}; {self.base}): base must carry a positive power of q")

    def min_qexp(self) -> Rat:
        total = 0
        k = 0
        while True:
            e = self.x.qexp + k * self.base.qexp
            if e >= 0:
                return rat(total)
            total += e
            k += 1

    def __str__(self) -> str:
        return f"({self.x}; {self.base})"


def chi(m: Monomial) -> Pochhammer:
    """``chi(m) = (-m; m^2)_inf``; not a theta function, so kept as a product."""
    return Pochhammer(-m, m ** 2)


def jt(x: Monomial, base: Monomial) -> Tuple[Pochhammer, Pochhammer, Pochhammer]:
    """``<x; Q>_inf = (Q; Q)(x; Q)(Q/x; Q)`` as three Pochhammer factors."""
    return (Pochhammer(base, base), Pochhammer(x, base), Pochhammer(base / x, base))


# --------------------------------------------------------------------------
# polynomials in summation indices
# --------------------------------------------------------------------------


class IndexPoly:
    """Polynomial with rational coefficients in ``dim`` integer indices.

    Stored as ``{exponent tuple: coefficient}``.
    """

    __slots__ = ("dim", "coeffs")

    def __init__(self, dim: int, coeffs: Optional[Dict[Tuple[int, ...], Rat]] = None):
        self.dim = dim
        clean = {}
        for mono, c in (coeffs or {}).items():
            if len(mono) != dim:
                raise ValueError("exponent tuple has wrong length")
            c = rat(c)
            if c:
                clean[tuple(mono)] = c
        self.coeffs = clean

    @classmethod
    def constant(cls, dim: int, c) -> "IndexPoly":
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def var(cls, dim: int, i: int) -> "IndexPoly":
        e = [0] * dim
        e[i] = 1
        return cls(dim, {tuple(e): 1})

    def __add__(self, other: "IndexPoly") -> "IndexPoly":
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0) + c
        return IndexPoly(self.dim, out)

    def __neg__(self) -> "IndexPoly":
        return IndexPoly(self.dim, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other: "IndexPoly") -> "IndexPoly":
        return self + (-other)

    def __mul__(self, other) -> "IndexPoly":
        if not isinstance(other, IndexPoly):
            return IndexPoly(self.dim, {m: c * other for m, c in self.coeffs.items()})
        out: Dict[Tuple[int, ...], Rat] = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                m = tuple(x + y for x, y in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return IndexPoly(self.dim, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "IndexPoly":
        out = IndexPoly.constant(self.dim, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, IndexPoly) and self.dim == other.dim and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.dim, frozenset(self.coeffs.items())))

    def degree(self) -> int:
        return max((sum(m) for m in self.coeffs), default=0)

    def is_constant(self) -> bool:
        return self.degree() == 0

    def constant_term(self) -> Rat:
        return self.coeffs.get((0,) * self.dim, 0)

    def __call__(self, point: Sequence[int]) -> Rat:
        total = 0
        for m, c in self.coeffs.items():
            t = c
            for x, e in zip(point, m):
                if e:
                    t *= x ** e
            total += t
        return rat(total)

    def quadratic_parts(self):
        """Split a degree <= 2 polynomial into (A, b, c) with ``p(x) = x.A.x + b.x + c``."""
        if self.degree() > 2:
            raise ValueError("not a quadratic polynomial")
        n = self.dim
        A = [[Fraction(0)] * n for _ in range(n)]
        b = [Fraction(0)] * n
        c = Fraction(0)
        for m, coef in self.coeffs.items():
            idx = [i for i, e in enumerate(m) for _ in range(e)]
            if len(idx) == 0:
                c += coef
            elif len(idx) == 1:
                b[idx[0]] += coef
            elif idx[0] == idx[1]:
                A[idx[0]][idx[0]] += coef
            else:
                i, j = idx
                A[i][j] += Fraction(coef, 2)
                A[j][i] += Fraction(coef, 2)
        return A, b, c

    def __repr__(self) -> str:
        return f"IndexPoly({self.dim}, {self.coeffs})"


def _solve(A, b):
    """Solve ``A x = b`` exactly (A nonsingular)."""
    n = len(A)
    M = [[Fraction(v) for v in row] + [Fraction(b[i])] for i, row in enumerate(A)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col] / M[col][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[i][n] / M[i][i] for i in range(n)]


def _leading_minors_positive(A) -> bool:
    n = len(A)
    for k in range(1, n + 1):
        sub = [[Fraction(A[i][j]) for j in range(k)] for i in range(k)]
        det = Fraction(1)
        for col in range(k):
            piv = next((r for r in range(col, k) if sub[r][col] != 0), None)
            if piv is None:
                return False
            if piv != col:
                sub[col], sub[piv] = sub[piv], sub[col]
                det = -det
            det *= sub[col][col]
            for r in range(col + 1, k):
                f = sub[r][col] / sub[col][col]
                sub[r] = [x - f * y for x, y in zip(sub[r], sub[col])]
        if det <= 0:
            return False
    return True


@dataclass(frozen=True)
class LatticeSummand:
    """``(-1)^(parity.x) * weight(x) * q^qquad(x) * prod sym^map(x)`` summed over Z^dim."""

    parity: Tuple[int, ...]
    weight: IndexPoly
    qquad: IndexPoly
    vmaps: Tuple[Tuple[str, IndexPoly], ...] = ()

    def __post_init__(self):
        dim = self.qquad.dim
        object.__setattr__(self, "parity", tuple(int(p) % 2 for p in self.parity))
        if len(self.parity) != dim or self.weight.dim != dim:
            raise ValueError("summand components disagree on the dimension")
        for name, m in self.vmaps:
            if m.dim != dim or m.degree() > 1:
                raise ValueError(f"exponent map for {name} must be affine in the indices")
        A, _, _ = self.qquad.quadratic_parts()
        if not _leading_minors_positive(A):
            raise ValueError("quadratic part of the q-exponent is not positive definite")

    def min_qexp(self) -> Fraction:
        A, b, c = self.qquad.quadratic_parts()
        xstar = _solve([[2 * v for v in row] for row in A], [-v for v in b])
        val = c + sum(b[i] * xstar[i] for i in range(len(b))) / 2
        return val


@dataclass(frozen=True)
class LatticeSum:
    dim: int
    summands: Tuple[LatticeSummand, ...]

    def __post_init__(self):
        object.__setattr__(self, "summands", tuple(self.summands))
        for s in self.summands:
            if s.qquad.dim != self.dim:
                raise ValueError("summand dimension mismatch")

    def min_qexp(self) -> Rat:
        if not self.summands:
            return 0
        return rat(min(s.min_qexp() for s in self.summands))


# --------------------------------------------------------------------------
# expansion
# --------------------------------------------------------------------------


@lru_cache(maxsize=8192)
def expand_theta(f: ThetaFactor, order) -> Series:
    """Bilateral sum expansion of ``f(a, b)`` through ``q^order``."""
    order = rat(order)
    a, b = f.a, f.b
    l = f.weight
    d = a.qexp - b.qexp
    minexp = f.min_qexp()
    terms: Dict = {}
    rng = quadratic_int_range(l, d, -2 * order)
    if rng is not None:
        va, vb = dict(a.vexp), dict(b.vexp)
        names = sorted(set(va) | set(vb))
        for n in range(rng[0], rng[1] + 1):
            ea = n * (n + 1) // 2
            eb = n * (n - 1) // 2
            sign = (a.sign if ea % 2 else 1) * (b.sign if eb % 2 else 1)
            qe = rat(a.qexp * ea + b.qexp * eb)
            ve = []
            for name in names:
                e = va.get(name, 0) * ea + vb.get(name, 0) * eb
                if e:
                    ve.append((name, rat(e)))
            key = (qe, tuple(ve))
            c = terms.get(key, 0) + sign
            if c:
                terms[key] = c
            else:
                del terms[key]
    return Series._raw(terms, order, min(minexp, order))


@lru_cache(maxsize=8192)
def expand_poch(p: Pochhammer, order) -> Series:
    """Truncated product ``prod_k (1 - x base^k)`` through ``q^order``."""
    order = rat(order)
    step = p.base.qexp
    exps = []
    k = 0
    neg_total = p.min_qexp()
    # factors whose q-exponent exceeds order - neg_total cannot reach the window
    while True:
        e = p.x.qexp + k * step
        if e > order - neg_total:
            break
        exps.append(k)
        k += 1
    remaining_neg = neg_total
    cur: Dict = {(0, ()): 1}
    for k in exps:
        m = p.x * (p.base ** k)
        if m.qexp < 0:
            remaining_neg -= m.qexp
        cut = order - remaining_neg
        nxt = dict(cur)
        for (qe, ve), c in cur.items():
            q2 = rat(qe + m.qexp)
            if q2 > cut:
                continue
            v2 = _merge_v(ve, m.vexp)
            key = (q2, v2)
            val = nxt.get(key, 0) - m.sign * c
            if val:
                nxt[key] = val
            else:
                nxt.pop(key, None)
        cur = {kk: c for kk, c in nxt.items() if kk[0] <= cut}
    cur = {kk: c for kk, c in cur.items() if kk[0] <= order}
    return Series._raw(cur, order, min(neg_total, order))


def _merge_v(v1, v2):
    if not v2:
        return v1
    if not v1:
        return v2
    out = dict(v1)
    for n, e in v2:
        s = out.get(n, 0) + e
        if s:
            out[n] = rat(s)
        else:
            del out[n]
    return tuple(sorted(out.items()))


def expand_product_form(f: ThetaFactor, order) -> Series:
    """Expand ``f(a,b)`` as ``(-a; ab)(-b; ab)(ab; ab)`` (Jacobi triple product).

    When an argument has negative q-weight the factor is first shifted by the
    integer translation ``f(a,b) = a^(n(n+1)/2) b^(n(n-1)/2) f(a(ab)^n, b(ab)^-n)``
    so that ``qexp(a)`` lands in ``[0, l)``.
    """
    order = rat(order)
    a, b = f.a, f.b
    l = f.weight
    prefactor = Monomial()
    if a.qexp < 0 or b.qexp < 0:
        if a.qexp < 0:
            n = -math.floor(Fraction(a.qexp) / l)
        else:
            n = math.floor(Fraction(b.qexp) / l)
        ab = a * b
        prefactor = (a ** (n * (n + 1) // 2)) * (b ** (n * (n - 1) // 2))
        a, b = a * ab ** n, b * ab ** (-n)
    if a.qexp < 0 or b.qexp < 0:
        raise ValueError(f"cannot shift {f} into the nonnegative range")
    ab = a * b
    inner = order - prefactor.qexp
    pieces = [Pochhammer(-a, ab), Pochhammer(-b, ab), Pochhammer(ab, ab)]
    out = Series.one()
    for p in pieces:
        out = arith(out, expand_poch(p, inner), "mul")
    return out.shift(prefactor).truncate(order)


@lru_cache(maxsize=1024)
def expand_lattice_sum(ls: LatticeSum, order) -> Series:
    """Enumerate every lattice point whose q-exponent is at most ``order``."""
    order = rat(order)
    terms: Dict = {}
    for s in ls.summands:
        _accumulate_summand(s, ls.dim, order, terms)
    return Series._raw(terms, order, min(ls.min_qexp(), order))


def _accumulate_summand(s: LatticeSummand, dim: int, order, terms: Dict) -> None:
    A, b, c = s.qquad.quadratic_parts()
    xstar = _solve([[2 * v for v in row] for row in A], [-v for v in b])
    qmin = c + sum(b[i] * xstar[i] for i in range(dim)) / 2
    slack = Fraction(order) - qmin
    if slack < 0:
        return
    # bounding box of the ellipsoid (x - x*)^T A (x - x*) <= slack
    ranges = []
    for i in range(dim):
        e = [0] * dim
        e[i] = 1
        ainv_ii = _solve(A, e)[i]
        r = _ceil_sqrt_bound(slack * ainv_ii)
        ranges.append(range(math.floor(xstar[i]) - r, math.ceil(xstar[i]) + r + 1))
    names = [name for name, _ in s.vmaps]
    maps = [m for _, m in s.vmaps]
    weight = s.weight
    qquad = s.qquad
    parity = s.parity
    for x in cartesian(*ranges):
        qe = qquad(x)
        if qe > order:
            continue
        w = weight(x)
        if w == 0:
            continue
        if not is_integral(w):
            raise ValueError("lattice-sum weight must be integer valued")
        if sum(p * xi for p, xi in zip(parity, x)) % 2:
            w = -w
        ve = tuple(sorted((n, m(x)) for n, m in zip(names, maps)))
        ve = tuple((n, e) for n, e in ve if e != 0)
        key = (qe, _canon_v(ve))
        v = terms.get(key, 0) + int(w)
        if v:
            terms[key] = v
        else:
            del terms[key]


def _canon_v(ve):
    merged: Dict[str, Rat] = {}
    for n, e in ve:
        merged[n] = rat(merged.get(n, 0) + e)
    return tuple(sorted((n, e) for n, e in merged.items() if e != 0))


# --------------------------------------------------------------------------
# combinations
# --------------------------------------------------------------------------

Factor = Union[ThetaFactor, Pochhammer, LatticeSum]


def factor_min_qexp(fac: Factor) -> Rat:
    return fac.min_qexp()


def expand_factor(fac: Factor, order) -> Series:
    if isinstance(fac, ThetaFactor):
        return expand_theta(fac, rat(order))
    if isinstance(fac, Pochhammer):
        return expand_poch(fac, rat(order))
    if isinstance(fac, LatticeSum):
        return expand_lattice_sum(fac, rat(order))
    raise TypeError(f"unknown factor type {type(fac).__name__}")


@dataclass(frozen=True)
class ComboTerm:
    """``scale * coeff * prod(factors) / prod(denominators)``."""

    coeff: Monomial
    factors: Tuple[Factor, ...]
    scale: int = 1
    denominators: Tuple[Factor, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "denominators", tuple(self.denominators))

    def sort_key(self):
        return (self.coeff.qexp, self.coeff.vexp, self.coeff.sign)


@dataclass(frozen=True)
class ThetaCombo:
    """Formal linear combination of products of theta factors; empty means 0."""

    terms: Tuple[ComboTerm, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    @classmethod
    def product(cls, factors: Iterable[Factor], coeff: Monomial = Monomial()) -> "ThetaCombo":
        return cls((ComboTerm(coeff, tuple(factors)),))

    def __add__(self, other: "ThetaCombo") -> "ThetaCombo":
        return ThetaCombo(self.terms + other.terms)

    def __neg__(self) -> "ThetaCombo":
        return ThetaCombo(tuple(ComboTerm(t.coeff, t.factors, -t.scale, t.denominators)
                                for t in self.terms))

    def __sub__(self, other: "ThetaCombo") -> "ThetaCombo":
        return self + (-other)

    def __len__(self) -> int:
        return len(self.terms)

    def sorted(self) -> "ThetaCombo":
        return ThetaCombo(tuple(sorted(self.terms, key=ComboTerm.sort_key)))


def _expand_inverse(fac: Factor, target) -> Tuple[Series, Rat]:
    """Expand ``1/fac`` through ``q^target``; returns the series and its minexp."""
    bound = factor_min_qexp(fac)
    s = expand_factor(fac, rat(target + 2 * bound) if target + 2 * bound > bound else bound)
    lead = s.items()[0][0][0] if len(s) else None
    if lead is None:
        raise ZeroDivisionError(f"factor {fac} expands to zero")
    if lead != bound:
        # the true leading term sits above the static bound; re-expand
        s = expand_factor(fac, rat(target + 2 * lead))
        s = Series._raw(s.terms, s.order, lead)
    inv = s.inverse()
    return inv, -lead


def expand_term(t: ComboTerm, order) -> Series:
    order = rat(order)
    mins = [factor_min_qexp(f) for f in t.factors]
    inv_series = []
    inv_mins = []
    for g in t.denominators:
        bound = factor_min_qexp(g)
        inv_mins.append(-bound)
    total = t.coeff.qexp + sum(mins) + sum(inv_mins)
    if total > order:
        return Series.zero(order)
    for g, m in zip(t.denominators, inv_mins):
        need = order - (total - m)
        inv, real_min = _expand_inverse(g, need)
        inv_series.append(inv)
    out = Series.from_monomial(t.coeff, t.scale)
    parts = [expand_factor(f, order - (total - m)) for f, m in zip(t.factors, mins)]
    for s in sorted(parts + inv_series, key=len):
        out = arith(out, s, "mul")
    return out.truncate(order)


def expand_combo(c: ThetaCombo, order) -> Series:
    """Sum of the expanded terms, sound through ``q^order``."""
    order = rat(order)
    out = Series.zero(INF)
    for t in c.terms:
        out = arith(out, expand_term(t, order), "add")
    return out.truncate(order) if out.order != order else out


# --------------------------------------------------------------------------
# dissection
# --------------------------------------------------------------------------


def dissect(f: ThetaFactor, k: int) -> ThetaCombo:
    """Split ``f(a, b)`` along the residues of the summation index mod ``k``."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    a, b = f.a, f.b
    terms = []
    for r in range(k):
        coeff = a ** (r * (r + 1) // 2) * b ** (r * (r - 1) // 2)
        A = a ** (k * (k + 1) // 2 + k * r) * b ** (k * (k - 1) // 2 + k * r)
        B = a ** (k * (k - 1) // 2 - k * r) * b ** (k * (k + 1) // 2 - k * r)
        terms.append(ComboTerm(coeff, (ThetaFactor(A, B),)))
    return ThetaCombo(tuple(terms))


# --------------------------------------------------------------------------
# sides with series operators
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OpTerm:
    """``scale * coeff * op(inner)`` where op is the Euler operator or setting a symbol to 1."""

    kind: str  # "euler" or "at1"
    var: str
    inner: "Side"
    coeff: Monomial = Monomial()
    scale: int = 1


@dataclass(frozen=True)
class Side:
    """One side of an identity: a theta combination plus operator terms."""

    combo: ThetaCombo = ThetaCombo()
    ops: Tuple[OpTerm, ...] = ()

    @classmethod
    def of(cls, combo: ThetaCombo) -> "Side":
        return cls(combo, ())

    def __add__(self, other: "Side") -> "Side":
        return Side(self.combo + other.combo, self.ops + other.ops)

    def __neg__(self) -> "Side":
        return Side(-self.combo, tuple(OpTerm(o.kind, o.var, o.inner, o.coeff, -o.scale) for o in self.ops))

    def __sub__(self, other: "Side") -> "Side":
        return self + (-other)


def expand_side(side: Side, order) -> Series:
    from .series import differentiate, substitute_one

    order = rat(order)
    out = expand_combo(side.combo, order)
    for op in side.ops:
        inner = expand_side(op.inner, order - op.coeff.qexp)
        if op.kind == "euler":
            s = differentiate(inner, op.var)
        elif op.kind == "at1":
            s = substitute_one(inner, op.var)
        else:
            raise ValueError(f"unknown series operator {op.kind!r}")
        s = s.shift(op.coeff).scale(op.scale)
        out = arith(out, s.truncate(order) if s.order > order else s, "add")
    return out
