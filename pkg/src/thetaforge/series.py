"""Truncated multivariate Laurent series in q with exact rational exponents.

A :class:`Series` stores integer coefficients keyed by ``(qexp, vexp)``
where ``qexp`` is the exponent of q and ``vexp`` is a sorted tuple of
``(symbol, exponent)`` pairs.  Every series carries

* ``order``  -- coefficients with ``qexp <= order`` are exact
  (``math.inf`` for an exact, finitely supported series), and
* ``minexp`` -- a lower bound on the q-exponent of *every* term of the
  untruncated series, which is what makes truncated products sound.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

INF = math.inf

Rat = Union[int, Fraction]
VExp = Tuple[Tuple[str, Rat], ...]
Key = Tuple[Rat, VExp]


def rat(x) -> Rat:
    """Normalize a rational-like value: integral values become ``int``."""
    if isinstance(x, bool):
        raise TypeError("booleans are not exponents")
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        x = Fraction(x)
    elif isinstance(x, Rational):
        x = Fraction(x.numerator, x.denominator)
    elif isinstance(x, float):
        if x in (INF, -INF):
            return x
        raise TypeError(f"floating point value {x!r} is not an exact exponent")
    else:
        raise TypeError(f"cannot interpret {x!r} as a rational")
    return x.numerator if x.denominator == 1 else x


def is_integral(x) -> bool:
    return isinstance(x, int) or (isinstance(x, Fraction) and x.denominator == 1)


def _merge(v1: VExp, v2: VExp) -> VExp:
    if not v1:
        return v2
    if not v2:
        return v1
    out = dict(v1)
    for name, e in v2:
        s = out.get(name, 0) + e
        if s:
            out[name] = rat(s)
        else:
            del out[name]
    return tuple(sorted(out.items()))


def _scale_vexp(v: VExp, k) -> VExp:
    if k == 0:
        return ()
    return tuple((name, rat(e * k)) for name, e in v)


def _fmt_exp(e: Rat) -> str:
    return str(e)


# --------------------------------------------------------------------------
# Monomials
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Monomial:
    """A signed product ``sign * q^qexp * prod(sym^e)``."""

    sign: int = 1
    qexp: Rat = 0
    vexp: VExp = ()

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("monomial sign must be +1 or -1")
        object.__setattr__(self, "qexp", rat(self.qexp))
        items = {}
        for name, e in self.vexp:
            e = rat(e)
            if name == "q":
                raise ValueError("'q' is reserved for the series variable")
            items[name] = rat(items.get(name, 0) + e)
        object.__setattr__(
            self, "vexp", tuple(sorted((k, v) for k, v in items.items() if v != 0))
        )

    @classmethod
    def q(cls, e=1) -> "Monomial":
        return cls(1, e, ())

    @classmethod
    def symbol(cls, name: str, e=1) -> "Monomial":
        return cls(1, 0, ((name, e),))

    @classmethod
    def one(cls) -> "Monomial":
        return cls()

    def __mul__(self, other: "Monomial") -> "Monomial":
        if not isinstance(other, Monomial):
            return NotImplemented
        return Monomial(
            self.sign * other.sign, self.qexp + other.qexp, _merge(self.vexp, other.vexp)
        )

    def __truediv__(self, other: "Monomial") -> "Monomial":
        return self * other.inverse()

    def __neg__(self) -> "Monomial":
        return Monomial(-self.sign, self.qexp, self.vexp)

    def inverse(self) -> "Monomial":
        return Monomial(self.sign, -self.qexp, _scale_vexp(self.vexp, -1))

    def __pow__(self, k) -> "Monomial":
        k = rat(k)
        if self.sign == -1:
            if not is_integral(k):
                raise ValueError(f"cannot raise negative monomial {self} to power {k}")
            sign = -1 if k % 2 else 1
        else:
            sign = 1
        return Monomial(sign, self.qexp * k, _scale_vexp(self.vexp, k))

    def exponent(self, name: str) -> Rat:
        if name == "q":
            return self.qexp
        return dict(self.vexp).get(name, 0)

    @property
    def symbols(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.vexp)

    def is_pure_q(self) -> bool:
        """True when the monomial is ``+q^e`` with no symbols."""
        return self.sign == 1 and not self.vexp

    def __str__(self) -> str:
        parts = []
        if self.qexp != 0:
            parts.append("q" if self.qexp == 1 else f"q^{_fmt_exp(self.qexp)}")
        for name, e in self.vexp:
            parts.append(name if e == 1 else f"{name}^{_fmt_exp(e)}")
        body = "*".join(parts) if parts else "1"
        return ("-" if self.sign < 0 else "") + body

    def __repr__(self) -> str:
        return f"Monomial({self})"


# --------------------------------------------------------------------------
# Series
# --------------------------------------------------------------------------


def _check_coeff(c) -> int:
    if isinstance(c, bool) or not isinstance(c, int):
        if isinstance(c, Fraction) and c.denominator == 1:
            return c.numerator
        raise TypeError(f"series coefficients must be integers, got {c!r}")
    return c


class Series:
    """Immutable truncated series.  See the module docstring for semantics."""

    __slots__ = ("_terms", "order", "minexp", "_sorted")

    def __init__(self, terms: Optional[Mapping[Key, int]] = None, order=INF, minexp=None):
        order = order if order in (INF,) else rat(order)
        clean: Dict[Key, int] = {}
        for (qe, ve), c in (terms or {}).items():
            c = _check_coeff(c)
            qe = rat(qe)
            if c and qe <= order:
                key = (qe, tuple(sorted((n, rat(e)) for n, e in ve if e != 0)))
                clean[key] = clean.get(key, 0) + c
                if not clean[key]:
                    del clean[key]
        stored_min = min((k[0] for k in clean), default=INF)
        if minexp is None:
            if order == INF:
                minexp = stored_min
            else:
                minexp = min(stored_min, order)
        else:
            minexp = minexp if minexp in (INF, -INF) else rat(minexp)
            if stored_min < minexp:
                raise ValueError(f"stored exponent {stored_min} below minexp {minexp}")
        self._terms = clean
        self.order = order
        self.minexp = minexp
        self._sorted = None

    @classmethod
    def _raw(cls, terms: Dict[Key, int], order, minexp) -> "Series":
        # trusted constructor: terms already canonical, nonzero, within bounds
        s = cls.__new__(cls)
        s._terms = terms
        s.order = order
        s.minexp = minexp
        s._sorted = None
        return s

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, order=INF) -> "Series":
        return cls._raw({}, order, INF if order == INF else rat(order))

    @classmethod
    def one(cls) -> "Series":
        return cls.from_monomial(Monomial())

    @classmethod
    def from_monomial(cls, m: Monomial, coeff: int = 1, order=INF) -> "Series":
        return cls({(m.qexp, m.vexp): m.sign * _check_coeff(coeff)}, order=order)

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[int], order=None) -> "Series":
        """Pure q-series ``sum c_n q^n``; order defaults to ``len(coeffs) - 1``."""
        coeffs = list(coeffs)
        if order is None:
            order = len(coeffs) - 1
        s = cls({(n, ()): c for n, c in enumerate(coeffs)}, order=order, minexp=0)
        return s

    # -- inspection --------------------------------------------------------

    @property
    def terms(self) -> Dict[Key, int]:
        return dict(self._terms)

    def items(self) -> list:
        """Terms sorted by q-exponent, then by symbol exponents."""
        if self._sorted is None:
            self._sorted = sorted(self._terms.items(), key=_sort_key)
        return self._sorted

    def __iter__(self) -> Iterator[Tuple[Key, int]]:
        return iter(self.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coeff(self, qexp, vexp=()) -> int:
        key = (rat(qexp), tuple(sorted((n, rat(e)) for n, e in dict(vexp).items())))
        if key[0] > self.order:
            raise ValueError(f"coefficient at q^{qexp} is beyond truncation order {self.order}")
        return self._terms.get(key, 0)

    def symbols(self) -> Tuple[str, ...]:
        names = set()
        for _, ve in self._terms:
            names.update(n for n, _ in ve)
        return tuple(sorted(names))

    def is_exact(self) -> bool:
        return self.order == INF

    def coefficient_list(self, upto=None) -> list:
        """Dense coefficients of q^0..q^upto for a pure, integral q-series."""
        upto = self.order if upto is None else upto
        if upto == INF:
            upto = max((k[0] for k in self._terms), default=0)
        out = [0] * (int(upto) + 1)
        for (qe, ve), c in self._terms.items():
            if ve or not is_integral(qe) or qe < 0:
                raise ValueError("not a pure power series with integer exponents")
            if qe <= upto:
                out[int(qe)] += c
        return out

    # -- truncation ----------------------------------------------------------

    def truncate(self, order) -> "Series":
        if order == INF or (self.order != INF and order >= self.order):
            if order == self.order or order == INF:
                return self
            order = self.order
        order = rat(order)
        terms = {k: c for k, c in self._terms.items() if k[0] <= order}
        return Series._raw(terms, order, min(self.minexp, order) if self.minexp != INF else order)

    # -- arithmetic ------------------------------------------------------

    def _coerce(self, other) -> Optional["Series"]:
        if isinstance(other, Series):
            return other
        if isinstance(other, Monomial):
            return Series.from_monomial(other)
        if isinstance(other, int) and not isinstance(other, bool):
            return Series({(0, ()): other}) if other else Series.zero()
        return None

    def __add__(self, other) -> "Series":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return arith(self, other, "add")

    __radd__ = __add__

    def __sub__(self, other) -> "Series":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return arith(self, other, "sub")

    def __rsub__(self, other) -> "Series":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return arith(other, self, "sub")

    def __mul__(self, other) -> "Series":
        if isinstance(other, int) and not isinstance(other, bool):
            return self.scale(other)
        if isinstance(other, Monomial):
            return self.shift(other)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return arith(self, other, "mul")

    __rmul__ = __mul__

    def __neg__(self) -> "Series":
        return Series._raw({k: -c for k, c in self._terms.items()}, self.order, self.minexp)

    def __pow__(self, k: int) -> "Series":
        if not isinstance(k, int):
            raise TypeError("series powers must be integers")
        if k < 0:
            return self.inverse() ** (-k)
        result = Series.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c: int) -> "Series":
        c = _check_coeff(c)
        if c == 0:
            return Series.zero(self.order)
        return Series._raw({k: v * c for k, v in self._terms.items()}, self.order, self.minexp)

    def shift(self, m: Monomial) -> "Series":
        """Multiply by a monomial (exact; the truncation order moves with it)."""
        terms = {}
        for (qe, ve), c in self._terms.items():
            terms[(rat(qe + m.qexp), _merge(ve, m.vexp))] = c * m.sign
        order = self.order + m.qexp if self.order != INF else INF
        minexp = self.minexp + m.qexp if self.minexp != INF else INF
        return Series._raw(terms, rat(order) if order != INF else INF,
                           rat(minexp) if minexp != INF else INF)

    def inverse(self) -> "Series":
        """Multiplicative inverse of a series whose lowest term is ``±q^e``.

        The lowest stored term must sit at ``minexp`` (so it is known to be the
        true leading term) and carry no symbols.
        """
        if not self._terms:
            raise ZeroDivisionError("cannot invert a zero series")
        lead_q = self.items()[0][0][0]
        lead = [(k, c) for k, c in self._terms.items() if k[0] == lead_q]
        if lead_q != self.minexp:
            raise ValueError("leading term of the series is not known exactly")
        if len(lead) != 1 or lead[0][0][1] or lead[0][1] not in (1, -1):
            raise ValueError("series is not invertible: leading term is not a unit q^e")
        u = lead[0][1]
        e = lead_q
        # s = u q^e (1 + t); t has q-exponents > 0
        rest = Series._raw(
            {(rat(k[0] - e), k[1]): c * u for k, c in self._terms.items() if k[0] != e},
            rat(self.order - e) if self.order != INF else INF,
            0,
        )
        target = rest.order  # inverse of (1 + t) is exact to the same relative order
        if target == INF:
            raise ValueError("inverse of a non-monomial exact series is not finite")
        inv = Series._raw({(0, ()): 1}, target, 0)
        power = Series._raw({(0, ()): 1}, target, 0)
        t = -rest
        t_min = min((k[0] for k in t._terms), default=INF)
        if t_min != INF:
            steps = int(math.floor(target / t_min))
            for _ in range(steps):
                power = arith(power, t, "mul").truncate(target)
                if not power:
                    break
                inv = arith(inv, power, "add")
        return inv.shift(Monomial(u, -e))

    # -- comparison ------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Series):
            return NotImplemented
        return self.order == other.order and self._terms == other._terms

    def __hash__(self):
        return hash((self.order, frozenset(self._terms.items())))

    def first_mismatch(self, other: "Series", order=None):
        """First (in canonical term order) differing term up to the common order.

        Returns ``(qexp, vexp, self_coeff, other_coeff)`` or ``None``.
        """
        upto = min(self.order, other.order)
        if order is not None:
            upto = min(upto, order)
        keys = {k for k in self._terms if k[0] <= upto} | {
            k for k in other._terms if k[0] <= upto
        }
        for key in sorted(keys):
            a = self._terms.get(key, 0)
            b = other._terms.get(key, 0)
            if a != b:
                return key[0], key[1], a, b
        return None

    def agrees_with(self, other: "Series", order=None) -> bool:
        return self.first_mismatch(other, order) is None

    # -- display ------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            body = "0"
        else:
            parts = []
            for (qe, ve), c in self.items():
                m = Monomial(1, qe, ve)
                mono = str(m)
                if mono == "1":
                    parts.append(str(c))
                elif c == 1:
                    parts.append(mono)
                elif c == -1:
                    parts.append("-" + mono)
                else:
                    parts.append(f"{c}*{mono}")
            body = " + ".join(parts).replace("+ -", "- ")
        if self.order != INF:
            body += f" + O(q^{_fmt_exp(_next_exp(self.order))})"
        return body

    def __repr__(self) -> str:
        return f"Series({self}, order={self.order}, minexp={self.minexp})"


def _next_exp(order):
    return order if not is_integral(order) else int(order) + 1


def _sort_key(item):
    (qe, ve), _ = item
    return (qe, ve)


def _intern(items):
    """Rows ``(qexp, vid, coeff)`` plus the list mapping vid back to the symbol part."""
    ids: Dict[VExp, int] = {}
    vs: List[VExp] = []
    rows = []
    for (qe, ve), c in items:
        j = ids.get(ve)
        if j is None:
            j = ids[ve] = len(vs)
            vs.append(ve)
        rows.append((qe, j, c))
    return vs, rows


def _add_orders(a, b):
    if a == INF or b == INF:
        return INF
    return rat(a + b)


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------


def arith(lhs: Series, rhs: Series, kind: str) -> Series:
    """Exact ``add``/``sub``/``mul`` with truncation orders reconciled."""
    if kind in ("add", "sub"):
        order = min(lhs.order, rhs.order)
        sgn = 1 if kind == "add" else -1
        terms = {k: c for k, c in lhs._terms.items() if k[0] <= order}
        for k, c in rhs._terms.items():
            if k[0] > order:
                continue
            v = terms.get(k, 0) + sgn * c
            if v:
                terms[k] = v
            else:
                terms.pop(k, None)
        minexp = min(lhs.minexp, rhs.minexp)
        if order != INF:
            minexp = min(minexp, order)
        return Series._raw(terms, order, minexp)
    if kind != "mul":
        raise ValueError(f"unknown arithmetic kind {kind!r}")

    order = min(_add_orders(lhs.order, rhs.minexp), _add_orders(rhs.order, lhs.minexp))
    minexp = _add_orders(lhs.minexp, rhs.minexp)
    if order != INF and minexp != INF:
        minexp = min(minexp, order)
    elif order != INF:
        minexp = order
    a_items = lhs.items()
    b_items = rhs.items()
    if len(a_items) > len(b_items):
        a_items, b_items = b_items, a_items
    # symbol parts are interned to small ints so the inner loop hashes only ints
    a_v, a_rows = _intern(a_items)
    b_v, b_rows = _intern(b_items)
    b_q = [r[0] for r in b_rows]
    out_ids: Dict[VExp, int] = {}
    out_v: List[VExp] = []
    table: List[Dict[int, int]] = [{} for _ in a_v]
    acc: Dict[Tuple[Rat, int], int] = {}
    for qa, ja, ca in a_rows:
        if order == INF:
            cut = len(b_rows)
        else:
            cut = bisect_right(b_q, order - qa)
            if cut == 0:
                break
        row = table[ja]
        va = a_v[ja]
        for i in range(cut):
            qb, jb, cb = b_rows[i]
            vid = row.get(jb)
            if vid is None:
                vb = b_v[jb]
                v = vb if not va else va if not vb else _merge(va, vb)
                vid = out_ids.get(v)
                if vid is None:
                    vid = out_ids[v] = len(out_v)
                    out_v.append(v)
                row[jb] = vid
            qe = qa + qb
            if type(qe) is Fraction and qe.denominator == 1:
                qe = qe.numerator
            key = (qe, vid)
            c = acc.get(key, 0) + ca * cb
            if c:
                acc[key] = c
            else:
                del acc[key]
    terms: Dict[Key, int] = {(qe, out_v[vid]): c for (qe, vid), c in acc.items()}
    return Series._raw(terms, order, minexp)


def differentiate(s: Series, var: str) -> Series:
    """Euler operator ``var * d/dvar``: each coefficient times its var-exponent."""
    terms = {}
    for (qe, ve), c in s._terms.items():
        e = dict(ve).get(var, 0)
        if e == 0:
            continue
        v = c * e
        if not is_integral(v):
            raise ValueError(f"differentiation by {var} produced a non-integer coefficient")
        terms[(qe, ve)] = int(v)
    return Series._raw(terms, s.order, s.minexp)


def substitute_one(s: Series, var: str) -> Series:
    """Set the symbol ``var`` to 1, merging terms that collide."""
    terms: Dict[Key, int] = {}
    for (qe, ve), c in s._terms.items():
        nv = tuple(p for p in ve if p[0] != var)
        key = (qe, nv)
        v = terms.get(key, 0) + c
        if v:
            terms[key] = v
        else:
            terms.pop(key, None)
    return Series._raw(terms, s.order, s.minexp)


def substitute_monomial(s: Series, var: str, m: Monomial) -> Series:
    """Replace the symbol ``var`` by a q-free monomial such as ``-1`` or ``b^2``."""
    if m.qexp != 0:
        raise ValueError("only q-free monomials may be substituted for a symbol")
    terms: Dict[Key, int] = {}
    for (qe, ve), c in s._terms.items():
        d = dict(ve)
        e = d.pop(var, 0)
        mm = Monomial(1, qe, tuple(d.items())) * (m ** e)
        key = (mm.qexp, mm.vexp)
        v = terms.get(key, 0) + c * mm.sign
        if v:
            terms[key] = v
        else:
            terms.pop(key, None)
    return Series._raw(terms, s.order, s.minexp)
