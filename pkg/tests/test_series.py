from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from thetaforge.series import INF, Monomial, Series, arith, differentiate, substitute_one

ORDER = 12


def poly(*coeffs, order=INF):
    return Series({(n, ()): c for n, c in enumerate(coeffs)}, order=order)


def mono(q=0, sign=1, **syms):
    return Monomial(sign, q, tuple(syms.items()))


# random series in q, a and b with small exponents
term = st.tuples(
    st.integers(-2, 8),
    st.integers(-2, 2),
    st.integers(-1, 1),
    st.integers(-5, 5),
)


@st.composite
def series(draw, order=ORDER):
    items = draw(st.lists(term, max_size=8))
    terms = {}
    for qe, ea, eb, c in items:
        key = (qe, tuple((n, e) for n, e in (("a", ea), ("b", eb)) if e))
        terms[key] = terms.get(key, 0) + c
    return Series(terms, order=order)


def brute_product(s, t, order):
    out = {}
    for (q1, v1), c1 in s.items():
        for (q2, v2), c2 in t.items():
            if q1 + q2 > order:
                continue
            m = mono(q1, **dict(v1)) * mono(q2, **dict(v2))
            key = (m.qexp, m.vexp)
            out[key] = out.get(key, 0) + c1 * c2
    return Series(out, order=order)


class TestMonomial:
    def test_canonical_exponents(self):
        m = Monomial(1, Fraction(4, 6), (("b", 1), ("a", 2), ("b", -1)))
        assert m.qexp == Fraction(2, 3)
        assert m.vexp == (("a", 2),)

    def test_product_and_identity(self):
        m = mono(3, -1, a=2)
        assert m * Monomial() == m
        assert m * m.inverse() == Monomial()
        assert (m * m).sign == 1

    def test_q_is_reserved(self):
        with pytest.raises(ValueError):
            Monomial(1, 0, (("q", 1),))

    def test_fractional_power_of_negative_rejected(self):
        with pytest.raises(ValueError):
            mono(1, -1) ** Fraction(1, 2)

    def test_printing(self):
        assert str(mono(Fraction(3, 2), -1, a=-1)) == "-q^3/2*a^-1"
        assert str(Monomial()) == "1"


class TestArith:
    def test_difference_of_squares(self):
        s = arith(poly(1, 1, order=10), poly(1, -1, order=10), "mul")
        assert s == poly(1, 0, -1, order=10)

    def test_geometric_times_one_minus_q(self):
        # exact brute-force convolution of coefficient arrays
        g = poly(*([1] * 21), order=20)
        s = arith(g, poly(1, -1, order=20), "mul")
        a = [1] * 21
        b = [1, -1]
        conv = [sum(a[i] * b[n - i] for i in range(n + 1) if n - i < 2) for n in range(21)]
        assert s.coefficient_list(20) == conv
        assert s == poly(1, order=20)

    def test_mul_order_uses_minexp(self):
        s = Series({(-2, ()): 1, (0, ()): 1}, order=10)
        t = Series({(0, ()): 1}, order=10)
        assert arith(s, t, "mul").order == 8

    def test_rational_coefficients_rejected(self):
        with pytest.raises((TypeError, ValueError)):
            Series({(0, ()): Fraction(1, 2)})

    @settings(max_examples=60, deadline=None)
    @given(series())
    def test_additive_identity(self, s):
        assert arith(s, Series.zero(ORDER), "add") == s

    @settings(max_examples=60, deadline=None)
    @given(series(), series(), series())
    def test_ring_axioms(self, s, t, u):
        assert (s * t) == (t * s)
        assert (s + t) + u == s + (t + u)
        left = (s * t) * u
        right = s * (t * u)
        n = min(left.order, right.order)
        assert left.truncate(n) == right.truncate(n)
        d1 = s * (t + u)
        d2 = s * t + s * u
        n = min(d1.order, d2.order)
        assert d1.truncate(n) == d2.truncate(n)

    @settings(max_examples=60, deadline=None)
    @given(series(), series())
    def test_product_matches_untruncated_convolution(self, s, t):
        p = s * t
        assert p == brute_product(s, t, p.order)

    @settings(max_examples=40, deadline=None)
    @given(series())
    def test_stored_terms_within_bounds(self, s):
        for (qe, ve), c in s.items():
            assert s.minexp <= qe <= s.order
            assert c != 0
            assert all(e != 0 for _, e in ve)


class TestOperators:
    def test_power_rule(self):
        s = Series({(1, (("a", 2),)): 1, (3, (("a", -1),)): 1})
        assert differentiate(s, "a") == Series({(1, (("a", 2),)): 2, (3, (("a", -1),)): -1})

    def test_absent_symbol_derivative_is_zero(self):
        assert not differentiate(poly(1, 2, 3), "w")

    def test_twice_then_at_one(self):
        # sum a^(2n) q^(n^2) -> sum 4 n^2 q^(n^2), compared with the term-by-term sum
        order = 49
        s = Series({(n * n, (("a", 2 * n),)): 1 for n in range(-7, 8)}, order=order)
        got = substitute_one(differentiate(differentiate(s, "a"), "a"), "a")
        want = {}
        for n in range(-7, 8):
            want[n * n] = want.get(n * n, 0) + 4 * n * n
        assert got == Series({(k, ()): v for k, v in want.items()}, order=order)

    def test_collision_merge(self):
        s = Series({(1, (("a", 1),)): 1, (1, (("a", -1),)): 1})
        assert substitute_one(s, "a") == Series({(1, ()): 2})

    @settings(max_examples=40, deadline=None)
    @given(series())
    def test_substitute_absent_is_noop(self, s):
        assert substitute_one(s, "w") == s

    @settings(max_examples=60, deadline=None)
    @given(series(), series())
    def test_leibniz(self, s, t):
        lhs = differentiate(s * t, "a")
        rhs = differentiate(s, "a") * t + s * differentiate(t, "a")
        n = min(lhs.order, rhs.order)
        assert lhs.truncate(n) == rhs.truncate(n)

    @settings(max_examples=60, deadline=None)
    @given(series(), series())
    def test_substitute_commutes_with_arith(self, s, t):
        for kind in ("add", "sub", "mul"):
            lhs = substitute_one(arith(s, t, kind), "a")
            rhs = arith(substitute_one(s, "a"), substitute_one(t, "a"), kind)
            n = min(lhs.order, rhs.order)
            assert lhs.truncate(n) == rhs.truncate(n)
