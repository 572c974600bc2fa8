from fractions import Fraction

import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from thetaforge.decompose import (
    DecompositionError,
    decompose,
    decompose_full,
    decompose_sum_diff,
    quadform_decompose,
    quadform_sum,
    schroter_factors,
    schroter_matrix,
)
from thetaforge.lattice import check_orthogonal, cosets, det, matrix_basics
from thetaforge.series import Monomial
from thetaforge.theta import (
    ComboTerm,
    ThetaCombo,
    ThetaFactor,
    expand_combo,
    expand_lattice_sum,
    phi,
    psi,
)

from helpers import SIMPLEST, THREE, two_by_two_cases, two_factor_formula

q = Monomial.q


def sym(name, e=1):
    return Monomial.symbol(name, e)


def theta_pair(name, l, shift):
    """f(x q^shift, q^(l - shift) / x): decomposable with weight l, one live symbol."""
    x = sym(name)
    return ThetaFactor(x * q(shift), q(l - shift) / x)


def product_expansion(factors, order):
    return expand_combo(ThetaCombo.product(factors), order)


def term_key(t):
    return (t.coeff, t.scale, tuple(f.canonical() for f in t.factors))


def same_terms(c1, c2):
    return sorted(map(term_key, c1.terms), key=repr) == sorted(map(term_key, c2.terms), key=repr)


@st.composite
def decomposition_input(draw):
    n = draw(st.integers(1, 3))
    l = [draw(st.integers(1, 3)) for _ in range(n)]
    B = [[draw(st.integers(-2, 2)) for _ in range(n)] for _ in range(n)]
    assume(det(B) != 0)
    assume(check_orthogonal(B, l).ok)
    assume(abs(det(B)) <= 12)
    names = "abc"
    factors = [theta_pair(names[i], l[i], draw(st.integers(0, l[i]))) for i in range(n)]
    return factors, B


class TestDecompose:
    def test_phi_squared(self):
        combo = decompose([phi(q()), phi(q())], SIMPLEST, reps="theorem")
        want = ThetaCombo((
            ComboTerm(Monomial(), (phi(q(2)), phi(q(2)))),
            ComboTerm(q(), (psi(q(4)), psi(q(4))), 4),
        ))
        assert expand_combo(combo, 30) == expand_combo(want, 30)
        assert len(combo) == 2

    def test_one_dimensional_dissection(self):
        a, b = sym("a") * q(), q() / sym("a")
        combo = decompose([ThetaFactor(a, b)], [[2]])
        want = ThetaCombo((
            ComboTerm(Monomial(), (ThetaFactor(a ** 3 * b, a * b ** 3),)),
            ComboTerm(a, (ThetaFactor(b / a, a ** 5 * b ** 3),)),
        ))
        assert same_terms(combo, want)

    def test_identity_matrix(self):
        fs = [theta_pair("a", 2, 1), theta_pair("b", 3, 1)]
        combo = decompose(fs, [[1, 0], [0, 1]])
        assert len(combo) == 1
        assert combo.terms[0].coeff == Monomial()
        assert combo.terms[0].factors == tuple(fs)

    def test_equal_weight_pair(self):
        # ab = cd = q^2: f(a,b) f(c,d) = f(ad, bc) f(ac, bd) + a f(b/d, a^2 bd) f(b/c, a^2 bc)
        a, b = sym("a") * q(), q() / sym("a")
        c, d = sym("c") * q(), q() / sym("c")
        combo = decompose([ThetaFactor(a, b), ThetaFactor(c, d)], SIMPLEST)
        want = ThetaCombo((
            ComboTerm(Monomial(), (ThetaFactor(a * d, b * c), ThetaFactor(a * c, b * d))),
            ComboTerm(a, (ThetaFactor(b / d, a * a * b * d), ThetaFactor(b / c, a * a * b * c))),
        ))
        assert same_terms(combo, want)
        assert expand_combo(combo, 20) == product_expansion([ThetaFactor(a, b), ThetaFactor(c, d)], 20)

    def test_rejects_non_orthogonal(self):
        with pytest.raises(DecompositionError):
            decompose([phi(q()), phi(q())], [[1, 1], [0, 1]])

    def test_rejects_undecomposable_factor(self):
        with pytest.raises(DecompositionError):
            decompose([ThetaFactor(-q(), q()), phi(q())], SIMPLEST)

    def test_rejects_size_mismatch(self):
        with pytest.raises(DecompositionError):
            decompose([phi(q())], SIMPLEST)

    def test_fallback_is_flagged(self):
        d = decompose_full([phi(q()), phi(q())], [[2, 0], [0, 2]], reps="theorem")
        assert d.fallback and d.cosets.kind == "general"
        assert expand_combo(d.combo, 20) == product_expansion([phi(q()), phi(q())], 20)

    def test_canonical_term_order(self):
        combo = decompose([phi(q())] * 3, THREE)
        keys = [t.sort_key() for t in combo.terms]
        assert keys == sorted(keys)

    @settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
    @given(decomposition_input())
    def test_soundness(self, inp):
        factors, B = inp
        combo = decompose(factors, B)
        assert expand_combo(combo, 30) == product_expansion(factors, 30)

    @settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
    @given(decomposition_input())
    def test_coset_choice_independence(self, inp):
        factors, B = inp
        a = decompose(factors, B, reps="general")
        b = decompose(factors, B)
        assert expand_combo(a, 25) == expand_combo(b, 25)

    @settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
    @given(decomposition_input())
    def test_output_weights_match_diagonal(self, inp):
        factors, B = inp
        L = check_orthogonal(B, [f.weight for f in factors]).diagonal
        for t in decompose(factors, B).terms:
            for j, f in enumerate(t.factors):
                assert f.a * f.b == q(L[j])

    @settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
    @given(decomposition_input(), st.integers(0, 2))
    def test_row_sign_equivariance(self, inp, i):
        factors, B = inp
        assume(i < len(B))
        B2 = [row[:] for row in B]
        B2[i] = [-x for x in B2[i]]
        f2 = list(factors)
        f2[i] = factors[i].swapped()
        assert expand_combo(decompose(f2, B2), 25) == expand_combo(decompose(factors, B), 25)


TWO = two_by_two_cases()


class TestStructure:
    def test_cases_exist(self):
        assert len(TWO) > 50

    @pytest.mark.parametrize("idx", range(0, len(TWO), max(1, len(TWO) // 60)))
    def test_two_factor_formula_term_for_term(self, idx):
        (l1, l2), B = TWO[idx]
        a, b = sym("a") * q(1), q(l1 - 1) / sym("a")
        c, d = sym("c") * q(1), q(l2 - 1) / sym("c")
        got = decompose([ThetaFactor(a, b), ThetaFactor(c, d)], B, reps="theorem", j=0)
        want = two_factor_formula(a, b, c, d, B)
        assert [term_key(t) for t in got.terms] == [term_key(t) for t in want.terms]

    def test_schroter_unit_case(self):
        B, l = schroter_matrix("classic", a=1, b=1)
        assert B == [[1, -1], [1, 1]] and tuple(l) == (1, 1)
        x, y = sym("x"), sym("y")
        fs = schroter_factors(l, x, y)
        # the sum runs over powers of y, i.e. representatives r e_2
        got = decompose(list(fs), B, reps="theorem", j=1)

        def T(z, Q):
            return ThetaFactor(z * Q, Q / z)

        # n = 0, 1 of y^n q^(n^2) T(x y q^(2n); q^2) T(x^-1 y q^(2n); q^2)
        want = ThetaCombo(tuple(
            ComboTerm(y ** n * q(n * n), (T(x * y * q(2 * n), q(2)), T(y / x * q(2 * n), q(2))))
            for n in range(2)
        )).sorted()
        assert len(got) == 2
        assert [term_key(t) for t in got.terms] == [term_key(t) for t in want.terms]


class TestSumDiff:
    a, b = sym("a") * q(), q() / sym("a")
    c, d = sym("c") * q(), q() / sym("c")

    def factors(self):
        return [ThetaFactor(self.a, self.b), ThetaFactor(self.c, self.d)]

    def negated(self):
        return [ThetaFactor(-self.a, -self.b), ThetaFactor(-self.c, -self.d)]

    def test_sum_mode(self):
        a, b, c, d = self.a, self.b, self.c, self.d
        got = decompose_sum_diff(self.factors(), SIMPLEST, "sum")
        assert same_terms(got, ThetaCombo((ComboTerm(Monomial(), (ThetaFactor(a * d, b * c), ThetaFactor(a * c, b * d)), 2),)))
        want = product_expansion(self.factors(), 20) + product_expansion(self.negated(), 20)
        assert expand_combo(got, 20) == want

    def test_diff_mode(self):
        got = decompose_sum_diff(self.factors(), SIMPLEST, "diff")
        assert len(got) == 1 and got.terms[0].coeff == self.a and got.terms[0].scale == 2
        want = product_expansion(self.factors(), 20) - product_expansion(self.negated(), 20)
        assert expand_combo(got, 20) == want

    def test_sum_plus_diff(self):
        s = decompose_sum_diff(self.factors(), SIMPLEST, "sum")
        t = decompose_sum_diff(self.factors(), SIMPLEST, "diff")
        assert expand_combo(s + t, 20) == product_expansion(self.factors(), 20).scale(2)

    def test_odd_column_rejected(self):
        with pytest.raises(DecompositionError):
            decompose_sum_diff([phi(q())] * 3, THREE, "sum")


class TestPresets:
    def test_classic(self):
        assert schroter_matrix("classic", a=1, b=1) == ([[1, -1], [1, 1]], (1, 1))

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_general_two_one(self, k):
        B, _ = schroter_matrix("general", a=1, b=k, k1=2, k2=1)
        assert B == [[1, -2 * k], [2, 1]]

    def test_bbg_reduces_to_classic(self):
        B, _ = schroter_matrix("signed_m", alpha=1, beta=1, m=2)
        assert B == [[1, -1], [1, 1]]

    def test_side_conditions(self):
        with pytest.raises(DecompositionError):
            schroter_matrix("divided_k1_k2", a=3, b=1, k1=1, k2=2)
        with pytest.raises(DecompositionError):
            schroter_matrix("classic", a=0, b=1)
        with pytest.raises(DecompositionError):
            schroter_matrix("nope")

    @pytest.mark.parametrize("preset,params", [
        ("classic", dict(a=2, b=3)),
        ("general", dict(a=1, b=2, k1=2, k2=1)),
        ("mult_k", dict(a=2, b=1, k=2)),
        ("divided_k1_k2", dict(a=2, b=1, k1=2, k2=2)),
        ("scaled_k1_k2", dict(a=1, b=1, k1=1, k2=2)),
        ("three_parameter", dict(alpha=1, beta=1, gamma=2)),
        ("signed_m", dict(alpha=1, beta=2, m=3)),
        ("z_sum_b", dict(k=2)),
    ])
    def test_presets_decompose_soundly(self, preset, params):
        B, l = schroter_matrix(preset, **params)
        fs = list(schroter_factors(l, sym("x"), sym("y")))
        combo = decompose(fs, B)
        assert len(combo) == abs(det(B))
        assert expand_combo(combo, 24) == product_expansion(fs, 24)


class TestQuadForm:
    HEX = [[1, Fraction(1, 2)], [Fraction(1, 2), 1]]

    def test_hexagonal(self):
        combo = quadform_decompose(self.HEX, SIMPLEST)
        want = ThetaCombo((
            ComboTerm(Monomial(), (phi(q()), phi(q(3)))),
            ComboTerm(q(), (psi(q(2)), psi(q(6))), 4),
        ))
        assert expand_combo(combo, 30) == expand_combo(want, 30)

    def test_diagonal_identity(self):
        combo = quadform_decompose([[1, 0], [0, 2]], [[1, 0], [0, 1]])
        assert len(combo) == 1
        assert expand_combo(combo, 20) == product_expansion([phi(q()), phi(q(2))], 20)

    def test_doubled_form(self):
        Q = [[2, 1], [1, 2]]
        combo = quadform_decompose(Q, SIMPLEST)
        assert expand_combo(combo, 20) == expand_lattice_sum(quadform_sum(Q), 20)

    def test_fq2_squared_form_with_character(self):
        Q = [[2, 1], [1, 2]]
        combo = quadform_decompose(Q, SIMPLEST, linear=[0, 1], parity=[1, 0])
        assert expand_combo(combo, 20) == expand_lattice_sum(quadform_sum(Q, [0, 1], [1, 0]), 20)

    def test_rejects_non_diagonalizing(self):
        with pytest.raises(DecompositionError):
            quadform_decompose(self.HEX, [[1, 0], [0, 1]])
