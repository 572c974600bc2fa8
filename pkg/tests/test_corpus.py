import math
from collections import Counter
from fractions import Fraction

import pytest

from thetaforge.corpus import CORPUS_ENV, corpus_list, lookup, summarize, verify, verify_all
from thetaforge.decompose import decompose
from thetaforge.expr import DslError
from thetaforge.series import Monomial
from thetaforge.theta import LatticeSum, ThetaCombo, ThetaFactor, expand_combo, expand_side

from helpers import HADAMARD, THREE

REPORT_FIELDS = {"name", "order", "status", "mismatch", "millis"}


def write_corpus(tmp_path, body, name="x.tf"):
    p = tmp_path / name
    p.write_text("thetaforge-dsl 1\n\n" + body)
    return str(p)


class TestLookup:
    def test_size(self):
        entries = corpus_list()
        assert len(entries) >= 45
        assert len({e.name for e in entries}) == len(entries)

    def test_quintuple(self):
        e = lookup("quintuple")
        lhs, rhs = e.sides(next(e.instances()))
        syms = {name for t in lhs.combo.terms for f in t.factors for name in f.x.symbols}
        assert syms == {"a"}

    def test_phi_squared(self):
        e = lookup("phi-squared")
        lhs, rhs = e.sides(next(e.instances()))
        assert len(rhs.combo.terms) == 2

    def test_eighth_power_shape(self):
        e = lookup("fq-eighth-power")
        lhs, rhs = e.sides(next(e.instances()))
        (t,) = lhs.combo.terms
        assert t.scale == 16 and len(t.factors) == 8
        assert all(f == ThetaFactor(-Monomial.q(), -Monomial.q(2)) for f in t.factors)
        (r,) = rhs.combo.terms
        (ls,) = r.factors
        assert isinstance(ls, LatticeSum)
        assert max(s.weight.degree() for s in ls.summands) == 3

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            lookup("no-such-entry")


class TestVerify:
    @pytest.mark.parametrize("name", ["quintuple", "septic-vanishing", "septuple", "sextuple", "fq2-squared-lattice", "hexagonal-form"])
    def test_selected_entries_pass(self, name):
        r = verify(lookup(name), 40)
        assert r.status == "pass", r.line()

    def test_parametrized_family(self):
        e = lookup("phi-phi-m")
        assert len(list(e.instances())) >= 4
        assert verify(e, 30).status == "pass"

    def test_eighth_power_routes(self):
        for name in ("fq-eighth-power", "fq-eighth-power-pipeline", "fq-eighth-power-product-pipeline"):
            assert verify(lookup(name), 30).status == "pass", name

    def test_discrepancy_entry(self):
        r = verify(lookup("fq2-squared-short"), 30)
        assert r.status == "paper-discrepancy"
        assert r.mismatch is not None

    def test_report_fields(self):
        r = verify(lookup("phi-squared"), 20)
        assert set(r.as_dict()) == REPORT_FIELDS
        assert r.as_dict()["mismatch"] is None


class TestSemantics:
    def test_literal_fails(self, tmp_path):
        path = write_corpus(tmp_path, "identity bad {\n  phi(q)^2 = phi(q^2)^2 + 4*q^2*psi(q^4)^2;\n}\n")
        (r,) = verify_all(20, path=path)
        assert r.status == "fail"
        assert r.mismatch.qexp == 1 and r.mismatch.lhs == 4 and r.mismatch.rhs == 0

    def test_discrepancy_needs_passing_correction(self, tmp_path):
        body = (
            "identity d {\n  status: paper-discrepancy;\n"
            "  phi(q)^2 = phi(q^2)^2 + 4*q^2*psi(q^4)^2;\n"
            "  corrected: phi(q)^2 = phi(q^2)^2 + 4*q*psi(q^4)^2;\n}\n"
            "identity e {\n  status: paper-discrepancy;\n"
            "  phi(q)^2 = phi(q^2)^2 + 4*q^2*psi(q^4)^2;\n"
            "  corrected: phi(q)^2 = phi(q^2)^2 + 3*q*psi(q^4)^2;\n}\n"
            "identity g {\n  status: paper-discrepancy;\n"
            "  phi(q)^2 = phi(q^2)^2 + 4*q*psi(q^4)^2;\n"
            "  corrected: phi(q)^2 = phi(q^2)^2 + 4*q*psi(q^4)^2;\n}\n"
        )
        d, e, g = verify_all(20, path=write_corpus(tmp_path, body))
        assert d.status == "paper-discrepancy"
        assert e.status == "fail"
        # a literal that holds is a plain pass even when marked
        assert g.status == "pass"

    def test_discrepancy_without_correction_rejected(self, tmp_path):
        path = write_corpus(tmp_path, "identity d {\n  status: paper-discrepancy;\n  phi(q) = phi(q);\n}\n")
        with pytest.raises(DslError):
            corpus_list(path)

    def test_env_override(self, tmp_path, monkeypatch):
        path = write_corpus(tmp_path, "identity only {\n  fq(q) = poch(q; q);\n}\n")
        monkeypatch.setenv(CORPUS_ENV, path)
        assert [e.name for e in corpus_list()] == ["only"]

    def test_parameter_reported_on_failure(self, tmp_path):
        body = "identity p {\n  param m = 1..3;\n  phi(q^{m}) = phi(q^{1});\n}\n"
        (r,) = verify_all(10, path=write_corpus(tmp_path, body))
        assert r.status == "fail"
        assert dict(r.params) == {"m": 2}

    def test_summary(self, tmp_path):
        body = "identity a {\n  fq(q) = poch(q; q);\n}\nidentity b {\n  fq(q) = poch(q^2; q);\n}\n"
        counts = summarize(verify_all(10, path=write_corpus(tmp_path, body)))
        assert counts == {"pass": 1, "fail": 1, "paper-discrepancy": 0, "total": 2}

    def test_parallel_matches_serial(self, tmp_path):
        body = "".join(f"identity e{i} {{\n  phi(q^{i})^2 = phi(q^{2*i})^2 + 4*q^{i}*psi(q^{4*i})^2;\n}}\n"
                       for i in range(1, 5))
        path = write_corpus(tmp_path, body)
        a = [r.as_dict() | {"millis": 0} for r in verify_all(20, path=path, jobs=1)]
        b = [r.as_dict() | {"millis": 0} for r in verify_all(20, path=path, jobs=2)]
        assert a == b


def sides_of(name, corrected=False):
    e = lookup(name)
    return e.sides(next(e.instances()), corrected)


def product_factors(side):
    (t,) = side.combo.terms
    return list(t.factors)


def reduce_factor(f):
    """Shift f(a, b) into 0 <= qexp(a) < weight and order the pair; returns (prefactor, pair)."""
    a, b = f.a, f.b
    ab = a * b
    n = -math.floor(Fraction(a.qexp) / ab.qexp)
    pre = a ** (n * (n + 1) // 2) * b ** (n * (n - 1) // 2)
    a, b = a * ab ** n, b * ab ** (-n)
    if (b.qexp, str(b)) < (a.qexp, str(a)):
        a, b = b, a
    return pre, (a, b)


def collect_terms(combo):
    """Integer multiplicity of each reduced theta product, dropping products with a factor f(-1, x) = 0."""
    out = Counter()
    for t in combo.terms:
        c, keys = t.coeff, []
        for f in t.factors:
            pre, pair = reduce_factor(f)
            c = c * pre
            keys.append(pair)
        if any(a == -Monomial() for a, _ in keys):
            continue
        out[(tuple(sorted(keys, key=str)), c.qexp)] += c.sign * t.scale
    return {k: v for k, v in out.items() if v}


class TestRederive:
    """Decompose the left-hand product with the matrix an entry cites and compare with its right side."""

    def test_phi_squared(self):
        lhs, rhs = sides_of("phi-squared")
        combo = decompose(product_factors(lhs), [[1, 1], [-1, 1]])
        assert expand_combo(combo, 40) == expand_side(rhs, 40)

    def test_weights_one_three(self):
        a, b = Monomial.symbol("x"), Monomial.q() / Monomial.symbol("x")
        c, d = Monomial.symbol("y") * Monomial.q(), Monomial.q(2) / Monomial.symbol("y")
        fs = [ThetaFactor(a, b), ThetaFactor(c, d)]
        combo = decompose(fs, [[2, 3], [-1, 2]])
        assert len(combo) == 7
        for t in combo.terms:
            assert [f.weight for f in t.factors] == [7, 21]
        assert expand_combo(combo, 20) == expand_combo(ThetaCombo.product(fs), 20)

    def test_septic_vanishing(self):
        # f(-1, -q) = 0, so the seven terms for weights (1, 3) collapse onto the three-term relation
        fs = [ThetaFactor(-Monomial(), -Monomial.q()), ThetaFactor(-Monomial(), -Monomial.q(3))]
        combo = decompose(fs, [[2, 3], [-1, 2]])
        lhs, _ = sides_of("septic-vanishing")
        want = collect_terms(lhs.combo)
        assert len(want) == 3
        assert collect_terms(combo) == {k: 2 * v for k, v in want.items()}

    def test_three_theta_det6(self):
        lhs, rhs = sides_of("three-theta-det6")
        combo = decompose(product_factors(lhs), THREE, reps="theorem")
        assert len(combo) == 6
        assert expand_combo(combo, 16) == expand_side(rhs, 16)

    def test_hadamard_general_cosets(self):
        lhs, rhs = sides_of("four-theta-hadamard", corrected=True)
        combo = decompose(product_factors(lhs), HADAMARD, reps="general")
        assert len(combo) == 16
        assert expand_combo(combo, 10) == expand_side(rhs, 10)

    def test_weights_one_one_two(self):
        lhs, rhs = sides_of("three-theta-det4")
        combo = decompose(product_factors(lhs), [[1, 1, 1], [1, -1, 1], [1, 0, -1]])
        assert len(combo) == 4
        assert expand_combo(combo, 16) == expand_side(rhs, 16)
