from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from cuspfields.cuspcore import IntegerMatrix2x2, sigma_for_cusp
from cuspfields.etaforms import corpus_form, make_context
from cuspfields.recognize import (CyclotomicElement, certify_cusp, cyclotomic_polynomial,
                                  default_denominator_bound, euler_phi, lsq_fixed_denominator,
                                  recognize_value, target_precision)

CTX = make_context(160)
MODULI = [1, 2, 3, 4, 5, 6, 8, 9, 10, 12, 16, 18]


@st.composite
def elements(draw, M=None, max_den=12, max_num=6):
    M = M or draw(st.sampled_from(MODULI))
    n = euler_phi(M)
    den = draw(st.integers(1, max_den))
    nums = draw(st.lists(st.integers(-max_num, max_num), min_size=n, max_size=n))
    return CyclotomicElement(M, tuple(Fraction(v, den) for v in nums))


class TestCyclotomic:
    @pytest.mark.parametrize("M", range(1, 61))
    def test_polynomial_matches_sympy(self, M):
        x = sympy.Symbol("x")
        ref = sympy.Poly(sympy.cyclotomic_poly(M, x), x).all_coeffs()[::-1]
        assert list(cyclotomic_polynomial(M)) == ref
        assert euler_phi(M) == sympy.totient(M)

    def test_embed_examples(self):
        assert abs(CyclotomicElement(1, (Fraction(1, 2),)).embed(CTX) - 0.5) < 1e-40
        assert abs(CyclotomicElement(4, (0, 1)).embed(CTX) - 1j) < 1e-40
        golden = CyclotomicElement(5, (-1, 0, -1, -1))
        assert abs(golden.embed(CTX) - (CTX.sqrt(5) - 1) / 2) < 1e-40
        # zeta + zeta^4 rewritten in the power basis
        assert CyclotomicElement.from_exponents(5, {1: 1, 4: 1}) == golden

    @given(st.sampled_from(MODULI), st.integers(-50, 50))
    def test_power_reduction(self, M, e):
        z = CyclotomicElement.from_exponents(M, {e: 1})
        assert abs(z.embed(CTX) - CTX.expjpi(CTX.mpf(2 * e) / M)) < 1e-40
        assert CyclotomicElement.from_exponents(M, {M: 1}) == CyclotomicElement.rational(M, 1)

    @given(st.data())
    def test_ring_homomorphism(self, data):
        M = data.draw(st.sampled_from(MODULI))
        a, b = data.draw(elements(M)), data.draw(elements(M))
        assert abs((a * b).embed(CTX) - a.embed(CTX) * b.embed(CTX)) < 1e-35
        assert abs((a + b).embed(CTX) - a.embed(CTX) - b.embed(CTX)) < 1e-35

    @given(st.data())
    def test_lift_preserves_value(self, data):
        a = data.draw(elements())
        M2 = a.M * data.draw(st.integers(1, 4))
        assert abs(a.lift(M2).embed(CTX) - a.embed(CTX)) < 1e-35
        if a.M > 1:
            with pytest.raises(ValueError):
                a.lift(a.M * 7 + 1)

    def test_json(self):
        v = CyclotomicElement(12, (Fraction(1, 3), 0, -2, Fraction(5, 7)))
        assert CyclotomicElement.from_json(v.to_json()) == v


class TestRecognizeValue:
    def test_examples(self):
        r = recognize_value(0.5, 1e-15, 1, 2, 1e-8, CTX)
        assert r.ok and r.element.coords == (Fraction(1, 2),)
        v = CyclotomicElement(5, (-1, 0, -1, -1))
        r = recognize_value(v.embed(CTX) + 1e-12, 1e-12, 5, 10, 1e-10, CTX)
        assert r.ok and r.element == v and r.residual <= 1e-10
        assert not recognize_value(CTX.pi, 1e-30, 12, 100, 1e-8, CTX).ok

    def test_precondition(self):
        with pytest.raises(ValueError):
            recognize_value(0.5, 1e-9, 1, 2, 1e-8, CTX)

    @given(st.data())
    def test_round_trip(self, data):
        v = data.draw(elements())
        delta = data.draw(st.floats(-1e-12, 1e-12)) * (1 + 1j) / 2
        r = recognize_value(v.embed(CTX) + delta, 1e-12, v.M, 12, 1e-10, CTX)
        assert r.ok and r.element == v

    @given(st.sampled_from(MODULI), st.floats(-3, 3), st.floats(-3, 3))
    def test_soundness(self, M, re, im):
        x = CTX.mpc(re, im) + CTX.mpf(1) / CTX.pi ** 3
        r = recognize_value(x, 1e-30, M, 50, 1e-8, CTX)
        if r.ok:
            assert abs(r.element.embed(CTX) - x) <= 1e-8
            assert r.residual <= 1e-8

    @given(st.data())
    def test_monotone_in_modulus(self, data):
        v = data.draw(elements(max_den=6, max_num=4))
        M2 = v.M * data.draw(st.sampled_from([1, 2, 3]))
        if euler_phi(M2) > 12:
            return
        x = v.embed(CTX)
        r1 = recognize_value(x, 1e-40, v.M, 6, 1e-10, CTX)
        r2 = recognize_value(x, 1e-40, M2, 6, 1e-10, CTX)
        assert r1.ok and r2.ok and r2.element == r1.element.lift(M2)

    def test_lsq_diagnostic(self):
        v = CyclotomicElement(8, (Fraction(1, 4), 0, Fraction(-3, 4), Fraction(1, 2)))
        d = lsq_fixed_denominator(v.embed(CTX), 8, 4, CTX)
        assert d.status == "diagnostic" and d.residual < 1.0
        assert lsq_fixed_denominator(CTX.mpf("0.75"), 1, 4, CTX).element.coords == (Fraction(3, 4),)


class TestVerify:
    def test_fricke_rational(self):
        f = corpus_form("11a")
        _, rep = certify_cusp(f, IntegerMatrix2x2(0, -1, 1, 0), M=1, n_max=12)
        assert rep.all_recognized and rep.max_residual < 1e-8
        for n, r in rep.entries:
            assert r.element.coords == (Fraction(-f.a(n), 11),)

    def test_20a_half(self):
        f = corpus_form("20a")
        s = sigma_for_cusp(1, 2)
        _, rep = certify_cusp(f, s, M=10, n_max=8)
        assert rep.all_recognized
        assert rep.to_json()["all_recognized"] is True

    def test_20a_half_over_Q_is_reported(self):
        _, rep = certify_cusp(corpus_form("20a"), sigma_for_cusp(1, 2), M=1, n_max=4)
        # exploratory: failures are reported, not raised
        assert rep.failures() == [n for n, r in rep.entries if not r.ok]

    def test_defaults(self):
        assert default_denominator_bound(11, 2, 11) == 1331
        assert target_precision(16, 2048, 100) < target_precision(4, 2048, 100)
