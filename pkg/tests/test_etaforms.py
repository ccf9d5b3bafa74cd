import math

import pytest
import sympy
from hypothesis import given, strategies as st

from cuspfields.etaforms import (CORPUS, EtaError, EtaQuotient, NewformRecord, TailBoundError,
                                 corpus_form, corpus_quotient, eta_power, eta_series, evaluate,
                                 expand, load_form, make_context, tail_bound, terms_for_tail)


def naive_product(factors, T):
    """q^s prod (1 - q^{mn})^{r_m} by repeated truncated multiplication (no recurrences)."""
    s = sum(m * r for m, r in factors) // 24
    series = [1] + [0] * T
    for m, r in factors:
        for n in range(1, T // m + 1):
            e = m * n
            for _ in range(abs(r)):
                if r > 0:   # multiply by (1 - q^e)
                    for i in range(T, e - 1, -1):
                        series[i] -= series[i - e]
                else:       # divide by (1 - q^e): multiply by 1 + q^e + q^2e + ...
                    for i in range(e, T + 1):
                        series[i] += series[i - e]
    out = [0] * (T + 1)
    for i in range(T + 1 - s):
        out[i + s] = series[i]
    return out


def eta_mp(ctx, tau):
    return ctx.expjpi(tau / 12) * ctx.qp(ctx.expjpi(2 * tau))


class TestSeries:
    def test_pentagonal(self):
        assert eta_series(8) == [1, -1, -1, 0, 0, 1, 0, 1, 0]
        # 12 = k(3k-1)/2 with k = 3, so the sign is (-1)^3
        assert eta_series(12)[0] == 1 and eta_series(12)[12] == -1
        with pytest.raises(ValueError):
            eta_series(0)

    def test_against_direct_product(self):
        direct = [1] + [0] * 300
        for n in range(1, 301):
            for i in range(300, n - 1, -1):
                direct[i] -= direct[i - n]
        assert eta_series(300) == direct

    @given(st.integers(-30, 30).filter(bool))
    def test_power_matches_repeated_product(self, r):
        T = 40
        assert eta_power(r, T) == _power_oracle(r, T)


def _power_oracle(r, T):
    """prod (1 - q^n)^r by repeated multiplication or geometric-series division."""
    base = [1] + [0] * T
    for n in range(1, T + 1):
        for _ in range(abs(r)):
            if r > 0:
                for i in range(T, n - 1, -1):
                    base[i] -= base[i - n]
            else:
                for i in range(n, T + 1):
                    base[i] += base[i - n]
    return base


class TestQuotient:
    def test_validation(self):
        with pytest.raises(EtaError):
            EtaQuotient(((1, 2), (11, 2)), 10)      # 11 does not divide 10
        with pytest.raises(EtaError):
            EtaQuotient(((1, 2), (2, 2)), 2)        # sum m r = 6
        with pytest.raises(EtaError):
            EtaQuotient(((1, 12),), 1)              # weight 6 is fine but 12 is not 0 mod 24
        with pytest.raises(EtaError):
            EtaQuotient(((2, 1), (1, 1)), 2)        # odd weight sum

    @pytest.mark.parametrize("label", sorted(CORPUS))
    def test_corpus_conditions(self, label):
        eq = corpus_quotient(label)
        assert eq.is_cuspidal()
        assert eq.order_at_cusp(eq.level) == eq.leading_exponent

    def test_expand_errors(self):
        with pytest.raises(EtaError):
            expand(corpus_quotient("11a"), 0)


class TestCorpus:
    def test_delta_golden(self):
        gold = naive_product([(1, 24)], 64)
        assert corpus_form("1a", 64).coeffs == tuple(gold)
        assert corpus_form("1a").a(2) == -24
        # Ramanujan's congruence tau(n) = sigma_11(n) mod 691
        f = corpus_form("1a")
        for n in range(1, 60):
            assert (f.a(n) - sympy.divisor_sigma(n, 11)) % 691 == 0

    def test_11a(self):
        f = corpus_form("11a")
        assert f.coeffs[1:11] == (1, -2, -1, 2, 1, 2, -2, 0, -2, -2)

    @pytest.mark.parametrize("label", sorted(CORPUS))
    def test_against_direct_product(self, label):
        N, facs = CORPUS[label]
        assert corpus_form(label, 120).coeffs == tuple(naive_product(facs, 120))

    @pytest.mark.parametrize("label", sorted(CORPUS))
    def test_hecke_and_deligne(self, label):
        f = corpus_form(label, 200)
        assert f.is_normalized
        assert f.multiplicativity_failures(200) == []
        for p in sympy.primerange(2, 101):
            assert abs(f.a(p)) <= 2 * p ** ((f.weight - 1) / 2)

    @pytest.mark.parametrize("label", sorted(CORPUS))
    def test_json_round_trip(self, label):
        f = corpus_form(label, 60)
        g = NewformRecord.from_json(f.to_json())
        assert g == f and g.eta == f.eta
        assert NewformRecord.from_json({**f.to_json(), "coeffs": None}, 60) == f

    def test_extension_and_loading(self):
        f = corpus_form("20a", 50)
        assert f.extended(80).coeffs[:51] == f.coeffs
        assert load_form("27a").level == 27
        assert load_form("32a.json").weight == 2
        with pytest.raises(FileNotFoundError):
            load_form("nonsense")
        bare = NewformRecord("x", 11, 2, f.coeffs[:10])
        with pytest.raises(TailBoundError):
            bare.extended(20)


class TestEvaluate:
    def test_delta_at_i(self):
        ctx = make_context(160)
        f = corpus_form("1a")
        a = evaluate(f, 1j, T=50, ctx=ctx).value
        b = evaluate(f, 1j, T=100, ctx=ctx).value
        assert abs(a - b) < 1e-30
        partial = sum(f.a(n) * ctx.exp(-2 * ctx.pi * n) for n in range(1, 101))
        assert abs(b - partial) < 1e-40

    def test_deep_cusp(self):
        ctx = make_context(80)
        for label in CORPUS:
            ev = evaluate(corpus_form(label), 1e6j, T=10, ctx=ctx)
            assert ctx.log(abs(ev.value)) <= ctx.log(2) - 2 * ctx.pi * 1e6

    @pytest.mark.parametrize("label", sorted(CORPUS))
    def test_matches_eta_product(self, label):
        ctx = make_context(120)
        N, facs = CORPUS[label]
        f = corpus_form(label)
        z = ctx.mpc("0.137", "0.31")
        direct = ctx.fprod(eta_mp(ctx, m * z) ** r for m, r in facs)
        ev = evaluate(f, z, tol=1e-30, ctx=ctx)
        assert abs(ev.value - direct) <= ev.tail + 1e-30

    def test_tail_bound_is_an_upper_bound(self):
        ctx = make_context(120)
        for label in CORPUS:
            f = corpus_form(label)
            z = ctx.mpc("0.3", "0.08")
            full = evaluate(f, z, T=400, ctx=ctx)
            for T in (20, 60, 120):
                part = evaluate(f, z, T=T, ctx=ctx)
                assert abs(full.value - part.value) <= part.tail + full.tail

    def test_linearity(self):
        ctx = make_context(100)
        f = NewformRecord("f", 4, 2, (0, 1, 2, 0, -3, 5))
        g = NewformRecord("g", 4, 2, (0, 0, 1, 1, 7, -2))
        z = ctx.mpc("0.2", "0.4")
        lhs = evaluate(f + g, z, ctx=ctx).value
        rhs = evaluate(f, z, ctx=ctx).value + evaluate(g, z, ctx=ctx).value
        assert abs(lhs - rhs) < 1e-25

    def test_tolerance_signalled(self):
        f = corpus_form("11a")
        with pytest.raises(TailBoundError) as info:
            evaluate(f, 0.05j, T=10, tol=1e-20)
        assert info.value.needed_terms > 10
        with pytest.raises(ValueError):
            evaluate(f, 0.001j)

    def test_terms_for_tail_is_minimal(self):
        for k, y, tol in [(2, 0.1, 1e-20), (12, 0.5, 1e-40), (2, 0.01, 1e-10)]:
            T = terms_for_tail(k, y, tol)
            assert tail_bound(k, T, y) <= tol < tail_bound(k, T - 1, y)

    def test_tail_bound_dominates_series(self):
        for k, T, y in [(2, 10, 0.1), (12, 40, 0.3), (2, 200, 0.02)]:
            exact = math.fsum(n ** ((k + 1) / 2) * math.exp(-2 * math.pi * n * y)
                              for n in range(T + 1, 20 * T + 2000))
            assert exact <= tail_bound(k, T, y)
