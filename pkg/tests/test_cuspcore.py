import math
import random

import pytest
from hypothesis import given, strategies as st

from cuspfields.cuspcore import (IntegerMatrix2x2, NotUnimodularError, brute_force_width,
                                 classical_field_bound, conjugate_diagonal,
                                 conjugation_check_classical, cusp_count, cusp_width,
                                 enumerate_cusps, parse_cusp, sigma_for_cusp)


def random_sl2(rng, bound=50):
    while True:
        a, c = rng.randint(-bound, bound), rng.randint(-bound, bound)
        if math.gcd(a, c) != 1:
            continue
        # b, d from the extended gcd, shifted by a random multiple of (a, c)
        g, x, y = _eg(a, c)
        d, b = x, -y
        t = rng.randint(-3, 3)
        b, d = b + t * a, d + t * c
        if max(abs(b), abs(d)) <= bound:
            return IntegerMatrix2x2(a, b, c, d)


def _eg(a, b):
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, x, y = _eg(b, a % b)
    return g, y, x - (a // b) * y


class TestMatrices:
    def test_ops(self):
        S = IntegerMatrix2x2(0, -1, 1, 0)
        assert S.det == 1 and (S @ S @ S @ S) == IntegerMatrix2x2.identity()
        assert S @ S.inverse() == IntegerMatrix2x2.identity()
        with pytest.raises(NotUnimodularError):
            IntegerMatrix2x2(2, 0, 0, 1).inverse()


class TestCusps:
    @pytest.mark.parametrize("N,count", [(1, 1), (11, 2), (20, 6), (27, 6), (32, 8), (36, 12)])
    def test_counts(self, N, count):
        assert len(enumerate_cusps(N)) == count == cusp_count(N)

    def test_level_11(self):
        cs = enumerate_cusps(11)
        assert {(c.label, c.width) for c in cs} == {("oo", 1), ("0/1", 11)}

    @pytest.mark.parametrize("N", range(1, 121))
    def test_data_invariants(self, N):
        cs = enumerate_cusps(N)
        assert len(cs) == cusp_count(N)
        for c in cs:
            s = c.sigma
            assert s.det == 1
            assert c.width == cusp_width(N, c.L) if not c.is_infinity else c.width == 1
            assert c.field_bound == classical_field_bound(N, s)
            assert N % c.field_bound == 0
            if not c.is_infinity:
                assert (s.a, s.c) == (c.a, c.L)
        assert cs == sorted(cs, key=lambda c: (c.L, c.a))

    @pytest.mark.parametrize("N", [12, 20, 36, 48, 50, 72])
    def test_representatives_inequivalent(self, N):
        """No two listed cusps are related by an element of Gamma_0(N), found by search."""
        cs = [c for c in enumerate_cusps(N)]
        pts = [(c.a, c.L) if not c.is_infinity else (1, 0) for c in cs]
        seen = set()
        for a, L in pts:
            key = _orbit_key(N, a, L)
            assert key not in seen
            seen.add(key)

    def test_sigma_examples(self):
        assert sigma_for_cusp(1, 0) == IntegerMatrix2x2.identity()
        assert sigma_for_cusp(0, 1) == IntegerMatrix2x2(0, -1, 1, 0)
        assert sigma_for_cusp(1, 2) == IntegerMatrix2x2(1, 0, 2, 1)
        with pytest.raises(ValueError):
            sigma_for_cusp(2, 4)

    @given(st.integers(-200, 200), st.integers(1, 200))
    def test_sigma_first_column(self, a, L):
        if math.gcd(a, L) != 1:
            return
        s = sigma_for_cusp(a, L)
        assert s.det == 1 and (s.a, s.c) == (a, L)
        assert 2 * abs(s.d) <= L

    def test_parse(self):
        assert parse_cusp("oo") == (1, 0)
        assert parse_cusp("1/2") == (1, 2)
        assert parse_cusp("3") == (3, 1)
        assert parse_cusp("1/-2") == (-1, 2)
        with pytest.raises(ValueError):
            parse_cusp("2/4")


def _orbit_key(N, a, L):
    """Smallest reduced image of a/L under a box of Gamma_0(N) elements.

    Images of inequivalent cusps are disjoint, so distinct keys are exactly
    what the listed representatives must produce.
    """
    best = None
    for c in range(0, 4 * N + 1, N):
        for d in range(-4 * N, 4 * N + 1):
            if math.gcd(c, d) != 1:
                continue
            g, x, y = _eg(d, c)
            A, B = x, -y  # A d - B c = 1
            num, den = A * a + B * L, c * a + d * L
            if den < 0:
                num, den = -num, -den
            if den == 0:
                num = 1
            else:
                num %= den
                if math.gcd(num, den) != 1:
                    continue
            cand = (den, num)
            if best is None or cand < best:
                best = cand
    return best


class TestBounds:
    def test_examples(self):
        assert classical_field_bound(20, IntegerMatrix2x2(1, 0, 2, 1)) == 10
        for N in (1, 7, 30):
            assert classical_field_bound(N, IntegerMatrix2x2(0, -1, 1, 0)) == 1
        assert classical_field_bound(11, IntegerMatrix2x2(1, 0, 1, 1)) == 11
        with pytest.raises(NotUnimodularError):
            classical_field_bound(11, IntegerMatrix2x2(2, 0, 0, 1))

    def test_width_examples(self):
        assert brute_force_width(20, sigma_for_cusp(1, 2)) == 5
        assert brute_force_width(11, sigma_for_cusp(0, 1)) == 11
        assert brute_force_width(20, IntegerMatrix2x2.identity()) == 1

    def test_degenerate_bounds(self):
        rng = random.Random(3)
        for _ in range(300):
            s = random_sl2(rng)
            N = rng.randint(1, 100)
            b = classical_field_bound(N, s)
            assert N % b == 0
            if s.c == 0 or s.d == 0:
                assert b == 1


class TestConjugation:
    def test_examples(self):
        s = IntegerMatrix2x2(1, 0, 2, 1)
        assert conjugate_diagonal(s, 11) == IntegerMatrix2x2(11, 0, 20, 1)
        assert conjugation_check_classical(20, s, 11)
        assert not conjugation_check_classical(20, s, 3)
        with pytest.raises(ValueError):
            conjugation_check_classical(20, s, 5)

    def test_alpha_one(self):
        rng = random.Random(5)
        for _ in range(100):
            assert conjugation_check_classical(rng.randint(1, 80), random_sl2(rng), 1)

    def test_sufficiency(self):
        """alpha = 1 mod N' and coprime to N always passes (N <= 100, |entries| <= 50)."""
        rng = random.Random(11)
        sigmas = [random_sl2(rng) for _ in range(500)]
        for N in range(1, 101, 7):
            for s in sigmas[::5]:
                Np = classical_field_bound(N, s)
                for alpha in range(1, 10 * N + 1, Np):
                    if math.gcd(alpha, N) == 1:
                        assert conjugation_check_classical(N, s, alpha)
