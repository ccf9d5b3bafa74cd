"""Cusps of Gamma_0(N): representatives, widths, scaling matrices, field bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .numberfield import _xgcd


class NotUnimodularError(ValueError):
    pass


@dataclass(frozen=True)
class IntegerMatrix2x2:
    a: int
    b: int
    c: int
    d: int

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def is_sl2(self) -> bool:
        return self.det == 1

    def __matmul__(self, o: "IntegerMatrix2x2") -> "IntegerMatrix2x2":
        return IntegerMatrix2x2(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                                self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def adjugate(self) -> "IntegerMatrix2x2":
        return IntegerMatrix2x2(self.d, -self.b, -self.c, self.a)

    def inverse(self) -> "IntegerMatrix2x2":
        if abs(self.det) != 1:
            raise NotUnimodularError("matrix is not invertible over Z")
        adj = self.adjugate()
        if self.det == 1:
            return adj
        return IntegerMatrix2x2(-adj.a, -adj.b, -adj.c, -adj.d)

    def in_gamma0(self, N: int) -> bool:
        return self.det == 1 and self.c % N == 0

    def to_list(self) -> list[int]:
        return [self.a, self.b, self.c, self.d]

    @classmethod
    def from_list(cls, entries) -> "IntegerMatrix2x2":
        a, b, c, d = (int(x) for x in entries)
        return cls(a, b, c, d)

    @classmethod
    def identity(cls) -> "IntegerMatrix2x2":
        return cls(1, 0, 0, 1)

    def __str__(self):
        return f"({self.a} {self.b}; {self.c} {self.d})"


@dataclass(frozen=True)
class CuspDatum:
    """The cusp ``a/L`` of ``Gamma_0(N)``; infinity is the row ``a=1, L=N``."""
    N: int
    a: int
    L: int
    width: int
    sigma: IntegerMatrix2x2 = field(compare=False)
    field_bound: int = field(compare=False)

    @property
    def is_infinity(self) -> bool:
        return self.L == self.N

    @property
    def label(self) -> str:
        return "oo" if self.is_infinity else f"{self.a}/{self.L}"

    def to_json(self) -> dict:
        return {"a": self.a, "L": self.L, "width": self.width,
                "sigma": self.sigma.to_list(), "N_prime": self.field_bound}


def cusp_width(N: int, L: int) -> int:
    return N // math.gcd(L * L, N)


def sigma_for_cusp(a: int, L: int) -> IntegerMatrix2x2:
    """A matrix in SL_2(Z) sending infinity to ``a/L``.

    Among the solutions ``(a b; L d)`` the one with smallest ``|d|`` is
    returned, with ``d > 0`` preferred on ties.
    """
    if math.gcd(a, L) != 1:
        raise ValueError(f"gcd({a}, {L}) != 1")
    if L == 0:
        return IntegerMatrix2x2(a, 0, 0, a)
    m = abs(L)
    _, u, _ = _xgcd(a % m, m)
    d = u % m
    if 2 * d > m:
        d -= m
    num = a * d - 1
    if num % L:
        raise ArithmeticError("extended gcd produced no inverse")
    return IntegerMatrix2x2(a, num // L, L, d)


def _representative(r: int, g: int, L: int) -> int:
    a = r
    while math.gcd(a, L) != 1:
        a += g
    return a


def enumerate_cusps(N: int) -> list[CuspDatum]:
    """One representative per Gamma_0(N)-orbit of cusps, ordered by (L, a).

    For each divisor ``L`` of ``N`` the classes are the units modulo
    ``gcd(L, N/L)``; the smallest non-negative lift coprime to ``L`` is used.
    Infinity (``L = N``) carries the identity as its scaling matrix.
    """
    if N < 1:
        raise ValueError("level must be positive")
    out = []
    for L in (x for x in range(1, N + 1) if N % x == 0):
        if L == N:
            sigma = IntegerMatrix2x2.identity()
            out.append(CuspDatum(N, 1, N, 1, sigma, classical_field_bound(N, sigma)))
            continue
        g = math.gcd(L, N // L)
        for r in range(g):
            if math.gcd(r, g) != 1:
                continue
            a = _representative(r, g, L)
            sigma = sigma_for_cusp(a, L)
            out.append(CuspDatum(N, a, L, cusp_width(N, L), sigma,
                                 classical_field_bound(N, sigma)))
    out.sort(key=lambda c: (c.L, c.a))
    return out


def cusp_count(N: int) -> int:
    return sum(_totient(math.gcd(d, N // d)) for d in range(1, N + 1) if N % d == 0)


def _totient(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def classical_field_bound(N: int, sigma: IntegerMatrix2x2) -> int:
    """``N / gcd(c*d, N)``, using ``gcd(0, N) = N``."""
    if sigma.det != 1:
        raise NotUnimodularError(f"det {sigma} = {sigma.det} != 1")
    return N // math.gcd(sigma.c * sigma.d, N)


def brute_force_width(N: int, sigma: IntegerMatrix2x2) -> int:
    """Smallest ``m > 0`` with ``sigma (1 m; 0 1) sigma^{-1}`` in Gamma_0(N), by search."""
    if sigma.det != 1:
        raise NotUnimodularError("sigma must lie in SL_2(Z)")
    inv = sigma.inverse()
    for m in range(1, N + 1):
        conj = sigma @ IntegerMatrix2x2(1, m, 0, 1) @ inv
        if conj.in_gamma0(N):
            return m
    raise AssertionError("translation by N always lies in the conjugate group")


def conjugate_diagonal(sigma: IntegerMatrix2x2, alpha: int) -> IntegerMatrix2x2:
    """``sigma diag(alpha, 1) sigma^{-1}`` for ``sigma`` in SL_2(Z)."""
    return sigma @ IntegerMatrix2x2(alpha, 0, 0, 1) @ sigma.inverse()


def conjugation_check_classical(N: int, sigma: IntegerMatrix2x2, alpha: int) -> bool:
    """Whether ``sigma diag(alpha, 1) sigma^{-1}`` lies in ``K_p(p^{n_p})`` for all ``p | N``.

    Globally this means the lower-left entry is divisible by ``N`` and the
    upper-left entry is coprime to ``N`` (integrality is automatic).
    """
    if math.gcd(alpha, N) != 1:
        raise ValueError(f"alpha={alpha} is not coprime to N={N}")
    if sigma.det != 1:
        raise NotUnimodularError("sigma must lie in SL_2(Z)")
    m = conjugate_diagonal(sigma, alpha)
    return m.c % N == 0 and math.gcd(m.a, N) == 1


def parse_cusp(text: str) -> tuple[int, int]:
    """``"a/L"`` to a pair; ``"oo"``/``"inf"``/``"1/0"`` give ``(1, 0)``."""
    t = text.strip().lower()
    if t in ("oo", "inf", "infinity", "∞"):
        return 1, 0
    if "/" in t:
        a, L = t.split("/")
        a, L = int(a), int(L)
    else:
        a, L = int(t), 1
    if L < 0:
        a, L = -a, -L
    if math.gcd(a, L) != 1:
        raise ValueError(f"cusp {text!r} is not in lowest terms")
    return a, L
