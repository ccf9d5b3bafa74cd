"""Eta-quotient newforms with exact integer q-expansions, and their evaluation.

An eta quotient ``prod eta(m z)^{r_m}`` equals ``q^s prod_m E(q^m)^{r_m}`` with
``E(q) = prod (1 - q^n)`` and ``s = sum m r_m / 24``.  Powers of ``E`` are
computed with the J.C.P. Miller recurrence, which only touches the
(pentagonal, hence sparse) nonzero coefficients of ``E``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import mpmath
import numpy as np

FORMS_DIR = Path(__file__).parent / "data" / "forms"
Y_MIN = 0.005
DEFAULT_PREC_BITS = 80


def default_prec_bits() -> int:
    raw = os.environ.get("CUSPFIELDS_PREC_BITS")
    if not raw:
        return DEFAULT_PREC_BITS
    bits = int(raw)
    if bits < 53:
        raise ValueError("CUSPFIELDS_PREC_BITS must be at least 53")
    return bits


def make_context(bits: int | None = None) -> mpmath.ctx_mp.MPContext:
    """A private mpmath context, so concurrent callers never share precision state."""
    ctx = mpmath.MPContext()
    ctx.prec = bits or default_prec_bits()
    return ctx


class EtaError(ValueError):
    pass


class TailBoundError(ArithmeticError):
    """The truncated series cannot meet the requested tolerance."""

    def __init__(self, message, bound=None, needed_terms=None):
        super().__init__(message)
        self.bound = bound
        self.needed_terms = needed_terms


def pentagonal_exponents(T: int):
    """Pairs ``(e, sign)`` with ``E(q) = sum sign q^e`` restricted to ``e <= T``."""
    out = [(0, 1)]
    k = 1
    while True:
        e1 = k * (3 * k - 1) // 2
        if e1 > T:
            break
        s = -1 if k % 2 else 1
        out.append((e1, s))
        e2 = k * (3 * k + 1) // 2
        if e2 <= T:
            out.append((e2, s))
        k += 1
    out.sort()
    return out


def eta_series(T: int) -> list[int]:
    """Coefficients of ``prod_{n>=1} (1 - q^n)`` for exponents ``0..T``."""
    if T < 1:
        raise ValueError("truncation must be at least 1")
    c = [0] * (T + 1)
    for e, s in pentagonal_exponents(T):
        c[e] = s
    return c


def eta_power(r: int, T: int) -> list[int]:
    """Coefficients of ``E(q)^r`` up to ``q^T`` (any integer ``r``)."""
    terms = [(e, s) for e, s in pentagonal_exponents(T) if e > 0]
    g = [0] * (T + 1)
    g[0] = 1
    for n in range(1, T + 1):
        acc = 0
        for k, fk in terms:
            if k > n:
                break
            acc += ((r + 1) * k - n) * fk * g[n - k]
        q, rem = divmod(acc, n)
        if rem:
            raise ArithmeticError("Miller recurrence left a remainder")
        g[n] = q
    return g


def _stretch(series: list[int], m: int, T: int) -> list[int]:
    out = [0] * (T + 1)
    for i, v in enumerate(series):
        if i * m > T:
            break
        out[i * m] = v
    return out


def _mul_trunc(a: list[int], b: list[int], T: int) -> list[int]:
    prod = np.convolve(np.array(a[: T + 1], dtype=object), np.array(b[: T + 1], dtype=object))
    return [int(x) for x in prod[: T + 1]]


@dataclass(frozen=True)
class EtaQuotient:
    factors: tuple[tuple[int, int], ...]
    level: int
    label: str = ""

    def __post_init__(self):
        facs = tuple(sorted((int(m), int(r)) for m, r in self.factors if r != 0))
        object.__setattr__(self, "factors", facs)
        if not facs:
            raise EtaError("an eta quotient needs at least one factor")
        if len({m for m, _ in facs}) != len(facs):
            raise EtaError("repeated eta factor")
        for m, _ in facs:
            if m < 1 or self.level % m:
                raise EtaError(f"eta({m}z) does not divide the level {self.level}")
        if sum(r for _, r in facs) % 2:
            raise EtaError("sum of exponents must be even")
        if self.weight <= 0 or self.weight % 2:
            raise EtaError(f"weight {self.weight} is not a positive even integer")
        if sum(m * r for m, r in facs) % 24:
            raise EtaError("sum m*r_m is not divisible by 24")
        if sum((self.level // m) * r for m, r in facs) % 24:
            raise EtaError("sum (N/m)*r_m is not divisible by 24")
        num = den = 1
        for m, r in facs:
            if r > 0:
                num *= m ** r
            else:
                den *= m ** (-r)
        if math.isqrt(num * den) ** 2 != num * den:
            raise EtaError("prod m^r_m is not a rational square")

    @property
    def weight(self) -> int:
        return sum(r for _, r in self.factors) // 2

    @property
    def leading_exponent(self) -> int:
        return sum(m * r for m, r in self.factors) // 24

    def order_at_cusp(self, L: int) -> Fraction:
        """Order of vanishing at a cusp with denominator ``L | N``, as a power of ``q``.

        This is Ligozat's formula ``(1/24) sum gcd(L, m)^2 r_m / m``; multiply by
        the width ``N / gcd(L^2, N)`` to measure it in the local parameter.
        """
        if self.level % L:
            raise ValueError(f"{L} does not divide {self.level}")
        return sum((Fraction(math.gcd(L, m) ** 2 * r, 24 * m) for m, r in self.factors),
                   Fraction(0))

    def is_holomorphic(self) -> bool:
        return all(self.order_at_cusp(L) >= 0 for L in range(1, self.level + 1)
                   if self.level % L == 0)

    def is_cuspidal(self) -> bool:
        return all(self.order_at_cusp(L) > 0 for L in range(1, self.level + 1)
                   if self.level % L == 0)

    def to_json(self):
        return [[m, r] for m, r in self.factors]


def expand(eq: EtaQuotient, T: int, label: str | None = None) -> "NewformRecord":
    """Exact coefficients ``a(1..T)`` of the eta quotient."""
    s = eq.leading_exponent
    if s < 1:
        raise EtaError(f"leading exponent {s} is not a positive integer")
    if T < s:
        raise EtaError(f"truncation {T} is below the leading exponent {s}")
    R = T - s
    prod = [1] + [0] * R
    for m, r in eq.factors:
        prod = _mul_trunc(prod, _stretch(eta_power(r, R // m), m, R), R)
    coeffs = [0] * (T + 1)
    coeffs[s:] = prod
    return NewformRecord(label or eq.label, eq.level, eq.weight, tuple(coeffs), eq)


@dataclass(frozen=True)
class NewformRecord:
    """A normalised form with rational integer coefficients; ``coeffs[0]`` is ``a(0) = 0``."""
    label: str
    level: int
    weight: int
    coeffs: tuple[int, ...]
    eta: EtaQuotient | None = field(default=None, compare=False)
    coefficient_field_degree: int = 1

    def __post_init__(self):
        if len(self.coeffs) < 2:
            raise ValueError("a record needs at least a(1)")
        if self.coeffs[0] != 0:
            raise ValueError("cusp forms have a(0) = 0")

    @property
    def truncation(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_normalized(self) -> bool:
        return self.coeffs[1] == 1

    def a(self, n: int) -> int:
        return self.coeffs[n]

    def extended(self, T: int) -> "NewformRecord":
        if T <= self.truncation:
            return self
        if self.eta is None:
            raise TailBoundError(f"{self.label}: {T} terms requested, only "
                                 f"{self.truncation} stored and no eta source", needed_terms=T)
        return expand(self.eta, T, self.label)

    def multiplicativity_failures(self, bound: int | None = None) -> list[tuple[int, int]]:
        """Coprime pairs ``(m, n)`` with ``mn <= bound`` where ``a(mn) != a(m) a(n)``."""
        bound = min(bound or self.truncation, self.truncation)
        bad = []
        for m in range(2, bound + 1):
            for n in range(m + 1, bound // m + 1):
                if math.gcd(m, n) == 1 and self.coeffs[m * n] != self.coeffs[m] * self.coeffs[n]:
                    bad.append((m, n))
        return bad

    def __add__(self, other: "NewformRecord") -> "NewformRecord":
        if (self.level, self.weight) != (other.level, other.weight):
            raise ValueError("can only add forms of equal level and weight")
        T = min(self.truncation, other.truncation)
        c = tuple(x + y for x, y in zip(self.coeffs[: T + 1], other.coeffs[: T + 1]))
        return NewformRecord(f"{self.label}+{other.label}", self.level, self.weight, c)

    def to_json(self, with_coeffs: bool = True) -> dict:
        out = {"label": self.label, "N": self.level, "k": self.weight,
               "eta": self.eta.to_json() if self.eta else None}
        if with_coeffs:
            out["coeffs"] = list(self.coeffs[1:])
        return out

    @classmethod
    def from_json(cls, data, T: int | None = None) -> "NewformRecord":
        if isinstance(data, (str, Path)):
            data = json.loads(Path(data).read_text())
        N, k = int(data["N"]), int(data["k"])
        eq = None
        if data.get("eta"):
            eq = EtaQuotient(tuple(tuple(x) for x in data["eta"]), N, data["label"])
            if eq.weight != k:
                raise EtaError(f"stored weight {k} disagrees with eta weight {eq.weight}")
        coeffs = data.get("coeffs")
        if coeffs:
            rec = cls(data["label"], N, k, (0, *map(int, coeffs)), eq)
            return rec.extended(T) if T else rec
        if eq is None:
            raise ValueError("record has neither coefficients nor an eta source")
        return expand(eq, T or 200, data["label"])


CORPUS: dict[str, tuple[int, tuple[tuple[int, int], ...]]] = {
    "1a": (1, ((1, 24),)),
    "11a": (11, ((1, 2), (11, 2))),
    "20a": (20, ((2, 2), (10, 2))),
    "27a": (27, ((3, 2), (9, 2))),
    "32a": (32, ((4, 2), (8, 2))),
    "36a": (36, ((6, 4),)),
}


def corpus_quotient(label: str) -> EtaQuotient:
    try:
        N, facs = CORPUS[label]
    except KeyError:
        raise KeyError(f"unknown corpus label {label!r}; known: {sorted(CORPUS)}") from None
    return EtaQuotient(facs, N, label)


@lru_cache(maxsize=None)
def corpus_form(label: str, T: int = 400) -> NewformRecord:
    return expand(corpus_quotient(label), T)


def load_form(spec: str, T: int | None = None) -> NewformRecord:
    """A form from a JSON path, a corpus label, or ``label.json`` naming a corpus entry."""
    p = Path(spec)
    if p.exists():
        return NewformRecord.from_json(p, T)
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    if stem in CORPUS:
        return corpus_form(stem, max(T or 400, 1))
    shipped = FORMS_DIR / f"{stem}.json"
    if not shipped.exists():
        raise FileNotFoundError(f"no form file or corpus label {spec!r}")
    return NewformRecord.from_json(shipped, T)


def coefficient_majorant(n: int, k: int) -> float:
    """``d(n) n^{(k-1)/2} <= n^{(k+1)/2}``."""
    return n ** ((k + 1) / 2)


def tail_bound(k: int, T: int, y: float) -> float:
    """Upper bound for ``sum_{n>T} n^{(k+1)/2} e^{-2 pi n y}``; ``inf`` if the ratio test fails."""
    if y <= 0:
        return math.inf
    p = (k + 1) / 2
    log_x = -2 * math.pi * y
    n0 = T + 1
    log_rho = p * math.log((n0 + 1) / n0) + log_x
    if log_rho >= 0:
        return math.inf
    log_first = p * math.log(n0) + n0 * log_x
    return math.exp(log_first) / -math.expm1(log_rho)


def terms_for_tail(k: int, y: float, tol: float, cap: int = 1 << 20) -> int:
    """Smallest ``T`` with ``tail_bound(k, T, y) <= tol``."""
    if tol <= 0 or y <= 0:
        raise ValueError("tol and y must be positive")
    lo, hi = 1, 1
    while tail_bound(k, hi, y) > tol:
        hi *= 2
        if hi > cap:
            raise TailBoundError(f"more than {cap} terms needed at height {y}", needed_terms=hi)
    while lo < hi:
        mid = (lo + hi) // 2
        if tail_bound(k, mid, y) <= tol:
            hi = mid
        else:
            lo = mid + 1
    return lo


def series_majorant(k: int, y: float, T: int) -> float:
    """Upper bound for ``sum_{n<=T} n^{(k+1)/2} e^{-2 pi n y}``, used to scale rounding errors."""
    p = (k + 1) / 2
    peak = min(T, max(1, round(p / (2 * math.pi * y))))
    m = math.exp(p * math.log(peak) - 2 * math.pi * peak * y)
    return m * (T if T < 64 else 1 + 1 / (1 - math.exp(-2 * math.pi * y)) + 2 * peak)


@dataclass(frozen=True)
class Evaluation:
    value: mpmath.mpc
    tail: float
    terms: int
    abs_sum: float


def evaluate(f: NewformRecord, z, T: int | None = None, tol: float | None = None,
             ctx=None, y_min: float = Y_MIN) -> Evaluation:
    """``sum_{n<=T} a(n) e^{2 pi i n z}`` with a rigorous bound on the omitted tail.

    If ``tol`` is given and the tail bound exceeds it, ``TailBoundError`` is
    raised instead of returning a degraded value.  With ``T`` omitted the
    smallest truncation meeting ``tol`` is used.
    """
    ctx = ctx or make_context()
    z = ctx.mpc(ctx.mpmathify(z))
    y = float(z.imag)
    if y < y_min:
        raise ValueError(f"Im z = {y:.3g} is below the floor {y_min}")
    if T is None:
        if tol is None:
            T = f.truncation
        else:
            T = max(1, terms_for_tail(f.weight, y, tol))
    f = f.extended(T)
    bound = tail_bound(f.weight, T, y)
    if tol is not None and bound > tol:
        raise TailBoundError(f"tail bound {bound:.3g} exceeds {tol:.3g} with T={T}",
                             bound=bound, needed_terms=terms_for_tail(f.weight, y, tol))
    q = ctx.expjpi(2 * z)
    acc = ctx.mpc(0)
    for n in range(T, 0, -1):
        acc = (acc + f.coeffs[n]) * q
    abs_sum = sum(abs(f.coeffs[n]) * math.exp(-2 * math.pi * n * y) for n in range(1, T + 1))
    return Evaluation(acc, bound, T, abs_sum)
