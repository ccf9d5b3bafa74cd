"""Recognition of numerical values as elements of a cyclotomic field Q(zeta_M).

A value ``x`` is recognised by finding an integer relation
``q x - sum_j p_j zeta^j ~ 0`` with LLL on the lattice spanned by rows
``[e_i | S Re v_i, S Im v_i]``.  A relation is only accepted after exact
re-embedding, so the answer is either verified or a reported failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from sympy import ZZ
from sympy.polys.matrices import DomainMatrix

from .cuspcore import IntegerMatrix2x2, classical_field_bound
from .cuspexpand import ExpansionAtCusp, choose_plan, expand_at_cusp, sigma_width
from .etaforms import NewformRecord, make_context


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def _mobius(n: int) -> int:
    res, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            res = -res
        p += 1
    return -res if n > 1 else res


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_divexact(a, b):
    """Exact division of integer polynomials (ascending coefficients), ``b`` monic."""
    a = list(a)
    q = [0] * (len(a) - len(b) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = a[i + len(b) - 1]
        q[i] = c
        if c:
            for j, y in enumerate(b):
                a[i + j] -= c * y
    if any(a):
        raise ArithmeticError("inexact polynomial division")
    return q


@lru_cache(maxsize=None)
def cyclotomic_polynomial(M: int) -> tuple[int, ...]:
    """``Phi_M`` as ascending integer coefficients, from ``prod_{d|M} (x^d - 1)^{mu(M/d)}``."""
    num, den = [1], [1]
    for d in _divisors(M):
        mu = _mobius(M // d)
        factor = [-1] + [0] * (d - 1) + [1]
        if mu == 1:
            num = _poly_mul(num, factor)
        elif mu == -1:
            den = _poly_mul(den, factor)
    return tuple(_poly_divexact(num, den))


def euler_phi(M: int) -> int:
    return len(cyclotomic_polynomial(M)) - 1


@dataclass(frozen=True)
class CyclotomicElement:
    """``sum coords[j] zeta_M^j`` over the power basis ``j < phi(M)``."""
    M: int
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("modulus must be positive")
        coords = tuple(Fraction(c) for c in self.coords)
        n = euler_phi(self.M)
        if len(coords) > n:
            coords = _reduce(coords, self.M)
        coords = coords + (Fraction(0),) * (n - len(coords))
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_exponents(cls, M: int, terms: dict[int, Fraction]) -> "CyclotomicElement":
        """``sum c_e zeta_M^e`` for arbitrary integer exponents ``e``."""
        dense = [Fraction(0)] * M
        for e, c in terms.items():
            dense[e % M] += Fraction(c)
        return cls(M, tuple(dense))

    @classmethod
    def rational(cls, M: int, q) -> "CyclotomicElement":
        return cls(M, (Fraction(q),))

    @property
    def degree(self) -> int:
        return len(self.coords)

    @property
    def denominator(self) -> int:
        return math.lcm(*(c.denominator for c in self.coords))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_rational(self) -> bool:
        return not any(self.coords[1:])

    def embed(self, ctx=None):
        """The complex value under ``zeta_M = e^{2 pi i/M}``."""
        ctx = ctx or make_context()
        acc = ctx.mpc(0)
        for j, c in enumerate(self.coords):
            if c:
                acc += ctx.mpf(c.numerator) / c.denominator * ctx.expjpi(ctx.mpf(2 * j) / self.M)
        return acc

    def lift(self, M2: int) -> "CyclotomicElement":
        """The same number written in ``Q(zeta_{M2})`` for a multiple ``M2`` of ``M``."""
        if M2 % self.M:
            raise ValueError(f"{M2} is not a multiple of {self.M}")
        s = M2 // self.M
        return CyclotomicElement.from_exponents(M2, {j * s: c for j, c in enumerate(self.coords)})

    def _coerce(self, other):
        if isinstance(other, CyclotomicElement):
            if other.M != self.M:
                raise ValueError("moduli differ; lift first")
            return other
        return CyclotomicElement.rational(self.M, other)

    def __add__(self, other):
        o = self._coerce(other)
        return CyclotomicElement(self.M, tuple(a + b for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicElement(self.M, tuple(-c for c in self.coords))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        o = self._coerce(other)
        prod = [Fraction(0)] * (2 * self.degree)
        for i, a in enumerate(self.coords):
            if a:
                for j, b in enumerate(o.coords):
                    prod[i + j] += a * b
        return CyclotomicElement(self.M, tuple(prod))

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {"M": self.M, "coords": [str(c) for c in self.coords]}

    @classmethod
    def from_json(cls, data) -> "CyclotomicElement":
        return cls(int(data["M"]), tuple(Fraction(c) for c in data["coords"]))

    def __str__(self):
        parts = []
        for j, c in enumerate(self.coords):
            if c:
                parts.append(str(c) if j == 0 else f"({c})*z^{j}")
        return " + ".join(parts) or "0"


def _reduce(coords, M: int) -> tuple[Fraction, ...]:
    phi = cyclotomic_polynomial(M)
    n = len(phi) - 1
    c = list(coords)
    for i in range(len(c) - 1, n - 1, -1):
        top = c[i]
        if top:
            for j in range(n + 1):
                c[i - n + j] -= top * phi[j]
    return tuple(c[:n])


@dataclass(frozen=True)
class Recognition:
    status: str
    element: CyclotomicElement | None
    residual: float
    denominator: int | None

    @property
    def ok(self) -> bool:
        return self.status == "recognized"

    def to_json(self) -> dict:
        return {"status": self.status,
                "element": self.element.to_json() if self.element else None,
                "residual": self.residual, "denominator": self.denominator}


def _lll_rows(rows: list[list[int]]) -> list[list[int]]:
    dm = DomainMatrix([[ZZ(v) for v in r] for r in rows], (len(rows), len(rows[0])), ZZ)
    return [[int(v) for v in r] for r in dm.lll(delta=Fraction(99, 100)).to_list()]


def recognize_value(x, eps: float, M: int, D: int, tol: float, ctx=None) -> Recognition:
    """Find ``v`` in ``Q(zeta_M)`` with denominator at most ``D`` and ``|x - v| <= tol``.

    ``eps`` is the known error on ``x``.  A candidate relation is accepted only
    if its exact re-embedding lies within both ``tol`` and ``10*eps`` plus
    rounding of ``x``, which rules out relations that merely fit the noise
    of a lattice that was too small.
    """
    if not eps < tol / 10:
        raise ValueError(f"error bound {eps:g} must be below tol/10 = {tol / 10:g}")
    ctx = ctx or make_context()
    x = ctx.mpc(x)
    slack = 10 * eps + float(abs(x)) * 2.0 ** (8 - ctx.prec)
    if float(abs(x)) <= min(tol, slack):
        return Recognition("recognized", CyclotomicElement(M, ()), float(abs(x)), 1)
    n = euler_phi(M)
    zetas = [ctx.expjpi(ctx.mpf(2 * j) / M) for j in range(n)]
    vecs = [x] + [-z for z in zetas]
    S = ctx.mpf(1) / max(eps, 2.0 ** (16 - ctx.prec)) / 4
    rows = []
    for i, v in enumerate(vecs):
        unit = [0] * (n + 1)
        unit[i] = 1
        rows.append(unit + [int(ctx.nint(S * v.real)), int(ctx.nint(S * v.imag))])
    best = None
    for row in _lll_rows(rows):
        q, p = row[0], row[1:n + 1]
        if q == 0 or abs(q) > D:
            continue
        if q < 0:
            q, p = -q, [-v for v in p]
        el = CyclotomicElement(M, tuple(Fraction(v, q) for v in p))
        res = float(abs(x - el.embed(ctx)))
        if res <= tol and res <= slack and (best is None or res < best.residual):
            best = Recognition("recognized", el, res, el.denominator)
    return best or Recognition("failed", None, math.inf, None)


def lsq_fixed_denominator(x, M: int, q: int, ctx=None) -> Recognition:
    """Diagnostic only: round ``q x`` to the nearest point of ``Z[zeta_M]`` by least squares.

    A lattice in ``C`` of rank ``phi(M) > 2`` is dense, so the result carries no
    information about membership; it is never reported as recognised.
    """
    ctx = ctx or make_context()
    x = ctx.mpc(x)
    n = euler_phi(M)
    if n == 1:
        el = CyclotomicElement(M, (Fraction(int(ctx.nint(q * x.real)), q),))
    else:
        zetas = [ctx.expjpi(ctx.mpf(2 * j) / M) for j in range(n)]
        A = ctx.matrix([[z.real for z in zetas], [z.imag for z in zetas]])
        b = ctx.matrix([q * x.real, q * x.imag])
        sol = A.T * ctx.lu_solve(A * A.T, b)
        el = CyclotomicElement(M, tuple(Fraction(int(ctx.nint(sol[j])), q) for j in range(n)))
    return Recognition("diagnostic", el, float(abs(x - el.embed(ctx))), q)


def default_denominator_bound(width: int, k: int, N: int) -> int:
    """``ceil(w^k N^{k/2})``: a heuristic cap, not a theorem."""
    return math.ceil(width ** k * math.sqrt(N) ** k)


def target_precision(M: int, D: int, height: float, margin: int = 12) -> float:
    """Error needed for LLL to separate a relation of height ``D*height`` in dimension phi(M)+1."""
    n = euler_phi(M)
    digits = (n + 1) / 2 * math.log10(max(D * height * n, 10.0)) + margin
    return 10.0 ** (-digits)


@dataclass
class RecognitionReport:
    label: str
    sigma: IntegerMatrix2x2
    M: int
    denominator_bound: int
    tol: float
    entries: list[tuple[int, Recognition]]
    width: int = 1
    period_factor: int = 1
    notes: dict = field(default_factory=dict)

    @property
    def all_recognized(self) -> bool:
        return all(r.ok for _, r in self.entries)

    @property
    def max_residual(self) -> float:
        return max((r.residual for _, r in self.entries if r.ok), default=0.0)

    def failures(self) -> list[int]:
        return [n for n, r in self.entries if not r.ok]

    def element(self, n: int) -> CyclotomicElement | None:
        return dict(self.entries)[n].element

    def to_json(self) -> dict:
        return {"form": self.label, "sigma": self.sigma.to_list(), "M": self.M,
                "width": self.width, "period_factor": self.period_factor,
                "denominator_bound": self.denominator_bound, "tol": self.tol,
                "all_recognized": self.all_recognized, "max_residual": self.max_residual,
                "entries": [{"n": n, **r.to_json()} for n, r in self.entries],
                "notes": self.notes}


def verify_expansion(exp: ExpansionAtCusp, M: int, D: int | None = None,
                     tol: float = 1e-8) -> RecognitionReport:
    """Run ``recognize_value`` on every coefficient; failures are reported, never raised."""
    if D is None:
        D = default_denominator_bound(exp.width, exp.weight, exp.level)
    worst = max(c.err for c in exp.coefficients)
    if not worst < tol / 10:
        raise ValueError(f"expansion error {worst:g} is not below tol/10")
    ctx = make_context(exp.plan.prec_bits)
    entries = [(c.n, recognize_value(c.value, c.err, M, D, tol, ctx)) for c in exp.coefficients]
    return RecognitionReport(exp.label, exp.sigma, M, D, tol, entries, exp.width,
                             exp.period_factor,
                             {"denominator_bound": "heuristic w^k N^(k/2) unless overridden"})


def certify_cusp(f: NewformRecord, sigma: IntegerMatrix2x2, M: int | None = None,
                 n_max: int = 10, tol: float = 1e-8, D: int | None = None,
                 period_factor: int = 1, prec_bits: int | None = None):
    """Expand ``f|sigma`` to the precision recognition needs and verify it in Q(zeta_M).

    ``M`` defaults to the classical bound ``N/gcd(cd, N)``.  Returns the
    expansion and its report.
    """
    N, k = f.level, f.weight
    if M is None:
        M = classical_field_bound(N, sigma)
    w = sigma_width(N, sigma)
    if D is None:
        D = default_denominator_bound(w, k, N)
    height = 4 * (n_max * period_factor + 1) ** ((k + 1) / 2)
    eps = min(tol / 100, target_precision(M, D, height))
    plan = choose_plan(f, sigma, n_max, eps, prec_bits, period_factor)
    exp = expand_at_cusp(f, sigma, plan)
    return exp, verify_expansion(exp, M, D, tol)
