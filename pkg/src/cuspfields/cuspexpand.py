"""Fourier expansions of ``f|_k sigma`` recovered by sampling on a horizontal line.

Samples ``z_j = x_j + iY`` with ``x_j = j * r * w / P`` are mapped into the higher
part of the orbit: since ``f|gamma = f`` for ``gamma`` in Gamma_0(N), any matrix
``M`` in the coset ``Gamma_0(N) sigma`` gives ``(f|sigma)(z) = (Cz + D)^{-k} f(Mz)``,
and we pick the one making ``Im(Mz)`` largest.  The coefficients then come
from a length-``P`` DFT; every error source gets an explicit bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cuspcore import IntegerMatrix2x2, NotUnimodularError, classical_field_bound
from .etaforms import (Y_MIN, NewformRecord, default_prec_bits, evaluate, make_context,
                       series_majorant, terms_for_tail)
from .numberfield import _xgcd

SAFETY = 8
MAX_SAMPLES = 1 << 12


class PlanError(ArithmeticError):
    """No sampling plan meets the tolerance; ``limiting_point`` is the worst sample seen."""

    def __init__(self, message, limiting_point=None):
        super().__init__(message)
        self.limiting_point = limiting_point


def sigma_width(N: int, sigma: IntegerMatrix2x2) -> int:
    """Width of the cusp ``sigma(oo) = a/c`` on Gamma_0(N)."""
    return N // math.gcd(sigma.c * sigma.c, N)


def _coset_residue(sigma: IntegerMatrix2x2, N: int):
    """Bottom rows ``(C, D)`` of ``Gamma_0(N) sigma``: ``C`` a multiple of ``g`` and
    ``D = D0(C) mod m``.  Returns ``(g, m, u)`` with ``D0(C) = (C/g) * sigma.d * u``."""
    g = math.gcd(sigma.c, N)
    m = N // g
    if m == 1:
        return g, 1, 0
    _, u, _ = _xgcd((sigma.c // g) % m, m)
    return g, m, u % m


def pullback(sigma: IntegerMatrix2x2, N: int, x: float, y: float) -> IntegerMatrix2x2:
    """The ``M`` in ``Gamma_0(N) sigma`` minimising ``|Cz + D|`` at ``z = x + iy``.

    Ties keep the first candidate found in the deterministic scan order, so
    ``sigma`` itself wins unless something is strictly better.
    """
    best = (sigma.c, sigma.d)
    best_val = (sigma.c * x + sigma.d) ** 2 + (sigma.c * y) ** 2
    g, m, u = _coset_residue(sigma, N)
    C = 0
    while (C * y) ** 2 < best_val:
        radius = math.sqrt(max(best_val - (C * y) ** 2, 0.0))
        centre = -C * x
        lo, hi = math.ceil(centre - radius), math.floor(centre + radius)
        if m == 1:
            start = lo
        else:
            r0 = ((C // g) * sigma.d * u) % m
            start = lo + ((r0 - lo) % m)
        for D in range(start, hi + 1, m):
            if math.gcd(C, D) != 1:
                continue
            val = (C * x + D) ** 2 + (C * y) ** 2
            if val < best_val * (1 - 1e-12):
                best, best_val = (C, D), val
        C += g
    C, D = best
    if (C, D) == (sigma.c, sigma.d):
        return sigma
    _, s, t = _xgcd(D, C)
    # s*D + t*C = 1, so A = s, B = -t
    M = IntegerMatrix2x2(s, -t, C, D)
    gamma = M @ sigma.inverse()
    if not gamma.in_gamma0(N):
        raise ArithmeticError(f"pullback {M} left the coset of {sigma}")
    return M


@dataclass(frozen=True)
class SamplingPlan:
    Y: float
    P: int
    T: int
    n_max: int
    prec_bits: int
    width: int
    period_factor: int = 1
    tol: float = 1e-8
    min_height: float = math.inf
    pullbacks: tuple[IntegerMatrix2x2, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if self.P & (self.P - 1) or self.P < 4 * self.n_max:
            raise ValueError(f"P={self.P} must be a power of two and at least 4*n_max")

    @property
    def period(self) -> int:
        return self.period_factor * self.width

    @property
    def top_index(self) -> int:
        return self.n_max * self.period_factor

    def sample_x(self, j: int) -> Fraction:
        return Fraction(j * self.period, self.P)

    def to_json(self) -> dict:
        return {"Y": self.Y, "P": self.P, "T": self.T, "n_max": self.n_max,
                "prec_bits": self.prec_bits, "width": self.width,
                "period_factor": self.period_factor, "min_height": self.min_height}


def alias_majorant(N: int, k: int, m: int, P: int, t: float) -> float:
    """Bound on ``sum_{j>=1} |b_{m+jP}| e^{-2 pi j P t}`` assuming ``|b_n| <= N^{k/2} n^{(k+1)/2}``."""
    p = (k + 1) / 2
    lx = -2 * math.pi * P * t
    first = math.exp((k / 2) * math.log(N) + p * math.log(m + P) + lx)
    log_ratio = p * math.log((m + 2 * P) / (m + P)) + lx
    if log_ratio >= 0:
        return math.inf
    return first / -math.expm1(log_ratio)


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def _height_grid():
    t = 0.004
    while t < 2.0:
        yield t
        t *= 1.25


def choose_plan(f: NewformRecord, sigma: IntegerMatrix2x2, n_max: int, tol: float,
                prec_bits: int | None = None, period_factor: int = 1,
                y_min: float = Y_MIN) -> SamplingPlan:
    """The cheapest plan on a fixed grid of heights whose error budget stays below ``tol``.

    The budget splits ``tol`` as 1/4 aliasing, 1/2 truncation, 1/4 rounding.
    With ``prec_bits`` given the precision is fixed; otherwise it is raised
    from the environment default as far as the rounding budget requires.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if n_max < 1 or period_factor < 1:
        raise ValueError("n_max and period_factor must be positive")
    if sigma.det != 1:
        raise NotUnimodularError(f"det {sigma} != 1")
    N, k = f.level, f.weight
    w = sigma_width(N, sigma)
    r = period_factor
    period = r * w
    top = n_max * r
    floor_bits = default_prec_bits() if prec_bits is None else prec_bits
    best, best_cost, worst = None, math.inf, None
    for t in _height_grid():
        Y = t * period
        P = _next_pow2(4 * top)
        while alias_majorant(N, k, top, P, t) > tol / 4 and P <= MAX_SAMPLES:
            P *= 2
        if P > MAX_SAMPLES:
            continue
        mats, heights, factors = [], [], []
        for j in range(P):
            x = j * period / P
            M = pullback(sigma, N, x, Y)
            mod2 = (M.c * x + M.d) ** 2 + (M.c * Y) ** 2
            mats.append(M)
            heights.append(Y / mod2)
            factors.append(mod2 ** (-k / 2))
        h_min = min(heights)
        if h_min < y_min:
            jw = heights.index(h_min)
            worst = (j_to_point(jw, period, P, Y), h_min)
            continue
        loss = math.exp(2 * math.pi * top * t)
        delta = tol / (2 * loss)
        if not delta > 0:
            continue
        try:
            T = max(terms_for_tail(k, h, delta / (2 * fac)) for h, fac in set(zip(heights, factors)))
        except (ValueError, ArithmeticError):
            continue
        T = max(T, 1)
        scale = max(fac * series_majorant(k, h, T) for h, fac in zip(heights, factors))
        need = math.log2(SAFETY * (T + 16 + P) * max(scale, 1e-300)) - math.log2(delta) + 5
        bits = max(floor_bits, math.ceil(need))
        if prec_bits is not None and bits > prec_bits:
            continue
        cost = P * T * (bits / 64) ** 1.5
        if cost < best_cost:
            best_cost = cost
            best = SamplingPlan(Y, P, T, n_max, bits, w, r, tol, h_min, tuple(mats))
    if best is None:
        where = f" (limiting sample {worst[0]}, pulled-back height {worst[1]:.3g})" if worst else ""
        raise PlanError(f"tolerance {tol:g} is unachievable for {f.label} at "
                        f"{sigma} with prec_bits={prec_bits}{where}",
                        limiting_point=worst)
    return best


def j_to_point(j: int, period: int, P: int, Y: float) -> complex:
    return complex(j * period / P, Y)


@dataclass(frozen=True)
class Coefficient:
    n: int
    value: object
    err: float

    @property
    def magnitude(self) -> float:
        return float(abs(self.value))


@dataclass
class ExpansionAtCusp:
    """Coefficients of ``sum_n b_n e^{2 pi i n z / (r w)}``; ``r`` is the period factor."""
    label: str
    level: int
    weight: int
    sigma: IntegerMatrix2x2
    width: int
    N_prime: int
    coefficients: list[Coefficient]
    plan: SamplingPlan
    normalization: dict = field(default_factory=lambda: {
        "factor": 1, "t_mu_norm": 1,
        "note": "over Q with t_mu = 1 the Shimura scaling N(t_mu O_F)^(-k0/2) is 1"})

    @property
    def period_factor(self) -> int:
        return self.plan.period_factor

    def coefficient(self, n: int) -> Coefficient:
        return self.coefficients[n]

    def exponent(self, n: int) -> Fraction:
        """Index ``n`` as a multiple of ``1/w``."""
        return Fraction(n, self.period_factor)

    def constant_term_ok(self) -> bool:
        c = self.coefficients[0]
        return c.magnitude <= max(c.err, self.plan.tol)

    def support_violations(self, step: Fraction) -> list[int]:
        """Indices outside ``step * Z`` (a multiple of ``1/w``) whose value exceeds its bound."""
        bad = []
        for c in self.coefficients[1:]:
            if self.exponent(c.n) % step and c.magnitude > c.err:
                bad.append(c.n)
        return bad

    def to_json(self, digits: int | None = None) -> dict:
        ctx = make_context(self.plan.prec_bits)
        digits = digits or max(15, int(self.plan.prec_bits * 0.30103) - 2)
        return {
            "form": self.label, "N": self.level, "k": self.weight,
            "sigma": self.sigma.to_list(), "width": self.width, "N_prime": self.N_prime,
            "period_factor": self.period_factor, "plan": self.plan.to_json(),
            "normalization": self.normalization,
            "coeffs": [{"n": c.n, "re": ctx.nstr(c.value.real, digits),
                        "im": ctx.nstr(c.value.imag, digits), "err": c.err}
                       for c in self.coefficients],
        }


def expand_at_cusp(f: NewformRecord, sigma: IntegerMatrix2x2, plan: SamplingPlan,
                   ctx=None) -> ExpansionAtCusp:
    if sigma.det != 1:
        raise NotUnimodularError(f"det {sigma} != 1")
    N, k = f.level, f.weight
    w = sigma_width(N, sigma)
    if plan.width != w:
        raise ValueError(f"plan width {plan.width} does not match cusp width {w}")
    ctx = ctx or make_context(plan.prec_bits)
    f = f.extended(plan.T)
    P, period = plan.P, plan.period
    Y = ctx.mpf(plan.Y)
    t = plan.Y / period
    ulp = 2.0 ** (-ctx.prec)
    mats = plan.pullbacks or tuple(pullback(sigma, N, float(plan.sample_x(j)), plan.Y)
                                   for j in range(P))
    values, errs = [], []
    for j in range(P):
        x = plan.sample_x(j)
        z = ctx.mpc(ctx.mpf(x.numerator) / x.denominator, Y)
        M = mats[j]
        cz_d = M.c * z + M.d
        mz = (M.a * z + M.b) / cz_d
        ev = evaluate(f, mz, T=plan.T, ctx=ctx, y_min=0.0)
        fac = float(abs(cz_d)) ** (-k)
        values.append(ev.value / cz_d ** k)
        errs.append(fac * (ev.tail + SAFETY * (plan.T + 16) * ulp * ev.abs_sum))
    gmax = max(float(abs(v)) for v in values)
    emax = max(errs) + SAFETY * P * ulp * gmax
    roots = [ctx.expjpi(ctx.mpf(-2 * j) / P) for j in range(P)]
    coeffs = []
    for n in range(plan.top_index + 1):
        acc = ctx.mpc(0)
        for j in range(P):
            acc += values[j] * roots[(n * j) % P]
        gain = ctx.exp(2 * ctx.pi * n * Y / period)
        b = acc * gain / P
        err = math.exp(2 * math.pi * n * t) * emax + alias_majorant(N, k, max(n, 1), P, t)
        coeffs.append(Coefficient(n, b, err))
    return ExpansionAtCusp(f.label, N, k, sigma, w, classical_field_bound(N, sigma),
                           coeffs, plan)


def expand_default(f: NewformRecord, sigma: IntegerMatrix2x2, n_max: int = 30,
                   tol: float = 1e-12, prec_bits: int | None = None,
                   period_factor: int = 1) -> ExpansionAtCusp:
    plan = choose_plan(f, sigma, n_max, tol, prec_bits, period_factor)
    return expand_at_cusp(f, sigma, plan)
