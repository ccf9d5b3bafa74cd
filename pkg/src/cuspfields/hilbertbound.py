"""Level structures Gamma_mu(n) over a totally real field and the cyclotomic bound N0.

Every quantity here is computed at the level of ideals: the local primed
entries of a matrix in ``Gamma_mu(1)`` satisfy ``(a') = (a)`` and
``(c') = (c) t_mu^{-1} D_F^{-1}``, so no uniformisers are ever chosen.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .numberfield import FieldElement, FractionalIdeal, NumberField


class NotInGammaError(ValueError):
    """The matrix is not in Gamma_mu(1), so N0 and the support ideal are undefined."""


class UnitConstraint(enum.Enum):
    ANY_UNIT = "any_unit"
    TOTALLY_POSITIVE_UNIT = "totally_positive_unit"


@dataclass(frozen=True)
class HilbertLevel:
    field: NumberField
    level: FractionalIdeal
    t_mu: FractionalIdeal

    def __post_init__(self):
        if self.level.field is not self.field or self.t_mu.field is not self.field:
            raise ValueError("ideals must belong to the level's field")
        if self.level.is_zero or not self.level.is_integral():
            raise ValueError("level must be a nonzero integral ideal")
        if self.t_mu.is_zero or not self.t_mu.is_integral():
            raise ValueError("t_mu must be a nonzero integral ideal")
        if not self.t_mu.is_coprime_to(self.level):
            raise ValueError("t_mu must be coprime to the level")

    @classmethod
    def over(cls, field: NumberField, level_gens, t_mu_gens=(1,)) -> "HilbertLevel":
        return cls(field, field.ideal(*level_gens), field.ideal(*t_mu_gens))

    @cached_property
    def different(self) -> FractionalIdeal:
        return self.field.different()

    @cached_property
    def upper_right(self) -> FractionalIdeal:
        """``t_mu^{-1} D_F^{-1}``, where upper-right entries live."""
        return (self.t_mu * self.different).inverse()

    @cached_property
    def lower_left(self) -> FractionalIdeal:
        """``n t_mu D_F``, where lower-left entries live."""
        return self.level * self.t_mu * self.different

    def with_level(self, level: FractionalIdeal) -> "HilbertLevel":
        return HilbertLevel(self.field, level, self.t_mu)


class FieldMatrix2x2:
    __slots__ = ("a", "b", "c", "d", "det")

    def __init__(self, a, b, c, d, field: NumberField | None = None):
        if field is None:
            field = next(x.field for x in (a, b, c, d) if isinstance(x, FieldElement))
        self.a, self.b, self.c, self.d = (field.element(x) for x in (a, b, c, d))
        self.det = self.a * self.d - self.b * self.c

    @property
    def field(self) -> NumberField:
        return self.a.field

    @classmethod
    def parse(cls, field: NumberField, text: str) -> "FieldMatrix2x2":
        parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
        if len(parts) != 4:
            raise ValueError("a matrix needs four comma-separated entries")
        return cls(*(field.parse(p) for p in parts), field=field)

    def entries(self):
        return self.a, self.b, self.c, self.d

    def __matmul__(self, o: "FieldMatrix2x2") -> "FieldMatrix2x2":
        return FieldMatrix2x2(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                              self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def inverse(self) -> "FieldMatrix2x2":
        inv = self.det.inverse()
        return FieldMatrix2x2(self.d * inv, -self.b * inv, -self.c * inv, self.a * inv)

    def __eq__(self, o):
        return isinstance(o, FieldMatrix2x2) and self.entries() == o.entries()

    def __hash__(self):
        return hash(self.entries())

    def __repr__(self):
        return "(%s, %s; %s, %s)" % tuple(str(x) for x in self.entries())


def gamma_mu_member(m: FieldMatrix2x2, lvl: HilbertLevel,
                    uc: UnitConstraint = UnitConstraint.TOTALLY_POSITIVE_UNIT) -> bool:
    """Entry-wise membership test for ``Gamma_mu(n)``."""
    if not (m.a.is_integral() and m.d.is_integral()):
        return False
    if m.b not in lvl.upper_right or m.c not in lvl.lower_left:
        return False
    if not m.det.is_unit():
        return False
    if uc is UnitConstraint.TOTALLY_POSITIVE_UNIT and not m.det.is_totally_positive():
        return False
    return True


def _require_gamma1(sigma: FieldMatrix2x2, lvl: HilbertLevel, uc: UnitConstraint):
    unit_level = lvl.with_level(lvl.field.unit_ideal)
    if not gamma_mu_member(sigma, unit_level, uc):
        raise NotInGammaError(f"{sigma} is not in Gamma_mu(1)")


def _principal(x: FieldElement) -> FractionalIdeal:
    return x.field.ideal(x)


def bound_ideal(sigma: FieldMatrix2x2, lvl: HilbertLevel) -> FractionalIdeal:
    """``n / (c d t_mu^{-1} D_F^{-1}, n)``; integral for sigma in Gamma_mu(1)."""
    cd = _principal(sigma.c * sigma.d) * lvl.upper_right
    return lvl.level / (cd + lvl.level)


def field_bound_N0(sigma: FieldMatrix2x2, lvl: HilbertLevel,
                   uc: UnitConstraint = UnitConstraint.TOTALLY_POSITIVE_UNIT) -> int:
    """The positive integer ``N0`` with ``N0 Z = bound_ideal(sigma, lvl) ∩ Z``."""
    _require_gamma1(sigma, lvl, uc)
    m = bound_ideal(sigma, lvl).intersect_integers()
    if m.denominator != 1:
        raise ArithmeticError(f"N0 = {m} is not an integer; sigma should be in Gamma_mu(1)")
    return m.numerator


def support_modulus(sigma: FieldMatrix2x2, lvl: HilbertLevel) -> FractionalIdeal:
    """``w(sigma, n) = n * ((a)^2 n + (c)^2 t_mu^{-2} D_F^{-2})^{-1}``."""
    a2n = _principal(sigma.a * sigma.a) * lvl.level
    c_shift = _principal(sigma.c) * lvl.upper_right
    return lvl.level / (a2n + c_shift * c_shift)


def support_ideal(sigma: FieldMatrix2x2, lvl: HilbertLevel,
                  uc: UnitConstraint = UnitConstraint.TOTALLY_POSITIVE_UNIT) -> FractionalIdeal:
    """The lattice ``t_mu w(sigma, n)^{-1}`` carrying the Fourier coefficients of ``f_mu || sigma``."""
    _require_gamma1(sigma, lvl, uc)
    return lvl.t_mu / support_modulus(sigma, lvl)


def is_unit_at(alpha: FieldElement, ideal: FractionalIdeal) -> bool:
    """Whether ``alpha`` has valuation zero at every prime dividing ``ideal``."""
    if alpha.is_zero():
        return False
    O = alpha.field.unit_ideal
    A = _principal(alpha)
    if alpha.is_integral():
        return A.is_coprime_to(ideal)
    num = A.intersect(O)
    den = A.inverse().intersect(O)
    return num.is_coprime_to(ideal) and den.is_coprime_to(ideal)


def conjugation_conditions(sigma: FieldMatrix2x2, lvl: HilbertLevel,
                           alpha: FieldElement) -> dict[str, bool]:
    """The ideal conditions for ``sigma diag(alpha, 1) sigma^{-1}`` to lie in the level.

    With ``eps = det(sigma)`` the conjugate is
    ``eps^{-1} (ad alpha - bc, ab(1 - alpha); cd(alpha - 1), ad - bc alpha)``.
    """
    alpha = lvl.field.element(alpha)
    a, b, c, d = sigma.entries()
    inv = sigma.det.inverse()
    upper_left = (a * d * alpha - b * c) * inv
    upper_right = a * b * (1 - alpha) * inv
    lower_left = c * d * (alpha - 1) * inv
    lower_right = (a * d - b * c * alpha) * inv
    return {
        "upper_right_in_codifferent": upper_right in lvl.upper_right,
        "lower_left_in_level": lower_left in lvl.lower_left,
        "diagonal_integral": upper_left.is_integral() and lower_right.is_integral(),
        "upper_left_coprime_to_level": (upper_left.is_integral()
                                        and _principal(upper_left).is_coprime_to(lvl.level)),
    }


def conjugation_check_hilbert(sigma: FieldMatrix2x2, lvl: HilbertLevel, alpha,
                              uc: UnitConstraint = UnitConstraint.TOTALLY_POSITIVE_UNIT) -> bool:
    alpha = lvl.field.element(alpha)
    _require_gamma1(sigma, lvl, uc)
    if not is_unit_at(alpha, lvl.level):
        raise ValueError(f"alpha={alpha} is not a unit at the level")
    return all(conjugation_conditions(sigma, lvl, alpha).values())


def _unchecked(sigma, lvl, alpha) -> bool:
    return all(conjugation_conditions(sigma, lvl, alpha).values())


def alpha_grid(field: NumberField, N0: int, height: int = 20):
    """``1 + N0*beta`` for ``beta`` in the integral coordinate box of the given height."""
    n = field.degree
    for coords in itertools.product(range(-height, height + 1), repeat=n):
        yield field.element(1) + field.from_coords(coords) * N0


def sufficiency_sweep(sigma: FieldMatrix2x2, lvl: HilbertLevel, height: int = 20,
                      uc: UnitConstraint = UnitConstraint.TOTALLY_POSITIVE_UNIT) -> tuple[int, int]:
    """Count ``(checked, passed)`` over the alpha grid restricted to units at the level."""
    N0 = field_bound_N0(sigma, lvl, uc)
    checked = passed = 0
    for alpha in alpha_grid(lvl.field, N0, height):
        if not is_unit_at(alpha, lvl.level):
            continue
        checked += 1
        passed += _unchecked(sigma, lvl, alpha)
    return checked, passed


def local_symbols(sigma: FieldMatrix2x2, lvl: HilbertLevel) -> list[dict]:
    """Valuations ``n_v, d_v, t_v, v(c), v(d)`` at each prime dividing ``n D_F``."""
    primes = {P.ideal: P for P, _ in (lvl.level * lvl.different).factor()}
    out = []
    for I, P in sorted(primes.items(), key=lambda kv: (kv[0].norm(), kv[0].hnf)):
        def val(x):
            return None if x.is_zero() else _principal(x).valuation_at(I)
        out.append({
            "prime": str(P), "norm": int(I.norm()),
            "n_v": lvl.level.valuation_at(I), "d_v": lvl.different.valuation_at(I),
            "t_v": lvl.t_mu.valuation_at(I), "v_c": val(sigma.c), "v_d": val(sigma.d),
        })
    return out


def normalisation_factor(lvl: HilbertLevel, k0: int) -> Fraction | float:
    """``N(t_mu O_F)^{-k0/2}``, exact when the exponent is integral."""
    nt = lvl.t_mu.norm()
    if k0 % 2 == 0:
        return Fraction(1) / nt ** (k0 // 2)
    return float(nt) ** (-k0 / 2)
