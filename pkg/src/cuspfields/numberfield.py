"""Exact arithmetic in totally real number fields and their fractional ideals.

A field is described by a monic irreducible polynomial for a primitive
element ``r`` together with a Z-basis of the ring of integers, written in the
power basis ``1, r, ..., r^(n-1)``.  Elements are stored as integer
coordinates in that integral basis over a common positive denominator.

Fractional ideals are full-rank lattices ``(1/d) * L(H)`` where ``H`` is the
lower-triangular row Hermite normal form of an integral ideal.  The pair
``(d, H)`` is normalised so that ``gcd(d, content(H)) = 1``, which makes it a
unique representation of the ideal.
"""

from __future__ import annotations

import ast
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache, reduce
from pathlib import Path
from typing import Iterable, Sequence

from mpmath.ctx_iv import MPIntervalContext

DATA_DIR = Path(__file__).parent / "data" / "fields"


class ZeroIdealError(ValueError):
    """Raised when an operation is undefined on the zero ideal."""


class FieldMismatchError(ValueError):
    pass


# --------------------------------------------------------------------------
# small exact linear algebra helpers

def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, u, v)`` with ``u*a + v*b = g = gcd(a, b) >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def _frac_inverse(m: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    n = len(m)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _frac_det(m: Sequence[Sequence[Fraction]]) -> Fraction:
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            if a[r][col] != 0:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def hnf(rows: Iterable[Sequence[int]], n: int) -> tuple[tuple[int, ...], ...]:
    """Lower-triangular row Hermite normal form of a full-rank integer lattice.

    Row ``i`` of the result is supported on columns ``0..i``, diagonal entries
    are positive and each entry left of a diagonal is reduced into
    ``[0, H[j][j])``.
    """
    work = [list(r) for r in rows if any(r)]
    basis: list[list[int] | None] = [None] * n
    for j in range(n - 1, -1, -1):
        pivot = None
        rest = []
        for r in work:
            if r[j] == 0:
                rest.append(r)
            elif pivot is None:
                pivot = r
            else:
                a, b = pivot[j], r[j]
                if b % a == 0:
                    q = b // a
                    r = [y - q * x for x, y in zip(pivot, r)]
                else:
                    g, u, v = _xgcd(a, b)
                    pa, pb = a // g, b // g
                    pivot, r = ([u * x + v * y for x, y in zip(pivot, r)],
                                [pb * x - pa * y for x, y in zip(pivot, r)])
                if any(r):
                    rest.append(r)
        if pivot is None:
            raise ValueError("generators do not span a full-rank lattice")
        if pivot[j] < 0:
            pivot = [-x for x in pivot]
        # keep the remaining rows small
        pj = pivot[j]
        rest = [[x % pj if k == j else x for k, x in enumerate(r)] for r in rest]
        basis[j] = pivot
        work = rest
    for i in range(n):
        row = basis[i]
        for j in range(i - 1, -1, -1):
            q = row[j] // basis[j][j]
            if q:
                bj = basis[j]
                row = [x - q * y for x, y in zip(row, bj)]
        basis[i] = row
    return tuple(tuple(r) for r in basis)


# --------------------------------------------------------------------------
# fields

class NumberField:
    """A totally real number field with a fixed integral basis.

    ``min_poly`` lists the coefficients of the defining polynomial of the
    primitive element in ascending order (constant term first, monic).
    ``integral_basis`` gives each basis element as rational coordinates in
    the power basis; the first element must be exactly 1.
    """

    def __init__(self, min_poly: Sequence[int], integral_basis: Sequence[Sequence],
                 name: str | None = None, variable: str = "r",
                 narrow_class: Sequence[dict] | None = None,
                 disc: int | None = None, check_totally_real: bool = True):
        self.min_poly = tuple(int(c) for c in min_poly)
        if self.min_poly[-1] != 1:
            raise ValueError("defining polynomial must be monic")
        self.degree = n = len(self.min_poly) - 1
        if n < 1:
            raise ValueError("degree must be positive")
        self.name = name or f"F{self.min_poly}"
        self.variable = variable
        basis = [tuple(Fraction(x) for x in w) for w in integral_basis]
        if len(basis) != n or any(len(w) != n for w in basis):
            raise ValueError("integral basis must have n vectors of length n")
        if basis[0] != tuple(Fraction(int(i == 0)) for i in range(n)):
            raise ValueError("first integral basis element must be 1")
        self.integral_basis = tuple(basis)
        self._basis_inv = _frac_inverse(basis)

        table = []
        for i in range(n):
            row = []
            for j in range(n):
                prod = self._power_to_basis(self._power_mul(basis[i], basis[j]))
                if any(c.denominator != 1 for c in prod):
                    raise ValueError("integral basis is not closed under multiplication")
                row.append(tuple(int(c) for c in prod))
            table.append(tuple(row))
        self.multiplication_table = tuple(table)

        traces = [sum(table[i][k][k] for k in range(n)) for i in range(n)]
        self._basis_traces = tuple(traces)
        gram = [[sum(table[i][j][k] * traces[k] for k in range(n)) for j in range(n)]
                for i in range(n)]
        self.trace_form = tuple(tuple(r) for r in gram)
        self.discriminant = int(_frac_det(gram))
        if disc is not None and int(disc) != self.discriminant:
            raise ValueError(f"stated discriminant {disc} != computed {self.discriminant}")
        self._gram_inv = _frac_inverse(gram)
        if check_totally_real:
            self._check_totally_real()
        self.narrow_class = tuple(
            (str(c["label"]), tuple(c["ideal_generators"]))
            for c in (narrow_class or [{"label": "1", "ideal_generators": ["1"]}]))

    # -- construction -----------------------------------------------------
    @classmethod
    def from_json(cls, source) -> "NumberField":
        """Load a field from a dict, a JSON path, or a builtin name like ``Qsqrt5``."""
        if isinstance(source, dict):
            doc = source
        else:
            path = Path(source)
            if not path.exists():
                path = DATA_DIR / f"{source}.json"
            if not path.exists():
                raise FileNotFoundError(f"no field description {source!r}")
            doc = json.loads(path.read_text())
        return cls(doc["min_poly"], doc["integral_basis"], name=doc.get("name"),
                   variable=doc.get("variable", "r"), narrow_class=doc.get("narrow_class"),
                   disc=doc.get("disc"))

    @classmethod
    def rationals(cls) -> "NumberField":
        return _builtin("Q")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "variable": self.variable,
            "min_poly": list(self.min_poly),
            "disc": self.discriminant,
            "integral_basis": [[str(c) for c in w] for w in self.integral_basis],
            "narrow_class": [{"label": lab, "ideal_generators": list(g)}
                             for lab, g in self.narrow_class],
        }

    def _check_totally_real(self):
        import sympy
        x = sympy.Symbol("x")
        poly = sympy.Poly(list(reversed(self.min_poly)), x)
        if not poly.is_irreducible:
            raise ValueError("defining polynomial is reducible")
        if poly.count_roots() != self.degree:
            raise ValueError("field is not totally real")

    # -- power basis helpers ------------------------------------------------
    def _power_mul(self, u, v):
        n = self.degree
        prod = [Fraction(0)] * (2 * n - 1)
        for i, a in enumerate(u):
            if a:
                for j, b in enumerate(v):
                    if b:
                        prod[i + j] += a * b
        for top in range(2 * n - 2, n - 1, -1):
            c = prod[top]
            if c:
                prod[top] = Fraction(0)
                for k in range(n):
                    prod[top - n + k] -= c * self.min_poly[k]
        return prod[:n]

    def _power_to_basis(self, v):
        n = self.degree
        return [sum((v[j] * self._basis_inv[j][i] for j in range(n)), Fraction(0))
                for i in range(n)]

    def _basis_to_power(self, coords):
        n = self.degree
        return [sum((coords[i] * self.integral_basis[i][j] for i in range(n)), Fraction(0))
                for j in range(n)]

    # -- elements -----------------------------------------------------------
    def __call__(self, x) -> "FieldElement":
        return self.element(x)

    def element(self, x) -> "FieldElement":
        """Coerce ``x`` (int, Fraction, FieldElement, or expression string) into the field."""
        if isinstance(x, FieldElement):
            if x.field is not self:
                raise FieldMismatchError("element belongs to another field")
            return x
        if isinstance(x, str):
            return self.parse(x)
        if isinstance(x, (int, Fraction)):
            q = Fraction(x)
            return FieldElement(self, (q.numerator,) + (0,) * (self.degree - 1), q.denominator)
        raise TypeError(f"cannot coerce {type(x).__name__} into {self.name}")

    def from_coords(self, coords: Sequence) -> "FieldElement":
        qs = [Fraction(c) for c in coords]
        den = reduce(math.lcm, (q.denominator for q in qs), 1)
        return FieldElement(self, tuple(int(q * den) for q in qs), den)

    def from_power_coords(self, coords: Sequence) -> "FieldElement":
        return self.from_coords(self._power_to_basis([Fraction(c) for c in coords]))

    @cached_property
    def one(self) -> "FieldElement":
        return self.element(1)

    @cached_property
    def zero(self) -> "FieldElement":
        return self.element(0)

    @cached_property
    def gen(self) -> "FieldElement":
        v = [Fraction(0)] * self.degree
        if self.degree > 1:
            v[1] = Fraction(1)
            return self.from_power_coords(v)
        return self.from_power_coords([-self.min_poly[0]])

    def basis_elements(self) -> list["FieldElement"]:
        n = self.degree
        return [FieldElement(self, tuple(int(i == j) for j in range(n)), 1) for i in range(n)]

    def parse(self, text: str) -> "FieldElement":
        """Evaluate an arithmetic expression in the field's variable.

        Supports ``+ - * /``, ``**`` or ``^`` with integer exponents, integer
        literals, and the generator name, e.g. ``"(1 + r)/2"`` or ``"1/r"``.
        """
        tree = ast.parse(text.strip().replace("^", "**"), mode="eval")

        def ev(node):
            if isinstance(node, ast.Expression):
                return ev(node.body)
            if isinstance(node, ast.Constant) and isinstance(node.value, int):
                return self.element(node.value)
            if isinstance(node, ast.Name) and node.id == self.variable:
                return self.gen
            if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
                v = ev(node.operand)
                return -v if isinstance(node.op, ast.USub) else v
            if isinstance(node, ast.BinOp):
                left = ev(node.left)
                if isinstance(node.op, ast.Pow):
                    exp = node.right
                    sign = 1
                    if isinstance(exp, ast.UnaryOp) and isinstance(exp.op, ast.USub):
                        sign, exp = -1, exp.operand
                    if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int)):
                        raise ValueError("exponents must be integer literals")
                    return left ** (sign * exp.value)
                right = ev(node.right)
                ops = {ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b,
                       ast.Mult: lambda a, b: a * b, ast.Div: lambda a, b: a / b}
                for k, f in ops.items():
                    if isinstance(node.op, k):
                        return f(left, right)
            raise ValueError(f"unsupported syntax in field expression {text!r}")

        return ev(tree)

    # -- ideals -------------------------------------------------------------
    def ideal(self, *gens) -> "FractionalIdeal":
        """The fractional ideal generated by the given elements."""
        if len(gens) == 1 and isinstance(gens[0], (list, tuple)):
            gens = tuple(gens[0])
        elems = [self.element(g) for g in gens]
        elems = [e for e in elems if not e.is_zero()]
        if not elems:
            return FractionalIdeal.zero(self)
        den = reduce(math.lcm, (e.den for e in elems), 1)
        rows = []
        for e in elems:
            f = den // e.den
            nums = tuple(f * x for x in e.nums)
            rows.extend(self._mul_int(nums, w) for w in self._unit_vectors)
        return FractionalIdeal._from_rows(self, rows, den)

    @cached_property
    def _unit_vectors(self):
        n = self.degree
        return [tuple(int(i == j) for j in range(n)) for i in range(n)]

    @cached_property
    def unit_ideal(self) -> "FractionalIdeal":
        return self.ideal(1)

    @cached_property
    def codifferent(self) -> "FractionalIdeal":
        """The trace dual of the ring of integers, ``{x : Tr(x O) in Z}``."""
        return self.unit_ideal.dual()

    @cached_property
    def _different(self) -> "FractionalIdeal":
        return (self.codifferent * self.codifferent).dual()

    def different(self) -> "FractionalIdeal":
        return self._different

    def _mul_int(self, u, v):
        n = self.degree
        out = [0] * n
        table = self.multiplication_table
        for i, a in enumerate(u):
            if a:
                ti = table[i]
                for j, b in enumerate(v):
                    if b:
                        ab = a * b
                        tij = ti[j]
                        for k in range(n):
                            if tij[k]:
                                out[k] += ab * tij[k]
        return tuple(out)

    def _trace_int(self, u) -> int:
        return sum(a * t for a, t in zip(u, self._basis_traces))

    # -- embeddings -----------------------------------------------------------
    @lru_cache(maxsize=16)  # noqa: B019 (fields are long-lived)
    def root_intervals(self, bits: int = 64) -> tuple[tuple[Fraction, Fraction], ...]:
        """Rational isolating intervals of width <= 2^-bits for the real roots."""
        import sympy
        x = sympy.Symbol("x")
        poly = sympy.Poly(list(reversed(self.min_poly)), x)
        out = []
        for (lo, hi), _mult in poly.intervals(eps=sympy.Rational(1, 2 ** bits)):
            out.append((Fraction(int(lo.p), int(lo.q)), Fraction(int(hi.p), int(hi.q))))
        return tuple(out)

    @lru_cache(maxsize=16)  # noqa: B019
    def real_embeddings(self, bits: int = 64) -> list[list]:
        """Interval enclosures ``[eta_j(omega_i)]`` for each real embedding ``j``."""
        ctx = MPIntervalContext()
        ctx.prec = bits + 16
        out = []
        for lo, hi in self.root_intervals(bits):
            theta = ctx.mpf([ctx.mpf(lo.numerator) / lo.denominator,
                             ctx.mpf(hi.numerator) / hi.denominator])
            emb = []
            for w in self.integral_basis:
                acc = ctx.mpf(0)
                for j in range(self.degree - 1, -1, -1):
                    acc = acc * theta + ctx.mpf(w[j].numerator) / w[j].denominator
                emb.append(acc)
            out.append(emb)
        return out

    # -- primes -------------------------------------------------------------
    @lru_cache(maxsize=256)
    def primes_above(self, p: int) -> tuple["PrimeIdeal", ...]:
        """Prime ideals over the rational prime ``p``, found by trial splitting of (p)."""
        import itertools
        n = self.degree
        if p ** n > 10 ** 6:
            raise ValueError(f"trial splitting of ({p}) is too large in degree {n}")
        unit = self.unit_ideal
        pO = self.ideal(p)
        cands = {}
        for coords in itertools.product(range(p), repeat=n):
            if not any(coords):
                continue
            alpha = FieldElement(self, tuple(coords), 1)
            I = pO + FractionalIdeal._principal(self, alpha)
            if I != unit and I not in cands:
                cands[I] = alpha
        if not cands:
            cands[pO] = self.element(p)
        order = sorted(cands, key=lambda I: I.norm())
        primes = []
        for I in order:
            if not any(I <= J for J in order if J is not I and J.norm() < I.norm()):
                primes.append(I)
        result = []
        for P in sorted(primes, key=lambda I: (I.norm(), I.hnf)):
            f = round(math.log(P.norm(), p))
            e = pO.valuation_at(P)
            result.append(PrimeIdeal(p, cands.get(P, self.element(p)), P, e, f))
        return tuple(result)

    def __repr__(self):
        return f"NumberField({self.name})"


@lru_cache(maxsize=None)
def _builtin(name: str) -> NumberField:
    return NumberField.from_json(name)


def builtin_field(name: str) -> NumberField:
    """One of the packaged fields: ``Q``, ``Qsqrt2``, ``Qsqrt3``, ``Qsqrt5``."""
    return _builtin(name)


# --------------------------------------------------------------------------
# elements

class FieldElement:
    """An element ``(1/den) * sum(nums[i] * omega_i)`` in lowest terms."""

    __slots__ = ("field", "nums", "den")

    def __init__(self, field: NumberField, nums: tuple, den: int = 1):
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            nums, den = tuple(-x for x in nums), -den
        g = math.gcd(den, *nums)
        if g > 1:
            nums, den = tuple(x // g for x in nums), den // g
        self.field = field
        self.nums = tuple(nums)
        self.den = den

    @property
    def coords(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(x, self.den) for x in self.nums)

    def power_coords(self) -> list[Fraction]:
        return self.field._basis_to_power(self.coords)

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field is not self.field:
                raise FieldMismatchError("elements belong to different fields")
            return other
        return self.field.element(other)

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        den = self.den * o.den
        return FieldElement(self.field, tuple(a * o.den + b * self.den
                                              for a, b in zip(self.nums, o.nums)), den)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.nums), self.den)

    def __sub__(self, other):
        try:
            return self + (-self._coerce(other))
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return FieldElement(self.field, self.field._mul_int(self.nums, o.nums),
                            self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            return self * self._coerce(other).inverse()
        except TypeError:
            return NotImplemented

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        base = self if e >= 0 else self.inverse()
        result = self.field.one
        for _ in range(abs(e)):
            result = result * base
        return result

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field is other.field and self.nums == other.nums and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return self == self.field.element(other)
        return NotImplemented

    def __hash__(self):
        return hash((id(self.field), self.nums, self.den))

    def is_zero(self) -> bool:
        return not any(self.nums)

    def is_integral(self) -> bool:
        return self.den == 1

    def is_rational(self) -> bool:
        return not any(self.nums[1:])

    def multiplication_matrix(self) -> list[list[Fraction]]:
        """Row ``i`` holds the coordinates of ``self * omega_i``."""
        f = self.field
        return [[Fraction(x, self.den) for x in f._mul_int(self.nums, w)]
                for w in f._unit_vectors]

    def trace(self) -> Fraction:
        return Fraction(self.field._trace_int(self.nums), self.den)

    def norm(self) -> Fraction:
        return _frac_det(self.multiplication_matrix())

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        n = self.field.degree
        if n == 1:
            return FieldElement(self.field, (self.den,), self.nums[0])
        m = self.multiplication_matrix()
        inv = _frac_inverse(m)
        # y * m = e_1  =>  y = e_1 * m^{-1}
        return self.field.from_coords(inv[0])

    def is_unit(self) -> bool:
        return self.is_integral() and abs(self.norm()) == 1

    def signs(self) -> list[int]:
        """Sign of the element under each real embedding (exact, by interval refinement)."""
        if self.is_zero():
            return [0] * self.field.degree
        bits = 64
        while True:
            signs = []
            for emb in self.field.real_embeddings(bits):
                v = sum((e * x for e, x in zip(emb, self.nums)), emb[0] * 0)
                if v.a > 0:
                    signs.append(1)
                elif v.b < 0:
                    signs.append(-1)
                else:
                    break
            else:
                return signs
            bits *= 2
            if bits > 1 << 16:
                raise ArithmeticError("could not separate element from zero")

    def charpoly(self) -> list[Fraction]:
        """Characteristic polynomial coefficients, ascending, via Faddeev-LeVerrier."""
        m = self.multiplication_matrix()
        n = len(m)
        coeffs = [Fraction(0)] * n + [Fraction(1)]
        cur = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        for k in range(1, n + 1):
            am = [[sum((m[i][t] * cur[t][j] for t in range(n)), Fraction(0)) for j in range(n)]
                  for i in range(n)]
            c = -sum((am[i][i] for i in range(n)), Fraction(0)) / k
            coeffs[n - k] = c
            cur = [[am[i][j] + (c if i == j else 0) for j in range(n)] for i in range(n)]
        return coeffs

    def is_totally_positive(self) -> bool:
        """All conjugates positive; exact, since the characteristic polynomial is real-rooted.

        A real-rooted polynomial has only positive roots iff its coefficients
        strictly alternate in sign (Descartes' rule is exact in that case).
        """
        if self.is_zero():
            return False
        if self.field.degree == 1:
            return self.nums[0] > 0
        cp = self.charpoly()
        n = len(cp) - 1
        return all(cp[i] != 0 and (cp[i] > 0) == ((n - i) % 2 == 0) for i in range(n + 1))

    def embeddings(self, bits: int = 64) -> list:
        """Interval enclosures of the real conjugates, one per embedding."""
        out = []
        for emb in self.field.real_embeddings(bits):
            v = sum((e * x for e, x in zip(emb, self.nums)), emb[0] * 0)
            out.append(v / self.den)
        return out

    def __str__(self):
        coeffs = self.power_coords()
        var = self.field.variable
        terms = []
        for i, c in enumerate(coeffs):
            if c == 0:
                continue
            if i == 0:
                mono = str(c)
            else:
                base = var if i == 1 else f"{var}^{i}"
                mono = base if c == 1 else ("-" + base if c == -1 else f"{c}*{base}")
            terms.append(mono)
        if not terms:
            return "0"
        return " + ".join(terms).replace("+ -", "- ")

    def __repr__(self):
        return f"{self.field.name}({self})"


# --------------------------------------------------------------------------
# ideals

class FractionalIdeal:
    __slots__ = ("field", "denominator", "hnf", "is_zero")

    def __init__(self, field: NumberField, denominator: int, hnf_rows, is_zero: bool = False):
        self.field = field
        self.denominator = denominator
        self.hnf = hnf_rows
        self.is_zero = is_zero

    @classmethod
    def zero(cls, field: NumberField) -> "FractionalIdeal":
        return cls(field, 1, None, True)

    @classmethod
    def _from_rows(cls, field, rows, den) -> "FractionalIdeal":
        h = hnf(rows, field.degree)
        g = math.gcd(den, *(x for r in h for x in r))
        if g > 1:
            h = tuple(tuple(x // g for x in r) for r in h)
            den //= g
        return cls(field, den, h)

    @classmethod
    def _from_fraction_rows(cls, field, rows) -> "FractionalIdeal":
        den = reduce(math.lcm, (q.denominator for r in rows for q in r), 1)
        return cls._from_rows(field, [[int(q * den) for q in r] for r in rows], den)

    @classmethod
    def _principal(cls, field, alpha: FieldElement) -> "FractionalIdeal":
        if alpha.is_zero():
            return cls.zero(field)
        rows = [field._mul_int(alpha.nums, w) for w in field._unit_vectors]
        return cls._from_rows(field, rows, alpha.den)

    @classmethod
    def from_json(cls, field: NumberField, doc: dict) -> "FractionalIdeal":
        if doc.get("is_zero"):
            return cls.zero(field)
        return cls._from_rows(field, doc["hnf"], int(doc["denominator"]))

    def to_json(self) -> dict:
        if self.is_zero:
            return {"is_zero": True}
        return {"denominator": self.denominator, "hnf": [list(r) for r in self.hnf]}

    # -- basics -------------------------------------------------------------
    def _same_field(self, other: "FractionalIdeal"):
        if not isinstance(other, FractionalIdeal):
            raise TypeError("expected a FractionalIdeal")
        if other.field is not self.field:
            raise FieldMismatchError("ideals belong to different fields")

    def _key(self):
        return (self.is_zero, self.denominator, self.hnf)

    def __eq__(self, other):
        if not isinstance(other, FractionalIdeal):
            return NotImplemented
        return self.field is other.field and self._key() == other._key()

    def __hash__(self):
        return hash((id(self.field),) + self._key())

    def basis(self) -> list[FieldElement]:
        """A Z-basis of the ideal (the scaled HNF rows)."""
        if self.is_zero:
            return []
        return [FieldElement(self.field, r, self.denominator) for r in self.hnf]

    def is_integral(self) -> bool:
        return self.is_zero or self.denominator == 1

    def is_unit(self) -> bool:
        return self == self.field.unit_ideal

    def _require_nonzero(self, what):
        if self.is_zero:
            raise ZeroIdealError(f"{what} of the zero ideal")

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other: "FractionalIdeal") -> "FractionalIdeal":
        self._same_field(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        den = math.lcm(self.denominator, other.denominator)
        fa, fb = den // self.denominator, den // other.denominator
        rows = [tuple(fa * x for x in r) for r in self.hnf]
        rows += [tuple(fb * x for x in r) for r in other.hnf]
        return FractionalIdeal._from_rows(self.field, rows, den)

    def __mul__(self, other):
        if isinstance(other, (FieldElement, int, Fraction)):
            other = self.field.ideal(other)
        self._same_field(other)
        if self.is_zero or other.is_zero:
            return FractionalIdeal.zero(self.field)
        mul = self.field._mul_int
        rows = [mul(u, v) for u in self.hnf for v in other.hnf]
        return FractionalIdeal._from_rows(self.field, rows,
                                          self.denominator * other.denominator)

    __rmul__ = __mul__

    def dual(self) -> "FractionalIdeal":
        """Trace dual lattice ``{x : Tr(x * self) in Z}``."""
        self._require_nonzero("dual")
        n = self.field.degree
        h_inv = _frac_inverse([[Fraction(x) for x in r] for r in self.hnf])
        g_inv = self.field._gram_inv
        d = self.denominator
        # rows of d * H^{-T} G^{-1}
        rows = []
        for i in range(n):
            col = [h_inv[k][i] for k in range(n)]
            rows.append([d * sum((col[k] * g_inv[k][j] for k in range(n)), Fraction(0))
                         for j in range(n)])
        return FractionalIdeal._from_fraction_rows(self.field, rows)

    def inverse(self) -> "FractionalIdeal":
        """``{x : x * self <= O}``, computed as the dual of ``self * codifferent``."""
        self._require_nonzero("inverse")
        if self.field.degree == 1:
            return FractionalIdeal(self.field, self.hnf[0][0], ((self.denominator,),)) \
                ._normalized()
        return (self * self.field.codifferent).dual()

    def _normalized(self):
        return FractionalIdeal._from_rows(self.field, self.hnf, self.denominator)

    def __truediv__(self, other: "FractionalIdeal") -> "FractionalIdeal":
        if isinstance(other, (FieldElement, int, Fraction)):
            other = self.field.ideal(other)
        return self * other.inverse()

    def __pow__(self, e: int) -> "FractionalIdeal":
        if e < 0:
            return self.inverse() ** (-e)
        result = self.field.unit_ideal
        for _ in range(e):
            result = result * self
        return result

    def intersect(self, other: "FractionalIdeal") -> "FractionalIdeal":
        self._same_field(other)
        if self.is_zero or other.is_zero:
            return FractionalIdeal.zero(self.field)
        return (self.dual() + other.dual()).dual()

    # -- predicates -----------------------------------------------------------
    def __contains__(self, x) -> bool:
        x = self.field.element(x)
        if self.is_zero:
            return x.is_zero()
        d = self.denominator
        v = []
        for a in x.nums:
            q, r = divmod(d * a, x.den)
            if r:
                return False
            v.append(q)
        h = self.hnf
        for j in range(self.field.degree - 1, -1, -1):
            q, r = divmod(v[j], h[j][j])
            if r:
                return False
            if q:
                hj = h[j]
                for k in range(j + 1):
                    v[k] -= q * hj[k]
        return True

    def contains(self, x) -> bool:
        return x in self

    def __le__(self, other: "FractionalIdeal") -> bool:
        """Lattice inclusion ``self <= other`` (i.e. ``other`` divides ``self``)."""
        self._same_field(other)
        return all(b in other for b in self.basis())

    def divides(self, other: "FractionalIdeal") -> bool:
        return other <= self

    def is_ideal(self) -> bool:
        """Closure of the lattice under multiplication by the integral basis."""
        if self.is_zero:
            return True
        return all(b * w in self for b in self.basis() for w in self.field.basis_elements())

    def is_coprime_to(self, other: "FractionalIdeal") -> bool:
        return self + other == self.field.unit_ideal

    # -- invariants -----------------------------------------------------------
    def norm(self) -> Fraction:
        self._require_nonzero("norm")
        return Fraction(math.prod(self.hnf[i][i] for i in range(self.field.degree)),
                        self.denominator ** self.field.degree)

    def intersect_integers(self) -> Fraction:
        """The positive rational ``m`` with ``self ∩ Q = m Z``."""
        self._require_nonzero("intersection with Q")
        return Fraction(self.hnf[0][0], self.denominator)

    def valuation_at(self, P: "FractionalIdeal | PrimeIdeal") -> int:
        if isinstance(P, PrimeIdeal):
            P = P.ideal
        self._require_nonzero("valuation")
        d = self.denominator
        a = self * self.field.element(d)
        return _integral_valuation(a, P) - _integral_valuation(self.field.ideal(d), P)

    def factor(self) -> list[tuple["PrimeIdeal", int]]:
        """Prime factorisation, via the primes over rational primes dividing norm and denominator."""
        import sympy
        self._require_nonzero("factorisation")
        nrm = self.norm()
        ps = set(sympy.factorint(nrm.numerator)) | set(sympy.factorint(nrm.denominator))
        ps |= set(sympy.factorint(self.denominator))
        out = []
        for p in sorted(ps):
            for P in self.field.primes_above(p):
                v = self.valuation_at(P)
                if v:
                    out.append((P, v))
        return out

    def __repr__(self):
        if self.is_zero:
            return "FractionalIdeal(0)"
        return f"FractionalIdeal(1/{self.denominator} * {[list(r) for r in self.hnf]})"


def _integral_valuation(a: FractionalIdeal, P: FractionalIdeal) -> int:
    P_inv = P.inverse()
    v = 0
    while a <= P:
        a = a * P_inv
        v += 1
    return v


@dataclass(frozen=True)
class PrimeIdeal:
    """A prime ``(p, alpha)`` with ramification index ``e`` and residue degree ``f``."""
    p: int
    alpha: FieldElement
    ideal: FractionalIdeal
    e: int
    f: int

    def __str__(self):
        return f"({self.p}, {self.alpha})"


def ideal_sum(a: FractionalIdeal, b: FractionalIdeal) -> FractionalIdeal:
    return a + b


def ideal_mul(a: FractionalIdeal, b: FractionalIdeal) -> FractionalIdeal:
    return a * b


def ideal_inv(a: FractionalIdeal) -> FractionalIdeal:
    return a.inverse()


def ideal_norm(a: FractionalIdeal) -> Fraction:
    return a.norm()


def intersect_integers(a: FractionalIdeal) -> Fraction:
    return a.intersect_integers()


def contains(a: FractionalIdeal, x) -> bool:
    return x in a


def different(field: NumberField) -> FractionalIdeal:
    return field.different()
