"""Exact scalars: rational functions over Q in declared parameters.

Parameters are transcendental, so two scalars are equal exactly when
sympy's reduced fraction representations agree.  The canonical text form
makes the denominator monic under deglex in the declared parameter
order; sympy does not do that on its own, so it happens at this
boundary.
"""

from fractions import Fraction

import sympy
from sympy import QQ
from sympy.parsing.sympy_parser import parse_expr, standard_transformations, convert_xor
from sympy.polys.fields import field as _sympy_field
from sympy.polys.orderings import grlex

from .errors import DivisionByZero, ParseError, ZeroDenominatorAtPoint

_TRANSFORMS = standard_transformations + (convert_xor,)

_FIELDS = {}


def scalar_field(params=()):
    """Shared ScalarField instances, one per parameter tuple."""
    key = tuple(params)
    if key not in _FIELDS:
        _FIELDS[key] = ScalarField(key)
    return _FIELDS[key]


class ScalarField:
    """The field Q(p1, ..., pk) for an ordered list of parameter names."""

    def __init__(self, params):
        self.params = tuple(params)
        for p in self.params:
            if not (isinstance(p, str) and p.isidentifier()):
                raise ParseError(f"bad parameter name {p!r}")
        if len(set(self.params)) != len(self.params):
            raise ParseError(f"duplicate parameter names in {list(self.params)}")
        parts = _sympy_field(list(self.params), QQ, grlex)
        self._field = parts[0]
        self._gens = tuple(parts[1:])
        self._symbols = {p: sympy.Symbol(p) for p in self.params}
        self.zero = FieldElement(self, self._field.zero)
        self.one = FieldElement(self, self._field.one)

    def __repr__(self):
        return "Q({})".format(", ".join(self.params)) if self.params else "Q"

    def gen(self, name):
        return FieldElement(self, self._gens[self.params.index(name)])

    def gens(self):
        return tuple(FieldElement(self, g) for g in self._gens)

    def from_rational(self, value):
        q = Fraction(value)
        return FieldElement(self, self._field.one * QQ(q.numerator, q.denominator))

    def from_expr(self, expr):
        unknown = {str(s) for s in expr.free_symbols} - set(self.params)
        if unknown:
            raise ParseError(
                f"unknown parameter(s) {sorted(unknown)}; declared: {list(self.params)}")
        try:
            return FieldElement(self, self._field.from_expr(expr))
        except Exception as exc:
            raise ParseError(f"not a rational function in {list(self.params)}: {expr} ({exc})")

    def parse(self, text):
        try:
            expr = parse_expr(text, local_dict=dict(self._symbols),
                              transformations=_TRANSFORMS)
        except Exception as exc:
            raise ParseError(f"cannot parse scalar {text!r}: {exc}")
        return self.from_expr(expr)

    def element(self, value):
        """Coerce an int, Fraction, str, or FieldElement into this field."""
        if isinstance(value, FieldElement):
            if value.field is self:
                return value
            return self.parse(str(value))
        if isinstance(value, str):
            return self.parse(value)
        return self.from_rational(value)


class FieldElement:
    """One scalar, immutable.  Arithmetic stays inside the declared field."""

    __slots__ = ("field", "_f")

    def __init__(self, field, frac):
        self.field = field
        self._f = frac

    # representation

    def _monic_parts(self):
        num, den = self._f.numer, self._f.denom
        lc = den.LC
        if lc != QQ(1):
            s = QQ(1, 1) / lc
            num = num.mul_ground(s)
            den = den.mul_ground(s)
        return num, den

    def __str__(self):
        num, den = self._monic_parts()
        ns = str(num).replace("**", "^")
        if not den - den.ring.one:
            return ns
        ds = str(den).replace("**", "^")
        if len(num.terms()) > 1:
            ns = f"({ns})"
        if len(den.terms()) > 1 or "*" in ds:
            ds = f"({ds})"
        return f"{ns}/{ds}"

    def __repr__(self):
        return f"<{self} in {self.field!r}>"

    # predicates

    @property
    def is_zero(self):
        return not self._f

    def __bool__(self):
        return bool(self._f)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field is other.field and self._f == other._f
        if isinstance(other, int):
            return self._f == other
        if isinstance(other, Fraction):
            return self._f == self.field._field.one * QQ(other.numerator, other.denominator)
        return NotImplemented

    def __hash__(self):
        return hash(self._f)

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field is not self.field:
                raise ValueError(f"mixing scalars from {self.field!r} and {other.field!r}")
            return other._f
        if isinstance(other, int):
            return self.field._field.one * other
        if isinstance(other, Fraction):
            return self.field._field.one * QQ(other.numerator, other.denominator)
        return None

    def __add__(self, other):
        f = self._coerce(other)
        if f is None:
            return NotImplemented
        return FieldElement(self.field, self._f + f)

    __radd__ = __add__

    def __sub__(self, other):
        f = self._coerce(other)
        if f is None:
            return NotImplemented
        return FieldElement(self.field, self._f - f)

    def __rsub__(self, other):
        f = self._coerce(other)
        if f is None:
            return NotImplemented
        return FieldElement(self.field, f - self._f)

    def __mul__(self, other):
        f = self._coerce(other)
        if f is None:
            return NotImplemented
        return FieldElement(self.field, self._f * f)

    __rmul__ = __mul__

    def __truediv__(self, other):
        f = self._coerce(other)
        if f is None:
            return NotImplemented
        if not f:
            raise DivisionByZero(f"division of {self} by zero")
        return FieldElement(self.field, self._f / f)

    def __rtruediv__(self, other):
        f = self._coerce(other)
        if f is None:
            return NotImplemented
        if not self._f:
            raise DivisionByZero(f"division of {other} by zero")
        return FieldElement(self.field, f / self._f)

    def __neg__(self):
        return FieldElement(self.field, -self._f)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inv() ** (-n)
        return FieldElement(self.field, self._f ** n)

    def inv(self):
        if not self._f:
            raise DivisionByZero("inverting zero")
        return FieldElement(self.field, 1 / self._f)

    # specialization

    def specialize(self, assignments):
        """Substitute rational values for a subset of the parameters.

        Returns a FieldElement of the field on the remaining parameters.
        Raises ZeroDenominatorAtPoint when the denominator vanishes at
        the chosen point.
        """
        subs = {}
        for name, value in assignments.items():
            if name not in self.field.params:
                raise ParseError(f"unknown parameter {name!r}; declared: {list(self.field.params)}")
            q = Fraction(value)
            subs[self.field._symbols[name]] = sympy.Rational(q.numerator, q.denominator)
        target = scalar_field(tuple(p for p in self.field.params if p not in assignments))
        den = target._field.from_expr(self._f.denom.as_expr().xreplace(subs))
        if not den:
            raise ZeroDenominatorAtPoint(
                f"denominator of {self} vanishes at {dict(assignments)}", assignments)
        num = target._field.from_expr(self._f.numer.as_expr().xreplace(subs))
        return FieldElement(target, num / den)
