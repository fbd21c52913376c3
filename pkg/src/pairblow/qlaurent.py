"""Exact Laurent polynomials in the box-counting variable q.

Coefficients are arbitrary-precision rationals and exponents may be
negative.  These are the values every partition-function coefficient in
the engine lives in: finite Laurent polynomials, never truncated series,
never floats.  Division is exact-or-error so a wrong derivation cannot
hide behind a silent truncation.

Instances are immutable and hashable; they can be shared freely between
threads.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterator, Mapping, Union


class DivisionByZero(ZeroDivisionError):
    """Raised when the divisor of an exact division is zero."""


class NonExactDivision(ArithmeticError):
    """Raised when a quotient would leave a nonzero remainder."""


Rational = Union[int, Fraction]


class QLaurent:
    """A Laurent polynomial sum(c_k * q^k) with exact rational c_k.

    The internal map never stores a zero coefficient, so equality is
    plain coefficient-wise comparison.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[int, Rational] | None = None):
        normalized: dict[int, Fraction] = {}
        if terms:
            for exp, coeff in terms.items():
                c = Fraction(coeff)
                if c:
                    normalized[int(exp)] = c
        self._terms = normalized

    # -- constructors ---------------------------------------------------

    @classmethod
    def const(cls, c: Rational) -> "QLaurent":
        return cls({0: Fraction(c)})

    @classmethod
    def q_power(cls, k: int, coeff: Rational = 1) -> "QLaurent":
        return cls({k: Fraction(coeff)})

    # -- inspection -----------------------------------------------------

    def items(self) -> Iterator[tuple[int, Fraction]]:
        """Terms as (exponent, coefficient), exponents ascending."""
        return iter(sorted(self._terms.items()))

    def coefficient(self, k: int) -> Fraction:
        return self._terms.get(k, Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def min_exponent(self) -> int:
        if not self._terms:
            raise ValueError("zero polynomial has no exponents")
        return min(self._terms)

    def max_exponent(self) -> int:
        if not self._terms:
            raise ValueError("zero polynomial has no exponents")
        return max(self._terms)

    # -- equality -------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = QLaurent.const(other)
        if not isinstance(other, QLaurent):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    # -- ring operations ------------------------------------------------

    def __add__(self, other: "QLaurent | Rational") -> "QLaurent":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms = dict(self._terms)
        for exp, coeff in other._terms.items():
            c = terms.get(exp, Fraction(0)) + coeff
            if c:
                terms[exp] = c
            else:
                terms.pop(exp, None)
        out = QLaurent.__new__(QLaurent)
        out._terms = terms
        return out

    __radd__ = __add__

    def __neg__(self) -> "QLaurent":
        out = QLaurent.__new__(QLaurent)
        out._terms = {e: -c for e, c in self._terms.items()}
        return out

    def __sub__(self, other: "QLaurent | Rational") -> "QLaurent":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: "QLaurent | Rational") -> "QLaurent":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other: "QLaurent | Rational") -> "QLaurent":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms: dict[int, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = e1 + e2
                c = terms.get(e, Fraction(0)) + c1 * c2
                if c:
                    terms[e] = c
                else:
                    terms.pop(e, None)
        out = QLaurent.__new__(QLaurent)
        out._terms = terms
        return out

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "QLaurent":
        if n < 0:
            raise ValueError("negative powers are not defined on Laurent polynomials")
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c: Rational) -> "QLaurent":
        c = Fraction(c)
        if not c:
            return ZERO
        out = QLaurent.__new__(QLaurent)
        out._terms = {e: coeff * c for e, coeff in self._terms.items()}
        return out

    def divide_exact(self, other: "QLaurent | Rational") -> "QLaurent":
        """Exact quotient in the Laurent ring.

        Raises DivisionByZero when other == 0 and NonExactDivision when
        other does not divide self.  On success mul(result, other) == self.
        """
        other = _coerce(other)
        if other.is_zero():
            raise DivisionByZero("division by the zero Laurent polynomial")
        if self.is_zero():
            return ZERO
        # Shift both operands to honest polynomials and run long division
        # from the top degree; the exponent shift is restored at the end.
        shift = self.min_exponent() - other.min_exponent()
        rem = {e - self.min_exponent(): c for e, c in self._terms.items()}
        den = {e - other.min_exponent(): c for e, c in other._terms.items()}
        den_deg = max(den)
        den_top = den[den_deg]
        quot: dict[int, Fraction] = {}
        while rem:
            deg = max(rem)
            if deg < den_deg:
                raise NonExactDivision("nonzero remainder in Laurent division")
            factor = rem[deg] / den_top
            qexp = deg - den_deg
            quot[qexp] = factor
            for e, c in den.items():
                e2 = e + qexp
                r = rem.get(e2, Fraction(0)) - factor * c
                if r:
                    rem[e2] = r
                else:
                    rem.pop(e2, None)
        out = QLaurent.__new__(QLaurent)
        out._terms = {e + shift: c for e, c in quot.items()}
        return out

    # -- canonical text form ---------------------------------------------

    def render(self) -> str:
        """Canonical text: terms with ascending exponents, rationals as p/r.

        Examples: "0", "1", "q^-1 + q", "1/2*q - 1/2*q^3".
        """
        if not self._terms:
            return "0"
        pieces = []
        for i, (exp, coeff) in enumerate(self.items()):
            sign = "-" if coeff < 0 else "+"
            body = _render_term(abs(coeff), exp)
            if i == 0:
                pieces.append(body if sign == "+" else "-" + body)
            else:
                pieces.append(f" {sign} {body}")
        return "".join(pieces)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"QLaurent({self.render()!r})"

    @classmethod
    def parse(cls, text: str) -> "QLaurent":
        """Parse the canonical text form back, bit-exactly."""
        s = text.strip()
        if not s:
            raise ValueError("empty Laurent polynomial text")
        if s == "0":
            return ZERO
        terms: dict[int, Fraction] = {}
        for sign, body in _split_terms(s):
            exp, coeff = _parse_term(body)
            coeff = -coeff if sign == "-" else coeff
            terms[exp] = terms.get(exp, Fraction(0)) + coeff
        return cls(terms)


def _coerce(value: object) -> QLaurent:
    if isinstance(value, QLaurent):
        return value
    if isinstance(value, (int, Fraction)):
        return QLaurent.const(value)
    return NotImplemented


def _render_term(coeff: Fraction, exp: int) -> str:
    if exp == 0:
        return str(coeff)
    qpart = "q" if exp == 1 else f"q^{exp}"
    if coeff == 1:
        return qpart
    return f"{coeff}*{qpart}"


def _split_terms(s: str) -> list[tuple[str, str]]:
    """Split "a + b - c" into signed term bodies.

    A +/- is a term separator (or a leading sign) unless it directly
    follows '^', where it belongs to an exponent like q^-1.
    """
    out: list[tuple[str, str]] = []
    sign = "+"
    buf: list[str] = []
    last_hard = ""
    for ch in s:
        in_term = any(not c.isspace() for c in buf)
        if ch in "+-" and last_hard != "^":
            if in_term:
                out.append((sign, "".join(buf).strip()))
                buf = []
            sign = ch
        else:
            buf.append(ch)
        if not ch.isspace():
            last_hard = ch
    body = "".join(buf).strip()
    if body:
        out.append((sign, body))
    return out


_TERM_RE = re.compile(
    r"^(?:(?P<coeff>\d+(?:/\d+)?)\s*\*?\s*)?(?P<q>q(?:\^(?P<exp>-?\d+))?)?$"
)


def _parse_term(body: str) -> tuple[int, Fraction]:
    m = _TERM_RE.match(body.replace(" ", ""))
    if not m or (m.group("coeff") is None and m.group("q") is None):
        raise ValueError(f"cannot parse Laurent term {body!r}")
    coeff = Fraction(m.group("coeff")) if m.group("coeff") else Fraction(1)
    if m.group("q") is None:
        return 0, coeff
    exp = int(m.group("exp")) if m.group("exp") else 1
    return exp, coeff


ZERO = QLaurent()
ONE = QLaurent.const(1)
Q = QLaurent.q_power(1)


# Module-level aliases matching the operation names used elsewhere.

def add(a: QLaurent, b: QLaurent) -> QLaurent:
    return a + b


def mul(a: QLaurent, b: QLaurent) -> QLaurent:
    return a * b


def scale(c: Rational, a: QLaurent) -> QLaurent:
    return a.scale(c)


def divide_exact(a: QLaurent, b: QLaurent) -> QLaurent:
    return a.divide_exact(b)
