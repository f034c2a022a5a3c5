"""Fixed-precision p-adic numbers, exp/log with domain checks, 2-vectors.

A nonzero :class:`PadicNumber` stands for ``p**valuation * unit + O(p**(valuation + precision))``
where ``unit`` is coprime to ``p`` and ``precision`` counts the significant base-p digits
that are known.  Zero carries no significant digits: its ``valuation`` field holds the
absolute precision floor, i.e. the value is ``O(p**valuation)``.

Every operation propagates precision honestly.  Additions whose leading digits cancel
lose relative precision; nothing is ever padded with invented digits.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

__all__ = [
    "DEFAULT_PRECISION",
    "GUARD_DIGITS",
    "DomainError",
    "PrecisionError",
    "PadicNumber",
    "PadicVec2",
    "make",
    "norm",
    "exp_p",
    "log_p",
    "exp_domain_valuation",
    "in_exp_domain",
    "is_prime",
    "valuation_of_int",
]

DEFAULT_PRECISION = 16
GUARD_DIGITS = 4


class DomainError(ValueError):
    """An argument lies outside the convergence domain of a p-adic series."""


class PrecisionError(ArithmeticError):
    """The available digits do not determine the requested result."""


@lru_cache(maxsize=4096)
def _ppow(p: int, k: int) -> int:
    return p**k


@lru_cache(maxsize=256)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def valuation_of_int(n: int, p: int) -> int:
    """Exponent of ``p`` in the nonzero integer ``n``."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def exp_domain_valuation(p: int) -> int:
    """Smallest valuation inside the ball ``|x|_p < p**(-1/(p-1))``.

    That is 1 for odd primes and 2 for ``p = 2``.
    """
    return 2 if p == 2 else 1


def _new(p: int, v: int, u: int, n: int) -> PadicNumber:
    obj = object.__new__(PadicNumber)
    _set = object.__setattr__
    _set(obj, "prime", p)
    _set(obj, "valuation", v)
    _set(obj, "unit", u)
    _set(obj, "precision", n)
    return obj


def _zero(p: int, floor: int) -> PadicNumber:
    return _new(p, floor, 0, 0)


def _from_int_mod(p: int, value: int, absprec: int) -> PadicNumber:
    """Normalise an integer known modulo ``p**absprec``."""
    if absprec <= 0:
        return _zero(p, absprec)
    value %= _ppow(p, absprec)
    if value == 0:
        return _zero(p, absprec)
    v = 0
    while value % p == 0:
        value //= p
        v += 1
    return _new(p, v, value, absprec - v)


class PadicNumber:
    """An element of Q_p known to finitely many digits.  Immutable."""

    __slots__ = ("prime", "valuation", "unit", "precision")

    prime: int
    valuation: int
    unit: int
    precision: int

    def __init__(self, prime: int, valuation: int, unit: int, precision: int):
        if not is_prime(prime):
            raise ValueError(f"{prime} is not prime")
        if precision < 0:
            raise ValueError("precision must be non-negative")
        if precision == 0 or unit % _ppow(prime, precision) == 0:
            unit, precision = 0, 0
        else:
            unit %= _ppow(prime, precision)
            if unit % prime == 0:
                raise ValueError("unit must be coprime to p")
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "valuation", valuation)
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "precision", precision)

    def __setattr__(self, name, value):
        raise AttributeError("PadicNumber is immutable")

    def __reduce__(self):
        return (PadicNumber, (self.prime, self.valuation, self.unit, self.precision))

    # -- construction -----------------------------------------------------

    @classmethod
    def from_rational(cls, value, prime: int, precision: int = DEFAULT_PRECISION) -> PadicNumber:
        """Embed an int or Fraction with ``precision`` significant digits."""
        q = Fraction(value)
        return make(prime, q.numerator, q.denominator, precision)

    @classmethod
    def zero(cls, prime: int, floor: int = DEFAULT_PRECISION) -> PadicNumber:
        """``O(p**floor)``."""
        return _zero(prime, floor)

    @classmethod
    def one(cls, prime: int, precision: int = DEFAULT_PRECISION) -> PadicNumber:
        return _new(prime, 0, 1, precision)

    # -- basic properties -------------------------------------------------

    def is_zero(self) -> bool:
        return self.precision == 0

    @property
    def absolute_precision(self) -> int:
        return self.valuation + self.precision

    @property
    def norm(self) -> Fraction:
        return norm(self)

    def digits(self) -> list[int]:
        """Little-endian base-p digits of the unit."""
        out = []
        u = self.unit
        for _ in range(self.precision):
            u, d = divmod(u, self.prime)
            out.append(d)
        return out

    def residue(self, k: int) -> int:
        """The value modulo ``p**k`` as an integer in ``[0, p**k)``.

        Requires a p-adic integer known to at least ``k`` absolute digits.
        """
        if self.absolute_precision < k and not (self.is_zero() and self.valuation >= k):
            raise PrecisionError(f"only {self.absolute_precision} absolute digits known, {k} requested")
        if self.is_zero():
            return 0
        if self.valuation < 0:
            raise ValueError("not a p-adic integer")
        return (self.unit * _ppow(self.prime, self.valuation)) % _ppow(self.prime, k)

    def to_fraction(self) -> Fraction:
        """The rational ``p**valuation * unit`` (the digits actually stored)."""
        if self.is_zero():
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.prime) ** self.valuation

    def with_precision(self, precision: int) -> PadicNumber:
        """Truncate to at most ``precision`` significant digits."""
        if self.is_zero() or precision >= self.precision:
            return self
        if precision <= 0:
            return _zero(self.prime, self.valuation + max(precision, 0))
        return _new(self.prime, self.valuation, self.unit % _ppow(self.prime, precision), precision)

    def with_absolute_precision(self, absprec: int) -> PadicNumber:
        """Truncate so that no digit at or beyond ``p**absprec`` is claimed."""
        if self.is_zero():
            return _zero(self.prime, min(self.valuation, absprec))
        return self.with_precision(absprec - self.valuation) if absprec < self.absolute_precision else self

    # -- comparison -------------------------------------------------------

    def agrees(self, other, digits: int | None = None) -> bool:
        """Equality at ``digits`` significant digits.

        Two nonzero numbers agree when their valuations match and their units are
        congruent modulo ``p**k`` with ``k = min(digits, self.precision, other.precision)``.
        Zero agrees only with zero.
        """
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        if self.valuation != other.valuation:
            return False
        k = min(self.precision, other.precision)
        if digits is not None:
            k = min(k, digits)
        m = _ppow(self.prime, k)
        return self.unit % m == other.unit % m

    def agrees_absolute(self, other, digits: int) -> bool:
        """True when ``self - other`` vanishes modulo ``p**digits``.

        Raises :class:`PrecisionError` when fewer than ``digits`` absolute digits
        of the difference are known.
        """
        d = self - other
        if d.is_zero():
            if d.valuation < digits:
                raise PrecisionError(f"difference known only to {d.valuation} digits, {digits} requested")
            return True
        return d.valuation >= digits

    def __eq__(self, other):
        if not isinstance(other, (PadicNumber, int, Fraction)):
            return NotImplemented
        try:
            return self.agrees(other)
        except ValueError:
            return False

    __hash__ = None  # equality is precision-dependent, hence not transitive

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> PadicNumber:
        if isinstance(other, PadicNumber):
            if other.prime != self.prime:
                raise ValueError(f"mixed primes {self.prime} and {other.prime}")
            return other
        if isinstance(other, (int, Rational)):
            q = Fraction(other)
            if q == 0:
                return _zero(self.prime, max(self.absolute_precision, self.valuation) + 1 + abs(self.valuation))
            vq = valuation_of_int(q.numerator, self.prime) - valuation_of_int(q.denominator, self.prime)
            n = max(self.precision, self.absolute_precision - vq, 1) + 1
            return make(self.prime, q.numerator, q.denominator, n)
        raise TypeError(f"cannot combine PadicNumber with {type(other).__name__}")

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return _add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return _add(self, -other)

    def __rsub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return _add(other, -self)

    def __neg__(self):
        if self.is_zero():
            return self
        m = _ppow(self.prime, self.precision)
        return _new(self.prime, self.valuation, (-self.unit) % m, self.precision)

    def __mul__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return _mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return _div(self, other)

    def __rtruediv__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return _div(other, self)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return _div(PadicNumber.one(self.prime, self.precision), self) ** (-k)
        if self.is_zero():
            return PadicNumber.one(self.prime, max(self.valuation, 1)) if k == 0 else _zero(self.prime, self.valuation * k)
        m = _ppow(self.prime, self.precision)
        return _new(self.prime, self.valuation * k, pow(self.unit, k, m), self.precision)

    # -- analytic functions -------------------------------------------------

    def exp(self) -> PadicNumber:
        return exp_p(self)

    def log(self) -> PadicNumber:
        return log_p(self)

    # -- serialization / display --------------------------------------------

    def to_json(self) -> dict:
        return {"p": self.prime, "val": self.valuation, "digits": self.digits()}

    @classmethod
    def from_json(cls, data: dict) -> PadicNumber:
        p = int(data["p"])
        digits = [int(d) for d in data["digits"]]
        if any(not 0 <= d < p for d in digits):
            raise ValueError("digit out of range")
        unit = sum(d * p**i for i, d in enumerate(digits))
        if not digits or unit == 0:
            return _zero(p, int(data["val"]) + len(digits))
        if digits[0] == 0:
            raise ValueError("leading (lowest) digit of a unit must be nonzero")
        return PadicNumber(p, int(data["val"]), unit, len(digits))

    def digit_string(self) -> str:
        if self.is_zero():
            return f"0 + O({self.prime}^{self.valuation})"
        sep = "" if self.prime <= 10 else "."
        body = sep.join(str(d) for d in reversed(self.digits()))
        return f"…{body} · {self.prime}^{self.valuation}"

    def __repr__(self):
        if self.is_zero():
            return f"PadicNumber(0 + O({self.prime}^{self.valuation}))"
        return (
            f"PadicNumber(p={self.prime}, val={self.valuation}, "
            f"unit={self.unit}, prec={self.precision})"
        )

    __str__ = digit_string


def _add(x: PadicNumber, y: PadicNumber) -> PadicNumber:
    p = x.prime
    if x.is_zero():
        return y.with_absolute_precision(x.valuation)
    if y.is_zero():
        return x.with_absolute_precision(y.valuation)
    absprec = min(x.valuation + x.precision, y.valuation + y.precision)
    v0 = min(x.valuation, y.valuation)
    if absprec <= v0:
        return _zero(p, absprec)
    s = x.unit * _ppow(p, x.valuation - v0) + y.unit * _ppow(p, y.valuation - v0)
    r = _from_int_mod(p, s, absprec - v0)
    if r.is_zero():
        return _zero(p, absprec)
    return _new(p, r.valuation + v0, r.unit, r.precision)


def _mul(x: PadicNumber, y: PadicNumber) -> PadicNumber:
    p = x.prime
    if x.is_zero() or y.is_zero():
        vx = x.valuation
        vy = y.valuation
        return _zero(p, vx + vy)
    n = min(x.precision, y.precision)
    return _new(p, x.valuation + y.valuation, (x.unit * y.unit) % _ppow(p, n), n)


def _div(x: PadicNumber, y: PadicNumber) -> PadicNumber:
    p = x.prime
    if y.is_zero():
        raise PrecisionError(f"division by a value indistinguishable from zero (O({p}^{y.valuation}))")
    if x.is_zero():
        return _zero(p, x.valuation - y.valuation)
    n = min(x.precision, y.precision)
    m = _ppow(p, n)
    return _new(p, x.valuation - y.valuation, (x.unit * pow(y.unit, -1, m)) % m, n)


def make(prime: int, numerator: int, denominator: int = 1, precision: int = DEFAULT_PRECISION) -> PadicNumber:
    """The p-adic expansion of ``numerator/denominator`` to ``precision`` significant digits.

    >>> make(3, 18, 1, 5).valuation, make(3, 18, 1, 5).unit
    (2, 2)
    >>> make(3, 1, 2, 5).unit
    122
    """
    if not is_prime(prime):
        raise ValueError(f"{prime} is not prime")
    if denominator == 0:
        raise ZeroDivisionError("zero denominator")
    if precision < 1:
        raise ValueError("precision must be at least 1")
    if numerator == 0:
        return _zero(prime, precision)
    a = valuation_of_int(numerator, prime)
    b = valuation_of_int(denominator, prime)
    m = _ppow(prime, precision)
    unit = (numerator // _ppow(prime, a)) * pow(denominator // _ppow(prime, b), -1, m) % m
    return _new(prime, a - b, unit, precision)


def norm(x: PadicNumber) -> Fraction:
    """``|x|_p`` as an exact rational; zero (at any precision) has norm 0."""
    if x.is_zero():
        return Fraction(0)
    return Fraction(x.prime) ** (-x.valuation)


def in_exp_domain(x: PadicNumber) -> bool:
    """``|x|_p < p**(-1/(p-1))``."""
    return x.is_zero() or x.valuation >= exp_domain_valuation(x.prime)


def _domain_message(p: int) -> str:
    return f"|x|_{p} < {p}^(-1/{p - 1})"


def exp_p(x: PadicNumber) -> PadicNumber:
    """The p-adic exponential ``sum x**k / k!``.

    Defined on ``|x|_p < p**(-1/(p-1))``; the result is a unit with ``|exp(x) - 1| = |x|``.
    The returned absolute precision equals that of ``x``.
    """
    p = x.prime
    if x.is_zero():
        return PadicNumber.one(p, max(x.valuation, 1))
    v = x.valuation
    if v < exp_domain_valuation(p):
        raise DomainError(f"exp_p needs {_domain_message(p)}; got valuation {v}")
    target = v + x.precision
    # nu_p(k!) <= (k-1)/(p-1); stop once v*k - (k-1)/(p-1) >= target for the next term
    K = 0
    while (v * (K + 1)) * (p - 1) - K < target * (p - 1):
        K += 1
    e = (K - _digit_sum(K, p)) // (p - 1)
    modulus = _ppow(p, target + e)
    X = x.unit * _ppow(p, v)
    acc = 0
    c = 1  # K!/k!, walking k downward
    for k in range(K, -1, -1):
        acc = (acc * X + c) % modulus
        c = c * k if k else c
    kfact_unit = math.factorial(K) // _ppow(p, e)
    m = _ppow(p, target)
    value = (acc // _ppow(p, e)) * pow(kfact_unit, -1, m) % m
    return _new(p, 0, value, target)


def log_p(x: PadicNumber) -> PadicNumber:
    """The p-adic logarithm ``sum (-1)**(k+1) (x-1)**k / k``.

    Defined on ``|x - 1|_p < p**(-1/(p-1))``; ``|log x| = |x - 1|``.
    """
    p = x.prime
    if x.is_zero():
        raise DomainError("log_p of zero")
    if x.valuation != 0:
        raise DomainError(f"log_p needs {_domain_message(p).replace('|x|', '|x - 1|')}; x is not a unit")
    y = x - 1
    if y.is_zero():
        return _zero(p, y.valuation)
    v = y.valuation
    if v < exp_domain_valuation(p):
        raise DomainError(f"log_p needs {_domain_message(p).replace('|x|', '|x - 1|')}; |x - 1| has valuation {v}")
    target = x.absolute_precision
    K = 1
    while v * (K + 1) - _ilog(K + 1, p) < target:
        K += 1
    L = math.lcm(*range(1, K + 1))
    e = valuation_of_int(L, p)
    modulus = _ppow(p, target + e)
    Y = y.unit * _ppow(p, v)
    acc = 0
    for k in range(K, 0, -1):
        c = L // k if k % 2 else -(L // k)
        acc = (acc + c) * Y % modulus
    m = _ppow(p, target)
    value = (acc // _ppow(p, e)) * pow(L // _ppow(p, e), -1, m) % m
    return _from_int_mod(p, value, target)


def _digit_sum(n: int, p: int) -> int:
    s = 0
    while n:
        n, d = divmod(n, p)
        s += d
    return s


def _ilog(n: int, p: int) -> int:
    k = 0
    while n >= p:
        n //= p
        k += 1
    return k


class PadicVec2:
    """A point of Q_p^2 with the max norm."""

    __slots__ = ("c1", "c2")

    def __init__(self, c1: PadicNumber, c2: PadicNumber):
        if c1.prime != c2.prime:
            raise ValueError("components must share a prime")
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", c2)

    def __setattr__(self, name, value):
        raise AttributeError("PadicVec2 is immutable")

    def __reduce__(self):
        return (PadicVec2, (self.c1, self.c2))

    @classmethod
    def from_rationals(cls, a, b, prime: int, precision: int = DEFAULT_PRECISION) -> PadicVec2:
        return cls(PadicNumber.from_rational(a, prime, precision), PadicNumber.from_rational(b, prime, precision))

    @classmethod
    def zero(cls, prime: int, floor: int = DEFAULT_PRECISION) -> PadicVec2:
        z = PadicNumber.zero(prime, floor)
        return cls(z, z)

    @property
    def prime(self) -> int:
        return self.c1.prime

    def __iter__(self):
        yield self.c1
        yield self.c2

    def __getitem__(self, i: int) -> PadicNumber:
        return (self.c1, self.c2)[i]

    @property
    def norm(self) -> Fraction:
        return max(norm(self.c1), norm(self.c2))

    def valuation(self) -> int:
        """Valuation of the max norm (a lower bound on both components)."""
        return min(self.c1.valuation, self.c2.valuation)

    def dot(self, other: PadicVec2) -> PadicNumber:
        return self.c1 * other.c1 + self.c2 * other.c2

    def swapped(self) -> PadicVec2:
        return PadicVec2(self.c2, self.c1)

    def __add__(self, other: PadicVec2) -> PadicVec2:
        return PadicVec2(self.c1 + other.c1, self.c2 + other.c2)

    def __sub__(self, other: PadicVec2) -> PadicVec2:
        return PadicVec2(self.c1 - other.c1, self.c2 - other.c2)

    def __neg__(self) -> PadicVec2:
        return PadicVec2(-self.c1, -self.c2)

    def scale(self, c) -> PadicVec2:
        return PadicVec2(self.c1 * c, self.c2 * c)

    def agrees(self, other: PadicVec2, digits: int | None = None) -> bool:
        return self.c1.agrees(other.c1, digits) and self.c2.agrees(other.c2, digits)

    def exp(self) -> PadicVec2:
        return PadicVec2(exp_p(self.c1), exp_p(self.c2))

    def log(self) -> PadicVec2:
        return PadicVec2(log_p(self.c1), log_p(self.c2))

    def to_json(self) -> list:
        return [self.c1.to_json(), self.c2.to_json()]

    @classmethod
    def from_json(cls, data) -> PadicVec2:
        return cls(PadicNumber.from_json(data[0]), PadicNumber.from_json(data[1]))

    def __repr__(self):
        return f"PadicVec2({self.c1!r}, {self.c2!r})"
