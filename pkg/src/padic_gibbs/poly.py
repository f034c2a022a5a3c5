"""Polynomials with p-adic coefficients: univariate (Horner, derivative,
synthetic division) and a small sparse multivariate type for 1-2 variable
systems."""

from __future__ import annotations

from fractions import Fraction

from .padic import PadicNumber, PrecisionError

__all__ = ["PadicPoly", "PadicMPoly", "RationalMap", "InconsistencyError"]


class InconsistencyError(RuntimeError):
    """A computation that must succeed for in-domain inputs did not."""


class PadicPoly:
    """``sum coefficients[i] * u**i``; trailing coefficients indistinguishable from
    zero are dropped, so the leading coefficient is nonzero at working precision."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients):
        coeffs = list(coefficients)
        if not coeffs:
            raise ValueError("a polynomial needs at least one coefficient")
        p = coeffs[0].prime
        if any(c.prime != p for c in coeffs):
            raise ValueError("coefficients must share a prime")
        while len(coeffs) > 1 and coeffs[-1].is_zero():
            coeffs.pop()
        self.coefficients = tuple(coeffs)

    @classmethod
    def from_ints(cls, coefficients, prime: int, precision: int) -> PadicPoly:
        return cls(PadicNumber.from_rational(c, prime, precision) for c in coefficients)

    @property
    def prime(self) -> int:
        return self.coefficients[0].prime

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x: PadicNumber) -> PadicNumber:
        return self.eval(x)

    def eval(self, x: PadicNumber) -> PadicNumber:
        acc = self.coefficients[-1]
        for c in reversed(self.coefficients[:-1]):
            acc = acc * x + c
        return acc

    def derivative(self) -> PadicPoly:
        if self.degree == 0:
            return PadicPoly([PadicNumber.zero(self.prime, self.coefficients[0].absolute_precision)])
        return PadicPoly(c * i for i, c in enumerate(self.coefficients) if i > 0)

    def deflate(self, root: PadicNumber) -> tuple[PadicPoly, PadicNumber]:
        """Synthetic division by ``u - root``: returns ``(quotient, remainder)``.

        When the remainder is distinguishable from zero the quotient is not a
        deflation; callers decide what that means (see :class:`InconsistencyError`).
        """
        if self.degree == 0:
            raise ValueError("cannot deflate a constant")
        out = []
        acc = self.coefficients[-1]
        for c in reversed(self.coefficients[:-1]):
            out.append(acc)
            acc = acc * root + c
        return PadicPoly(reversed(out)), acc

    def times_linear(self, root: PadicNumber) -> PadicPoly:
        """``(u - root) * self``."""
        z = PadicNumber.zero(self.prime, max(c.absolute_precision for c in self.coefficients))
        shifted = (z,) + self.coefficients
        scaled = tuple(-c * root for c in self.coefficients) + (z,)
        return PadicPoly(a + b for a, b in zip(shifted, scaled))

    def to_mpoly(self) -> PadicMPoly:
        return PadicMPoly({(i,): c for i, c in enumerate(self.coefficients)}, nvars=1)

    def agrees(self, other: PadicPoly, digits: int | None = None) -> bool:
        n = max(len(self.coefficients), len(other.coefficients))
        a = self.coefficients + (None,) * (n - len(self.coefficients))
        b = other.coefficients + (None,) * (n - len(other.coefficients))
        for x, y in zip(a, b):
            if x is None or y is None:
                z = x if y is None else y
                if not z.is_zero():
                    return False
            elif not (x - y).is_zero() and not x.agrees(y, digits):
                return False
        return True

    def __repr__(self):
        return f"PadicPoly({list(self.coefficients)!r})"


class PadicMPoly:
    """Sparse polynomial ``{exponent tuple: coefficient}`` in ``nvars`` variables.

    Coefficients may be any ring elements supporting ``+`` and ``*`` with ints;
    the model builds these with :class:`PadicNumber` coefficients.
    """

    __slots__ = ("terms", "nvars")

    def __init__(self, terms: dict, nvars: int):
        self.nvars = nvars
        # p-adic zeros are kept: their precision floor still bounds the system
        self.terms = {e: c for e, c in terms.items() if not _is_exact_zero(c)}

    @classmethod
    def variable(cls, i: int, nvars: int, one) -> PadicMPoly:
        e = tuple(1 if j == i else 0 for j in range(nvars))
        return cls({e: one}, nvars)

    @classmethod
    def constant(cls, c, nvars: int) -> PadicMPoly:
        return cls({(0,) * nvars: c}, nvars)

    def _lift(self, other) -> PadicMPoly:
        if isinstance(other, PadicMPoly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            ref = next((c for c in self.terms.values() if isinstance(c, PadicNumber)), None)
            if ref is not None:
                prec = max(c.absolute_precision for c in self.terms.values())
                other = PadicNumber.from_rational(other, ref.prime, max(prec, 1))
        return PadicMPoly.constant(other, self.nvars)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return PadicMPoly(out, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return PadicMPoly({e: -c for e, c in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, PadicMPoly):
            return PadicMPoly({e: c * other for e, c in self.terms.items()}, self.nvars)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t = c1 * c2
                out[e] = out[e] + t if e in out else t
        return PadicMPoly(out, self.nvars)

    __rmul__ = __mul__

    @property
    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degrees(self) -> tuple[int, ...]:
        return tuple(max((e[i] for e in self.terms), default=0) for i in range(self.nvars))

    def eval(self, point):
        """Evaluate at a sequence of ``nvars`` ring elements."""
        if len(point) != self.nvars:
            raise ValueError("point has the wrong dimension")
        powers = [_powers(x, d) for x, d in zip(point, self.degrees())]
        acc = None
        for e, c in sorted(self.terms.items()):
            t = c
            for i, k in enumerate(e):
                if k:
                    t = t * powers[i][k]
            acc = t if acc is None else acc + t
        if acc is None:
            return 0 * point[0]
        return acc

    __call__ = eval

    def partial(self, i: int) -> PadicMPoly:
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = c * e[i]
        return PadicMPoly(out, self.nvars)

    def substitute(self, i: int, value) -> PadicMPoly:
        """Fix variable ``i`` to a constant, keeping the variable count."""
        out: dict = {}
        for e, c in self.terms.items():
            f = list(e)
            k = f[i]
            f[i] = 0
            f = tuple(f)
            t = c
            for _ in range(k):
                t = t * value
            out[f] = out[f] + t if f in out else t
        return PadicMPoly(out, self.nvars)

    def to_univariate(self, i: int = 0) -> PadicPoly:
        """View as a polynomial in variable ``i`` (all others must be absent)."""
        if any(k for e in self.terms for j, k in enumerate(e) if j != i):
            raise ValueError("polynomial depends on other variables")
        deg = self.degrees()[i]
        coeffs = []
        for d in range(deg + 1):
            e = tuple(d if j == i else 0 for j in range(self.nvars))
            coeffs.append(self.terms.get(e))
        ref = next(c for c in coeffs if c is not None)
        floor = max(c.absolute_precision for c in coeffs if c is not None)
        zero = PadicNumber.zero(ref.prime, floor)
        return PadicPoly(c if c is not None else zero for c in coeffs)

    def integer_terms(self, modulus_digits: int) -> list[tuple[tuple[int, ...], int]]:
        """Coefficients as integers modulo ``p**modulus_digits`` (they must be
        p-adic integers known to that many digits)."""
        out = []
        for e, c in sorted(self.terms.items()):
            if c.is_zero():
                continue
            if c.valuation < 0:
                raise ValueError("coefficients must be p-adic integers")
            out.append((e, c.residue(modulus_digits)))
        return out

    def min_coefficient_absprec(self) -> int:
        return min(c.absolute_precision for c in self.terms.values())

    def __repr__(self):
        return f"PadicMPoly({self.terms!r}, nvars={self.nvars})"


def _is_exact_zero(c) -> bool:
    if isinstance(c, PadicNumber):
        return False
    try:
        return c == 0
    except (TypeError, PrecisionError):
        return False


def _powers(x, d: int) -> list:
    out = [None, x]
    for _ in range(2, d + 1):
        out.append(out[-1] * x)
    return out


class RationalMap:
    """``x -> factor * numerator(x) / denominator(x)`` on p-adic numbers."""

    __slots__ = ("numerator", "denominator", "factor")

    def __init__(self, numerator: PadicPoly, denominator: PadicPoly, factor: PadicNumber | None = None):
        self.numerator = numerator
        self.denominator = denominator
        self.factor = factor

    def __call__(self, x: PadicNumber) -> PadicNumber:
        den = self.denominator(x)
        if den.is_zero():
            raise ZeroDivisionError("pole of the rational map")
        out = self.numerator(x) / den
        return out * self.factor if self.factor is not None else out

    def __repr__(self):
        return f"RationalMap({self.numerator!r}, {self.denominator!r}, factor={self.factor!r})"
