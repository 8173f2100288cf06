"""Truncated Laurent expansions in a perturbation parameter, with exact rational
coefficients.

An expansion stores the coefficients of ``eps**h .. eps**k`` together with an
implicit remainder that is o(eps**k) as eps -> 0.  Every operation computes the
exact coefficients *and* the guaranteed truncation window of the result; the
window never claims more than the operational rules allow.  Coefficients are
``fractions.Fraction`` throughout, so questions such as "is the leading
coefficient nonzero" are decidable, not approximate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rational = Union[int, str, Fraction]


class CalculusError(Exception):
    """Base class for errors raised by expansion arithmetic."""


class InconsistentMerge(CalculusError):
    """Two expansions of the same function disagree on a shared coefficient."""


class NonPivotalDivision(CalculusError):
    """Division or inversion by an expansion whose leading coefficient is zero."""


class EmptyInput(CalculusError):
    """A multi-operand operation received an empty sequence."""


class NonPositiveEpsilon(CalculusError):
    """Expansions are defined for small positive eps only."""


def _as_fraction(value: Rational) -> Fraction:
    # Floats are rejected outright: the calculus is exact by contract.
    if isinstance(value, float):
        raise TypeError(
            "floating-point values may not enter an expansion; "
            "use int, Fraction, or a 'p/q' string"
        )
    return Fraction(value)


@dataclass(frozen=True)
class LaurentExpansion:
    """A (h, k)-expansion: ``coeffs[j]`` multiplies ``eps**(h + j)``.

    The upper order is implicit, ``k = h + len(coeffs) - 1``, and the
    remainder o(eps**k) is abstract: only its order is tracked.
    """

    h: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if isinstance(self.h, bool) or not isinstance(self.h, int):
            raise TypeError("order h must be an integer")
        coeffs = tuple(_as_fraction(c) for c in self.coeffs)
        if not coeffs:
            raise ValueError("an expansion has at least one coefficient (h <= k)")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def k(self) -> int:
        return self.h + len(self.coeffs) - 1

    @property
    def pivotal(self) -> bool:
        """True when the leading coefficient is (exactly) nonzero."""
        return self.coeffs[0] != 0

    def coefficient(self, power: int) -> Fraction:
        """Coefficient of ``eps**power``, zero-padded outside the window."""
        if self.h <= power <= self.k:
            return self.coeffs[power - self.h]
        return Fraction(0)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def stripped(self) -> "LaurentExpansion":
        """Drop leading zero coefficients (keeping at least the last one)."""
        i = 0
        while i < len(self.coeffs) - 1 and self.coeffs[i] == 0:
            i += 1
        if i == 0:
            return self
        return LaurentExpansion(self.h + i, self.coeffs[i:])

    # -- serialization (shared wire format: k is implied by the length) ------

    def to_json(self) -> dict:
        return {"h": self.h, "coeffs": [str(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj) -> "LaurentExpansion":
        if not isinstance(obj, dict):
            raise TypeError("expansion must be an object with 'h' and 'coeffs'")
        try:
            h = obj["h"]
            raw = obj["coeffs"]
        except KeyError as exc:
            raise TypeError(f"expansion object is missing key {exc}") from None
        if not isinstance(raw, list):
            raise TypeError("'coeffs' must be an array of rational strings")
        return cls(h, tuple(_as_fraction(c) for c in raw))

    # -- operator sugar (delegates to the module-level operations) -----------

    def __add__(self, other):
        if not isinstance(other, LaurentExpansion):
            return NotImplemented
        return add(self, other)

    def __sub__(self, other):
        if not isinstance(other, LaurentExpansion):
            return NotImplemented
        return add(self, scale(-1, other))

    def __mul__(self, other):
        if not isinstance(other, LaurentExpansion):
            return NotImplemented
        return mul(self, other)

    def __truediv__(self, other):
        if not isinstance(other, LaurentExpansion):
            return NotImplemented
        return div(self, other)

    def __neg__(self):
        return scale(-1, self)

    def __str__(self) -> str:
        parts = []
        for j, c in enumerate(self.coeffs):
            if c == 0:
                continue
            power = self.h + j
            if power == 0:
                parts.append(str(c))
            elif c == 1:
                parts.append(f"eps^{power}")
            else:
                parts.append(f"{c}*eps^{power}")
        body = " + ".join(parts) if parts else "0"
        return f"{body} + o(eps^{self.k})"


def zero(h: int, k: int) -> LaurentExpansion:
    """The all-zero (h, k)-expansion."""
    if k < h:
        raise ValueError("need h <= k")
    return LaurentExpansion(h, (Fraction(0),) * (k - h + 1))


def one(k: int = 0) -> LaurentExpansion:
    """The constant 1 as a (0, k)-expansion with zero remainder."""
    if k < 0:
        raise ValueError("the unit expansion needs k >= 0")
    return LaurentExpansion(0, (Fraction(1),) + (Fraction(0),) * k)


def monomial(coeff: Rational, power: int = 0) -> LaurentExpansion:
    """A single-term (power, power)-expansion."""
    return LaurentExpansion(power, (_as_fraction(coeff),))


def refine(x: LaurentExpansion, y: LaurentExpansion) -> LaurentExpansion:
    """Merge two expansions of the same function into the most informative one.

    Leading zero coefficients are stripped first; the merged window is
    (max h, max k), overlapping coefficients must agree exactly, and the
    longer representation supplies the tail.
    """
    xs, ys = x.stripped(), y.stripped()
    h = max(xs.h, ys.h)
    k = max(xs.k, ys.k)

    def tracked(e: LaurentExpansion, power: int):
        if e.h <= power <= e.k:
            return e.coeffs[power - e.h]
        return None

    for power in range(min(xs.h, ys.h), h):
        for e in (xs, ys):
            c = tracked(e, power)
            if c is not None and c != 0:
                raise InconsistentMerge(
                    f"nonzero coefficient {c} at order {power}, below the "
                    f"merged leading order {h}"
                )
    coeffs = []
    for power in range(h, k + 1):
        cx, cy = tracked(xs, power), tracked(ys, power)
        if cx is not None and cy is not None and cx != cy:
            raise InconsistentMerge(
                f"coefficient mismatch at order {power}: {cx} != {cy}"
            )
        coeffs.append(cx if cx is not None else cy)
    return LaurentExpansion(h, tuple(coeffs))


def scale(c: Rational, x: LaurentExpansion) -> LaurentExpansion:
    """Multiply by an exact constant; the window is unchanged."""
    c = _as_fraction(c)
    return LaurentExpansion(x.h, tuple(c * a for a in x.coeffs))


def add(x: LaurentExpansion, y: LaurentExpansion) -> LaurentExpansion:
    """Sum, tracked on the window (min h, min k)."""
    h = min(x.h, y.h)
    k = min(x.k, y.k)
    return LaurentExpansion(
        h, tuple(x.coefficient(p) + y.coefficient(p) for p in range(h, k + 1))
    )


def mul(x: LaurentExpansion, y: LaurentExpansion) -> LaurentExpansion:
    """Product: window (h_x + h_y, min(k_x + h_y, k_y + h_x)), Cauchy coefficients."""
    h = x.h + y.h
    k = min(x.k + y.h, y.k + x.h)
    coeffs = []
    for r in range(k - h + 1):
        coeffs.append(sum((x.coeffs[i] * y.coeffs[r - i] for i in range(r + 1)),
                          Fraction(0)))
    return LaurentExpansion(h, tuple(coeffs))


def invert(b: LaurentExpansion) -> LaurentExpansion:
    """Reciprocal of a pivotal expansion: window (-h, k - 2h)."""
    if not b.pivotal:
        raise NonPivotalDivision(
            f"cannot invert {b}: leading coefficient is zero"
        )
    lead_inv = 1 / b.coeffs[0]
    coeffs = [lead_inv]
    for r in range(1, len(b.coeffs)):
        s = sum((b.coeffs[i] * coeffs[r - i] for i in range(1, r + 1)), Fraction(0))
        coeffs.append(-lead_inv * s)
    return LaurentExpansion(-b.h, tuple(coeffs))


def div(a: LaurentExpansion, b: LaurentExpansion) -> LaurentExpansion:
    """Quotient by a pivotal divisor, via the direct long-division recursion.

    Window (h_a - h_b, min(k_a - h_b, k_b - 2 h_b + h_a)); agrees with
    ``mul(a, invert(b))`` coefficient for coefficient.
    """
    if not b.pivotal:
        raise NonPivotalDivision(
            f"cannot divide by {b}: leading coefficient is zero"
        )
    h = a.h - b.h
    k = min(a.k - b.h, b.k - 2 * b.h + a.h)
    lead_inv = 1 / b.coeffs[0]
    coeffs: list[Fraction] = []
    for r in range(k - h + 1):
        s = sum((b.coeffs[i] * coeffs[r - i] for i in range(1, r + 1)), Fraction(0))
        coeffs.append(lead_inv * (a.coeffs[r] - s))
    return LaurentExpansion(h, tuple(coeffs))


def multi_add(xs: Iterable[LaurentExpansion]) -> LaurentExpansion:
    """Sum of several expansions; order of the operands does not matter."""
    xs = list(xs)
    if not xs:
        raise EmptyInput("multi_add needs at least one operand")
    out = xs[0]
    for x in xs[1:]:
        out = add(out, x)
    return out


def multi_mul(xs: Iterable[LaurentExpansion]) -> LaurentExpansion:
    """Product of several expansions; order of the operands does not matter."""
    xs = list(xs)
    if not xs:
        raise EmptyInput("multi_mul needs at least one operand")
    out = xs[0]
    for x in xs[1:]:
        out = mul(out, x)
    return out


def evaluate(x: LaurentExpansion, eps: Rational) -> Fraction:
    """Exact value of the truncation at a positive rational eps.

    The abstract o(eps**k) remainder is dropped.
    """
    eps = _as_fraction(eps)
    if eps <= 0:
        raise NonPositiveEpsilon(f"eps must be positive, got {eps}")
    return sum((c * eps ** (x.h + j) for j, c in enumerate(x.coeffs)), Fraction(0))
