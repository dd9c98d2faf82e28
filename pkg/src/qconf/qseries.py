"""Truncated Laurent series in Q, the formal q-logarithm symbol, q-characters.

A :class:`TruncSeries` stores coefficients for degrees ``low .. high`` and a
truncation order ``order``: coefficients above ``order`` are *unknown*, never
zero.  Every operation propagates the order pessimistically.

:class:`LogPoly` is a polynomial in a symbol ``L`` with series coefficients.
On the K-theoretic side ``L`` stands for the q-logarithm, so the shift acts
by ``L -> L + 1``.

:class:`CharacterSeries` is a series multiplied by a q-character, i.e. a
function ``c`` with ``sigma(c) = eigenvalue * c``.  The character itself is
never expanded.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Any, Callable, Iterator

from .errors import (
    FieldMismatch,
    LogDegreeExceeded,
    NonUnitLeadingCoefficient,
    QEqualsOne,
    UnknownCoefficient,
)


def _check_fields(a, b):
    if a.field != b.field:
        raise FieldMismatch(f"{a.field.name} vs {b.field.name}")


def q_powers(q, lo: int, hi: int, one) -> list:
    """``[q**lo, ..., q**hi]`` by repeated multiplication."""
    if hi < lo:
        return []
    start = one * q**lo if lo else one
    out = [start]
    for _ in range(lo, hi):
        out.append(out[-1] * q)
    return out


@dataclass(frozen=True, eq=False)
class TruncSeries:
    field: Any
    coeffs: tuple
    order: int
    low: int = 0

    def __post_init__(self):
        coeffs = tuple(self.field(c) for c in self.coeffs)
        keep = self.order - self.low + 1
        if keep < len(coeffs):
            coeffs = coeffs[: max(keep, 0)]
        object.__setattr__(self, "coeffs", coeffs)

    # -- constructors ---------------------------------------------------
    @classmethod
    def from_list(cls, field, coeffs, order: int | None = None, low: int = 0) -> "TruncSeries":
        coeffs = tuple(coeffs)
        if order is None:
            order = low + len(coeffs) - 1
        return cls(field, coeffs, order, low)

    @classmethod
    def zero(cls, field, order: int) -> "TruncSeries":
        return cls(field, (), order, 0)

    @classmethod
    def constant(cls, field, c, order: int) -> "TruncSeries":
        return cls(field, (c,), order, 0)

    @classmethod
    def monomial(cls, field, k: int, order: int, coeff=1) -> "TruncSeries":
        return cls(field, (coeff,), order, k)

    # -- access ---------------------------------------------------------
    @property
    def high(self) -> int:
        return self.low + len(self.coeffs) - 1

    def coeff(self, d: int):
        if d > self.order:
            raise UnknownCoefficient(f"degree {d} exceeds truncation order {self.order}")
        i = d - self.low
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.field.zero

    __getitem__ = coeff

    def items(self) -> Iterator[tuple[int, Any]]:
        for i, c in enumerate(self.coeffs):
            yield self.low + i, c

    def is_zero(self) -> bool:
        return all(self.field.is_zero(c) for c in self.coeffs)

    def first_nonzero_degree(self) -> int | None:
        for d, c in self.items():
            if not self.field.is_zero(c):
                return d
        return None

    def truncate(self, order: int) -> "TruncSeries":
        if order > self.order:
            raise UnknownCoefficient(f"cannot extend a series known to order {self.order}")
        return TruncSeries(self.field, self.coeffs, order, self.low)

    def strip(self) -> "TruncSeries":
        """Drop exactly-zero coefficients at both ends."""
        cs = list(self.coeffs)
        low = self.low
        while cs and not cs[0]:
            cs.pop(0)
            low += 1
        while cs and not cs[-1]:
            cs.pop()
        if not cs:
            low = min(self.low, self.order)
        return TruncSeries(self.field, tuple(cs), self.order, low)

    def map(self, fn: Callable[[Any], Any], field=None) -> "TruncSeries":
        return TruncSeries(field or self.field, tuple(fn(c) for c in self.coeffs), self.order, self.low)

    def map_degree(self, fn: Callable[[int, Any], Any]) -> "TruncSeries":
        return TruncSeries(self.field, tuple(fn(d, c) for d, c in self.items()), self.order, self.low)

    def shift(self, k: int) -> "TruncSeries":
        """Multiply by ``Q**k``."""
        return TruncSeries(self.field, self.coeffs, self.order + k, self.low + k)

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, TruncSeries):
            other = TruncSeries.constant(self.field, other, self.order)
        return series_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return self.map(lambda c: -c)

    def __sub__(self, other):
        if not isinstance(other, TruncSeries):
            other = TruncSeries.constant(self.field, other, self.order)
        return series_add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncSeries):
            return series_mul(self, other)
        if isinstance(other, (LogPoly, CharacterSeries)):
            return NotImplemented
        c = self.field(other)
        return self.map(lambda x: x * c)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        if self.field != other.field or self.order != other.order:
            return False
        lo = min(self.low, other.low)
        return all(self.coeff(d) == other.coeff(d) for d in range(lo, self.order + 1))

    __hash__ = None

    def __repr__(self):
        terms = ", ".join(f"{d}: {c}" for d, c in self.items())
        return f"TruncSeries({{{terms}}}, order={self.order})"


def series_add(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    _check_fields(a, b)
    order = min(a.order, b.order)
    low = min(a.low, b.low)
    high = min(max(a.high, b.high), order)
    coeffs = [a.coeff(d) + b.coeff(d) for d in range(low, high + 1)]
    return TruncSeries(a.field, tuple(coeffs), order, low)


def series_mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    """Cauchy product; known up to ``min(a.order + b.low, b.order + a.low)``."""
    _check_fields(a, b)
    low = a.low + b.low
    order = min(a.order + b.low, b.order + a.low)
    n = order - low + 1
    zero = a.field.zero
    out = [zero] * max(n, 0)
    bc = b.coeffs
    for i, x in enumerate(a.coeffs):
        if i >= n:
            break
        if not x:
            continue
        for j in range(min(len(bc), n - i)):
            y = bc[j]
            if not y:
                continue
            out[i + j] = out[i + j] + x * y
    return TruncSeries(a.field, tuple(out), order, low)


def series_invert(a: TruncSeries) -> TruncSeries:
    """Multiplicative inverse; the lowest stored coefficient must be a unit."""
    a = a.strip() if a.field.exact else a
    if not a.coeffs or a.field.is_zero(a.coeffs[0]):
        raise NonUnitLeadingCoefficient("leading coefficient is not invertible")
    v = a.low
    order = a.order - 2 * v
    n = order + v + 1
    a0inv = a.field.one / a.coeffs[0]
    out = [a0inv]
    ac = a.coeffs
    for k in range(1, n):
        s = a.field.zero
        for i in range(1, min(k, len(ac) - 1) + 1):
            if ac[i]:
                s = s + ac[i] * out[k - i]
        out.append(-s * a0inv)
    return TruncSeries(a.field, tuple(out), order, -v)


def sigma_shift(a: TruncSeries, q) -> TruncSeries:
    """``f(Q) -> f(qQ)``."""
    q = a.field(q)
    if not a.coeffs:
        return a
    pw = q_powers(q, a.low, a.high, a.field.one)
    return TruncSeries(a.field, tuple(c * p for c, p in zip(a.coeffs, pw)), a.order, a.low)


def _inverse_q_minus_one(field, q):
    qm1 = field(q) - field.one
    if field.is_zero(qm1):
        raise QEqualsOne("delta_q needs q != 1")
    return field.one / qm1


def delta_q(a: TruncSeries, q) -> TruncSeries:
    """``(sigma - Id) / (q - 1)``."""
    inv = _inverse_q_minus_one(a.field, q)
    return (sigma_shift(a, q) - a) * inv


def scale_Q(a: TruncSeries, c) -> TruncSeries:
    """``f(Q) -> f(cQ)``, coefficient of ``Q**d`` times ``c**d``."""
    return sigma_shift(a, c)


# ---------------------------------------------------------------------------
# polynomials in the log symbol


@dataclass(frozen=True, eq=False)
class LogPoly:
    """``sum_a terms[a] * L**a`` with series coefficients."""

    terms: tuple
    max_log_degree: int | None = None

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("LogPoly needs at least one coefficient series")
        for t in terms[1:]:
            _check_fields(terms[0], t)
        while len(terms) > 1 and terms[-1].is_zero() and terms[-1].field.exact:
            terms = terms[:-1]
        if self.max_log_degree is not None and len(terms) - 1 > self.max_log_degree:
            raise LogDegreeExceeded(
                f"log degree {len(terms) - 1} exceeds the bound {self.max_log_degree}"
            )
        object.__setattr__(self, "terms", terms)

    @classmethod
    def constant(cls, series: TruncSeries, max_log_degree: int | None = None) -> "LogPoly":
        return cls((series,), max_log_degree)

    @classmethod
    def from_scalars(cls, field, coeffs, order: int, max_log_degree: int | None = None) -> "LogPoly":
        """Polynomial in ``L`` whose coefficients are constants in Q."""
        return cls(tuple(TruncSeries.constant(field, c, order) for c in coeffs), max_log_degree)

    @property
    def field(self):
        return self.terms[0].field

    @property
    def order(self) -> int:
        return min(t.order for t in self.terms)

    @property
    def degree(self) -> int:
        return len(self.terms) - 1

    def coefficient(self, a: int) -> TruncSeries:
        if 0 <= a < len(self.terms):
            return self.terms[a]
        return TruncSeries.zero(self.field, self.order)

    def is_zero(self) -> bool:
        return all(t.is_zero() for t in self.terms)

    def map_series(self, fn: Callable[[TruncSeries], TruncSeries]) -> "LogPoly":
        return LogPoly(tuple(fn(t) for t in self.terms), self.max_log_degree)

    def map_terms(self, fn: Callable[[int, TruncSeries], TruncSeries]) -> "LogPoly":
        return LogPoly(tuple(fn(a, t) for a, t in enumerate(self.terms)), self.max_log_degree)

    def evaluate_at(self, value) -> TruncSeries:
        """Substitute a scalar for ``L``."""
        v = self.field(value)
        total = self.terms[-1]
        for t in reversed(self.terms[:-1]):
            total = total * v + t
        return total

    def _bound(self, other: "LogPoly"):
        if self.max_log_degree is None or other.max_log_degree is None:
            return None
        return max(self.max_log_degree, other.max_log_degree)

    def _lift(self, other) -> "LogPoly":
        if isinstance(other, LogPoly):
            _check_fields(self.terms[0], other.terms[0])
            return other
        if isinstance(other, TruncSeries):
            return LogPoly((other,), self.max_log_degree)
        return LogPoly((TruncSeries.constant(self.field, other, self.order),), self.max_log_degree)

    def __add__(self, other):
        o = self._lift(other)
        n = max(len(self.terms), len(o.terms))
        order = min(self.order, o.order)
        terms = []
        for a in range(n):
            x = self.terms[a] if a < len(self.terms) else TruncSeries.zero(self.field, order)
            y = o.terms[a] if a < len(o.terms) else TruncSeries.zero(self.field, order)
            terms.append(x + y)
        return LogPoly(tuple(terms), self._bound(o))

    __radd__ = __add__

    def __neg__(self):
        return self.map_series(lambda t: -t)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, CharacterSeries):
            return NotImplemented
        if not isinstance(other, (LogPoly, TruncSeries)):
            c = self.field(other)
            return self.map_series(lambda t: t * c)
        o = self._lift(other)
        n = len(self.terms) + len(o.terms) - 1
        order = min(
            min(t.order + u.low for t in self.terms for u in o.terms),
            min(u.order + t.low for t in self.terms for u in o.terms),
        )
        terms = [None] * n
        for a, x in enumerate(self.terms):
            for b, y in enumerate(o.terms):
                p = series_mul(x, y)
                terms[a + b] = p if terms[a + b] is None else terms[a + b] + p
        return LogPoly(tuple(t.truncate(min(order, t.order)) for t in terms), self._bound(o))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, LogPoly):
            return NotImplemented
        n = max(len(self.terms), len(other.terms))
        order = min(self.order, other.order)
        return all(
            self.coefficient(a).truncate(order) == other.coefficient(a).truncate(order)
            for a in range(n)
        )

    __hash__ = None

    def __repr__(self):
        return "LogPoly(" + " + ".join(f"L^{a}*{t!r}" for a, t in enumerate(self.terms)) + ")"


def logpoly_sigma(a: LogPoly, q) -> LogPoly:
    """Shift Q -> qQ on coefficients and L -> L + 1 on the symbol."""
    shifted = [sigma_shift(t, q) for t in a.terms]
    n = len(shifted)
    out = []
    for b in range(n):
        acc = shifted[b]
        for k in range(b + 1, n):
            acc = acc + shifted[k] * comb(k, b)
        out.append(acc)
    return LogPoly(tuple(out), a.max_log_degree)


def logpoly_delta(a: LogPoly, q) -> LogPoly:
    inv = _inverse_q_minus_one(a.field, q)
    return (logpoly_sigma(a, q) - a) * inv


# ---------------------------------------------------------------------------
# q-characters


@dataclass(frozen=True, eq=False)
class CharacterSeries:
    """``c(Q) * body(Q)`` where the character obeys ``sigma(c) = eigenvalue * c``.

    ``body`` is a :class:`TruncSeries` or a :class:`LogPoly`.
    """

    body: Any
    eigenvalue: Any

    @property
    def field(self):
        return self.body.field

    @property
    def order(self) -> int:
        return self.body.order

    def _same_character(self, other: "CharacterSeries"):
        if not self.field.is_zero(self.field(self.eigenvalue) - self.field(other.eigenvalue)):
            raise FieldMismatch("cannot add series carrying different q-characters")

    def __add__(self, other):
        if not isinstance(other, CharacterSeries):
            return NotImplemented
        self._same_character(other)
        return CharacterSeries(self.body + other.body, self.eigenvalue)

    def __neg__(self):
        return CharacterSeries(-self.body, self.eigenvalue)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, CharacterSeries):
            return NotImplemented
        return CharacterSeries(self.body * other, self.eigenvalue)

    __rmul__ = __mul__

    def shift(self, k: int) -> "CharacterSeries":
        return CharacterSeries(_shift(self.body, k), self.eigenvalue)

    def is_zero(self) -> bool:
        return self.body.is_zero()

    def __repr__(self):
        return f"CharacterSeries({self.body!r}, eigenvalue={self.eigenvalue})"


@dataclass(frozen=True, eq=False)
class PowerMarked:
    """``Q**exponent * body(Q)`` with a symbolic, possibly non-integral exponent.

    The differential counterpart of :class:`CharacterSeries`: ``Q d/dQ``
    acts on the marker by multiplication with ``exponent``.
    """

    body: Any
    exponent: Any

    @property
    def field(self):
        return self.body.field

    @property
    def order(self) -> int:
        return self.body.order

    def __add__(self, other):
        if not isinstance(other, PowerMarked):
            return NotImplemented
        if not self.field.is_zero(self.field(self.exponent) - self.field(other.exponent)):
            raise FieldMismatch("cannot add series carrying different power markers")
        return PowerMarked(self.body + other.body, self.exponent)

    def __neg__(self):
        return PowerMarked(-self.body, self.exponent)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PowerMarked):
            return NotImplemented
        return PowerMarked(self.body * other, self.exponent)

    __rmul__ = __mul__

    def shift(self, k: int) -> "PowerMarked":
        return PowerMarked(_shift(self.body, k), self.exponent)

    def is_zero(self) -> bool:
        return self.body.is_zero()

    def __repr__(self):
        return f"PowerMarked({self.body!r}, exponent={self.exponent})"


def _shift(f, k: int):
    if isinstance(f, TruncSeries):
        return f.shift(k)
    if isinstance(f, LogPoly):
        return f.map_series(lambda t: t.shift(k))
    if isinstance(f, (CharacterSeries, PowerMarked)):
        return f.shift(k)
    raise TypeError(f"cannot shift {type(f).__name__}")


def sigma(f, q):
    """The q-shift on any of the three function representations."""
    if isinstance(f, TruncSeries):
        return sigma_shift(f, q)
    if isinstance(f, LogPoly):
        return logpoly_sigma(f, q)
    if isinstance(f, CharacterSeries):
        return CharacterSeries(sigma(f.body, q) * f.field(f.eigenvalue), f.eigenvalue)
    raise TypeError(f"sigma is not defined on {type(f).__name__}")


def delta(f, q):
    field = f.field
    inv = _inverse_q_minus_one(field, q)
    return (sigma(f, q) - f) * inv


def mul_Q_poly(poly, f):
    """Multiply a function representation by a polynomial in Q.

    ``poly`` is a sequence of scalars, ``poly[j]`` the coefficient of ``Q**j``.
    """
    total = None
    for j, c in enumerate(poly):
        if not c:
            continue
        term = _shift(f, j) * c
        total = term if total is None else total + term
    if total is None:
        return f * 0
    return total


def truncate_to(f, order: int):
    if isinstance(f, TruncSeries):
        return f.truncate(order)
    if isinstance(f, LogPoly):
        return f.map_series(lambda t: t.truncate(order))
    if isinstance(f, CharacterSeries):
        return CharacterSeries(truncate_to(f.body, order), f.eigenvalue)
    if isinstance(f, PowerMarked):
        return PowerMarked(truncate_to(f.body, order), f.exponent)
    raise TypeError(type(f).__name__)


def body_series(f) -> list[TruncSeries]:
    """All coefficient series of a function representation."""
    if isinstance(f, TruncSeries):
        return [f]
    if isinstance(f, LogPoly):
        return list(f.terms)
    if isinstance(f, (CharacterSeries, PowerMarked)):
        return body_series(f.body)
    raise TypeError(type(f).__name__)
