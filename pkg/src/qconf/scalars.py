"""Coefficient fields.

Every series, class and operator in the package is generic over a *field
object*.  A field object embeds integers and rationals (``field(x)``), knows
its ``zero`` and ``one``, decides ``is_zero`` (exactly, or up to a tolerance
for the numeric realization) and can push its elements to a numeric field
(``evaluate``).  Elements themselves are plain Python numbers supporting the
arithmetic operators:

* :class:`RationalField` -- :class:`fractions.Fraction` elements.
* :class:`RatFuncField` -- :class:`RatFunc`, multivariate rational functions
  over the rationals in declared indeterminates such as ``q``, ``z``, ``L0``.
* :class:`NumericField` -- ``mpc`` values of a private mpmath context at a
  fixed binary precision (default 256 bits, env ``QCONF_PRECISION_BITS``).
"""

from __future__ import annotations

import os
from fractions import Fraction
from functools import lru_cache
from numbers import Integral, Rational as _RationalABC
from typing import Any, Mapping, Sequence

import mpmath
from sympy import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

from .errors import FieldMismatch, MissingVariable, NearZeroDenominator, ZeroBase

Rational = Fraction

DEFAULT_BITS = 256


def default_bits() -> int:
    env = os.environ.get("QCONF_PRECISION_BITS")
    if env:
        bits = int(env)
        if bits < 53:
            raise ValueError("QCONF_PRECISION_BITS must be at least 53")
        return bits
    return DEFAULT_BITS


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Integral):
        return Fraction(int(x))
    if isinstance(x, _RationalABC):
        return Fraction(int(x.numerator), int(x.denominator))
    if hasattr(x, "numerator") and hasattr(x, "denominator"):  # gmpy2.mpq
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot embed {x!r} as an exact rational")


# ---------------------------------------------------------------------------
# exact rationals


class RationalField:
    """The field of rational numbers, elements are ``Fraction``."""

    exact = True
    name = "QQ"
    zero = Fraction(0)
    one = Fraction(1)

    def __call__(self, x) -> Fraction:
        if isinstance(x, RatFunc):
            return x.as_fraction()
        return _to_fraction(x)

    def is_zero(self, x) -> bool:
        return x == 0

    def eq(self, a, b) -> bool:
        return a == b

    def evaluate(self, x, assignment: Mapping[str, Any] | None = None, target: "NumericField | None" = None):
        target = target or NumericField()
        return target(x)

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "RationalField()"


QQ_FIELD = RationalField()


# ---------------------------------------------------------------------------
# exact multivariate rational functions


class RatFuncField:
    """Rational functions over QQ in a fixed, ordered tuple of indeterminates.

    Polynomials are sparse distributed (sympy ``PolyRing``) under graded
    lexicographic order.  Instances are cached per variable tuple, so two
    requests for the same names give the same field object.
    """

    exact = True

    def __new__(cls, names: Sequence[str]):
        return _ratfunc_field(tuple(names))

    @classmethod
    def _create(cls, names: tuple[str, ...]) -> "RatFuncField":
        self = object.__new__(cls)
        self.names = names
        self.ring = PolyRing(names, QQ, grlex)
        self.zero = RatFunc(self, self.ring.zero, self.ring.one)
        self.one = RatFunc(self, self.ring.one, self.ring.one)
        return self

    @property
    def name(self) -> str:
        return "QQ(" + ",".join(self.names) + ")"

    def gen(self, name: str) -> "RatFunc":
        try:
            i = self.names.index(name)
        except ValueError:
            raise MissingVariable(f"{name!r} is not a variable of {self.name}") from None
        return RatFunc(self, self.ring.gens[i], self.ring.one)

    @property
    def gens(self) -> tuple["RatFunc", ...]:
        return tuple(RatFunc(self, g, self.ring.one) for g in self.ring.gens)

    def __call__(self, x) -> "RatFunc":
        if isinstance(x, RatFunc):
            if x.field is not self:
                raise FieldMismatch(f"element of {x.field.name} used in {self.name}")
            return x
        if isinstance(x, PolyElement):
            if x.ring != self.ring:
                raise FieldMismatch("polynomial from a foreign ring")
            return RatFunc(self, x, self.ring.one)
        f = _to_fraction(x)
        return RatFunc(self, self.ring.ground_new(QQ(f.numerator, f.denominator)), self.ring.one)

    def is_zero(self, x) -> bool:
        return self(x).num == 0

    def eq(self, a, b) -> bool:
        return self(a) == self(b)

    def evaluate(self, x, assignment: Mapping[str, Any], target: "NumericField | None" = None):
        return ratfunc_eval(self(x), assignment, target)

    def __repr__(self):
        return f"RatFuncField({self.names!r})"

    def __reduce__(self):
        return (RatFuncField, (self.names,))


@lru_cache(maxsize=None)
def _ratfunc_field(names: tuple[str, ...]) -> RatFuncField:
    return RatFuncField._create(names)


def _monomial_content(p: PolyElement, n: int) -> tuple:
    exps = None
    for m in p.itermonoms():
        exps = list(m) if exps is None else [min(x, y) for x, y in zip(exps, m)]
    return tuple(exps) if exps is not None else (0,) * n


def _divide_monomial(p: PolyElement, m: tuple) -> PolyElement:
    if not any(m):
        return p
    return p.ring.from_dict({tuple(x - y for x, y in zip(k, m)): c for k, c in p.items()})


def _monomial(ring: PolyRing, m: tuple) -> PolyElement:
    return ring.from_dict({m: ring.domain.one})


class RatFunc:
    """Quotient of a polynomial by a factored denominator.

    The denominator is kept as a monomial times a product of monic
    polynomial factors with multiplicities.  Products and quotients only
    merge factor tables; sums bring both terms over the least common
    multiple of the two tables.  No gcd is taken until the canonical form
    is requested by :meth:`reduced` (hashing, printing, evaluation).
    """

    __slots__ = ("field", "num", "mono", "facs", "_den")

    def __init__(self, field: RatFuncField, num: PolyElement, den: PolyElement):
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        ring = field.ring
        mono = _monomial_content(den, ring.ngens)
        core = _divide_monomial(den, mono)
        lc = core.LC
        if lc != 1:
            num = num.quo_ground(lc)
            core = core.quo_ground(lc)
        facs = {} if core == 1 else {core: 1}
        self._set(field, num, mono, facs)

    def _set(self, field, num, mono, facs):
        self.field = field
        self.num = num
        self.mono = mono
        self.facs = facs
        self._den = None

    @classmethod
    def _make(cls, field, num, mono, facs) -> "RatFunc":
        self = object.__new__(cls)
        if num != 0 and any(mono):
            common = tuple(min(x, y) for x, y in zip(_monomial_content(num, len(mono)), mono))
            if any(common):
                num = _divide_monomial(num, common)
                mono = tuple(x - y for x, y in zip(mono, common))
        self._set(field, num, mono, facs)
        return self

    @property
    def den(self) -> PolyElement:
        if self._den is None:
            self._den = self._expand(self.mono, self.facs)
        return self._den

    def _expand(self, mono, facs) -> PolyElement:
        ring = self.field.ring
        p = _monomial(ring, mono) if any(mono) else ring.one
        for f, m in facs.items():
            p = p * f**m
        return p

    # -- coercion -------------------------------------------------------
    def _coerce(self, other) -> "RatFunc":
        if isinstance(other, RatFunc):
            if other.field is not self.field:
                raise FieldMismatch(f"{self.field.name} vs {other.field.name}")
            return other
        try:
            return self.field(other)
        except TypeError:
            return NotImplemented

    def _trivial_den(self) -> bool:
        return not self.facs and not any(self.mono)

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.num == 0:
            return self
        if self.num == 0:
            return o
        if self.mono == o.mono and self.facs == o.facs:
            return RatFunc._make(self.field, self.num + o.num, self.mono, self.facs)
        mono = tuple(max(x, y) for x, y in zip(self.mono, o.mono))
        facs = dict(self.facs)
        for f, m in o.facs.items():
            if facs.get(f, 0) < m:
                facs[f] = m

        def lift(r: "RatFunc") -> PolyElement:
            miss_mono = tuple(x - y for x, y in zip(mono, r.mono))
            miss = {f: m - r.facs.get(f, 0) for f, m in facs.items() if m > r.facs.get(f, 0)}
            if not miss and not any(miss_mono):
                return r.num
            return r.num * self._expand(miss_mono, miss)

        return RatFunc._make(self.field, lift(self) + lift(o), mono, facs)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc._make(self.field, -self.num, self.mono, self.facs)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.num == 0 or o.num == 0:
            return self.field.zero
        mono = tuple(x + y for x, y in zip(self.mono, o.mono))
        facs = dict(self.facs)
        for f, m in o.facs.items():
            facs[f] = facs.get(f, 0) + m
        return RatFunc._make(self.field, self.num * o.num, mono, facs)

    __rmul__ = __mul__

    def _inverse(self) -> "RatFunc":
        if self.num == 0:
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunc(self.field, self.den, self.num)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o._inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self._inverse()

    def __pow__(self, n: int):
        if not isinstance(n, Integral):
            raise TypeError("RatFunc powers must be integers")
        n = int(n)
        if n < 0:
            return self._inverse() ** (-n)
        if n == 0:
            return self.field.one
        mono = tuple(x * n for x in self.mono)
        facs = {f: m * n for f, m in self.facs.items()}
        return RatFunc._make(self.field, self.num**n, mono, facs)

    # -- comparison -----------------------------------------------------
    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except FieldMismatch:
            return False
        if o is NotImplemented:
            return NotImplemented
        if self._trivial_den() and o._trivial_den():
            return self.num == o.num
        return (self - o).num == 0

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __hash__(self):
        r = self.reduced()
        if r.den == 1 and r.num.is_ground:
            return hash(Fraction(*_ground_pair(r.num)))
        return hash((r.num, r.den))

    def __bool__(self):
        return self.num != 0

    # -- canonical form -------------------------------------------------
    def reduced(self) -> "RatFunc":
        """Canonical form: gcd removed, denominator monic under grlex."""
        if self._trivial_den():
            return self
        num, den = self.num.cancel(self.den)
        return RatFunc(self.field, num, den)

    def is_constant(self) -> bool:
        r = self.reduced()
        return r.num.is_ground and r.den.is_ground

    def as_fraction(self) -> Fraction:
        r = self.reduced()
        if not (r.num.is_ground and r.den.is_ground):
            raise TypeError(f"{self} is not a rational constant")
        n, d = _ground_pair(r.num)
        dn, dd = _ground_pair(r.den)
        return Fraction(n, d) / Fraction(dn, dd)

    def variables(self) -> tuple[str, ...]:
        r = self.reduced()
        used = set()
        for poly in (r.num, r.den):
            for monom in poly.monoms():
                used.update(i for i, e in enumerate(monom) if e)
        return tuple(self.field.names[i] for i in sorted(used))

    def subs(self, values: Mapping[str, Any]) -> "RatFunc":
        """Substitute exact rational values for some indeterminates."""
        num, den = self.num, self.den
        for name, value in values.items():
            x = self.field.gen(name).num
            f = _to_fraction(value)
            v = QQ(f.numerator, f.denominator)
            num = num.subs(x, v)
            den = den.subs(x, v)
        if den == 0:
            raise ZeroDivisionError("substitution makes the denominator vanish")
        return RatFunc(self.field, num, den)

    def __str__(self):
        r = self.reduced()
        if r.den == 1:
            return str(r.num)
        n = str(r.num)
        d = str(r.den)
        if len(r.num.terms()) > 1:
            n = f"({n})"
        if len(r.den.terms()) > 1:
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self):
        return f"RatFunc({self})"


def _ground_pair(p: PolyElement) -> tuple[int, int]:
    c = p.LC if p != 0 else QQ(0)
    return int(c.numerator), int(c.denominator)


# ---------------------------------------------------------------------------
# arbitrary precision complex numbers


class NumericField:
    """Complex numbers at a fixed binary precision.

    Each instance owns a private mpmath context, so precision never leaks
    between fields.  ``is_zero`` uses the absolute tolerance
    ``2**(-bits/2)``.
    """

    exact = False

    def __init__(self, bits: int | None = None):
        bits = default_bits() if bits is None else int(bits)
        if bits < 53:
            raise ValueError("precision must be at least 53 bits")
        self.bits = bits
        self.ctx = mpmath.MPContext()
        self.ctx.prec = bits
        self.zero = self.ctx.mpc(0)
        self.one = self.ctx.mpc(1)
        self.tolerance = self.ctx.ldexp(self.ctx.mpf(1), -(bits // 2))
        self.eps = self.ctx.ldexp(self.ctx.mpf(1), 1 - bits)

    @property
    def name(self) -> str:
        return f"CC[{self.bits}]"

    def __call__(self, x):
        ctx = self.ctx
        if isinstance(x, (ctx.mpc, ctx.mpf)):
            return ctx.mpc(x)
        if isinstance(x, bool):
            x = int(x)
        if isinstance(x, Integral):
            return ctx.mpc(int(x))
        if isinstance(x, RatFunc):
            x = x.as_fraction()
        if isinstance(x, str):
            x = x.strip()
            if "/" in x and "j" not in x:
                x = Fraction(x)
            else:
                return ctx.mpc(ctx.mpmathify(x.replace("i", "j")))
        if isinstance(x, (Fraction, _RationalABC)) or (hasattr(x, "numerator") and not isinstance(x, float)):
            f = _to_fraction(x)
            return ctx.mpc(ctx.mpf(f.numerator) / f.denominator)
        if isinstance(x, (float, complex)):
            return ctx.mpc(x)
        if isinstance(x, (mpmath.mpf, mpmath.mpc)) or hasattr(x, "_mpf_") or hasattr(x, "_mpc_"):
            return ctx.mpc(x)
        raise TypeError(f"cannot embed {x!r} into {self.name}")

    def real(self, x):
        return self.ctx.mpf(x)

    def is_zero(self, x, tol=None) -> bool:
        tol = self.tolerance if tol is None else tol
        return abs(x) <= tol

    def close(self, a, b, ulps: int = 4) -> bool:
        a, b = self(a), self(b)
        scale = max(abs(a), abs(b), self.ctx.mpf(1) if a == 0 or b == 0 else self.ctx.mpf(0))
        return abs(a - b) <= ulps * self.eps * scale

    eq = close

    def evaluate(self, x, assignment=None, target: "NumericField | None" = None):
        return (target or self)(x)

    def __eq__(self, other):
        return isinstance(other, NumericField) and other.bits == self.bits

    def __hash__(self):
        return hash(("CC", self.bits))

    def __repr__(self):
        return f"NumericField(bits={self.bits})"


def ratfunc_eval(f: RatFunc, assignment: Mapping[str, Any], target: NumericField | None = None):
    """Evaluate ``f`` at numeric values of its indeterminates.

    The canonical form is evaluated, so removable singularities of an
    unreduced representative do not trigger :class:`NearZeroDenominator`.
    """
    target = target or NumericField()
    ctx = target.ctx
    r = f.reduced()
    names = f.field.names
    missing = [n for n in r.variables() if n not in assignment]
    if missing:
        raise MissingVariable(f"no value supplied for {', '.join(missing)}")
    values = [target(assignment[n]) if n in assignment else None for n in names]

    def ev(poly: PolyElement):
        total = target.zero
        for monom, coeff in poly.terms():
            term = ctx.mpf(int(coeff.numerator)) / int(coeff.denominator)
            for v, e in zip(values, monom):
                if e:
                    term *= v**e
            total += term
        return total

    den = ev(r.den)
    if abs(den) < ctx.ldexp(ctx.mpf(1), -(target.bits // 2)):
        raise NearZeroDenominator(f"denominator of {f} nearly vanishes at {dict(assignment)}")
    return ev(r.num) / den


def principal_power(base, exponent, field: NumericField | None = None):
    """``exp(exponent * Log(base))`` with the principal logarithm."""
    field = field or NumericField()
    ctx = field.ctx
    b = field(base)
    e = field(exponent)
    if b == 0:
        raise ZeroBase("principal_power of zero")
    with ctx.extraprec(24):
        r = ctx.exp(e * ctx.log(b))
    return +r


def evaluate_scalar(field, x, assignment: Mapping[str, Any] | None, target: NumericField):
    """Push an element of ``field`` into the numeric field ``target``."""
    if isinstance(field, RatFuncField):
        return ratfunc_eval(field(x), assignment or {}, target)
    return target(x)
