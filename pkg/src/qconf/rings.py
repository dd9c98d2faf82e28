"""K-theory and cohomology of projective space, with and without torus action.

Non-equivariant classes are truncated polynomials: in ``pi = 1 - P**-1`` on
the K-side and in ``H`` on the cohomology side, both modulo degree ``N + 1``.
Equivariant classes are stored by their values at the ``N + 1`` fixed
points, so products are componentwise.  The monomial basis
``1, y, ..., y**N`` with ``y = P**-1`` is reached by Lagrange interpolation
at the nodes ``y = Lambda_i**-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Any, Sequence

from .errors import CoincidingEquivariantParameters, DegenerateBasis
from .scalars import QQ_FIELD, RatFunc, RatFuncField


def _field_of(values, field):
    if field is not None:
        return field
    for v in values:
        if isinstance(v, RatFunc):
            return v.field
    return QQ_FIELD


def _coerce(field, values) -> tuple:
    return tuple(field(v) for v in values)


# ---------------------------------------------------------------------------
# truncated polynomial classes


@dataclass(frozen=True, eq=False)
class _Truncated:
    N: int
    coefficients: tuple
    field: Any = None

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("N must be nonnegative")
        field = _field_of(self.coefficients, self.field)
        cs = list(_coerce(field, self.coefficients))
        if len(cs) > self.N + 1:
            raise ValueError(f"expected at most {self.N + 1} coefficients, got {len(cs)}")
        cs += [field.zero] * (self.N + 1 - len(cs))
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "coefficients", tuple(cs))

    @classmethod
    def unit(cls, N: int, field=QQ_FIELD):
        return cls(N, (field.one,), field)

    @classmethod
    def generator_power(cls, N: int, k: int, field=QQ_FIELD):
        return cls(N, tuple(field.one if j == k else field.zero for j in range(N + 1)), field)

    def _check(self, other):
        if type(other) is not type(self) or other.N != self.N:
            raise TypeError(f"incompatible classes {self!r} and {other!r}")

    def __add__(self, other):
        self._check(other)
        return type(self)(self.N, tuple(a + b for a, b in zip(self.coefficients, other.coefficients)), self.field)

    def __neg__(self):
        return type(self)(self.N, tuple(-a for a in self.coefficients), self.field)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, _Truncated):
            c = self.field(other)
            return type(self)(self.N, tuple(a * c for a in self.coefficients), self.field)
        self._check(other)
        n = self.N + 1
        out = [self.field.zero] * n
        for i, a in enumerate(self.coefficients):
            if not a:
                continue
            for j in range(n - i):
                b = other.coefficients[j]
                if b:
                    out[i + j] = out[i + j] + a * b
        return type(self)(self.N, tuple(out), self.field)

    __rmul__ = __mul__

    def inverse(self):
        """Inverse in the truncated ring; needs an invertible constant term."""
        a0 = self.coefficients[0]
        if not a0:
            raise ZeroDivisionError("constant term vanishes, class is not a unit")
        inv0 = self.field.one / a0
        out = [inv0]
        for k in range(1, self.N + 1):
            s = self.field.zero
            for i in range(1, k + 1):
                if self.coefficients[i]:
                    s = s + self.coefficients[i] * out[k - i]
            out.append(-s * inv0)
        return type(self)(self.N, tuple(out), self.field)

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.unit(self.N, self.field)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if type(other) is not type(self) or other.N != self.N:
            return NotImplemented
        return all(self.field.is_zero(self.field(a) - self.field(b))
                   for a, b in zip(self.coefficients, other.coefficients))

    __hash__ = None

    def __getitem__(self, k: int):
        return self.coefficients[k]


class KClassNonEq(_Truncated):
    """``sum_k c_k pi**k`` in ``K(P^N)``, ``pi = 1 - P**-1``."""

    def __repr__(self):
        return f"KClassNonEq(N={self.N}, {list(map(str, self.coefficients))})"


class CohClassNonEq(_Truncated):
    """``sum_k c_k H**k`` in ``H*(P^N)``."""

    def __repr__(self):
        return f"CohClassNonEq(N={self.N}, {list(map(str, self.coefficients))})"


# ---------------------------------------------------------------------------
# fixed point classes


@dataclass(frozen=True, eq=False)
class _FixedPoint:
    N: int
    values: tuple
    field: Any = None

    def __post_init__(self):
        field = _field_of(self.values, self.field)
        vs = _coerce(field, self.values)
        if len(vs) != self.N + 1:
            raise ValueError(f"expected {self.N + 1} fixed point values, got {len(vs)}")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "values", vs)

    @classmethod
    def unit(cls, N: int, field=QQ_FIELD):
        return cls(N, (field.one,) * (N + 1), field)

    @classmethod
    def indicator(cls, N: int, i: int, field=QQ_FIELD):
        return cls(N, tuple(field.one if k == i else field.zero for k in range(N + 1)), field)

    def _check(self, other):
        if type(other) is not type(self) or other.N != self.N:
            raise TypeError(f"incompatible classes {self!r} and {other!r}")

    def __add__(self, other):
        self._check(other)
        return type(self)(self.N, tuple(a + b for a, b in zip(self.values, other.values)), self.field)

    def __neg__(self):
        return type(self)(self.N, tuple(-a for a in self.values), self.field)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, _FixedPoint):
            self._check(other)
            return type(self)(self.N, tuple(a * b for a, b in zip(self.values, other.values)), self.field)
        c = self.field(other)
        return type(self)(self.N, tuple(a * c for a in self.values), self.field)

    __rmul__ = __mul__

    def __eq__(self, other):
        if type(other) is not type(self) or other.N != self.N:
            return NotImplemented
        return all(self.field.is_zero(a - b) for a, b in zip(self.values, other.values))

    __hash__ = None

    def __getitem__(self, i: int):
        return self.values[i]


class KClassEq(_FixedPoint):
    """Class in ``K_T(P^N)`` by its values under ``P -> Lambda_i``."""

    def __repr__(self):
        return f"KClassEq(N={self.N}, {list(map(str, self.values))})"


class CohClassEq(_FixedPoint):
    """Class in ``H*_T(P^N)`` by its values at ``H = lambda_i``."""

    def __repr__(self):
        return f"CohClassEq(N={self.N}, {list(map(str, self.values))})"


# ---------------------------------------------------------------------------
# interpolation


def _check_distinct(nodes, field, what: str):
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            if field.is_zero(nodes[i] - nodes[j]):
                raise CoincidingEquivariantParameters(f"{what}_{i} and {what}_{j} coincide")


def _poly_mul_linear(poly: list, a, b, zero) -> list:
    """``poly * (a + b y)``."""
    out = [zero] * (len(poly) + 1)
    for k, c in enumerate(poly):
        out[k] = out[k] + c * a
        out[k + 1] = out[k + 1] + c * b
    return out


def _lagrange_basis(nodes: Sequence, field) -> list[list]:
    """Coefficient lists of the Lagrange polynomials ``l_i`` with ``l_i(nodes[k]) = [i == k]``."""
    n = len(nodes)
    basis = []
    for i in range(n):
        poly = [field.one]
        denom = field.one
        for j in range(n):
            if j == i:
                continue
            poly = _poly_mul_linear(poly, -nodes[j], field.one, field.zero)
            denom = denom * (nodes[i] - nodes[j])
        inv = field.one / denom
        basis.append([c * inv for c in poly])
    return basis


def eta_polynomial(i: int, Lam: Sequence, field=None) -> tuple:
    """Coefficients in ``y = P**-1`` of the fixed point idempotent
    ``prod_{j != i} (1 - Lambda_j y) / (1 - Lambda_j / Lambda_i)``."""
    field = _field_of(Lam, field)
    Lam = _coerce(field, Lam)
    _check_distinct(Lam, field, "Lambda")
    poly = [field.one]
    denom = field.one
    for j, lj in enumerate(Lam):
        if j == i:
            continue
        poly = _poly_mul_linear(poly, field.one, -lj, field.zero)
        denom = denom * (field.one - lj / Lam[i])
    inv = field.one / denom
    return tuple(c * inv for c in poly)


def eta_to_monomial(x: KClassEq, Lam: Sequence) -> tuple:
    """Coefficients ``c_k`` of ``x = sum_k c_k P**-k``, ``k = 0..N``."""
    field = x.field if x.field is not QQ_FIELD else _field_of(Lam, None)
    Lam = _coerce(field, Lam)
    if len(Lam) != x.N + 1:
        raise ValueError("one equivariant parameter per fixed point is required")
    _check_distinct(Lam, field, "Lambda")
    nodes = [field.one / l for l in Lam]
    basis = _lagrange_basis(nodes, field)
    out = [field.zero] * (x.N + 1)
    for v, poly in zip(x.values, basis):
        v = field(v)
        if not v:
            continue
        for k, c in enumerate(poly):
            out[k] = out[k] + v * c
    return tuple(out)


def monomial_to_eta(coeffs: Sequence, Lam: Sequence, field=None) -> KClassEq:
    """Fixed point values ``p(Lambda_i**-1)`` of ``p(y) = sum_k c_k y**k``."""
    field = _field_of(list(Lam) + list(coeffs), field)
    Lam = _coerce(field, Lam)
    coeffs = _coerce(field, coeffs)
    values = []
    for l in Lam:
        y = field.one / l
        acc = field.zero
        for c in reversed(coeffs):
            acc = acc * y + c
        values.append(acc)
    return KClassEq(len(Lam) - 1, tuple(values), field)


def coh_idempotent(i: int, lam: Sequence, field=None) -> tuple:
    """Coefficients in ``H`` of ``prod_{j != i} (H - lambda_j) / (lambda_i - lambda_j)``."""
    field = _field_of(lam, field)
    lam = _coerce(field, lam)
    _check_distinct(lam, field, "lambda")
    return tuple(_lagrange_basis(lam, field)[i])


def coh_eq_to_monomial(x: CohClassEq, lam: Sequence) -> tuple:
    field = x.field if x.field is not QQ_FIELD else _field_of(lam, None)
    lam = _coerce(field, lam)
    _check_distinct(lam, field, "lambda")
    basis = _lagrange_basis(lam, field)
    out = [field.zero] * (x.N + 1)
    for v, poly in zip(x.values, basis):
        for k, c in enumerate(poly):
            out[k] = out[k] + field(v) * c
    return tuple(out)


def eval_polynomial(coeffs: Sequence, x):
    acc = 0 * x
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


# ---------------------------------------------------------------------------
# comparison maps


def gamma_noneq(x: KClassNonEq) -> CohClassNonEq:
    """``pi**k -> H**k``."""
    return CohClassNonEq(x.N, x.coefficients, x.field)


def gamma_noneq_inverse(x: CohClassNonEq) -> KClassNonEq:
    return KClassNonEq(x.N, x.coefficients, x.field)


def gamma_eq(x: KClassEq, lam: Sequence | None = None) -> CohClassEq:
    """Carry the value at ``P = Lambda_i`` to the value at ``H = lambda_i``.

    The K-theoretic idempotent at ``i`` goes to the cohomological one at
    ``i``.  When ``lam`` is given it is checked for distinct entries.
    """
    if lam is not None:
        lam_f = _field_of(lam, None)
        if len(lam) != x.N + 1:
            raise ValueError("one equivariant parameter per fixed point is required")
        _check_distinct(_coerce(lam_f, lam), lam_f, "lambda")
    return CohClassEq(x.N, x.values, x.field)


def gamma_eq_inverse(x: CohClassEq) -> KClassEq:
    return KClassEq(x.N, x.values, x.field)


# ---------------------------------------------------------------------------
# non-equivariant limit


def noneq_limit(x: KClassEq, Lam: Sequence[RatFunc]) -> KClassNonEq:
    """Set every ``Lambda_i = 1`` in the monomial coefficients of ``x``.

    ``Lam`` are the symbolic parameters.  A coefficient whose reduced
    denominator vanishes at ``Lambda = 1`` raises :class:`DegenerateBasis`:
    the fixed point basis has no non-equivariant limit.
    """
    coeffs = eta_to_monomial(x, Lam)
    field = _field_of(Lam, None)
    if not isinstance(field, RatFuncField):
        raise TypeError("noneq_limit needs symbolic equivariant parameters")
    ones = {name: 1 for l in Lam for name in l.variables()}
    limits = []
    for k, c in enumerate(coeffs):
        r = field(c).reduced()
        try:
            v = r.subs(ones).as_fraction()
        except ZeroDivisionError:
            raise DegenerateBasis(
                f"coefficient of P^-{k} has a pole at Lambda = 1; the fixed point basis degenerates"
            ) from None
        limits.append(v)
    # y**k = (1 - pi)**k
    N = x.N
    out = [QQ_FIELD.zero] * (N + 1)
    for k, c in enumerate(limits):
        for m in range(min(k, N) + 1):
            out[m] += c * comb(k, m) * (-1) ** m
    return KClassNonEq(N, tuple(out), QQ_FIELD)


def equivariant_field(N: int, extra: Sequence[str] = ("q",)) -> RatFuncField:
    """Field in ``extra`` and ``Lambda0 .. LambdaN``."""
    return RatFuncField(tuple(extra) + tuple(f"Lambda{i}" for i in range(N + 1)))


def equivariant_parameters(field: RatFuncField, N: int) -> tuple:
    return tuple(field.gen(f"Lambda{i}") for i in range(N + 1))
