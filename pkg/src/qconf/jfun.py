"""Givental J-functions of projective space and their fundamental matrices.

K-theoretic side
    equivariant: fixed point column ``i`` is a q-character with eigenvalue
    ``Lambda_i**-1`` times the series ``sum_d Q**d / prod_j (q Lambda_j /
    Lambda_i; q)_d``.  Non-equivariant: coefficients ``J_i`` of ``pi**i``
    as polynomials in the q-logarithm symbol ``L``.

Cohomological side
    equivariant: power marker ``Q**(lambda_i / z)`` times
    ``sum_d Q**d prod_r prod_j 1 / (lambda_i - lambda_j + r z)``.
    Non-equivariant: coefficients of ``H**i`` as polynomials in ``log Q``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import factorial
from typing import Any, Iterator, Sequence

from .errors import ResonantParameters
from .qseries import CharacterSeries, LogPoly, PowerMarked, TruncSeries, delta, scale_Q
from .rings import CohClassNonEq, KClassNonEq, equivariant_field, equivariant_parameters
from .scalars import QQ_FIELD, NumericField, RatFuncField, principal_power
from .specfun import log_binomial_coeffs


def _vanishes(field, x) -> bool:
    if field.exact:
        return not x
    return abs(x) < field.tolerance


def q_field() -> RatFuncField:
    return RatFuncField(("q",))


# ---------------------------------------------------------------------------
# equivariant K-theory


@dataclass(frozen=True)
class JSeriesEq:
    N: int
    D: int
    field: Any
    q: Any
    Lam: tuple
    columns: tuple  # CharacterSeries, eigenvalue Lambda_i**-1
    z: Any = None
    lam: tuple | None = None

    def series(self, i: int) -> TruncSeries:
        return self.columns[i].body


def _numeric_lambdas(q, z, lam, field: NumericField) -> tuple:
    if z == 0:
        raise ValueError("z must be nonzero")
    return tuple(principal_power(q, -field(l) / field(z), field) for l in lam)


def build_jk_eq(N: int, D: int, mode: str = "symbolic", *, q=None, z=None, lam=None,
                field=None) -> JSeriesEq:
    """Equivariant K-theoretic J-function to order ``Q**D``.

    ``mode="symbolic"`` works in ``QQ(q, Lambda0..LambdaN)``.
    ``mode="numeric"`` takes numbers ``q, z, lam`` and sets
    ``Lambda_i = q**(-lam_i / z)``.
    """
    if D < 0 or N < 0:
        raise ValueError("N and D must be nonnegative")
    if mode == "symbolic":
        field = field or equivariant_field(N)
        q = field.gen("q")
        Lam = equivariant_parameters(field, N)
    elif mode == "numeric":
        field = field or NumericField()
        if lam is None or len(lam) != N + 1:
            raise ValueError("numeric mode needs N + 1 values lambda_i")
        z = 1 if z is None else z
        q = field(q)
        Lam = _numeric_lambdas(q, z, lam, field)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    columns = []
    for i in range(N + 1):
        ratios = [Lam[j] / Lam[i] for j in range(N + 1)]
        coeffs = [field.one]
        c = field.one
        qd = field.one
        for d in range(1, D + 1):
            qd = qd * q
            fac = field.one
            for j, rho in enumerate(ratios):
                f = field.one - qd * rho
                if _vanishes(field, f):
                    raise ResonantParameters(
                        f"factor 1 - q^{d} Lambda_{j}/Lambda_{i} vanishes"
                    )
                fac = fac * f
            c = c / fac
            coeffs.append(c)
        columns.append(CharacterSeries(TruncSeries(field, tuple(coeffs), D), field.one / Lam[i]))
    lam_t = tuple(lam) if lam is not None else None
    return JSeriesEq(N, D, field, q, tuple(Lam), tuple(columns), z, lam_t)


# ---------------------------------------------------------------------------
# equivariant cohomology


@dataclass(frozen=True)
class JCohEq:
    N: int
    D: int
    field: Any
    z: Any
    lam: tuple
    columns: tuple  # PowerMarked, exponent lambda_i / z

    def series(self, i: int) -> TruncSeries:
        return self.columns[i].body


def coh_eq_coefficient(i: int, d: int, z, lam: Sequence, field=QQ_FIELD):
    """``prod_{r=1}^d prod_j 1 / (lambda_i - lambda_j + r z)``."""
    z = field(z)
    lam = [field(l) for l in lam]
    c = field.one
    for r in range(1, d + 1):
        for j, lj in enumerate(lam):
            f = lam[i] - lj + r * z
            if _vanishes(field, f):
                raise ResonantParameters(f"lambda_{i} - lambda_{j} + {r} z vanishes")
            c = c / f
    return c


def check_coh_nonresonant(z, lam: Sequence, D: int, field=QQ_FIELD) -> None:
    for i in range(len(lam)):
        coh_eq_coefficient(i, D, z, lam, field)


def build_jcoh_eq(N: int, D: int, z, lam: Sequence, field=None) -> JCohEq:
    if len(lam) != N + 1:
        raise ValueError("need N + 1 values lambda_i")
    field = field or (lam[0].field if hasattr(lam[0], "field") else QQ_FIELD)
    z = field(z)
    if _vanishes(field, z):
        raise ValueError("z must be nonzero")
    lam = tuple(field(l) for l in lam)
    columns = []
    for i in range(N + 1):
        coeffs = [field.one]
        c = field.one
        for r in range(1, D + 1):
            fac = field.one
            for j, lj in enumerate(lam):
                f = lam[i] - lj + r * z
                if _vanishes(field, f):
                    raise ResonantParameters(f"lambda_{i} - lambda_{j} + {r} z vanishes")
                fac = fac * f
            c = c / fac
            coeffs.append(c)
        columns.append(PowerMarked(TruncSeries(field, tuple(coeffs), D), lam[i] / z))
    return JCohEq(N, D, field, z, lam, tuple(columns))


# ---------------------------------------------------------------------------
# non-equivariant K-theory


@dataclass(frozen=True)
class JSeriesNonEq:
    """``J = sum_i pi**i J_i`` with ``J_i`` polynomials in ``L``."""

    N: int
    D: int
    field: Any
    q: Any
    components: tuple  # LogPoly per power of pi

    def coefficient(self, d: int, i: int, a: int):
        """Coefficient of ``Q**d pi**i L**a``."""
        return self.components[i].coefficient(a).coeff(d)


def _inverse_linear(a, b, N: int, field) -> KClassNonEq:
    """``(a + b pi)**-1`` modulo ``pi**(N+1)``."""
    inv_a = field.one / a
    ratio = -b * inv_a
    cs = [inv_a]
    for _ in range(N):
        cs.append(cs[-1] * ratio)
    return KClassNonEq(N, tuple(cs), field)


def hypergeometric_classes(N: int, D: int, field=None, q=None) -> list[KClassNonEq]:
    """``1 / (q P**-1; q)_d**(N+1)`` for ``d = 0..D`` with
    ``(q P**-1; q)_d = prod_{r=1}^d ((1 - q**r) + q**r pi)``."""
    field = field or q_field()
    q = field.gen("q") if q is None else field(q)
    out = [KClassNonEq.unit(N, field)]
    qd = field.one
    for _ in range(1, D + 1):
        qd = qd * q
        step = _inverse_linear(field.one - qd, qd, N, field) ** (N + 1)
        out.append(out[-1] * step)
    return out


def p_power_minus_L(N: int, field, order: int) -> list[LogPoly]:
    """Coefficient of ``pi**k`` in ``P**-L = sum_k (-1)**k binom(L, k) pi**k``."""
    return [
        LogPoly.from_scalars(field, [(-1) ** k * c for c in log_binomial_coeffs(k)], order)
        for k in range(N + 1)
    ]


def build_jk_noneq(N: int, D: int, field=None) -> JSeriesNonEq:
    if D < 0 or N < 0:
        raise ValueError("N and D must be nonnegative")
    field = field or q_field()
    q = field.gen("q")
    hyper = hypergeometric_classes(N, D, field, q)
    H = [TruncSeries(field, tuple(h[b] for h in hyper), D) for b in range(N + 1)]
    P = p_power_minus_L(N, field, D)
    comps = []
    for i in range(N + 1):
        total = None
        for a in range(i + 1):
            term = P[a] * H[i - a]
            total = term if total is None else total + term
        comps.append(LogPoly(total.terms, N))
    return JSeriesNonEq(N, D, field, q, tuple(comps))


def decompose_ji(J: JSeriesNonEq) -> list[LogPoly]:
    return list(J.components)


def reassemble(components: Sequence[LogPoly], N: int) -> JSeriesNonEq:
    field = components[0].field
    q = field.gen("q") if isinstance(field, RatFuncField) else None
    return JSeriesNonEq(N, components[0].order, field, q, tuple(components))


def jk_from_fb(N: int, D: int, field=None) -> list[LogPoly]:
    """``J_i = sum_{a+b=i} (-1)**a binom(L, a) f_b``."""
    field = field or q_field()
    fs = [f_b(N, b, D, field) for b in range(N + 1)]
    P = p_power_minus_L(N, field, D)
    out = []
    for i in range(N + 1):
        total = None
        for a in range(i + 1):
            term = P[a] * fs[i - a]
            total = term if total is None else total + term
        out.append(LogPoly(total.terms, N))
    return out


# ---------------------------------------------------------------------------
# coefficient families


def multi_indices(N: int, b: int, j_max: int | None = None, k_max: int | None = None) -> Iterator[tuple[int, ...]]:
    """``(j_1, ..., j_N)`` with ``0 <= j_l <= j_max``, ``sum j_l <= k_max``
    and ``sum l j_l = b``."""
    j_max = N if j_max is None else j_max
    k_max = N if k_max is None else k_max

    def rec(l: int, rest: int, count: int, acc: list):
        if l > N:
            if rest == 0:
                yield tuple(acc)
            return
        for j in range(0, min(j_max, rest // l, k_max - count) + 1):
            acc.append(j)
            yield from rec(l + 1, rest - l * j, count + j, acc)
            acc.pop()

    yield from rec(1, b, 0, [])


def _multinomial_weight(N: int, js: tuple[int, ...]) -> Fraction:
    k = sum(js)
    denom = factorial(N)
    for j in js:
        denom *= factorial(j)
    return Fraction((-1) ** k * factorial(N + k), denom)


def _family(N: int, b: int, D: int, field, xs, prefactors, enlarged: bool):
    """``prefactor_d * sum_j weight(j) prod_l e_l(x_1..x_d)**j_l`` for ``d = 0..D``."""
    if not 0 <= b <= N:
        raise ValueError("need 0 <= b <= N")
    bound = 2 * N + 1 if enlarged else N
    idx = [(js, field(_multinomial_weight(N, js))) for js in multi_indices(N, b, bound, bound)]
    e = [field.one] + [field.zero] * N
    coeffs = []
    for d in range(D + 1):
        if d:
            x = xs[d - 1]
            for l in range(N, 0, -1):
                e[l] = e[l] + e[l - 1] * x
        s = field.zero
        for js, w in idx:
            term = w
            for l, j in enumerate(js, start=1):
                if j:
                    term = term * e[l] ** j
            s = s + term
        coeffs.append(prefactors[d] * s)
    return TruncSeries(field, tuple(coeffs), D)


def f_b(N: int, b: int, D: int, field=None, q=None, enlarged: bool = False) -> TruncSeries:
    """``sum_d Q**d / (q;q)_d**(N+1) * sum_k sum_j (-1)**k (N+k)!/(N! j_1!..j_N!)
    prod_l e_l(x)**j_l`` with ``x_m = q**m / (1 - q**m)``."""
    field = field or q_field()
    q = field.gen("q") if q is None else field(q)
    xs = []
    pref = [field.one]
    qm = field.one
    poch = field.one
    for _ in range(1, D + 1):
        qm = qm * q
        xs.append(qm / (field.one - qm))
        poch = poch * (field.one - qm)
        pref.append(field.one / poch ** (N + 1))
    return _family(N, b, D, field, xs, pref, enlarged)


def g_b(N: int, b: int, D: int, z=1, field=QQ_FIELD, enlarged: bool = False) -> TruncSeries:
    """Classical analogue of ``f_b``: prefactor ``1 / (z**d d!)**(N+1)``,
    ``x_m = 1 / m`` and an overall ``z**-b``."""
    z = field(z)
    if _vanishes(field, z):
        raise ValueError("z must be nonzero")
    xs = [field.one / field(m) for m in range(1, D + 1)]
    zb = field.one / z**b
    pref = [zb / (z**d * field(factorial(d))) ** (N + 1) for d in range(D + 1)]
    return _family(N, b, D, field, xs, pref, enlarged)


# ---------------------------------------------------------------------------
# non-equivariant cohomology


@dataclass(frozen=True)
class JCohNonEq:
    """``sum_i H**i J_i`` with ``J_i`` polynomials in the symbol ``log Q``."""

    N: int
    D: int
    field: Any
    z: Any
    components: tuple

    def coefficient(self, d: int, i: int, a: int):
        return self.components[i].coefficient(a).coeff(d)


def build_jcoh_noneq(N: int, D: int, z=1, field=QQ_FIELD, route: str = "g_b") -> JCohNonEq:
    """Assemble from ``g_b`` (``route="g_b"``) or by expanding
    ``prod_r (H + r z)**-(N+1)`` modulo ``H**(N+1)`` (``route="direct"``)."""
    z = field(z)
    if _vanishes(field, z):
        raise ValueError("z must be nonzero")
    # exp(H log(Q) / z): coefficient of H**a is (log Q / z)**a / a!
    expo = [field.one / (field(factorial(a)) * z**a) for a in range(N + 1)]
    if route == "g_b":
        gs = [g_b(N, b, D, z, field) for b in range(N + 1)]
    elif route == "direct":
        classes = [CohClassNonEq.unit(N, field)]
        for r in range(1, D + 1):
            step = CohClassNonEq(N, (field(r) * z, field.one)[: N + 1], field) ** (-(N + 1))
            classes.append(classes[-1] * step)
        gs = [TruncSeries(field, tuple(c[b] for c in classes), D) for b in range(N + 1)]
    else:
        raise ValueError(f"unknown route {route!r}")
    comps = []
    for i in range(N + 1):
        terms = [gs[i - a] * expo[a] for a in range(i + 1)]
        comps.append(LogPoly(tuple(terms), N))
    return JCohNonEq(N, D, field, z, tuple(comps))


# ---------------------------------------------------------------------------
# fundamental matrices


@dataclass(frozen=True)
class FundamentalMatrix:
    """Entry ``(l, i)`` is ``delta_q**l`` of column ``i`` of the pulled back J."""

    variant: str
    N: int
    D: int
    field: Any
    q: Any
    z: Any
    scale: Any
    entries: tuple
    params: dict = dc_field(default_factory=dict)

    def row(self, l: int) -> tuple:
        return self.entries[l]

    def column(self, i: int) -> tuple:
        return tuple(r[i] for r in self.entries)

    @property
    def size(self) -> int:
        return self.N + 1


def pullback_scale(q, z, N: int, field):
    """``((1 - q) / z)**(N+1)``, the inverse of ``Q -> (z / (1 - q))**(N+1) Q``."""
    return ((field.one - field(q)) / field(z)) ** (N + 1)


def pull_back(f, c):
    if isinstance(f, TruncSeries):
        return scale_Q(f, c)
    if isinstance(f, LogPoly):
        return f.map_series(lambda t: scale_Q(t, c))
    if isinstance(f, CharacterSeries):
        return CharacterSeries(pull_back(f.body, c), f.eigenvalue)
    raise TypeError(type(f).__name__)


def build_fundamental(variant: str, N: int, D: int, *, z=1, mode: str = "symbolic", q=None,
                      lam=None, field=None, J=None) -> FundamentalMatrix:
    """Rows ``delta_q**l``, ``l = 0..N``, of the pulled back J columns."""
    if variant == "eq":
        J = J or build_jk_eq(N, D, mode, q=q, z=z, lam=lam, field=field)
        cols = list(J.columns)
        params = {"Lambda": J.Lam, "lam": J.lam}
    elif variant == "noneq":
        J = J or build_jk_noneq(N, D, field)
        cols = list(J.components)
        params = {}
    else:
        raise ValueError(f"unknown variant {variant!r}")
    fld = J.field
    zf = fld(z)
    c = pullback_scale(J.q, zf, N, fld)
    row = [pull_back(col, c) for col in cols]
    rows = [tuple(row)]
    for _ in range(N):
        row = [delta(f, J.q) for f in row]
        rows.append(tuple(row))
    return FundamentalMatrix(variant, N, D, fld, J.q, zf, c, tuple(rows), params)
