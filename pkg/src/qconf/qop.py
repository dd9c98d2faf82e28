"""Scalar q-difference and differential operators.

A :class:`QDiffOp` is ``sum_k a_k(Q) X**k`` where ``X`` is the shift
``sigma`` or ``delta = (sigma - 1) / (q - 1)`` and each ``a_k`` is a
polynomial in ``Q`` given by its coefficient tuple.  A :class:`DiffOp` is
the same shape in ``theta = Q d/dQ``.

The action of ``theta`` on the symbolic prefactors lives here:
``theta(Q**e f) = Q**e (e f + theta f)`` on power markers and
``theta((log Q)**a) = a (log Q)**(a-1)`` on the log symbol.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import comb
from typing import Any, Callable, Sequence

from .errors import DivergentCoefficient, LeadingCoefficientVanishes, QEqualsOne, TruncationTooShort
from .qseries import (
    CharacterSeries,
    LogPoly,
    PowerMarked,
    TruncSeries,
    body_series,
    delta,
    mul_Q_poly,
    sigma,
)
from .qsystems import QRat, QSystem
from .scalars import NumericField, QQ_FIELD, principal_power


def elementary_symmetric(values: Sequence, field) -> list:
    """``[e_0, e_1, ..., e_n]``."""
    e = [field.one] + [field.zero] * len(values)
    for k, v in enumerate(values, start=1):
        for j in range(k, 0, -1):
            e[j] = e[j] + e[j - 1] * v
    return e


def _trim_poly(p, field) -> tuple:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def _is_zero(field, x) -> bool:
    return x == 0 if field.exact else field.is_zero(x)


@dataclass(frozen=True)
class QDiffOp:
    field: Any
    q: Any
    coeffs: tuple  # coeffs[k][j]: coefficient of Q**j X**k
    form: str = "sigma"
    meta: dict = dc_field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.form not in ("sigma", "delta"):
            raise ValueError("form is 'sigma' or 'delta'")
        cs = tuple(_trim_poly([self.field(c) for c in p], self.field) for p in self.coeffs)
        while len(cs) > 1 and not cs[-1]:
            cs = cs[:-1]
        object.__setattr__(self, "coeffs", cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def q_degree(self) -> int:
        return max((len(p) - 1 for p in self.coeffs), default=0)

    def coefficient(self, k: int, j: int):
        p = self.coeffs[k] if k < len(self.coeffs) else ()
        return p[j] if j < len(p) else self.field.zero

    def map(self, fn: Callable) -> "QDiffOp":
        return QDiffOp(self.field, self.q, tuple(tuple(fn(c) for c in p) for p in self.coeffs),
                       self.form, dict(self.meta))


@dataclass(frozen=True)
class DiffOp:
    field: Any
    coeffs: tuple  # coeffs[k][j]: coefficient of Q**j theta**k
    meta: dict = dc_field(default_factory=dict, compare=False)

    def __post_init__(self):
        cs = tuple(_trim_poly([self.field(c) for c in p], self.field) for p in self.coeffs)
        while len(cs) > 1 and not cs[-1]:
            cs = cs[:-1]
        object.__setattr__(self, "coeffs", cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def q_degree(self) -> int:
        return max((len(p) - 1 for p in self.coeffs), default=0)

    def coefficient(self, k: int, j: int):
        p = self.coeffs[k] if k < len(self.coeffs) else ()
        return p[j] if j < len(p) else self.field.zero


# ---------------------------------------------------------------------------
# constructors


def make_kth_operator(variant: str, N: int, *, Lam: Sequence | None = None, q=None, field=None) -> QDiffOp:
    """``prod_j (1 - Lambda_j sigma) - Q``; ``Lambda_j = 1`` when non-equivariant."""
    if variant == "noneq":
        field = field or QQ_FIELD
        Lam = [field.one] * (N + 1)
    elif variant == "eq":
        if Lam is None or len(Lam) != N + 1:
            raise ValueError("the equivariant operator needs N + 1 parameters Lambda_j")
        field = field or Lam[0].field
        Lam = [field(l) for l in Lam]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if q is None and hasattr(field, "names") and "q" in field.names:
        q = field.gen("q")
    e = elementary_symmetric(Lam, field)
    coeffs = [[(-1) ** k * e[k]] for k in range(N + 2)]
    coeffs[0] = [coeffs[0][0], -field.one]
    return QDiffOp(field, q, tuple(tuple(c) for c in coeffs), "sigma", {"variant": variant, "N": N})


def make_coh_operator(variant: str, N: int, z=1, lam: Sequence | None = None, field=None) -> DiffOp:
    """``prod_j (-lambda_j + z theta) - Q``."""
    if variant == "noneq":
        field = field or QQ_FIELD
        lam = [field.zero] * (N + 1)
    elif variant == "eq":
        if lam is None or len(lam) != N + 1:
            raise ValueError("the equivariant operator needs N + 1 parameters lambda_j")
        field = field or (lam[0].field if hasattr(lam[0], "field") else QQ_FIELD)
        lam = [field(l) for l in lam]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    z = field(z)
    e = elementary_symmetric([-l for l in lam], field)
    coeffs = [[z**k * e[N + 1 - k]] for k in range(N + 2)]
    coeffs[0] = [coeffs[0][0], -field.one]
    return DiffOp(field, tuple(tuple(c) for c in coeffs), {"variant": variant, "N": N})


# ---------------------------------------------------------------------------
# sigma and delta forms


def _q_minus_one(op: QDiffOp):
    if op.q is None:
        raise ValueError("operator has no q")
    h = op.field(op.q) - op.field.one
    if _is_zero(op.field, h):
        raise QEqualsOne("the delta form needs q != 1")
    return h


def _poly_add(a, b, field):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else field.zero) + (b[i] if i < len(b) else field.zero) for i in range(n)]


def to_delta_form(op: QDiffOp) -> QDiffOp:
    """Substitute ``sigma = 1 + (q - 1) delta``."""
    if op.form == "delta":
        return op
    f = op.field
    h = _q_minus_one(op)
    n = op.degree
    out = [[] for _ in range(n + 1)]
    hp = f.one
    for j in range(n + 1):
        acc = []
        for k in range(j, n + 1):
            acc = _poly_add(acc, [c * comb(k, j) for c in op.coeffs[k]], f)
        out[j] = [c * hp for c in acc]
        hp = hp * h
    return QDiffOp(f, op.q, tuple(tuple(p) for p in out), "delta", dict(op.meta))


def to_sigma_form(op: QDiffOp) -> QDiffOp:
    """Substitute ``delta = (sigma - 1) / (q - 1)``."""
    if op.form == "sigma":
        return op
    f = op.field
    hinv = f.one / _q_minus_one(op)
    n = op.degree
    out = [[] for _ in range(n + 1)]
    hp = f.one
    for j in range(n + 1):
        for k in range(j + 1):
            c = comb(j, k) * (-1) ** (j - k) * hp
            out[k] = _poly_add(out[k], [x * c for x in op.coeffs[j]], f)
        hp = hp * hinv
    return QDiffOp(f, op.q, tuple(tuple(p) for p in out), "sigma", dict(op.meta))


def pullback_op(op: QDiffOp, z, normalize: bool = False, exponent: int | None = None) -> QDiffOp:
    """Replace ``a_k(Q)`` by ``a_k(c Q)`` with ``c = ((1 - q) / z)**(N+1)``.

    ``N + 1`` defaults to the operator degree.  With ``normalize`` every
    coefficient is divided by ``c``, so the ``-Q`` term survives the change
    of variable unscaled; the factor is kept in ``meta["normalization"]``.
    """
    f = op.field
    z = f(z)
    if _is_zero(f, z):
        raise ValueError("z must be nonzero")
    e = op.degree if exponent is None else exponent
    c = ((f.one - f(op.q)) / z) ** e
    out = []
    for p in op.coeffs:
        pw = f.one
        row = []
        for x in p:
            row.append(x * pw)
            pw = pw * c
        out.append(row)
    meta = dict(op.meta)
    meta["pullback_scale"] = c
    if normalize:
        if _is_zero(f, c):
            raise QEqualsOne("normalization by ((1 - q)/z)**(N+1) needs q != 1")
        cinv = f.one / c
        out = [[x * cinv for x in row] for row in out]
        meta["normalization"] = c
    return QDiffOp(f, op.q, tuple(tuple(r) for r in out), op.form, meta)


# ---------------------------------------------------------------------------
# application and residuals


def theta(f):
    """``Q d/dQ`` on series, log polynomials in ``log Q`` and power markers."""
    if isinstance(f, TruncSeries):
        return f.map_degree(lambda d, c: c * d)
    if isinstance(f, LogPoly):
        terms = list(f.terms)
        out = []
        for a, t in enumerate(terms):
            acc = theta(t)
            if a + 1 < len(terms):
                acc = acc + terms[a + 1] * (a + 1)
            out.append(acc)
        return LogPoly(tuple(out), f.max_log_degree)
    if isinstance(f, PowerMarked):
        return PowerMarked(f.body * f.field(f.exponent) + theta(f.body), f.exponent)
    raise TypeError(f"theta is not defined on {type(f).__name__}")


def _apply(coeffs, powers):
    total = None
    for p, fk in zip(coeffs, powers):
        if not p:
            continue
        term = mul_Q_poly(p, fk)
        total = term if total is None else total + term
    return total if total is not None else powers[0] * 0


def apply_op(op, f):
    n = op.degree
    powers = [f]
    if isinstance(op, DiffOp):
        step = theta
    elif op.form == "sigma":
        def step(g):
            return sigma(g, op.q)
    else:
        def step(g):
            return delta(g, op.q)
    for _ in range(n):
        powers.append(step(powers[-1]))
    return _apply(op.coeffs, powers)


def residual(op, sol):
    """``op`` applied to ``sol``; coefficients are known to the order carried by the result."""
    if sol.order < op.q_degree:
        raise TruncationTooShort(
            f"solution known to Q^{sol.order}, operator reaches Q^{op.q_degree}"
        )
    return apply_op(op, sol)


def residual_is_zero(res, tol=None) -> bool:
    for s in body_series(res):
        if s.field.exact:
            if not s.is_zero():
                return False
        else:
            t = s.field.tolerance if tol is None else tol
            if any(abs(c) > t for c in s.coeffs):
                return False
    return True


def residual_max(res):
    """Largest coefficient modulus; an exact zero residual gives ``0``.

    Exact residuals with non-constant coefficients give ``None``.
    """
    series = body_series(res)
    if all(s.field.exact for s in series):
        vals = []
        for s in series:
            for c in s.coeffs:
                if c == 0:
                    continue
                if hasattr(c, "is_constant"):
                    if not c.is_constant():
                        return None
                    c = c.as_fraction()
                vals.append(abs(c))
        return max(vals, default=0)
    return max((abs(c) for s in series for c in s.coeffs), default=0)


def first_nonzero(res) -> tuple[int, int] | None:
    """``(log degree, Q degree)`` of the first nonzero residual coefficient."""
    for a, s in enumerate(body_series(res)):
        for d, c in s.items():
            if (c != 0) if s.field.exact else not s.field.is_zero(c):
                return a, d
    return None


# ---------------------------------------------------------------------------
# companion systems


def companion(op) -> QSystem:
    """First order system for ``Y = (f, X f, ..., X**(n-1) f)``.

    ``sigma`` form: ``sigma Y = A Y``.  ``delta`` form: ``delta Y = C Y`` and
    ``A = Id + (q - 1) C``.  A :class:`DiffOp` gives ``theta Y = C Y`` with
    ``C`` returned in the system slot and ``q = None``.
    """
    f = op.field
    n = op.degree
    lead = op.coeffs[n]
    if not lead or (len(lead) == 1 and _is_zero(f, lead[0])):
        raise LeadingCoefficientVanishes("leading coefficient is zero")
    lead_r = QRat(f, lead)
    rows = []
    for i in range(n):
        row = []
        for k in range(n):
            if i < n - 1:
                row.append(QRat.const(f, f.one if k == i + 1 else f.zero))
            else:
                row.append(-QRat(f, op.coeffs[k] if k < len(op.coeffs) else ()) / lead_r)
        rows.append(row)
    if isinstance(op, QDiffOp) and op.form == "delta":
        h = f(op.q) - f.one
        rows = [[(QRat.const(f, f.one) if i == k else QRat.const(f, f.zero)) + e * h
                 for k, e in enumerate(r)] for i, r in enumerate(rows)]
    q = getattr(op, "q", None)
    return QSystem(f, q, tuple(tuple(r) for r in rows), {"kind": type(op).__name__,
                                                        "form": getattr(op, "form", "theta")})


# ---------------------------------------------------------------------------
# formal limit q -> 1


def kth_operator_family(variant: str, N: int, q0, z=1, lam: Sequence | None = None,
                        field: NumericField | None = None) -> Callable[[Any], QDiffOp]:
    """``t -> `` normalized pulled back delta-form operator at ``q = q0**t``
    with ``Lambda_i = q**(-lambda_i / z)``."""
    field = field or NumericField()

    def at(t) -> QDiffOp:
        q = principal_power(field(q0), field(t), field)
        if variant == "eq":
            Lam = [principal_power(q, -field(l) / field(z), field) for l in lam]
            op = make_kth_operator("eq", N, Lam=Lam, q=q, field=field)
        else:
            op = make_kth_operator("noneq", N, q=q, field=field)
        return pullback_op(to_delta_form(op), z, normalize=True)

    return at


@dataclass
class LimitRow:
    k: int  # power of delta
    j: int  # power of Q
    values: list  # (t, value)
    target: Any
    errors: list
    monotone: bool

    @property
    def final_error(self):
        return self.errors[-1]


@dataclass
class LimitTable:
    rows: list
    confluent: bool
    candidate: DiffOp
    tol: Any


def decreasing(errors: Sequence, floor=0) -> bool:
    """Each error is below the previous one, or both sit at the noise floor."""
    return all(b < a or (b <= floor and a <= floor) or b == 0 for a, b in zip(errors, errors[1:]))


def formal_limit(family: Callable[[Any], QDiffOp], target: DiffOp, t_list: Sequence, tol=1e-3,
                 field: NumericField | None = None) -> LimitTable:
    """Compare delta-form coefficients along ``t_list`` with the theta-form target."""
    field = field or NumericField()
    ts = sorted(t_list, key=lambda t: -float(t))
    ops = [family(t) for t in ts]
    n = max(max(o.degree for o in ops), target.degree)
    m = max(max(o.q_degree for o in ops), target.q_degree)
    rows = []
    floor = field.tolerance
    for k in range(n + 1):
        for j in range(m + 1):
            tgt = field(target.coefficient(k, j))
            vals = [(t, field(o.coefficient(k, j))) for t, o in zip(ts, ops)]
            errs = [abs(v - tgt) for _, v in vals]
            mono = decreasing(errs, floor)
            if len(errs) >= 3 and errs[-1] > errs[-2] > errs[-3] and errs[-1] > tol:
                raise DivergentCoefficient(
                    f"coefficient of Q^{j} delta^{k} moves away from its target along t"
                )
            rows.append(LimitRow(k, j, vals, tgt, errs, mono))
    confluent = all(r.monotone and r.final_error < tol for r in rows)
    cand = DiffOp(field, tuple(
        tuple(next(r.values[-1][1] for r in rows if r.k == k and r.j == j) for j in range(m + 1))
        for k in range(n + 1)
    ))
    return LimitTable(rows, confluent, cand, tol)
