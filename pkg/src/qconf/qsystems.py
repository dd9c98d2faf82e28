"""Matrix q-difference systems ``sigma X = A X`` and confluence checks.

Entries of ``A`` are rational functions of ``Q`` stored as unreduced
numerator/denominator coefficient tuples over a scalar field.  Numeric
checks (eigenvalues, limits) run in a :class:`NumericField`.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Any, Callable, Sequence

from .errors import (
    JordanCaseUnsupported,
    NoConvergence,
    PolesOnCommonSpiral,
    SingularGauge,
    ZeroScale,
)
from .scalars import NumericField, evaluate_scalar
from .qseries import q_powers

DEFAULT_K_MAX = 50


# ---------------------------------------------------------------------------
# polynomials in Q as coefficient tuples


def _trim(p: list, field) -> tuple:
    while p and (not p[-1] if field.exact else p[-1] == 0):
        p.pop()
    return tuple(p)


def _padd(a, b, field):
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else field.zero) + (b[i] if i < len(b) else field.zero)
                  for i in range(n)], field)


def _pmul(a, b, field):
    if not a or not b:
        return ()
    out = [field.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] = out[i + j] + x * y
    return _trim(out, field)


def _pscale(a, c, field):
    return _trim([x * c for x in a], field)


def _peval(a, x, zero):
    acc = zero
    for c in reversed(a):
        acc = acc * x + c
    return acc


@dataclass(frozen=True, eq=False)
class QRat:
    """``num(Q) / den(Q)``."""

    field: Any
    num: tuple
    den: tuple = None

    def __post_init__(self):
        f = self.field
        num = _trim([f(c) for c in self.num], f)
        den = _trim([f(c) for c in (self.den if self.den is not None else (f.one,))], f)
        if not den:
            raise ZeroDivisionError("zero denominator")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def const(cls, field, c) -> "QRat":
        return cls(field, (c,))

    def _lift(self, other) -> "QRat":
        return other if isinstance(other, QRat) else QRat.const(self.field, other)

    def __add__(self, other):
        o = self._lift(other)
        f = self.field
        if self.den == o.den:
            return QRat(f, _padd(self.num, o.num, f), self.den)
        return QRat(f, _padd(_pmul(self.num, o.den, f), _pmul(o.num, self.den, f), f),
                    _pmul(self.den, o.den, f))

    __radd__ = __add__

    def __neg__(self):
        return QRat(self.field, tuple(-c for c in self.num), self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        f = self.field
        return QRat(f, _pmul(self.num, o.num, f), _pmul(self.den, o.den, f))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        f = self.field
        return QRat(f, _pmul(self.num, o.den, f), _pmul(self.den, o.num, f))

    def is_zero(self) -> bool:
        if self.field.exact:
            return not self.num
        return all(self.field.is_zero(c) for c in self.num)

    def __eq__(self, other):
        if not isinstance(other, QRat):
            other = self._lift(other)
        return (self - other).is_zero()

    __hash__ = None

    def scale(self, c) -> "QRat":
        """``Q -> c Q``."""
        f = self.field
        c = f(c)
        n = max(len(self.num), len(self.den))
        pw = q_powers(c, 0, n, f.one)
        return QRat(f, tuple(x * p for x, p in zip(self.num, pw)), tuple(x * p for x, p in zip(self.den, pw)))

    def cancel_Q(self) -> "QRat":
        """Remove a common power of ``Q`` from numerator and denominator."""
        num, den = list(self.num), list(self.den)
        while num and den and num[0] == 0 and den[0] == 0:
            num.pop(0)
            den.pop(0)
        return QRat(self.field, tuple(num), tuple(den))

    def at_zero(self):
        """Value at ``Q = 0`` or ``None`` when it is a pole."""
        r = self.cancel_Q()
        if not r.num:
            return self.field.zero
        d0 = r.den[0]
        if d0 == 0 or (not self.field.exact and self.field.is_zero(d0)):
            return None
        return r.num[0] / d0

    def evaluate(self, Q, target: NumericField, assignment=None):
        f = self.field
        num = [evaluate_scalar(f, c, assignment, target) for c in self.num]
        den = [evaluate_scalar(f, c, assignment, target) for c in self.den]
        Q = target(Q)
        return _peval(num, Q, target.zero) / _peval(den, Q, target.zero)

    def __repr__(self):
        return f"QRat({list(map(str, self.num))} / {list(map(str, self.den))})"


# ---------------------------------------------------------------------------
# matrices of QRat


def _identity(n, field):
    return tuple(tuple(QRat.const(field, field.one if i == j else field.zero) for j in range(n)) for i in range(n))


def _matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = a[i][0] * b[0][j]
            for k in range(1, m):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def _inverse(a):
    """Gauss-Jordan elimination over rational functions of Q."""
    n = len(a)
    field = a[0][0].field
    m = [list(r) + list(e) for r, e in zip(a, _identity(n, field))]
    for col in range(n):
        piv = next((r for r in range(col, n) if not m[r][col].is_zero()), None)
        if piv is None:
            raise SingularGauge("matrix is singular as a rational function of Q")
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r != col and not m[r][col].is_zero():
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return tuple(tuple(r[n:]) for r in m)


@dataclass(frozen=True)
class QSystem:
    """``sigma X = A(Q) X`` with ``sigma: Q -> qQ``."""

    field: Any
    q: Any
    A: tuple  # rows of QRat
    meta: dict = dc_field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.A)

    @classmethod
    def from_entries(cls, field, q, rows, meta=None) -> "QSystem":
        A = tuple(tuple(e if isinstance(e, QRat) else QRat.const(field, e) for e in row) for row in rows)
        return cls(field, q, A, meta or {})

    def evaluate(self, Q, target: NumericField, assignment=None):
        return target.ctx.matrix([[e.evaluate(Q, target, assignment) for e in row] for row in self.A])

    def sigma(self) -> "QSystem":
        return QSystem(self.field, self.q, tuple(tuple(e.scale(self.q) for e in r) for r in self.A), self.meta)

    def equals(self, other: "QSystem") -> bool:
        return all(x == y for r, s in zip(self.A, other.A) for x, y in zip(r, s))


@dataclass(frozen=True)
class GaugeTransform:
    F: tuple  # rows of QRat

    @classmethod
    def from_entries(cls, field, rows) -> "GaugeTransform":
        return cls(tuple(tuple(e if isinstance(e, QRat) else QRat.const(field, e) for e in r) for r in rows))

    def inverse(self) -> "GaugeTransform":
        return GaugeTransform(_inverse(self.F))


def gauge(A: QSystem, F: GaugeTransform) -> QSystem:
    """``(sigma F) A F**-1``."""
    Finv = _inverse(F.F)
    sF = tuple(tuple(e.scale(A.q) for e in r) for r in F.F)
    return QSystem(A.field, A.q, _matmul(_matmul(sF, A.A), Finv), A.meta)


def pullback_system(A: QSystem, c) -> QSystem:
    """``A(Q) -> A(Q / c)``."""
    c = A.field(c)
    if c == 0 or A.field.is_zero(c):
        raise ZeroScale("pullback by zero")
    inv = A.field.one / c
    return QSystem(A.field, A.q, tuple(tuple(e.scale(inv) for e in r) for r in A.A), A.meta)


@dataclass(frozen=True)
class RegularSingularReport:
    defined: bool
    invertible: bool
    A0: Any
    det: Any

    @property
    def witness(self) -> bool:
        return self.defined and self.invertible


def _det(rows, zero):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = zero
    for j in range(n):
        if not rows[0][j]:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * _det(minor, zero)
        total = total + term if j % 2 == 0 else total - term
    return total


def is_regular_singular_witness(A: QSystem) -> RegularSingularReport:
    vals = [[e.at_zero() for e in r] for r in A.A]
    if any(v is None for r in vals for v in r):
        return RegularSingularReport(False, False, None, None)
    d = _det(vals, A.field.zero)
    inv = bool(d) if A.field.exact else not A.field.is_zero(d)
    return RegularSingularReport(True, inv, tuple(map(tuple, vals)), d)


def is_nonresonant(eigenvalues: Sequence, q, k_max: int = DEFAULT_K_MAX,
                   field: NumericField | None = None, tol=None) -> bool:
    """No ratio of two eigenvalues equals ``q**k`` with ``0 < |k| <= k_max``."""
    field = field or NumericField()
    ev = [field(e) for e in eigenvalues]
    q = field(q)
    tol = field.tolerance if tol is None else tol
    pw = {k: q**k for k in range(-k_max, k_max + 1) if k}
    for i in range(len(ev)):
        for j in range(len(ev)):
            if i == j:
                continue
            r = ev[i] / ev[j]
            for qk in pw.values():
                if abs(r - qk) <= tol * max(1, abs(qk)):
                    return False
    return True


# ---------------------------------------------------------------------------
# eigen data for small matrices


def char_poly(M, ctx) -> list:
    """Coefficients ``[c_n = 1, c_{n-1}, ..., c_0]`` by Faddeev-LeVerrier."""
    n = M.rows
    coeffs = [ctx.mpc(1)]
    Mk = ctx.zeros(n, n)
    I = ctx.eye(n)
    for k in range(1, n + 1):
        Mk = M * (Mk + coeffs[-1] * I)
        c = -sum(Mk[i, i] for i in range(n)) / k
        coeffs.append(c)
    return coeffs


def eigenvalues(M, field: NumericField) -> list:
    ctx = field.ctx
    n = M.rows
    if n == 1:
        return [ctx.mpc(M[0, 0])]
    coeffs = char_poly(M, ctx)
    with ctx.extraprec(2 * field.bits):
        roots = ctx.polyroots(coeffs, maxsteps=400, extraprec=2 * field.bits)
    return sorted((ctx.mpc(r) for r in roots), key=lambda z: (float(z.real), float(z.imag)))


def _adjugate_column(M, ctx):
    n = M.rows
    best = None
    for j in range(n):
        col = []
        for i in range(n):
            minor = [[M[r, c] for c in range(n) if c != i] for r in range(n) if r != j]
            # cofactor expansion: mpmath's LU stumbles on exactly singular minors
            col.append((-1) ** (i + j) * _det(minor, ctx.mpc(0)))
        norm = max(abs(x) for x in col)
        if best is None or norm > best[0]:
            best = (norm, col)
    return best[1]


def eigenvector(M, mu, field: NumericField):
    ctx = field.ctx
    n = M.rows
    if n == 1:
        return [ctx.mpc(1)]
    return _adjugate_column(M - mu * ctx.eye(n), ctx)


def _normalise(vec, index: int):
    return [v / vec[index] for v in vec]


# ---------------------------------------------------------------------------
# confluence conditions


@dataclass
class SauloyReport:
    conditions: dict
    B_limit: dict
    diffs: dict
    target_error: Any
    eigenvalues: list
    notes: list

    @property
    def passed(self) -> bool:
        return all(v in (True, None) for v in self.conditions.values())


def _spiral_ratio(p1, p2, q0, field: NumericField) -> bool:
    """Whether ``p1 / p2`` lies in ``q0**R``."""
    ctx = field.ctx
    lr = ctx.log(field(p1) / field(p2))
    lq = ctx.log(field(q0))
    kmax = 2 + int(abs(lr) + abs(lq))
    for k in range(-kmax, kmax + 1):
        v = (lr + 2j * ctx.pi * k) / lq
        if abs(v.imag) <= field.tolerance * (1 + abs(v)):
            return True
    return False


def check_pole_spirals(poles: Sequence, q0, field: NumericField) -> None:
    """Condition (i): raise when two declared poles share a q0-spiral."""
    for i in range(len(poles)):
        for j in range(i + 1, len(poles)):
            if _spiral_ratio(poles[i], poles[j], q0, field):
                raise PolesOnCommonSpiral(f"poles {poles[i]} and {poles[j]} lie on a common q0-spiral")


def _maxnorm(M):
    return max(abs(M[i, j]) for i in range(M.rows) for j in range(M.cols))


def _decreasing(errs, floor) -> bool:
    return all(b < a or b <= floor for a, b in zip(errs, errs[1:]))


def _tail(diffs, floor):
    """Distance from the last iterate to the limit, assuming the differences
    shrink geometrically at the last observed ratio."""
    d = diffs[-1]
    if d <= floor:
        return d
    if len(diffs) < 2 or diffs[-2] <= floor:
        return d
    rho = d / diffs[-2]
    if rho >= 1:
        return float("inf")
    return d * rho / (1 - rho)


def sauloy_confluence_check(family: Callable[[Any], QSystem], q0, t_list: Sequence,
                            sample_Q: Sequence, poles: Sequence = (), target: Callable | None = None,
                            tol=1e-3, field: NumericField | None = None) -> SauloyReport:
    """Numeric check of conditions (i)-(iv) for ``t -> A_{q0**t}``.

    ``B_t(Q) = (A_t(Q) - Id) / (q - 1)`` is evaluated at every sample point
    and at ``Q = 0``.  Convergence means successive differences along the
    decreasing ``t_list`` decrease and the geometric tail estimate
    ``d_n rho / (1 - rho)``, ``rho = d_n / d_{n-1}``, is below ``tol``.  The
    check is sample based; uniformity on compacts is not certified.
    ``target`` optionally maps ``Q`` to the expected limit matrix.
    """
    field = field or NumericField()
    ctx = field.ctx
    tol = ctx.mpf(tol)
    floor = field.tolerance
    q0 = field(q0)
    t_list = sorted((field.real(field(t).real) for t in t_list), reverse=True)
    notes = ["sample based: convergence is checked at the listed Q only"]
    conditions = {"i": None, "ii": False, "iii": False, "iv": False}

    check_pole_spirals(list(poles), q0, field)
    conditions["i"] = True if poles else None

    points = [field(0)] + [field(Q) for Q in sample_Q]
    Bs = {k: [] for k in range(len(points))}
    A0s = []
    for t in t_list:
        q = ctx.power(q0, t) if q0.imag == 0 and q0.real > 0 else ctx.exp(t * ctx.log(q0))
        A = family(t)
        n = A.n
        I = ctx.eye(n)
        for k, Q in enumerate(points):
            if k == 0:
                vals = [[e.at_zero() for e in r] for r in A.A]
                if any(v is None for r in vals for v in r):
                    raise NoConvergence("A(0) is undefined along the family")
                M = ctx.matrix([[evaluate_scalar(A.field, v, None, field) for v in r] for r in vals])
                A0s.append((q, M))
            else:
                M = A.evaluate(Q, field)
            Bs[k].append((M - I) / (q - 1))

    diffs = {}
    for k, seq in Bs.items():
        d = [_maxnorm(b - a) for a, b in zip(seq, seq[1:])]
        diffs[k] = d
        if not d:
            raise NoConvergence("need at least two values of t")
        if not _decreasing(d, floor) or _tail(d, floor) >= tol:
            raise NoConvergence(
                f"B_q does not settle at Q = {ctx.nstr(points[k], 6)}: successive differences "
                + ", ".join(ctx.nstr(x, 3) for x in d)
            )
    conditions["ii"] = True
    B_limit = {k: seq[-1] for k, seq in Bs.items()}

    target_error = None
    if target is not None:
        target_error = max(_maxnorm(B_limit[k] - target(points[k])) for k in B_limit)
        if target_error >= tol:
            conditions["ii"] = False
            notes.append(f"limit differs from the target by {ctx.nstr(target_error, 3)}")

    # (iii) regular singular and non-resonant at 0
    B0 = B_limit[0]
    ev = eigenvalues(B0, field)
    integer_gap = any(
        abs(a - b) > tol and abs((a - b) - ctx.nint((a - b).real)) < tol
        for i, a in enumerate(ev) for j, b in enumerate(ev) if i != j
    )
    q_last, A0_last = A0s[-1]
    a_ev = eigenvalues(A0_last, field)
    a_ok = all(abs(x) > floor for x in a_ev) and is_nonresonant(a_ev, q_last, field=field)
    conditions["iii"] = bool(not integer_gap and a_ok)
    if integer_gap:
        notes.append("limit exponents differ by a nonzero integer")

    # (iv) diagonalising transforms converge, semisimple case only
    for a, b in ((a, b) for i, a in enumerate(ev) for b in ev[i + 1:]):
        if abs(a - b) <= tol:
            if _maxnorm(B0 - a * ctx.eye(B0.rows)) > tol:
                raise JordanCaseUnsupported("repeated exponent with a nontrivial Jordan block")
            conditions["iv"] = True
            return SauloyReport(conditions, B_limit, diffs, target_error, ev, notes)
    ref_vecs = [eigenvector(B0, mu, field) for mu in ev]
    pivots = [max(range(len(v)), key=lambda i: abs(v[i])) for v in ref_vecs]
    seq = []
    for B in Bs[0]:
        evt = eigenvalues(B, field)
        # match by proximity to the limit exponents
        matched = [min(evt, key=lambda x: abs(x - mu)) for mu in ev]
        vecs = [_normalise(eigenvector(B, mu, field), p) for mu, p in zip(matched, pivots)]
        seq.append((matched, vecs))
    dv = []
    for (e1, v1), (e2, v2) in zip(seq, seq[1:]):
        dv.append(max(
            max(abs(a - b) for a, b in zip(e1, e2)),
            max(abs(x - y) for a, b in zip(v1, v2) for x, y in zip(a, b)),
        ))
    diffs["transforms"] = dv
    conditions["iv"] = bool(_decreasing(dv, floor) and _tail(dv, floor) < tol)
    return SauloyReport(conditions, B_limit, diffs, target_error, ev, notes)
