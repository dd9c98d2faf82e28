"""Confluence q -> 1 of the K-theoretic J-functions.

For ``q = q0**t`` the pulled back fundamental solution is transformed so
that its q-logarithms are taken at ``Q`` rather than at the rescaled
argument, and its coefficients are followed as ``t`` decreases.  The
change of fundamental solution is never formed as a matrix of theta
quotients; the transformed entries are rebuilt from their closed form and
checked against the pulled back equation instead.

Verdicts use the same rule everywhere: every row must have errors that
decrease along the ``t`` grid (exact zeros allowed) and a final error
below ``tol``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Any, Sequence

from .errors import NoConvergence, ResonantParameters
from .jfun import (
    FundamentalMatrix,
    build_fundamental,
    build_jcoh_eq,
    build_jcoh_noneq,
    check_coh_nonresonant,
    coh_eq_coefficient,
    q_field,
)
from .qop import (
    decreasing,
    formal_limit,
    kth_operator_family,
    make_coh_operator,
    make_kth_operator,
    pullback_op,
    residual,
    to_delta_form,
)
from .qseries import CharacterSeries, LogPoly, TruncSeries, delta
from .rings import CohClassEq, CohClassNonEq, KClassEq, KClassNonEq, gamma_eq, gamma_noneq
from .scalars import NumericField, principal_power, ratfunc_eval
from .specfun import ell_q_eval


@dataclass
class ReportRow:
    basis: str
    qdeg: int
    logdeg: int
    values: list  # [(t, value)]
    target: Any
    errors: list
    monotone: bool

    @property
    def final_error(self):
        return self.errors[-1]

    def passed(self, tol) -> bool:
        return self.monotone and self.final_error < tol


@dataclass
class ConvergenceReport:
    variant: str
    level: str
    rows: list
    tol: Any
    params: dict
    comparisons: list = dc_field(default_factory=list)  # (label, value, target, error)
    diagnostics: list = dc_field(default_factory=list)  # ReportRow, not part of the verdict

    def __post_init__(self):
        self.rows.sort(key=lambda r: (r.basis, r.qdeg, r.logdeg))

    @property
    def verdict(self) -> bool:
        rows_ok = all(r.passed(self.tol) for r in self.rows)
        comps_ok = all(c[3] < self.tol for c in self.comparisons)
        return rows_ok and comps_ok

    def failing(self) -> list:
        return [r for r in self.rows if not r.passed(self.tol)]


def _error(field: NumericField, value, target, relative: bool):
    diff = abs(value - target)
    if relative and target != 0:
        return diff / abs(target)
    return diff


def _row(field, basis, qdeg, logdeg, values, target, relative=True) -> ReportRow:
    tgt = field(target)
    errs = [_error(field, v, tgt, relative) for _, v in values]
    return ReportRow(basis, qdeg, logdeg, values, target, errs, decreasing(errs, field.tolerance))


def _sorted_ts(t_list) -> list:
    ts = sorted(t_list, key=lambda t: -float(Fraction(t) if isinstance(t, str) else t))
    if len(ts) < 2:
        raise ValueError("at least two values of t are needed")
    return ts


def _q_of(q0, t, field):
    return principal_power(field(q0), field(t), field)


# ---------------------------------------------------------------------------
# equivariant


@dataclass(frozen=True)
class TransformedSolution:
    variant: str
    N: int
    D: int
    q: Any
    z: Any
    entries: tuple  # rows delta**l, columns i
    params: dict

    def column(self, i: int) -> tuple:
        return tuple(r[i] for r in self.entries)


def _one_minus_q_power(a, logq, ctx):
    """``1 - q**a`` without cancellation for ``q`` near 1."""
    return -ctx.expm1(a * logq)


def transformed_eq_series(N: int, D: int, q, z, lam: Sequence, field: NumericField) -> list[TruncSeries]:
    """``sum_d (1-q)**(d(N+1)) Q**d / (z**(d(N+1)) prod_j (q Lambda_j / Lambda_i; q)_d)``
    with ``Lambda_i = q**(-lambda_i / z)``."""
    ctx = field.ctx
    q = field(q)
    z = field(z)
    lam = [field(l) for l in lam]
    logq = ctx.log(q)
    scale = (_one_minus_q_power(1, logq, ctx) / z) ** (N + 1)
    out = []
    for i in range(N + 1):
        c = field.one
        coeffs = [c]
        for r in range(1, D + 1):
            fac = field.one
            for j in range(N + 1):
                a = r + (lam[i] - lam[j]) / z
                fac *= _one_minus_q_power(a, logq, ctx)
            if abs(fac) < field.tolerance * abs(scale):
                raise ResonantParameters(f"a q-Pochhammer factor of column {i} vanishes at order {r}")
            c = c * scale / fac
            coeffs.append(c)
        out.append(TruncSeries(field, tuple(coeffs), D))
    return out


def transform_eq(X: FundamentalMatrix) -> TransformedSolution:
    """Trade the markers ``Lambda_i**(-ell_q(c Q))`` for ``Lambda_i**(-ell_q(Q))``.

    Both markers have ``sigma``-eigenvalue ``Lambda_i**-1``, so the bodies
    are rebuilt from the closed form and carried with the same eigenvalue.
    """
    if X.variant != "eq":
        raise ValueError("transform_eq needs an equivariant fundamental matrix")
    lam = X.params.get("lam")
    if lam is None:
        raise ValueError("the transform needs numeric equivariant parameters")
    bodies = transformed_eq_series(X.N, X.D, X.q, X.z, lam, X.field)
    row = [CharacterSeries(b, X.entries[0][i].eigenvalue) for i, b in enumerate(bodies)]
    rows = [tuple(row)]
    for _ in range(X.N):
        row = [delta(f, X.q) for f in row]
        rows.append(tuple(row))
    return TransformedSolution("eq", X.N, X.D, X.q, X.z, tuple(rows),
                               {"lam": tuple(lam), "Lambda": X.params.get("Lambda")})


def pulled_back_operator(variant: str, N: int, q, z, Lam=None, field=None):
    op = make_kth_operator(variant, N, Lam=Lam, q=q, field=field)
    return pullback_op(to_delta_form(op), z, normalize=True)


def transformed_residual(T: TransformedSolution, field: NumericField | None = None):
    """Largest residual coefficient of the pulled back equation on the columns."""
    f0 = T.entries[0][0].field
    if T.variant == "eq":
        op = pulled_back_operator("eq", T.N, T.q, T.z, T.params["Lambda"], f0)
    else:
        op = pulled_back_operator("noneq", T.N, T.q, T.z, None, f0)
    worst = 0
    for col in T.entries[0]:
        res = residual(op, col)
        body = res.body if isinstance(res, CharacterSeries) else res
        series = body.terms if isinstance(body, LogPoly) else (body,)
        for s in series:
            for c in s.coeffs:
                if f0.exact:
                    if c != 0:
                        return float("inf")
                else:
                    worst = max(worst, abs(c))
    return worst


def limit_eq(N: int, D: int, q0, z, lam: Sequence, t_list: Sequence, tol=1e-3,
             field: NumericField | None = None, marker_Q=2) -> tuple[ConvergenceReport, list]:
    """Rows ``(fixed point i, Q**d)`` against ``prod_r prod_j 1/(lambda_i - lambda_j + r z)``.

    Returns the report and the limit in the fixed point basis, one
    :class:`CohClassEq` per degree (values at the smallest ``t``).
    """
    field = field or NumericField()
    zf = Fraction(z) if not isinstance(z, Fraction) else z
    lam_q = [Fraction(l) for l in lam]
    check_coh_nonresonant(zf, lam_q, D)
    ts = _sorted_ts(t_list)
    per_t = []
    residuals = []
    Lams = []
    for t in ts:
        q = _q_of(q0, t, field)
        X = build_fundamental("eq", N, D, z=field(zf), mode="numeric", q=q,
                              lam=[field(l) for l in lam_q], field=field)
        T = transform_eq(X)
        per_t.append([T.entries[0][i].body for i in range(N + 1)])
        residuals.append(transformed_residual(T))
        Lams.append((q, X.params["Lambda"]))
    rows = []
    for i in range(N + 1):
        for d in range(D + 1):
            vals = [(t, s[i].coeff(d)) for t, s in zip(ts, per_t)]
            rows.append(_row(field, f"fixed{i}", d, 0, vals, coh_eq_coefficient(i, d, zf, lam_q)))

    limit = [CohClassEq(N, tuple(per_t[-1][i].coeff(d) for i in range(N + 1)), field) for d in range(D + 1)]
    jcoh = build_jcoh_eq(N, D, zf, lam_q)
    comparisons = []
    for d in range(D + 1):
        image = gamma_eq(KClassEq(N, limit[d].values, field), lam_q)
        for i in range(N + 1):
            tgt = jcoh.series(i).coeff(d)
            comparisons.append((f"gamma_eq fixed{i} Q^{d}", image[i], tgt,
                                _error(field, image[i], field(tgt), True)))
    for i in range(N + 1):
        tgt = jcoh.columns[i].exponent
        comparisons.append((f"gamma_eq fixed{i} exponent", field(lam_q[i] / zf), tgt, 0))

    diagnostics = []
    Qm = field(marker_Q)
    for i in range(N + 1):
        target = principal_power(Qm, field(lam_q[i]) / field(zf), field)
        vals = []
        for t, (q, Lam) in zip(ts, Lams):
            ell = ell_q_eval(q, Qm, field=field)
            vals.append((t, principal_power(Lam[i], -ell, field)))
        diagnostics.append(_row(field, f"marker{i}", 0, 0, vals, target))
    params = {"N": N, "D": D, "q0": q0, "z": zf, "lam": lam_q, "t": ts,
              "max_residual": max(residuals)}
    rep = ConvergenceReport("eq", "solution", rows, tol, params, comparisons, diagnostics)
    return rep, limit


# ---------------------------------------------------------------------------
# non-equivariant


def transform_noneq(X: FundamentalMatrix) -> TransformedSolution:
    """Scale column ``i`` by ``((1 - q) / z)**i``; exact in ``q``."""
    if X.variant != "noneq":
        raise ValueError("transform_noneq needs a non-equivariant fundamental matrix")
    f = X.field
    s = (f.one - X.q) / X.z
    scales = [s**i for i in range(X.N + 1)]
    rows = tuple(tuple(e * scales[i] for i, e in enumerate(r)) for r in X.entries)
    return TransformedSolution("noneq", X.N, X.D, X.q, X.z, rows, {"scales": tuple(scales)})


def inverse_transform_noneq(T: TransformedSolution) -> tuple:
    inv = [T.entries[0][0].field.one / s for s in T.params["scales"]]
    return tuple(tuple(e * inv[i] for i, e in enumerate(r)) for r in T.entries)


def regularized_log_form(col: LogPoly, q) -> list[TruncSeries]:
    """Rewrite ``sum_c A_c L**c`` as ``sum_c B_c Lam**c`` with ``Lam = (q - 1) L``."""
    f = col.field
    h = q - f.one
    out = []
    hp = f.one
    for c, t in enumerate(col.terms):
        out.append(t * (f.one / hp) if c else t)
        hp = hp * h
    return out


def limit_noneq(N: int, D: int, q0, z, t_list: Sequence, tol=1e-3,
                field: NumericField | None = None) -> tuple[ConvergenceReport, list]:
    """Rows ``(H**i, (log Q)**c, Q**d)`` against the cohomological J-function.

    The K-side log symbol is regularized as ``(q - 1) L``, which tends to
    ``log Q``.  The limit is returned as one :class:`CohClassNonEq` per
    ``(c, d)`` pair, keyed in a dict.
    """
    field = field or NumericField()
    zf = Fraction(z)
    if zf == 0:
        raise ValueError("z must be nonzero")
    ts = _sorted_ts(t_list)
    F = q_field()
    X = build_fundamental("noneq", N, D, z=zf, field=F)
    T = transform_noneq(X)
    residual_exact = transformed_residual(T)
    jcoh = build_jcoh_noneq(N, D, zf)
    qs = [_q_of(q0, t, field) for t in ts]
    rows = []
    limits = {}
    for i in range(N + 1):
        reg = regularized_log_form(T.entries[0][i], X.q)
        for c in range(N + 1):
            series = reg[c] if c < len(reg) else None
            for d in range(D + 1):
                coeff = series.coeff(d) if series is not None else F.zero
                coeff = coeff.reduced()
                vals = [(t, ratfunc_eval(coeff, {"q": q}, field) if coeff.num != 0 else field.zero)
                        for t, q in zip(ts, qs)]
                tgt = jcoh.coefficient(d, i, c)
                rows.append(_row(field, f"H{i}", d, c, vals, tgt))
                limits.setdefault((c, d), [field.zero] * (N + 1))[i] = vals[-1][1]
    comparisons = []
    for (c, d), vs in sorted(limits.items()):
        image = gamma_noneq(KClassNonEq(N, tuple(vs), field))
        for i in range(N + 1):
            tgt = jcoh.coefficient(d, i, c)
            comparisons.append((f"gamma H{i} log^{c} Q^{d}", image[i], tgt,
                                _error(field, image[i], field(tgt), True)))
    params = {"N": N, "D": D, "q0": q0, "z": zf, "t": ts, "max_residual": residual_exact}
    rep = ConvergenceReport("noneq", "solution", rows, tol, params, comparisons)
    out = {k: CohClassNonEq(N, tuple(v), field) for k, v in limits.items()}
    return rep, out


# ---------------------------------------------------------------------------
# operator level and full pipeline


def operator_report(variant: str, N: int, q0, z, lam: Sequence | None, t_list: Sequence, tol=1e-3,
                    field: NumericField | None = None) -> ConvergenceReport:
    field = field or NumericField()
    zf = Fraction(z)
    lam_q = [Fraction(l) for l in lam] if lam is not None else None
    fam = kth_operator_family(variant, N, q0, zf, lam_q, field)
    target = make_coh_operator(variant, N, zf, lam_q)
    ts = _sorted_ts(t_list)
    table = formal_limit(fam, target, ts, tol, field)
    rows = [ReportRow(f"delta{r.k}", r.j, 0, r.values, target.coefficient(r.k, r.j), r.errors, r.monotone)
            for r in table.rows]
    params = {"N": N, "q0": q0, "z": zf, "lam": lam_q, "t": ts}
    return ConvergenceReport(variant, "equation", rows, tol, params)


def main_theorem_report(variant: str, N: int, D: int, q0, z, lam: Sequence | None, t_list: Sequence,
                        tol=1e-3, field: NumericField | None = None) -> ConvergenceReport:
    """Build, pull back, transform, take the limit and compare through gamma.

    Raises :class:`NoConvergence` when the verdict fails.
    """
    if variant == "eq":
        if lam is None or len(lam) != N + 1:
            raise ValueError("the equivariant pipeline needs N + 1 values lambda_i")
        check_coh_nonresonant(Fraction(z), [Fraction(l) for l in lam], D)
        rep, _ = limit_eq(N, D, q0, z, lam, t_list, tol, field)
    elif variant == "noneq":
        rep, _ = limit_noneq(N, D, q0, z, t_list, tol, field)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return rep


def require(rep: ConvergenceReport) -> ConvergenceReport:
    if not rep.verdict:
        bad = rep.failing()
        where = ", ".join(f"{r.basis} Q^{r.qdeg} log^{r.logdeg}" for r in bad[:5]) or "gamma comparison"
        raise NoConvergence(f"no convergence at {where}")
    return rep
