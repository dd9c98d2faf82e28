"""q-Pochhammer symbols, Jacobi theta, the q-logarithm and q-characters.

Numeric evaluation of theta sums is cancellation aware.  For q close to 1
and Q off the positive real axis the individual terms of
``sum q**(d(d-1)/2) Q**d`` exceed the sum by thousands of bits, so the sums
are recomputed at a working precision raised by the observed cancellation
until the requested precision survives.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, log as _ln, factorial
from typing import Any, NamedTuple, Sequence

from .errors import ModulusQNotLessThanOne, NearThetaZero, SpiralCut, WindowTooSmall
from .qseries import LogPoly
from .scalars import QQ_FIELD, NumericField, principal_power

_LN2 = _ln(2.0)
# relative guard distance to the zero set -q^Z of theta
ZERO_GUARD = 1e-3


def qpochhammer(x, q, d: int, one=1):
    """``(x; q)_d = prod_{r<d} (1 - q**r x)``, generic over the scalar type."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    out = one
    qr = one
    for _ in range(d):
        out = out * (1 - qr * x)
        qr = qr * q
    return out


class PochhammerValue(NamedTuple):
    value: Any
    error_bound: Any
    factors: int


def qpochhammer_inf(x, q, tol=None, field: NumericField | None = None) -> PochhammerValue:
    """``(x; q)_inf`` with a certified bound on the discarded tail.

    Factors are multiplied while ``|q**r x| >= tol``.  With
    ``s = sum_{r>=R} |q|**r |x| = |q**R x| / (1 - |q|)`` the tail product
    differs from 1 by at most ``exp(s) - 1``.
    """
    field = field or NumericField()
    ctx = field.ctx
    x, q = field(x), field(q)
    if abs(q) >= 1:
        raise ModulusQNotLessThanOne(f"|q| = {ctx.nstr(abs(q), 8)} is not < 1")
    tol = field.eps if tol is None else ctx.mpf(tol)
    value = field.one
    qr_x = x
    r = 0
    while abs(qr_x) >= tol:
        value *= 1 - qr_x
        qr_x *= q
        r += 1
        if r > 10**7:
            raise WindowTooSmall("q-Pochhammer product does not settle")
    s = abs(qr_x) / (1 - abs(q))
    bound = abs(value) * ctx.expm1(s)
    return PochhammerValue(value, bound, r)


# ---------------------------------------------------------------------------
# theta


@dataclass(frozen=True)
class ThetaWindow:
    """Coefficients ``q**(d(d-1)/2)`` of theta for ``|d| <= M``."""

    q: Any
    M: int
    coefficients: dict

    def evaluate(self, Q):
        return sum(c * Q**d for d, c in self.coefficients.items())


def theta_window(q, M: int, one=1) -> ThetaWindow:
    coeffs = {}
    for d in range(-M, M + 1):
        e = d * (d - 1) // 2
        coeffs[d] = one * q**e if e else one * 1
    return ThetaWindow(q, M, coeffs)


def _window(lq, lQ, drop: float) -> tuple[int, int, float]:
    """Degree range where ``log|t_d|`` is within ``drop`` of its maximum."""
    a = float(lq.real) / 2.0  # < 0
    b = float(lQ.real) - a
    dstar = -b / (2 * a)
    fmax = a * dstar * dstar + b * dstar
    half = (drop / -a) ** 0.5
    return floor(dstar - half) - 1, ceil(dstar + half) + 1, fmax


def _sums(ctx, q, Q, lo: int, hi: int):
    """``(sum t_d, sum d t_d, sum |t_d|)`` over ``lo <= d <= hi``."""
    lq = ctx.log(q)
    lQ = ctx.log(Q)
    t = ctx.exp((lo * (lo - 1) // 2) * lq + lo * lQ)
    ratio = ctx.exp(lo * lq + lQ)  # t_{d+1} / t_d = q**d Q
    s0 = ctx.mpc(0)
    s1 = ctx.mpc(0)
    sabs = ctx.mpf(0)
    for d in range(lo, hi + 1):
        s0 += t
        s1 += d * t
        sabs += abs(t) * (1 + abs(d))
        t *= ratio
        ratio *= q
    return s0, s1, sabs


class _ThetaSums(NamedTuple):
    s0: Any
    s1: Any
    M: int
    prec: int


def _theta_sums(q, Q, field: NumericField, M: int | None, tol) -> _ThetaSums:
    ctx = field.ctx
    if not 0 < abs(q) < 1:
        raise ModulusQNotLessThanOne("theta needs 0 < |q| < 1")
    if Q == 0:
        raise ValueError("theta is evaluated at Q != 0")
    target = field.bits
    if M is not None:
        lo, hi = -M, M
        extra = 32
        for _ in range(8):
            with ctx.workprec(target + extra):
                s0, s1, sabs = _sums(ctx, ctx.mpc(q), ctx.mpc(Q), lo, hi)
                bound = abs(q) ** (M * (M - 1) // 2) * max(abs(Q), 1 / abs(Q)) ** M
                lost = _lost_bits(ctx, s0, sabs)
            if lost + 16 < extra:
                break
            extra = int(lost) + 48
        scale = max(ctx.mpf(1), abs(s0))
        if bound * (2 * M + 1) > tol * scale:
            raise WindowTooSmall(f"window M={M} leaves a tail bound {ctx.nstr(bound, 5)}")
        return _ThetaSums(s0, s1, M, target + extra)

    extra = 32
    for _ in range(16):
        prec = target + extra
        with ctx.workprec(prec):
            qq, QQ_ = ctx.mpc(q), ctx.mpc(Q)
            lo, hi, _ = _window(ctx.log(qq), ctx.log(QQ_), (prec + 16) * _LN2)
            n_terms = hi - lo + 1
            with ctx.extraprec(int(_ln(n_terms + 1) / _LN2) + 8):
                s0, s1, sabs = _sums(ctx, qq, QQ_, lo, hi)
            lost = _lost_bits(ctx, s0, sabs)
        if lost + 24 < extra:
            M = max(-lo, hi)
            return _ThetaSums(s0, s1, M, prec)
        if lost + 48 > prec:
            # the estimate is saturated: the sum is pure rounding noise
            extra = 2 * prec
        else:
            extra = int(lost) + 64
    raise WindowTooSmall("theta evaluation did not stabilise")


def _lost_bits(ctx, s, sabs) -> float:
    if s == 0:
        return float("inf")
    return max(0.0, float(ctx.log(sabs / abs(s), 2)))


def _auto_tol(field: NumericField, tol):
    return field.ctx.ldexp(field.ctx.mpf(1), -field.bits) if tol is None else field.ctx.mpf(tol)


def theta_eval(q, Q, M: int | None = None, field: NumericField | None = None, tol=None):
    """``theta_q(Q) = sum_{d in Z} q**(d(d-1)/2) Q**d``.

    With ``M`` given the window ``[-M, M]`` is used as is and
    :class:`WindowTooSmall` is raised when the tail bound
    ``|q|**(M(M-1)/2) max(|Q|, 1/|Q|)**M`` is not below ``tol`` (relative
    to ``max(1, |theta|)``).  Without ``M`` the window is chosen adaptively.
    """
    field = field or NumericField()
    r = _theta_sums(field(q), field(Q), field, M, _auto_tol(field, tol))
    return +r.s0


def _check_off_zero_set(q, Q, field: NumericField):
    ctx = field.ctx
    aq = abs(q)
    kstar = float(ctx.log(abs(Q)) / ctx.log(aq))
    spread = 2 + int(ceil(_ln(1 + 4 * ZERO_GUARD) / -float(ctx.log(aq))))
    for k in range(floor(kstar) - spread, ceil(kstar) + spread + 1):
        if abs(Q + q**k) < ZERO_GUARD * abs(Q):
            raise NearThetaZero(f"Q is within the guard distance of -q^{k}, a zero of theta")


def ell_q_eval(q, Q, M: int | None = None, field: NumericField | None = None, tol=None):
    """The q-logarithm ``-Q theta'(Q) / theta(Q)`` as a ratio of two sums
    over one shared window."""
    field = field or NumericField()
    q, Q = field(q), field(Q)
    _check_off_zero_set(q, Q, field)
    r = _theta_sums(q, Q, field, M, _auto_tol(field, tol))
    ctx = field.ctx
    with ctx.workprec(r.prec):
        val = -r.s1 / r.s0
    return +val


def e_q_char(q, lam, Q, field: NumericField | None = None):
    """The q-character ``theta_q(Q) / theta_q(lam Q)``."""
    field = field or NumericField()
    q, lam, Q = field(q), field(lam), field(Q)
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    _check_off_zero_set(q, Q, field)
    _check_off_zero_set(q, lam * Q, field)
    tol = _auto_tol(field, None)
    a = _theta_sums(q, Q, field, None, tol)
    b = _theta_sums(q, lam * Q, field, None, tol)
    with field.ctx.workprec(max(a.prec, b.prec)):
        val = a.s0 / b.s0
    return +val


def on_spiral(q0, Q, field: NumericField, rtol=None) -> bool:
    """Whether ``Q`` lies on the q-spiral ``(-1) q0**R``."""
    ctx = field.ctx
    q0, Q = field(q0), field(Q)
    rtol = field.tolerance if rtol is None else rtol
    lq = ctx.log(q0)
    lm = ctx.log(-Q)
    kmax = 2 + int(abs(lm) + abs(lq))
    for k in range(-kmax, kmax + 1):
        v = (lm - 2j * ctx.pi * k) / lq
        if abs(v.imag) <= rtol * (1 + abs(v)):
            return True
    return False


def q_log_limit_check(q0, Q, t_list: Sequence, field: NumericField | None = None) -> list[tuple[Any, Any]]:
    """``[(t, |(q0**t - 1) ell_{q0**t}(Q) - Log Q|), ...]``."""
    field = field or NumericField()
    ctx = field.ctx
    q0, Q = field(q0), field(Q)
    if on_spiral(q0, Q, field):
        raise SpiralCut("Q lies on the cut (-1) q0^R")
    target = ctx.log(Q)
    out = []
    for t in t_list:
        q = principal_power(q0, field(t), field)
        val = (q - 1) * ell_q_eval(q, Q, field=field)
        out.append((t, abs(val - target)))
    return out


# ---------------------------------------------------------------------------
# binomials in the log symbol


def log_binomial_coeffs(k: int) -> tuple[Fraction, ...]:
    """Coefficients of ``L(L-1)...(L-k+1) / k!`` in increasing powers of L."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    poly = [Fraction(1)]
    for r in range(k):
        nxt = [Fraction(0)] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i + 1] += c
            nxt[i] -= r * c
        poly = nxt
    kf = factorial(k)
    return tuple(c / kf for c in poly)


def log_binomial(k: int, field=QQ_FIELD, order: int = 0) -> LogPoly:
    """``binom(L, k)`` as a LogPoly with constant coefficient series."""
    return LogPoly.from_scalars(field, log_binomial_coeffs(k), order)


def eval_log_binomial(k: int, value):
    return sum(c * value**a for a, c in enumerate(log_binomial_coeffs(k)))
