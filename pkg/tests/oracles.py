"""Reference values computed without touching qconf.

Everything here goes through sympy or plain mpmath so that a bug in the
package cannot leak into the expected values.
"""

from fractions import Fraction

import mpmath
import sympy as sp

H, q, pi, x = sp.symbols("H q pi x")


def to_fraction(e) -> Fraction:
    e = sp.nsimplify(e)
    return Fraction(int(sp.numer(e)), int(sp.denom(e)))


def coh_noneq_coefficients(N: int, d: int, z=1) -> list[Fraction]:
    """Coefficients of H^0..H^N in prod_{r=1}^d (H + r z)^-(N+1)."""
    expr = sp.Integer(1)
    for r in range(1, d + 1):
        expr /= (H + r * sp.Rational(z)) ** (N + 1)
    ser = sp.series(expr, H, 0, N + 1).removeO()
    return [to_fraction(ser.coeff(H, k)) for k in range(N + 1)]


def coh_eq_coefficient(i: int, d: int, lam, z=1) -> Fraction:
    val = sp.Integer(1)
    lam = [sp.Rational(l) for l in lam]
    for r in range(1, d + 1):
        for lj in lam:
            val /= lam[i] - lj + r * sp.Rational(z)
    return to_fraction(val)


def qpochhammer_expr(xe, qe, d: int):
    out = sp.Integer(1)
    for r in range(d):
        out *= 1 - qe**r * xe
    return sp.expand(out)


def kth_noneq_low(N: int, d: int) -> sp.Expr:
    """pi^0 coefficient of the L-free Q^d term: invert prod_r ((1 - q^r) + q^r pi)^(N+1) mod pi."""
    expr = sp.Integer(1)
    for r in range(1, d + 1):
        expr /= ((1 - q**r) + q**r * pi) ** (N + 1)
    return sp.simplify(expr.subs(pi, 0))


def theta_direct(qv, Qv, terms: int = 400, dps: int = 60):
    """Bilateral sum of q^(d(d-1)/2) Q^d with a fixed, generous window."""
    with mpmath.workdps(dps):
        qv, Qv = mpmath.mpmathify(qv), mpmath.mpmathify(Qv)
        return sum(qv ** (d * (d - 1) // 2) * Qv**d for d in range(-terms, terms + 1))


def ell_direct(qv, Qv, terms: int = 400, dps: int = 60):
    """-Q theta'(Q) / theta(Q) from the same bilateral sum."""
    with mpmath.workdps(dps):
        qv, Qv = mpmath.mpmathify(qv), mpmath.mpmathify(Qv)
        num = sum(d * qv ** (d * (d - 1) // 2) * Qv**d for d in range(-terms, terms + 1))
        return -num / theta_direct(qv, Qv, terms, dps)
