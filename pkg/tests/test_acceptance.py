"""End-to-end acceptance checks.

Each test prints one line ``[k] PASS|FAIL ...`` with the measured quantity,
the tolerance and the runtime against its budget.  Run with

    pytest tests/test_acceptance.py -v
"""

import cmath
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from oracles import coh_eq_coefficient as coh_eq_oracle
from oracles import coh_noneq_coefficients
from qconf.confluence import limit_eq, limit_noneq, operator_report
from qconf.errors import NearThetaZero, NoConvergence
from qconf.jfun import build_jcoh_eq, build_jcoh_noneq, build_jk_eq, build_jk_noneq
from qconf.qop import companion, kth_operator_family, make_coh_operator, make_kth_operator, residual, residual_is_zero
from qconf.qseries import TruncSeries, delta_q, sigma_shift
from qconf.qsystems import QSystem, sauloy_confluence_check
from qconf.rings import (
    CohClassEq,
    KClassEq,
    KClassNonEq,
    equivariant_field,
    equivariant_parameters,
    eta_polynomial,
    gamma_eq,
    gamma_eq_inverse,
    gamma_noneq,
    gamma_noneq_inverse,
)
from qconf.scalars import QQ_FIELD, NumericField, RatFuncField, principal_power
from qconf.specfun import e_q_char, ell_q_eval, q_log_limit_check, theta_eval

CC = NumericField()
Q0 = Fraction(1, 2)
T_DECADES = [Fraction(1, 10**k) for k in range(1, 5)]


class Line:
    ok = True
    detail = ""


@contextmanager
def criterion(capsys, k: int, name: str, budget: float):
    line = Line()
    start = time.perf_counter()
    try:
        yield line
    except Exception as exc:
        line.ok = False
        line.detail = f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - start
    within = elapsed < budget
    verdict = "PASS" if line.ok and within else "FAIL"
    with capsys.disabled():
        print(f"\n[{k}] {verdict} {name}: {line.detail} ({elapsed:.2f} s, budget {budget:g} s)")
    assert line.ok, line.detail
    assert within, f"runtime {elapsed:.2f} s exceeds {budget} s"


def test_1_noneq_q_difference_annihilation(capsys):
    with criterion(capsys, 1, "non-equivariant qde residual, N=1..3, D=8", 30) as c:
        zero = []
        for N in (1, 2, 3):
            J = build_jk_noneq(N, 8)
            op = make_kth_operator("noneq", N, field=J.field)
            zero.append(all(residual_is_zero(residual(op, comp)) for comp in J.components))
        c.ok = all(zero)
        c.detail = f"exact zero for N=1,2,3: {zero} (tolerance: exact)"


def test_2_eq_q_difference_annihilation(capsys):
    with criterion(capsys, 2, "equivariant qde residual, symbolic Lambda, N=1,2, D=6", 60) as c:
        zero = []
        for N in (1, 2):
            J = build_jk_eq(N, 6)
            op = make_kth_operator("eq", N, Lam=J.Lam, field=J.field)
            zero.append(all(residual_is_zero(residual(op, col)) for col in J.columns))
        c.ok = all(zero)
        c.detail = f"every fixed-point column exactly zero: {zero} (tolerance: exact)"


def test_3_ode_annihilation(capsys):
    with criterion(capsys, 3, "cohomological ODE residuals, N<=3, D=8", 10) as c:
        zero = []
        for N in range(4):
            lam = [Fraction(k, 3) + Fraction(k, 7) for k in range(N + 1)]
            Je = build_jcoh_eq(N, 8, 1, lam)
            ope = make_coh_operator("eq", N, 1, lam)
            zero.append(all(residual_is_zero(residual(ope, col)) for col in Je.columns))
            Jn = build_jcoh_noneq(N, 8, 1)
            opn = make_coh_operator("noneq", N, 1)
            zero.append(all(residual_is_zero(residual(opn, comp)) for comp in Jn.components))
        c.ok = all(zero)
        c.detail = f"{sum(zero)}/{len(zero)} exact zero residuals (tolerance: exact)"


def _rand_complex(rng, lo, hi):
    return rng.uniform(lo, hi) * cmath.exp(1j * rng.uniform(-3.1, 3.1))


def test_4_special_function_equations(capsys):
    with criterion(capsys, 4, "theta, ell, e functional equations on 20 random points each", 5) as c:
        rng = random.Random(20240601)
        th, el, ch = [], [], []
        while len(th) < 20:
            q, Q = CC(_rand_complex(rng, 0.1, 0.7)), CC(_rand_complex(rng, 0.5, 2.0))
            th.append(abs(Q * theta_eval(q, q * Q, field=CC) - theta_eval(q, Q, field=CC)))
        while len(el) < 20:
            q, Q = CC(_rand_complex(rng, 0.1, 0.7)), CC(_rand_complex(rng, 0.5, 2.0))
            try:
                el.append(abs(ell_q_eval(q, q * Q, field=CC) - ell_q_eval(q, Q, field=CC) - 1))
            except NearThetaZero:
                continue
        while len(ch) < 20:
            q, Q = CC(_rand_complex(rng, 0.1, 0.7)), CC(_rand_complex(rng, 0.5, 2.0))
            lam = CC(_rand_complex(rng, 0.5, 2.0))
            try:
                ch.append(abs(e_q_char(q, lam, q * Q, CC) - lam * e_q_char(q, lam, Q, CC)))
            except NearThetaZero:
                continue
        c.ok = max(th) < 1e-12 and max(el) < 1e-10 and max(ch) < 1e-10
        c.detail = (f"max residuals theta {float(max(th)):.1e} (< 1e-12), ell {float(max(el)):.1e} (< 1e-10), "
                    f"e {float(max(ch)):.1e} (< 1e-10)")


def test_5_q_log_confluence(capsys):
    with criterion(capsys, 5, "(q^t - 1) ell_{q^t}(Q) -> Log Q, t = 2^-1..2^-12", 5) as c:
        ts = [Fraction(1, 2**k) for k in range(1, 13)]
        finals, mono = [], []
        for Q in (2, 1 + 1j, 0.3):
            errs = [e for _, e in q_log_limit_check(Q0, Q, ts, CC)]
            mono.append(all(b < a for a, b in zip(errs, errs[1:])))
            finals.append(float(errs[-1]))
        c.ok = all(mono) and max(finals) < 1e-3
        c.detail = f"strictly decreasing {mono}, final errors {[f'{e:.2e}' for e in finals]} (< 1e-3)"


def test_6_operator_confluence(capsys):
    with criterion(capsys, 6, "pulled back delta-form coefficients -> ODE coefficients", 60) as c:
        cases = [("noneq", 2, None), ("eq", 1, [0, Fraction(1, 3)]),
                 ("eq", 2, [0, Fraction(1, 3), Fraction(2, 3) + Fraction(1, 7)])]
        worst, oks = 0.0, []
        for variant, N, lam in cases:
            rep = operator_report(variant, N, Q0, 1, lam, T_DECADES, 1e-3, CC)
            oks.append(rep.verdict)
            worst = max(worst, max(float(r.final_error) for r in rep.rows))
        c.ok = all(oks)
        c.detail = f"verdicts {oks}, worst error at t=1e-4 {worst:.2e} (< 1e-3, decreasing over 1e-1..1e-4)"


def test_7_equivariant_solution_confluence(capsys):
    with criterion(capsys, 7, "equivariant solution limit, N=1, lambda=(0,1/3), D=3", 120) as c:
        lam = [Fraction(0), Fraction(1, 3)]
        rep, limit = limit_eq(1, 3, Q0, 1, lam, T_DECADES, 1e-3, CC)
        targets_ok = all(r.target == coh_eq_oracle(int(r.basis[5:]), r.qdeg, lam) for r in rep.rows)
        spot = next(r for r in rep.rows if r.basis == "fixed0" and r.qdeg == 1)
        worst = max(float(r.final_error) for r in rep.rows)
        gamma_worst = max(float(e) for *_, e in rep.comparisons)
        c.ok = rep.verdict and targets_ok and spot.target == Fraction(3, 2) and gamma_worst < 1e-3
        c.detail = (f"worst relative error {worst:.2e}, (0,1) -> {float(spot.values[-1][1].real):.6f} vs 3/2, "
                    f"gamma_eq comparison {gamma_worst:.2e} (< 1e-3)")


def test_8_noneq_solution_confluence(capsys):
    with criterion(capsys, 8, "non-equivariant solution limit, P^2, D=3", 120) as c:
        rep, limits = limit_noneq(2, 3, Q0, 1, T_DECADES, 1e-3, CC)
        tg = {(r.basis, r.qdeg, r.logdeg): r.target for r in rep.rows}
        d1 = [tg[(f"H{i}", 1, 0)] for i in range(3)]
        d2 = [tg[(f"H{i}", 2, 0)] for i in range(3)]
        displayed = d1 == [1, -3, 6] and d2 == [Fraction(1, 8), Fraction(-9, 16), Fraction(3, 2)]
        oracle = all(
            [tg[(f"H{i}", d, 0)] for i in range(3)] == coh_noneq_coefficients(2, d) for d in range(4)
        )
        worst = max(float(r.final_error) for r in rep.rows)
        gamma_worst = max(float(e) for *_, e in rep.comparisons)
        c.ok = rep.verdict and displayed and oracle and gamma_worst < 1e-3
        c.detail = (f"d=1 targets {[str(x) for x in d1]}, d=2 targets {[str(x) for x in d2]}, "
                    f"worst relative error {worst:.2e}, gamma comparison {gamma_worst:.2e} (< 1e-3)")


def test_9_sauloy_suite(capsys):
    with criterion(capsys, 9, "confluence conditions on the N=1 companion family", 30) as c:
        lam = [0, Fraction(1, 3)]
        ops = kth_operator_family("eq", 1, Q0, 1, lam, CC)
        limit = companion(make_coh_operator("eq", 1, 1, lam))
        rep = sauloy_confluence_check(
            lambda t: companion(ops(t)), Q0, T_DECADES, [CC(0.5), CC(2), CC(1 + 1j)],
            target=lambda Q: limit.evaluate(Q, CC), tol=1e-3, field=CC,
        )

        def divergent(t):
            qt = principal_power(CC(Q0), CC(t), CC)
            return QSystem.from_entries(CC, qt, [[1 + 1 / (qt - 1)]])

        try:
            sauloy_confluence_check(divergent, Q0, T_DECADES, [CC(1)], field=CC)
            control = "converged (unexpected)"
        except NoConvergence:
            control = "NoConvergence"
        conds = {k: rep.conditions[k] for k in ("ii", "iii", "iv")}
        c.ok = all(conds.values()) and rep.target_error < 1e-3 and control == "NoConvergence"
        c.detail = f"conditions {conds}, |B - ODE companion| {float(rep.target_error):.2e} (< 1e-3), control: {control}"


def test_10_consistency(capsys):
    with criterion(capsys, 10, "partition of unity, gamma laws, delta Leibniz, g_b vs direct", 30) as c:
        rng = random.Random(7)
        frac = lambda: Fraction(rng.randint(-9, 9), rng.randint(1, 6))  # noqa: E731
        unity = []
        for N in range(5):
            F = equivariant_field(N, extra=())
            Lam = equivariant_parameters(F, N)
            tot = [F.zero] * (N + 1)
            for i in range(N + 1):
                for k, v in enumerate(eta_polynomial(i, Lam)):
                    tot[k] = tot[k] + v
            unity.append(tot[0] == 1 and all(v == 0 for v in tot[1:]))
        laws = []
        for _ in range(50):
            N = rng.randint(0, 4)
            a = KClassNonEq(N, tuple(frac() for _ in range(N + 1)), QQ_FIELD)
            b = KClassNonEq(N, tuple(frac() for _ in range(N + 1)), QQ_FIELD)
            x = KClassEq(N, tuple(frac() for _ in range(N + 1)), QQ_FIELD)
            y = KClassEq(N, tuple(frac() for _ in range(N + 1)), QQ_FIELD)
            laws.append(
                gamma_noneq(a * b) == gamma_noneq(a) * gamma_noneq(b)
                and gamma_noneq(a + b) == gamma_noneq(a) + gamma_noneq(b)
                and gamma_noneq_inverse(gamma_noneq(a)) == a
                and gamma_eq(x * y) == gamma_eq(x) * gamma_eq(y)
                and gamma_eq(x + y) == gamma_eq(x) + gamma_eq(y)
                and gamma_eq(KClassEq.unit(N)) == CohClassEq.unit(N)
                and gamma_eq_inverse(gamma_eq(x)) == x
            )
        Fq = RatFuncField(("q",))
        q = Fq.gen("q")
        leib = []
        for _ in range(20):
            a = TruncSeries(Fq, tuple(Fq(frac()) for _ in range(7)), 6)
            b = TruncSeries(Fq, tuple(Fq(frac()) for _ in range(7)), 6)
            leib.append(delta_q(a * b, q) == delta_q(a, q) * sigma_shift(b, q) + a * delta_q(b, q))
        routes = [
            build_jcoh_noneq(N, D, 1, route="g_b").components == build_jcoh_noneq(N, D, 1, route="direct").components
            for N in range(4) for D in range(7)
        ]
        c.ok = all(unity) and all(laws) and all(leib) and all(routes)
        c.detail = (f"unity N<=4 {sum(unity)}/5, gamma laws {sum(laws)}/50, Leibniz {sum(leib)}/20, "
                    f"g_b vs direct {sum(routes)}/{len(routes)} (all exact)")
