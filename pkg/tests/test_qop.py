from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from qconf.errors import DivergentCoefficient, LeadingCoefficientVanishes, TruncationTooShort
from qconf.jfun import build_jk_noneq, q_field
from qconf.qop import (
    QDiffOp,
    companion,
    elementary_symmetric,
    first_nonzero,
    formal_limit,
    kth_operator_family,
    make_coh_operator,
    make_kth_operator,
    pullback_op,
    residual,
    residual_is_zero,
    to_delta_form,
    to_sigma_form,
)
from qconf.qseries import LogPoly, TruncSeries
from qconf.qsystems import is_regular_singular_witness
from qconf.rings import equivariant_field, equivariant_parameters
from qconf.scalars import NumericField, principal_power

F = q_field()
q = F.gen("q")
CC = NumericField()


def same(a, b) -> bool:
    n = max(a.degree, b.degree)
    m = max(a.q_degree, b.q_degree)
    return all(a.coefficient(k, j) == b.coefficient(k, j) for k in range(n + 1) for j in range(m + 1))


def op(coeffs, form="sigma"):
    return QDiffOp(F, q, tuple(tuple(F(c) for c in row) for row in coeffs), form)


def test_kth_operator_shapes():
    assert same(make_kth_operator("noneq", 1, field=F), op([[1, -1], [-2], [1]]))
    assert same(make_kth_operator("noneq", 0, field=F), op([[1, -1], [-1]]))
    G = equivariant_field(1)
    L0, L1 = equivariant_parameters(G, 1)
    E = make_kth_operator("eq", 1, Lam=(L0, L1), field=G)
    assert E.coefficient(0, 0) == 1 and E.coefficient(0, 1) == -1
    assert E.coefficient(1, 0) == -(L0 + L1)
    assert E.coefficient(2, 0) == L0 * L1


def test_coh_operator_shapes():
    z = Fraction(3, 2)
    C = make_coh_operator("noneq", 2, z)
    assert [C.coefficient(k, 0) for k in range(4)] == [0, 0, 0, z**3]
    assert C.coefficient(0, 1) == -1
    C0 = make_coh_operator("eq", 0, z, [Fraction(2, 5)])
    assert (C0.coefficient(0, 0), C0.coefficient(1, 0), C0.coefficient(0, 1)) == (Fraction(-2, 5), z, -1)
    C1 = make_coh_operator("eq", 1, 1, [0, Fraction(1, 3)])
    assert [C1.coefficient(k, 0) for k in range(3)] == [0, Fraction(-1, 3), 1]


@pytest.mark.parametrize("N", (1, 2, 3))
def test_sigma_coefficients_are_elementary_symmetric(N):
    G = equivariant_field(N, extra=("q",))
    Lam = equivariant_parameters(G, N)
    s, *L = sp.symbols("s " + " ".join(G.names[1:]))
    prod = sp.expand(sp.prod([1 - l * s for l in L]))
    E = make_kth_operator("eq", N, Lam=Lam, field=G)
    e = elementary_symmetric(Lam, G)
    for k in range(N + 2):
        assert E.coefficient(k, 0) == (-1) ** k * e[k]
        want = prod.coeff(s, k)
        got = sp.sympify(str(E.coefficient(k, 0).reduced().num).replace("^", "**"))
        assert sp.expand(got - want) == 0


def test_delta_form_examples():
    one_minus = op([[1], [-1]])
    d = to_delta_form(one_minus)
    assert d.form == "delta"
    assert d.coefficient(0, 0) == 0 and d.coefficient(1, 0) == -(q - 1)
    d2 = to_delta_form(op([[1], [-2], [1]]))
    assert d2.coefficient(2, 0) == (q - 1) ** 2
    assert d2.coefficient(1, 0) == 0 and d2.coefficient(0, 0) == 0


def test_delta_form_equivariant_oracle():
    G = equivariant_field(1)
    L0, L1 = equivariant_parameters(G, 1)
    gq = G.gen("q")
    d = to_delta_form(make_kth_operator("eq", 1, Lam=(L0, L1), field=G))
    # (1 - L0 sigma)(1 - L1 sigma) with sigma = 1 + (q - 1) delta
    h = gq - 1
    assert d.coefficient(0, 0) == (1 - L0) * (1 - L1)
    assert d.coefficient(1, 0) == -h * (L0 + L1 - 2 * L0 * L1)
    assert d.coefficient(2, 0) == L0 * L1 * h**2
    assert d.coefficient(0, 1) == -1


small = st.fractions(min_value=-3, max_value=3, max_denominator=3)


@given(st.lists(st.lists(small, min_size=1, max_size=3), min_size=1, max_size=6))
def test_delta_sigma_round_trip(rows):
    o = op([[F(c) for c in r] for r in rows])
    assert same(to_sigma_form(to_delta_form(o)), o)
    d = QDiffOp(F, q, o.coeffs, "delta")
    assert same(to_delta_form(to_sigma_form(d)), d)


@pytest.mark.parametrize("N", (0, 1, 2, 3))
def test_pullback_examples(N):
    z = Fraction(2)
    minusQ = QDiffOp(F, q, ((F.zero, -F.one),) + tuple((F.zero,) for _ in range(N + 1)), "delta")
    P = pullback_op(minusQ, z, exponent=N + 1)
    assert P.coefficient(0, 1) == -((1 - q) / z) ** (N + 1)
    noneq = pullback_op(to_delta_form(make_kth_operator("noneq", N, field=F)), z, normalize=True)
    target = make_coh_operator("noneq", N, z)
    for k in range(N + 2):
        for j in range(2):
            assert noneq.coefficient(k, j) == target.coefficient(k, j)
    plain = pullback_op(to_delta_form(make_kth_operator("noneq", N, field=F)), z)
    assert plain.coefficient(N + 1, 0) == (1 - q) ** (N + 1)


def test_scalar_building_block_limit():
    prev = None
    for k in range(1, 13):
        qt = principal_power(CC(0.5), CC(2) ** -k, CC)
        v = (1 - principal_power(qt, -Fraction(1, 3), CC)) / (1 - qt)
        err = abs(v + Fraction(1, 3))
        if prev is not None:
            assert err < prev
        prev = err
    assert prev < 1e-3


def test_formal_limit_noneq():
    ts = [Fraction(1, 10**k) for k in range(1, 5)]
    for z in (1, Fraction(3, 2)):
        fam = kth_operator_family("noneq", 2, Fraction(1, 2), z, None, CC)
        table = formal_limit(fam, make_coh_operator("noneq", 2, z), ts, 1e-3, CC)
        assert table.confluent
        assert abs(table.candidate.coefficient(3, 0) - z**3) < 1e-60
        assert abs(table.candidate.coefficient(0, 1) + 1) < 1e-60


@pytest.mark.parametrize("lam", ([0, Fraction(1, 3)], [0, Fraction(1, 3), Fraction(2, 3) + Fraction(1, 7)]))
def test_formal_limit_eq(lam):
    N = len(lam) - 1
    ts = [Fraction(1, 10**k) for k in range(1, 5)]
    fam = kth_operator_family("eq", N, Fraction(1, 2), 1, lam, CC)
    table = formal_limit(fam, make_coh_operator("eq", N, 1, lam), ts, 1e-3, CC)
    assert table.confluent
    assert all(r.monotone and r.final_error < 1e-3 for r in table.rows)


def test_formal_limit_detects_divergence():
    def fam(t):
        qt = principal_power(CC(0.5), CC(t), CC)
        return QDiffOp(CC, qt, ((CC.one / (qt - 1),), (CC.one,)), "delta")

    target = make_coh_operator("noneq", 0)
    with pytest.raises(DivergentCoefficient):
        formal_limit(fam, target, [Fraction(1, 10**k) for k in range(1, 5)], 1e-3, CC)


def test_residual_examples():
    zero = TruncSeries.zero(F, 6)
    assert residual_is_zero(residual(make_kth_operator("noneq", 1, field=F), zero))
    J = build_jk_noneq(1, 8)
    kop = make_kth_operator("noneq", 1, field=F)
    assert all(residual_is_zero(residual(kop, c)) for c in J.components)
    bad = J.components[0] + LogPoly.constant(TruncSeries.monomial(F, 3, 8))
    res = residual(kop, bad)
    assert not residual_is_zero(res)
    assert first_nonzero(res)[1] in (3, 4)
    with pytest.raises(TruncationTooShort):
        residual(kop, TruncSeries.zero(F, 0))


def test_first_order_companion():
    a0, a1 = 3 + q, 2 * q
    A = companion(op([[a0], [a1]]))
    assert A.n == 1
    e = A.A[0][0]
    assert e.num[0] / e.den[0] == -a0 / a1
    with pytest.raises(LeadingCoefficientVanishes):
        companion(op([[0]]))
    with pytest.raises(LeadingCoefficientVanishes):
        companion(QDiffOp(CC, CC(0.5), ((CC.one,), (CC(1e-200),)), "sigma"))


@pytest.mark.parametrize("N", (0, 1, 2, 3))
def test_pulled_back_companions_are_regular_singular(N):
    P = pullback_op(to_delta_form(make_kth_operator("noneq", N, field=F)), 1)
    assert is_regular_singular_witness(companion(P)).witness
    G = equivariant_field(N)
    E = pullback_op(to_delta_form(make_kth_operator("eq", N, Lam=equivariant_parameters(G, N), field=G)), 1)
    assert is_regular_singular_witness(companion(E)).witness
