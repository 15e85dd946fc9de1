from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from xops.diffop import sl_form
from xops.exactalg import Poly, QuasiRational, RatFun, hermite, jacobi, laguerre
from xops.families import (InadmissibleParameters, LimitParameter, _jacobi_e11_12_op,
                           _jacobi_e2a_12_op, admissible, chain_operator_offset, generate, get,
                           intertwine_check, jacobi_e11_12_regular_pairs,
                           jacobi_e2a_12_regular_roots, nonexistence_certificates, registry,
                           weight_defects, weight_matches_sl_form)
from xops.flags import canonical_flag, degree_regular_basis, class_operator
from xops.verify import QuadratureConfig, weighted_gram

X = Poly.x()
X2 = [s for s in registry() if s.kind == "x2"]


def proportional(p: Poly, q: Poly) -> bool:
    return p.degree == q.degree and p * q.lead == q * p.lead


def test_registry_shape():
    ids = [s.id for s in registry()]
    assert len(ids) == len(set(ids)) == 17
    assert len(X2) == 12
    assert [s.id for s in registry() if s.kind == "classical"] == ["hermite", "laguerre", "jacobi"]
    assert all(s.codimension == 0 for s in registry() if s.kind == "classical")
    assert all(s.codimension == 2 for s in X2)


@pytest.mark.parametrize("fid,params,ok", [
    ("laguerre-x2-I", {"alpha": F(2)}, True),
    ("laguerre-x2-II", {"alpha": F(1, 2)}, False),
    ("laguerre-x2-I", {"alpha": F(0)}, False),
    ("jacobi-x2-e2a13", {"a": F(-1)}, False),      # (alpha, beta) = (1/2, -1/2)
    ("jacobi-x2-e11-23", {"alpha": F(1, 2), "beta": F(1)}, False),   # xi vanishes inside
    ("jacobi-x2-e11-03", {"alpha": F(1, 2), "beta": F(1, 2)}, False),  # xi drops degree
    ("laguerre-x2-e11-03", {"alpha": F(5, 2)}, True),
])
def test_admissible(fid, params, ok):
    assert bool(admissible(get(fid), params)) is ok


def test_limit_parameter():
    with pytest.raises(LimitParameter):
        get("jacobi-x2-e11-13").data({"alpha": F(2), "beta": F(0)})
    with pytest.raises(InadmissibleParameters):
        generate(get("laguerre-x2-I"), {"alpha": F(-1, 2)}, 4)


def test_generate_examples():
    lag = generate(get("laguerre-x2-e2a13"), {}, 3)
    assert lag.items[0][:2] == (1, Poly((F(15, 4), 1)))
    a, b = F(1, 3), F(5, 2)
    jac = generate(get("jacobi-x2-e11-13"), {"alpha": a, "beta": b}, 1)
    assert proportional(jac.items[0][1], jacobi(1, -a - 2, b))
    her = generate(get("hermite-x2"), {}, 5)
    assert [n for n, _, _ in her.items] == [0, 3, 4, 5]
    assert her.items[0][1] == Poly.const(1)
    # Wronskian oracle: e^{-x^2} W[e^{x^2}(4x^2+2), 1] up to sign is 8x^3 + 12x
    assert proportional(her.items[1][1], Poly((0, 3, 0, 2)))


def test_laguerre_e2a13_weight():
    W = get("laguerre-x2-e2a13").data({}).W
    expected = QuasiRational(RatFun(Poly.const(1), Poly((3, 4)) ** 4)) \
        * QuasiRational.exp(Poly((0, -1))) * QuasiRational.power(0, F(1, 4))
    ratio = W / expected
    assert ratio.is_rational() and ratio.as_ratfun().num.degree == 0


def test_intertwining_values():
    d = get("hermite-x2").data({})
    assert d.A.apply(d.poly(3)) == RatFun(hermite(0) * 12)
    d = get("laguerre-x2-e2a13").data({})
    assert d.A.apply(d.poly(3)) == RatFun(laguerre(0, F(1, 4)) * F(325, 64))
    p = {"alpha": F(7, 3), "beta": F(1, 2)}
    d = get("jacobi-x2-e11-23").data(p)
    assert d.A.apply(d.poly(4)) == RatFun(jacobi(2, F(10, 3), F(-1, 2)) * -15)


@pytest.mark.parametrize("spec", [s for s in registry() if s.kind != "classical"], ids=lambda s: s.id)
def test_family_invariants(spec):
    for params in spec.samples:
        system = generate(spec, params, 12)
        degs = system.degrees()
        assert degs == [n for n, _, _ in system.items]
        assert set(range(13)) - set(degs) == set(spec.gaps)
        lams = [lam for _, _, lam in generate(spec, params, 30, check=False).items]
        assert len(set(lams)) == len(lams)
        assert weight_matches_sl_form(spec, params)
        for n, _, _ in system.items[:6]:
            assert intertwine_check(spec, params, n)


@pytest.mark.parametrize("spec", [s for s in registry() if s.kind != "classical"], ids=lambda s: s.id)
def test_chain_offset_is_constant(spec):
    d = spec.data(spec.samples[0])
    if not d.phis:
        pytest.skip("no chain at this sample")
    assert chain_operator_offset(spec, spec.samples[0]) is not None


@settings(max_examples=15)
@given(st.fractions(min_value=F(1, 40), max_value=12, max_denominator=40))
def test_laguerre_type_one_random(alpha):
    spec = get("laguerre-x2-I")
    system = generate(spec, {"alpha": alpha}, 8)
    assert set(range(9)) - set(system.degrees()) == {0, 1}


@settings(max_examples=15)
@given(st.fractions(min_value=F(-29, 30), max_value=F(29, 30), max_denominator=30))
def test_laguerre_e11_13_random(alpha):
    system = generate(get("laguerre-x2-e11-13"), {"alpha": alpha}, 8)
    assert set(range(9)) - set(system.degrees()) == {0, 2}


def test_certificates_cover_every_cell():
    certs = nonexistence_certificates()
    cells = {(c.base, c.flag_class) for c in certs}
    assert len(cells) == len(certs) == 19
    failing = {(c.base, c.flag_class) for c in certs if not c.holds}
    assert failing == {("jacobi", "E11_12"), ("jacobi", "E2a_12")}


def _gram_offdiag(T, label, s, t, n):
    basis = degree_regular_basis(canonical_flag(label), n)
    # eigenpolynomials from the triangular action on the degree-regular basis
    def coords(y):
        out = [F(0)] * n
        for i in reversed(range(n)):
            if y.degree == basis[i].degree:
                c = y.lead / basis[i].lead
                out[i] = c
                y = y - basis[i] * c
        assert y.is_zero()
        return out
    M = [coords(T.apply(b).as_poly()) for b in basis]
    eig = []
    for k in range(n):
        v = [F(0)] * n
        v[k] = F(1)
        for i in reversed(range(k)):
            v[i] = sum(M[j][i] * v[j] for j in range(i + 1, k + 1)) / (M[k][k] - M[i][i])
        y = sum((basis[i] * v[i] for i in range(k + 1)), Poly())
        assert T.apply(y) == RatFun(y * M[k][k])
        eig.append(y.compose(Poly((t, s))))
    W = sl_form(T.change_variable(s, t), (-1, 1)).W
    gram, _ = weighted_gram(W, eig, (-1, 1), QuadratureConfig(decimal_digits=40))
    with mpmath.workdps(50):
        return max(abs(gram[i][j]) / mpmath.sqrt(gram[i][i] * gram[j][j])
                   for i in range(n) for j in range(n) if i != j), min(gram[i][i] for i in range(n))


def test_jacobi_e11_12_counterexample():
    # both roots of p in (0, 1): the weight is regular and the flag carries an OPS
    assert (F(1, 4), F(3, 4)) in jacobi_e11_12_regular_pairs()
    z1, z2 = F(1, 4), F(3, 4)
    T = class_operator("E11_12", (), c0=1, c1=(1 - 1 / z1) * (1 - 1 / z2),
                         q0=2 - 1 / z1 - 1 / z2 + 2 / (z1 * z2))
    assert not weight_defects(sl_form(_jacobi_e11_12_op(z1, z2), (-1, 1)).W, (-1, 1))
    off, low = _gram_offdiag(T, "E11_12", (z1 - z2) / 2, (z1 + z2) / 2, 5)
    assert off < mpmath.mpf(10) ** -25 and low > 0


def test_jacobi_e2a_12_counterexample():
    z1 = F(-7, 8)
    z2 = -z1 / (2 * z1 + 1)
    assert z1 in jacobi_e2a_12_regular_roots((z1,))
    W = sl_form(_jacobi_e2a_12_op(z1), (-1, 1)).W
    # endpoint exponents 1 + 3 z/2
    assert W.order_at(1) == 1 + 3 * z1 / 2 and W.order_at(-1) == 1 + 3 * z2 / 2
    T = class_operator("E2a_12", (), c=1, p0=1 / (z1 * z2))
    off, low = _gram_offdiag(T, "E2a_12", (z1 - z2) / 2, (z1 + z2) / 2, 5)
    assert off < mpmath.mpf(10) ** -25 and low > 0
