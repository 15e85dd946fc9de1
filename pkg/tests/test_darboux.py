from fractions import Fraction as F

import mpmath
import pytest

from xops.darboux import (NotAnEigenfunction, adjoint_relation_residual, build_chain,
                          check_intertwiner, dual_data, eigenvalue_of, is_classical,
                          explicit_intertwiners, partner, step_count)
from xops.diffop import sl_form
from xops.exactalg import ClassicalParams, Poly, QuasiRational, quasi_eigenfunction
from xops.families import get, hermite_op, laguerre_op, registry

INF = float("inf")
TOL = mpmath.mpf(10) ** -30


def test_partner_identities_hermite():
    phi, lam = quasi_eigenfunction(ClassicalParams.hermite(), 2, 2)
    fact = partner(hermite_op(), phi)
    assert fact.lam0 == lam
    assert fact.identities_hold()
    assert fact.A.apply_quasi(phi).is_zero()


def test_eigenvalue_rejects_non_eigenfunction():
    with pytest.raises(NotAnEigenfunction):
        eigenvalue_of(hermite_op(), QuasiRational(Poly((1, 1, 1))))


def test_dual_weight_identity():
    T = laguerre_op(F(3, 2))
    phi, _ = quasi_eigenfunction(ClassicalParams.laguerre(F(3, 2)), 3, 1)
    fact = partner(T, phi)
    W = sl_form(T, (0, INF)).W
    What, phihat = dual_data(fact, W)
    assert What / QuasiRational(fact.bhat) == W / QuasiRational(fact.b)
    assert fact.That.apply_quasi(phihat) == phihat * QuasiRational(fact.lam0)


CASES = [
    ("x1", dict(a=F(2, 3))),
    ("e11-23", dict(a0=F(1, 3), a1=F(5, 7))),
    ("e11-13", dict(a0=F(2, 5))),
    ("e11-03", {}),
    ("e11-12", {}),
    ("e2b", dict(a=F(1), sign=1)),
    ("e2c", dict(a=F(5, 2))),
    ("e2a", dict(a01=F(1), a23=F(2, 3))),
    ("e2a", dict(a01=F(0), a23=F(1))),
]


@pytest.mark.parametrize("case,params", CASES)
def test_explicit_intertwiners(case, params):
    res = check_intertwiner(explicit_intertwiners(case, **params), depth=8)
    assert all(res.values()), res


def test_e11_13_kernel_element():
    a0 = F(2, 5)
    it = explicit_intertwiners("e11-13", a0=a0)
    assert it.A.apply(Poly((1, a0))).is_zero()


def test_e2c_half_coefficient_variant_fails():
    # the coefficient (a - 1)/2 on y' does not intertwine; see the ledger
    res = check_intertwiner(explicit_intertwiners("e2c", a=F(5, 2), half_coefficient=True), depth=8)
    assert not all(res.values())


def test_e11_23_degenerate_moduli():
    # a0 a1 + a1 - a0 = 0
    with pytest.raises(ValueError):
        explicit_intertwiners("e11-23", a0=F(1), a1=F(1, 2))


def test_step_counts():
    assert step_count("E11_23") == 1 and step_count("E11_03") == 1
    assert step_count("E11_13") == 2 and step_count("E2a_13") == 2 and step_count("E2a_03") == 2


KINDS = {
    "hermite-x2": ["state-adding"], "laguerre-x2-I": ["isospectral"],
    "laguerre-x2-e11-13": ["isospectral", "state-adding"], "laguerre-x2-e2a13": ["state-adding", "isospectral"],
    "laguerre-x1": ["isospectral"], "jacobi-x2-e11-03": ["state-adding"],
}


@pytest.mark.parametrize("spec", [s for s in registry() if s.kind != "classical"], ids=lambda s: s.id)
def test_chains(spec):
    params = spec.samples[0]
    chain = build_chain(spec, params)
    assert len(chain.steps) == spec.steps
    assert is_classical(chain.initial)
    for s in chain.steps:
        assert s.fact.identities_hold()
        assert s.dual_identity_holds()
        assert s.pattern_holds(depth=6)
    if spec.id in KINDS:
        assert [s.kind for s in chain.steps] == KINDS[spec.id]
    d = spec.data(params)
    A = chain.composed_A
    assert A == d.B


def test_adjoint_relation_residual():
    spec = get("laguerre-x2-I")
    chain = build_chain(spec, {"alpha": F(2)})
    s = chain.steps[-1]
    for f, g in [(s.source_basis[0], s.target_basis[1]), (s.source_basis[2], s.target_basis[3])]:
        r = adjoint_relation_residual(s.fact, f, g, s.W, s.What, chain.interval, 50)
        assert r < TOL
