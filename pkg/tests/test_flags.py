from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from xops.exactalg import Poly
from xops.flags import (X2_LABELS, FlagSpec, canonical_flag, classify_x2_flag, codimension_sequence,
                        d2_space, degree_regular_basis, degree_sequence, e2_constraint,
                        exceptionality_check, invariance_check, membership, class_operator)

rats = st.fractions(min_value=-5, max_value=5, max_denominator=6)
X = Poly.x()

MODULI = {"E11_23": (F(1, 3), F(5, 7)), "E11_13": (F(2, 5),), "E2a_13": (F(2, 3),),
          "E2b_23": (F(3, 4),), "E2c_23": (F(5, 2),)}
CONSTANTS = dict(c=1, c0=F(2, 3), c1=F(-1, 2), q0=F(3, 7), p0=F(1, 5))


def test_e1_flag():
    fl = FlagSpec.e1(F(1, 2))
    basis = degree_regular_basis(fl, 5)
    assert [p.degree for p in basis] == [1, 2, 3, 4, 5]
    assert membership(fl, Poly((2, 1)))          # y'(0) = y(0)/2
    assert not membership(fl, Poly((1, 1)))


def test_degree_sequences():
    assert degree_sequence(canonical_flag("E11_03"), 5) == [0, 3, 4, 5, 6]
    assert degree_sequence(canonical_flag("E11_23", MODULI["E11_23"]), 4) == [2, 3, 4, 5]
    assert max(codimension_sequence(canonical_flag("E2a_13", MODULI["E2a_13"]), 8)) == 2


@pytest.mark.parametrize("label", X2_LABELS)
def test_class_operator_preserves_flag(label):
    flag = canonical_flag(label, MODULI.get(label, ()))
    T = class_operator(label, MODULI.get(label, ()), **CONSTANTS)
    assert invariance_check(T, flag, depth=10)
    assert exceptionality_check(T, flag)


@pytest.mark.parametrize("label", X2_LABELS)
def test_classification_label(label):
    assert classify_x2_flag(canonical_flag(label, MODULI.get(label, ()))).label == label


# a0 = 0 and a0 = -2 degenerate to the E11_03 and E11_12 flags
@given(rats.filter(lambda v: v not in (0, -1, -2)))
def test_e11_13_dimension(a0):
    fl = canonical_flag("E11_13", (a0,))
    assert d2_space(fl).dimension == 3


@given(rats, rats, rats)
def test_e2_constraint_factors(a01, a03, a23):
    c = e2_constraint(a01, a03, a23)
    assert c.value == a03 * (a01 - a23) * (6 * a03 + a01 * a23 * (a01 + a23))
    dim = d2_space(FlagSpec.e2(a01, a03, a23)).dimension
    if c.violated:
        assert dim == 1
    else:
        assert dim >= 2


def test_standard_flag_rejected():
    with pytest.raises(ValueError):
        d2_space(FlagSpec.standard())
