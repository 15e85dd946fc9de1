from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, strategies as st

from xops.diffop import (DiffOp, NonQuasiRationalWeight, check_factorization, check_intertwining,
                         first_order, from_action, green_symmetry_residual, laurent_decompose,
                         pole_order, sl_form, wronskian_operator)
from xops.exactalg import Poly, QuasiRational, RatFun, hermite, laguerre
from xops.families import hermite_op, jacobi_op, laguerre_op

INF = float("inf")
X = Poly.x()
rats = st.fractions(min_value=-4, max_value=4, max_denominator=5)
small_polys = st.lists(rats, min_size=0, max_size=3).map(Poly)
ratfuns = st.tuples(small_polys, st.lists(rats, min_size=1, max_size=2).map(lambda c: Poly(c + [1]))) \
    .map(lambda t: RatFun(*t))
ops = st.lists(ratfuns, min_size=1, max_size=3).map(DiffOp)


@given(ops, ops, small_polys)
def test_compose_is_application(S, T, y):
    assert S.compose(T).apply(y) == S.apply(T.apply(y))


@given(ops, ops, ops)
def test_compose_associative(R, S, T):
    assert R.compose(S).compose(T) == R.compose(S.compose(T))


@given(ops, rats.filter(bool), rats, small_polys)
def test_change_variable(T, h, s, y):
    sub = Poly((s, h))
    lhs = T.change_variable(h, s).apply(y.compose(sub))
    assert lhs == T.apply(y).compose(sub)


def test_wronskian_operator_kernel():
    fs = [QuasiRational(1), QuasiRational.exp(Poly((0, 0, 1)))]
    W = wronskian_operator(QuasiRational.exp(Poly((0, 0, -1))), fs)
    for f in fs:
        assert W.apply_quasi(f).is_zero()
    assert W.order == 2


def test_from_action_recovers_operator():
    T = laguerre_op(F(2, 3))
    pairs = [(y, T.apply(y)) for y in (Poly((1,)), X, X * X + 3)]
    assert from_action(pairs) == T


def test_first_order_form():
    A = first_order(RatFun(X), RatFun(Poly.const(1), X))
    assert A.apply(X * X) == RatFun(X * X)  # x(2x - x) = x^2


def test_factorization_hermite():
    # T = y'' - 2x y' = B A with A = y', B = y' - 2x y, lambda0 = -2
    T = hermite_op()
    A = DiffOp.derivative()
    B = DiffOp((RatFun(X * -2), RatFun(Poly.const(1))))
    assert check_factorization(T, A, B, 0)
    That = A.compose(B)
    assert check_intertwining(A, T, That)


@pytest.mark.parametrize("T,interval,expected", [
    (hermite_op(), (-INF, INF), QuasiRational.exp(Poly((0, 0, -1)))),
    (laguerre_op(F(1, 2)), (0, INF), QuasiRational.power(0, F(1, 2)) * QuasiRational.exp(Poly((0, -1)))),
    (jacobi_op(F(1, 3), F(-1, 2)), (-1, 1),
     QuasiRational.power(1, F(1, 3), -1) * QuasiRational.power(-1, F(-1, 2))),
])
def test_sl_form_classical(T, interval, expected):
    sl = sl_form(T, interval)
    ratio = sl.W / expected
    assert ratio.is_rational() and ratio.as_ratfun().num.degree == 0
    assert sl.weight_positive()
    assert sl.P == sl.W * QuasiRational(T.p)


def test_sl_form_rejects_essential_singularity():
    T = DiffOp.from_pqr(RatFun(X * X), RatFun(Poly.const(1)))
    with pytest.raises(NonQuasiRationalWeight):
        sl_form(T, (0, INF))


def test_pole_order():
    T = DiffOp.from_pqr(1, RatFun(Poly.const(1), X * X))
    assert pole_order(T, 0) >= 1
    assert laurent_decompose(T, 0) is not None


def test_green_residual_laguerre():
    T = laguerre_op(F(1, 2))
    sl = sl_form(T, (0, INF))
    f = laguerre(3, F(1, 2)) + X
    g = laguerre(2, F(1, 2)) * 2 + 1
    assert green_symmetry_residual(T, f, g, sl, 50) < mpmath.mpf(10) ** -40


def test_green_residual_hermite():
    T = hermite_op()
    sl = sl_form(T, (-INF, INF))
    assert green_symmetry_residual(T, hermite(4) + X, X ** 3 + 1, sl, 50) < mpmath.mpf(10) ** -40
