"""Registry of classical, X1 and X2 orthogonal polynomial families.

Every family carries a direct operator formula, the weight, an exceptional
polynomial generator (a Wronskian operator B applied to classical
polynomials plus a few special low-degree members), the reverse
intertwiner A with its eigen-factors, and the admissible parameter region.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from .diffop import DiffOp, from_action, sl_form, wronskian_operator
from .exactalg import (ClassicalParams, Poly, QSqrt, QuasiRational, RatFun, classical_poly,
                       count_real_roots, hermite, jacobi, laguerre, quasi_eigenfunction, scalar)
from .verify import Divergent, check_convergence

X = Poly.x()
INF = float("inf")


class InadmissibleParameters(ValueError):
    pass


class LimitParameter(InadmissibleParameters):
    """A boundary value where only a limiting operator would make sense."""


# ------------------------------------------------------------- building blocks


def hermite_op() -> DiffOp:
    return DiffOp.from_pqr(1, Poly((0, -2)), 0)


def laguerre_op(a) -> DiffOp:
    return DiffOp.from_pqr(X, Poly((1 + a, -1)), 0)


def jacobi_op(a, b) -> DiffOp:
    return DiffOp.from_pqr(Poly((1, 0, -1)), Poly((b - a, -(a + b + 2))), 0)


def _phi(base, kind, n, a=None, b=None) -> QuasiRational:
    if base == "laguerre":
        params = ClassicalParams.laguerre(a)
    elif base == "jacobi":
        params = ClassicalParams.jacobi(a, b)
    else:
        params = ClassicalParams.hermite()
    return quasi_eigenfunction(params, kind, n)[0]


def _xpow(e) -> QuasiRational:
    return QuasiRational.power(0, e)


def _one_minus(e) -> QuasiRational:
    return QuasiRational.power(1, e, sign=-1)


def _one_plus(e) -> QuasiRational:
    return QuasiRational.power(-1, e)


def _exp(c) -> QuasiRational:
    return QuasiRational.exp(Poly((0, c)))


def _logd(xi: Poly) -> RatFun:
    return RatFun(xi.deriv()) / RatFun(xi)


def _poly_op(p=0, q=0, r=0) -> DiffOp:
    return DiffOp.from_pqr(RatFun.lift(p), RatFun.lift(q), RatFun.lift(r))


@dataclass
class FamilyData:
    """Concrete objects of a family at one parameter point."""
    T: DiffOp
    W: QuasiRational
    interval: tuple
    xi: Poly
    eigenvalue: Callable
    special: dict          # n -> Poly for members not produced by B
    start: int             # B produces n = start, start+1, ...
    shift: int             # B acts on the classical polynomial of degree n - shift
    classical: ClassicalParams | None
    B: DiffOp | None
    A: DiffOp | None = None
    A_factor: Callable | None = None
    A_target: ClassicalParams | None = None
    A_shift: int = 0
    classical_T: DiffOp | None = None
    classical_W: QuasiRational | None = None
    phis: tuple = ()
    gauges: tuple = ()
    alpha: object = None
    beta: object = None

    def indices(self, n_max: int) -> list:
        out = {n for n in self.special if n <= n_max}
        out.update(range(self.start, n_max + 1))
        return sorted(out)

    def poly(self, n: int) -> Poly:
        if n in self.special:
            return self.special[n]
        if n < self.start:
            raise ValueError(f"degree {n} is not in the index set")
        base = classical_poly(self.classical, n - self.shift)
        if self.B is None:
            return base
        return self.B.apply(base).as_poly()


@dataclass(frozen=True)
class ChainData:
    family: str
    T: DiffOp
    W: QuasiRational
    interval: tuple
    phis: tuple
    B: DiffOp
    gauges: tuple = ()


@dataclass(frozen=True)
class FamilySpec:
    id: str
    base: str
    kind: str  # classical, x1, x2
    flag_class: str
    steps: int
    param_names: tuple
    region: str
    interval: tuple
    samples: tuple
    builder: Callable = field(repr=False, compare=False)
    region_check: Callable = field(repr=False, compare=False)
    gaps: tuple = ()

    @property
    def codimension(self) -> int:
        return len(self.gaps)

    def parse(self, params) -> dict:
        params = dict(params or {})
        missing = [k for k in self.param_names if k not in params]
        if missing:
            raise InadmissibleParameters(f"{self.id}: missing parameter(s) {', '.join(missing)}")
        extra = set(params) - set(self.param_names)
        if extra:
            raise InadmissibleParameters(f"{self.id}: unknown parameter(s) {', '.join(sorted(extra))}")
        return {k: scalar(v) for k, v in params.items()}

    def data(self, params=None) -> FamilyData:
        p = self.parse(params)
        return _cached_data(self.id, tuple(sorted(p.items())))

    def chain_data(self, params=None) -> ChainData:
        d = self.data(params if params is not None else self.samples[0])
        if not d.phis:
            raise ValueError(f"{self.id} has no Darboux chain")
        return ChainData(self.id, d.classical_T, d.classical_W, d.interval, d.phis, d.B, d.gauges)


@lru_cache(maxsize=None)
def _cached_data(fid, items):
    spec = _REGISTRY[fid]
    params = dict(items)
    msg = spec.region_check(**params)
    if msg:
        if isinstance(msg, LimitParameter):
            raise msg
        raise InadmissibleParameters(f"{fid}: {msg}")
    return spec.builder(**params)


# ---------------------------------------------------------------- builders


def _hermite():
    return FamilyData(hermite_op(), _exp_quad(-1), (-INF, INF), Poly.const(1), lambda n: Fraction(-2 * n),
                      {}, 0, 0, ClassicalParams.hermite(), None)


def _exp_quad(c) -> QuasiRational:
    return QuasiRational.exp(Poly((0, 0, c)))


def _laguerre(alpha):
    a = alpha
    return FamilyData(laguerre_op(a), _exp(-1) * _xpow(a), (0, INF), Poly.const(1), lambda n: Fraction(-n),
                      {}, 0, 0, ClassicalParams.laguerre(a), None)


def _jacobi(alpha, beta):
    a, b = alpha, beta
    return FamilyData(jacobi_op(a, b), _one_minus(a) * _one_plus(b), (-1, 1), Poly.const(1),
                      lambda n: -n * (n + a + b + 1), {}, 0, 0, ClassicalParams.jacobi(a, b), None)


def _laguerre_x1(alpha):
    a = alpha
    xi = X + a
    dl = _logd(xi)
    T = laguerre_op(a) + DiffOp((-2 * dl * a, -2 * dl * RatFun(X)))
    phi = _phi("laguerre", 3, 1, a - 1)
    B = wronskian_operator(_exp(-1), [phi])
    A = DiffOp((a / RatFun(xi), RatFun(X) / RatFun(xi)))
    cl = ClassicalParams.laguerre(a - 1)
    return FamilyData(T, _exp(-1) * _xpow(a) / QuasiRational(xi * xi), (0, INF), xi,
                      lambda n: Fraction(-n), {}, 1, 1, cl, B, A, lambda n: -(a + n), cl, 1,
                      laguerre_op(a - 1), _exp(-1) * _xpow(a - 1), (phi,), alpha=a)


def _jacobi_x1(alpha, beta):
    a, b = alpha, beta
    xi = jacobi(1, -a - 1, b - 1)
    dl = _logd(xi)
    T = jacobi_op(a, b) + DiffOp((-2 * dl * b * RatFun(1 - X) + (a - b), -2 * dl * RatFun(1 - X * X)))
    phi = _phi("jacobi", 3, 1, a + 1, b - 1)
    B = wronskian_operator(_one_minus(a + 2), [phi])
    A = wronskian_operator(_one_plus(b + 1) / QuasiRational(xi), [_one_plus(-b)])
    cl = ClassicalParams.jacobi(a + 1, b - 1)
    W = _one_minus(a) * _one_plus(b) / QuasiRational(xi * xi)
    return FamilyData(T, W, (-1, 1), xi, lambda n: -(n - 1) * (n + a + b), {}, 1, 1, cl, B,
                      A, lambda n: -(a + n - 1) * (b + n), cl, 1,
                      jacobi_op(a + 1, b - 1), _one_minus(a + 1) * _one_plus(b - 1), (phi,), alpha=a, beta=b)


def _hermite_x2():
    xi = Poly((1, 0, 2))
    T = hermite_op() + DiffOp((0, -2 * _logd(xi)))
    phi = _phi("hermite", 2, 2)
    B = wronskian_operator(_exp_quad(-1), [phi])
    A = DiffOp((0, 1 / RatFun(xi)))
    cl = ClassicalParams.hermite()
    return FamilyData(T, _exp_quad(-1) / QuasiRational(xi * xi), (-INF, INF), xi, lambda n: Fraction(-2 * n),
                      {0: Poly.const(1)}, 3, 3, cl, B, A, lambda n: 4 * n, cl, 3,
                      hermite_op(), _exp_quad(-1), (phi,))


def _laguerre_x2_I(alpha):
    a = alpha
    xi = laguerre(2, a - 1).compose(Poly((0, -1)))
    dl = _logd(xi)
    T = laguerre_op(a) + DiffOp((-2 * dl * a, -2 * dl * RatFun(X)))
    phi = _phi("laguerre", 3, 2, a - 1)
    B = wronskian_operator(_exp(-1), [phi])
    A = DiffOp((a / RatFun(xi), RatFun(X) / RatFun(xi)))
    cl = ClassicalParams.laguerre(a - 1)
    return FamilyData(T, _exp(-1) * _xpow(a) / QuasiRational(xi * xi), (0, INF), xi,
                      lambda n: Fraction(-n), {}, 2, 2, cl, B, A, lambda n: -(a + n), cl, 2,
                      laguerre_op(a - 1), _exp(-1) * _xpow(a - 1), (phi,), alpha=a)


def _laguerre_x2_II(alpha):
    a = alpha
    xi = laguerre(2, -a - 1)
    dl = _logd(xi)
    x = RatFun(X)
    T = laguerre_op(a) + DiffOp((2 * x * dl - 4, -2 * x * dl))
    phi = _phi("laguerre", 2, 2, a + 1)
    B = wronskian_operator(_xpow(a + 2), [phi])
    A = DiffOp((-1 / RatFun(xi), 1 / RatFun(xi)))
    cl = ClassicalParams.laguerre(a + 1)
    return FamilyData(T, _exp(-1) * _xpow(a) / QuasiRational(xi * xi), (0, INF), xi,
                      lambda n: Fraction(-n), {}, 2, 2, cl, B, A, lambda n: 3 - a - n, cl, 2,
                      laguerre_op(a + 1), _exp(-1) * _xpow(a + 1), (phi,), alpha=a)


# limit operator at alpha = 0, where the two seed functions coincide
_B0 = DiffOp((Poly((2, -2, -1, -1)), Poly((-1, 2, 1, 2)), Poly((0, -1, 0, -1))))


def _laguerre_x2_e11_13(alpha):
    a = alpha
    xi = Poly((1 - a * a, 0, 1))
    x = RatFun(X)
    T = laguerre_op(a) + DiffOp((2 * (a - 1) * RatFun(Poly((a + 1, -1))) / RatFun(xi), -2 * x * _logd(xi)))
    cl = ClassicalParams.laguerre(a)
    y1 = Poly((a + 1, 1))
    factor = lambda n: -(n - 1) * (a + n - 1)
    common = dict(alpha=a)
    if a == 0:
        # the A operator at alpha = 0 is recovered from three of its relations
        B = _B0
        ys = {1: y1}
        pairs = []
        for n in (1, 3, 4):
            y = ys[n] if n in ys else B.apply(laguerre(n - 3, 0)).as_poly()
            target = laguerre(n - 3, 0) * factor(n) if n >= 3 else Poly()
            pairs.append((y, target))
        A = from_action(pairs)
        return FamilyData(T, _exp(-1) / QuasiRational(xi * xi), (0, INF), xi, lambda n: Fraction(-n),
                          {1: y1}, 3, 3, cl, B, A, factor, cl, 3, laguerre_op(0), _exp(-1), (), **common)
    phi3 = _phi("laguerre", 3, 1, a)
    phi4 = _phi("laguerre", 4, 1, a)
    B = wronskian_operator(_exp(-2) * _xpow(2 + a) * (1 / a), [phi3, phi4])
    A = wronskian_operator(_xpow(2 + a) / QuasiRational(xi * xi * a),
                           [_xpow(-a) * Poly((1 - a, 1)), QuasiRational(y1)])
    return FamilyData(T, _exp(-1) * _xpow(a) / QuasiRational(xi * xi), (0, INF), xi, lambda n: Fraction(-n),
                      {1: y1}, 3, 3, cl, B, A, factor, cl, 3,
                      laguerre_op(a), _exp(-1) * _xpow(a), (phi3, phi4), **common)


def _laguerre_x2_e11_03(alpha):
    a = alpha
    xi = laguerre(2, -a - 1).compose(Poly((0, -1)))
    T = laguerre_op(a) + DiffOp((0, -2 * RatFun(X) * _logd(xi)))
    phi = _phi("laguerre", 4, 2, 1 + a)
    B = wronskian_operator(_exp(-1) * _xpow(2 + a), [phi])
    A = DiffOp((0, 1 / RatFun(xi)))
    cl = ClassicalParams.laguerre(a + 1)
    return FamilyData(T, _exp(-1) * _xpow(a) / QuasiRational(xi * xi), (0, INF), xi, lambda n: Fraction(-n),
                      {0: Poly.const(1)}, 3, 3, cl, B, A, lambda n: Fraction(-n), cl, 3,
                      laguerre_op(a + 1), _exp(-1) * _xpow(a + 1), (phi,), alpha=a)


def _laguerre_x2_e2a(a, seeds, special, prefA, fnsA, factor, rterm):
    xi = Poly((Fraction(3, 4), 1))
    x = RatFun(X)
    T = laguerre_op(a) + DiffOp((rterm / RatFun(xi), -4 * x / RatFun(xi)))
    B = wronskian_operator(_exp(-2) * _xpow(2 + a) / QuasiRational(xi), list(seeds))
    A = wronskian_operator(prefA, fnsA)
    cl = ClassicalParams.laguerre(a)
    W = _exp(-1) * _xpow(a) / QuasiRational(Poly((3, 4)) ** 4)
    return FamilyData(T, W, (0, INF), xi, lambda n: Fraction(-n), special, 3, 3, cl, B, A, factor, cl, 3,
                      laguerre_op(a), _exp(-1) * _xpow(a), tuple(seeds), alpha=a)


def _laguerre_x2_e2a13():
    a = Fraction(1, 4)
    xi = Poly((Fraction(3, 4), 1))
    y1 = Poly((Fraction(15, 4), 1))
    return _laguerre_x2_e2a(
        a, (_phi("laguerre", 4, 1, a), _phi("laguerre", 3, 2, a)), {1: y1},
        _xpow(Fraction(9, 4)) / QuasiRational(xi ** 3), [_xpow(-a), QuasiRational(y1)],
        lambda n: Fraction(25, 128) * (n - 1) * (4 * n + 1), -1)


def _laguerre_x2_e2a03():
    a = Fraction(-1, 4)
    xi = Poly((Fraction(3, 4), 1))
    return _laguerre_x2_e2a(
        a, (_phi("laguerre", 4, 2, a), _phi("laguerre", 3, 1, a)), {0: Poly.const(1)},
        _xpow(Fraction(7, 4)) / QuasiRational(xi ** 3),
        [QuasiRational(1), _xpow(Fraction(1, 4)) * Poly((Fraction(15, 4), 1))],
        lambda n: Fraction(25, 128) * n * (5 - 4 * n), 0)


def _jacobi_weight(a, b, xi, power=2):
    return _one_minus(a) * _one_plus(b) / QuasiRational(xi ** power)


def _jacobi_x2_e11_23(alpha, beta):
    a, b = alpha, beta
    xi = jacobi(2, -a - 1, b - 1)
    dl = _logd(xi)
    T = jacobi_op(a, b) + DiffOp((-2 * dl * b * RatFun(1 - X) + 2 * (a - b - 1), -2 * dl * RatFun(1 - X * X)))
    phi = _phi("jacobi", 3, 2, a + 1, b - 1)
    B = wronskian_operator(_one_minus(a + 2), [phi])
    A = wronskian_operator(_one_plus(b + 1) / QuasiRational(xi), [_one_plus(-b)])
    cl = ClassicalParams.jacobi(a + 1, b - 1)
    return FamilyData(T, _jacobi_weight(a, b, xi), (-1, 1), xi, lambda n: -(n - 2) * (n - 1 + a + b),
                      {}, 2, 2, cl, B, A, lambda n: -(a + n - 3) * (b + n), cl, 2,
                      jacobi_op(a + 1, b - 1), _one_minus(a + 1) * _one_plus(b - 1), (phi,), alpha=a, beta=b)


def _jacobi_x2_e11_13(alpha, beta):
    a, b = alpha, beta
    xi = Poly((a * a - b * b, 2 * (a * a + b * b - 2), a * a - b * b))
    T = jacobi_op(a, b) + DiffOp((-8 * (a - 1) * (b - 1) * RatFun(jacobi(1, a, b)) / RatFun(xi),
                                  -2 * RatFun(1 - X * X) * _logd(xi)))
    phi3 = _phi("jacobi", 3, 1, a + 2, b)
    phi4 = _phi("jacobi", 4, 1, a + 2, b)
    B = wronskian_operator(_one_minus(6 + 2 * a) * _one_plus(2 + b) * (1 / b), [phi3, phi4])
    y1 = jacobi(1, -a - 2, b)
    A = wronskian_operator(_one_plus(b + 2) / QuasiRational(xi * xi * b),
                           [_one_plus(-b) * jacobi(1, a, b - 2), QuasiRational(y1)])
    cl = ClassicalParams.jacobi(a + 2, b)
    return FamilyData(T, _jacobi_weight(a, b, xi), (-1, 1), xi, lambda n: -n * (n - 3 + a + b),
                      {1: y1}, 3, 3, cl, B, A,
                      lambda n: Fraction(1, 16) * (n - 1) * (n + a - 2) * (n + b - 1) * (n + a + b - 2), cl, 3,
                      jacobi_op(a + 2, b), _one_minus(a + 2) * _one_plus(b), (phi3, phi4), alpha=a, beta=b)


def _jacobi_x2_e11_03(alpha, beta):
    a, b = alpha, beta
    xi = jacobi(2, -a - 1, -b - 1)
    T = jacobi_op(a, b) + DiffOp((2 * (a + b - 1), -2 * RatFun(1 - X * X) * _logd(xi)))
    phi = _phi("jacobi", 4, 2, a + 1, b + 1)
    B = wronskian_operator(_one_minus(2 + a) * _one_plus(2 + b), [phi])
    A = DiffOp((0, 1 / RatFun(xi)))
    cl = ClassicalParams.jacobi(a + 1, b + 1)
    return FamilyData(T, _jacobi_weight(a, b, xi), (-1, 1), xi, lambda n: -(n - 2) * (n - 1 + a + b),
                      {0: Poly.const(1)}, 3, 3, cl, B, A, lambda n: -n * (a + b + n - 3), cl, 3,
                      jacobi_op(a + 1, b + 1), _one_minus(a + 1) * _one_plus(b + 1), (phi,), alpha=a, beta=b)


def e2a13_jacobi_parameters(a):
    return 2 + Fraction(6) / (a - 3), Fraction(2) / (3 * a - 1)


def e2a03_jacobi_parameters(z1):
    z2 = z1 / (2 * z1 - 1)
    return Fraction(3, 2) * z1 - 1, Fraction(3, 2) * z2 - 1


def _jacobi_x2_e2a13(a):
    al, be = e2a13_jacobi_parameters(a)
    xi = Poly((2 * (a - 1), 1 + a))
    T = jacobi_op(al, be) + DiffOp((-8 / RatFun(xi), -4 * RatFun(1 - X * X) * _logd(xi)))
    seeds = (_phi("jacobi", 4, 1, al + 2, be), _phi("jacobi", 3, 2, al + 2, be))
    B = wronskian_operator(_one_minus(2 * al + 6) * _one_plus(be + 2)
                           / QuasiRational(xi * (a * (a - 1) * (1 + 3 * a))), list(seeds))
    y1 = Poly(((a - 1) * (3 * a - 1) - 2 * (1 + a), 2 * (1 + a)))
    const = -(3 * a - 1) ** 5 * (a - 3) ** 3 / (36 * (1 + 3 * a))
    A = wronskian_operator(_one_plus(be + 2) * const / QuasiRational(xi ** 3), [_one_plus(-be), QuasiRational(y1)])
    cl = ClassicalParams.jacobi(al + 2, be)
    return FamilyData(T, _jacobi_weight(al, be, xi, 4), (-1, 1), xi, lambda n: -n * (n - 3 + al + be),
                      {1: y1}, 3, 3, cl, B, A,
                      lambda n: (n - 1) * (n - 3 + al) * (n + be) * (n - 2 + al + be), cl, 3,
                      jacobi_op(al + 2, be), _one_minus(al + 2) * _one_plus(be), seeds, alpha=al, beta=be)


def _jacobi_x2_e2a03(z1):
    al, be = e2a03_jacobi_parameters(z1)
    xi = Poly((z1, z1 - 1))
    T = jacobi_op(al, be) + DiffOp((0, -4 * RatFun(1 - X * X) * _logd(xi)))
    seeds = (_phi("jacobi", 4, 2, al + 2, be), _phi("jacobi", 3, 1, al + 2, be))
    p1 = jacobi(1, -al - 2, be)
    B = wronskian_operator(_one_minus(2 * al + 6) * _one_plus(be + 2) / QuasiRational(p1), list(seeds))
    const = 2 * (1 + al) ** 3 / ((be - 1) ** 2 * al * (al - 2) ** 2)
    g = _one_plus(-be) * Poly((1 + al - be * (1 - 2 * al), be * (1 - 2 * al)))
    A = wronskian_operator(_one_plus(2 + be) * const / QuasiRational(p1 ** 3), [QuasiRational(1), g])
    cl = ClassicalParams.jacobi(al + 2, be)
    return FamilyData(T, _jacobi_weight(al, be, xi, 4), (-1, 1), xi, lambda n: -n * (n - 3 + al + be),
                      {0: Poly.const(1)}, 3, 3, cl, B, A,
                      lambda n: n * (n - 2 + al) * (n - 1 + be) * (n - 3 + al + be), cl, 3,
                      jacobi_op(al + 2, be), _one_minus(al + 2) * _one_plus(be), seeds, alpha=al, beta=be)


# ------------------------------------------------------------ region checks


def _ok(cond, msg):
    return None if cond else msg


def _r_none(**_):
    return None


def _r_laguerre(alpha):
    return _ok(alpha > -1, "requires alpha > -1")


def _r_jacobi(alpha, beta):
    return _ok(alpha > -1 and beta > -1, "requires alpha > -1 and beta > -1")


def _r_laguerre_x1(alpha):
    return _ok(alpha > 0, "requires alpha > 0")


def _r_jacobi_x1(alpha, beta):
    return _ok(alpha > -1 and beta > -1 and alpha * beta > 0 and alpha != beta,
               "requires alpha, beta > -1 of the same sign and alpha != beta")


def _r_lag_I(alpha):
    return _ok(alpha > 0, "requires alpha > 0")


def _r_lag_II(alpha):
    return _ok(alpha > 1, "requires alpha > 1")


def _r_lag_13(alpha):
    return _ok(-1 < alpha < 1, "requires |alpha| < 1")


def _r_lag_03(alpha):
    return _ok(-1 < alpha < 0 or alpha > 1, "requires alpha in (-1, 0) or alpha > 1")


def _r_jac_23(alpha, beta):
    a, b = alpha, beta
    return _ok((a > -1 and b > 0) or (0 < a < 1 and -1 < b < 0),
               "requires alpha > -1, beta > 0, or 0 < alpha < 1, -1 < beta < 0")


def _r_jac_13(alpha, beta):
    a, b = alpha, beta
    if b == 0 and a > 1:
        return LimitParameter("jacobi-x2-e11-13: beta = 0 is a limiting case and is not supported")
    return _ok((-1 < a < 1 and b > 1) or (a > 1 and -1 < b < 1),
               "requires -1 < alpha < 1, beta > 1, or alpha > 1, -1 < beta < 1")


def _r_jac_03(alpha, beta):
    a, b = alpha, beta
    ok = ((a > 1 and b > 1) or (1 < a < 3 and -1 < b < 0 and a + b < 2)
          or (1 < b < 3 and -1 < a < 0 and a + b < 2) or (0 < a < 1 and 0 < b < 1))
    return _ok(ok, "parameters outside the four admissible classes")


def _r_jac_2a13(a):
    if a in (3, Fraction(1, 3), -1):
        return "a must avoid 3, 1/3 and -1"
    return _ok(a > 3 or a < Fraction(-1, 3), "requires a > 3 or a < -1/3")


def _r_jac_2a03(z1):
    if z1 == 1:
        return "z1 = 1 is excluded"
    return _ok(z1 > Fraction(1, 2), "requires z1 > 1/2")


# ----------------------------------------------------------------- registry


def _F(s):
    return Fraction(s)


def _spec(id, base, kind, flag, steps, names, region, interval, samples, builder, check, gaps):
    samples = tuple({k: _F(v) for k, v in zip(names, s)} for s in samples)
    return FamilySpec(id, base, kind, flag, steps, tuple(names), region, interval, samples, builder, check,
                      tuple(gaps))


_SPECS = [
    _spec("hermite", "hermite", "classical", "standard", 0, (), "none", (-INF, INF), [()],
          _hermite, _r_none, ()),
    _spec("laguerre", "laguerre", "classical", "standard", 0, ("alpha",), "alpha > -1", (0, INF),
          [("-1/2",), ("0",), ("3/2",)], _laguerre, _r_laguerre, ()),
    _spec("jacobi", "jacobi", "classical", "standard", 0, ("alpha", "beta"), "alpha, beta > -1", (-1, 1),
          [("-1/2", "-1/2"), ("0", "0"), ("3/2", "1/3")], _jacobi, _r_jacobi, ()),
    _spec("laguerre-x1", "laguerre", "x1", "E1", 1, ("alpha",), "alpha > 0", (0, INF),
          [("1/10",), ("1",), ("5/2",)], _laguerre_x1, _r_laguerre_x1, (0,)),
    _spec("jacobi-x1", "jacobi", "x1", "E1", 1, ("alpha", "beta"),
          "alpha, beta > -1, alpha*beta > 0, alpha != beta", (-1, 1),
          [("1/2", "3/2"), ("-1/2", "-1/3"), ("2", "1/10"), ("-9/10", "-1/2")], _jacobi_x1, _r_jacobi_x1, (0,)),
    _spec("hermite-x2", "hermite", "x2", "E11_03", 1, (), "none", (-INF, INF), [()],
          _hermite_x2, _r_none, (1, 2)),
    _spec("laguerre-x2-I", "laguerre", "x2", "E11_23", 1, ("alpha",), "alpha > 0", (0, INF),
          [("1/10",), ("2",), ("7/2",)], _laguerre_x2_I, _r_lag_I, (0, 1)),
    _spec("laguerre-x2-II", "laguerre", "x2", "E11_23", 1, ("alpha",), "alpha > 1", (0, INF),
          [("11/10",), ("2",), ("7/3",)], _laguerre_x2_II, _r_lag_II, (0, 1)),
    _spec("laguerre-x2-e11-13", "laguerre", "x2", "E11_13", 2, ("alpha",), "-1 < alpha < 1", (0, INF),
          [("1/3",), ("-9/10",), ("-1/3",), ("0",), ("9/10",)], _laguerre_x2_e11_13, _r_lag_13, (0, 2)),
    _spec("laguerre-x2-e11-03", "laguerre", "x2", "E11_03", 1, ("alpha",), "alpha in (-1,0) or alpha > 1",
          (0, INF), [("5/2",), ("-9/10",), ("-1/2",), ("11/10",)], _laguerre_x2_e11_03, _r_lag_03, (1, 2)),
    _spec("laguerre-x2-e2a13", "laguerre", "x2", "E2a_13", 2, (), "alpha = 1/4 (fixed)", (0, INF), [()],
          _laguerre_x2_e2a13, _r_none, (0, 2)),
    _spec("laguerre-x2-e2a03", "laguerre", "x2", "E2a_03", 2, (), "alpha = -1/4 (fixed)", (0, INF), [()],
          _laguerre_x2_e2a03, _r_none, (1, 2)),
    _spec("jacobi-x2-e11-23", "jacobi", "x2", "E11_23", 1, ("alpha", "beta"),
          "alpha > -1, beta > 0; or 0 < alpha < 1, -1 < beta < 0", (-1, 1),
          [("7/3", "1/2"), ("2", "1/10"), ("1/2", "-1/3"), ("9/10", "-9/10")],
          _jacobi_x2_e11_23, _r_jac_23, (0, 1)),
    _spec("jacobi-x2-e11-13", "jacobi", "x2", "E11_13", 2, ("alpha", "beta"),
          "-1 < alpha < 1, beta > 1; or alpha > 1, -1 < beta < 1, beta != 0", (-1, 1),
          [("1/3", "5/2"), ("-1/2", "11/10"), ("2", "1/2"), ("3/2", "-1/2")],
          _jacobi_x2_e11_13, _r_jac_13, (0, 2)),
    _spec("jacobi-x2-e11-03", "jacobi", "x2", "E11_03", 1, ("alpha", "beta"),
          "alpha, beta > 1; 1 < alpha < 3, -1 < beta < 0, alpha + beta < 2; "
          "1 < beta < 3, -1 < alpha < 0, alpha + beta < 2; 0 < alpha, beta < 1", (-1, 1),
          [("5/4", "7/3"), ("2", "-1/2"), ("-1/2", "2"), ("1/2", "1/3")],
          _jacobi_x2_e11_03, _r_jac_03, (1, 2)),
    _spec("jacobi-x2-e2a13", "jacobi", "x2", "E2a_13", 2, ("a",),
          "a > 3 or a < -1/3, a != -1; alpha = 2 + 6/(a-3), beta = 2/(3a-1)", (-1, 1),
          [("-2",), ("4",), ("-1/2",), ("7",)], _jacobi_x2_e2a13, _r_jac_2a13, (0, 2)),
    _spec("jacobi-x2-e2a03", "jacobi", "x2", "E2a_03", 2, ("z1",),
          "z1 > 1/2, z1 != 1; alpha = 3 z1/2 - 1, beta = 3 z2/2 - 1, z2 = z1/(2 z1 - 1)", (-1, 1),
          [("3/2",), ("3",), ("3/4",), ("5/7",)], _jacobi_x2_e2a03, _r_jac_2a03, (1, 2)),
]

_REGISTRY = {s.id: s for s in _SPECS}


def registry() -> list:
    return list(_SPECS)


def get(fid: str) -> FamilySpec:
    try:
        return _REGISTRY[fid]
    except KeyError:
        raise KeyError(f"unknown family {fid!r}") from None


# ------------------------------------------------------------- operations


_XI_DEGREE = {"standard": 0, "E1": 1, "E11": 2, "E2a": 1}


@dataclass
class Admissibility:
    ok: bool
    diagnostic: str

    def __bool__(self):
        return self.ok


def admissible(spec: FamilySpec, params=None) -> Admissibility:
    """Region predicate plus a direct certificate on the concrete weight."""
    try:
        d = spec.data(params)
    except InadmissibleParameters as exc:
        return Admissibility(False, str(exc))
    lo, hi = d.interval
    nominal = _XI_DEGREE[spec.flag_class.split("_")[0]]
    if d.xi.degree != nominal:
        return Admissibility(False, f"xi = {d.xi} degenerates (degree {d.xi.degree}, expected {nominal})")
    zeros = count_real_roots(d.xi, lo, hi, closed=True) if d.xi.degree > 0 else 0
    if zeros:
        return Admissibility(False, f"xi = {d.xi} has {zeros} zero(s) in the closed interval")
    try:
        check_convergence(d.W, d.interval)
    except Divergent as exc:
        return Admissibility(False, f"moment 0 diverges: {exc}")
    return Admissibility(True, f"xi has no zeros on [{lo}, {hi}] and moment 0 is finite")


@dataclass
class GeneratedSystem:
    family: str
    params: dict
    items: list  # (n, poly, eigenvalue)
    operator: DiffOp
    weight: QuasiRational
    interval: tuple

    def degrees(self) -> list:
        return [p.degree for _, p, _ in self.items]


class EigenCheckFailed(ArithmeticError):
    pass


def generate(spec: FamilySpec, params=None, n_max: int = 10, check: bool = True) -> GeneratedSystem:
    adm = admissible(spec, params)
    if not adm:
        raise InadmissibleParameters(adm.diagnostic)
    d = spec.data(params)
    items = []
    for n in d.indices(n_max):
        y = d.poly(n)
        lam = d.eigenvalue(n)
        if check and not (d.T.apply(y) - lam * RatFun(y)).is_zero():
            raise EigenCheckFailed(f"{spec.id}: eigen-relation fails at n = {n}")
        items.append((n, y, lam))
    return GeneratedSystem(spec.id, spec.parse(params), items, d.T, d.W, d.interval)


def intertwine_check(spec: FamilySpec, params=None, n: int = 3) -> bool:
    d = spec.data(params)
    if d.A is None:
        raise ValueError(f"{spec.id} has no intertwiner")
    y = d.poly(n)
    k = n - d.A_shift
    target = classical_poly(d.A_target, k) * d.A_factor(n) if k >= 0 else Poly()
    return d.A.apply(y) == RatFun(target)


def weight_matches_sl_form(spec: FamilySpec, params=None) -> bool:
    """The SL weight of the direct operator equals the registry weight up to a constant."""
    d = spec.data(params)
    sl = sl_form(d.T, d.interval)
    ratio = sl.W / d.W
    return ratio.is_rational() and ratio.as_ratfun().is_poly() and ratio.as_ratfun().num.degree == 0


def chain_operator_offset(spec: FamilySpec, params=None):
    """Constant c with direct operator = chain operator + c, or None."""
    from .darboux import build_chain
    d = spec.data(params)
    chain = build_chain(spec, params)
    diff = d.T - chain.terminal
    if diff.order <= 0 and diff.coeff(0).is_poly() and diff.coeff(0).num.degree <= 0:
        return diff.coeff(0).num[0] if not diff.is_zero() else Fraction(0)
    return None


# ------------------------------------------------------- non-existence


@dataclass
class NonexistenceCertificate:
    base: str          # hermite, laguerre or jacobi
    flag_class: str
    method: str        # normalization, interior-singularity or divergent-moment
    holds: bool
    reason: str


def weight_defects(W: QuasiRational, interval) -> list:
    """Exact reasons why W fails to be a finite-moment weight on the interval."""
    lo, hi = interval
    out = []
    den = W.prefactor.den
    k = count_real_roots(den, lo, hi, closed=False) if den.degree > 0 else 0
    if k:
        out.append(("interior-singularity", f"weight denominator {den} has {k} root(s) inside ({lo}, {hi})"))
    for e, direction in ((lo, -1), (hi, 1)):
        if e in (INF, -INF):
            kk, sgn, alg = W.growth_at_infinity(direction)
            if not (sgn < 0 or (sgn == 0 and alg < -1)):
                out.append(("divergent-moment", f"weight does not decay at {'+' if direction > 0 else '-'}infinity"))
        else:
            order = W.order_at(e)
            if order <= -1:
                out.append(("divergent-moment", f"weight behaves like |x - ({e})|^({order}) at the endpoint"))
    return out


def _coeffs_by_unit(label, moduli, names):
    """p(z) for each unit vector of the free constants; p is linear in them."""
    from .flags import class_operator
    out = []
    for nm in names:
        T = class_operator(label, moduli, **{nm: 1})
        out.append(T.p.as_poly())
    return out


def _interp(fn, deg):
    """Exact polynomial through (t, fn(t)) at deg + 1 points, checked at two more."""
    ts = [Fraction(k, 3) + Fraction(1, 7) for k in range(deg + 3)]
    vals = [fn(t) for t in ts]
    poly = Poly()
    for i in range(deg + 1):
        term = Poly.const(vals[i])
        for j in range(deg + 1):
            if j != i:
                term = term * Poly((-ts[j], 1)) * (Fraction(1) / (ts[i] - ts[j]))
        poly = poly + term
    if any(poly(ts[k]) != vals[k] for k in range(deg + 1, deg + 3)):
        raise ArithmeticError("interpolation degree bound too small")
    return poly


def _hermite_e11_23():
    from .flags import class_operator
    from .exactalg import rational_roots
    ok, notes = True, []
    for a0 in (Fraction(1, 3), Fraction(2), Fraction(-5, 2), Fraction(7)):
        lead = _interp(lambda a1: class_operator("E11_23", (a0, a1), c=1).p.as_poly()[2], 4)
        roots = sorted(rational_roots(lead))
        ok &= lead.degree == 2 and roots == sorted([a0, a0 + 4])
        for a1 in roots:
            p = class_operator("E11_23", (a0, a1), c=1).p.as_poly()
            ok &= p.degree == 1
        notes.append(f"a0={a0}: z^2 coefficient vanishes only at a1 in {{{', '.join(map(str, roots))}}}, "
                     "where p is linear")
    return NonexistenceCertificate("hermite", "E11_23", "normalization", ok, "; ".join(notes))


def _hermite_e11_13():
    from .exactalg import rank
    ps = _coeffs_by_unit("E11_13", (Fraction(2),), ("c0", "c1"))
    rows = [[p[2] for p in ps], [p[1] for p in ps]]
    ok = rank(rows) == 2
    return NonexistenceCertificate(
        "hermite", "E11_13", "normalization", ok,
        "the z^2 and z coefficients of p are independent in (c0, c1): a constant p forces c0 = c1 = 0, "
        "which removes both poles")


def _e11_12_hermite_op(a):
    from .flags import class_operator
    T = class_operator("E11_12", (), c0=1, c1=1, q0=2)
    return T.change_variable(a, Fraction(1, 2))


def _hermite_e11_12():
    from .exactalg import QSqrt, nullspace
    ps = _coeffs_by_unit("E11_12", (), ("c0", "c1", "q0"))
    rows = [[p[2] for p in ps], [p[1] for p in ps]]
    ns = nullspace(rows, 3)
    forced = len(ns) == 1 and ns[0][0] == ns[0][1] and ns[0][2] == 2 * ns[0][0]
    ok, notes = forced, ["constant p forces c0 = c1 = q0/2"]
    for a in (Fraction(1), Fraction(1, 3), Fraction(5, 2)):
        sl = sl_form(_e11_12_hermite_op(a), (-INF, INF))
        kinds = {k for k, _ in weight_defects(sl.W, (-INF, INF))}
        ok &= "interior-singularity" in kinds
        notes.append(f"a={a}: interior singularity")
    for s in (Fraction(1), Fraction(1, 2), Fraction(3)):
        T = _e11_12_hermite_op(QSqrt(0, s, -1))
        sl = sl_form(T, (-INF, INF))
        defects = weight_defects(sl.W, (-INF, INF))
        kinds = {k for k, _ in defects}
        ok &= "divergent-moment" in kinds and "interior-singularity" not in kinds
        notes.append(f"a={s}i: " + "; ".join(r for _, r in defects))
    return NonexistenceCertificate("hermite", "E11_12", "divergent-moment", ok, "; ".join(notes))


_ONE_POLE = ("E2a_13", "E2a_03", "E2a_12", "E2a_02", "E2b_23", "E2c_23")
_ONE_POLE_SAMPLE = {"E2a_13": (Fraction(2),), "E2b_23": (Fraction(1, 2),), "E2c_23": (Fraction(3),)}


def _hermite_one_pole(label):
    from .flags import class_operator
    T = class_operator(label, _ONE_POLE_SAMPLE.get(label, ()), c=1, q0=Fraction(-1, 3), p0=Fraction(1, 5))
    v, cs = (T.q / T.p).laurent(Fraction(0), 1)
    ok = v == -1 and cs[0] == -4
    return NonexistenceCertificate(
        "hermite", label, "divergent-moment", ok,
        "q/p has residue -4 at the real pole, so any weight behaves like |x - b|^(-4) there; "
        "a Hermite interval is the whole line, so the pole is interior and moment 0 diverges")


def _laguerre_e11_12_op(a):
    from .flags import class_operator
    T = class_operator("E11_12", (), c0=(1 + a) / 2, c1=(a - 1) / 2, q0=a)
    # x = a((1 + a) - 2z)
    Tx = T.change_variable(-1 / (2 * a), (1 + a) / 2)
    lead = Tx.coeffs[-1].num.lead
    if isinstance(lead, QSqrt) and lead.a == 0:
        # imaginary a: the operator is i times a real one; same eigenproblem
        Tx = DiffOp(c * (1 / QSqrt(0, lead.b, lead.d)) * lead.b for c in Tx.coeffs)
    return Tx


def _laguerre_e11_12():
    from .exactalg import QSqrt
    ok, notes = True, []
    for a in (Fraction(2), Fraction(1, 2), Fraction(-3), Fraction(3, 2)):
        sl = sl_form(_laguerre_e11_12_op(a), (0, INF))
        kinds = {k for k, _ in weight_defects(sl.W, (0, INF))}
        ok &= "interior-singularity" in kinds
        notes.append(f"a={a}: positive zero of the weight denominator")
    for s in (Fraction(1), Fraction(1, 2), Fraction(2)):
        sl = sl_form(_laguerre_e11_12_op(QSqrt(0, s, -1)), (0, INF))
        defects = weight_defects(sl.W, (0, INF))
        kinds = {k for k, _ in defects}
        ok &= "divergent-moment" in kinds and "interior-singularity" not in kinds
        notes.append(f"a={s}i: " + "; ".join(r for _, r in defects))
    return NonexistenceCertificate("laguerre", "E11_12", "interior-singularity", ok, "; ".join(notes))


def _laguerre_e2a_12():
    from .flags import class_operator
    ps = _coeffs_by_unit("E2a_12", (), ("c", "p0"))
    linear_forced = ps[1][2] != 0 and ps[0][2] == 0
    T = class_operator("E2a_12", (), c=1)
    ok, notes = linear_forced, ["a linear p forces p0 = 0"]
    # the root of p goes to x = 0; try both orientations of the half-line
    for scale in (Fraction(2, 3), Fraction(3), Fraction(1, 5), Fraction(-2, 3), Fraction(-3), Fraction(-1, 5)):
        Tx = T.change_variable(scale, Fraction(-1, 2))
        sl = sl_form(Tx, (0, INF))
        defects = weight_defects(sl.W, (0, INF))
        ok &= bool(defects)
        notes.append(f"z = {scale} x - 1/2: " + "; ".join(r for _, r in defects))
    return NonexistenceCertificate("laguerre", "E2a_12", "interior-singularity", ok, " | ".join(notes))


def _in_a(p: Poly) -> str:
    return str(p).replace("x", "a")


def _laguerre_no_form(label):
    if label == "E2a_02":
        ps = _coeffs_by_unit(label, (), ("c", "p0"))
        ok = all(p[1] == 0 for p in ps)
        why = "p = p0 z^2 + c has no z term, so it is never linear and nonconstant"
    elif label == "E2b_23":
        lead = _interp(lambda a: _coeffs_by_unit(label, (a,), ("c",))[0][2], 3)
        ok = count_real_roots(lead) == 0 and all(
            _coeffs_by_unit(label, (a,), ("c",))[0][1] == 0 for a in (Fraction(1, 2), Fraction(3)))
        why = f"z^2 coefficient {_in_a(lead)} has no real root and the z coefficient vanishes"
    else:
        lead = _interp(lambda a: _coeffs_by_unit(label, (a,), ("c",))[0][2], 3)
        lin = _interp(lambda a: _coeffs_by_unit(label, (a,), ("c",))[0][1], 3)
        from .exactalg import rational_roots
        roots = rational_roots(lead)
        ok = all(lin(r) == 0 for r in roots)
        why = f"z^2 coefficient {_in_a(lead)} vanishes only where the z coefficient {_in_a(lin)} does"
    return NonexistenceCertificate("laguerre", label, "normalization", ok, why)


def _jacobi_e11_12_op(z1, z2):
    from .flags import class_operator
    c1 = (1 - 1 / z1) * (1 - 1 / z2)
    q0 = 2 - 1 / z1 - 1 / z2 + 2 / (z1 * z2)
    T = class_operator("E11_12", (), c0=1, c1=c1, q0=q0)
    p = T.p.as_poly()
    if p(z1) != 0 or p(z2) != 0:
        raise ArithmeticError("leading coefficient does not vanish at the chosen roots")
    return T.change_variable((z1 - z2) / 2, (z1 + z2) / 2)


_Z_GRID = tuple(Fraction(s) for s in ("-3", "-1", "-1/2", "-1/4", "1/4", "1/3", "2/3", "3/4", "3/2", "2", "3"))


def jacobi_e11_12_regular_pairs(grid=_Z_GRID) -> list:
    """Root pairs (z1, z2) on the grid whose mapped weight has no defect on (-1, 1)."""
    out = []
    for z1 in grid:
        for z2 in grid:
            if z1 == z2 or z1 + z2 == 0:
                continue
            sl = sl_form(_jacobi_e11_12_op(z1, z2), (-1, 1))
            if not weight_defects(sl.W, (-1, 1)):
                out.append((z1, z2))
    return out


def _jacobi_e11_12():
    good = jacobi_e11_12_regular_pairs()
    if not good:
        return NonexistenceCertificate(
            "jacobi", "E11_12", "interior-singularity", True,
            "every sampled root pair gives a weight singular inside (-1, 1) "
            "or with an endpoint exponent <= -1")
    shown = ", ".join(f"({a}, {b})" for a, b in good if a < b)
    return NonexistenceCertificate(
        "jacobi", "E11_12", "counterexample", False,
        f"no certificate: root pairs {shown} give a positive weight with finite moments and no "
        "interior singularity (both roots in (0, 1), poles mapped outside [-1, 1])")


def _jacobi_e2a_12_op(z1):
    from .flags import class_operator
    z2 = -z1 / (2 * z1 + 1)
    T = class_operator("E2a_12", (), c=1, p0=1 / (z1 * z2))
    p = T.p.as_poly()
    if p(z1) != 0 or p(z2) != 0:
        raise ArithmeticError("leading coefficient does not vanish at the chosen roots")
    return T.change_variable((z1 - z2) / 2, (z1 + z2) / 2)


_Z1_GRID = tuple(Fraction(k, 16) for k in range(-40, 41, 3))


def jacobi_e2a_12_regular_roots(grid=_Z1_GRID) -> list:
    """Roots z1 (with z2 = -z1/(2 z1 + 1)) whose mapped weight has no defect on (-1, 1)."""
    out = []
    for z1 in grid:
        if z1 in (0, Fraction(-1, 2)) or -z1 / (2 * z1 + 1) == z1:
            continue
        sl = sl_form(_jacobi_e2a_12_op(z1), (-1, 1))
        if not weight_defects(sl.W, (-1, 1)):
            out.append(z1)
    return out


def _jacobi_e2a_12():
    good = jacobi_e2a_12_regular_roots()
    if not good:
        return NonexistenceCertificate(
            "jacobi", "E2a_12", "divergent-moment", True,
            "every sampled root z1 gives a weight singular inside (-1, 1) "
            "or with an endpoint exponent <= -1")
    return NonexistenceCertificate(
        "jacobi", "E2a_12", "counterexample", False,
        f"no certificate: z1 in {{{', '.join(map(str, good))}}} gives a positive weight with "
        "finite moments (endpoint exponents 1 + 3 z1/2 and 1 + 3 z2/2 exceed -1)")


def _jacobi_one_pole(label):
    sample = _ONE_POLE_SAMPLE.get(label, ())
    if label == "E2c_23":
        disc_zero = True
        for a in (Fraction(3), Fraction(-2), Fraction(1, 2)):
            p = _coeffs_by_unit(label, (a,), ("c",))[0]
            disc_zero &= p[1] * p[1] - 4 * p[2] * p[0] == 0
        return NonexistenceCertificate("jacobi", label, "normalization", disc_zero,
                                       "p is a perfect square (zero discriminant), never two distinct roots")
    names = ("c", "p0") if label == "E2a_02" else ("c",)
    samples = [sample] if label == "E2a_02" else [(Fraction(1, 2),), (Fraction(3),), (Fraction(-2),)]
    ok = all(p[1] == 0 for s in samples for p in _coeffs_by_unit(label, s, names))
    return NonexistenceCertificate(
        "jacobi", label, "interior-singularity", ok,
        "p has no z term, so its two roots are symmetric about the pole z = 0; the affine map "
        "sends the pole to x = 0, inside (-1, 1), where the weight has order -4")


def nonexistence_certificates() -> list:
    """Machine-checked reasons for every excluded (classical type, flag) cell."""
    out = [_hermite_e11_23(), _hermite_e11_13(), _hermite_e11_12()]
    out += [_hermite_one_pole(lbl) for lbl in _ONE_POLE]
    out += [_laguerre_e11_12(), _laguerre_e2a_12()]
    out += [_laguerre_no_form(lbl) for lbl in ("E2a_02", "E2b_23", "E2c_23")]
    out += [_jacobi_e11_12(), _jacobi_e2a_12()]
    out += [_jacobi_one_pole(lbl) for lbl in ("E2a_02", "E2b_23", "E2c_23")]
    return out
