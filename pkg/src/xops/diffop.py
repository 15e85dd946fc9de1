"""Linear differential operators with rational coefficients.

An operator is stored as a tuple of rational coefficients c_k multiplying
the k-th derivative, so ``DiffOp.from_pqr(p, q, r)`` is p y'' + q y' + r y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .exactalg import (
    Poly,
    PowerFactor,
    QuasiRational,
    RatFun,
    count_real_roots,
    derivative_factors,
    poly_gcd,
    rational_roots,
    scalar,
    to_mp,
)


class NotInNormalForm(ValueError):
    """The operator cannot preserve a primitive flag of finite codimension."""


class NonQuasiRationalWeight(ValueError):
    """exp(int q/p) falls outside the supported quasi-rational shape."""


def _binom(n: int, k: int) -> int:
    return math.comb(n, k)


class DiffOp:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [RatFun.lift(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("DiffOp is immutable")

    @classmethod
    def from_pqr(cls, p=0, q=0, r=0) -> "DiffOp":
        return cls((r, q, p))

    @classmethod
    def identity(cls) -> "DiffOp":
        return cls((1,))

    @classmethod
    def mult(cls, f) -> "DiffOp":
        return cls((f,))

    @classmethod
    def derivative(cls, k: int = 1) -> "DiffOp":
        return cls([0] * k + [1])

    @property
    def order(self) -> int:
        return max(len(self.coeffs) - 1, 0)

    def coeff(self, k: int) -> RatFun:
        return self.coeffs[k] if k < len(self.coeffs) else RatFun.lift(0)

    @property
    def p(self) -> RatFun:
        return self.coeff(2)

    @property
    def q(self) -> RatFun:
        return self.coeff(1)

    @property
    def r(self) -> RatFun:
        return self.coeff(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def _lift(self, other):
        if isinstance(other, DiffOp):
            return other
        return DiffOp.mult(other)

    def __add__(self, other):
        o = self._lift(other)
        n = max(len(self.coeffs), len(o.coeffs))
        return DiffOp(self.coeff(k) + o.coeff(k) for k in range(n))

    __radd__ = __add__

    def __neg__(self):
        return DiffOp(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, f) -> "DiffOp":
        """Left multiplication by a scalar or rational function."""
        f = RatFun.lift(f)
        return DiffOp(f * c for c in self.coeffs)

    def __mul__(self, other):
        if isinstance(other, DiffOp):
            return self.compose(other)
        return self.scale(other)

    __rmul__ = scale

    def __matmul__(self, other):
        return self.compose(other)

    def compose(self, other: "DiffOp") -> "DiffOp":
        """(self o other)[y] = self[other[y]]."""
        out = [RatFun.lift(0)] * (len(self.coeffs) + len(other.coeffs))
        for k, s in enumerate(self.coeffs):
            if s.is_zero():
                continue
            for j, t in enumerate(other.coeffs):
                dt = t
                derivs = [t]
                for _ in range(k):
                    dt = dt.deriv()
                    derivs.append(dt)
                # Leibniz: D^k (t D^j) = sum_i C(k,i) t^(k-i) D^(j+i)
                for i in range(k + 1):
                    out[j + i] = out[j + i] + s * derivs[k - i] * _binom(k, i)
        return DiffOp(out)

    def apply(self, y) -> RatFun:
        y = RatFun.lift(y)
        acc = RatFun.lift(0)
        for c in self.coeffs:
            if not c.is_zero():
                acc = acc + c * y
            y = y.deriv()
        return acc

    __call__ = apply

    def apply_quasi(self, f) -> QuasiRational:
        """T[f] for a quasi-rational f, computed as f * sum c_k Q_k."""
        f = QuasiRational.lift(f)
        if f.is_zero():
            return f
        qs = derivative_factors(f, self.order)
        s = RatFun.lift(0)
        for c, qk in zip(self.coeffs, qs):
            s = s + c * qk
        return f * QuasiRational(s)

    def gauge(self, mu) -> "DiffOp":
        """mu o T o mu^{-1} for a rational function mu."""
        mu = RatFun.lift(mu)
        return DiffOp.mult(mu).compose(self).compose(DiffOp.mult(mu.inverse()))

    def change_variable(self, scale, shift=0) -> "DiffOp":
        """The same operator written in t, where z = scale*t + shift."""
        h, b = scalar(scale), scalar(shift)
        sub = Poly((b, h))
        return DiffOp(c.compose(sub) * (1 / h) ** k for k, c in enumerate(self.coeffs))

    def poles(self) -> Poly:
        """Monic lcm of the coefficient denominators."""
        d = Poly.const(1)
        for c in self.coeffs:
            g = poly_gcd(d, c.den)
            d = d * c.den.exact_div(g)
        return d.monic()

    def is_polynomial(self) -> bool:
        return all(c.is_poly() for c in self.coeffs)

    def __repr__(self):
        names = ["y", "y'", "y''", "y'''", "y''''"]
        terms = [f"({c})*{names[k] if k < len(names) else f'y^({k})'}"
                 for k, c in reversed(list(enumerate(self.coeffs))) if not c.is_zero()]
        return "DiffOp[" + " + ".join(terms or ["0"]) + "]"


def apply(T: DiffOp, y) -> RatFun:
    return T.apply(y)


def compose(S: DiffOp, T: DiffOp) -> DiffOp:
    return S.compose(T)


def first_order(b, w) -> DiffOp:
    """b (y' - w y)."""
    b = RatFun.lift(b)
    return DiffOp((-b * RatFun.lift(w), b))


def wronskian_operator(prefactor, fs: Sequence) -> DiffOp:
    """y -> prefactor * W[f_1, ..., f_k, y] as a rational operator.

    Expanding the determinant along the last column gives the coefficient of
    y^(i) as a signed cofactor; each must come out rational once multiplied
    by the prefactor.
    """
    fs = [QuasiRational.lift(f) for f in fs]
    k = len(fs)
    pre = QuasiRational.lift(prefactor)
    cols = [derivative_factors(f, k) for f in fs]
    prod = pre
    for f in fs:
        prod = prod * f
    coeffs = []
    for i in range(k + 1):
        rows = [m for m in range(k + 1) if m != i]
        minor = [[cols[j][m] for j in range(k)] for m in rows]
        cof = _det(minor) * (-1) ** (i + k)
        coeffs.append(prod * QuasiRational(cof))
    try:
        return DiffOp(c.as_ratfun() for c in coeffs)
    except ValueError as exc:
        raise ValueError("Wronskian operator has non-rational coefficients") from exc


def _det(m):
    n = len(m)
    if n == 0:
        return RatFun.lift(1)
    if n == 1:
        return m[0][0]
    out = RatFun.lift(0)
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det(minor)
        out = out + term if j % 2 == 0 else out - term
    return out


def from_action(pairs: Sequence) -> DiffOp:
    """Recover p y'' + q y' + r y from three pairs (y_i, T[y_i]) by Cramer's rule."""
    if len(pairs) != 3:
        raise ValueError("need exactly three (y, T[y]) pairs")
    ys = [RatFun.lift(y) for y, _ in pairs]
    gs = [RatFun.lift(g) for _, g in pairs]
    rows = [[y.deriv().deriv(), y.deriv(), y] for y in ys]
    det = _det(rows)
    if det.is_zero():
        raise ValueError("the y_i are not independent enough to fix the operator")
    sol = []
    for col in range(3):
        m = [row[:col] + [g] + row[col + 1:] for row, g in zip(rows, gs)]
        sol.append(_det(m) / det)
    return DiffOp.from_pqr(*sol)


# ------------------------------------------------------------ Laurent blocks


@dataclass(frozen=True)
class LaurentBlock:
    """T_i[y] = z^i (p_i z^2 y'' + q_i z y' + r_i y) with z = x - b."""

    shift: int
    p: Fraction
    q: Fraction
    r: Fraction

    def symbol(self, j: int):
        """T_i[z^j] = symbol(j) * z^(i+j)."""
        return self.p * j * (j - 1) + self.q * j + self.r

    def annihilated_exponents(self, upto: int = 50) -> list[int]:
        return [j for j in range(upto + 1) if self.symbol(j) == 0]


@dataclass(frozen=True)
class LaurentDecomposition:
    point: Fraction
    blocks: tuple
    d: int  # leading block is T_{-d}

    def block(self, i: int) -> LaurentBlock:
        for blk in self.blocks:
            if blk.shift == i:
                return blk
        raise KeyError(i)


def pole_order(T: DiffOp, b) -> int:
    """Largest pole order among the coefficients at b (0 when regular)."""
    b = scalar(b)
    worst = 0
    for c in T.coeffs:
        if not c.is_zero():
            worst = max(worst, -c.valuation(b))
    return worst


def laurent_decompose(T: DiffOp, b, depth: int | None = None) -> LaurentDecomposition:
    """Degree-homogeneous expansion of a second-order operator about b."""
    if T.order > 2:
        raise ValueError("Laurent blocks are defined for order <= 2")
    b = scalar(b)
    shifts = []  # leading index contributed by each coefficient
    for k, c in enumerate((T.r, T.q, T.p)):
        if not c.is_zero():
            shifts.append(c.valuation(b) - k)
    if not shifts:
        return LaurentDecomposition(b, (), 0)
    lo = min(shifts)
    if depth is None:
        depth = max(c.num.degree for c in T.coeffs if not c.is_zero()) + 1
    hi = max(depth, lo)
    series = []
    for k, c in enumerate((T.r, T.q, T.p)):
        if c.is_zero():
            series.append((0, []))
            continue
        v, cs = c.laurent(b, hi - lo + 3)
        series.append((v, cs))

    def coeff_of(k, power):
        v, cs = series[k]
        idx = power - v
        return cs[idx] if 0 <= idx < len(cs) else Fraction(0)

    blocks = []
    for i in range(lo, hi + 1):
        blk = LaurentBlock(i, coeff_of(2, i + 2), coeff_of(1, i + 1), coeff_of(0, i))
        if blk.p or blk.q or blk.r:
            blocks.append(blk)
    return LaurentDecomposition(b, tuple(blocks), -lo)


# --------------------------------------------------------------- pole profile


@dataclass(frozen=True)
class PoleTerm:
    """c(x)/f(x) * (y' - a(x) y), with deg c, deg a < deg f.

    For a rational pole b the factor is x - b and c, a are constants.
    """

    factor: Poly
    c: Poly
    a: Poly

    @property
    def root(self):
        return -self.factor[0] if self.factor.degree == 1 else None


@dataclass(frozen=True)
class PoleProfile:
    p: Poly
    q_poly: Poly
    r_const: Fraction
    terms: tuple

    def pole_count(self) -> int:
        return sum(t.factor.degree for t in self.terms)


def poly_invmod(a: Poly, m: Poly) -> Poly:
    """Inverse of a modulo m (extended Euclid)."""
    r0, r1 = m, a % m
    s0, s1 = Poly(), Poly.const(1)
    while r1:
        quo, rem = r0.divmod(r1)
        r0, r1 = r1, rem
        s0, s1 = s1, s0 - quo * s1
    if r0.degree != 0:
        raise ArithmeticError("not invertible modulo m")
    return (s0 * (1 / r0.lead)) % m


def _split_linear(D: Poly):
    """Rational roots of a square-free D and the remaining cofactor."""
    roots = rational_roots(D) if D.is_rational() and D.degree > 0 else []
    rest = D
    for b in roots:
        rest = rest.exact_div(Poly((-b, 1)))
    return roots, rest.monic()


def _residue(f: RatFun, b) -> Fraction:
    """Residue at a simple pole b."""
    return f.num(b) / f.den.deriv()(b)


def pole_profile(T: DiffOp) -> PoleProfile:
    """Match T against p y'' + q y' + r y + sum c_i (y' - a_i y)/(x - b_i).

    p must be a polynomial of degree <= 2, the polynomial part of q of
    degree <= 1 and that of r constant; poles must be simple, r may only
    have poles where q does, and the residues of r must equal -a_i c_i.
    Raises NotInNormalForm otherwise.
    """
    if T.order > 2:
        raise NotInNormalForm("order exceeds 2")
    if not T.p.is_poly() or T.p.num.degree > 2:
        raise NotInNormalForm("leading coefficient is not a polynomial of degree <= 2")
    qp, qf = T.q.split_poly()
    rp, rf = T.r.split_poly()
    if qp.degree > 1 or rp.degree > 0:
        raise NotInNormalForm("degree-raising polynomial part")
    D = qf.den
    if rf.den.degree > 0:
        if rf.den.divmod(D)[1] or D.degree <= 0:
            raise NotInNormalForm("r has a pole where q has none")
    if D.degree <= 0:
        return PoleProfile(T.p.num, qp, rp[0], ())
    if poly_gcd(D, D.deriv()).degree > 0:
        raise NotInNormalForm("pole of order > 1 in q")
    roots, rest = _split_linear(D)
    terms = []
    for b in roots:
        c = _residue(qf, b)
        rr = _residue(rf, b) if rf.den.degree > 0 and rf.den(b) == 0 else Fraction(0)
        terms.append(PoleTerm(Poly((-b, 1)), Poly.const(c), Poly.const(-rr / c)))
    if rest.degree > 0:
        # the part of each proper fraction with denominator `rest`
        lin = D.exact_div(rest)
        qn = (qf.num * poly_invmod(lin, rest)) % rest
        rn = (rf.num * D.exact_div(rf.den) * poly_invmod(lin, rest)) % rest \
            if rf.den.degree > 0 else Poly()
        try:
            a = (-rn * poly_invmod(qn, rest)) % rest
        except ArithmeticError as exc:
            raise NotInNormalForm("y'-residue vanishes at part of the pole set") from exc
        terms.append(PoleTerm(rest, qn, a))
    return PoleProfile(T.p.num, qp, rp[0], tuple(terms))


# ----------------------------------------------------------------- SL form


INF = math.inf


@dataclass(frozen=True)
class SLForm:
    """-(P y')' + R y = -lambda W y on an interval (a, b)."""

    P: QuasiRational
    W: QuasiRational
    R: QuasiRational
    interval: tuple

    def interior_point(self) -> Fraction:
        a, b = self.interval
        if a == -INF and b == INF:
            return Fraction(0)
        if a == -INF:
            return Fraction(b) - 1
        if b == INF:
            return Fraction(a) + 1
        return (Fraction(a) + Fraction(b)) / 2

    def weight_positive(self) -> bool:
        """No zeros or poles of W inside the interval and W > 0 there."""
        a, b = self.interval
        R = self.W.prefactor
        for poly in (R.num, R.den):
            if poly.degree > 0 and count_real_roots(poly, a, b, closed=False):
                return False
        import mpmath
        with mpmath.workdps(30):
            return self.W.eval_mp(to_mp(self.interior_point())) > 0

    def moments_finite(self) -> bool:
        """Every polynomial moment of W converges on the interval."""
        a, b = self.interval
        for end, direction in ((a, -1), (b, 1)):
            if end in (INF, -INF):
                k, sgn, _ = self.W.growth_at_infinity(direction)
                if not (k >= 1 and sgn < 0):
                    return False
            elif self.W.order_at(end) <= -1:
                return False
        return True


def _vanishes(T: DiffOp, t) -> bool:
    return any(c.den(t) == 0 for c in T.coeffs) or T.p.num(t) == 0


def sl_form(T: DiffOp, interval) -> SLForm:
    """P = exp(int q/p), W = P/p, R = -r W, with W made positive on the interval."""
    if T.order != 2:
        raise ValueError("SL form needs a second-order operator")
    a, b = interval
    ratio = T.q / T.p
    poly_part, proper = ratio.split_poly()
    P = QuasiRational(1, poly_part.antideriv())
    if not proper.is_zero():
        D = proper.den
        if poly_gcd(D, D.deriv()).degree > 0:
            raise NonQuasiRationalWeight("q/p has a repeated pole")
        roots, rest = _split_linear(D)
        for root in roots:
            gamma = _residue(proper, root)
            # choose the branch that is positive on the interval
            sign = -1 if (b != INF and Fraction(b) <= root) else 1
            P = P * QuasiRational(1, None, [PowerFactor(root, sign, gamma)])
        if rest.degree > 0:
            lin = D.exact_div(rest)
            num = (proper.num * poly_invmod(lin, rest)) % rest
            # need num/rest = k rest'/rest for a rational k
            k = num.lead / rest.deriv().lead if num else Fraction(0)
            if num != rest.deriv() * k:
                raise NonQuasiRationalWeight("logarithmic part is not a rational multiple of log(f)")
            if Fraction(k).denominator != 1:
                raise NonQuasiRationalWeight("non-integer power of an irreducible factor")
            P = P * QuasiRational(RatFun.lift(rest) ** int(k))
    W = P / QuasiRational(T.p)
    sl = SLForm(P, W, -QuasiRational(T.r) * W, (a, b))
    import mpmath
    with mpmath.workdps(30):
        x0, val = sl.interior_point(), None
        # step off any zero or pole of W sitting on the default point
        for t in (x0, x0 + Fraction(1, 7), x0 - Fraction(1, 11), x0 + Fraction(2, 13)):
            if a < t < b and not _vanishes(T, t):
                val = W.eval_mp(to_mp(t))
                if val != 0:
                    break
        if val is not None and val < 0:
            P, W = -P, -W
            sl = SLForm(P, W, -QuasiRational(T.r) * W, (a, b))
    return sl


# -------------------------------------------------------------- identities


def check_factorization(T: DiffOp, A: DiffOp, B: DiffOp, lam0) -> bool:
    """T == B o A + lam0, coefficient-wise."""
    return T == B.compose(A) + scalar(lam0)


def check_intertwining(A: DiffOp, T: DiffOp, That: DiffOp) -> bool:
    """That o A == A o T."""
    return That.compose(A) == A.compose(T)


def green_symmetry_residual(T: DiffOp, f, g, sl: SLForm, precision: int = 50):
    """|int (T[f] g - T[g] f) W dx| over the SL interval."""
    import mpmath

    from .verify import QuadratureConfig, integrate

    f, g = RatFun.lift(f), RatFun.lift(g)
    if f == g:
        return mpmath.mpf(0)
    integrand = QuasiRational(T.apply(f) * g - T.apply(g) * f) * sl.W
    if integrand.is_zero():
        return mpmath.mpf(0)
    cfg = QuadratureConfig(decimal_digits=precision)
    val, _ = integrate(integrand, sl.interval, cfg)
    return abs(val)
