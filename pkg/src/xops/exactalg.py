"""Exact scalars, polynomials, rational functions and quasi-rational functions.

Everything here is immutable.  Scalars are ``fractions.Fraction`` or
``QSqrt`` (an element of Q(sqrt d) for one fixed d).  Polynomials store
coefficients in ascending order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence, Union

import mpmath

NEG_INF = float("-inf")  # degree of the zero polynomial


class QSqrt:
    """a + b*sqrt(d) with a, b rational and d a square-free integer."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d=None):
        self.a = Fraction(a)
        self.b = Fraction(b)
        if d is None:
            raise ValueError("QSqrt needs an explicit radicand d")
        d = int(d)
        if d in (0, 1) or any(d % (k * k) == 0 for k in range(2, math.isqrt(abs(d)) + 1)):
            raise ValueError(f"radicand {d} is not square-free")
        self.d = d

    @classmethod
    def sqrt(cls, n) -> "Scalar":
        """Exact square root of a rational n, as a Fraction when possible."""
        n = Fraction(n)
        if n == 0:
            return Fraction(0)
        num, den = n.numerator * n.denominator, n.denominator
        # sqrt(p/q) = sqrt(p*q)/q; pull square factors out of p*q
        k, rest, f = 1, abs(num), 2
        while f * f <= rest:
            while rest % (f * f) == 0:
                rest //= f * f
                k *= f
            f += 1
        sign = -1 if num < 0 else 1
        if rest == 1 and sign > 0:
            return Fraction(k, den)
        return cls(0, Fraction(k, den), sign * rest)

    def _coerce(self, other):
        if isinstance(other, QSqrt):
            if other.d != self.d:
                raise ValueError(f"mixing Q(sqrt {self.d}) with Q(sqrt {other.d})")
            return other
        if isinstance(other, (int, Fraction)):
            return QSqrt(other, 0, self.d)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return _collapse(QSqrt(self.a + o.a, self.b + o.b, self.d))

    __radd__ = __add__

    def __neg__(self):
        return QSqrt(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return _collapse(QSqrt(self.a - o.a, self.b - o.b, self.d))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return _collapse(QSqrt(self.a * o.a + self.d * self.b * o.b,
                               self.a * o.b + self.b * o.a, self.d))

    __rmul__ = __mul__

    def inverse(self):
        norm = self.a * self.a - self.d * self.b * self.b
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt d)")
        return _collapse(QSqrt(self.a / norm, -self.b / norm, self.d))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Fraction(1)
        for _ in range(k):
            out = self * out
        return out

    def __eq__(self, other):
        if isinstance(other, QSqrt):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def to_mp(self):
        # complex for d < 0
        return _frac_mp(self.a) + _frac_mp(self.b) * mpmath.sqrt(self.d)

    def __repr__(self):
        return f"{self.a}+{self.b}*sqrt({self.d})"


Scalar = Union[Fraction, QSqrt]


def _collapse(v: QSqrt) -> Scalar:
    return v.a if v.b == 0 else v


def scalar(v) -> Scalar:
    """Coerce ints, Fractions, "p/q" strings and QSqrt to a Scalar."""
    if isinstance(v, QSqrt):
        return _collapse(v)
    if isinstance(v, float):
        raise TypeError("floats are not exact; pass a Fraction or a 'p/q' string")
    return Fraction(v)


def _frac_mp(v: Fraction):
    return mpmath.mpf(v.numerator) / v.denominator


def to_mp(v):
    """Convert an exact scalar to an mpmath number at the working precision."""
    if isinstance(v, QSqrt):
        return v.to_mp()
    v = Fraction(v)
    return _frac_mp(v)


def binom(t: Scalar, k: int) -> Scalar:
    """Generalised binomial coefficient C(t, k) for rational t."""
    if k < 0:
        return Fraction(0)
    out = Fraction(1)
    for i in range(k):
        out = out * (t - i) / (i + 1)
    return out


# ---------------------------------------------------------------- polynomials


class Poly:
    """Univariate polynomial with exact coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [scalar(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    @classmethod
    def x(cls) -> "Poly":
        return cls((0, 1))

    @classmethod
    def const(cls, c) -> "Poly":
        return cls((c,))

    @classmethod
    def monomial(cls, k: int, c=1) -> "Poly":
        return cls([0] * k + [c])

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> "Poly":
        out = cls.const(lead)
        for r in roots:
            out = out * cls((-scalar(r), 1))
        return out

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    @property
    def lead(self) -> Scalar:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __getitem__(self, k: int) -> Scalar:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction, QSqrt)):
            return self == Poly.const(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def _lift(self, other):
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction, QSqrt)):
            return Poly.const(other)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        n = max(len(self.coeffs), len(o.coeffs))
        return Poly(self[k] + o[k] for k in range(n))

    __radd__ = __add__

    def __neg__(self):
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, QSqrt)):
            return Poly(c * other for c in self.coeffs)
        if not isinstance(other, Poly):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out, base = Poly.const(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def divmod(self, other: "Poly"):
        """Euclidean division; returns (quotient, remainder)."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        inv = 1 / other.lead
        quot = [Fraction(0)] * max(len(rem) - dq, 0)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k] * inv
            if c == 0:
                continue
            quot[k - dq] = c
            for j, b in enumerate(other.coeffs):
                rem[k - dq + j] = rem[k - dq + j] - c * b
        return Poly(quot), Poly(rem[:dq] if dq > 0 else [])

    def __floordiv__(self, other):
        return self.divmod(self._lift(other))[0]

    def __mod__(self, other):
        return self.divmod(self._lift(other))[1]

    def exact_div(self, other: "Poly") -> "Poly":
        q, r = self.divmod(other)
        if r:
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def monic(self) -> "Poly":
        return self * (1 / self.lead) if self.coeffs else self

    def deriv(self, k: int = 1) -> "Poly":
        cs = self.coeffs
        for _ in range(k):
            cs = tuple(i * cs[i] for i in range(1, len(cs)))
        return Poly(cs)

    def antideriv(self) -> "Poly":
        return Poly([0] + [c / (i + 1) for i, c in enumerate(self.coeffs)])

    def __call__(self, t):
        if isinstance(t, Poly):
            return self.compose(t)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def eval_mp(self, t):
        acc = mpmath.mpf(0)
        for c in reversed(self.coeffs):
            acc = acc * t + to_mp(c)
        return acc

    def compose(self, inner: "Poly") -> "Poly":
        acc = Poly()
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc

    def taylor_at(self, b) -> "Poly":
        """Coefficients of self in powers of (x - b)."""
        return self.compose(Poly((b, 1)))

    def multiplicity(self, b) -> int:
        if self.is_zero():
            raise ValueError("multiplicity of a root of the zero polynomial")
        k, p = 0, self
        while p(b) == 0:
            p = p.exact_div(Poly((-b, 1)))
            k += 1
        return k

    def is_rational(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coeffs)

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            if mono and c == 1:
                terms.append(mono)
            elif mono and c == -1:
                terms.append("-" + mono)
            else:
                cs = f"({c})" if isinstance(c, QSqrt) or (mono and "/" in str(c)) else str(c)
                terms.append(cs + ("*" + mono if mono else ""))
        return " + ".join(reversed(terms)).replace("+ -", "- ")


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd (zero if both inputs vanish)."""
    while b:
        a, b = b, a % b
    return a.monic()


def squarefree_part(p: Poly) -> Poly:
    return p.exact_div(poly_gcd(p, p.deriv())).monic()


def rational_roots(p: Poly) -> list[Fraction]:
    """Distinct rational roots of a polynomial with rational coefficients."""
    if not p.is_rational():
        raise TypeError("rational_roots needs rational coefficients")
    if p.is_zero():
        raise ValueError("zero polynomial has every root")
    roots = []
    if p[0] == 0:
        roots.append(Fraction(0))
        p = p.exact_div(Poly.x() ** p.multiplicity(0))
    if p.degree <= 0:
        return roots
    den = reduce(math.lcm, (c.denominator for c in p.coeffs), 1)
    ints = [int(c * den) for c in p.coeffs]
    g = reduce(math.gcd, ints)
    ints = [c // g for c in ints]

    def divisors(n):
        n = abs(n)
        small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
        return sorted(set(small + [n // d for d in small]))

    for num in divisors(ints[0]):
        for dd in divisors(ints[-1]):
            for cand in (Fraction(num, dd), Fraction(-num, dd)):
                if cand not in roots and p(cand) == 0:
                    roots.append(cand)
    return sorted(roots)


def _sign_at(p: Poly, t) -> int:
    """Sign of p at t, where t may be +-inf."""
    if p.is_zero():
        return 0
    if t == math.inf:
        v = p.lead
    elif t == -math.inf:
        v = p.lead * (-1) ** p.degree
    else:
        v = p(Fraction(t))
    return (v > 0) - (v < 0)


def sturm_sequence(p: Poly) -> list[Poly]:
    seq = [p, p.deriv()]
    while seq[-1]:
        seq.append(-(seq[-2] % seq[-1]))
    return seq[:-1]


def count_real_roots(p: Poly, lo=-math.inf, hi=math.inf, closed: bool = True) -> int:
    """Number of distinct real roots in [lo, hi] (or (lo, hi) when closed=False).

    Uses a Sturm sequence on the square-free part, so the count is exact.
    """
    if not p.is_rational():
        raise TypeError("Sturm counting needs rational coefficients")
    if p.is_zero():
        raise ValueError("zero polynomial")
    if p.degree == 0 or lo > hi:
        return 0
    if lo == hi:
        return int(closed and p(Fraction(lo)) == 0)
    q = squarefree_part(p)
    seq = sturm_sequence(q)

    def variations(t):
        signs = [s for s in (_sign_at(f, t) for f in seq) if s]
        return sum(1 for u, v in zip(signs, signs[1:]) if u != v)

    # Sturm's theorem counts roots in the half-open interval (lo, hi]
    n = variations(lo) - variations(hi)
    lo_root = lo not in (math.inf, -math.inf) and q(Fraction(lo)) == 0
    hi_root = hi not in (math.inf, -math.inf) and q(Fraction(hi)) == 0
    if closed:
        n += lo_root
    else:
        n -= hi_root
    return n


# ---------------------------------------------------------- rational functions


class RatFun:
    """Reduced quotient num/den with den monic."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = num if isinstance(num, Poly) else Poly.const(num)
        den = Poly.const(1) if den is None else (den if isinstance(den, Poly) else Poly.const(den))
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            num, den = Poly(), Poly.const(1)
        else:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num, den = num.exact_div(g), den.exact_div(g)
            lead = den.lead
            if lead != 1:
                num, den = num * (1 / lead), den * (1 / lead)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RatFun is immutable")

    @staticmethod
    def lift(v) -> "RatFun":
        if isinstance(v, RatFun):
            return v
        if isinstance(v, Poly):
            return RatFun(v)
        if isinstance(v, (int, Fraction, QSqrt)):
            return RatFun(Poly.const(v))
        raise TypeError(f"cannot lift {type(v).__name__} to RatFun")

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def is_poly(self) -> bool:
        return self.den.degree == 0

    def as_poly(self) -> Poly:
        if not self.is_poly():
            raise ValueError(f"{self} is not a polynomial")
        return self.num

    def __eq__(self, other):
        try:
            o = RatFun.lift(other)
        except TypeError:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __add__(self, other):
        try:
            o = RatFun.lift(other)
        except TypeError:
            return NotImplemented
        if self.den == o.den:
            return RatFun(self.num + o.num, self.den)
        return RatFun(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den)

    def __sub__(self, other):
        try:
            o = RatFun.lift(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = RatFun.lift(other)
        except TypeError:
            return NotImplemented
        return RatFun(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFun":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFun(self.den, self.num)

    def __truediv__(self, other):
        try:
            o = RatFun.lift(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return RatFun.lift(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return RatFun(self.num ** k, self.den ** k)

    def deriv(self) -> "RatFun":
        return RatFun(self.num.deriv() * self.den - self.num * self.den.deriv(), self.den * self.den)

    def __call__(self, t):
        d = self.den(t)
        if d == 0:
            raise ZeroDivisionError(f"pole at {t}")
        return self.num(t) / d

    def eval_mp(self, t):
        return self.num.eval_mp(t) / self.den.eval_mp(t)

    def compose(self, inner: Poly) -> "RatFun":
        return RatFun(self.num.compose(inner), self.den.compose(inner))

    def valuation(self, b) -> int:
        """Order of vanishing at b (negative for a pole)."""
        if self.is_zero():
            raise ValueError("valuation of zero")
        return self.num.multiplicity(b) - self.den.multiplicity(b)

    def laurent(self, b, terms: int):
        """Laurent expansion in z = x - b.

        Returns (v, coeffs) with self = sum_k coeffs[k] z^(v+k), truncated
        after ``terms`` coefficients.
        """
        if self.is_zero():
            return 0, [Fraction(0)] * terms
        n = self.num.taylor_at(b)
        d = self.den.taylor_at(b)
        vn = next(k for k, c in enumerate(n.coeffs) if c != 0)
        vd = next(k for k, c in enumerate(d.coeffs) if c != 0)
        nn, dd = n.coeffs[vn:], d.coeffs[vd:]
        out = []
        for k in range(terms):
            acc = nn[k] if k < len(nn) else Fraction(0)
            for j in range(1, min(k, len(dd) - 1) + 1):
                acc = acc - dd[j] * out[k - j]
            out.append(acc / dd[0])
        return vn - vd, out

    def split_poly(self):
        """(polynomial part, proper remainder)."""
        q, r = self.num.divmod(self.den)
        return q, RatFun(r, self.den)

    def __repr__(self):
        return f"RatFun({self})"

    def __str__(self):
        if self.is_poly():
            return str(self.num)
        return f"({self.num})/({self.den})"


# ------------------------------------------------------ quasi-rational functions


@dataclass(frozen=True)
class PowerFactor:
    """(sign*(x - root))**exponent with sign in {+1, -1}.

    The sign lets (1 - x)**alpha be written without complex branches.
    """

    root: Fraction
    sign: int
    exponent: Fraction

    def base(self) -> Poly:
        return Poly((-self.sign * self.root, self.sign))


class QuasiRational:
    """R(x) * exp(g(x)) * prod (s_i (x - b_i))**gamma_i.

    Canonical form: R reduced, every gamma_i in the open interval (0, 1) and
    integral parts folded into R, factors sorted by root.  With that,
    structural equality is mathematical equality.
    """

    __slots__ = ("prefactor", "exp_part", "powers")

    def __init__(self, prefactor=1, exp_part: Poly | None = None,
                 powers: Iterable[PowerFactor] = ()):
        R = RatFun.lift(prefactor)
        g = exp_part if exp_part is not None else Poly()
        merged: dict[Fraction, PowerFactor] = {}
        for f in powers:
            root = Fraction(f.root)
            if f.sign not in (1, -1):
                raise ValueError("power-factor sign must be +1 or -1")
            old = merged.get(root)
            if old is None:
                merged[root] = PowerFactor(root, f.sign, Fraction(f.exponent))
                continue
            exp = Fraction(f.exponent)
            if old.sign != f.sign:
                # (x-b) = -(b-x): only integer exponents can switch branch
                if exp.denominator != 1:
                    raise ValueError(f"incompatible branches for the root {root}")
                R = R * RatFun.lift(Poly.const(-1)) ** int(exp)
            merged[root] = PowerFactor(root, old.sign, old.exponent + exp)
        canon = []
        for root in sorted(merged):
            f = merged[root]
            k = math.floor(f.exponent)
            if k:
                R = R * RatFun.lift(f.base()) ** k
            frac = f.exponent - k
            if frac:
                canon.append(PowerFactor(root, f.sign, frac))
        if R.is_zero():
            g, canon = Poly(), []
        object.__setattr__(self, "prefactor", R)
        object.__setattr__(self, "exp_part", g)
        object.__setattr__(self, "powers", tuple(canon))

    def __setattr__(self, name, value):
        raise AttributeError("QuasiRational is immutable")

    @staticmethod
    def lift(v) -> "QuasiRational":
        if isinstance(v, QuasiRational):
            return v
        return QuasiRational(RatFun.lift(v))

    @classmethod
    def power(cls, root, exponent, sign: int = 1) -> "QuasiRational":
        """(sign*(x - root))**exponent."""
        return cls(1, None, [PowerFactor(Fraction(root), sign, Fraction(exponent))])

    @classmethod
    def exp(cls, g: Poly) -> "QuasiRational":
        return cls(1, g)

    def is_zero(self) -> bool:
        return self.prefactor.is_zero()

    def is_rational(self) -> bool:
        return self.exp_part.degree <= 0 and self.exp_part[0] == 0 and not self.powers

    def as_ratfun(self) -> RatFun:
        if not self.is_rational():
            raise ValueError(f"{self} is not a rational function")
        return self.prefactor

    def __eq__(self, other):
        try:
            o = QuasiRational.lift(other)
        except TypeError:
            return NotImplemented
        return (self.prefactor, self.exp_part, self.powers) == (o.prefactor, o.exp_part, o.powers)

    def __hash__(self):
        return hash((self.prefactor, self.exp_part, self.powers))

    def __mul__(self, other):
        try:
            o = QuasiRational.lift(other)
        except TypeError:
            return NotImplemented
        return QuasiRational(self.prefactor * o.prefactor, self.exp_part + o.exp_part,
                             self.powers + o.powers)

    __rmul__ = __mul__

    def inverse(self) -> "QuasiRational":
        return QuasiRational(self.prefactor.inverse(), -self.exp_part,
                             [PowerFactor(f.root, f.sign, -f.exponent) for f in self.powers])

    def __truediv__(self, other):
        return self * QuasiRational.lift(other).inverse()

    def __rtruediv__(self, other):
        return QuasiRational.lift(other) * self.inverse()

    def __neg__(self):
        return QuasiRational(-self.prefactor, self.exp_part, self.powers)

    def __pow__(self, k: int):
        return QuasiRational(self.prefactor ** k, self.exp_part * k,
                             [PowerFactor(f.root, f.sign, f.exponent * k) for f in self.powers])

    def same_kind(self, other: "QuasiRational") -> bool:
        """True when self/other is rational, so the two can be added."""
        return (self / other).is_rational()

    def __add__(self, other):
        o = QuasiRational.lift(other)
        if o.is_zero():
            return self
        if self.is_zero():
            return o
        ratio = (o / self)
        if not ratio.is_rational():
            raise ValueError("sum of quasi-rational functions of different kinds")
        return self * (1 + ratio.prefactor)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-QuasiRational.lift(other))

    def log_derivative(self) -> RatFun:
        if self.is_zero():
            raise ZeroDivisionError("log-derivative of zero")
        R = self.prefactor
        out = RatFun(R.num.deriv(), R.num) - RatFun(R.den.deriv(), R.den) + self.exp_part.deriv()
        for f in self.powers:
            out = out + RatFun(Poly.const(f.exponent), Poly((-f.root, 1)))
        return out

    def deriv(self) -> "QuasiRational":
        if self.is_zero():
            return self
        return QuasiRational(self.prefactor * self.log_derivative(), self.exp_part, self.powers)

    def eval_mp(self, t):
        """Numerical value at an mpmath point t."""
        v = self.prefactor.eval_mp(t)
        if self.exp_part:
            v *= mpmath.exp(self.exp_part.eval_mp(t))
        for f in self.powers:
            base = f.sign * (t - to_mp(f.root))
            if base < 0:
                raise ValueError(f"branch cut: base {base} < 0 at x={t}")
            v *= base ** to_mp(f.exponent)
        return v

    def order_at(self, b) -> Fraction:
        """Total exponent of (x - b) at a finite real point b."""
        b = Fraction(b)
        out = Fraction(self.prefactor.valuation(b))
        for f in self.powers:
            if f.root == b:
                out += f.exponent
        return out

    def growth_at_infinity(self, direction: int = 1):
        """(exp-degree, sign of exp leading term, algebraic degree) as x -> direction*inf.

        The exp data describe exp(g) with g ~ c x^k; the algebraic degree is
        deg num - deg den + sum of power exponents.
        """
        g = self.exp_part
        k = g.degree if g.degree != NEG_INF else 0
        c = g.lead * (direction ** k) if k > 0 else Fraction(0)
        sgn = (c > 0) - (c < 0)
        alg = Fraction(self.prefactor.num.degree - self.prefactor.den.degree)
        alg += sum((f.exponent for f in self.powers), Fraction(0))
        return (k if sgn else 0), sgn, alg

    def __repr__(self):
        return f"QuasiRational({self})"

    def __str__(self):
        parts = [f"[{self.prefactor}]"]
        if self.exp_part:
            parts.append(f"exp({self.exp_part})")
        for f in self.powers:
            base = f"(x - {f.root})" if f.sign == 1 else f"({f.root} - x)"
            parts.append(f"{base}^({f.exponent})")
        return "*".join(parts)


def log_derivative(f: QuasiRational) -> RatFun:
    return QuasiRational.lift(f).log_derivative()


def _det(m: Sequence[Sequence[RatFun]]) -> RatFun:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    out = RatFun.lift(0)
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det(minor)
        out = out + term if j % 2 == 0 else out - term
    return out


def derivative_factors(f: QuasiRational, upto: int) -> list[RatFun]:
    """[Q_0, ..., Q_upto] with f^(m) = f * Q_m."""
    L = f.log_derivative()
    qs = [RatFun.lift(1)]
    for _ in range(upto):
        qs.append(qs[-1].deriv() + qs[-1] * L)
    return qs


def wronskian(fs: Sequence) -> QuasiRational:
    """Wronskian det[f_j^(i)] of up to three quasi-rational functions.

    Each f_j^(i) is written as f_j * Q_ij with Q_ij rational, so the
    determinant of the rational matrix carries everything except the
    product of the f_j.
    """
    fs = [QuasiRational.lift(f) for f in fs]
    if not 1 <= len(fs) <= 3:
        raise ValueError("wronskian supports 1 to 3 functions")
    if any(f.is_zero() for f in fs):
        return QuasiRational(0)
    n = len(fs)
    cols = [derivative_factors(f, n - 1) for f in fs]
    mat = [[cols[j][i] for j in range(n)] for i in range(n)]
    prod = reduce(lambda a, b: a * b, fs)
    return prod * QuasiRational(_det(mat))


# ---------------------------------------------------- classical polynomials


@dataclass(frozen=True)
class ClassicalParams:
    family: str  # "hermite" | "laguerre" | "jacobi"
    alpha: Fraction | None = None
    beta: Fraction | None = None

    def __post_init__(self):
        fam = self.family.lower()
        if fam not in ("hermite", "laguerre", "jacobi"):
            raise ValueError(f"unknown classical family {self.family!r}")
        object.__setattr__(self, "family", fam)
        if fam in ("laguerre", "jacobi"):
            if self.alpha is None:
                raise ValueError(f"{fam} needs alpha")
            object.__setattr__(self, "alpha", scalar(self.alpha))
        if fam == "jacobi":
            if self.beta is None:
                raise ValueError("jacobi needs beta")
            object.__setattr__(self, "beta", scalar(self.beta))

    @classmethod
    def hermite(cls):
        return cls("hermite")

    @classmethod
    def laguerre(cls, alpha):
        return cls("laguerre", alpha)

    @classmethod
    def jacobi(cls, alpha, beta):
        return cls("jacobi", alpha, beta)


def hermite(n: int) -> Poly:
    """Physicists' Hermite polynomial H_n; zero for n < 0."""
    if n < 0:
        return Poly()
    prev, cur = Poly(), Poly.const(1)
    x2 = Poly((0, 2))
    for k in range(n):
        prev, cur = cur, x2 * cur - prev * (2 * k)
    return cur


def laguerre(n: int, alpha) -> Poly:
    """L_n^(alpha)(x) = sum_k (-1)^k C(n+alpha, n-k) x^k / k!; zero for n < 0."""
    if n < 0:
        return Poly()
    alpha = scalar(alpha)
    return Poly((-1) ** k * binom(n + alpha, n - k) / math.factorial(k) for k in range(n + 1))


def jacobi(n: int, alpha, beta) -> Poly:
    """P_n^(alpha,beta) from its explicit binomial sum; zero for n < 0."""
    if n < 0:
        return Poly()
    alpha, beta = scalar(alpha), scalar(beta)
    xm = Poly((Fraction(-1, 2), Fraction(1, 2)))
    xp = Poly((Fraction(1, 2), Fraction(1, 2)))
    out = Poly()
    for s in range(n + 1):
        c = binom(n + alpha, n - s) * binom(n + beta, s)
        if c:
            out = out + xm ** s * xp ** (n - s) * c
    return out


def classical_poly(params: ClassicalParams, n: int) -> Poly:
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if params.family == "hermite":
        return hermite(n)
    if params.family == "laguerre":
        return laguerre(n, params.alpha)
    return jacobi(n, params.alpha, params.beta)


def hermite_imag(n: int) -> Poly:
    """Real polynomial proportional to H_n(i x): H_n(ix) for even n, H_n(ix)/i for odd n."""
    h = hermite(n)
    cs = []
    for k, c in enumerate(h.coeffs):
        # i^k, divided by i when n is odd (k and n share parity)
        e = k - (n % 2)
        cs.append(c * (-1) ** (e // 2) if c else c)
    return Poly(cs)


def _neg_x(p: Poly) -> Poly:
    return p.compose(Poly((0, -1)))


def quasi_eigenfunction(params: ClassicalParams, kind: int, n: int):
    """Quasi-rational eigenfunction of a classical operator and its eigenvalue.

    Hermite: kinds 1, 2.  Laguerre and Jacobi: kinds 1-4.  Eigenvalues are
    for y'' - 2xy', xy'' + (a+1-x)y' and (1-x^2)y'' + (b-a-(a+b+2)x)y'.
    """
    if n < 0:
        raise ValueError("index must be nonnegative")
    fam = params.family
    x = Poly.x()
    if fam == "hermite":
        if kind == 1:
            return QuasiRational(hermite(n)), Fraction(-2 * n)
        if kind == 2:
            return QuasiRational(hermite_imag(n), x * x), Fraction(2 * (n + 1))
        raise ValueError("Hermite eigenfunction kind must be 1 or 2")
    a = params.alpha
    if fam == "laguerre":
        if kind == 1:
            return QuasiRational(laguerre(n, a)), Fraction(-n)
        if kind == 2:
            return QuasiRational.power(0, -a) * laguerre(n, -a), a - n
        if kind == 3:
            return QuasiRational(_neg_x(laguerre(n, a)), x), a + n + 1
        if kind == 4:
            return QuasiRational(_neg_x(laguerre(n, -a)), x) * QuasiRational.power(0, -a), Fraction(n + 1)
        raise ValueError("Laguerre eigenfunction kind must be 1..4")
    b = params.beta
    one_minus = lambda e: QuasiRational.power(1, e, sign=-1)
    one_plus = lambda e: QuasiRational.power(-1, e)
    if kind == 1:
        return QuasiRational(jacobi(n, a, b)), -n * (n + a + b + 1)
    if kind == 2:
        return one_plus(-b) * jacobi(n, a, -b), (b - n) * (n + a + 1)
    if kind == 3:
        return one_minus(-a) * jacobi(n, -a, b), (a - n) * (n + b + 1)
    if kind == 4:
        return one_minus(-a) * one_plus(-b) * jacobi(n, -a, -b), (n + 1) * (a + b - n)
    raise ValueError("Jacobi eigenfunction kind must be 1..4")


# ------------------------------------------------------------ linear algebra


def rref(rows: Sequence[Sequence]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form over exact scalars; returns (matrix, pivot columns)."""
    m = [[scalar(v) for v in row] for row in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[list]:
    """Basis of {v : M v = 0}, one vector per free column, in column order."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    m, pivots = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][f]
        basis.append(v)
    return basis
