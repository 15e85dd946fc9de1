"""High-precision quadrature and orthogonality checks.

The integrator is a double-exponential rule: tanh-sinh on finite
intervals, exp-sinh on half-lines and sinh-sinh on the whole line.
Endpoint behaviour is read off the quasi-rational weight, so factors like
(1 - x)**alpha are evaluated from the exact distance to the endpoint
rather than from a rounded x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .exactalg import NEG_INF, Poly, QuasiRational, RatFun, count_real_roots, to_mp

INF = math.inf


class QuadratureError(ArithmeticError):
    pass


class Divergent(QuadratureError):
    """The integral does not converge."""


class Unconverged(QuadratureError):
    """Refinement stopped before the requested accuracy was reached."""


@dataclass(frozen=True)
class QuadratureConfig:
    decimal_digits: int = 50
    max_levels: int = 9
    guard_digits: int = 15

    @property
    def tolerance(self):
        return mpmath.mpf(10) ** (-(self.decimal_digits - 10))


def _is_inf(v) -> bool:
    return v in (INF, -INF)


# ------------------------------------------------------------ evaluation


class _WeightEvaluator:
    """Evaluates a quasi-rational function at DE nodes.

    Near a finite endpoint e the total exponent of (x - e) is split off and
    applied to the exactly known distance, which keeps full relative
    accuracy even when x itself rounds to e.
    """

    def __init__(self, f: QuasiRational, interval):
        self.f = f
        a, b = interval
        R = f.prefactor
        num, den = R.num, R.den
        self.ends = []
        for e, side in ((a, -1), (b, 1)):
            if _is_inf(e):
                continue
            e = Fraction(e)
            k = R.valuation(e)
            lin = Poly((-e, 1))
            if k > 0:
                num = num.exact_div(lin ** k)
            elif k < 0:
                den = den.exact_div(lin ** (-k))
            gamma = Fraction(0)
            for pf in f.powers:
                if pf.root == e:
                    gamma += pf.exponent
            # (x - e)**k = (side*dist)**k for the integer part
            sign = (-1) ** k if side == 1 else 1
            self.ends.append((side, k + gamma, sign))
        self.num = [to_mp(c) for c in num.coeffs]
        self.den = [to_mp(c) for c in den.coeffs]
        self.g = [to_mp(c) for c in f.exp_part.coeffs]
        self.powers = [(pf.sign, to_mp(pf.root), to_mp(pf.exponent)) for pf in f.powers
                       if all(_is_inf(e) or pf.root != Fraction(e) for e in (a, b))]

    @staticmethod
    def _horner(cs, t):
        acc = mpmath.mpf(0)
        for c in reversed(cs):
            acc = acc * t + c
        return acc

    def __call__(self, x, dist_a=None, dist_b=None):
        v = self._horner(self.num, x) / self._horner(self.den, x)
        if self.g:
            v *= mpmath.exp(self._horner(self.g, x))
        for sign, root, exp in self.powers:
            base = sign * (x - root)
            if base <= 0:
                raise Divergent(f"weight is not real at x={x}")
            v *= base ** exp
        for side, exponent, sgn in self.ends:
            d = dist_a if side == -1 else dist_b
            v *= sgn * d ** to_mp(exponent)
        return v


def _poly_values(p: Poly):
    cs = [to_mp(c) for c in p.coeffs]
    return lambda t: _WeightEvaluator._horner(cs, t)


# ---------------------------------------------------------------- nodes


def _nodes(interval, h, level_only_odd: bool, tmax):
    """Yield (x, dx/dt * h, dist_a, dist_b) for the DE rule with step h."""
    a, b = interval
    half_pi = mpmath.pi / 2
    k = 1 if level_only_odd else 0
    step = 2 if level_only_odd else 1
    j = k
    out = []
    t_neg, t_pos = tmax
    while True:
        t = j * h
        if t > max(t_neg, t_pos):
            break
        for s in ((1,) if j == 0 else (1, -1)):
            if t > (t_pos if s > 0 else t_neg):
                continue
            tt = s * t
            u = half_pi * mpmath.sinh(tt)
            du = half_pi * mpmath.cosh(tt)
            if not _is_inf(a) and not _is_inf(b):
                A, B = to_mp(Fraction(a)), to_mp(Fraction(b))
                L = B - A
                ea = 1 / (1 + mpmath.exp(-2 * u))  # (x - a)/L
                eb = 1 / (1 + mpmath.exp(2 * u))   # (b - x)/L
                x = A + L * ea if u <= 0 else B - L * eb
                w = L * du / (2 * mpmath.cosh(u) ** 2)
                out.append((x, w * h, L * ea, L * eb))
            elif _is_inf(a) and _is_inf(b):
                x = mpmath.sinh(u)
                out.append((x, mpmath.cosh(u) * du * h, None, None))
            elif _is_inf(b):
                d = mpmath.exp(u)
                out.append((to_mp(Fraction(a)) + d, d * du * h, d, None))
            else:
                d = mpmath.exp(u)
                out.append((to_mp(Fraction(b)) - d, d * du * h, None, d))
        j += step
    return out


def _tmax(interval, digits, f=None):
    # far enough that the DE-transformed integrand of any admissible
    # weight is far below 10^-digits
    # (endpoint exponents down to -0.95 are still resolved)
    a, b = interval
    near_end = mpmath.asinh(2 * digits * math.log(10) * 10 / math.pi)
    far = mpmath.asinh(2 / math.pi * math.log(40 * digits)) + 1.5

    def far_side(direction):
        if f is None:
            return far
        k, sgn, alg = f.growth_at_infinity(direction)
        if sgn < 0:
            return far
        # algebraic decay |x|^alg only: need u (-alg - 1) > digits log 10
        rate = max(float(-alg - 1), 0.05)
        return max(far, mpmath.asinh(2 / math.pi * digits * math.log(10) / rate) + 0.5)

    if not _is_inf(a) and not _is_inf(b):
        return near_end, near_end
    if _is_inf(a) and _is_inf(b):
        t = max(far_side(-1), far_side(1))
        return t, t
    return (near_end, far_side(1)) if _is_inf(b) else (far_side(-1), near_end)


# ----------------------------------------------------------- convergence


def check_convergence(f: QuasiRational, interval) -> None:
    """Raise Divergent unless f is integrable on the interval.

    Uses only exact data: interior zeros of the denominator (Sturm count),
    endpoint exponents and the behaviour at infinity.
    """
    a, b = interval
    den = f.prefactor.den
    if den.degree > 0 and count_real_roots(den, a, b, closed=False):
        raise Divergent("pole inside the interval")
    for pf in f.powers:
        inside = (_is_inf(a) or pf.root > Fraction(a)) and (_is_inf(b) or pf.root < Fraction(b))
        if inside:
            raise Divergent(f"branch point {pf.root} inside the interval")
        if not _is_inf(a) and pf.root <= Fraction(a) and pf.sign != 1 and pf.root != Fraction(a):
            raise Divergent("power factor is not real on the interval")
    for e, direction in ((a, -1), (b, 1)):
        if _is_inf(e):
            k, sgn, alg = f.growth_at_infinity(direction)
            if sgn > 0 or (sgn == 0 and alg >= -1):
                raise Divergent(f"no decay at {'+' if direction > 0 else '-'}infinity")
        elif f.order_at(e) <= -1:
            raise Divergent(f"non-integrable endpoint singularity at {e}")


# ----------------------------------------------------------- integration


def _gram_sums(nodes, wfun, vals):
    """Weighted sums over a node list for every pair of value functions.

    Also returns the sums of |w| y_i^2, the scale used for error control
    when a signed integrand cancels.
    """
    n = len(vals)
    sums = [[mpmath.mpf(0)] * n for _ in range(n)]
    absd = [mpmath.mpf(0)] * n
    for x, w, da, db in nodes:
        ww = w * wfun(x, da, db)
        if ww == 0:
            continue
        ys = [v(x) for v in vals]
        aw = abs(ww)
        for i in range(n):
            absd[i] += aw * ys[i] * ys[i]
            wi = ww * ys[i]
            row = sums[i]
            for j in range(i, n):
                row[j] += wi * ys[j]
    for i in range(n):
        for j in range(i):
            sums[i][j] = sums[j][i]
    return sums, absd


def weighted_gram(W: QuasiRational, polys: Sequence[Poly], interval, cfg: QuadratureConfig = QuadratureConfig()):
    """Matrix of int W p_i p_j over the interval, with an error estimate.

    All entries share the same nodes, so each polynomial is evaluated once
    per node.  Returns (matrix, estimated max absolute error).
    """
    check_convergence(W, interval)
    with mpmath.workdps(cfg.decimal_digits + cfg.guard_digits):
        wfun = _WeightEvaluator(W, interval)
        vals = [_poly_values(p) for p in polys] or [lambda t: mpmath.mpf(1)]
        tmax = _tmax(interval, cfg.decimal_digits + cfg.guard_digits, W)
        h = mpmath.mpf(1) / 2
        sums, absd = _gram_sums(_nodes(interval, h, False, tmax), wfun, vals)
        prev = None
        err = mpmath.inf
        for _ in range(cfg.max_levels):
            h /= 2
            extra, extra_abs = _gram_sums(_nodes(interval, h, True, tmax), wfun, vals)
            n = len(vals)
            new = [[sums[i][j] / 2 + extra[i][j] for j in range(n)] for i in range(n)]
            absd = [absd[i] / 2 + extra_abs[i] for i in range(n)]
            scale = max(absd) or mpmath.mpf(1)
            err = max(abs(new[i][j] - sums[i][j]) for i in range(n) for j in range(n))
            sums = new
            if prev is not None and err > 100 * prev and err > scale:
                raise Divergent("quadrature estimates grow under refinement")
            prev = err
            if err <= cfg.tolerance * scale * mpmath.mpf(10) ** -5:
                break
        else:
            if err > cfg.tolerance * scale:
                raise Unconverged(f"error estimate {mpmath.nstr(err, 5)} above tolerance")
        return sums, err


def integrate(f: QuasiRational, interval, cfg: QuadratureConfig = QuadratureConfig()):
    """Return (value, error estimate) for the integral of f over the interval."""
    f = QuasiRational.lift(f)
    if f.is_zero():
        return mpmath.mpf(0), mpmath.mpf(0)
    sums, err = weighted_gram(f, [Poly.const(1)], interval, cfg)
    return sums[0][0], err


# ---------------------------------------------------------- orthogonality


@dataclass
class OrthogonalityReport:
    family: str
    params: dict
    degrees: list
    gram: list
    max_off_diagonal: object
    norms: list
    moments: list = field(default_factory=list)

    def passed(self, digits: int = 50) -> bool:
        tol = mpmath.mpf(10) ** (-(digits - 15))
        return self.max_off_diagonal < tol and all(k > 0 for k in self.norms)


def orthogonality_report(system, cfg: QuadratureConfig = QuadratureConfig(), n_moments: int = 3):
    """Normalized Gram matrix of a generated system against its weight."""
    polys = [p for _, p, _ in system.items]
    degrees = [n for n, _, _ in system.items]
    moments_polys = [Poly.monomial(k) for k in range(n_moments)]
    raw, _ = weighted_gram(system.weight, polys, system.interval, cfg)
    mom, _ = weighted_gram(system.weight, [Poly.const(1)], system.interval, cfg)
    moments = [mom[0][0]]
    if n_moments > 1:
        m2, _ = weighted_gram(system.weight, moments_polys, system.interval, cfg)
        moments = [m2[0][k] for k in range(n_moments)]
    with mpmath.workdps(cfg.decimal_digits + cfg.guard_digits):
        norms = [raw[i][i] for i in range(len(polys))]
        gram = [[raw[i][j] / mpmath.sqrt(abs(norms[i]) * abs(norms[j])) for j in range(len(polys))]
                for i in range(len(polys))]
        off = max((abs(gram[i][j]) for i in range(len(polys)) for j in range(len(polys)) if i != j),
                  default=mpmath.mpf(0))
    return OrthogonalityReport(system.family, dict(system.params), degrees, gram, off, norms, moments)


def boundary_vanishing(sl, interval=None) -> bool:
    """Whether P = pW tends to 0 at both endpoints (exact exponent analysis)."""
    a, b = interval if interval is not None else sl.interval
    P = sl.P
    for e, direction in ((a, -1), (b, 1)):
        if _is_inf(e):
            k, sgn, alg = P.growth_at_infinity(direction)
            if not (sgn < 0 or (sgn == 0 and alg < 0)):
                return False
        elif P.order_at(e) <= 0:
            return False
    return True


def moment_zero(W: QuasiRational, interval, cfg: QuadratureConfig = QuadratureConfig()):
    return integrate(W, interval, cfg)[0]


__all__ = [
    "QuadratureConfig", "Divergent", "Unconverged", "QuadratureError", "integrate",
    "weighted_gram", "check_convergence", "OrthogonalityReport", "orthogonality_report",
    "boundary_vanishing", "moment_zero", "NEG_INF", "RatFun",
]
