"""Algebraic Darboux transformations.

Given a second-order operator T, a quasi-rational eigenfunction phi of T
and a rational gauge b, the factorization is

    A[y] = b (y' - w y),  w = phi'/phi
    B[y] = bh (y' - wh y), bh = p/b, wh = -w - q/p + b'/b
    T = B A + lam0,       That = A B + lam0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .diffop import DiffOp, first_order, sl_form
from .exactalg import Poly, QSqrt, QuasiRational, RatFun, rank, scalar
from .flags import FlagSpec, degree_regular_basis, membership
from .verify import QuadratureConfig, check_convergence, integrate, Divergent


class NotAnEigenfunction(ValueError):
    pass


@dataclass(frozen=True)
class Factorization:
    T: DiffOp
    A: DiffOp
    B: DiffOp
    lam0: object
    phi: QuasiRational
    b: RatFun
    That: DiffOp

    @property
    def bhat(self) -> RatFun:
        return self.B.coeff(1)

    def identities_hold(self) -> bool:
        lam = self.lam0
        return (self.T == self.B.compose(self.A) + lam
                and self.That == self.A.compose(self.B) + lam)


def eigenvalue_of(T: DiffOp, phi) -> object:
    """lam with T[phi] = lam phi, or NotAnEigenfunction."""
    phi = QuasiRational.lift(phi)
    if phi.is_zero():
        raise NotAnEigenfunction("zero function")
    ratio = T.apply_quasi(phi) / phi
    if not ratio.is_rational():
        raise NotAnEigenfunction("T[phi]/phi is not rational")
    r = ratio.as_ratfun()
    if not (r.is_poly() and r.num.degree <= 0):
        raise NotAnEigenfunction(f"T[phi]/phi = {r} is not constant")
    return r.num[0]


def default_gauge(phi) -> RatFun:
    """Monic denominator of w = phi'/phi."""
    w = QuasiRational.lift(phi).log_derivative()
    return RatFun(w.den)


def partner(T: DiffOp, phi, b=None) -> Factorization:
    if T.order != 2:
        raise ValueError("partner needs a second-order operator")
    phi = QuasiRational.lift(phi)
    lam = eigenvalue_of(T, phi)
    b = default_gauge(phi) if b is None else RatFun.lift(b)
    if b.is_zero():
        raise ValueError("the gauge b must be nonzero")
    w = phi.log_derivative()
    p, q = T.p, T.q
    A = first_order(b, w)
    bh = p / b
    wh = -w - q / p + b.deriv() / b
    B = first_order(bh, wh)
    if T != B.compose(A) + lam:
        # cannot happen for a genuine eigenfunction; kept as a guard
        raise ArithmeticError("factorization identity failed")
    return Factorization(T, A, B, lam, phi, b, A.compose(B) + lam)


def dual_data(fact: Factorization, W) -> tuple:
    """(What, phihat) with What/bh = W/b and bh*phihat = 1/(W phi)."""
    W = QuasiRational.lift(W)
    b = QuasiRational(fact.b)
    bh = QuasiRational(fact.bhat)
    What = W * bh / b
    phihat = (bh * W * fact.phi).inverse()
    return What, phihat


def adjoint_relation_residual(fact: Factorization, f, g, W, What, interval, precision: int = 50):
    """|int A[f] g What + int B[g] f W - [P f g / b]| over the interval.

    The boundary term is taken as zero when P f g / b vanishes at both
    endpoints by exponent analysis; otherwise the residual is reported as
    infinite, since the boundary limit is not available in closed form.
    """
    f, g = RatFun.lift(f), RatFun.lift(g)
    if f.is_zero() or g.is_zero():
        return mpmath.mpf(0)
    W, What = QuasiRational.lift(W), QuasiRational.lift(What)
    P = QuasiRational(fact.T.p) * W
    bnd = P * QuasiRational(f * g / fact.b)
    from .verify import _is_inf
    a, b = interval
    for e, direction in ((a, -1), (b, 1)):
        if _is_inf(e):
            k, sgn, alg = bnd.growth_at_infinity(direction)
            if not (sgn < 0 or (sgn == 0 and alg < 0)):
                return mpmath.inf
        elif bnd.order_at(e) <= 0:
            return mpmath.inf
    cfg = QuadratureConfig(decimal_digits=precision)
    i1 = QuasiRational(fact.A.apply(f) * g) * What
    i2 = QuasiRational(fact.B.apply(g) * f) * W
    try:
        v1 = integrate(i1, interval, cfg)[0]
        v2 = integrate(i2, interval, cfg)[0]
    except Divergent:
        return mpmath.inf
    with mpmath.workdps(precision + 10):
        return abs(v1 + v2)


# ----------------------------------------------------- explicit intertwiners


@dataclass
class Intertwiner:
    case: str
    A: DiffOp
    B: DiffOp | None
    source: object
    target: object
    kernel: Poly | None = None
    notes: str = ""


def explicit_intertwiners(case: str, **params) -> Intertwiner:
    """Explicit intertwiners connecting each X1/X2 flag to a simpler flag.

    Cases: x1, e11-23, e11-13, e11-03, e11-12, e2b, e2c, e2a.
    """
    z = RatFun(Poly.x())
    P = lambda v: scalar(v)
    if case == "x1":
        a = P(params.get("a", 1))
        A = DiffOp((-a / z, 1 / z))
        B = DiffOp((-(a * z + 1), z))
        return Intertwiner(case, A, B, FlagSpec.e1(a), FlagSpec.standard())
    if case == "e11-23":
        a0, a1 = P(params["a0"]), P(params["a1"])
        if a0 * a1 + a1 - a0 == 0:
            raise ValueError("needs a0*a1 + a1 - a0 != 0")
        A = DiffOp((-a1 * a0 / z + a0 * a1 / (z - 1), a1 / z - a0 / (z - 1)))
        Bp = z * (z - 1) * (2 - a1 + (a1 - a0 - 4) * z)
        Br = (a0 * a1 + a1 - a0) * z * z + (2 - a1) * a0 * z + 2 - a1
        return Intertwiner(case, A, DiffOp((Br, Bp)), FlagSpec.e11(a0, a1), FlagSpec.standard())
    if case == "e11-13":
        a0 = P(params["a0"])
        if a0 in (0, -1, -2):
            raise ValueError("a0 must avoid 0, -1, -2")
        a1 = a0 / (1 + a0)
        u = Poly((1, a0))
        # a1 W[y, u] / (z(1 - z)) = a1 (a0 y - u y') / (z(1 - z))
        den = z * (1 - z)
        A = DiffOp((a1 * a0 / den, -a1 * RatFun(u) / den))
        # modulus from the relation A[y]'(-1/a0) = a1 (2 + a0) A[y](-1/a0)
        target = FlagSpec.e1(a1 * (2 + a0), -1 / a0)
        return Intertwiner(case, A, None, FlagSpec.e11(a0, a1), target, u)
    if case == "e11-03":
        A = DiffOp((0, 1 / (z * (z - 1))))
        return Intertwiner(case, A, None, FlagSpec.e11(0, 0), FlagSpec.standard(), Poly.const(1))
    if case == "e11-12":
        u = Poly((-1, 2))
        den = z * (1 - z)
        a1 = Fraction(2)
        A = DiffOp((a1 * 2 / den, -a1 * RatFun(u) / den))
        return Intertwiner(case, A, None, FlagSpec.e11(-2, 2), FlagSpec.e1(0, Fraction(1, 2)), u,
                           "target read as the X1 flag y'(1/2) = 0")
    if case == "e2b":
        a = P(params.get("a", 1))
        sign = params.get("sign", 1)
        K = QSqrt.sqrt(a * a + 3 * sign)
        A = DiffOp((-a / z, 1 / z + K))
        B = DiffOp((-(3 + (a - 2 * K) * z), z * (1 - K * z)))
        source = FlagSpec.e2(a, params.get("a03", sign * a), a)
        return Intertwiner(case, A, B, source, FlagSpec.e1(a + K), None)
    if case == "e2c":
        a = P(params.get("a", 2))
        if params.get("half_coefficient"):
            # variant with (a-1)/2 on the y' term and target y'(0) = y(0);
            # this pair does not factor the E2c operator
            A = DiffOp((-a / z, 1 / z + (a - 1) / 2))
            target = FlagSpec.e1(1)
        else:
            A = DiffOp((-a / z, 1 / z + (a - 1)))
            target = FlagSpec.e1((a + 1) / 2)
        B = DiffOp((-(3 + (2 * a - 1) * z), z * (1 + (a - 1) * z)))
        return Intertwiner(case, A, B, FlagSpec.e2(a, -a * (a + 1) / 6, 1), target)
    if case == "e2a":
        a01, a23 = P(params.get("a01", 1)), P(params.get("a23", 2))
        A = DiffOp((-a01 / z, 1 / z + a01))
        if a01 != 0:
            target = FlagSpec.e11((a01 + 3 * a23) / 2, a01, 0, -1 / a01)
        else:
            target = FlagSpec.e1(3 * a23 / 2)
        return Intertwiner(case, A, None, FlagSpec.e2(a01, 0, a23), target, Poly((1, a01)))
    raise KeyError(case)


def _flag_dim_upto(flag, deg: int) -> int:
    basis = degree_regular_basis(flag, deg + 3)
    return sum(1 for p in basis if p.degree <= deg)


def check_intertwiner(it: Intertwiner, depth: int = 8) -> dict:
    """Machine-check the mapping claims of an explicit intertwiner.

    Returns a dict of named boolean results.
    """
    src = degree_regular_basis(it.source, depth + 1)
    tgt_basis = degree_regular_basis(it.target, depth + 4)
    tgt_deg = [p.degree for p in tgt_basis]
    shift = 1 if it.kernel is not None else 0
    out = {}
    if it.kernel is not None:
        out["kernel annihilated"] = it.A.apply(it.kernel).is_zero()
    ok = True
    images = []
    for k, u in enumerate(src[:depth], start=1):
        img = it.A.apply(u)
        if not img.is_poly():
            ok = False
            break
        v = img.as_poly()
        images.append(v)
        idx = k - shift
        if idx == 0:
            ok &= v.is_zero()
            continue
        ok &= membership(it.target, v) and v.degree <= tgt_deg[idx - 1]
    out["A maps source into target"] = bool(ok)
    nonzero = [v for v in images if v]
    if nonzero:
        top = max(v.degree for v in nonzero)
        cols = top + 1
        r = rank([[v[i] for i in range(cols)] for v in nonzero])
        out["images span target"] = r == len(nonzero) and r == _flag_dim_upto(it.target, top)
    if it.B is not None:
        okb = True
        for k, v in enumerate(tgt_basis[:depth], start=1):
            img = it.B.apply(v)
            if not img.is_poly():
                okb = False
                break
            w = img.as_poly()
            okb &= membership(it.source, w) and w.degree <= src[k - 1 + shift].degree + 1
        out["B maps target into source"] = bool(okb)
    return out


def step_count(flag_or_label) -> int:
    """Number of Darboux steps linking the flag to the standard flag."""
    from .flags import classify_x2_flag
    if isinstance(flag_or_label, str):
        label = flag_or_label
    elif flag_or_label.variant == "E1":
        return 1
    else:
        label = classify_x2_flag(flag_or_label).label
    if label in ("E1", "E11_23", "E11_03"):
        return 1
    if label in ("E11_13", "E11_12", "E2a_13", "E2a_03", "E2a_12", "E2a_02", "E2b_23", "E2c_23"):
        return 2
    raise ValueError(f"unclassified flag {label}")


# ------------------------------------------------------------------ chains


@dataclass
class DarbouxStep:
    kind: str  # "isospectral", "state-deleting" or "state-adding"
    fact: Factorization
    W: QuasiRational
    What: QuasiRational
    source_basis: list
    target_basis: list

    def dual_identity_holds(self) -> bool:
        return self.What / QuasiRational(self.fact.bhat) == self.W / QuasiRational(self.fact.b)

    def pattern_holds(self, depth: int = 8) -> bool:
        """Index-shift pattern of the step on the first `depth` basis elements."""
        S, F = self.source_basis, self.target_basis
        A, B = self.fact.A, self.fact.B
        depth = min(depth, len(S) - 1, len(F) - 1)
        if self.kind == "state-adding" and not B.apply(F[0]).is_zero():
            return False
        if self.kind == "state-deleting" and not A.apply(S[0]).is_zero():
            return False
        for i in range(1, depth + 1):
            if self.kind == "isospectral":
                ok = _in_prefix(A.apply(S[i - 1]), F, i) and _in_prefix(B.apply(F[i - 1]), S, i)
            elif self.kind == "state-adding":
                ok = _in_prefix(A.apply(S[i - 1]), F, i + 1) and _in_prefix(B.apply(F[i]), S, i)
            else:
                ok = _in_prefix(A.apply(S[i]), F, i) and _in_prefix(B.apply(F[i - 1]), S, i + 1)
            if not ok:
                return False
        return True


@dataclass
class Chain:
    family: str
    steps: list
    interval: tuple

    @property
    def composed_A(self) -> DiffOp:
        op = DiffOp.identity()
        for s in self.steps:
            op = s.fact.A.compose(op)
        return op

    @property
    def terminal(self) -> DiffOp:
        return self.steps[-1].fact.That

    @property
    def initial(self) -> DiffOp:
        return self.steps[0].fact.T


def _in_prefix(v: RatFun, basis, k: int) -> bool:
    """v is a polynomial in the span of basis[:k]."""
    if not v.is_poly():
        return False
    v = v.as_poly()
    if v.is_zero():
        return True
    prefix = basis[:k]
    top = max([v.degree] + [p.degree for p in prefix]) + 1
    rows = [[p[j] for j in range(top)] for p in prefix]
    return rank(rows + [[v[j] for j in range(top)]]) == rank(rows)


def is_classical(T: DiffOp) -> bool:
    """Bochner form: p in P2, q in P1, r constant."""
    return (T.order == 2 and T.is_polynomial() and T.p.num.degree <= 2
            and T.q.num.degree <= 1 and T.r.num.degree <= 0)


def _step_kind(fact: Factorization, W, source_basis) -> tuple:
    """Classify a step and produce a basis of the target flag."""
    images = [fact.A.apply(u) for u in source_basis]
    if images and images[0].is_zero():
        return "state-deleting", [v.as_poly() for v in images[1:]]
    What, phihat = dual_data(fact, W)
    if phihat.is_rational() and phihat.as_ratfun().is_poly():
        k = phihat.as_ratfun().as_poly()
        basis = sorted([k] + [v.as_poly() for v in images], key=lambda p: p.degree)
        return "state-adding", basis
    return "isospectral", [v.as_poly() for v in images]


def build_chain(family, params=None, depth: int = 8) -> Chain:
    """Darboux chain from the classical operator to the family's operator.

    `family` supplies chain data: the classical operator and weight, the
    factorization eigenfunctions, and the family's polynomial-producing
    operator, which fixes the gauge of the last step.
    """
    data = family.chain_data(params)
    T, W = data.T, data.W
    basis = [Poly.monomial(k) for k in range(depth + 2)]
    steps = []
    prev_A = DiffOp.identity()
    phis = list(data.phis)
    for i, phi in enumerate(phis):
        moved = prev_A.apply_quasi(phi) if i else phi
        if i == len(phis) - 1:
            # fix the gauge so that the composed operator is the family's
            # B: lead(B) = b * lead(previous composite)
            b = data.B.coeff(i + 1) / prev_A.coeff(i)
        else:
            b = data.gauges[i] if data.gauges else None
        fact = partner(T, moved, b)
        kind, tbasis = _step_kind(fact, W, basis)
        What, _ = dual_data(fact, W)
        steps.append(DarbouxStep(kind, fact, W, What, basis, tbasis))
        prev_A = fact.A.compose(prev_A)
        T, W, basis = fact.That, What, tbasis
    return Chain(data.family, steps, data.interval)

