"""Polynomial flags of codimension at most two.

A flag is stored through its defining point conditions; degree-regular
bases are generated from them on demand.  The conditions stay meaningful
at special moduli where a closed-form basis would degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .diffop import DiffOp, laurent_decompose, pole_profile
from .exactalg import Poly, RatFun, nullspace, rank, rref, scalar


# A linear functional on polynomials: sum of coeff * y^(order)(point).
Functional = tuple  # of (order, point, coeff)


def apply_functional(L: Functional, y: Poly):
    total = Fraction(0)
    for order, point, coeff in L:
        total = total + coeff * y.deriv(order)(point)
    return total


@dataclass(frozen=True)
class FlagSpec:
    """Standard, E1(a;b), E11(a0,a1;b0,b1) or E2(a01,a03,a23;b)."""

    variant: str
    moduli: tuple = ()
    poles: tuple = ()

    @classmethod
    def standard(cls):
        return cls("standard")

    @classmethod
    def e1(cls, a, b=0):
        return cls("E1", (scalar(a),), (scalar(b),))

    @classmethod
    def e11(cls, a0, a1, b0=0, b1=1):
        if scalar(b0) == scalar(b1):
            raise ValueError("E11 poles must be distinct")
        return cls("E11", (scalar(a0), scalar(a1)), (scalar(b0), scalar(b1)))

    @classmethod
    def e2(cls, a01, a03, a23, b=0):
        return cls("E2", (scalar(a01), scalar(a03), scalar(a23)), (scalar(b),))

    @property
    def codimension(self) -> int:
        return {"standard": 0, "E1": 1, "E11": 2, "E2": 2}[self.variant]

    def functionals(self) -> list:
        if self.variant == "standard":
            return []
        if self.variant == "E1":
            (a,), (b,) = self.moduli, self.poles
            return [((1, b, 1), (0, b, -a))]
        if self.variant == "E11":
            return [((1, b, 1), (0, b, -a)) for a, b in zip(self.moduli, self.poles)]
        a01, a03, a23 = self.moduli
        (b,) = self.poles
        return [((1, b, 1), (0, b, -a01)),
                ((3, b, 1), (2, b, -3 * a23), (0, b, -6 * a03))]

    def is_normalized(self) -> bool:
        if self.variant == "E11":
            return self.poles == (0, 1)
        if self.variant in ("E1", "E2"):
            return self.poles == (0,)
        return True

    def __str__(self):
        mods = ",".join(str(m) for m in self.moduli)
        pts = ",".join(str(p) for p in self.poles)
        return f"{self.variant}({mods};{pts})" if self.moduli else self.variant


@dataclass(frozen=True)
class SpanFlag:
    """Flag given by an explicit degree-regular basis generator (k >= 1)."""

    basis_fn: Callable[[int], Poly]
    label: str = "span"

    @property
    def variant(self):
        return "span"

    def basis(self, count: int) -> list[Poly]:
        return [self.basis_fn(k) for k in range(1, count + 1)]


def membership(flag, y) -> bool:
    y = _as_poly(y)
    if y is None:
        return False
    if isinstance(flag, SpanFlag):
        return _in_span(flag, y)
    return all(apply_functional(L, y) == 0 for L in flag.functionals())


def _as_poly(y):
    if isinstance(y, RatFun):
        return y.as_poly() if y.is_poly() else None
    return y


def _in_span(flag: SpanFlag, y: Poly, count: int | None = None) -> bool:
    if not y:
        return True
    deg = y.degree
    basis = []
    k = 1
    while True:
        b = flag.basis_fn(k)
        if b.degree > deg:
            break
        basis.append(b)
        k += 1
        if count is not None and k > count:
            break
    cols = deg + 1
    rows = [[b[i] for i in range(cols)] for b in basis]
    return rank(rows + [[y[i] for i in range(cols)]]) == rank(rows) if rows else False


# ------------------------------------------------------- degree-regular bases


def _reduce_heads(heads: list[Poly]) -> list[Poly]:
    """Eliminate leading terms until the degrees are distinct.

    A reduced element is rescaled so that its lowest nonzero coefficient
    matches the one of the element it replaces.
    """
    heads = [h for h in heads if h]
    changed = True
    while changed:
        changed = False
        for i in range(len(heads)):
            for j in range(i + 1, len(heads)):
                if heads[i].degree == heads[j].degree:
                    e1, e2 = heads[i], heads[j]
                    r = e1 * e2.lead - e2 * e1.lead
                    if r:
                        lo1 = next(k for k in range(e1.degree + 1) if e1[k] != 0)
                        lo = next(k for k in range(r.degree + 1) if r[k] != 0)
                        if lo == lo1:
                            r = r * (e1[lo1] / r[lo])
                        else:
                            r = r * (1 / r[lo])
                    heads[i] = r
                    changed = True
                    break
            if changed:
                break
        heads = [h for h in heads if h]
    return sorted(heads, key=lambda p: p.degree)


def _normalized_heads_and_tail(flag: FlagSpec):
    z = Poly.x()
    if flag.variant == "E1":
        (a,) = flag.moduli
        return [Poly((1, a))], Poly.monomial(2), 2
    if flag.variant == "E11":
        a0, a1 = flag.moduli
        heads = [z ** 2 * ((a1 - 2) * (z - 1) + 1), (z - 1) ** 2 * ((a0 + 2) * z + 1)]
        return heads, z ** 2 * (z - 1) ** 2, 4
    a01, a03, a23 = flag.moduli
    return [Poly((1, a01, 0, a03)), Poly((0, 0, 1, a23))], Poly.monomial(4), 4


def degree_regular_basis(flag, count: int) -> list[Poly]:
    """First `count` elements of a degree-regular basis."""
    if count < 1:
        return []
    if isinstance(flag, SpanFlag):
        return flag.basis(count)
    if flag.variant == "standard":
        return [Poly.monomial(k) for k in range(count)]
    heads, tail, _ = _normalized_heads_and_tail(_normalized(flag))
    heads = _reduce_heads(heads)
    out = list(heads[:count])
    j = 0
    while len(out) < count:
        out.append(tail * Poly.monomial(j))
        j += 1
    return [_denormalize(flag, p) for p in out]


def _affine(flag: FlagSpec):
    """(shift, scale) with z = shift + scale*t mapping the normalized flag."""
    if flag.variant == "E11":
        b0, b1 = flag.poles
        return b0, b1 - b0
    return flag.poles[0], 1


def _normalized(flag: FlagSpec) -> FlagSpec:
    if flag.is_normalized():
        return flag
    shift, h = _affine(flag)
    # p(z) = q((z - shift)/h): p'(b) = a p(b) becomes q'(t) = a h q(t)
    if flag.variant == "E1":
        return FlagSpec.e1(flag.moduli[0] * h)
    if flag.variant == "E11":
        return FlagSpec.e11(flag.moduli[0] * h, flag.moduli[1] * h)
    return FlagSpec.e2(*flag.moduli)


def _denormalize(flag, p: Poly) -> Poly:
    if isinstance(flag, SpanFlag) or flag.variant == "standard" or flag.is_normalized():
        return p
    shift, h = _affine(flag)
    inv = Fraction(1) / h
    return p.compose(Poly((-shift * inv, inv)))


def degree_sequence(flag, count: int = 8) -> list[int]:
    return [p.degree for p in degree_regular_basis(flag, count)]


def codimension_sequence(flag, count: int = 8) -> list[int]:
    return [n + 1 - k for k, n in enumerate(degree_sequence(flag, count), start=1)]


# ----------------------------------------------------------------- invariance


def invariance_check(T: DiffOp, flag, depth: int = 10) -> bool:
    """T[U_k] is contained in U_k for k <= depth.

    U_k is the part of the flag of degree <= n_k, so it suffices that T
    maps the k-th basis element to a polynomial of degree <= n_k lying in
    the flag.  Past the last head element the basis is a fixed polynomial
    times z^j and the normal-form operators act degree-homogeneously on the
    tail, so a depth reaching a few tail elements already covers every k;
    the slow tests re-check to depth 25.
    """
    if depth < 2:
        raise ValueError("depth must be >= 2")
    for u in degree_regular_basis(flag, depth):
        img = T.apply(u)
        if not img.is_poly():
            return False
        v = img.as_poly()
        if v.degree > u.degree or not membership(flag, v):
            return False
    return True


# ------------------------------------------------------------------- D2 space


@dataclass
class D2Basis:
    operators: list
    dimension: int
    method: str
    diagnostic: str | None = None


def _ansatz_ops(flag: FlagSpec) -> list[DiffOp]:
    """Operators of the pole normal form, with the flag's poles."""
    z = RatFun(Poly.x())
    ops = [DiffOp.from_pqr(z ** i) for i in range(3)]
    ops += [DiffOp.from_pqr(0, z ** i) for i in range(2)]
    fl = flag.functionals()
    for L in fl:
        orders = {o for o, _, _ in L}
        if orders != {0, 1}:
            continue
        b = L[0][1]
        a = -dict((o, c) for o, _, c in L)[0]
        ops.append(DiffOp((-a / (z - b), 1 / (z - b))))
    return ops


def d2_ansatz(flag: FlagSpec, depth: int = 10) -> D2Basis:
    """D2 from the general normal-form ansatz by brute-force linear algebra."""
    ops = _ansatz_ops(flag)
    basis = degree_regular_basis(flag, depth)
    rows = []
    for u in basis:
        images = [op.apply(u) for op in ops]
        for L in flag.functionals():
            row = []
            for img in images:
                if not img.is_poly():
                    row = None
                    break
                row.append(apply_functional(L, img.as_poly()))
            if row is not None:
                rows.append(row)
    null = nullspace(rows, len(ops))
    out = [DiffOp.identity()]
    for v in null:
        T = DiffOp()
        for c, op in zip(v, ops):
            if c:
                T = T + op.scale(c)
        out.append(T)
    return D2Basis(out, len(out), "ansatz")


def e11_constraint_matrix(a0, a1) -> list[list]:
    """Constraint rows for [p_-2, p_-1, q_-1, p_0, q_0, c_1, c_0] on E11(a0,a1;0,1).

    q_0 multiplies z*y' (the degree-preserving first-order term).
    """
    a0, a1 = scalar(a0), scalar(a1)
    h = Fraction(1, 2)
    return [
        [1, 0, 0, 0, 0, 0, h],
        [-a0, 1, 1, 0, 0, -1, -3 * a0 * h],
        [0, 0, -a0 ** 2, 0, a0, a0 ** 2 - a0 + a1, a0 ** 3],
        [1, 1, 0, 1, 0, h, 0],
        [-a1, 1 - a1, 1, 2 - a1, 1, -3 * a1 * h, 1],
        [0, 0, -a1 ** 2, 0, -(a1 - 1) * a1, a1 ** 3, a0 - a1 * (a1 + 1)],
    ]


def e2_constraint_matrix(a01, a03, a23) -> list[list]:
    """Rows in (p_0, q_0, s) with p_-2 = s, c = -4s (homogenized form)."""
    a01, a03, a23 = scalar(a01), scalar(a03), scalar(a23)
    return [
        [0, a01, 3 * a01 ** 3 - 6 * a03 - 5 * a01 ** 2 * a23],
        [2 * a03, a03, a03 * (a01 - a23) * (a01 + a23)],
        [4 * a23, a23, 6 * a03 + 5 * a01 * a23 ** 2 - 3 * a23 ** 3],
    ]


def _e11_op(v, a0, a1) -> DiffOp:
    pm2, pm1, qm1, p0, q0, c1, c0 = v
    z = RatFun(Poly.x())
    p = RatFun(Poly((pm2, pm1, p0)))
    q = RatFun(Poly((qm1, q0)))
    return (DiffOp.from_pqr(p, q)
            + DiffOp((-a0 * c0 / z, c0 / z))
            + DiffOp((-a1 * c1 / (z - 1), c1 / (z - 1))))


def _e2_op(v, a01, a23) -> DiffOp:
    p0, q0, s = v
    z = RatFun(Poly.x())
    pm1 = s * (2 * a01 - 2 * a23)
    qm1 = s * (-7 * a01 + 5 * a23)
    p = RatFun(Poly((s, pm1, p0)))
    q = RatFun(Poly((qm1, q0)))
    return DiffOp.from_pqr(p, q) + DiffOp((4 * s * a01 / z, -4 * s / z))


def d2_space(flag) -> D2Basis:
    """Basis of D2 (identity included) from the constraint matrices."""
    if isinstance(flag, SpanFlag) or flag.variant == "standard":
        raise ValueError("d2_space needs an E1, E11 or E2 flag")
    if not flag.is_normalized():
        return d2_ansatz(flag)
    if flag.variant == "E1":
        return d2_ansatz(flag)
    if flag.variant == "E11":
        a0, a1 = flag.moduli
        null = nullspace(e11_constraint_matrix(a0, a1), 7)
        ops = [DiffOp.identity()] + [_e11_op(v, a0, a1) for v in null]
        return D2Basis(ops, len(ops), "E11 constraint matrix")
    a01, a03, a23 = flag.moduli
    null = nullspace(e2_constraint_matrix(a01, a03, a23), 3)
    ops = [DiffOp.identity()] + [_e2_op(v, a01, a23) for v in null]
    diag = None
    if e2_constraint(a01, a03, a23).violated:
        diag = "E2 moduli violate the compatibility constraint; only the identity survives"
    return D2Basis(ops, len(ops), "E2 constraint matrix", diag)


# ------------------------------------------------------------ classification


@dataclass(frozen=True)
class E2Constraint:
    value: Fraction
    satisfied_via: tuple  # subset of ("2a", "2b", "2c")

    @property
    def violated(self) -> bool:
        return not self.satisfied_via


def e2_constraint(a01, a03, a23) -> E2Constraint:
    a01, a03, a23 = scalar(a01), scalar(a03), scalar(a23)
    f_a = a03
    f_b = a01 - a23
    f_c = 6 * a03 + a01 * a23 * (a01 + a23)
    via = tuple(lbl for lbl, f in (("2a", f_a), ("2b", f_b), ("2c", f_c)) if f == 0)
    return E2Constraint(f_a * f_b * f_c, via)


@dataclass(frozen=True)
class X2Class:
    label: str
    degrees: tuple


def classify_x2_flag(flag: FlagSpec) -> X2Class:
    """Subclass label (E11_23, E2a_13, ...) and the start of the degree sequence."""
    degs = tuple(degree_sequence(flag, 6))
    sub = f"{degs[0]}{degs[1]}"
    if flag.variant == "E11":
        return X2Class(f"E11_{sub}", degs)
    if flag.variant != "E2":
        raise ValueError("only E11 and E2 flags are X2 candidates")
    a01, a03, a23 = flag.moduli
    c = e2_constraint(a01, a03, a23)
    if c.violated:
        raise ValueError("E2 moduli violate the compatibility constraint")
    if a03 == 0:
        kind = "2a"
    elif a01 == a23:
        kind = "2b"
    else:
        kind = "2c"
    return X2Class(f"E{kind}_{sub}", degs)


def pole_points(T: DiffOp) -> int:
    """Number of distinct complex poles of T."""
    from .exactalg import squarefree_part
    return max(squarefree_part(T.poles()).degree, 0)


def exceptionality_check(T: DiffOp, flag) -> bool:
    """T has a pole and preserves no flag of lower codimension."""
    npoles = pole_points(T)
    if npoles == 0:
        return False
    codim = _codim(flag)
    if codim <= 1 or npoles >= 2:
        return True
    b = _single_pole(T)
    lead = laurent_decompose(T, b).block(-2)
    return lead.symbol(3) != 0


def _codim(flag) -> int:
    if isinstance(flag, SpanFlag):
        return max(codimension_sequence(flag, 8))
    return flag.codimension


def _single_pole(T: DiffOp):
    d = T.poles()
    return -d[0] / d[1]


# ---------------------------------------------- D2 operator shape per subclass


def class_operator(label: str, moduli: Sequence = (), **k) -> DiffOp:
    """The general D2 operator of each subclass with its free constants.

    Free constants are keyword arguments (c, c0, c1, q0, p0, lam).
    """
    z = RatFun(Poly.x())
    g = lambda name: scalar(k.get(name, 0))
    lam = g("lam")
    c, c0, c1, q0, p0 = g("c"), g("c0"), g("c1"), g("q0"), g("p0")

    def pole(cc, a, b):
        return DiffOp((-a * cc / (z - b), cc / (z - b)))

    if label == "E11_23":
        a0, a1 = map(scalar, moduli)
        p = c * (-Fraction(1, 2) * z * z * (a0 - a1) * (a0 - a1 + 4)
                 - z * (a0 * a1 - a0 - a1 ** 2 + 3 * a1) - a1 ** 2 / 2 + a1)
        q = c * (z * ((a0 - a1) * (a0 * a1 - 2 * a0 + 2) + 2 * a0 ** 2)
                 + (a0 - 1) * a1 ** 2 - (a0 - 3) * a1 + a0 * (a0 + 1))
        T = DiffOp.from_pqr(p, q) + pole(c * a0 * (a0 + 2), a1, 1) + pole(c * (a1 - 2) * a1, a0, 0)
    elif label == "E11_13":
        (a0,) = map(scalar, moduli)
        a1 = a0 / (a0 + 1)
        p = -(c0 + c1) * z * z / 2 + c0 * (z - Fraction(1, 2))
        q = (a1 * c1 - a0 * c0) * z + (a0 - 1) * c0 + c1
        T = DiffOp.from_pqr(p, q) + pole(c0, a0, 0) + pole(c1, a1, 1)
    elif label == "E11_03":
        p = -(q0 + c0 + c1) * z * z / 2 + q0 * z / 2 + c0 * (z - Fraction(1, 2))
        q = q0 * (z - Fraction(1, 2)) - c0 + c1
        T = DiffOp.from_pqr(p, q) + pole(c0, 0, 0) + pole(c1, 0, 1)
    elif label == "E11_12":
        p = (c0 + c1 - q0) * z * z / 2 + (q0 / 2 - c1) * z - c0 / 2
        q = q0 * (z - Fraction(1, 2)) - 2 * c0 + 2 * c1
        T = DiffOp.from_pqr(p, q) + pole(c0, -2, 0) + pole(c1, 2, 1)
    elif label == "E2a_13":
        (a,) = map(scalar, moduli)
        p = c * ((1 - 3 * a) * (3 - a) * z * z / 4 + 2 * (1 - a) * z + 1)
        # y' coefficient (5a - 3)z + 5a - 7; an extra factor a on the
        # z term would break invariance
        q = c * ((5 * a - 3) * z + 5 * a - 7)
        T = DiffOp.from_pqr(p, q) + pole(-4 * c, 1, 0)
    elif label == "E2a_03":
        p = (3 * c - q0) * z * z / 4 + c * (1 - 2 * z)
        q = 5 * c + q0 * z
        T = DiffOp.from_pqr(p, q) + pole(-4 * c, 0, 0)
    elif label == "E2a_12":
        p = p0 * z * z + c * (2 * z + 1)
        q = -c * (3 * z + 7)
        T = DiffOp.from_pqr(p, q) + pole(-4 * c, 1, 0)
    elif label == "E2a_02":
        T = DiffOp.from_pqr(p0 * z * z + c, q0 * z) + pole(-4 * c, 0, 0)
    elif label == "E2b_23":
        (a,) = map(scalar, moduli)
        p = c * (1 - z * z * (a * a + 3))
        q = c * (2 * z * (a * a + 3) - 2 * a)
        T = DiffOp.from_pqr(p, q) + pole(-4 * c, a, 0)
    elif label == "E2c_23":
        (a,) = map(scalar, moduli)
        p = c * (1 + (a - 1) * z) ** 2
        q = c * ((a - 1) * (1 - 3 * a) * z + 5 - 7 * a)
        T = DiffOp.from_pqr(p, q) + pole(-4 * c, a, 0)
    else:
        raise KeyError(label)
    return T + lam


def canonical_flag(label: str, moduli: Sequence = ()) -> FlagSpec:
    """The normalized flag of each X2 subclass."""
    if label == "E11_23":
        return FlagSpec.e11(*moduli)
    if label == "E11_13":
        a0 = scalar(moduli[0])
        return FlagSpec.e11(a0, a0 / (1 + a0))
    if label == "E11_03":
        return FlagSpec.e11(0, 0)
    if label == "E11_12":
        return FlagSpec.e11(-2, 2)
    if label == "E2a_13":
        return FlagSpec.e2(1, 0, moduli[0])
    if label == "E2a_03":
        return FlagSpec.e2(0, 0, 1)
    if label == "E2a_12":
        return FlagSpec.e2(1, 0, 0)
    if label == "E2a_02":
        return FlagSpec.e2(0, 0, 0)
    if label == "E2b_23":
        a = scalar(moduli[0])
        return FlagSpec.e2(a, a, a)
    if label == "E2c_23":
        a = scalar(moduli[0])
        return FlagSpec.e2(a, -a * (a + 1) / 6, 1)
    raise KeyError(label)


X2_LABELS = ("E11_23", "E11_13", "E11_03", "E11_12",
             "E2a_13", "E2a_03", "E2a_12", "E2a_02", "E2b_23", "E2c_23")
