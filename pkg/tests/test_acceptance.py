"""Acceptance gate: one test per criterion.

Each test records (passed, detail) in conftest.CRITERIA so the terminal
summary prints one line per criterion.
"""
import random
import time
from fractions import Fraction as F

import mpmath
import pytest

from conftest import CRITERIA
from xops.darboux import (adjoint_relation_residual, build_chain, check_intertwiner, is_classical,
                          explicit_intertwiners)
from xops.diffop import green_symmetry_residual, sl_form
from xops.exactalg import Poly, RatFun, classical_poly, hermite, jacobi, laguerre, rank
from xops.families import (admissible, generate, get, intertwine_check, nonexistence_certificates,
                           registry, jacobi_e11_12_regular_pairs, jacobi_e2a_12_regular_roots)
from xops.flags import (X2_LABELS, FlagSpec, canonical_flag, classify_x2_flag, d2_ansatz, d2_space,
                        degree_regular_basis, e2_constraint, membership, class_operator)
from xops.verify import QuadratureConfig, orthogonality_report

X2 = [s for s in registry() if s.kind == "x2"]
NONCLASSICAL = [s for s in registry() if s.kind != "classical"]


def record(k, ok, detail):
    CRITERIA[k] = (bool(ok), detail)
    assert ok, detail


def samples_for(spec, want=3, seed=0):
    """Registry samples topped up with random admissible points."""
    out = [dict(p) for p in spec.samples]
    rng = random.Random(seed)
    tries = 0
    while len(out) < want and spec.param_names and tries < 400:
        tries += 1
        p = {n: F(rng.randint(-30, 60), rng.randint(1, 12)) for n in spec.param_names}
        if p not in out and admissible(spec, p):
            out.append(p)
    return out


def proportional(p, q):
    return p.degree == q.degree and p * q.lead == q * p.lead


# 1 ---------------------------------------------------------------- eigen

def test_criterion_1_exact_eigen_relations():
    t0 = time.time()
    bad, cases = [], 0
    for spec in X2:
        for params in samples_for(spec):
            system = generate(spec, params, 15, check=False)
            for n, y, lam in system.items:
                cases += 1
                if not (system.operator.apply(y) - RatFun(y * lam)).is_zero():
                    bad.append((spec.id, params, n))
    dt = time.time() - t0
    record(1, not bad and dt < 120, f"{cases} exact relations, {len(bad)} failures, {dt:.0f}s")


# 2 ----------------------------------------------------------------- gaps

# frozen from the index ranges of each family
GAPS = {
    "hermite-x2": {1, 2}, "laguerre-x2-I": {0, 1}, "laguerre-x2-II": {0, 1},
    "laguerre-x2-e11-13": {0, 2}, "laguerre-x2-e11-03": {1, 2}, "laguerre-x2-e2a13": {0, 2},
    "laguerre-x2-e2a03": {1, 2}, "jacobi-x2-e11-23": {0, 1}, "jacobi-x2-e11-13": {0, 2},
    "jacobi-x2-e11-03": {1, 2}, "jacobi-x2-e2a13": {0, 2}, "jacobi-x2-e2a03": {1, 2},
}


def test_criterion_2_degree_gaps():
    bad = []
    for spec in X2:
        for params in samples_for(spec):
            degs = generate(spec, params, 15).degrees()
            if set(range(16)) - set(degs) != GAPS[spec.id] or len(degs) != 14:
                bad.append((spec.id, params, sorted(set(range(16)) - set(degs))))
    record(2, not bad and set(GAPS) == {s.id for s in X2}, f"12 families, mismatches: {bad}")


# 3 ---------------------------------------------------------- intertwining

def _closed_form_relations():
    out = []
    d = get("hermite-x2").data({})
    for n in d.indices(12):
        if n >= 3:
            out.append(("hermite-x2", n, d.A.apply(d.poly(n)) == RatFun(hermite(n - 3) * (4 * n))))
    d = get("laguerre-x2-e2a13").data({})
    for n in d.indices(12):
        if n >= 3:
            c = F(25, 128) * (n - 1) * (4 * n + 1)
            out.append(("laguerre-x2-e2a13", n, d.A.apply(d.poly(n)) == RatFun(laguerre(n - 3, F(1, 4)) * c)))
    for a, b in [(F(7, 3), F(1, 2)), (F(9, 2), F(3, 4))]:
        d = get("jacobi-x2-e11-23").data({"alpha": a, "beta": b})
        for n in d.indices(12):
            target = jacobi(n - 2, a + 1, b - 1) * (-(a + n - 3) * (b + n))
            out.append(("jacobi-x2-e11-23", n, d.A.apply(d.poly(n)) == RatFun(target)))
    return out


def test_criterion_3_intertwining():
    shown = _closed_form_relations()
    generic = []
    for spec in NONCLASSICAL:
        for params in spec.samples:
            d = spec.data(params)
            if d.A is None:
                continue
            for n in d.indices(12):
                generic.append((spec.id, n, intertwine_check(spec, params, n)))
    bad = [c for c in shown + generic if not c[2]]
    record(3, not bad and len(shown) >= 30,
           f"{len(shown)} closed-form and {len(generic)} registry relations, n <= 12, failures: {bad}")


# 4 ------------------------------------------------------------- D2 dims

D2_EXPECTED = {"E11_23": 2, "E2a_13": 2, "E2b_23": 2, "E2c_23": 2,
               "E11_13": 3, "E2a_03": 3, "E2a_12": 3,
               "E11_03": 4, "E11_12": 4, "E2a_02": 4}
N_MODULI = {"E11_23": 2, "E11_13": 1, "E2a_13": 1, "E2b_23": 1, "E2c_23": 1}


def _affine_image(flag, h, s):
    """The flag of y(h x + s) for y in the given flag."""
    if flag.variant == "E11":
        (a0, a1), (b0, b1) = flag.moduli, flag.poles
        return FlagSpec.e11(h * a0, h * a1, (b0 - s) / h, (b1 - s) / h)
    a01, a03, a23 = flag.moduli
    (b,) = flag.poles
    return FlagSpec.e2(h * a01, h ** 3 * a03, h * a23, (b - s) / h)


def _rand_q(rng, lo=-9, hi=9, den=7):
    return F(rng.randint(lo * den, hi * den), rng.randint(1, den))


def test_criterion_4_d2_dimensions():
    rng = random.Random(20240404)
    bad, count = [], 0
    for label in X2_LABELS:
        done = 0
        while done < 20:
            moduli = tuple(_rand_q(rng) for _ in range(N_MODULI.get(label, 0)))
            try:
                flag = canonical_flag(label, moduli)
                if classify_x2_flag(flag).label != label:
                    continue
            except (ValueError, ZeroDivisionError):
                continue
            if label == "E11_23" and flag.moduli[0] * flag.moduli[1] == 0:
                continue
            h = _rand_q(rng, 1, 4, 5) * rng.choice((1, -1))
            s = _rand_q(rng, -3, 3, 4)
            image = _affine_image(flag, h, s)
            sub = Poly((s, h))
            moved = all(membership(image, y.compose(sub)) for y in degree_regular_basis(flag, 6))
            direct = d2_space(flag).dimension
            brute = d2_ansatz(image).dimension
            ok = moved and direct == brute == D2_EXPECTED[label]
            if not ok:
                bad.append((label, moduli, h, s, direct, brute))
            done += 1
            count += 1
    record(4, not bad, f"{count} flags (20 per class, random affine images), mismatches: {bad[:3]}")


# 5 ------------------------------------------------------- E2 constraint

PTS = [F(1, 3), F(2), F(-5, 2), F(7, 4), F(-2, 9), F(11, 5), F(3)]


def _op_vector(T):
    row = []
    for k in range(6):
        img = T.apply(Poly.monomial(k))
        row += [img(x) for x in PTS]
    return row


def _span_matches(ops, shapes):
    base = rank([_op_vector(T) for T in ops])
    both = rank([_op_vector(T) for T in ops + shapes])
    nontrivial = rank([_op_vector(T) for T in [ops[0]] + shapes]) > 1
    return base == both and nontrivial


def test_criterion_5_e2_constraint():
    rng = random.Random(5)
    violating = 0
    bad = []
    while violating < 50:
        a01, a03, a23 = (_rand_q(rng, -5, 5, 6) for _ in range(3))
        if not e2_constraint(a01, a03, a23).violated:
            continue
        violating += 1
        if d2_space(FlagSpec.e2(a01, a03, a23)).dimension != 1:
            bad.append(("violating", a01, a03, a23))
    on_locus = 0
    for t in [F(2, 3), F(5), F(-7, 2), F(1, 4), F(-3, 5), F(9, 7)]:
        cases = [("E2a_13", (1, 0, t), dict(c=1)),
                 ("E2b_23", (t, t, t), dict(c=1)),
                 ("E2c_23", (t, -t * (t + 1) / 6, 1), dict(c=1))]
        for label, triple, consts in cases:
            flag = FlagSpec.e2(*triple)
            if e2_constraint(*triple).violated or classify_x2_flag(flag).label != label:
                bad.append(("off class", label, triple))
                continue
            on_locus += 1
            D = d2_space(flag)
            shapes = [class_operator(label, (t,), **consts)]
            if D.dimension < 2 or not _span_matches(D.operators, shapes):
                bad.append(("on locus", label, triple))
    # the subclasses without moduli, with every free constant
    for label, consts in [("E2a_03", [dict(c=1), dict(q0=1)]), ("E2a_12", [dict(c=1), dict(p0=1)]),
                          ("E2a_02", [dict(c=1), dict(p0=1), dict(q0=1)])]:
        D = d2_space(canonical_flag(label))
        if not _span_matches(D.operators, [class_operator(label, (), **k) for k in consts]):
            bad.append(("class span", label))
        on_locus += 1
    record(5, not bad, f"50 violating triples give dim 1; {on_locus} on-locus flags match the class "
                       f"operators; failures: {bad}")


# 6 --------------------------------------------------------------- chains

def test_criterion_6_chains():
    bad = []
    for spec in NONCLASSICAL:
        params = spec.samples[0]
        chain = build_chain(spec, params)
        d = spec.data(params)
        ok = len(chain.steps) == spec.steps and is_classical(chain.initial)
        for step in chain.steps:
            ok &= step.fact.identities_hold() and step.dual_identity_holds()
        ok &= chain.composed_A == d.B
        # the composed map sends classical polynomials onto the registry ones
        for n in d.indices(10):
            if n in d.special or n - d.shift < 0:
                continue
            img = chain.composed_A.apply(classical_poly(d.classical, n - d.shift))
            ok &= img.is_poly() and proportional(img.as_poly(), generate(spec, params, n).items[-1][1])
        if not ok:
            bad.append(spec.id)
    record(6, not bad, f"{len(NONCLASSICAL)} families, steps and identities checked exactly, failures: {bad}")


# 7 -------------------------------------------------------- orthogonality

def test_criterion_7_orthogonality():
    t0 = time.time()
    cfg = QuadratureConfig(decimal_digits=50)
    tol = mpmath.mpf(10) ** -35
    bad, worst, cases = [], mpmath.mpf(0), 0
    for spec in registry():
        for params in spec.samples:
            rep = orthogonality_report(generate(spec, params, 10), cfg)
            cases += 1
            worst = max(worst, rep.max_off_diagonal)
            ok = rep.max_off_diagonal < tol and all(k > 0 for k in rep.norms)
            ok &= mpmath.isfinite(rep.moments[0]) and rep.moments[0] > 0
            if not ok:
                bad.append((spec.id, params))
    dt = time.time() - t0
    record(7, not bad and dt < 600,
           f"{cases} systems, worst off-diagonal {mpmath.nstr(worst, 3)}, {dt:.0f}s, failures: {bad}")


# 8 ---------------------------------------------------------- certificates

def test_criterion_8_nonexistence():
    certs = nonexistence_certificates()
    held = [c for c in certs if c.holds]
    failed = sorted((c.base, c.flag_class) for c in certs if not c.holds)
    # what can be established: every other cell is rejected, and the two
    # open cells carry explicit regular weights
    assert len(certs) == 19 and len(held) == 17
    assert failed == [("jacobi", "E11_12"), ("jacobi", "E2a_12")]
    assert jacobi_e11_12_regular_pairs() and jacobi_e2a_12_regular_roots()
    detail = (f"{len(held)}/19 cells rejected; jacobi E11_12 and E2a_12 admit regular weights "
              f"(counterexamples, see the ledger)")
    CRITERIA[8] = (False, detail)
    pytest.xfail(detail)


# 9 ---------------------------------------------------- intertwiner suite

INTERTWINER_CASES = [
    ("x1", dict(a=F(2, 3))), ("x1", dict(a=F(-5, 2))),
    ("e11-23", dict(a0=F(1, 3), a1=F(5, 7))), ("e11-23", dict(a0=F(-4), a1=F(2, 9))),
    ("e11-13", dict(a0=F(2, 5))), ("e11-13", dict(a0=F(-7, 3))),
    ("e11-03", {}), ("e11-12", {}),
    ("e2b", dict(a=F(1), sign=1)), ("e2b", dict(a=F(3), sign=-1)),
    ("e2c", dict(a=F(5, 2))), ("e2c", dict(a=F(-4, 3))),
    ("e2a", dict(a01=F(1), a23=F(2, 3))), ("e2a", dict(a01=F(0), a23=F(1))),
]


def test_criterion_9_intertwiner_suite():
    bad = []
    kernels = 0
    for case, params in INTERTWINER_CASES:
        it = explicit_intertwiners(case, **params)
        res = check_intertwiner(it, depth=8)
        kernels += "kernel annihilated" in res
        if not all(res.values()):
            bad.append((case, params, res))
    # the e11-13 kernel element is 1 + a0 z
    a0 = F(2, 5)
    ok13 = explicit_intertwiners("e11-13", a0=a0).A.apply(Poly((1, a0))).is_zero()
    record(9, not bad and ok13, f"{len(INTERTWINER_CASES)} intertwiners to depth 8, {kernels} kernels checked, "
                               f"failures: {bad}")


# 10 ------------------------------------------------------------ residuals

def _pairs(polys):
    # non-eigen combinations, so the integrands do not vanish identically
    k = len(polys)
    out = []
    for i in range(5):
        f = polys[i % k] + polys[(i + 1) % k] * 2
        g = polys[(i + 2) % k] * 3 - polys[(i + 3) % k]
        out.append((f, g))
    return out


def _adjoint_residual(step, f, g, interval):
    """Residual of the adjoint relation with the boundary bracket removed.

    When the intermediate weight is too singular at a finite endpoint the
    bracket does not vanish for generic polynomials; f is then multiplied by
    the smallest power of (x - e) that makes every term finite.
    """
    ends = [e for e in interval if e not in (float("inf"), -float("inf"))]
    for m in range(4):
        ff = f
        for e in ends:
            ff = ff * Poly((-F(e), 1)) ** m
        r = adjoint_relation_residual(step.fact, ff, g, step.W, step.What, interval, 50)
        if mpmath.isfinite(r):
            return r, m
    return r, m


def test_criterion_10_green_and_adjoint():
    tol = mpmath.mpf(10) ** -30
    worst_g, worst_a, bad = mpmath.mpf(0), mpmath.mpf(0), []
    vanishing = 0
    for spec in registry():
        params = spec.samples[0]
        system = generate(spec, params, 6)
        sl = sl_form(system.operator, system.interval)
        polys = [p for _, p, _ in system.items]
        for f, g in _pairs(polys):
            r = green_symmetry_residual(system.operator, f, g, sl, 50)
            worst_g = max(worst_g, r)
            if not r < tol:
                bad.append(("green", spec.id, r))
        if spec.kind == "classical":
            continue
        step = build_chain(spec, params).steps[-1]
        src, tgt = step.source_basis, step.target_basis
        for i in range(5):
            f = src[i % len(src)] + src[(i + 1) % len(src)]
            g = tgt[(i + 2) % len(tgt)] * 2 + tgt[i % len(tgt)]
            r, m = _adjoint_residual(step, f, g, system.interval)
            vanishing = max(vanishing, m)
            worst_a = max(worst_a, r)
            if not r < tol:
                bad.append(("adjoint", spec.id, r))
    record(10, not bad, f"17 families x 5 pairs; worst Green {mpmath.nstr(worst_g, 3)}, "
                        f"worst adjoint {mpmath.nstr(worst_a, 3)} (endpoint factor up to power {vanishing}); "
                        f"failures: {bad[:3]}")
