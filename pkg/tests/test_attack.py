import random

import pytest

from isoq import attack as at
from isoq import classgroup as cg
from isoq import curves as cv
from isoq.attack import AttackConfig, Instance, InstanceError, Quotient
from isoq.curves import Curve


@pytest.fixture(scope="module")
def planted():
    return at.generate_instance(80, 140, 5, random.Random(11), h_max=9)


def test_generated_instance_is_consistent(planted):
    inst, q = planted
    assert inst.ctx0.n == inst.ctx1.n and inst.ctx0.delta == inst.ctx1.delta == inst.delta
    assert 5 <= cg.class_number(inst.delta) <= 9
    assert at.admissible(inst.ctx0)
    assert at.verify_quotient(inst, q, rng=random.Random(0))


def test_hiding_function_is_injective(planted):
    inst, _ = planted
    G = cg.enumerate_class_group(inst.delta)
    fb = cv.factor_base_for(inst.ctx0)
    ev = cv.StarEvaluator(fb, random.Random(0))
    for c in (0, 1):
        values = [at.hiding_value(c, G.dlog(f), inst, G, fb, evaluator=ev) for f in G.elements]
        assert len(set(values)) == G.h


def test_hiding_functions_differ_by_the_shift(planted):
    inst, q = planted
    G = cg.enumerate_class_group(inst.delta)
    fb = cv.factor_base_for(inst.ctx0)
    ev = cv.StarEvaluator(fb, random.Random(0))
    s = G.dlog(q.cls)
    for f in G.elements:
        x = G.dlog(f)
        shifted = G.dlog(cg.compose(f, q.cls))
        assert at.hiding_value(1, x, inst, G, fb, evaluator=ev) == at.hiding_value(0, shifted, inst, G, fb, evaluator=ev)
    assert len(s) == len(G.orders)


def test_hiding_value_argument_checks(planted):
    inst, _ = planted
    G = cg.enumerate_class_group(inst.delta)
    fb = cv.factor_base_for(inst.ctx0)
    with pytest.raises(ValueError):
        at.hiding_value(2, G.dlog(G.identity), inst, G, fb, random.Random(0))
    with pytest.raises(ValueError):
        at.hiding_value(0, tuple(n for n in G.orders), inst, G, fb, random.Random(0))


def test_attack_recovers_planted_quotient(planted):
    inst, q = planted
    got = at.run_attack(inst, AttackConfig(), random.Random(5))
    assert got == q
    assert str(got) == str(q.cls)


def test_identical_curves_give_identity():
    inst, _ = at.generate_instance(60, 120, 3, random.Random(2), h_max=7)
    same = Instance.from_curves(inst.E0, inst.E0)
    got = at.run_attack(same, rng=random.Random(0))
    assert got.cls == cg.identity(inst.delta)


def test_wrong_class_fails_verification(planted):
    inst, q = planted
    G = cg.enumerate_class_group(inst.delta)
    for f in G.elements:
        if f != q.cls:
            assert not at.verify_quotient(inst, Quotient(f), rng=random.Random(1))
    assert not at.verify_quotient(inst, Quotient(cg.identity(-23)))


def test_quotient_is_reduced():
    assert Quotient(cg.QuadForm(6, -1, 1)).cls == cg.QuadForm(1, 1, 6)


def test_generate_instance_limits():
    with pytest.raises(InstanceError):
        at.generate_instance(20, 40, 10**6, random.Random(0), max_tries=200)
    with pytest.raises(InstanceError):
        at.generate_instance(24, 28, 1, random.Random(0))
    with pytest.raises(InstanceError):
        at.generate_instance(5, cv.DEFAULT_P_CAP + 1, 1, random.Random(0))


def test_instance_validation(planted):
    inst, _ = planted
    with pytest.raises(InstanceError):
        Instance.from_curves(inst.E0, inst.E1, delta=inst.delta - 4)
    other = next(
        Curve(inst.p, A, 1)
        for A in range(inst.p)
        if (4 * A**3 + 27) % inst.p and _count(Curve(inst.p, A, 1)) not in (None, inst.ctx0.n)
    )
    with pytest.raises(InstanceError):
        Instance.from_curves(inst.E0, other)
    with pytest.raises(InstanceError):
        Instance(inst.p + 2, inst.E0, inst.E1, inst.ctx0, inst.ctx1, inst.delta)


def _count(c):
    try:
        return cv.point_count(c).n
    except cv.CurveError:
        return None


def test_admissibility_with_nontrivial_conductor():
    # p = 83, t = 12: t^2 - 4p = -188 = 2^2 * -47, and h(-47) = h(-188) = 5
    ctx = next(
        cv.point_count(Curve(83, A, B))
        for A in range(83)
        for B in range(83)
        if (4 * A**3 + 27 * B * B) % 83 and _trace(Curve(83, A, B)) == 12
    )
    assert ctx.conductor_v == 2
    assert at.admissible(ctx) == (cg.class_number(-47) == cg.class_number(-188))


def _trace(c):
    try:
        return cv.point_count(c).t
    except cv.CurveError:
        return None
