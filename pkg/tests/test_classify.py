import numpy as np
import pytest

from instances import singular_product_family
from sobmuck.classify import (
    ClassC,
    NotPiecewiseRegular,
    NotRegOnWholeInterval,
    RegClass,
    class_c,
    is_piecewise_monotone,
    piecewise_decompose,
    reg_interval,
)
from sobmuck.measure import Measure, WeightExpr, envelope, positive_part, power
from sobmuck.quad import integrability


def test_reg_interval_examples():
    assert reg_interval(Measure.weighted(-1, 1, power(-1, 3.0), power(1, 3.0)), 2.0) is RegClass.OPEN_OPEN
    assert reg_interval(Measure.lebesgue(0, 1), 2.0) is RegClass.CLOSED_CLOSED
    assert reg_interval(Measure.weighted(0, 1, power(0, 0.5), power(1, 3.0)), 2.0) is RegClass.CLOSED_OPEN
    with pytest.raises(NotRegOnWholeInterval):
        reg_interval(Measure.weighted(-1, 1, power(0, 2.0)), 2.0)


@pytest.mark.parametrize("a0,a1,p", [(0.5, 3.0, 2.0), (1.5, 0.2, 3.0), (-0.5, 2.5, 1.5), (4.0, 4.0, 2.5)])
def test_reg_interval_matches_integrability(a0, a1, p):
    m = Measure.weighted(0, 1, power(0, a0), power(1, a1))
    tag = reg_interval(m, p)
    q = 1.0 / (p - 1.0)
    assert tag.closed_left == integrability(m.density, 0.0, 1, q)
    assert tag.closed_right == integrability(m.density, 1.0, -1, q)


def test_decompose_examples():
    rd = piecewise_decompose(Measure.weighted(-1, 1, power(-1, 0.5), power(1, 3.2)), 2.0)
    assert rd.params == (-1.0, 1.0) and rd.J == (1,) and rd.H == () and rd.strongly
    mu1 = Measure.weighted(-1, 1, power(-1, 1.0), power(1, 1.0), atoms=[(-1.0, 1.0), (1.0, 1.0)])
    rd = piecewise_decompose(mu1, 2.0)
    assert not rd.strongly and rd.H == (-1.0, 1.0)
    delta0 = Measure.atomic(0, 1, [(0.0, 1.0)])
    rd = piecewise_decompose(delta0, 2.0)
    assert rd.params == (0.0,) and rd.J == () and rd.H == (0.0,)


def test_interior_singularity_splits():
    mu1 = Measure.weighted(-1, 1, power(0, 3.0), atoms=[(0.0, 1.0)])
    rd = piecewise_decompose(mu1, 2.0)
    assert rd.params == (-1.0, 0.0, 1.0) and rd.J == (1, 2) and rd.H == (0.0,) and rd.strongly
    assert rd.reg[1] is RegClass.CLOSED_OPEN and rd.reg[2] is RegClass.OPEN_CLOSED


def test_zero_gap_is_atomic_segment():
    pieces = WeightExpr((0.0, 3.0), (
        WeightExpr.of(0, 1).pieces[0],
        WeightExpr.zeros(1, 2).pieces[0],
        WeightExpr.of(2, 3).pieces[0],
    ))
    mu1 = Measure((0.0, 3.0), pieces, ((1.5, 1.0),))
    rd = piecewise_decompose(mu1, 2.0)
    assert rd.params == (0.0, 1.0, 2.0, 3.0) and rd.J == (1, 3) and rd.H == (1.5,)


def test_numeric_measure_is_rejected():
    pp = positive_part(Measure.lebesgue(0, 1), 0.5, Measure.lebesgue(0, 1))
    with pytest.raises(NotPiecewiseRegular):
        piecewise_decompose(pp, 2.0)
    assert is_piecewise_monotone(pp) == ("Unknown", None)


def test_monotone_examples():
    w = Measure.weighted(-1, 1, power(-1, 0.5), power(0, -0.3), power(1, 2.0), envelope(2.0))
    status, params = is_piecewise_monotone(w)
    assert status == "Yes" and params[0] == -1.0 and params[-1] == 1.0 and 0.0 in params
    assert is_piecewise_monotone(Measure.atomic(0, 1, [(0.5, 1.0)]))[0] == "Yes"


def test_class_c_examples():
    one = WeightExpr.of(0, 1)
    lin = WeightExpr.of(0, 1, power(1, 1.0))
    sq = WeightExpr.of(0, 1, power(1, 2.0))
    assert class_c(one, lin, 1.0).verdict is ClassC.LIMIT_INFINITY
    r = class_c(sq, lin, 1.0)
    assert r.verdict is ClassC.LIMSUP_FINITE and r.witness_bound == 0.0
    env = WeightExpr.of(0, 1, power(1, 1.0), envelope(2.0))
    r = class_c(env, env, 1.0)
    assert r.verdict is ClassC.LIMSUP_FINITE and r.witness_bound == pytest.approx(4.0)


@pytest.mark.parametrize("a1,a0", [(0.5, 1.0), (1.0, 1.0), (2.0, 0.5), (-0.5, 0.3)])
def test_class_c_reflection(a1, a0):
    w1 = WeightExpr.of(0, 1, power(1, a1), power(0, 0.7))
    w0 = WeightExpr.of(0, 1, power(1, a0))
    assert class_c(w1, w0, 1.0) == class_c(w1.reflect(), w0.reflect(), 0.0)


def test_singular_product_family_strongly():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        mu1, p, _, _ = singular_product_family(rng)
        rd = piecewise_decompose(mu1, p)
        assert rd.strongly
        # decomposition soundness: every interior parameter is singular on both sides
        q = 1.0 / (p - 1.0)
        for x in rd.params[1:-1]:
            assert not integrability(mu1.density, x, -1, q) and not integrability(mu1.density, x, 1, q)
        mu1, p, _, _ = singular_product_family(rng, bad=True)
        assert not piecewise_decompose(mu1, p).strongly
