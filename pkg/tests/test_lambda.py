import math

import numpy as np
import pytest

from instances import restricted_instance, jacobi_pair
from sobmuck.measure import Measure, power
from sobmuck.muckenhoupt import (
    Finite,
    PreconditionError,
    comp_lambdas_check,
    lambda_a,
    lambda_b,
    lambda_prime_b,
    restricted_lambda_equiv,
    three_measure_condition,
)

L01 = Measure.lebesgue(0, 1)
DELTA1 = Measure.atomic(0, 1, [(1.0, 1.0)])


def test_lebesgue_quarter():
    r = lambda_b(L01, L01, 2.0, N=1024)
    assert r.enclosure.contains(0.25) and r.enclosure.width <= 1e-6
    assert r.argmax_r == pytest.approx(0.5)
    assert r.finite is Finite.YES


def test_closed_versus_half_open():
    assert lambda_b(DELTA1, L01, 2.0).enclosure.contains(1.0, 1e-12)
    assert lambda_prime_b(DELTA1, L01, 2.0).enclosure.hi == 0.0


def test_zero_reciprocal_is_infinite():
    r = lambda_b(L01, Measure.zero(0, 1), 2.0)
    assert r.finite is Finite.NO and r.enclosure.hi == math.inf


def test_closed_form_jacobi():
    # nu1 = dx, w2 = x on [0,1], p = 3:  W(r) = int_0^r t^(-1/2) = 2 sqrt(r),
    # Lambda = sup (1 - r) * 4 r = 1
    nu2 = Measure.weighted(0, 1, power(0, 1.0))
    r = lambda_b(L01, nu2, 3.0, N=512)
    assert r.enclosure.contains(1.0, 1e-9)


def test_comp_lambdas_examples():
    assert comp_lambdas_check(DELTA1, L01, 2.0)
    assert comp_lambdas_check(L01, L01, 2.0)


def test_restricted_equiv_examples():
    assert restricted_lambda_equiv(L01, L01, 2.0, 0.5) == "BothFinite"
    assert restricted_lambda_equiv(DELTA1, Measure.weighted(0, 1, power(1, 2.0)), 2.0, 0.5) == "BothInfinite"
    with pytest.raises(PreconditionError):
        restricted_lambda_equiv(L01, Measure.weighted(0, 1, power(0, 2.0)), 2.0, 0.5)


def test_three_measure_examples():
    res = three_measure_condition(L01, L01, L01, 2.0)
    assert res.status == "Holds"
    res = three_measure_condition(L01, Measure.zero(0, 1), L01, 2.0)
    assert res.status == "Holds" and res.cert.k == 0.0
    assert res.cert.lam.enclosure.contains(0.25, 1e-6)
    nu1 = Measure.lebesgue(0, 1, [(1.0, 1.0)])
    res = three_measure_condition(nu1, L01, Measure.weighted(0, 1, power(1, 2.0)), 2.0)
    assert res.status == "NotFound"


def test_precondition():
    with pytest.raises(PreconditionError):
        lambda_b(L01, L01, 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_bracket_and_refinement(seed):
    rng = np.random.default_rng(seed)
    for _ in range(10):
        nu1, nu2, p = jacobi_pair(rng)
        r1 = lambda_b(nu1, nu2, p, N=64)
        r2 = lambda_b(nu1, nu2, p, N=128)
        assert r1.enclosure.lo <= r1.enclosure.hi
        if r1.enclosure.finite:
            # both grids refine to the same floor; only rounding may separate them
            assert r2.enclosure.width <= r1.enclosure.width + 1e-4 * r1.enclosure.hi
            assert r1.enclosure.contains(r2.enclosure.mid, r2.enclosure.width + 1e-9 * r2.enclosure.hi)


def test_scale_covariance_in_atom_mass():
    nu2 = Measure.weighted(0, 1, power(0, 0.5), power(1, 1.5))
    for c in (0.5, 3.0):
        base = lambda_b(Measure.atomic(0, 1, [(0.7, 1.0)]), nu2, 2.5).enclosure
        scaled = lambda_b(Measure.atomic(0, 1, [(0.7, c)]), nu2, 2.5).enclosure
        assert scaled.contains(c * base.mid, scaled.width + c * base.width + 1e-12)


def test_endpoint_symmetry():
    rng = np.random.default_rng(11)
    for _ in range(8):
        nu1, nu2, p = jacobi_pair(rng)
        b = lambda_b(nu1, nu2, p)
        a = lambda_a(nu1.reflect(), nu2.reflect(), p)
        assert a.finite == b.finite
        if b.enclosure.finite:
            assert max(a.enclosure.lo, b.enclosure.lo) <= min(a.enclosure.hi, b.enclosure.hi) * (1 + 1e-9)


def test_comp_lambdas_random():
    rng = np.random.default_rng(3)
    assert all(comp_lambdas_check(*jacobi_pair(rng)) for _ in range(10))


def test_restricted_equiv_random():
    rng = np.random.default_rng(4)
    for _ in range(10):
        nu1, nu2, p, r0 = restricted_instance(rng)
        assert restricted_lambda_equiv(nu1, nu2, p, r0) in ("BothFinite", "BothInfinite")
