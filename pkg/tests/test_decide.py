import json

import pytest

from sobmuck.battery import battery
from sobmuck.decide import decide, niff_screen, replay, split_dominated
from sobmuck.measure import Measure, power

L01 = Measure.lebesgue(0, 1)
BATTERY = battery()


def test_atom_origin_bounded():
    v = decide(Measure.lebesgue(0, 1, [(0.0, 1.0)]), Measure.atomic(0, 1, [(0.0, 1.0)]), 2.0)
    assert v.outcome == "Bounded"
    assert all(h["status"] == "verified" for h in v.hypotheses)


def test_interior_atom_obstruction():
    v = decide(Measure.lebesgue(-1, 1), Measure.weighted(-1, 1, power(0, 3.0), atoms=[(0.0, 1.0)]), 2.0)
    assert (v.outcome, v.theorem) == ("Unbounded", "T-R1-neg")


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_lebesgue_bounded(p):
    assert decide(L01, L01, p).outcome == "Bounded"


def test_critical_jacobi_unknown_names_gap():
    mu1 = Measure.weighted(-1, 1, power(-1, 1.0), power(1, 1.0), atoms=[(1.0, 1.0)])
    v = decide(Measure.lebesgue(-1, 1), mu1, 2.0)
    assert v.outcome == "Unknown" and v.theorem is None
    failed = [h["name"] for h in v.hypotheses if h["status"] == "failed"]
    assert "mu0({1.0}) > 0" in failed


def test_mu0_zero_is_unbounded():
    v = decide(Measure.zero(0, 1), L01, 2.0)
    assert (v.outcome, v.theorem) == ("Unbounded", "Mu0-zero-neg")


def test_infinite_measure_rejected():
    with pytest.raises(ValueError):
        decide(L01, Measure.weighted(0, 1, power(1, -1.0)), 2.0)


def test_split_examples():
    mu11, mu12, k = split_dominated(Measure.lebesgue(0, 1, [(0.5, 2.0)]), Measure.lebesgue(0, 1, [(0.5, 1.0)]))
    assert k == 2.0 and mu12.atoms == ((0.5, 2.0),) and not mu12.has_density()
    assert mu11.atoms == () and mu11.density.pieces[0].factors == ()
    assert split_dominated(L01, Measure.zero(0, 1)) is None
    mu11, mu12, k = split_dominated(Measure.weighted(0, 1, power(0, 0.5)), Measure.weighted(0, 1, power(0, 0.3)))
    assert k == pytest.approx(1.0, abs=1e-8) and mu11.density.is_zero_on(0, 1)


def test_niff_screen_examples():
    d1 = Measure.atomic(0, 1, [(1.0, 1.0)])
    for p in (1.5, 2.0, 3.0):
        assert niff_screen(d1, L01, Measure.weighted(0, 1, power(1, p)), p) == "Triggered"
    assert niff_screen(d1, Measure.lebesgue(0, 1, [(1.0, 1.0)]), Measure.weighted(0, 1, power(1, 2.0)), 2.0) \
        == "NotTriggered"
    assert niff_screen(d1, L01, L01, 2.0) == "NotTriggered"


@pytest.mark.parametrize("inst", BATTERY, ids=[i.name for i in BATTERY])
def test_battery_outcome_and_replay(inst):
    v = decide(inst.mu0, inst.mu1, inst.p)
    assert v.outcome == inst.expected
    if v.outcome != "Unknown":
        assert v.theorem is not None
        assert all(h["status"] == "verified" for h in v.hypotheses)
    assert replay(v, inst.mu0, inst.mu1, inst.p)


@pytest.mark.parametrize("inst", BATTERY, ids=[i.name for i in BATTERY])
def test_deterministic(inst):
    assert decide(inst.mu0, inst.mu1, inst.p).to_json() == decide(inst.mu0, inst.mu1, inst.p).to_json()


@pytest.mark.parametrize("inst", BATTERY, ids=[i.name for i in BATTERY])
def test_extra_mu0_atom_never_hurts(inst):
    before = decide(inst.mu0, inst.mu1, inst.p).outcome
    a, b = inst.mu0.support
    for x in (a, 0.5 * (a + b), b):
        atoms = dict(inst.mu0.atoms)
        atoms[x] = atoms.get(x, 0.0) + 1.0
        mu0 = Measure(inst.mu0.support, inst.mu0.density, tuple(atoms.items()))
        after = decide(mu0, inst.mu1, inst.p).outcome
        assert not (before == "Bounded" and after == "Unbounded")


def test_verdict_json_schema():
    v = decide(L01, L01, 2.0)
    d = json.loads(v.to_json())
    assert set(d) == {"outcome", "theorem", "witnesses", "hypotheses"}
    assert all(set(h) == {"name", "status"} for h in d["hypotheses"])
