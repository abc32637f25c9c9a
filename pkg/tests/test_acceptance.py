"""Exit criteria, one test each; every test prints a single PASS/FAIL line."""

import contextlib
import time

import numpy as np
import pytest

from instances import singular_product_family, restricted_instance, jacobi_pair
from sobmuck.battery import battery
from sobmuck.classify import piecewise_decompose
from sobmuck.decide import decide, replay
from sobmuck.measure import Measure, power
from sobmuck.muckenhoupt import Finite, comp_lambdas_check, finite_b, lambda_b, restricted_lambda_equiv
from sobmuck.sobolev import (
    SobolevSpace,
    best_constant_oracle,
    discretize,
    empirical_best_constant,
    extremal_monic,
    m_norm,
    niff_witness,
    phi_monomial,
    sop_monic,
    zeros,
)

pytestmark = pytest.mark.acceptance

L01 = Measure.lebesgue(0.0, 1.0)
L11 = Measure.lebesgue(-1.0, 1.0)
Z11 = Measure.zero(-1.0, 1.0)
BATTERY = battery()


@contextlib.contextmanager
def verdict(capsys, k, title):
    t = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        with capsys.disabled():
            print(f"\ncriterion {k:2d} FAIL  {title}: {exc!s:.200}")
        raise
    with capsys.disabled():
        print(f"\ncriterion {k:2d} PASS  {title} ({time.perf_counter() - t:.1f} s)")


def monic_legendre(n):
    prev, cur = np.array([1.0]), np.array([0.0, 1.0])
    if n == 0:
        return prev
    for k in range(1, n):
        nxt = np.concatenate([[0.0], cur]) - (k * k / (4.0 * k * k - 1.0)) * np.pad(prev, (0, 2))
        prev, cur = cur, nxt
    return cur


def random_measure(rng):
    atoms = [(1.0, float(rng.uniform(0.1, 2.0)))] if rng.random() < 0.4 else []
    if rng.random() < 0.3:
        atoms.append((float(rng.uniform(0.1, 0.9)), float(rng.uniform(0.1, 2.0))))
    return Measure.weighted(0.0, 1.0, power(0.0, rng.uniform(-0.9, 3.0)), power(1.0, rng.uniform(-0.9, 3.0)),
                            atoms=atoms)


def test_01_lambda_exact(capsys):
    with verdict(capsys, 1, "Lambda(dx, dx) on [0,1] at N=4096 encloses 1/4"):
        lambda_b(L01, L01, 2.0, N=64)  # warm caches outside the timed call
        t = time.perf_counter()
        r = lambda_b(L01, L01, 2.0, N=4096)
        elapsed = time.perf_counter() - t
        assert r.enclosure.contains(0.25), r.enclosure
        assert r.enclosure.width <= 1e-4, r.enclosure.width
        assert elapsed < 1.0, elapsed


def test_02_comp_lambdas(capsys):
    with verdict(capsys, 2, "comp-Lambdas bracket on 100 random instances"):
        rng = np.random.default_rng(20)
        with_end_atom = 0
        bad = []
        for i in range(100):
            nu1, nu2, p = jacobi_pair(rng)
            with_end_atom += nu1.atom_mass(1.0) > 0
            if not comp_lambdas_check(nu1, nu2, p):
                bad.append(i)
        assert not bad, bad
        assert with_end_atom > 0


def test_03_restricted_equivalence(capsys):
    with verdict(capsys, 3, "restricted and full finiteness agree on 50 random instances"):
        rng = np.random.default_rng(30)
        for _ in range(50):
            nu1, nu2, p, r0 = restricted_instance(rng)
            full, _ = finite_b(nu1, nu2, p)
            part, _ = finite_b(nu1.restrict(r0, 1.0), nu2.restrict(r0, 1.0), p)
            assert full is not Finite.UNKNOWN and full is part, (full, part)
            expected = "BothFinite" if full is Finite.YES else "BothInfinite"
            assert restricted_lambda_equiv(nu1, nu2, p, r0) == expected


def test_04_singular_product_classification(capsys):
    with verdict(capsys, 4, "singular products strongly regular 200/200, flipped 200/200"):
        rng = np.random.default_rng(40)
        good = sum(piecewise_decompose(*singular_product_family(rng)[:2]).strongly for _ in range(200))
        flipped = sum(not piecewise_decompose(*singular_product_family(rng, bad=True)[:2]).strongly for _ in range(200))
        assert (good, flipped) == (200, 200), (good, flipped)


def test_05_battery(capsys):
    with verdict(capsys, 5, "decision battery outcomes and certificate replay"):
        assert len(BATTERY) == 12
        for inst in BATTERY:
            v = decide(inst.mu0, inst.mu1, inst.p)
            assert v.outcome == inst.expected, (inst.name, v.outcome)
            assert replay(v, inst.mu0, inst.mu1, inst.p), inst.name
        by_name = {i.name: i for i in BATTERY}
        assert by_name["atom-derivative"].expected == "Bounded"
        assert by_name["interior-atom-obstruction"].expected == "Unbounded"
        assert by_name["lebesgue"].expected == "Bounded"
        assert by_name["critical-jacobi-atom"].expected == "Unknown"


def test_06_sop(capsys):
    with verdict(capsys, 6, "monic Legendre n<=6 and x - 1/4"):
        for n in range(7):
            got = sop_monic(L11, Z11, n).full()
            assert np.max(np.abs(np.asarray(got) - monic_legendre(n))) <= 1e-8, n
        q = sop_monic(Measure.lebesgue(0.0, 1.0, [(0.0, 1.0)]), Measure.atomic(0.0, 1.0, [(0.0, 1.0)]), 1)
        assert abs(q.coef[0] + 0.25) <= 1e-10, q.coef


def test_07_operator_norm(capsys):
    with verdict(capsys, 7, "||M||_25 for Legendre and monotone norms on the battery"):
        v = m_norm(L11, Z11, 2.0, 25)
        assert 0.97 <= v <= 1 + 1e-6, v
        for inst in BATTERY:
            t = time.perf_counter()
            sp = SobolevSpace(inst.mu0, inst.mu1, 25)
            vals = [m_norm(inst.mu0, inst.mu1, 2.0, n, space=sp) for n in range(26)]
            assert time.perf_counter() - t < 10.0, inst.name
            assert all(b >= a for a, b in zip(vals, vals[1:])), inst.name
            # the reported sequence stays on the per-degree singular values
            raw = [np.linalg.svd(sp.times_x(n), compute_uv=False)[0] for n in range(26)]
            assert np.allclose(vals, raw, rtol=1e-13, atol=0), inst.name


def test_08_zero_disk(capsys):
    with verdict(capsys, 8, "zeros inside 2||M||_n on plateaued bounded instances"):
        checked = 0
        for inst in BATTERY:
            if inst.expected != "Bounded":
                continue
            sp = SobolevSpace(inst.mu0, inst.mu1, 25)
            norms = [m_norm(inst.mu0, inst.mu1, 2.0, n, space=sp) for n in range(26)]
            if (norms[25] - norms[20]) / norms[20] >= 1e-3:
                continue
            checked += 1
            for n in range(1, 21):
                r = np.abs(zeros(sop_monic(inst.mu0, inst.mu1, n, space=sp))).max()
                assert r <= 2 * norms[n] * 1.05, (inst.name, n, r, norms[n])
        assert checked > 0


def test_09_niff_growth(capsys):
    with verdict(capsys, 9, "witness ratios grow, R_64/R_8 >= 2"):
        t = time.perf_counter()
        nu1, nu3 = Measure.atomic(0.0, 1.0, [(1.0, 1.0)]), Measure.weighted(0.0, 1.0, power(1.0, 2.0))
        r = [niff_witness(nu1, L01, nu3, 2.0, n) for n in (8, 16, 32, 64)]
        assert time.perf_counter() - t < 5.0
        assert all(b > a for a, b in zip(r, r[1:])), r
        assert r[-1] / r[0] >= 2, r


def test_10_oracles(capsys):
    with verdict(capsys, 10, "best constant vs eigen oracle; extremal p=2 vs orthogonal"):
        rng = np.random.default_rng(100)
        for _ in range(20):
            nu = [random_measure(rng) for _ in range(3)]
            got = empirical_best_constant(*nu, 2.0, 10, form="quadratic")
            ref = best_constant_oracle(*nu, 10)
            assert abs(got - ref) <= 1e-6 * ref, (got, ref)
        for inst in BATTERY:
            sp = SobolevSpace(inst.mu0, inst.mu1, 10)
            for n in (1, 2, 5, 10):
                e = extremal_monic(inst.mu0, inst.mu1, n, 2.0, space=sp).coef
                s = sop_monic(inst.mu0, inst.mu1, n, space=sp).coef
                assert np.max(np.abs(np.subtract(e, s))) <= 1e-8, (inst.name, n)


def test_11_gradients(capsys):
    with verdict(capsys, 11, "analytic gradient vs central differences at 100 points"):
        rules = (discretize(L11), discretize(Measure.lebesgue(-1.0, 1.0, [(0.0, 1.0)])))
        rng = np.random.default_rng(110)
        h = 1e-6
        for i in range(100):
            p = (1.5, 3.0, 4.0)[i % 3]
            b = rng.uniform(-2.0, 2.0, 4)
            _, g = phi_monomial(None, None, p, b, rules)
            fd = np.array([(phi_monomial(None, None, p, b + h * e, rules)[0]
                            - phi_monomial(None, None, p, b - h * e, rules)[0]) / (2 * h) for e in np.eye(4)])
            assert np.linalg.norm(fd - g) <= 1e-5 * np.linalg.norm(g), (p, b)


def test_12_cli_determinism(capsys, tmp_path):
    from test_cli import COMMANDS, run

    with verdict(capsys, 12, "byte-identical artifacts for every command"):
        for command in sorted(COMMANDS):
            c1, o1 = run(tmp_path, command, sub=f"{command}-1")
            c2, o2 = run(tmp_path, command, sub=f"{command}-2")
            assert c1 == c2 == 0, command
            names = sorted(p.name for p in o1.iterdir() if p.name != "manifest.json")
            assert names, command
            for name in names:
                assert (o1 / name).read_bytes() == (o2 / name).read_bytes(), (command, name)
