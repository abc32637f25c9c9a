"""Regression instances for the decision engine and the numerical checks."""

from __future__ import annotations

from dataclasses import dataclass

from .measure import Measure, power


@dataclass(frozen=True)
class Instance:
    name: str
    mu0: Measure
    mu1: Measure
    p: float
    expected: str


def battery() -> list[Instance]:
    L01 = Measure.lebesgue(0.0, 1.0)
    L11 = Measure.lebesgue(-1.0, 1.0)
    return [
        Instance("atom-derivative", Measure.lebesgue(0.0, 1.0, [(0.0, 1.0)]),
                 Measure.atomic(0.0, 1.0, [(0.0, 1.0)]), 2.0, "Bounded"),
        Instance("interior-atom-obstruction", L11,
                 Measure.weighted(-1.0, 1.0, power(0.0, 3.0), atoms=[(0.0, 1.0)]), 2.0, "Unbounded"),
        Instance("lebesgue", L01, L01, 2.0, "Bounded"),
        Instance("critical-jacobi-atom", L11,
                 Measure.weighted(-1.0, 1.0, power(-1.0, 1.0), power(1.0, 1.0), atoms=[(1.0, 1.0)]), 2.0, "Unknown"),
        Instance("legendre", L11, Measure.zero(-1.0, 1.0), 2.0, "Bounded"),
        Instance("jacobi", Measure.weighted(-1.0, 1.0, power(1.0, 0.5), power(-1.0, -0.5)),
                 Measure.weighted(-1.0, 1.0, power(1.0, 0.5), power(-1.0, 0.5)), 2.0, "Bounded"),
        Instance("lebesgue-interior-atom", L01, Measure.lebesgue(0.0, 1.0, [(0.5, 1.0)]), 2.0, "Bounded"),
        Instance("cubic-right", L01, Measure.weighted(0.0, 1.0, power(1.0, 3.0)), 2.0, "Bounded"),
        Instance("endpoint-atom-unmatched", L01,
                 Measure.weighted(0.0, 1.0, power(0.0, 3.0), atoms=[(0.0, 1.0)]), 2.0, "Unbounded"),
        Instance("endpoint-atom-matched", Measure.lebesgue(0.0, 1.0, [(0.0, 1.0)]),
                 Measure.weighted(0.0, 1.0, power(0.0, 3.0), atoms=[(0.0, 1.0)]), 2.0, "Bounded"),
        Instance("matched-interior-atom", Measure.lebesgue(0.0, 1.0, [(0.5, 1.0)]),
                 Measure.lebesgue(0.0, 1.0, [(0.5, 2.0)]), 2.0, "Bounded"),
        Instance("critical-jacobi-matched", Measure.lebesgue(-1.0, 1.0, [(-1.0, 1.0), (1.0, 1.0)]),
                 Measure.weighted(-1.0, 1.0, power(-1.0, 1.0), power(1.0, 1.0), atoms=[(-1.0, 1.0), (1.0, 1.0)]),
                 2.0, "Bounded"),
    ]
