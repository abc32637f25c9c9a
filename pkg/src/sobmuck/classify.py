"""Structural classification of the derivative measure.

Regular-point intervals, piecewise (strongly) regular decompositions, the
atom set H, piecewise monotonicity and the ratio class of a pair of weights
at an endpoint.  Every decision is made from order tuples.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .measure import Measure, NumericMeasure, WeightExpr
from .order import UNKNOWN, ZERO, ratio_limit


class NotRegOnWholeInterval(ValueError):
    """The reciprocal power is not locally integrable inside the interval."""


class NotPiecewiseRegular(ValueError):
    pass


class RegClass(enum.Enum):
    CLOSED_CLOSED = "ClosedClosed"
    CLOSED_OPEN = "ClosedOpen"
    OPEN_CLOSED = "OpenClosed"
    OPEN_OPEN = "OpenOpen"

    @property
    def closed_left(self) -> bool:
        return self in (RegClass.CLOSED_CLOSED, RegClass.CLOSED_OPEN)

    @property
    def closed_right(self) -> bool:
        return self in (RegClass.CLOSED_CLOSED, RegClass.OPEN_CLOSED)

    @classmethod
    def from_flags(cls, left: bool, right: bool) -> "RegClass":
        return {
            (True, True): cls.CLOSED_CLOSED,
            (True, False): cls.CLOSED_OPEN,
            (False, True): cls.OPEN_CLOSED,
            (False, False): cls.OPEN_OPEN,
        }[(left, right)]


def _integrable(w: WeightExpr, x: float, side: int, q: float) -> bool:
    return w.integrable_at(x, side, q)


def reg_interval(mu1: Measure, p: float, interval: tuple[float, float] | None = None) -> RegClass:
    """Which ends of ``interval`` are regular points for ``mu1``."""
    w = mu1.density
    c, d = interval if interval is not None else mu1.support
    q = 1.0 / (p - 1.0)
    for x in w.breakpoints():
        if c < x < d and not (_integrable(w, x, -1, q) and _integrable(w, x, 1, q)):
            raise NotRegOnWholeInterval(f"reciprocal weight is not integrable near {x}")
    for piece in w.pieces:
        if piece.zero and piece.hi > c and piece.lo < d:
            raise NotRegOnWholeInterval(f"density vanishes on [{piece.lo}, {piece.hi}]")
    return RegClass.from_flags(_integrable(w, c, 1, q), _integrable(w, d, -1, q))


@dataclass(frozen=True)
class RegData:
    params: tuple[float, ...]
    J: tuple[int, ...]
    H: tuple[float, ...]
    strongly: bool
    hull_extended: bool = False
    monotone_params: tuple[float, ...] | None = None
    reg: dict = field(default_factory=dict)

    def segment(self, j: int) -> tuple[float, float]:
        return self.params[j - 1], self.params[j]

    def to_dict(self) -> dict:
        return {
            "params": list(self.params),
            "J": list(self.J),
            "H": list(self.H),
            "strongly": self.strongly,
            "hull_extended": self.hull_extended,
            "monotone_params": None if self.monotone_params is None else list(self.monotone_params),
            "reg": {str(j): r.value for j, r in self.reg.items()},
        }


def _two_sided_nonint(w: WeightExpr, x: float, q: float) -> bool:
    return not _integrable(w, x, -1, q) and not _integrable(w, x, 1, q)


def piecewise_decompose(mu1: Measure, p: float, mu0: Measure | None = None) -> RegData:
    """Parameters, J, H and the strong flag of ``mu1``.

    When the support of ``mu1`` is a single point and ``mu0`` is given, the
    hull is widened to that of ``mu0``.
    """
    if isinstance(mu1, NumericMeasure):
        raise NotPiecewiseRegular("decomposition needs a symbolic measure")
    hull = mu1.support_hull()
    if hull is None:
        raise NotPiecewiseRegular("zero measure")
    extended = False
    if hull[0] == hull[1] and mu0 is not None:
        h0 = mu0.support_hull()
        if h0 is not None and h0[0] < h0[1]:
            hull = (min(hull[0], h0[0]), max(hull[1], h0[1]))
            extended = True
    c, d = hull
    w = mu1.density
    if c < w.a or d > w.b:
        w = mu1.extended(min(c, w.a), max(d, w.b)).density
    q = 1.0 / (p - 1.0)
    if c == d:
        params = [c]
    else:
        inner = [x for x in w.breakpoints() if c < x < d
                 and not (_integrable(w, x, -1, q) and _integrable(w, x, 1, q))]
        params = [c, *inner, d]
        # a parameter between two segments on which w vanishes is not one
        changed = True
        while changed:
            changed = False
            for j in range(1, len(params) - 1):
                if w.is_zero_on(params[j - 1], params[j]) and w.is_zero_on(params[j], params[j + 1]):
                    del params[j]
                    changed = True
                    break
    J = []
    reg = {}
    for j in range(1, len(params)):
        u, v = params[j - 1], params[j]
        if w.is_zero_on(u, v):
            continue
        bad = [x for x in w.breakpoints() if u < x < v
               and not (_integrable(w, x, -1, q) and _integrable(w, x, 1, q))]
        if bad or any(pc.zero for pc in w.pieces if pc.hi > u and pc.lo < v):
            raise NotPiecewiseRegular(f"segment [{u}, {v}] is neither regular nor atomic")
        J.append(j)
        reg[j] = RegClass.from_flags(_integrable(w, u, 1, q), _integrable(w, v, -1, q))
    H = tuple(x for x, _ in mu1.atoms if c <= x <= d and _two_sided_nonint(w, x, q))
    qs = 1.0 / p
    strongly = True
    for x in params:
        for side in (-1, 1):
            if not _integrable(w, x, side, q) and _integrable(w, x, side, qs):
                strongly = False
    return RegData(tuple(params), tuple(J), H, strongly, extended, None, reg)


def is_piecewise_monotone(mu1) -> tuple[str, tuple[float, ...] | None]:
    """``("Yes", params)`` for symbolic measures, ``("Unknown", None)`` otherwise.

    Near a center every non-trivial order tuple is eventually monotone and the
    remaining factors are comparable to constants, so splitting every piece at
    its midpoint gives admissible parameters.
    """
    if isinstance(mu1, NumericMeasure):
        return "Unknown", None
    hull = mu1.support_hull()
    if hull is None:
        return "Yes", ()
    pts = {hull[0], hull[1]}
    for pc in mu1.density.pieces:
        lo, hi = max(pc.lo, hull[0]), min(pc.hi, hull[1])
        if hi > lo:
            pts.update((lo, hi))
            if not pc.zero:
                pts.add(0.5 * (lo + hi))
    return "Yes", tuple(sorted(pts))


class ClassC(enum.Enum):
    LIMIT_INFINITY = "LimitInfinity"
    LIMSUP_FINITE = "LimsupFinite"
    NOT_IN_CLASS = "NotInClass"


@dataclass(frozen=True)
class ClassCResult:
    verdict: ClassC
    witness_bound: float | None = None

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "witnessBound": self.witness_bound}


def class_c(w1, w0, endpoint: float, side: int | None = None) -> ClassCResult:
    """Ratio class of ``w1/w0`` approaching ``endpoint`` from inside.

    ``side`` is -1 for a right endpoint (approach from the left) and +1 for a
    left endpoint; by default it is inferred from the support of ``w1``.
    """
    if side is None:
        side = -1 if endpoint == w1.b else 1
    t1 = w1.order(endpoint, side)
    t0 = w0.order(endpoint, side)
    if t1 is UNKNOWN or t0 is UNKNOWN:
        return ClassCResult(ClassC.NOT_IN_CLASS)
    if t1 is ZERO:
        return ClassCResult(ClassC.LIMSUP_FINITE, 0.0)
    if t0 is ZERO:
        return ClassCResult(ClassC.LIMIT_INFINITY)
    lim = ratio_limit(t1, t0)
    if lim == 1:
        return ClassCResult(ClassC.LIMIT_INFINITY)
    if lim == -1:
        return ClassCResult(ClassC.LIMSUP_FINITE, 0.0)
    rho = w1.nonlocal_value(endpoint, side) / w0.nonlocal_value(endpoint, side)
    C = w1.envelope_at(endpoint, side) * w0.envelope_at(endpoint, side)
    return ClassCResult(ClassC.LIMSUP_FINITE, rho * C)
