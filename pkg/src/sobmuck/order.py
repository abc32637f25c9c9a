"""Asymptotic normal form of a weight near one side of a point.

Near a point ``x`` a weight built from the supported factors behaves like

    exp(-sum_i beta_i d**-gamma_i) * d**alpha * L**delta * LL**eps * LLL**lll

with ``d = |t - x|``, ``L = 1 + |log d|``, ``LL = 1 + log L`` and
``LLL = 1 + log LL``.  Every finiteness question in the package is reduced to
comparisons of these tuples; nothing is ever decided from a floating point
overflow.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import total_ordering

SNAP = 1e-12


def snap(x: float) -> float:
    """Round ``x`` to the nearest integer or half-integer when within SNAP."""
    for grid in (1.0, 2.0):
        r = round(x * grid) / grid
        if abs(x - r) <= SNAP:
            return r
    return x


def _sgn(x: float) -> int:
    if x > SNAP:
        return 1
    if x < -SNAP:
        return -1
    return 0


class Tag(enum.Enum):
    """Local behaviour that is not an order tuple."""

    ZERO = "zero"  # density vanishes identically near the point
    UNKNOWN = "unknown"  # cannot be decided symbolically


ZERO = Tag.ZERO
UNKNOWN = Tag.UNKNOWN


def _merge_exps(exps) -> tuple[tuple[float, float], ...]:
    acc: dict[float, float] = {}
    for gamma, beta in exps:
        g = snap(gamma)
        acc[g] = acc.get(g, 0.0) + beta
    out = [(g, snap(b)) for g, b in acc.items() if _sgn(b) != 0]
    out.sort(key=lambda gb: -gb[0])
    return tuple(out)


@total_ordering
@dataclass(frozen=True, eq=False)
class OrderTuple:
    """Order of growth of a weight as the distance ``d`` tends to zero.

    ``exps`` holds ``(gamma, beta)`` pairs for factors ``exp(-beta d**-gamma)``;
    ``beta > 0`` decays, ``beta < 0`` blows up.  Tuples are ordered by size
    near the point: ``s < t`` iff ``s/t -> 0``.
    """

    exps: tuple[tuple[float, float], ...] = ()
    alpha: float = 0.0
    delta: float = 0.0
    eps: float = 0.0
    lll: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "exps", _merge_exps(self.exps))
        for name in ("alpha", "delta", "eps", "lll"):
            object.__setattr__(self, name, snap(float(getattr(self, name))))

    # algebra -----------------------------------------------------------
    def __mul__(self, other: "OrderTuple") -> "OrderTuple":
        return OrderTuple(
            self.exps + other.exps,
            self.alpha + other.alpha,
            self.delta + other.delta,
            self.eps + other.eps,
            self.lll + other.lll,
        )

    def power(self, s: float) -> "OrderTuple":
        return OrderTuple(
            tuple((g, s * b) for g, b in self.exps),
            s * self.alpha,
            s * self.delta,
            s * self.eps,
            s * self.lll,
        )

    def inverse(self) -> "OrderTuple":
        return self.power(-1.0)

    def __truediv__(self, other: "OrderTuple") -> "OrderTuple":
        return self * other.inverse()

    # comparisons -------------------------------------------------------
    def key(self) -> tuple:
        return (self.exps, self.alpha, self.delta, self.eps, self.lll)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OrderTuple):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __lt__(self, other: "OrderTuple") -> bool:
        return (self / other).limit() == -1

    def limit(self) -> int:
        """+1 if the weight tends to infinity, -1 if to zero, 0 if comparable to 1."""
        if self.exps:
            return -1 if self.exps[0][1] > 0 else 1
        s = _sgn(self.alpha)
        if s:
            return -s
        for v in (self.delta, self.eps, self.lll):
            s = _sgn(v)
            if s:
                return s
        return 0

    def is_trivial(self) -> bool:
        return self.key() == ((), 0.0, 0.0, 0.0, 0.0)

    @property
    def leading_exp(self) -> tuple[float, float] | None:
        return self.exps[0] if self.exps else None

    def integrable(self) -> bool:
        """Integrability of the weight on ``(0, d0)``."""
        if self.exps:
            return self.exps[0][1] > 0
        a = _sgn(self.alpha + 1.0)
        if a:
            return a > 0
        for v in (self.delta, self.eps, self.lll):
            s = _sgn(v + 1.0)
            if s:
                return s < 0
        return False

    def tail_order(self) -> "OrderTuple":
        """Order of ``int_0^d`` for an integrable tuple."""
        if not self.integrable():
            raise ValueError(f"{self} is not integrable")
        if self.exps:
            g = self.exps[0][0]
            return OrderTuple(self.exps, self.alpha + g + 1.0, self.delta, self.eps, self.lll)
        if _sgn(self.alpha + 1.0):
            return OrderTuple((), self.alpha + 1.0, self.delta, self.eps, self.lll)
        if _sgn(self.delta + 1.0):
            return OrderTuple((), 0.0, self.delta + 1.0, self.eps, self.lll)
        if _sgn(self.eps + 1.0):
            return OrderTuple((), 0.0, 0.0, self.eps + 1.0, self.lll)
        return OrderTuple((), 0.0, 0.0, 0.0, self.lll + 1.0)

    def growth_order(self) -> "OrderTuple":
        """Order of ``int_d^{d0}`` as ``d -> 0`` for a non-integrable tuple."""
        if self.integrable():
            raise ValueError(f"{self} is integrable")
        if self.exps:
            g = self.exps[0][0]
            return OrderTuple(self.exps, self.alpha + g + 1.0, self.delta, self.eps, self.lll)
        if _sgn(self.alpha + 1.0):
            return OrderTuple((), self.alpha + 1.0, self.delta, self.eps, self.lll)
        if _sgn(self.delta + 1.0):
            return OrderTuple((), 0.0, self.delta + 1.0, self.eps, self.lll)
        if _sgn(self.eps + 1.0):
            return OrderTuple((), 0.0, 0.0, self.eps + 1.0, self.lll)
        if _sgn(self.lll + 1.0):
            return OrderTuple((), 0.0, 0.0, 0.0, self.lll + 1.0)
        # log of LLL: slower than any positive LLL power, still unbounded
        raise NotImplementedError("quadruple-logarithmic growth is not representable")

    def at(self, d):
        """Evaluate the normal form at distance(s) ``d`` (``0 < d``)."""
        import numpy as np

        d = np.asarray(d, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore", under="ignore"):
            L = 1.0 + np.abs(np.log(d))
            LL = 1.0 + np.log(L)
            out = d**self.alpha
            if self.delta:
                out = out * L**self.delta
            if self.eps:
                out = out * LL**self.eps
            if self.lll:
                out = out * (1.0 + np.log(LL)) ** self.lll
            for g, b in self.exps:
                out = out * np.exp(-b * d ** (-g))
        return out

    def __repr__(self) -> str:
        parts = []
        for g, b in self.exps:
            parts.append(f"exp(-{b:g}d^-{g:g})")
        for name, v in (("d", self.alpha), ("L", self.delta), ("LL", self.eps), ("LLL", self.lll)):
            if v:
                parts.append(f"{name}^{v:g}")
        return "Order(" + (" ".join(parts) or "1") + ")"

    def to_dict(self) -> dict:
        return {
            "exps": [[g, b] for g, b in self.exps],
            "alpha": self.alpha,
            "delta": self.delta,
            "eps": self.eps,
            "lll": self.lll,
        }


TRIVIAL = OrderTuple()


def ratio_limit(top, bottom) -> int | Tag:
    """Limit class of ``top/bottom``: +1 (infinity), -1 (zero), 0 (comparable).

    Either argument may be a Tag; ``ZERO/ZERO`` is reported as -1 (the ratio
    is bounded by any positive constant in the measure sense).
    """
    if top is UNKNOWN or bottom is UNKNOWN:
        return UNKNOWN
    if top is ZERO:
        return -1
    if bottom is ZERO:
        return 1
    return (top / bottom).limit()


def finite_or_inf(x: float) -> float:
    return x if math.isfinite(x) else math.inf
