"""Weights and finite measures on a compact interval.

A :class:`WeightExpr` is a piecewise product of symbolic factors; a
:class:`Measure` adds finitely many Dirac atoms.  The positive part
``(nu1 - k nu2)_+`` leaves the symbolic class and is represented by
:class:`NumericMeasure`, which keeps an order tag at every piece end.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .order import TRIVIAL, UNKNOWN, ZERO, OrderTuple, ratio_limit, snap

KINDS = ("power", "log", "loglog", "expneg", "envelope")


class MeasureError(ValueError):
    """Invalid measure or weight specification."""


@dataclass(frozen=True)
class Factor:
    """One factor of a weight, as a function of the distance to ``center``.

    power    ``d**exp``
    log      ``(1 + |log d|)**exp``
    loglog   ``(1 + log(1 + |log d|))**exp``
    expneg   ``exp(-beta * d**-gamma)``
    envelope a bounded factor known only to lie in ``[1/C, C]``; evaluates to 1
    """

    kind: str
    center: float = 0.0
    exp: float = 0.0
    beta: float = 0.0
    gamma: float = 1.0
    C: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MeasureError(f"unknown factor kind {self.kind!r}")
        if self.kind == "expneg" and not (self.beta >= 0 and self.gamma > 0):
            raise MeasureError("expneg requires beta >= 0 and gamma > 0")
        if self.kind == "envelope" and not self.C >= 1:
            raise MeasureError("envelope requires C >= 1")
        for v in (self.center, self.exp, self.beta, self.gamma, self.C):
            if not math.isfinite(v):
                raise MeasureError("factor parameters must be finite")

    @property
    def local(self) -> bool:
        return self.kind != "envelope"

    def order(self) -> OrderTuple:
        """Normal form of this factor near its own center."""
        if self.kind == "power":
            return OrderTuple(alpha=self.exp)
        if self.kind == "log":
            return OrderTuple(delta=self.exp)
        if self.kind == "loglog":
            return OrderTuple(eps=self.exp)
        if self.kind == "expneg":
            return OrderTuple(exps=((self.gamma, self.beta),))
        return TRIVIAL

    def value(self, d, s: float = 1.0):
        """``factor(d)**s`` evaluated elementwise at distances ``d >= 0``."""
        d = np.asarray(d, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore", under="ignore"):
            if self.kind == "power":
                return d ** snap(s * self.exp)
            if self.kind == "log":
                return (1.0 + np.abs(np.log(d))) ** snap(s * self.exp)
            if self.kind == "loglog":
                return (1.0 + np.log1p(np.abs(np.log(d)))) ** snap(s * self.exp)
            if self.kind == "expneg":
                if self.beta == 0:
                    return np.ones_like(d)
                return np.exp(-s * self.beta * d ** (-self.gamma))
            return np.ones_like(d)

    def to_dict(self) -> dict:
        if self.kind == "envelope":
            return {"kind": "envelope", "C": self.C}
        if self.kind == "expneg":
            return {"kind": "expneg", "center": self.center, "beta": self.beta, "gamma": self.gamma}
        return {"kind": self.kind, "center": self.center, "exp": self.exp}

    @classmethod
    def from_dict(cls, d: dict) -> "Factor":
        kind = d.get("kind")
        try:
            if kind == "envelope":
                return cls("envelope", C=float(d["C"]))
            if kind == "expneg":
                return cls("expneg", center=float(d["center"]), beta=float(d["beta"]), gamma=float(d["gamma"]))
            return cls(kind, center=float(d["center"]), exp=float(d["exp"]))
        except KeyError as exc:
            raise MeasureError(f"factor {d} lacks field {exc}") from None


def power(center: float, exp: float) -> Factor:
    return Factor("power", center=center, exp=exp)


def logpower(center: float, exp: float) -> Factor:
    return Factor("log", center=center, exp=exp)


def loglogpower(center: float, exp: float) -> Factor:
    return Factor("loglog", center=center, exp=exp)


def expneg(center: float, beta: float, gamma: float) -> Factor:
    return Factor("expneg", center=center, beta=beta, gamma=gamma)


def envelope(C: float) -> Factor:
    return Factor("envelope", C=C)


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    factors: tuple[Factor, ...] = ()
    zero: bool = False

    @property
    def envelope(self) -> float:
        return math.prod(f.C for f in self.factors if f.kind == "envelope")

    def local_order(self, x: float) -> OrderTuple:
        t = TRIVIAL
        for f in self.factors:
            if f.local and f.center == x:
                t = t * f.order()
        return t

    def order(self, x: float, s: float = 1.0):
        """Order tag of ``w**s`` at a point ``x`` of the closed piece."""
        if self.zero:
            return ZERO
        return self.local_order(x).power(s)

    def nonlocal_value(self, x: float, s: float = 1.0) -> float:
        """Product of the factors not centered at ``x``, evaluated at ``x``."""
        v = 1.0
        for f in self.factors:
            if f.local and f.center != x:
                v *= float(f.value(abs(x - f.center), s))
        return v

    def evaluate(self, x, s: float = 1.0, anchor: float | None = None, dist=None):
        x = np.asarray(x, dtype=float)
        if self.zero:
            return np.zeros_like(x) if s > 0 else np.full_like(x, np.inf)
        out = np.ones_like(x)
        for f in self.factors:
            if not f.local:
                continue
            if anchor is not None and f.center == anchor:
                d = dist
            else:
                d = np.abs(x - f.center)
            out = out * f.value(d, s)
        return out

    def clip(self, lo: float, hi: float) -> "Piece":
        return Piece(max(lo, self.lo), min(hi, self.hi), self.factors, self.zero)

    def reflect(self, a: float, b: float) -> "Piece":
        fs = tuple(
            Factor(f.kind, a + b - f.center, f.exp, f.beta, f.gamma, f.C) if f.local else f
            for f in self.factors
        )
        return Piece(a + b - self.hi, a + b - self.lo, fs, self.zero)

    def to_dict(self) -> dict:
        if self.zero:
            return {"interval": [self.lo, self.hi], "zero": True}
        return {"interval": [self.lo, self.hi], "factors": [f.to_dict() for f in self.factors]}


def _split_at_centers(p: Piece) -> list[Piece]:
    if p.zero:
        return [p]
    cuts = sorted({f.center for f in p.factors if f.local and p.lo < f.center < p.hi})
    edges = [p.lo, *cuts, p.hi]
    return [Piece(u, v, p.factors, False) for u, v in zip(edges[:-1], edges[1:])]


@dataclass(frozen=True)
class WeightExpr:
    """Piecewise product of factors tiling ``support``.

    Pieces are split at every factor center lying strictly inside them, so a
    density can only be singular or vanish at piece ends.
    """

    support: tuple[float, float]
    pieces: tuple[Piece, ...]

    def __post_init__(self):
        a, b = map(float, self.support)
        if not a < b:
            raise MeasureError(f"support [{a}, {b}] is not a proper interval")
        ps = sorted(self.pieces, key=lambda p: p.lo)
        if not ps:
            raise MeasureError("weight needs at least one piece")
        tol = 1e-12 * max(1.0, abs(a), abs(b))
        if abs(ps[0].lo - a) > tol or abs(ps[-1].hi - b) > tol:
            raise MeasureError("pieces must cover the support")
        fixed = []
        prev = a
        for p in ps:
            if abs(p.lo - prev) > tol or not p.hi > p.lo:
                raise MeasureError("pieces must tile the support with disjoint interiors")
            fixed.append(Piece(prev, p.hi, p.factors, p.zero))
            prev = p.hi
        fixed[-1] = Piece(fixed[-1].lo, b, fixed[-1].factors, fixed[-1].zero)
        out: list[Piece] = []
        for p in fixed:
            out.extend(_split_at_centers(p))
        object.__setattr__(self, "support", (a, b))
        object.__setattr__(self, "pieces", tuple(out))

    # constructors ------------------------------------------------------
    @classmethod
    def of(cls, a: float, b: float, *factors: Factor) -> "WeightExpr":
        return cls((a, b), (Piece(a, b, tuple(factors)),))

    @classmethod
    def zeros(cls, a: float, b: float) -> "WeightExpr":
        return cls((a, b), (Piece(a, b, zero=True),))

    # queries -----------------------------------------------------------
    @property
    def a(self) -> float:
        return self.support[0]

    @property
    def b(self) -> float:
        return self.support[1]

    def breakpoints(self) -> list[float]:
        pts = {self.a, self.b}
        for p in self.pieces:
            pts.update((p.lo, p.hi))
        return sorted(pts)

    def centers(self) -> list[float]:
        return sorted({f.center for p in self.pieces for f in p.factors if f.local})

    def piece_at(self, x: float, side: int) -> Piece | None:
        """Piece containing ``(x, x+eps)`` (side=+1) or ``(x-eps, x)`` (side=-1)."""
        for p in self.pieces:
            if side > 0 and p.lo <= x < p.hi:
                return p
            if side < 0 and p.lo < x <= p.hi:
                return p
        return None

    def order(self, x: float, side: int, s: float = 1.0):
        """Order tag of ``w**s`` on the given side of ``x``; ZERO outside the support."""
        p = self.piece_at(x, side)
        if p is None:
            return ZERO
        return p.order(x, s)

    def integrable_at(self, x: float, side: int, q: float) -> bool:
        """Whether ``w**(-q)`` is integrable on a one-sided neighbourhood of ``x``."""
        t = self.order(x, side, -q)
        if t is ZERO:
            return False
        return t.integrable()

    def nonlocal_value(self, x: float, side: int) -> float:
        p = self.piece_at(x, side)
        return 0.0 if p is None or p.zero else p.nonlocal_value(x)

    def envelope_at(self, x: float, side: int) -> float:
        p = self.piece_at(x, side)
        return 1.0 if p is None else p.envelope

    def evaluate(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        for i, p in enumerate(self.pieces):
            last = i == len(self.pieces) - 1
            mask = (x >= p.lo) & ((x < p.hi) | (last & (x <= p.hi)))
            if mask.any():
                out[mask] = p.evaluate(x[mask])
        return out

    def is_zero_on(self, c: float, d: float) -> bool:
        return all(p.zero for p in self.pieces if p.hi > c and p.lo < d)

    def restrict(self, c: float, d: float) -> "WeightExpr":
        ps = [p.clip(c, d) for p in self.pieces if p.hi > c and p.lo < d]
        return WeightExpr((c, d), tuple(ps))

    def reflect(self) -> "WeightExpr":
        a, b = self.support
        return WeightExpr((a, b), tuple(p.reflect(a, b) for p in self.pieces))

    def with_factor(self, f: Factor) -> "WeightExpr":
        return WeightExpr(self.support, tuple(
            p if p.zero else Piece(p.lo, p.hi, p.factors + (f,)) for p in self.pieces))

    def to_dict(self) -> dict:
        return {"support": list(self.support), "pieces": [p.to_dict() for p in self.pieces]}


@dataclass(frozen=True)
class Measure:
    """Finite measure ``w dx + sum_i m_i delta_{x_i}`` on ``support``."""

    support: tuple[float, float]
    density: WeightExpr
    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        a, b = map(float, self.support)
        if self.density.support != (a, b):
            raise MeasureError("density support differs from measure support")
        atoms = sorted((float(x), float(m)) for x, m in self.atoms)
        xs = [x for x, _ in atoms]
        if len(set(xs)) != len(xs):
            raise MeasureError("atom abscissas must be distinct")
        for x, m in atoms:
            if not a <= x <= b:
                raise MeasureError(f"atom at {x} outside support [{a}, {b}]")
            if not (m > 0 and math.isfinite(m)):
                raise MeasureError("atom masses must be positive and finite")
        object.__setattr__(self, "support", (a, b))
        object.__setattr__(self, "atoms", tuple(atoms))

    symbolic = True

    # constructors ------------------------------------------------------
    @classmethod
    def lebesgue(cls, a: float = 0.0, b: float = 1.0, atoms: Iterable = ()) -> "Measure":
        return cls((a, b), WeightExpr.of(a, b), tuple(atoms))

    @classmethod
    def weighted(cls, a: float, b: float, *factors: Factor, atoms: Iterable = ()) -> "Measure":
        return cls((a, b), WeightExpr.of(a, b, *factors), tuple(atoms))

    @classmethod
    def atomic(cls, a: float, b: float, atoms: Iterable) -> "Measure":
        return cls((a, b), WeightExpr.zeros(a, b), tuple(atoms))

    @classmethod
    def zero(cls, a: float = 0.0, b: float = 1.0) -> "Measure":
        return cls((a, b), WeightExpr.zeros(a, b), ())

    # queries -----------------------------------------------------------
    @property
    def a(self) -> float:
        return self.support[0]

    @property
    def b(self) -> float:
        return self.support[1]

    def atom_mass(self, x: float) -> float:
        for xa, m in self.atoms:
            if xa == x:
                return m
        return 0.0

    def atoms_in(self, c: float, d: float, closed_left: bool = True, closed_right: bool = True) -> float:
        tot = 0.0
        for x, m in self.atoms:
            if (c < x < d) or (closed_left and x == c) or (closed_right and x == d):
                tot += m
        return tot

    def order(self, x: float, side: int):
        return self.density.order(x, side)

    def breakpoints(self) -> list[float]:
        return sorted(set(self.density.breakpoints()) | {x for x, _ in self.atoms})

    def density_zero_on(self, c: float, d: float) -> bool | None:
        return self.density.is_zero_on(c, d)

    def has_density(self) -> bool:
        return not all(p.zero for p in self.density.pieces)

    def support_hull(self) -> tuple[float, float] | None:
        """Convex hull of the support (None for the zero measure)."""
        pts = [x for x, _ in self.atoms]
        for p in self.density.pieces:
            if not p.zero:
                pts.extend((p.lo, p.hi))
        if not pts:
            return None
        return (min(pts), max(pts))

    # transforms --------------------------------------------------------
    def restrict(self, c: float, d: float, closed_left: bool = True, closed_right: bool = True) -> "Measure":
        atoms = [(x, m) for x, m in self.atoms
                 if (c < x < d) or (closed_left and x == c) or (closed_right and x == d)]
        return Measure((c, d), self.density.restrict(c, d), tuple(atoms))

    def reflect(self) -> "Measure":
        a, b = self.support
        return Measure((a, b), self.density.reflect(), tuple((a + b - x, m) for x, m in self.atoms))

    def with_atoms(self, atoms: Iterable) -> "Measure":
        return Measure(self.support, self.density, tuple(self.atoms) + tuple(atoms))

    def extended(self, a: float, b: float) -> "Measure":
        """Same measure viewed on a larger interval (zero density outside)."""
        if a > self.a or b < self.b:
            raise MeasureError("extension must contain the current support")
        pieces = list(self.density.pieces)
        if a < self.a:
            pieces.insert(0, Piece(a, self.a, zero=True))
        if b > self.b:
            pieces.append(Piece(self.b, b, zero=True))
        return Measure((a, b), WeightExpr((a, b), tuple(pieces)), self.atoms)

    # io ----------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "support": list(self.support),
            "pieces": [p.to_dict() for p in self.density.pieces],
            "atoms": [{"x": x, "mass": m} for x, m in self.atoms],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Measure":
        try:
            a, b = (float(v) for v in d["support"])
            pieces = []
            for pd in d.get("pieces") or [{"interval": [a, b], "factors": []}]:
                lo, hi = (float(v) for v in pd["interval"])
                if pd.get("zero"):
                    pieces.append(Piece(lo, hi, zero=True))
                else:
                    pieces.append(Piece(lo, hi, tuple(Factor.from_dict(f) for f in pd.get("factors", []))))
            atoms = tuple((float(at["x"]), float(at["mass"])) for at in d.get("atoms", []))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, MeasureError):
                raise
            raise MeasureError(f"malformed measure specification: {exc}") from None
        return cls((a, b), WeightExpr((a, b), tuple(pieces)), atoms)


def load_measure(path: str | Path) -> Measure:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeasureError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise MeasureError(f"{path}: top level must be an object")
    return Measure.from_dict(data)


def dump_measure(m: Measure, path: str | Path) -> None:
    Path(path).write_text(json.dumps(m.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


# --- positive part ------------------------------------------------------------


@dataclass(frozen=True)
class PosPiece:
    """Piece of ``max(w1 - k w2, 0)``; ``p2`` is None where ``w2`` vanishes."""

    lo: float
    hi: float
    p1: Piece
    p2: Piece | None
    k: float
    tag_lo: object
    tag_hi: object

    @property
    def zero(self) -> bool:
        return self.p1.zero or (self.tag_lo is ZERO and self.tag_hi is ZERO and self._neg_inside())

    @property
    def envelope(self) -> float:
        return self.p1.envelope

    def _neg_inside(self) -> bool:
        xs = np.linspace(self.lo, self.hi, 33)[1:-1]
        return bool(np.all(self.evaluate(xs) <= 0))

    def evaluate(self, x, s: float = 1.0, anchor: float | None = None, dist=None):
        if s != 1.0:
            raise MeasureError("powers of a positive-part density are not supported")
        v = self.p1.evaluate(x, 1.0, anchor, dist)
        if self.p2 is not None and self.k > 0:
            with np.errstate(invalid="ignore"):
                v = v - self.k * self.p2.evaluate(x, 1.0, anchor, dist)
            v = np.where(np.isnan(v), 0.0, v)
        return np.maximum(v, 0.0)

    def order(self, x: float, s: float = 1.0):
        if s != 1.0:
            raise MeasureError("powers of a positive-part density are not supported")
        if x == self.lo:
            return self.tag_lo
        if x == self.hi:
            return self.tag_hi
        v = float(self.evaluate(np.array([x]))[0])
        return TRIVIAL if v > 0 else (ZERO if v < 0 else UNKNOWN)

    def singular_at(self, x: float) -> bool:
        if not self.p1.local_order(x).is_trivial():
            return True
        return self.p2 is not None and not self.p2.local_order(x).is_trivial()


def _pos_tag(p1: Piece, p2: Piece | None, k: float, x: float):
    t1 = p1.order(x)
    if t1 is ZERO or k == 0 or p2 is None or p2.zero:
        return t1
    t2 = p2.order(x)
    lim = ratio_limit(t1, t2)
    if lim == 1:
        return t1
    if lim == -1:
        return ZERO
    rho = p1.nonlocal_value(x) / p2.nonlocal_value(x)
    C = p1.envelope * p2.envelope
    if k > rho * C:
        return ZERO
    if k < rho / C:
        return t1
    return UNKNOWN


@dataclass(frozen=True)
class NumericMeasure:
    """Positive part ``(nu1 - k nu2)_+`` with order tags at every piece end."""

    support: tuple[float, float]
    pieces: tuple[PosPiece, ...]
    atoms: tuple[tuple[float, float], ...]
    k: float

    symbolic = False

    @property
    def a(self) -> float:
        return self.support[0]

    @property
    def b(self) -> float:
        return self.support[1]

    def piece_at(self, x: float, side: int) -> PosPiece | None:
        for p in self.pieces:
            if side > 0 and p.lo <= x < p.hi:
                return p
            if side < 0 and p.lo < x <= p.hi:
                return p
        return None

    def order(self, x: float, side: int):
        p = self.piece_at(x, side)
        return ZERO if p is None else p.order(x)

    def evaluate(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        for i, p in enumerate(self.pieces):
            last = i == len(self.pieces) - 1
            mask = (x >= p.lo) & ((x < p.hi) | (last & (x <= p.hi)))
            if mask.any():
                out[mask] = p.evaluate(x[mask])
        return out

    def breakpoints(self) -> list[float]:
        pts = {self.a, self.b} | {x for x, _ in self.atoms}
        for p in self.pieces:
            pts.update((p.lo, p.hi))
        return sorted(pts)

    def atom_mass(self, x: float) -> float:
        return dict(self.atoms).get(x, 0.0)

    def atoms_in(self, c: float, d: float, closed_left: bool = True, closed_right: bool = True) -> float:
        return Measure.atoms_in(self, c, d, closed_left, closed_right)

    def density_zero_on(self, c: float, d: float) -> bool | None:
        ps = [p for p in self.pieces if p.hi > c and p.lo < d]
        if all(p.zero for p in ps):
            return True
        if any(p.p2 is None and not p.p1.zero for p in ps):
            return False
        return None

    def has_density(self) -> bool:
        return not all(p.zero for p in self.pieces)

    def restrict(self, c: float, d: float, closed_left: bool = True, closed_right: bool = True) -> "NumericMeasure":
        ps = []
        for p in self.pieces:
            if p.hi > c and p.lo < d:
                lo, hi = max(p.lo, c), min(p.hi, d)
                ps.append(PosPiece(lo, hi, p.p1, p.p2, p.k,
                                   p.tag_lo if lo == p.lo else p.order(lo),
                                   p.tag_hi if hi == p.hi else p.order(hi)))
        atoms = tuple((x, m) for x, m in self.atoms
                      if (c < x < d) or (closed_left and x == c) or (closed_right and x == d))
        return NumericMeasure((c, d), tuple(ps), atoms, self.k)

    def reflect(self) -> "NumericMeasure":
        a, b = self.support
        ps = tuple(
            PosPiece(a + b - p.hi, a + b - p.lo, p.p1.reflect(a, b),
                     None if p.p2 is None else p.p2.reflect(a, b), p.k, p.tag_hi, p.tag_lo)
            for p in reversed(self.pieces))
        return NumericMeasure((a, b), ps, tuple(sorted((a + b - x, m) for x, m in self.atoms)), self.k)


def positive_part(nu1: Measure, k: float, nu2: Measure) -> NumericMeasure:
    """``(nu1 - k nu2)_+`` on the support of ``nu1``; ``nu2`` is zero off its support."""
    if not k >= 0:
        raise MeasureError("k must be nonnegative")
    a, b = nu1.support
    w2 = nu2.density
    cuts = {x for x in w2.breakpoints() if a < x < b}
    pieces = []
    for p in nu1.density.pieces:
        edges = [p.lo, *sorted(x for x in cuts if p.lo < x < p.hi), p.hi]
        for u, v in zip(edges[:-1], edges[1:]):
            mid = 0.5 * (u + v)
            q = w2.piece_at(mid, 1)
            q = None if q is None or q.zero else q
            p1 = Piece(u, v, p.factors, p.zero)
            pieces.append(PosPiece(u, v, p1, q, float(k), _pos_tag(p1, q, k, u), _pos_tag(p1, q, k, v)))
    atoms = []
    for x, m in nu1.atoms:
        r = m - k * nu2.atom_mass(x)
        if r > 0:
            atoms.append((x, r))
    return NumericMeasure((a, b), tuple(pieces), tuple(atoms), float(k))


def density_at(m, x: float) -> float:
    """Density value at ``x``; raises outside the support."""
    if not m.a <= x <= m.b:
        raise MeasureError(f"{x} outside support [{m.a}, {m.b}]")
    w = m.density if isinstance(m, Measure) else m
    return float(w.evaluate(np.array([x]))[0])


def measure_of(m, c: float, d: float, closed_left: bool = True, closed_right: bool = True, tol: float = 1e-8):
    from .quad import integrate_measure

    return integrate_measure(m, c, d, closed_left, closed_right, tol)


def total_mass(m, tol: float = 1e-8):
    return measure_of(m, m.a, m.b, True, True, tol)


def is_finite(m, tol: float = 1e-8) -> bool:
    return math.isfinite(total_mass(m, tol).hi)
