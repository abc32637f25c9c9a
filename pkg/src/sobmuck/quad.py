"""Enclosures of integrals of weights with endpoint singularities.

Each piece of a weight is integrated by adaptive Gauss-Legendre on cells that
shrink geometrically (ratio 1/2) toward a singular end.  The last stretch
``[0, dmin]`` next to the singularity is bracketed analytically from the
order tuple, so divergence is always decided symbolically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .measure import Measure, NumericMeasure, Piece, PosPiece, WeightExpr
from .order import ZERO, OrderTuple, Tag, _sgn

_X10, _W10 = np.polynomial.legendre.leggauss(10)
_X20, _W20 = np.polynomial.legendre.leggauss(20)

TAIL_DEPTHS = (40, 80, 160, 320, 640, 960)
MAX_CELLS = 200_000


@dataclass(frozen=True)
class Enclosure:
    """Bracket ``[lo, hi]`` of a nonnegative extended real."""

    lo: float
    hi: float
    diverged: object = None

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("enclosure bounds must not be NaN")
        if lo > hi:
            raise ValueError(f"enclosure lo={lo} exceeds hi={hi}")
        if math.isinf(hi) and self.diverged is None:
            raise ValueError("an infinite enclosure needs a divergence certificate")
        object.__setattr__(self, "lo", max(lo, 0.0))
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, v: float) -> "Enclosure":
        return cls(v, v)

    @classmethod
    def infinite(cls, cert) -> "Enclosure":
        return cls(math.inf, math.inf, cert)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack

    def __add__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo + other.lo, self.hi + other.hi, self.diverged or other.diverged)

    def scale(self, c: float) -> "Enclosure":
        if c < 0:
            raise ValueError("scale must be nonnegative")
        if c == 0:
            return Enclosure(0.0, 0.0)
        return Enclosure(c * self.lo, c * self.hi, self.diverged)

    def to_dict(self) -> dict:
        cert = self.diverged
        if isinstance(cert, OrderTuple):
            cert = cert.to_dict()
        elif isinstance(cert, Tag):
            cert = cert.value
        return {"lo": self.lo, "hi": self.hi, "diverged": cert}


# --- adaptive Gauss-Legendre ---------------------------------------------------


def _adaptive(f, a: np.ndarray, b: np.ndarray, tol: float, rel: float = 1e-13, max_rounds: int = 40):
    """Integrate ``f`` over each ``[a_i, b_i]``; returns (values, error estimates)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.size
    vals = np.zeros(n)
    errs = np.zeros(n)
    if n == 0:
        return vals, errs
    span = float(np.sum(b - a)) or 1.0
    owner = np.arange(n)
    for rnd in range(max_rounds):
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        x20 = mid[:, None] + half[:, None] * _X20[None, :]
        x10 = mid[:, None] + half[:, None] * _X10[None, :]
        y20 = f(x20.ravel()).reshape(x20.shape)
        y10 = f(x10.ravel()).reshape(x10.shape)
        v20 = half * (y20 @ _W20)
        v10 = half * (y10 @ _W10)
        err = np.abs(v20 - v10) + 64 * np.finfo(float).eps * np.abs(v20)
        ok = (err <= np.maximum(rel * np.abs(v20), tol * (b - a) / span)) | (half <= 1e-15 * np.abs(mid))
        if rnd == max_rounds - 1 or 2 * np.count_nonzero(~ok) > MAX_CELLS:
            ok[:] = True
        np.add.at(vals, owner[ok], v20[ok])
        np.add.at(errs, owner[ok], err[ok])
        bad = ~ok
        if not bad.any():
            break
        a, b, owner, mid = a[bad], b[bad], owner[bad], mid[bad]
        a, b, owner = np.concatenate([a, mid]), np.concatenate([mid, b]), np.concatenate([owner, owner])
    return vals, errs


# --- analytic tails ------------------------------------------------------------


def _local_tail(t: OrderTuple, dmin: float):
    """Bracket of ``int_0^dmin t(d) dd`` for an integrable tuple, or None."""
    L0 = 1.0 - math.log(dmin)
    LL0 = 1.0 + math.log(L0)
    if t.lll:
        return None
    if t.exps:
        slope = sum(b * g * dmin ** (-g) for g, b in t.exps) + t.alpha
        slope -= abs(t.delta) / L0 + abs(t.eps) / (L0 * LL0)
        if slope <= 0:
            return None
        # d * t(d) is increasing on (0, dmin]
        return 0.0, dmin * float(t.at(dmin))
    a1 = t.alpha + 1.0
    if _sgn(a1) > 0:
        need = abs(t.delta) / L0 + abs(t.eps) / (L0 * LL0)
        eta = 1.5 * need
        if eta >= a1:
            return None
        base = dmin**a1 * L0**t.delta * LL0**t.eps
        return base / (a1 + eta), base / (a1 - eta)
    if _sgn(a1) == 0 and _sgn(t.delta + 1.0) < 0:
        d1 = -t.delta - 1.0
        if t.eps == 0:
            v = L0 ** (-d1) / d1
            return v, v
        # in u = 1 - log d the tail is int_{L0}^inf u**delta (1 + log u)**eps du
        U = L0 * 2.0 ** min(1000.0, math.ceil(60.0 / d1))
        LLU = 1.0 + math.log(U)
        eta = 1.5 * abs(t.eps) / LLU
        if eta >= d1:
            return None
        J = int(math.ceil(math.log2(U / L0)))
        edges = L0 * 2.0 ** np.arange(J + 1)
        vals, errs = _adaptive(lambda u: u**t.delta * (1.0 + np.log(u)) ** t.eps, edges[:-1], edges[1:], 1e-16)
        v, e = float(vals.sum()), float(errs.sum())
        base = LLU**t.eps * U ** (-d1)
        return max(v - e, 0.0) + base / (d1 + eta), v + e + base / (d1 - eta)
    if _sgn(a1) == 0 and _sgn(t.delta + 1.0) == 0 and _sgn(t.eps + 1.0) < 0:
        e1 = -t.eps - 1.0
        v = LL0 ** (-e1) / e1
        return v, v
    return None


def _piece_tail(P: Piece, x: float, side: int, s: float, dmin: float):
    t = P.local_order(x).power(s)
    loc = _local_tail(t, dmin)
    if loc is None:
        return None
    lo_f = hi_f = 1.0
    for f in P.factors:
        if f.local and f.center != x:
            v0 = float(f.value(abs(x - f.center), s))
            v1 = float(f.value(abs(x + side * dmin - f.center), s))
            lo_f *= min(v0, v1)
            hi_f *= max(v0, v1)
    return loc[0] * lo_f, loc[1] * hi_f


def _tail(P, x: float, side: int, s: float, dmin: float):
    if isinstance(P, PosPiece):
        if P.order(x) is ZERO:
            return 0.0, 0.0
        r = _piece_tail(P.p1, x, side, 1.0, dmin)
        return None if r is None else (0.0, r[1])
    return _piece_tail(P, x, side, s, dmin)


def _singular(P, x: float) -> bool:
    if isinstance(P, PosPiece):
        return P.singular_at(x)
    return not P.local_order(x).is_trivial()


def _divergence(P, x: float, s: float):
    """Certificate if the integrand is not integrable next to ``x``, else None."""
    if isinstance(P, PosPiece):
        t = P.p1.order(x)
        if isinstance(t, OrderTuple) and not t.integrable() and P.order(x) is not ZERO:
            tag = P.order(x)
            return tag if isinstance(tag, OrderTuple) and not tag.integrable() else None
        return None
    t = P.order(x, s)
    if t is ZERO:
        return ZERO if s < 0 else None
    return None if t.integrable() else t


def _singular_half(P, x: float, side: int, D: float, s: float, tol: float):
    """Integral over distances ``(0, D]`` from the singular end ``x``."""
    best = None
    for k in TAIL_DEPTHS:
        dmin = min(D, 1.0) * 2.0**-k
        if dmin < 1e-300:
            break
        tb = _tail(P, x, side, s, dmin)
        if tb is None:
            continue
        best = (dmin, tb)
        if tb[1] - tb[0] <= 1e-3 * tol:
            break
    if best is None:
        dmin = max(min(D, 1.0) * 2.0**-960, 1e-300)
        v = float(np.nan_to_num(P.evaluate(np.array([x + side * dmin]), s, x, np.array([dmin]))[0], posinf=0.0))
        best = (dmin, (0.0, 2.0 * dmin * v))
    dmin, (tlo, thi) = best
    J = max(1, int(math.ceil(math.log2(D / dmin))))
    edges = np.minimum(dmin * 2.0 ** np.arange(J + 1), D)
    edges[-1] = D
    da, db = edges[:-1], edges[1:]
    keep = db > da
    da, db = da[keep], db[keep]

    def f(d):
        return P.evaluate(x + side * d, s, x, d)

    vals, errs = _adaptive(f, da, db, tol)
    v, e = float(vals.sum()), float(errs.sum())
    return tlo + max(v - e, 0.0), thi + v + e


def _segment_lists(P, u: float, v: float, s: float, tol: float):
    """Enclosure (lo, hi, cert) of the integral of P**s over [u, v]."""
    if P.zero:
        if s < 0:
            return math.inf, math.inf, ZERO
        return 0.0, 0.0, None
    su = u == P.lo and _singular(P, u)
    sv = v == P.hi and _singular(P, v)
    for flag, x in ((su, u), (sv, v)):
        if flag:
            cert = _divergence(P, x, s)
            if cert is not None:
                return math.inf, math.inf, cert
    lo = hi = 0.0
    if su and sv:
        m = 0.5 * (u + v)
        l1, h1 = _singular_half(P, u, 1, m - u, s, tol)
        l2, h2 = _singular_half(P, v, -1, v - m, s, tol)
        lo, hi = l1 + l2, h1 + h2
    elif su:
        lo, hi = _singular_half(P, u, 1, v - u, s, tol)
    else:
        lo, hi = _singular_half(P, v, -1, v - u, s, tol)
    C = P.envelope
    return lo / C, hi * C, None


def _pieces(obj, s: float):
    if isinstance(obj, WeightExpr):
        return obj.pieces
    if isinstance(obj, Measure):
        return obj.density.pieces
    if isinstance(obj, NumericMeasure):
        if s != 1.0:
            raise ValueError("only the density itself of a positive part can be integrated")
        return obj.pieces
    if isinstance(obj, (Piece, PosPiece)):
        return (obj,)
    raise TypeError(f"cannot integrate {type(obj).__name__}")


def segment_integrals(obj, us, vs, s: float = 1.0, tol: float = 1e-10):
    """Enclosures of ``int_{u_i}^{v_i} w**s`` over disjoint segments.

    Returns ``(lo, hi, certs)`` where ``certs`` maps a segment index to the
    divergence certificate of an infinite segment.
    """
    us = np.asarray(us, dtype=float)
    vs = np.asarray(vs, dtype=float)
    lo = np.zeros(us.size)
    hi = np.zeros(us.size)
    certs: dict[int, object] = {}
    for P in _pieces(obj, s):
        idx = np.nonzero((vs > P.lo) & (us < P.hi))[0]
        reg_idx, reg_u, reg_v = [], [], []
        for i in idx:
            u, v = max(us[i], P.lo), min(vs[i], P.hi)
            if not v > u:
                continue
            if P.zero or (u == P.lo and _singular(P, u)) or (v == P.hi and _singular(P, v)):
                l, h, c = _segment_lists(P, u, v, s, tol)
                lo[i] += l
                hi[i] += h
                if c is not None:
                    certs.setdefault(int(i), c)
            else:
                reg_idx.append(i)
                reg_u.append(u)
                reg_v.append(v)
        if reg_idx:
            vals, errs = _adaptive(lambda x, P=P: P.evaluate(x, s), np.array(reg_u), np.array(reg_v), tol)
            C = P.envelope
            ridx = np.array(reg_idx)
            np.add.at(lo, ridx, np.maximum(vals - errs, 0.0) / C)
            np.add.at(hi, ridx, (vals + errs) * C)
    return lo, hi, certs


def cell_integrals(obj, nodes, s: float = 1.0, tol: float = 1e-10):
    """Enclosures of ``int_{r_i}^{r_{i+1}} w**s`` for consecutive nodes."""
    nodes = np.asarray(nodes, dtype=float)
    return segment_integrals(obj, nodes[:-1], nodes[1:], s, tol)


def integrate_singular(w, c: float, d: float, s: float = 1.0, tol: float = 1e-10) -> Enclosure:
    """Enclosure of ``int_c^d w**s``."""
    if not d >= c:
        raise ValueError("need c <= d")
    if d == c:
        return Enclosure(0.0, 0.0)
    lo, hi, certs = cell_integrals(w, [c, d], s, tol)
    if certs:
        return Enclosure.infinite(certs[0])
    return Enclosure(float(lo[0]), float(hi[0]))


def integrate_measure(m, c: float, d: float, closed_left: bool = True, closed_right: bool = True,
                      tol: float = 1e-10) -> Enclosure:
    """Enclosure of ``m(I)`` where ``I`` has ends ``c <= d``, atoms included per closedness."""
    if c < m.a or d > m.b or c > d:
        raise ValueError(f"[{c}, {d}] is not inside the support [{m.a}, {m.b}]")
    atoms = m.atoms_in(c, d, closed_left, closed_right)
    if c == d:
        return Enclosure(atoms, atoms)
    enc = integrate_singular(m, c, d, 1.0, tol)
    return enc + Enclosure(atoms, atoms)


def integrability(w: WeightExpr, x: float, side: int, q: float) -> bool:
    """True iff ``w**(-q)`` is integrable on a one-sided neighbourhood of ``x``."""
    if not q > 0:
        raise ValueError("q must be positive")
    return w.integrable_at(x, side, q)


# --- cumulative grids ---------------------------------------------------------


def grid_nodes(a: float, b: float, N: int, points=(), depth: int = 40) -> np.ndarray:
    """Uniform nodes plus geometric clusters (ratio 1/2) toward ``points``."""
    span = b - a
    xs = [np.linspace(a, b, N + 1)]
    g = span * 2.0 ** -np.arange(1, depth + 1)
    for c in points:
        if a <= c <= b:
            xs.append(np.array([c]))
            xs.append(c + g)
            xs.append(c - g)
    x = np.concatenate(xs)
    x = x[(x >= a) & (x <= b)]
    return np.unique(x)


@dataclass(frozen=True)
class CumGrid:
    """Brackets of ``W(r_i) = int_a^{r_i} w**(-1/(p-1))`` on a node set."""

    nodes: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    cell_lo: np.ndarray = field(repr=False)
    cell_hi: np.ndarray = field(repr=False)
    diverged: object = None
    first_infinite: int | None = None

    def bracket(self, r: float) -> Enclosure:
        i = int(np.searchsorted(self.nodes, r))
        if i >= self.nodes.size or self.nodes[i] != r:
            raise KeyError(f"{r} is not a grid node")
        if math.isinf(self.hi[i]):
            return Enclosure.infinite(self.diverged)
        return Enclosure(float(self.lo[i]), float(self.hi[i]))


def cumulate(nodes, cell_lo, cell_hi, certs) -> CumGrid:
    nodes = np.asarray(nodes, dtype=float)
    lo = np.concatenate([[0.0], np.cumsum(cell_lo)])
    hi = np.concatenate([[0.0], np.cumsum(cell_hi)])
    first = min(certs) if certs else None
    cert = certs[first] if certs else None
    if first is not None:
        lo[first + 1:] = math.inf
        hi[first + 1:] = math.inf
    return CumGrid(nodes, lo, hi, np.asarray(cell_lo), np.asarray(cell_hi), cert, first)


def cum_antiderivative(w: WeightExpr, p: float, N: int = 256, tol: float = 1e-10, nodes=None) -> CumGrid:
    """Cumulative integrals of ``w**(-1/(p-1))`` from the left end of the support."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    if N < 8:
        raise ValueError("N must be at least 8")
    if nodes is None:
        nodes = grid_nodes(w.a, w.b, N, w.breakpoints())
    s = -1.0 / (p - 1.0)
    lo, hi, certs = cell_integrals(w, nodes, s, tol)
    return cumulate(nodes, lo, hi, certs)
