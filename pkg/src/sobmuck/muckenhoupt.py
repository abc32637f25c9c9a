"""Muckenhoupt-type constants with certified enclosures.

For measures ``nu1, nu2`` on ``[a, b]`` and ``1 < p < inf``::

    Lambda_b  = sup_{a<r<b} nu1([r, b]) * W(r)**(p-1)
    Lambda'_b = sup_{a<r<b} nu1([r, b)) * W(r)**(p-1)
    W(r)      = int_a^r w2**(-1/(p-1))

with ``0 * inf = 0``.  Finiteness is decided from order tuples; the grid
only brackets finite values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .classify import ClassC, class_c
from .measure import Measure, positive_part
from .order import UNKNOWN, ZERO, OrderTuple
from .quad import Enclosure, cell_integrals, grid_nodes, integrate_singular, segment_integrals


class PreconditionError(ValueError):
    pass


class Finite(enum.Enum):
    YES = "Yes"
    NO = "No"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class LambdaResult:
    enclosure: Enclosure
    argmax_r: float | None
    finite: Finite
    endpoint: str
    variant: str
    reason: str = ""
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "enclosure": self.enclosure.to_dict(),
            "argmax_r": self.argmax_r,
            "finite": self.finite.value,
            "endpoint": self.endpoint,
            "variant": self.variant,
            "reason": self.reason,
            "truncated": self.truncated,
        }


# --- symbolic finiteness -------------------------------------------------------


def _first_blowup(w2, q: float):
    """First ``(s, side)`` where ``w2**(-q)`` stops being integrable, scanning left to right."""
    a, b = w2.support
    for x in w2.breakpoints():
        if x > a and not w2.integrable_at(x, -1, q):
            return x, -1
        if x < b and not w2.integrable_at(x, 1, q):
            return x, 1
    return None


def finite_b(nu1, nu2, p: float, prime: bool = False) -> tuple[Finite, str]:
    """Symbolic decision of ``Lambda_b(nu1, nu2) < inf`` (or the primed variant)."""
    q = 1.0 / (p - 1.0)
    b = nu1.b
    hit = _first_blowup(nu2.density, q)
    if hit is None:
        return Finite.YES, "reciprocal weight integrable on the whole interval"
    s, side = hit
    # W is infinite on (s, b]: nu1 must vanish there
    right_atoms = nu1.atoms_in(s, b, False, not prime)
    if s < b:
        zero = nu1.density_zero_on(s, b)
        if zero is None:
            return Finite.UNKNOWN, f"cannot decide whether the density vanishes on ({s}, {b})"
        if not zero or right_atoms > 0:
            return Finite.NO, f"W is infinite beyond {s} where nu1 has mass"
    if side > 0:
        return Finite.YES, f"nu1 vanishes where W is infinite (beyond {s})"
    if nu1.atom_mass(s) > 0 and not (prime and s == b):
        return Finite.NO, f"atom at {s} where W blows up"
    t1 = nu1.order(s, -1)
    if t1 is ZERO:
        return Finite.YES, f"density vanishes near {s}"
    if t1 is UNKNOWN:
        return Finite.UNKNOWN, f"order of the density at {s} is undecided"
    t2 = nu2.density.order(s, -1, -q)
    try:
        grow = t2.growth_order() if isinstance(t2, OrderTuple) else None
        tail = t1.tail_order()
    except (NotImplementedError, ValueError) as exc:
        return Finite.UNKNOWN, str(exc)
    if grow is None:
        return Finite.UNKNOWN, f"growth of W at {s} is undecided"
    lim = (tail * grow.power(p - 1.0)).limit()
    if lim == 1:
        return Finite.NO, f"nu1([r,{s}]) W(r)^(p-1) -> inf as r -> {s}"
    return Finite.YES, f"nu1([r,{s}]) W(r)^(p-1) stays bounded as r -> {s}"


# --- numeric bracket -----------------------------------------------------------


class _Grid:
    """Cell data for the sup bracket, refined by bisection."""

    def __init__(self, nu1, nu2, p: float, nodes, tol: float):
        self.nu1, self.nu2, self.p, self.tol = nu1, nu2, p, tol
        self.q = 1.0 / (p - 1.0)
        self.nodes = np.asarray(nodes, dtype=float)
        self.m_lo, self.m_hi, _ = cell_integrals(nu1, self.nodes, 1.0, tol)
        self.w_lo, self.w_hi, certs = cell_integrals(nu2.density, self.nodes, -self.q, tol)
        self.w_inf = np.zeros(self.nodes.size - 1, dtype=bool)
        for i in certs:
            self.w_inf[i] = True
        self.certs = dict(certs)

    def refine(self, cells: np.ndarray):
        u = self.nodes[cells]
        v = self.nodes[cells + 1]
        m = 0.5 * (u + v)
        us = np.concatenate([u, m])
        vs = np.concatenate([m, v])
        ml, mh, _ = segment_integrals(self.nu1, us, vs, 1.0, self.tol)
        wl, wh, certs = segment_integrals(self.nu2.density, us, vs, -self.q, self.tol)
        winf = np.zeros(us.size, dtype=bool)
        for i in certs:
            winf[i] = True
        keep = np.ones(self.nodes.size - 1, dtype=bool)
        keep[cells] = False
        left = np.concatenate([self.nodes[:-1][keep], us])
        order = np.argsort(left, kind="stable")

        def gather(old, new):
            return np.concatenate([old[keep], new])[order]

        self.m_lo = gather(self.m_lo, ml)
        self.m_hi = gather(self.m_hi, mh)
        self.w_lo = gather(self.w_lo, wl)
        self.w_hi = gather(self.w_hi, wh)
        self.w_inf = gather(self.w_inf, winf)
        self.nodes = np.concatenate([left[order], self.nodes[-1:]])

    def bracket(self, prime: bool, drop_infinite: bool):
        nodes = self.nodes
        n = nodes.size
        atoms = np.array([self.nu1.atom_mass(x) for x in nodes])
        if prime:
            atoms[-1] = 0.0
        inf_at = np.nonzero(self.w_inf)[0]
        Wlo = np.concatenate([[0.0], np.cumsum(self.w_lo)])
        Whi = np.concatenate([[0.0], np.cumsum(self.w_hi)])
        if inf_at.size:
            Wlo[inf_at[0] + 1:] = math.inf
            Whi[inf_at[0] + 1:] = math.inf
        Slo = np.concatenate([np.cumsum(self.m_lo[::-1])[::-1], [0.0]])
        Shi = np.concatenate([np.cumsum(self.m_hi[::-1])[::-1], [0.0]])
        Asuf = np.concatenate([np.cumsum(atoms[::-1])[::-1], [0.0]])
        closed_lo = Slo + Asuf[:n]
        open_hi = Shi + Asuf[1:]
        e = self.p - 1.0
        with np.errstate(invalid="ignore", over="ignore"):
            node_val = np.where(closed_lo[1:-1] > 0, closed_lo[1:-1] * Wlo[1:-1] ** e, 0.0)
            cell_up = np.where(open_hi[:-1] > 0, open_hi[:-1] * Whi[1:] ** e, 0.0)
        tail_lo = atoms[-1] * Wlo[-1] ** e if atoms[-1] > 0 else 0.0
        truncated = False
        if drop_infinite and np.isinf(cell_up).any():
            truncated = True
            cell_up = np.where(np.isinf(cell_up), 0.0, cell_up)
            node_val = np.where(np.isinf(node_val), 0.0, node_val)
            if math.isinf(tail_lo):
                tail_lo = 0.0
        lo = max(float(node_val.max(initial=0.0)), tail_lo)
        hi = max(float(cell_up.max(initial=0.0)), lo)
        if node_val.size and node_val.max() >= tail_lo:
            arg = float(nodes[1 + int(np.argmax(node_val))])
        else:
            arg = float(nodes[-1])
        return lo, hi, arg, cell_up, truncated


def _refine_loop(g: _Grid, prime: bool, drop: bool, rtol: float, rounds: int):
    lo, hi, arg, cell_up, trunc = g.bracket(prime, drop)
    stalled = 0
    for _ in range(rounds):
        if not math.isfinite(hi) or hi - lo <= rtol * max(hi, 1e-300):
            break
        cand = np.nonzero(cell_up > lo + 0.5 * rtol * hi)[0]
        if cand.size == 0 or cand.size > 20000:
            break
        g.refine(cand)
        width = hi - lo
        lo, hi, arg, cell_up, trunc = g.bracket(prime, drop)
        # envelope constants put a floor under the width; stop once it is reached
        stalled = stalled + 1 if hi - lo > 0.99 * width else 0
        if stalled >= 3:
            break
    return lo, hi, arg, trunc


def _nodes_for(nu1, nu2, N: int) -> np.ndarray:
    a, b = nu1.support
    pts = set(nu1.breakpoints()) | set(nu2.density.breakpoints()) | {x for x, _ in nu2.atoms}
    return grid_nodes(a, b, N, sorted(x for x in pts if a <= x <= b))


def _lambda(nu1, nu2, p: float, N: int, prime: bool, tol: float, rtol: float, rounds: int) -> LambdaResult:
    if not p > 1:
        raise PreconditionError("p must exceed 1")
    if nu1.support != nu2.support:
        raise PreconditionError("nu1 and nu2 must share their support interval")
    variant = "Lambda'" if prime else "Lambda"
    fin, reason = finite_b(nu1, nu2, p, prime)
    if fin is Finite.NO:
        return LambdaResult(Enclosure.infinite(reason), None, fin, "b", variant, reason)
    g = _Grid(nu1, nu2, p, _nodes_for(nu1, nu2, N), tol)
    lo, hi, arg, trunc = _refine_loop(g, prime, fin is Finite.YES, rtol, rounds)
    enc = Enclosure(lo, hi, None if math.isfinite(hi) else UNKNOWN)
    return LambdaResult(enc, arg, fin, "b", variant, reason, trunc)


def lambda_b(nu1, nu2, p: float, N: int = 256, tol: float = 1e-12, rtol: float = 1e-7,
             rounds: int = 40) -> LambdaResult:
    return _lambda(nu1, nu2, p, N, False, tol, rtol, rounds)


def lambda_prime_b(nu1, nu2, p: float, N: int = 256, tol: float = 1e-12, rtol: float = 1e-7,
                   rounds: int = 40) -> LambdaResult:
    return _lambda(nu1, nu2, p, N, True, tol, rtol, rounds)


def lambda_a(nu1, nu2, p: float, N: int = 256, tol: float = 1e-12, rtol: float = 1e-7,
             rounds: int = 40) -> LambdaResult:
    """Mirror image: ``sup_r nu1([a, r]) (int_r^b w2**(-1/(p-1)))**(p-1)``."""
    r = _lambda(nu1.reflect(), nu2.reflect(), p, N, False, tol, rtol, rounds)
    a, b = nu1.support
    arg = None if r.argmax_r is None else a + b - r.argmax_r
    return LambdaResult(r.enclosure, arg, r.finite, "a", r.variant, r.reason, r.truncated)


def lambda_at(nu1, nu2, p: float, endpoint: str, **kw) -> LambdaResult:
    if endpoint == "b":
        return lambda_b(nu1, nu2, p, **kw)
    if endpoint == "a":
        return lambda_a(nu1, nu2, p, **kw)
    raise ValueError(f"endpoint must be 'a' or 'b', not {endpoint!r}")


def end_reciprocal_integral(nu2, p: float, tol: float = 1e-12) -> Enclosure:
    """``int_a^b w2**(-1/(p-1))``."""
    return integrate_singular(nu2.density, nu2.a, nu2.b, -1.0 / (p - 1.0), tol)


def comp_lambdas_check(nu1, nu2, p: float, N: int = 256, slack: float = 1e-9) -> bool:
    """``max(L', c W(b)^(p-1)) <= L <= L' + c W(b)^(p-1)`` with ``c = nu1({b})``."""
    L = lambda_b(nu1, nu2, p, N)
    Lp = lambda_prime_b(nu1, nu2, p, N)
    c = nu1.atom_mass(nu1.b)
    Wb = end_reciprocal_integral(nu2, p)
    e = p - 1.0
    atom_lo = c * Wb.lo**e if c > 0 else 0.0
    atom_hi = c * Wb.hi**e if c > 0 else 0.0
    lhs = max(Lp.enclosure.lo, atom_lo)

    def le(x, y):
        if math.isinf(y):
            return True
        return x <= y * (1 + slack) + slack

    return le(lhs, L.enclosure.hi) and le(L.enclosure.lo, Lp.enclosure.hi + atom_hi)


def restricted_lambda_equiv(nu1, nu2, p: float, r0: float) -> str:
    """Finiteness of the constant on ``[a, b]`` against ``[r0, b]``."""
    a, b = nu1.support
    if not a < r0 < b:
        raise PreconditionError("r0 must lie inside the support")
    enc = integrate_singular(nu2.density, a, r0, -1.0 / (p - 1.0))
    if not enc.finite:
        raise PreconditionError(f"w2^(-1/(p-1)) is not integrable on [{a}, {r0}]")
    full, _ = finite_b(nu1, nu2, p)
    part, _ = finite_b(nu1.restrict(r0, b), nu2.restrict(r0, b), p)
    if full is Finite.UNKNOWN or part is Finite.UNKNOWN:
        return "Unknown"
    if full is not part:
        raise AssertionError(f"finiteness differs: {full.value} on [a,b], {part.value} on [r0,b]")
    return "BothFinite" if full is Finite.YES else "BothInfinite"


# --- three-measure condition ------------------------------------------------------


@dataclass(frozen=True)
class ThreeMeasureCert:
    k: float
    lam: LambdaResult
    route: str

    def to_dict(self) -> dict:
        return {"k": self.k, "lambda": self.lam.to_dict(), "route": self.route}


@dataclass(frozen=True)
class ThreeMeasureResult:
    status: str  # "Holds" | "NotFound" | "Unknown"
    cert: ThreeMeasureCert | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        return {"status": self.status, "cert": None if self.cert is None else self.cert.to_dict(),
                "reason": self.reason}


SCAN_KS = (0.0,) + tuple(float(2**i) for i in range(17))


def niff_screen(nu1, nu2, nu3, p: float, endpoint: str = "b") -> bool:
    """Pattern under which no constant can exist: an atom of nu1 at the endpoint
    not matched by nu2, with the reciprocal of w3 not integrable up to it."""
    if endpoint == "a":
        nu1, nu2, nu3 = nu1.reflect(), nu2.reflect(), nu3.reflect()
    b = nu1.b
    if not nu1.atom_mass(b) > 0 or nu2.atom_mass(b) > 0:
        return False
    q = 1.0 / (p - 1.0)
    return not nu3.density.integrable_at(b, -1, q)


def three_measure_condition(nu1, nu2, nu3, p: float, endpoint: str = "b", N: int = 128) -> ThreeMeasureResult:
    """Search ``k >= 0`` with ``Lambda((nu1 - k nu2)_+, nu3) < inf`` at the endpoint."""
    if endpoint == "a":
        nu1, nu2, nu3 = nu1.reflect(), nu2.reflect(), nu3.reflect()
    elif endpoint != "b":
        raise ValueError("endpoint must be 'a' or 'b'")
    b = nu1.b
    tried: list[tuple[float, Finite]] = []

    def attempt(k: float, route: str):
        pos = positive_part(nu1, k, nu2)
        lam = lambda_b(pos, nu3, p, N)
        tried.append((k, lam.finite))
        if lam.finite is Finite.YES:
            return ThreeMeasureCert(k, _relabel(lam, endpoint, nu1.support), route)
        return None

    in_class = False
    if isinstance(nu1, Measure) and isinstance(nu2, Measure):
        cc = class_c(nu1.density, nu2.density, b, -1)
        in_class = cc.verdict is not ClassC.NOT_IN_CLASS
        if cc.verdict is ClassC.LIMIT_INFINITY:
            cert = attempt(0.0, "ratio-limit-infinite")
            if cert:
                return ThreeMeasureResult("Holds", cert)
        elif cc.verdict is ClassC.LIMSUP_FINITE:
            c2 = nu2.atom_mass(b)
            k = max(1.5 * cc.witness_bound, nu1.atom_mass(b) / c2 if c2 > 0 else 0.0)
            cert = attempt(k if k > 0 else 1.0, "ratio-limsup-finite")
            if cert:
                return ThreeMeasureResult("Holds", cert)
    for k in SCAN_KS:
        cert = attempt(k, "direct")
        if cert:
            return ThreeMeasureResult("Holds", cert)
    if niff_screen(nu1, nu2, nu3, p):
        return ThreeMeasureResult("NotFound", None, "unmatched atom at the endpoint with non-integrable reciprocal")
    if in_class and all(f is Finite.NO for _, f in tried):
        return ThreeMeasureResult("NotFound", None, "every tried k gives an infinite constant")
    return ThreeMeasureResult("Unknown", None, "no k certified")


def _relabel(lam: LambdaResult, endpoint: str, support) -> LambdaResult:
    if endpoint == "b":
        return lam
    arg = None if lam.argmax_r is None else support[0] + support[1] - lam.argmax_r
    return LambdaResult(lam.enclosure, arg, lam.finite, "a", lam.variant, lam.reason, lam.truncated)
