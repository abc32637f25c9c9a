"""Boundedness of the multiplication operator on polynomial Sobolev spaces.

The engine first runs the unconditional obstructions, then the structural
decomposition of ``mu1``, and finally the piece-level characterisations or
sufficient conditions.  Each verdict names the result it rests on and lists
every hypothesis it checked.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .classify import (
    ClassC,
    NotPiecewiseRegular,
    RegClass,
    class_c,
    is_piecewise_monotone,
    piecewise_decompose,
)
from .measure import Measure, NumericMeasure, Piece, WeightExpr
from .muckenhoupt import PreconditionError, niff_screen as _niff_pattern, three_measure_condition
from .order import ratio_limit
from .quad import integrate_measure

BOUNDED = "Bounded"
UNBOUNDED = "Unbounded"
UNKNOWN = "Unknown"


@dataclass
class Verdict:
    outcome: str
    theorem: str | None
    witnesses: list = field(default_factory=list)
    hypotheses: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "theorem": self.theorem,
            "witnesses": self.witnesses,
            "hypotheses": self.hypotheses,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_jsonable)


def _jsonable(o):
    if hasattr(o, "to_dict"):
        return o.to_dict()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")


class _Log:
    def __init__(self):
        self.hyps: list[dict] = []
        self.wits: list[dict] = []

    def hyp(self, name: str, ok) -> bool:
        status = "verified" if ok is True else ("failed" if ok is False else "unknown")
        self.hyps.append({"name": name, "status": status})
        return ok is True

    def wit(self, **kw):
        self.wits.append(kw)

    def cond(self, name: str, ok: bool) -> bool:
        """Record a condition of a characterisation (not a standing hypothesis)."""
        self.wits.append({"condition": name, "holds": bool(ok)})
        return bool(ok)

    def merge(self, other: "_Log"):
        self.hyps += other.hyps
        self.wits += other.wits

    def verdict(self, outcome: str, theorem: str | None) -> Verdict:
        return Verdict(outcome, theorem, self.wits, self.hyps)


# --- helpers -------------------------------------------------------------------


def _mass(m, c: float, d: float, cl: bool = True, cr: bool = True):
    return integrate_measure(m, c, d, cl, cr, 1e-10)


def _positive(m, c: float, d: float, cl: bool = True, cr: bool = True) -> bool:
    if m.atoms_in(c, d, cl, cr) > 0:
        return True
    if c == d:
        return False
    return not m.density.is_zero_on(c, d)


def _common(mu0: Measure, mu1: Measure) -> tuple[Measure, Measure]:
    a = min(mu0.a, mu1.a)
    b = max(mu0.b, mu1.b)
    return mu0.extended(a, b), mu1.extended(a, b)


def niff_screen(nu1, nu2, nu3, p: float, endpoint: str = "b") -> str:
    return "Triggered" if _niff_pattern(nu1, nu2, nu3, p, endpoint) else "NotTriggered"


# --- piece-level characterisation ------------------------------------------------


def _end_check(log: _Log, j: int, mu0r: Measure, mu1r: Measure, p: float, endpoint: str, N: int):
    """Class, vanishing singular parts and the three-measure condition at one end.

    Returns (status, k) with status in {"Holds", "NotFound", "Unknown"}.
    """
    x = mu1r.a if endpoint == "a" else mu1r.b
    side = 1 if endpoint == "a" else -1
    cc = class_c(mu1r.density, mu0r.density, x, side)
    log.wit(piece=j, endpoint=endpoint, class_c=cc.to_dict())
    if not log.hyp(f"piece {j}: (w1, w0) in ratio class at {x}", cc.verdict is not ClassC.NOT_IN_CLASS):
        return "Unknown", None
    # restriction to the regular points removes any atom at x, and atoms are finite
    log.hyp(f"piece {j}: singular parts vanish near {x}", mu0r.atom_mass(x) == 0 and mu1r.atom_mass(x) == 0)
    res = three_measure_condition(mu1r, mu0r, mu1r, p, endpoint, N)
    log.wit(piece=j, endpoint=endpoint, three_measure=res.to_dict())
    return res.status, None if res.cert is None else res.cert.k


def _piece_case(log: _Log, j: int, u: float, v: float, reg: RegClass, mu0: Measure, mu1: Measure,
                p: float, N: int) -> tuple[str, str]:
    """Boundedness on the regular points of ``[u, v]``; returns (outcome, theorem tag)."""
    mu0r = mu0.restrict(u, v, reg.closed_left, reg.closed_right)
    mu1r = mu1.restrict(u, v, reg.closed_left, reg.closed_right)
    pos = _positive(mu0r, u, v)
    if reg is RegClass.CLOSED_CLOSED:
        log.cond(f"piece {j}: mu0(Reg) > 0", pos)
        return (BOUNDED if pos else UNBOUNDED), "T-sub-1"
    tag = {RegClass.CLOSED_OPEN: "T-sub-2", RegClass.OPEN_CLOSED: "T-sub-3", RegClass.OPEN_OPEN: "T-sub-4"}[reg]
    if not log.cond(f"piece {j}: mu0(Reg) > 0", pos):
        return UNBOUNDED, tag
    ends = []
    if reg is RegClass.OPEN_OPEN:
        x0 = 0.5 * (u + v)
        log.wit(piece=j, x0=x0)
        ends.append(("a", mu0r.restrict(u, x0), mu1r.restrict(u, x0)))
        ends.append(("b", mu0r.restrict(x0, v), mu1r.restrict(x0, v)))
    elif reg is RegClass.CLOSED_OPEN:
        ends.append(("b", mu0r, mu1r))
    else:
        ends.append(("a", mu0r, mu1r))
    ks = []
    statuses = []
    for endpoint, m0, m1 in ends:
        st, k = _end_check(log, j, m0, m1, p, endpoint, N)
        statuses.append(st)
        if k is not None:
            ks.append(k)
    if all(s == "Holds" for s in statuses):
        log.wit(piece=j, k=max(ks))
        return BOUNDED, tag
    if "NotFound" in statuses and all(h["status"] == "verified" for h in log.hyps if h["name"].startswith(f"piece {j}:")):
        return UNBOUNDED, tag
    return UNKNOWN, tag


# --- splitting ---------------------------------------------------------------------


def _sup_ratio(p1: Piece, p0: Piece) -> float:
    u, v = p1.lo, p1.hi
    t = np.concatenate([np.linspace(0, 1, 257)[1:-1], 2.0 ** -np.arange(2, 60), 1 - 2.0 ** -np.arange(2, 53)])
    x = u + (v - u) * np.unique(t)
    x = x[(x > u) & (x < v)]
    r = p1.evaluate(x) / p0.evaluate(x)
    return float(np.nanmax(r)) * (1 + 1e-9) * p1.envelope * p0.envelope


def split_dominated(mu1: Measure, mu0: Measure):
    """Split ``mu1 = mu11 + mu12`` with ``mu12 <= k mu0``; None if nothing moves.

    Atoms of ``mu1`` sitting on atoms of ``mu0`` move first; density pieces
    dominated by ``w0`` at both ends move only when no atom did.
    """
    mu0, mu1 = _common(mu0, mu1)
    moved_atoms = [(x, m) for x, m in mu1.atoms if mu0.atom_mass(x) > 0]
    if moved_atoms:
        k = max(m / mu0.atom_mass(x) for x, m in moved_atoms)
        keep = tuple((x, m) for x, m in mu1.atoms if mu0.atom_mass(x) == 0)
        mu11 = Measure(mu1.support, mu1.density, keep)
        mu12 = Measure.atomic(mu1.a, mu1.b, moved_atoms)
        return mu11, mu12, k
    k = 0.0
    p11, p12 = [], []
    for pc in mu1.density.pieces:
        if pc.zero:
            p11.append(pc)
            p12.append(pc)
            continue
        q0 = mu0.density.piece_at(0.5 * (pc.lo + pc.hi), 1)
        ok = q0 is not None and not q0.zero and all(
            ratio_limit(pc.order(x), q0.order(x)) in (-1, 0) for x in (pc.lo, pc.hi))
        if ok and q0.lo <= pc.lo and q0.hi >= pc.hi:
            k = max(k, _sup_ratio(pc, Piece(pc.lo, pc.hi, q0.factors)))
            p11.append(Piece(pc.lo, pc.hi, zero=True))
            p12.append(pc)
        else:
            p11.append(pc)
            p12.append(Piece(pc.lo, pc.hi, zero=True))
    if not any(not pc.zero for pc in p12):
        return None
    mu11 = Measure(mu1.support, WeightExpr(mu1.support, tuple(p11)), mu1.atoms)
    mu12 = Measure(mu1.support, WeightExpr(mu1.support, tuple(p12)), ())
    return mu11, mu12, k


# --- main entry --------------------------------------------------------------------


def _monotone_route(log: _Log, mu0: Measure, mu1: Measure, p: float, label: str) -> bool:
    """Positive mu0 on every regular piece and on every atom of H."""
    if mu1.support_hull() is None:
        log.hyp(f"{label}: measure is zero", True)
        return True
    status, params = is_piecewise_monotone(mu1)
    if not log.hyp(f"{label}: piecewise monotone", status == "Yes"):
        return False
    rd = piecewise_decompose(mu1, p, mu0)
    log.wit(route=label, regdata=rd.to_dict(), monotone_params=list(params))
    ok = True
    for j in rd.J:
        u, v = rd.segment(j)
        reg = rd.reg[j]
        ok &= log.hyp(f"{label}: mu0(Reg piece {j}) > 0", _positive(mu0, u, v, reg.closed_left, reg.closed_right))
    for x in rd.H:
        ok &= log.hyp(f"{label}: mu0({{{x}}}) > 0", mu0.atom_mass(x) > 0)
    return ok


def decide(mu0: Measure, mu1: Measure, p: float, N: int = 128) -> Verdict:
    if isinstance(mu0, NumericMeasure) or isinstance(mu1, NumericMeasure):
        raise PreconditionError("decide needs symbolic measures")
    if not p > 1:
        raise PreconditionError("p must exceed 1")
    mu0, mu1 = _common(mu0, mu1)
    for name, m in (("mu0", mu0), ("mu1", mu1)):
        if not _mass(m, m.a, m.b).finite:
            raise PreconditionError(f"{name} is not a finite measure")
    log = _Log()
    log.hyp("mu0 finite", True)
    log.hyp("mu1 finite", True)
    mu1_zero = mu1.support_hull() is None
    mu0_zero = mu0.support_hull() is None
    if mu1_zero:
        log.hyp("mu1 = 0", True)
        return log.verdict(BOUNDED, "T-sub2-suff")
    if mu0_zero:
        # f = 1 has zero norm while x f does not
        log.hyp("mu0 = 0", True)
        log.hyp("mu1 != 0", True)
        return log.verdict(UNBOUNDED, "Mu0-zero-neg")
    try:
        rd = piecewise_decompose(mu1, p, mu0)
    except NotPiecewiseRegular as exc:
        log.hyp("mu1 piecewise regular", False)
        log.wit(reason=str(exc))
        return log.verdict(UNKNOWN, None)
    log.hyp("mu1 piecewise regular", True)
    log.wit(regdata=rd.to_dict())
    a, b = mu1.support
    for x in rd.H:
        if a < x < b and mu0.atom_mass(x) == 0:
            log.hyp(f"atom of mu1 at {x} with two-sided non-integrable reciprocal", True)
            log.hyp(f"mu0({{{x}}}) = 0", True)
            log.wit(atom=x, mass=mu1.atom_mass(x))
            return log.verdict(UNBOUNDED, "T-R1-neg")
    if rd.strongly:
        log.hyp("mu1 strongly piecewise regular", True)
        outcomes = []
        for x in rd.H:
            log.cond(f"mu0({{{x}}}) > 0", mu0.atom_mass(x) > 0)
            outcomes.append(BOUNDED if mu0.atom_mass(x) > 0 else UNBOUNDED)
        for j in rd.J:
            u, v = rd.segment(j)
            out, tag = _piece_case(log, j, u, v, rd.reg[j], mu0, mu1, p, N)
            log.wit(piece=j, interval=[u, v], reg=rd.reg[j].value, theorem=tag, outcome=out)
            outcomes.append(out)
        if UNBOUNDED in outcomes:
            return log.verdict(UNBOUNDED, "Cor-sub-3")
        if all(o == BOUNDED for o in outcomes):
            return log.verdict(BOUNDED, "Cor-sub-3")
        return log.verdict(UNKNOWN, "Cor-sub-3")
    log.cond("mu1 strongly piecewise regular", False)
    # sufficient conditions only
    tried = []
    sub = _Log()
    ok = all([sub.hyp(f"mu0({{{x}}}) > 0", mu0.atom_mass(x) > 0) for x in rd.H])
    if ok:
        for j in rd.J:
            u, v = rd.segment(j)
            out, tag = _piece_case(sub, j, u, v, rd.reg[j], mu0, mu1, p, N)
            sub.wit(piece=j, interval=[u, v], reg=rd.reg[j].value, theorem=tag, outcome=out)
            ok = sub.hyp(f"piece {j}: bounded on its regular points", out == BOUNDED) and ok
            if not ok:
                break
    if ok:
        log.merge(sub)
        return log.verdict(BOUNDED, "T-sub2-suff")
    tried.append(sub)
    sub = _Log()
    if _monotone_route(sub, mu0, mu1, p, "monotone"):
        log.merge(sub)
        return log.verdict(BOUNDED, "T-monotone-suff")
    tried.append(sub)
    sub = _Log()
    split = split_dominated(mu1, mu0)
    if sub.hyp("split mu1 = mu11 + mu12 with mu12 <= k mu0", split is not None):
        mu11, mu12, k = split
        sub.wit(split_k=k, mu11=mu11.to_dict(), mu12=mu12.to_dict())
        if _monotone_route(sub, mu0, mu11, p, "split"):
            log.merge(sub)
            return log.verdict(BOUNDED, "Cor-split-suff")
    tried.append(sub)
    for t in tried:
        log.merge(t)
    return log.verdict(UNKNOWN, None)


def replay(verdict: Verdict, mu0: Measure, mu1: Measure, p: float, N: int = 128) -> bool:
    """Re-derive the verdict and check that every listed hypothesis has the same status."""
    again = decide(mu0, mu1, p, N)
    if again.outcome != verdict.outcome or again.theorem != verdict.theorem:
        return False
    fresh = {(h["name"], h["status"]) for h in again.hypotheses}
    return all((h["name"], h["status"]) in fresh for h in verdict.hypotheses)
