"""Command line entry point.

Every command reads measure specifications (JSON), writes its artifacts into
``--out`` atomically and records a manifest that can be replayed with
``sobmuck --manifest <file>``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .classify import NotPiecewiseRegular, is_piecewise_monotone, piecewise_decompose, reg_interval
from .decide import decide
from .measure import Measure, MeasureError
from .muckenhoupt import PreconditionError, lambda_at, three_measure_condition
from .sobolev import (
    ConvergenceError,
    DegeneracyError,
    SobolevSpace,
    csv_text,
    empirical_best_constant,
    m_norm,
    niff_witness,
    sop_monic,
    zeros,
)

log = logging.getLogger("sobmuck")

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_INTERNAL = 0, 2, 3, 4

# measure flags each command reads
MEASURES = {
    "lambda": ("nu1", "nu2"),
    "classify": ("mu1",),
    "decide": ("mu0", "mu1"),
    "sop": ("mu0", "mu1"),
    "mnorm": ("mu0", "mu1"),
    "verify": ("nu1", "nu2", "nu3"),
    "counterexample": ("nu1", "nu2", "nu3"),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    measures: dict = field(default_factory=dict)
    p: float = 2.0
    grid: int = 256
    tol: float = 1e-10
    seed: int = 0
    out: str = "out"
    degree: int = 10
    nmax: int = 25
    trials: int = 8
    endpoint: str = "b"

    def validate(self):
        if self.command not in MEASURES:
            raise ConfigError(f"unknown command {self.command!r}")
        if not (self.p > 1 and np.isfinite(self.p)):
            raise PreconditionError("p must lie in (1, inf)")
        if self.grid < 64 or self.grid & (self.grid - 1):
            raise ConfigError("--grid must be a power of two >= 64")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("--seed must be a 64-bit unsigned integer")
        if self.degree < 0 or self.nmax < 0 or self.trials < 1:
            raise ConfigError("--degree/--nmax must be >= 0 and --trials >= 1")
        if self.endpoint not in ("a", "b"):
            raise ConfigError("--endpoint must be 'a' or 'b'")
        missing = [m for m in MEASURES[self.command] if m not in self.measures]
        if missing:
            raise ConfigError(f"missing measure flags: {', '.join('--' + m for m in missing)}")

    def key(self) -> dict:
        d = asdict(self)
        d.pop("out")
        return d


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _sha(text: str | bytes) -> str:
    if isinstance(text, str):
        text = text.encode("utf-8")
    return hashlib.sha256(text).hexdigest()


def _json_text(obj) -> str:
    def default(o):
        if hasattr(o, "to_dict"):
            return o.to_dict()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, complex):
            return [o.real, o.imag]
        raise TypeError(f"cannot serialise {type(o).__name__}")

    return json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n"


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- commands -----------------------------------------------------------------------


def _cmd_lambda(cfg, ms):
    res = lambda_at(ms["nu1"], ms["nu2"], cfg.p, cfg.endpoint, N=cfg.grid, tol=cfg.tol)
    return {"lambda.json": _json_text(res.to_dict())}


def _cmd_classify(cfg, ms):
    mu1 = ms["mu1"]
    out = {}
    try:
        out["reg_interval"] = reg_interval(mu1, cfg.p).value
    except ValueError as exc:
        out["reg_interval"] = None
        out["reg_interval_reason"] = str(exc)
    try:
        out["piecewise"] = piecewise_decompose(mu1, cfg.p).to_dict()
    except NotPiecewiseRegular as exc:
        out["piecewise"] = None
        out["piecewise_reason"] = str(exc)
    status, params = is_piecewise_monotone(mu1)
    out["monotone"] = {"status": status, "params": None if params is None else list(params)}
    return {"classify.json": _json_text(out)}


def _cmd_decide(cfg, ms):
    v = decide(ms["mu0"], ms["mu1"], cfg.p, N=min(cfg.grid, 256))
    return {"verdict.json": v.to_json() + "\n"}


def _cmd_sop(cfg, ms):
    if cfg.p != 2:
        raise PreconditionError("orthogonal polynomials need p = 2")
    sp = SobolevSpace(ms["mu0"], ms["mu1"], max(cfg.nmax, cfg.degree, 1))
    q = sop_monic(ms["mu0"], ms["mu1"], cfg.degree, space=sp)
    coef = list(q.coef) + [1.0]
    rows = []
    for n in range(1, cfg.nmax + 1):
        rows.append((n, float(np.abs(zeros(sop_monic(ms["mu0"], ms["mu1"], n, space=sp))).max())))
    return {"sop_coefficients.csv": csv_text(enumerate(coef)), "sop_max_zero.csv": csv_text(rows)}


def _cmd_mnorm(cfg, ms):
    sp = SobolevSpace(ms["mu0"], ms["mu1"], max(cfg.nmax, 1))
    rows = [(n, m_norm(ms["mu0"], ms["mu1"], cfg.p, n, seed=cfg.seed, space=sp)) for n in range(cfg.nmax + 1)]
    return {"mnorm.csv": csv_text(rows)}


def _cmd_verify(cfg, ms):
    nu1, nu2, nu3 = ms["nu1"], ms["nu2"], ms["nu3"]
    rows = [(d, empirical_best_constant(nu1, nu2, nu3, cfg.p, d, cfg.trials, cfg.seed))
            for d in range(cfg.degree + 1)]
    cond = three_measure_condition(nu1, nu2, nu3, cfg.p, cfg.endpoint, N=min(cfg.grid, 256))
    return {"verify.csv": csv_text(rows), "verify_condition.json": _json_text(cond.to_dict())}


def _cmd_counterexample(cfg, ms):
    ns = []
    n = 1
    while n <= cfg.nmax:
        ns.append(n)
        n *= 2
    rows = [(n, niff_witness(ms["nu1"], ms["nu2"], ms["nu3"], cfg.p, n)) for n in ns]
    return {"counterexample.csv": csv_text(rows)}


COMMANDS = {
    "lambda": _cmd_lambda,
    "classify": _cmd_classify,
    "decide": _cmd_decide,
    "sop": _cmd_sop,
    "mnorm": _cmd_mnorm,
    "verify": _cmd_verify,
    "counterexample": _cmd_counterexample,
}


def run(cfg: RunConfig, specs: dict) -> dict:
    """Compute and write all artifacts; returns ``{name: sha256}``."""
    ms = {k: Measure.from_dict(v) for k, v in specs.items()}
    artifacts = COMMANDS[cfg.command](cfg, ms)
    out = Path(cfg.out)
    digests = {}
    for name in sorted(artifacts):
        write_atomic(out / name, artifacts[name])
        digests[name] = _sha(artifacts[name])
    manifest = {
        "tool": "sobmuck",
        "version": __version__,
        "config": cfg.key(),
        "measures": specs,
        "config_hash": _sha(_canonical({"config": cfg.key(), "measures": specs})),
        "artifacts": digests,
    }
    write_atomic(out / "manifest.json", _json_text(manifest))
    return digests


# --- argument handling ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sobmuck", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--manifest", help="replay the run recorded in a manifest file")
    ap.add_argument("--out", help="output directory (overrides the manifest's)")
    sub = ap.add_subparsers(dest="command")
    for name, needed in MEASURES.items():
        sp = sub.add_parser(name)
        for m in needed:
            sp.add_argument(f"--{m}", required=True, metavar="FILE")
        sp.add_argument("--p", type=float, default=2.0)
        sp.add_argument("--grid", type=int, default=256)
        sp.add_argument("--tol", type=float, default=1e-10)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", dest="sub_out", default=None)
        sp.add_argument("--degree", type=int, default=10)
        sp.add_argument("--nmax", type=int, default=25)
        sp.add_argument("--trials", type=int, default=8)
        sp.add_argument("--endpoint", choices=("a", "b"), default="b")
    return ap


def _threads() -> int:
    # worker cap; every computation here currently runs in one thread
    try:
        return max(1, int(os.environ.get("SOBMUCK_THREADS", "1")))
    except ValueError:
        raise ConfigError("SOBMUCK_THREADS must be an integer") from None


def _load_spec(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MeasureError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise MeasureError(f"{path}: top level must be an object")
    Measure.from_dict(data)
    return data


def _from_args(args) -> tuple[RunConfig, dict]:
    if args.manifest:
        man = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        try:
            cfg = RunConfig(**man["config"], out=args.out or str(Path(args.manifest).parent))
            specs = man["measures"]
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed manifest: {exc}") from None
        return cfg, specs
    if args.command is None:
        raise ConfigError("a command or --manifest is required")
    specs = {m: _load_spec(getattr(args, m)) for m in MEASURES[args.command]}
    cfg = RunConfig(args.command, {m: getattr(args, m) for m in MEASURES[args.command]}, args.p, args.grid,
                    args.tol, args.seed, args.sub_out or args.out or "out", args.degree, args.nmax, args.trials,
                    args.endpoint)
    return cfg, specs


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        _threads()
        cfg, specs = _from_args(args)
        cfg.validate()
    except (ConfigError, MeasureError, json.JSONDecodeError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    except PreconditionError as exc:
        log.error("%s", exc)
        return EXIT_PRECONDITION
    try:
        digests = run(cfg, specs)
    except MeasureError as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    except (PreconditionError, DegeneracyError) as exc:
        log.error("%s", exc)
        return EXIT_PRECONDITION
    except ConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error: %s", exc)
        return EXIT_INTERNAL
    for name in sorted(digests):
        print(Path(cfg.out) / name)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
