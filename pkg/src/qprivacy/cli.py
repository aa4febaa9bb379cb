"""Command-line entry point ``qprivacy``.

Exit codes: 0 success (``privacy``: privacy certified), 1 ``privacy`` ran
but the value is below 1, 2 usage or file-format error, 3 data error (the
input parses but cannot be analysed).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bounds import bound_report
from .errors import FormatError, InvalidInput, InvalidMatrix, QPrivacyError
from .formats import dumps, sha256_file, write_json
from .matops import ANALYTIC_THRESHOLD, NOISY_THRESHOLD, from_json_dict, to_json_dict
from .privacy import privacy_quantifier
from .protocol import (
    OUTCOMES,
    PAIR_LABELS,
    CountsTable,
    as_visibilities,
    fit_visibilities,
    reconstruct_cfim,
    scan_settings,
    simulate_settings,
)
from .report import eigen_report, fringe_curves_csv

EXIT_OK, EXIT_NOT_PRIVATE, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _parse_number(token: str) -> float:
    """Float, optionally suffixed with ``pi`` (``0.25pi``, ``pi``)."""
    t = token.strip().lower()
    try:
        if t.endswith("pi"):
            head = t[:-2].rstrip("*")
            return (float(head) if head else 1.0) * np.pi
        return float(t)
    except ValueError:
        raise UsageError(f"not a number: {token!r}") from None


def _parse_vector(raw: str, dim: Optional[int] = None) -> np.ndarray:
    vals = np.array([_parse_number(x) for x in raw.split(",") if x.strip()])
    if dim is not None and vals.size != dim:
        raise UsageError(f"expected {dim} comma-separated values, got {raw!r}")
    if not np.all(np.isfinite(vals)):
        raise UsageError(f"non-finite value in {raw!r}")
    return vals


def _load_visibilities(path: str) -> np.ndarray:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read visibilities file: {exc}") from None
    if isinstance(obj, dict):
        obj = obj.get("visibilities", obj)
        try:
            obj = [[obj[p][o] for o in OUTCOMES] for p in PAIR_LABELS]
        except (KeyError, TypeError):
            raise FormatError("visibilities JSON must map pair -> outcome -> value") from None
    return as_visibilities(obj)


def _load_matrix(path: str) -> np.ndarray:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read matrix file {path}: {exc}") from None
    return from_json_dict(obj)


def _load_counts(path: str) -> CountsTable:
    try:
        return CountsTable.from_csv(Path(path))
    except OSError as exc:
        raise FormatError(f"cannot read counts file: {exc}") from None


def _write_manifest(path: Path, command: str, config: dict, seed, outputs: Sequence[Path]) -> None:
    manifest = {
        "command": command,
        "tool_version": __version__,
        "seed": seed,
        "config": config,
        "outputs": {p.name: sha256_file(p) for p in outputs},
    }
    write_json(path, manifest)


def _sibling(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


def cmd_simulate(args) -> int:
    if args.visibilities is not None:
        vis = _load_visibilities(args.visibilities)
    else:
        vis = as_visibilities(args.visibility)
    if args.events < 0:
        raise UsageError("--events must be non-negative")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    if args.scan is not None:
        settings = scan_settings(args.scan)
    else:
        settings = _parse_vector(args.phases, 4)[None, :]
    table = simulate_settings(settings, vis, args.events, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out)
    config = {
        "phases": None if args.scan is not None else settings[0].tolist(),
        "scan": args.scan,
        "visibilities": vis.tolist(),
        "events": args.events,
    }
    _write_manifest(_sibling(out, ".manifest.json"), "simulate", config, args.seed, [out])
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    table = _load_counts(args.counts)
    phases = _parse_vector(args.phases, 4)
    fit = fit_visibilities(table)
    f = reconstruct_cfim(fit, phases)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fit_path = _sibling(out, ".fit.json")
    write_json(out, to_json_dict(f))
    write_json(fit_path, fit.to_dict())
    config = {"counts_sha256": sha256_file(args.counts), "phases": phases.tolist()}
    _write_manifest(_sibling(out, ".manifest.json"), "reconstruct", config, None, [out, fit_path])
    sys.stdout.write(dumps({"mean_visibility": fit.mean_visibility, "cfim": to_json_dict(f)}))
    return EXIT_OK


def _weights(args, dim: int) -> np.ndarray:
    if not args.weights:
        raise UsageError("at least one --weights vector is required")
    return np.array([_parse_vector(w, dim) for w in args.weights])


def cmd_privacy(args) -> int:
    f = _load_matrix(args.matrix)
    w = _weights(args, f.shape[0])
    report = privacy_quantifier(f, w, args.rank_threshold)
    sys.stdout.write(dumps(report.to_dict()))
    return EXIT_OK if abs(report.value - 1.0) <= 1e-6 else EXIT_NOT_PRIVATE


def cmd_bounds(args) -> int:
    f = _load_matrix(args.matrix)
    q = _load_matrix(args.qmatrix) if args.qmatrix else None
    w = _weights(args, f.shape[0])
    if args.events < 1:
        raise UsageError("--events must be a positive integer")
    report = bound_report(f, w, q, events=args.events, rank_threshold=args.rank_threshold)
    sys.stdout.write(dumps(report.to_dict()))
    return EXIT_OK


def cmd_report(args) -> int:
    table = _load_counts(args.counts)
    points = _parse_vector(args.phase_points)
    fit = fit_visibilities(table)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fit_path = out / "fit.json"
    curves_path = out / "fringe_curves.csv"
    eigen_path = out / "cfim_eigen.json"
    write_json(fit_path, fit.to_dict())
    curves_path.write_text(fringe_curves_csv(table, fit), encoding="utf-8")
    write_json(eigen_path, eigen_report(fit, points, args.rank_threshold))
    config = {"counts_sha256": sha256_file(args.counts), "phase_points": points.tolist(),
              "rank_threshold": args.rank_threshold}
    _write_manifest(out / "manifest.json", "report", config, None, [fit_path, curves_path, eigen_path])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qprivacy",
        description="Fisher-information privacy analysis of distributed phase sensing.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Sample coincidence counts for the four-node network.")
    where = sim.add_mutually_exclusive_group(required=True)
    where.add_argument("--phases", metavar="A,B,C,D", help="single phase setting (radians, 'pi' suffix allowed)")
    where.add_argument("--scan", type=int, metavar="N", help="scan each phase over [0, pi] on N points")
    vis = sim.add_mutually_exclusive_group()
    vis.add_argument("--visibility", type=float, default=1.0)
    vis.add_argument("--visibilities", metavar="JSON", help="16 per-surface visibilities")
    sim.add_argument("--events", type=int, required=True, help="coincidences per phase setting")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", default="counts.csv")
    sim.set_defaults(func=cmd_simulate)

    rec = sub.add_parser("reconstruct", help="Fit visibilities and rebuild the CFIM.")
    rec.add_argument("--counts", required=True)
    rec.add_argument("--phases", required=True, metavar="A,B,C,D")
    rec.add_argument("--out", default="cfim.json")
    rec.set_defaults(func=cmd_reconstruct)

    priv = sub.add_parser("privacy", help="Privacy quantifier of a Fisher matrix (exit 0 iff private).")
    priv.add_argument("--matrix", required=True)
    priv.add_argument("--weights", action="append", metavar="W1,...,Wm")
    priv.add_argument("--rank-threshold", type=float, default=ANALYTIC_THRESHOLD)
    priv.set_defaults(func=cmd_privacy)

    bnd = sub.add_parser("bounds", help="Pseudoinverse Cramer-Rao bounds.")
    bnd.add_argument("--matrix", required=True)
    bnd.add_argument("--qmatrix")
    bnd.add_argument("--weights", action="append", metavar="W1,...,Wm")
    bnd.add_argument("--events", type=int, default=1)
    bnd.add_argument("--rank-threshold", type=float, default=ANALYTIC_THRESHOLD)
    bnd.set_defaults(func=cmd_bounds)

    rep = sub.add_parser("report", help="Emit fringe-fit and eigenstructure data for a scan.")
    rep.add_argument("--counts", required=True)
    rep.add_argument("--out", required=True, metavar="DIR")
    rep.add_argument("--phase-points", default="0.25pi,0.75pi",
                     help="equal-phase points for the CFIM eigenanalysis")
    rep.add_argument("--rank-threshold", type=float, default=NOISY_THRESHOLD)
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, FormatError, InvalidMatrix, InvalidInput) as exc:
        parser.print_usage(sys.stderr)
        print(f"qprivacy {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QPrivacyError as exc:
        print(f"qprivacy {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
