"""Command line interface.

Subcommands::

    fieldsaddles ring    --n-min 2 --n-max 8 [--center] [--out FILE]
    fieldsaddles search  --n 6 --starts 100000 --seed 0 --workers 4 [--params FILE] --out DIR
    fieldsaddles analyze --store DIR/saddles_N6.jsonl --nu 1 [--json]
    fieldsaddles report  --stores DIR [--out DIR] [--tables] [--figures]

Exit codes: 0 success, 2 invalid input, 3 convergence failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .finder import SearchParams, default_workers, search
from .model import ModelParams
from .records import (
    RunManifest,
    family,
    read_manifest,
    read_store,
    write_manifest,
    write_store,
)
from .ring import RingConvergenceError, ring_plus_center_saddle, ring_saddle
from .stability import NotStationaryError, UNSTABLE, ZERO, analyze, exponents

logger = logging.getLogger("fieldsaddles")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4

MARGINAL_GAP = 1e-3
STORE_PATTERN = re.compile(r"saddles_N(\d+)\.jsonl$")


class CLIError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def store_path(directory, n) -> Path:
    return Path(directory) / f"saddles_N{n}.jsonl"


def manifest_path(directory, n) -> Path:
    return Path(directory) / f"saddles_N{n}.manifest.json"


def fmt(value, digits=4):
    return f"{value:.{digits}f}"


def _write_csv(rows, header, out=None):
    if out is None:
        _emit_csv(sys.stdout, rows, header)
        return
    with open(out, "w", newline="") as fh:
        _emit_csv(fh, rows, header)


def _emit_csv(fh, rows, header):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


# ----------------------------------------------------------------------------
# tables


RING_HEADER = ["N", "E_N", "n_u", "lambda_r", "mu", "rho_N", "z_N"]
CENTER_HEADER = ["N", "E_N", "n_u", "lambda_r", "mu", "z_c", "rho_N-1", "z_N-1"]
LINE_HEADER = ["N", "E_N", "n_u", "lambda_r", "mu", "z_min", "z_max"]
STATE_HEADER = ["nu", "E_nu", "n_u", "lambda_r", "mu", "comment", "symmetry", "hits"]
SUMMARY_HEADER = ["N", "E_N", "mu", "nu_N", "comment", "note"]


def ring_rows(n_values):
    rows = []
    for n in n_values:
        saddle = ring_saddle(n)
        if saddle is None:
            rows.append([n, "no configuration", "", "", "", "", ""])
            continue
        rep = exponents(analyze(saddle.positions()))
        rows.append(
            [n, fmt(saddle.energy), rep.n_u, fmt(rep.lambda_r), fmt(rep.mu), fmt(saddle.rho), fmt(saddle.z)]
        )
    return rows


def center_rows(n_values):
    rows = []
    for n in n_values:
        try:
            saddle = ring_plus_center_saddle(n)
        except (RingConvergenceError, ValueError) as exc:
            rows.append([n, f"no configuration ({exc})", "", "", "", "", "", ""])
            continue
        rep = exponents(analyze(saddle.positions()))
        rows.append(
            [
                n,
                fmt(saddle.energy),
                rep.n_u,
                fmt(rep.lambda_r),
                fmt(rep.mu),
                fmt(saddle.z_c),
                fmt(saddle.rho),
                fmt(saddle.z),
            ]
        )
    return rows


def state_rows(records):
    return [
        [
            r.nu,
            fmt(r.energy),
            r.n_u,
            fmt(r.lambda_r),
            fmt(r.mu),
            family(r.positions),
            str(r.symmetry),
            r.hits,
        ]
        for r in records
    ]


def line_rows(stores):
    rows = []
    for n, records in sorted(stores.items()):
        lines = [r for r in records if family(r.positions) == "all on a line"]
        if not lines:
            continue
        r = min(lines, key=lambda rec: rec.energy)
        z = np.asarray(r.positions)[:, 2]
        rows.append([n, fmt(r.energy), r.n_u, fmt(r.lambda_r), fmt(r.mu), fmt(z.min()), fmt(z.max())])
    return rows


def summary_rows(stores):
    rows = []
    for n, records in sorted(stores.items()):
        if not records:
            continue
        ordered = sorted(records, key=lambda r: r.energy)
        low = ordered[0]
        note = ""
        if len(ordered) > 1 and ordered[1].energy - low.energy < MARGINAL_GAP:
            gap = ordered[1].energy - low.energy
            note = (
                f"marginal: nu=2 ({family(ordered[1].positions) or 'unnamed'}) "
                f"lies {gap:.1e} above"
            )
        rows.append([n, fmt(low.energy), fmt(low.mu), len(records), family(low.positions), note])
    return rows


# ----------------------------------------------------------------------------
# commands


def cmd_ring(args):
    if args.n_min < 2 or args.n_max < args.n_min:
        raise CLIError("need 2 <= n-min <= n-max", EXIT_VALIDATION)
    n_values = range(args.n_min, args.n_max + 1)
    if args.center:
        if args.n_min < 3:
            raise CLIError("ring plus center needs n-min >= 3", EXIT_VALIDATION)
        _write_csv(center_rows(n_values), CENTER_HEADER, args.out)
    else:
        _write_csv(ring_rows(n_values), RING_HEADER, args.out)
    return EXIT_OK


def read_params_file(path) -> dict:
    """Flat ``key = value`` file (``#`` comments) holding search/model fields."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CLIError(f"cannot read params file: {exc}", EXIT_IO)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[params]\n" + text)
    except configparser.Error as exc:
        raise CLIError(f"bad params file {path}: {exc}", EXIT_VALIDATION)
    return dict(parser["params"])


_SEARCH_TYPES = {
    "n_starts": int,
    "rng_seed": int,
    "sample_rho_max": float,
    "newton_tol": float,
    "max_iters": int,
    "step_clamp": float,
    "dedup_tol": float,
    "shard_size": int,
    "zero_tol": float,
}
_MODEL_TYPES = {"n_electrons": int, "nuclear_charge": float, "field": float}


def _parse_bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def build_params(raw: dict):
    search_kw, model_kw = {}, {}
    for key, value in raw.items():
        try:
            if key in _SEARCH_TYPES:
                search_kw[key] = _SEARCH_TYPES[key](value)
            elif key == "sample_z_range":
                if isinstance(value, str):
                    value = [float(v) for v in re.split(r"[,\s]+", value.strip("[]() ")) if v]
                search_kw[key] = tuple(float(v) for v in value)
            elif key == "require_downfield":
                search_kw[key] = value if isinstance(value, bool) else _parse_bool(value)
            elif key in _MODEL_TYPES:
                model_kw[key] = None if value in (None, "", "none") else _MODEL_TYPES[key](value)
            else:
                raise CLIError(f"unknown parameter {key!r}", EXIT_VALIDATION)
        except ValueError as exc:
            raise CLIError(f"bad value for {key}: {exc}", EXIT_VALIDATION)
    return search_kw, model_kw


def cmd_search(args):
    raw = {}
    if args.from_manifest:
        try:
            manifest = read_manifest(args.from_manifest)
        except (OSError, ValueError, TypeError) as exc:
            raise CLIError(f"cannot read manifest: {exc}", EXIT_IO)
        raw.update(manifest.search_params)
        raw.update(manifest.model_params)
    if args.params:
        raw.update(read_params_file(args.params))
    search_kw, model_kw = build_params(raw)
    if args.starts is not None:
        search_kw["n_starts"] = args.starts
    if args.seed is not None:
        search_kw["rng_seed"] = args.seed
    if args.n is not None:
        model_kw["n_electrons"] = args.n
    if "n_electrons" not in model_kw:
        raise CLIError("electron count required (--n or params file)", EXIT_VALIDATION)
    try:
        params = SearchParams(**search_kw)
        model = ModelParams(**model_kw)
    except (TypeError, ValueError) as exc:
        raise CLIError(str(exc), EXIT_VALIDATION)
    workers = args.workers if args.workers is not None else default_workers()
    if workers < 1:
        raise CLIError("workers must be >= 1", EXIT_VALIDATION)

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CLIError(f"cannot create output directory: {exc}", EXIT_IO)

    n = model.n_electrons
    t0 = time.perf_counter()
    records, counts = search(n, params, model, workers, return_counts=True)
    wall = time.perf_counter() - t0
    manifest = RunManifest(
        n=n,
        search_params=params.to_dict(),
        model_params=model.to_dict(),
        workers=workers,
        version=__version__,
        wall_time=wall,
        status_counts=counts,
    )
    try:
        write_store(store_path(out, n), records)
        write_manifest(manifest_path(out, n), manifest)
    except OSError as exc:
        raise CLIError(f"cannot write store: {exc}", EXIT_IO)
    print(f"N={n}: {len(records)} saddles from {params.n_starts} starts in {wall:.1f} s -> {store_path(out, n)}")
    if not records:
        raise CLIError("no stationary point converged", EXIT_CONVERGENCE)
    return EXIT_OK


def _load_store(path):
    try:
        return read_store(path)
    except OSError as exc:
        raise CLIError(f"cannot read store: {exc}", EXIT_IO)
    except ValueError as exc:
        raise CLIError(str(exc), EXIT_VALIDATION)


def cmd_analyze(args):
    records = _load_store(args.store)
    matches = [r for r in records if r.nu == args.nu]
    if not matches:
        raise CLIError(f"no record with nu={args.nu} in {args.store}", EXIT_VALIDATION)
    rec = matches[0]
    try:
        spec = analyze(rec.positions, ModelParams(rec.n), args.zero_tol)
    except NotStationaryError as exc:
        raise CLIError(f"record nu={rec.nu} is not a stationary point: {exc}", EXIT_VALIDATION)
    rep = exponents(spec)
    unstable = spec.unstable_indices
    overlaps = {int(i): float(o) for i, o in zip(unstable, spec.reaction_overlaps)}
    data = {
        "n": rec.n,
        "nu": rec.nu,
        "energy": rec.energy,
        "symmetry": str(rec.symmetry),
        "eigenvalues": [float(v) for v in spec.eigenvalues],
        "classes": [
            "unstable" if c == UNSTABLE else "zero" if c == ZERO else "stable" for c in spec.classes
        ],
        "lyapunov": [float(v) for v in spec.lyapunov],
        "reaction_index": spec.reaction_index,
        "reaction_overlaps": overlaps,
        "reaction_ambiguous": spec.ambiguous,
        "zero_modes": spec.n_zero,
        "lambda_r": rep.lambda_r,
        "lambdas": list(rep.lambdas),
        "n_u": rep.n_u,
        "mu": rep.mu,
    }
    if args.json:
        print(json.dumps(data, indent=2))
        return EXIT_OK
    print(f"N={rec.n} nu={rec.nu} E={rec.energy:.6f} symmetry={rec.symmetry}")
    print(f"lambda_r={rep.lambda_r:.6f} n_u={rep.n_u} mu={rep.mu:.6f} zero_modes={spec.n_zero}")
    print("lambdas: " + " ".join(f"{v:.6f}" for v in rep.lambdas))
    print(f"{'k':>3} {'eigenvalue':>14} {'class':>9} {'lyapunov':>10} {'uniform-z':>10}")
    lyap = dict(zip(unstable.tolist(), spec.lyapunov))
    for k, (h, c) in enumerate(zip(spec.eigenvalues, data["classes"])):
        ly = f"{lyap[k]:.6f}" if k in lyap else ""
        ov = f"{overlaps[k]:.6f}" if k in overlaps else ""
        mark = " <- reaction" if k == spec.reaction_index else ""
        print(f"{k:>3} {h:>14.8f} {c:>9} {ly:>10} {ov:>10}{mark}")
    if spec.ambiguous:
        print("warning: reaction coordinate z-components change sign")
    return EXIT_OK


def discover_stores(directory):
    found = {}
    for path in sorted(Path(directory).glob("saddles_N*.jsonl")):
        m = STORE_PATTERN.search(path.name)
        if m:
            found[int(m.group(1))] = path
    return found


def write_panel(path, positions):
    pos = np.asarray(positions)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["electron", "x", "y", "z"])
        for i, (x, y, z) in enumerate(pos):
            writer.writerow([i, repr(float(x)), repr(float(y)), repr(float(z))])


def cmd_report(args):
    directory = Path(args.stores)
    if not directory.is_dir():
        raise CLIError(f"no such directory: {directory}", EXIT_IO)
    found = discover_stores(directory)
    wanted = args.n if args.n else sorted(found)
    missing = [n for n in wanted if n not in found]
    stores = {n: _load_store(found[n]) for n in wanted if n in found}
    out = Path(args.out) if args.out else directory
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CLIError(f"cannot create output directory: {exc}", EXIT_IO)
    do_tables = args.tables or not args.figures
    do_figures = args.figures or not args.tables
    n_range = range(2, max([8, *wanted]) + 1)

    if do_tables:
        _write_csv(ring_rows(n_range), RING_HEADER, out / "table_ring.csv")
        _write_csv(center_rows([n for n in n_range if n >= 4]), CENTER_HEADER, out / "table_ring_center.csv")
        _write_csv(line_rows(stores), LINE_HEADER, out / "table_line.csv")
        for n, records in stores.items():
            _write_csv(state_rows(records), STATE_HEADER, out / f"table_N{n}.csv")
        summary = summary_rows(stores)
        _write_csv(summary, SUMMARY_HEADER, out / "table_summary.csv")
        for row in summary:
            if row[-1]:
                print(f"N={row[0]}: {row[-1]}")

    if do_figures:
        fig = out / "figures"
        fig.mkdir(exist_ok=True)
        energy_rows = []
        for n in n_range:
            ring = ring_saddle(n)
            row = [n, fmt(ring.energy / n) if ring else ""]
            if ring:
                write_panel(fig / f"ring_N{n}.csv", ring.positions())
            try:
                center = ring_plus_center_saddle(n) if n >= 4 else None
            except (RingConvergenceError, ValueError):
                center = None
            row.append(fmt(center.energy / n) if center else "")
            if center:
                write_panel(fig / f"center_N{n}.csv", center.positions())
            lines = [r for r in stores.get(n, []) if family(r.positions) == "all on a line"]
            if lines:
                line = min(lines, key=lambda r: r.energy)
                row.append(fmt(line.energy / n))
                write_panel(fig / f"line_N{n}.csv", line.positions)
            else:
                row.append("")
            energy_rows.append(row)
        _write_csv(energy_rows, ["N", "ring_E_over_N", "center_E_over_N", "line_E_over_N"], fig / "energy_per_electron.csv")
        for n, records in stores.items():
            for r in records:
                write_panel(fig / f"N{n}_nu{r.nu:02d}.csv", r.positions)

    if missing:
        raise CLIError("missing stores for N=" + ",".join(str(n) for n in missing), EXIT_IO)
    return EXIT_OK


# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fieldsaddles", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ring", help="closed-form ring saddles (or ring plus center with --center)")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--center", action="store_true", help="one electron on the axis, the rest on a ring")
    p.add_argument("--out", help="CSV file (default stdout)")
    p.set_defaults(func=cmd_ring)

    p = sub.add_parser("search", help="multistart Newton-Raphson enumeration")
    p.add_argument("--n", type=int)
    p.add_argument("--starts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="default from $FIELDSADDLES_WORKERS or 1")
    p.add_argument("--params", help="flat key = value file of search/model parameters")
    p.add_argument("--from-manifest", help="rerun with the parameters of a previous manifest")
    p.add_argument("--out", default=".", help="directory for the store and manifest")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("analyze", help="full spectrum of one stored saddle")
    p.add_argument("--store", required=True)
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("--zero-tol", type=float, default=1e-6)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="CSV tables and figure coordinate files")
    p.add_argument("--stores", required=True, help="directory holding saddles_N*.jsonl")
    p.add_argument("--out", help="output directory (default: the store directory)")
    p.add_argument("--n", type=int, nargs="*", help="electron counts expected (default: all found)")
    p.add_argument("--tables", action="store_true")
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
