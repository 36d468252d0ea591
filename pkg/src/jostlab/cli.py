"""Command-line front end.

Sub-commands map one-to-one onto the library surface: ``phase-shifts``
(delta scan over a momentum grid), ``jost`` (F_in/F_out/S at one energy),
``bound-states``, ``resonances``, ``scan`` (|F_in| over a complex-E
rectangle), and ``verify`` (the certification battery).  Output is CSV or
JSON with full round-trip precision; identical inputs produce
byte-identical files.  Exit codes: 0 success, 1 configuration or domain
errors, 2 numerical failures (with the failing stage named on stderr).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    CutoffError,
    DomainError,
    EvaluationError,
    JostlabError,
    MatchingError,
    PoleSignal,
    StiffnessError,
)
from .jost import jost_pair, phase_shift_scan, s_matrix
from .potentials import parse_spec
from .special_functions import RiemannEnergy, Sheet
from .spectral import find_bound_states, find_resonances, pole_scan_grid
from .verification import verify_potential

__all__ = ["RunConfig", "dispatch", "write_table", "main"]

_NUMERICAL_ERRORS = (EvaluationError, StiffnessError, MatchingError, PoleSignal)


@dataclass
class RunConfig:
    """Validated invocation parameters shared by the sub-commands."""

    command: str
    potential_path: str
    l: int
    tol: float
    output_path: str
    format: str
    params: dict


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # exit code 1 (not argparse's 2) with usage on stderr
    def error(self, message):
        raise _UsageError(f"{message}\n{self.format_usage()}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jostlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--potential", required=True, metavar="PATH",
                       help="potential config file (key=value lines)")
        p.add_argument("--l", type=int, default=0, help="orbital momentum")
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--out", required=True, metavar="PATH")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="default: inferred from the --out suffix")

    p = sub.add_parser("phase-shifts", help="delta_l over a momentum grid")
    common(p)
    p.add_argument("--kmin", type=float, required=True)
    p.add_argument("--kmax", type=float, required=True)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("jost", help="Jost functions at one complex energy")
    common(p)
    p.add_argument("--ere", type=float, required=True, help="Re E")
    p.add_argument("--eim", type=float, default=0.0, help="Im E")
    p.add_argument("--sheet", choices=("I", "II"), default="I")

    p = sub.add_parser("bound-states", help="zeros of F_in on [emin, 0)")
    common(p)
    p.add_argument("--emin", type=float, required=True)

    p = sub.add_parser("resonances", help="zeros of F_in on sheet II")
    common(p)
    p.add_argument("--remin", type=float, required=True)
    p.add_argument("--remax", type=float, required=True)
    p.add_argument("--immin", type=float, required=True)
    p.add_argument("--immax", type=float, default=-0.01)
    p.add_argument("--nx", type=int, default=24)
    p.add_argument("--ny", type=int, default=16)

    p = sub.add_parser("scan", help="|F_in| over a complex-energy rectangle")
    common(p)
    p.add_argument("--remin", type=float, required=True)
    p.add_argument("--remax", type=float, required=True)
    p.add_argument("--immin", type=float, required=True)
    p.add_argument("--immax", type=float, required=True)
    p.add_argument("--nx", type=int, default=40)
    p.add_argument("--ny", type=int, default=40)
    p.add_argument("--sheet", choices=("I", "II"), default="I")

    p = sub.add_parser("verify", help="run the certification battery")
    common(p)
    return parser


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _flatten(row: dict) -> dict:
    out = {}
    for key, value in row.items():
        if isinstance(value, complex):
            out[f"{key}_re"] = value.real
            out[f"{key}_im"] = value.imag
        elif isinstance(value, (np.floating, np.integer)):
            out[key] = value.item()
        else:
            out[key] = value
    return out


def _fmt_csv(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_table(rows, fmt: str, path: str, fieldnames=None) -> None:
    """Write homogeneous rows as CSV (17 significant digits) or JSON.

    Complex values become paired ``_re``/``_im`` columns.  Row order is
    preserved; reruns produce byte-identical files.
    """
    rows = [_flatten(r) for r in rows]
    if fieldnames is None:
        if not rows:
            raise DomainError("empty table needs explicit fieldnames")
        fieldnames = list(rows[0])
    else:
        fieldnames = list(fieldnames)
    if fmt == "csv":
        lines = [",".join(fieldnames)]
        for row in rows:
            lines.append(",".join(_fmt_csv(row[name]) for name in fieldnames))
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(rows, indent=2) + "\n"
    with open(path, "w") as fh:
        fh.write(text)


def _write_json(document, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(document, fh, indent=2)
        fh.write("\n")


def _assert_finite(rows, stage: str) -> None:
    for row in rows:
        for key, value in row.items():
            if isinstance(value, complex):
                ok = math.isfinite(value.real) and math.isfinite(value.imag)
            elif isinstance(value, (float, np.floating)):
                ok = math.isfinite(float(value))
            else:
                ok = True
            if not ok:
                raise EvaluationError(
                    f"non-finite value for {key!r} in stage {stage!r}")


def _pick_format(out_path: str, explicit, default: str) -> str:
    if explicit:
        return explicit
    suffix = os.path.splitext(out_path)[1].lower()
    if suffix == ".json":
        return "json"
    if suffix == ".csv":
        return "csv"
    return default


def _load_potential(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read potential file {path!r}: {exc}")
    return parse_spec(text, base_dir=os.path.dirname(os.path.abspath(path)))


# ---------------------------------------------------------------------------
# Sub-command bodies
# ---------------------------------------------------------------------------

def _root_rows(roots):
    return [
        {
            "energy_re": r.energy.E.real,
            "energy_im": r.energy.E.imag,
            "sheet": r.energy.sheet.value,
            "kind": r.kind,
            "residual": r.residual,
            "iterations": r.iterations,
            "converged": bool(r.converged),
        }
        for r in roots
    ]


def _run(cfg: RunConfig, spec) -> str:
    if cfg.command == "phase-shifts":
        k_grid = np.linspace(cfg.params["kmin"], cfg.params["kmax"],
                             cfg.params["n"])
        table = phase_shift_scan(cfg.l, spec, k_grid, cfg.tol)
        rows = [
            {"k": float(table.k[i]), "E": float(table.E[i]),
             "delta": float(table.delta[i]), "abs_S": float(table.abs_S[i])}
            for i in range(len(table)) if i not in table.flagged
        ]
        _assert_finite(rows, cfg.command)
        write_table(rows, cfg.format, cfg.output_path,
                    fieldnames=["k", "E", "delta", "abs_S"])
        note = f", {len(table.flagged)} flagged" if table.flagged else ""
        return f"{len(rows)} rows{note}"

    if cfg.command == "jost":
        energy = RiemannEnergy(complex(cfg.params["ere"], cfg.params["eim"]),
                               Sheet(cfg.params["sheet"]))
        pair = jost_pair(cfg.l, energy, spec, cfg.tol)
        s = s_matrix(pair)
        rows = [{
            "E": energy.E, "sheet": energy.sheet.value, "k": pair.k_used,
            "F_in": pair.F_in, "F_out": pair.F_out, "S": s, "abs_S": abs(s),
            "R": pair.R,
        }]
        _assert_finite(rows, cfg.command)
        write_table(rows, cfg.format, cfg.output_path)
        return "1 row"

    if cfg.command == "bound-states":
        roots = find_bound_states(cfg.l, spec, cfg.params["emin"], cfg.tol)
        rows = _root_rows(roots)
        _assert_finite(rows, cfg.command)
        if cfg.format == "json":
            _write_json(rows, cfg.output_path)
        else:
            write_table(rows, "csv", cfg.output_path,
                        fieldnames=["energy_re", "energy_im", "sheet", "kind",
                                    "residual", "iterations", "converged"])
        return f"{len(rows)} roots"

    if cfg.command == "resonances":
        region = (cfg.params["remin"], cfg.params["remax"],
                  cfg.params["immin"], cfg.params["immax"])
        roots = find_resonances(cfg.l, spec, region,
                                grid=(cfg.params["nx"], cfg.params["ny"]),
                                tol=cfg.tol)
        rows = _root_rows(roots)
        _assert_finite(rows, cfg.command)
        if cfg.format == "json":
            _write_json(rows, cfg.output_path)
        else:
            write_table(rows, "csv", cfg.output_path,
                        fieldnames=["energy_re", "energy_im", "sheet", "kind",
                                    "residual", "iterations", "converged"])
        return f"{len(rows)} roots"

    if cfg.command == "scan":
        region = (cfg.params["remin"], cfg.params["remax"],
                  cfg.params["immin"], cfg.params["immax"])
        grid = pole_scan_grid(cfg.l, spec, region,
                              (cfg.params["nx"], cfg.params["ny"]),
                              Sheet(cfg.params["sheet"]), cfg.tol)
        rows = [{"E": E, "abs_F_in": mag, "arg_F_in": arg}
                for E, mag, arg in grid.rows()]
        _assert_finite(rows, cfg.command)
        write_table(rows, cfg.format, cfg.output_path,
                    fieldnames=["E_re", "E_im", "abs_F_in", "arg_F_in"])
        return f"{len(rows)} rows"

    # verify
    report = verify_potential(spec, cfg.l, cfg.tol)
    if cfg.format == "csv":
        rows = [
            {"name": c["name"],
             "value": math.nan if c["value"] is None else c["value"],
             "threshold": c["threshold"], "comparison": c["comparison"],
             "pass": c["pass"], "skipped": bool(c.get("skipped", False))}
            for c in report["checks"]
        ]
        write_table(rows, "csv", cfg.output_path,
                    fieldnames=["name", "value", "threshold", "comparison",
                                "pass", "skipped"])
    else:
        _write_json(report, cfg.output_path)
    n_pass = sum(1 for c in report["checks"] if c["pass"])
    status = "all pass" if report["all_pass"] else "FAILURES"
    return f"{n_pass}/{len(report['checks'])} checks, {status}"


def dispatch(argv) -> int:
    """Parse argv, run the sub-command, write the output file.

    Returns the process exit code instead of raising, so it is directly
    testable.
    """
    parser = build_parser()
    try:
        ns = parser.parse_args(list(argv))
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1

    fmt_default = "json" if ns.command in ("bound-states", "resonances",
                                           "verify") else "csv"
    cfg = RunConfig(
        command=ns.command,
        potential_path=ns.potential,
        l=ns.l,
        tol=ns.tol,
        output_path=ns.out,
        format=_pick_format(ns.out, ns.format, fmt_default),
        params={k: v for k, v in vars(ns).items()
                if k not in {"command", "potential", "l", "tol", "out",
                             "format"}},
    )
    if cfg.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return 1

    try:
        spec = _load_potential(cfg.potential_path)
        summary = _run(cfg, spec)
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure in stage {cfg.command!r}: {exc}",
              file=sys.stderr)
        return 2
    except (ConfigError, CutoffError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except JostlabError as exc:
        print(f"numerical failure in stage {cfg.command!r}: {exc}",
              file=sys.stderr)
        return 2

    print(f"{cfg.command}: {summary} -> {cfg.output_path}")
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
