"""``iphs`` command line: run, check, report.

Exit codes: 0 success, 2 config error, 3 invariant violation, 4 domain exit.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .audit import audit_equivalence, audit_skew, audit_system
from .config import ConfigError, RunConfig, load_config
from .core import DEFAULT_TOL_BALANCE
from .csvio import read_csv, row_violations, write_csv
from .errors import BalanceViolationError, IntegrationError
from .integrate import BALANCE_FIELDS, balance_report, simulate, summarize_columns
from .models import MODELS, TwoCompartmentParams, two_compartment_legacy

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_DOMAIN = 0, 2, 3, 4


def _err(msg: str) -> None:
    print(f"iphs: {msg}", file=sys.stderr)


def _model_label(cfg: RunConfig) -> str:
    return cfg.model if isinstance(cfg.model, str) else cfg.model.get("name", "custom")


def _report_text(title: str, rep, violations: list[int], tol: float) -> str:
    lines = [title, f"max residuals: {max(rep.max_energy_residual, rep.max_entropy_residual):.6g}"]
    lines += rep.lines()
    lines.append(f"tolerance (relative): {tol:g}")
    if violations:
        lines.append(f"residual bound violated at {len(violations)} step(s); first at step {violations[0]}")
    else:
        lines.append("all steps within residual bounds")
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    tol = args.tol if args.tol is not None else cfg.tol_balance
    out_csv = args.out_csv or cfg.outputs.get("csv")
    out_report = args.out_report or cfg.outputs.get("report")
    status = EXIT_OK
    try:
        traj = simulate(cfg.system, cfg.x0, cfg.input, cfg.t0, cfg.t1, cfg.h, tol)
    except BalanceViolationError as exc:
        _err(f"invariant violation: {exc}")
        traj, status = exc.trajectory, EXIT_INVARIANT
    except IntegrationError as exc:
        _err(f"domain exit: {exc}")
        traj, status = exc.trajectory, EXIT_DOMAIN
    except ValueError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG

    if out_csv and traj is not None and len(traj):
        write_csv(traj, out_csv)
    if traj is None or len(traj) == 0:
        return status

    rep = balance_report(traj)
    bad = [k for k, b in enumerate(traj.balances) if not b.ok(tol)]
    if bad and status == EXIT_OK:
        _err(f"invariant violation: residual bound exceeded first at step {bad[0]} (t={traj.times[bad[0]]:g})")
        status = EXIT_INVARIANT
    text = _report_text(f"model: {_model_label(cfg)}  steps: {len(traj) - 1}  h: {cfg.h:g}", rep, bad, tol)
    if out_report:
        Path(out_report).write_text(text)
    else:
        sys.stdout.write(text)
    return status


def _builtin_targets():
    p = TwoCompartmentParams()
    return [(name, factory(p)) for name, factory in MODELS.items()]


def cmd_check(args) -> int:
    tol = args.tol if args.tol is not None else DEFAULT_TOL_BALANCE
    results = []
    if args.config:
        try:
            cfg = load_config(args.config, check_skew=False)
        except ConfigError as exc:
            _err(f"config error: {exc}")
            return EXIT_CONFIG
        if cfg.system is None:
            results.append((_model_label(cfg), audit_skew(cfg.raw_J)))
            targets = []
        else:
            tol = args.tol if args.tol is not None else cfg.tol_balance
            targets = [(_model_label(cfg), cfg.system)]
    else:
        targets = _builtin_targets()

    for label, system in targets:
        for r in audit_system(system, args.samples, args.seed, tol):
            results.append((label, r))
        if label == "two-compartment-irreversible":
            params = cfg.params if args.config else TwoCompartmentParams()
            legacy = two_compartment_legacy(params)
            results.append((label, audit_equivalence(system, legacy, args.samples, args.seed)))

    for label, r in results:
        print(r.line(label))
    failed = [r.name for _, r in results if not r.passed]
    if failed:
        print(f"FAILED: {', '.join(dict.fromkeys(failed))}")
        return EXIT_INVARIANT
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def cmd_report(args) -> int:
    tol = args.tol if args.tol is not None else DEFAULT_TOL_BALANCE
    try:
        cols = read_csv(args.csv)
    except (OSError, ValueError) as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    if cols["t"].size == 0:
        _err(f"{args.csv}: no data rows")
        return EXIT_CONFIG
    rep = summarize_columns(cols["t"], {k: cols[k] for k in BALANCE_FIELDS})
    bad = row_violations(cols, tol)
    text = _report_text(f"csv: {args.csv}  rows: {cols['t'].size}", rep, bad, tol)
    if args.out_report:
        Path(args.out_report).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_INVARIANT if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iphs", description="Simulate and audit irreversible port-Hamiltonian systems.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a configuration, write CSV and balance report")
    run.add_argument("--config", required=True)
    run.add_argument("--out-csv")
    run.add_argument("--out-report")
    run.add_argument("--tol", type=float)
    run.set_defaults(func=cmd_run)

    chk = sub.add_parser("check", help="run the invariant suite at random states")
    chk.add_argument("--config", help="model to audit (default: every built-in model)")
    chk.add_argument("--samples", type=int, default=1000)
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument("--tol", type=float)
    chk.set_defaults(func=cmd_check)

    rpt = sub.add_parser("report", help="re-summarize and re-validate an existing trajectory CSV")
    rpt.add_argument("csv")
    rpt.add_argument("--out-report")
    rpt.add_argument("--tol", type=float)
    rpt.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
