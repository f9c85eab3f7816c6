"""``fockcat`` command line: regenerate figure data as CSV or evaluate a single scenario.

Exit codes: 0 success, 1 validation error, 2 numerical-health failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import FockcatError, NumericalHealthError, ParameterError
from .fock import norm2
from .sweep import (
    FLAG_TAIL,
    Grid,
    ScenarioConfig,
    SweepRecord,
    build_output,
    curves_vs_lambda,
    diagonal_cut,
    evaluate,
    hyperbola_cut,
    qutrit_entropy_vs_R,
    sweep_double_grid,
    sweep_single_alpha,
)
from .states import SplitterParam

log = logging.getLogger("fockcat")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2

FIGURES = ("fig2", "fig3", "fig4a", "fig4b", "fig5", "fig6", "fig7")


class ValidationError(FockcatError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _floats(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")
    if not vals or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected finite numbers, got {text!r}")
    return vals


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])


def write_manifest(path: Path, command: str, params: dict, files: list[str], records: list[SweepRecord],
                   duration: float) -> dict:
    tails = [r.tail for r in records] or [0.0]
    manifest = {
        "command": command,
        "parameters": {k: str(v) for k, v in sorted(params.items())},
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "duration_s": round(duration, 3),
        "data_files": files,
        "max_tail": max(tails),
        "flagged_records": sum(r.flagged for r in records),
        "truncation_ok": all(not r.flagged for r in records),
    }
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest


# --- figures ---------------------------------------------------------------

def _fig2(a) -> dict:
    lams = a.lam or [0.01]
    Rs = a.R or [0.5, 1.0 / 3.0]
    rows, recs = [], []
    for lam in lams:
        for R in Rs:
            cfg = ScenarioConfig(model="ideal", scheme="single", lam=lam, R=R, n_max=a.nmax,
                                 alpha_grid=Grid(-0.2, 0.2, a.points or 81))
            for rec in sweep_single_alpha(cfg, workers=a.workers):
                recs.append(rec)
                rows.append({"lambda": lam, "R": R, "alpha": rec.params["alpha"], "E_S": rec.E})
    return {"fig2.csv": (["lambda", "R", "alpha", "E_S"], rows)}, recs


def _fig3(a) -> dict:
    lam = (a.lam or [0.01])[0]
    R = (a.R or [0.5])[0]
    n = a.points or 41
    cfg = ScenarioConfig(model="ideal", scheme="double", lam=lam, R=R, n_max=a.nmax,
                         alpha_grid=Grid(-0.2, 0.2, n), beta_grid=Grid(-0.2, 0.2, n))
    rows, recs = [], []
    for line in sweep_double_grid(cfg, workers=a.workers):
        for rec in line:
            recs.append(rec)
            rows.append({"alpha": rec.params["alpha"], "beta": rec.params["beta"], "E_S": rec.E})
    return {"fig3.csv": (["alpha", "beta", "E_S"], rows)}, recs


def _fig4a(a) -> dict:
    lam = (a.lam or [0.01])[0]
    sp = SplitterParam.from_R((a.R or [0.5])[0])
    pos = set(np.logspace(-3, 0, a.points or 121).tolist())
    pos.add(math.sqrt(lam) * sp.t)
    grid = sorted([-x for x in pos] + list(pos))
    recs = hyperbola_cut(lam, sp, grid, n_max=a.nmax)
    rows = [{"alpha": r.params["alpha"], "beta": r.params["beta"], "E_S": r.E} for r in recs]
    return {"fig4a.csv": (["alpha", "beta", "E_S"], rows)}, recs


def _fig4b(a) -> dict:
    recs = qutrit_entropy_vs_R(np.linspace(0.01, 0.99, a.points or 99))
    rows = [{"R": r.params["R"], "E_S": r.E} for r in recs]
    return {"fig4b.csv": (["R", "E_S"], rows)}, recs


def _fig5(a) -> dict:
    etas = a.eta or [1.0, 0.5, 0.1]
    lam = (a.lam or [0.2])[0]
    base = ScenarioConfig(model="realistic", scheme="single", lam=lam, R=(a.R or [0.5])[0], R_s=a.Rs,
                          n_max=a.nmax, k_max=a.kmax, alpha_grid=Grid(-0.5, 0.5, a.points or 41))
    rows_a, recs = [], []
    for eta in etas:
        for rec in sweep_single_alpha(base.with_(eta=eta), workers=a.workers):
            recs.append(rec)
            rows_a.append({"eta": eta, "alpha": rec.params["alpha"], "E_N": rec.E, "P1": rec.P})
    lams = np.linspace(0.01, 0.4, a.points or 40)
    rows_b = []
    for rec in curves_vs_lambda(base, lams, etas, workers=a.workers):
        recs.append(rec)
        rows_b.append({"eta": rec.params["eta"], "lambda": rec.params["lambda"], "E_N": rec.E, "P1": rec.P})
    return {
        "fig5a.csv": (["eta", "alpha", "E_N", "P1"], rows_a),
        "fig5bc.csv": (["eta", "lambda", "E_N", "P1"], rows_b),
    }, recs


def _fig6(a) -> dict:
    lam = (a.lam or [0.2])[0]
    eta = (a.eta or [1.0])[0]
    n = a.points or 33
    cfg = ScenarioConfig(model="realistic", scheme="double", lam=lam, R=(a.R or [0.5])[0], R_s=a.Rs, eta=eta,
                         n_max=a.nmax, k_max=a.kmax, alpha_grid=Grid(-0.8, 0.8, n), beta_grid=Grid(-0.8, 0.8, n))
    rows_a, recs = [], []
    for line in sweep_double_grid(cfg, workers=a.workers):
        for rec in line:
            recs.append(rec)
            rows_a.append({"alpha": rec.params["alpha"], "beta": rec.params["beta"], "E_N": rec.E, "P2": rec.P})
    cut = diagonal_cut(cfg, np.linspace(0.0, 1.0, a.points or 51), workers=a.workers)
    recs.extend(cut)
    rows_b = [{"alpha": r.params["alpha"], "E_N": r.E, "P2": r.P} for r in cut]
    return {
        "fig6a.csv": (["alpha", "beta", "E_N", "P2"], rows_a),
        "fig6b.csv": (["alpha", "E_N", "P2"], rows_b),
    }, recs


def _fig7(a) -> dict:
    etas = a.eta or [1.0, 0.5, 0.1]
    cfg = ScenarioConfig(model="realistic", scheme="double", R=(a.R or [0.5])[0], R_s=a.Rs,
                         n_max=a.nmax, k_max=a.kmax)
    recs = curves_vs_lambda(cfg, np.linspace(0.01, 0.4, a.points or 40), etas, workers=a.workers)
    rows = [{"eta": r.params["eta"], "lambda": r.params["lambda"], "alpha_opt": r.params["alpha_opt"],
             "sqrt_half_lambda": r.extra["sqrt_half_lambda"], "E_N": r.E, "P2": r.P} for r in recs]
    return {"fig7.csv": (["eta", "lambda", "alpha_opt", "sqrt_half_lambda", "E_N", "P2"], rows)}, recs


_FIGURE_FUNCS = {"fig2": _fig2, "fig3": _fig3, "fig4a": _fig4a, "fig4b": _fig4b,
                 "fig5": _fig5, "fig6": _fig6, "fig7": _fig7}


def _validate_common(a) -> None:
    for v in a.lam or []:
        if not 0.0 <= v < 1.0:
            raise ParameterError(f"--lambda must lie in [0, 1), got {v}")
    for v in a.R or []:
        if not 0.0 <= v <= 1.0:
            raise ParameterError(f"--R must lie in [0, 1], got {v}")
    for v in a.eta or []:
        if not 0.0 <= v <= 1.0:
            raise ParameterError(f"--eta must lie in [0, 1], got {v}")
    if not 0.0 <= a.Rs <= 1.0:
        raise ParameterError(f"--Rs must lie in [0, 1], got {a.Rs}")
    if a.nmax < 2:
        raise ParameterError(f"--nmax must be >= 2, got {a.nmax}")
    if a.kmax is not None and a.kmax < 1:
        raise ParameterError(f"--kmax must be >= 1, got {a.kmax}")


def cmd_figure(a) -> int:
    _validate_common(a)
    if a.points is not None and a.points < 2:
        raise ParameterError(f"--points must be >= 2, got {a.points}")
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    tables, recs = _FIGURE_FUNCS[a.name](a)
    for fname, (cols, rows) in tables.items():
        write_csv(out / fname, cols, rows)
    params = {k: v for k, v in vars(a).items() if k not in ("func", "command", "out", "workers", "verbose")}
    manifest = write_manifest(out / f"{a.name}.manifest.json", f"figure {a.name}", params, sorted(tables),
                              recs, time.perf_counter() - start)
    for fname in sorted(tables):
        print(out / fname)
    if not manifest["truncation_ok"]:
        log.error("%d records exceed truncation tail %.0e; increase --nmax", manifest["flagged_records"], FLAG_TAIL)
        return EXIT_NUMERICAL
    return EXIT_OK


def run_report(a) -> dict:
    """Evaluate one scenario; returns a JSON-serializable report."""
    _validate_common(a)
    cfg = ScenarioConfig(model=a.model, scheme=a.scheme, lam=(a.lam or [0.2])[0], R=(a.R or [0.5])[0],
                         R_s=a.Rs, eta=(a.eta or [1.0])[0], n_max=a.nmax, k_max=a.kmax)
    rec = evaluate(cfg, a.alpha, a.beta)
    report = {
        "scheme": cfg.scheme,
        "model": cfg.model,
        "measure": "E_S" if cfg.model == "ideal" else "E_N",
        "E": rec.E,
        "tail": rec.tail,
        "truncation_ok": not rec.flagged,
    }
    out = build_output(cfg, a.alpha, a.beta)
    if cfg.model == "ideal":
        report["filter_norm2"] = norm2(out)
    else:
        report["P"] = out.success_prob
        table = sorted(out.branch_table(), key=lambda r: -r["contribution"])
        report["branches"] = [
            {"label": list(r["label"]), "norm2": r["norm2"], "herald_weight": r["herald_weight"],
             "share": r["contribution"] / out.success_prob if out.success_prob > 0 else 0.0}
            for r in table[: a.branches]
        ]
    return report


def cmd_run(a) -> int:
    start = time.perf_counter()
    report = run_report(a)
    if a.json:
        print(json.dumps(report, indent=2))
    else:
        print(f"{report['measure']} = {report['E']:.10g} bits")
        if "P" in report:
            print(f"success probability = {report['P']:.10g}")
            print("branch      norm2          weight   share")
            for b in report["branches"]:
                label = ",".join(map(str, b["label"]))
                print(f"  ({label:>5})  {b['norm2']:.6e}  {b['herald_weight']:.4f}  {b['share']:.4f}")
        else:
            print(f"filter norm2 = {report['filter_norm2']:.10g}")
        print(f"truncation tail = {report['tail']:.3e} ({'ok' if report['truncation_ok'] else 'FLAGGED'})")
    if a.out:
        out = Path(a.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "run.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        params = {k: v for k, v in vars(a).items() if k not in ("func", "command", "out", "json", "verbose")}
        rec = SweepRecord({}, report["E"], report.get("P"), report["tail"])
        write_manifest(out / "run.manifest.json", "run", params, ["run.json"], [rec], time.perf_counter() - start)
    return EXIT_OK if report["truncation_ok"] else EXIT_NUMERICAL


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lam", type=_floats, help="squeezing lambda = tanh s (comma list allowed)")
    p.add_argument("--R", type=_floats, help="input splitter intensity reflectance")
    p.add_argument("--Rs", type=float, default=0.1, help="tap-off intensity reflectance (default 0.1)")
    p.add_argument("--eta", type=_floats, help="detector efficiencies, comma list")
    p.add_argument("--nmax", type=int, default=10, help="Fock truncation (default 10)")
    p.add_argument("--kmax", type=int, default=None, help="max subtracted photons (default nmax)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fockcat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fockcat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fig = sub.add_parser("figure", help="write figure data (CSV) and a JSON manifest")
    fig.add_argument("name", choices=FIGURES)
    _common(fig)
    fig.add_argument("--points", type=int, default=None, help="override grid resolution")
    fig.add_argument("--workers", type=int, default=None, help="worker processes for grid points")
    fig.add_argument("--out", default=".", help="output directory")
    fig.set_defaults(func=cmd_figure)

    run = sub.add_parser("run", help="evaluate a single scenario")
    run.add_argument("--scheme", choices=("single", "double"), default="single")
    run.add_argument("--model", choices=("ideal", "realistic"), default="realistic")
    _common(run)
    run.add_argument("--alpha", type=float, default=0.0)
    run.add_argument("--beta", type=float, default=0.0)
    run.add_argument("--branches", type=int, default=5, help="rows of the branch table to show")
    run.add_argument("--json", action="store_true", help="print the report as JSON")
    run.add_argument("--out", default=None, help="also write run.json and a manifest here")
    run.set_defaults(func=cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ValidationError as exc:
        print(f"fockcat: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ParameterError, ValidationError) as exc:
        print(f"fockcat: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalHealthError as exc:
        print(f"fockcat: numerical health failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
