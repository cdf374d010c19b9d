"""Command-line driver: ``knotflow {flow,validate,energy,gradient,sweep,kernel}``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import itertools
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .energy import EnergyParams, ohara_energy
from .errors import ConfigError, EmbeddednessError, RegularityError
from .flow import STEP_COLLAPSE, run_flow
from .fractional import HeatKernelParams, heat_kernel, heat_kernel_mass
from .gradient import flow_velocity, gradient_direct
from .io import (
    fixture_hashes,
    read_config,
    read_curve,
    read_diagnostics_csv,
    run_id,
    write_curve,
    write_diagnostics_csv,
    write_field_csv,
    write_frames,
    write_manifest,
)

log = logging.getLogger("knotflow")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_COLLAPSE = 0, 1, 2, 3


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _set_threads(n: int | None) -> None:
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(n)


def _overrides(args) -> dict:
    return {"seed": args.seed} if args.seed is not None else {}


def execute_run(cfg, out: Path, base: Path | None = None, figures: bool = True) -> tuple[int, dict]:
    """Run one flow and write frames.jsonl, diagnostics.csv, manifest.json (+ figures)."""
    started = _now()
    initial = cfg.initial_curve(base)
    rid = run_id(cfg)
    out.mkdir(parents=True, exist_ok=True)
    res = run_flow(initial, cfg.flow_config())
    write_frames(out / "frames.jsonl", res.frames, rid)
    write_diagnostics_csv(out / "diagnostics.csv", res.diagnostics, rid)
    write_curve(out / "final_curve.json", res.final.curve)
    files = ["frames.jsonl", "diagnostics.csv", "final_curve.json"]
    if figures:
        from .plotting import plot_curves, plot_history

        plot_curves(res.frames, out / "curves.png")
        plot_history(read_diagnostics_csv(out / "diagnostics.csv"), out / "history.png")
        files += ["curves.png", "history.png"]
    f = res.final
    manifest = {
        "run_id": rid,
        "version": __version__,
        "config": cfg.echo(),
        "started": started,
        "finished": _now(),
        "termination": res.termination,
        "message": res.message,
        "steps": f.step,
        "t_final": f.t,
        "residual_final": f.residual,
        "energy_final": f.energy,
        "length_final": f.curve.length,
        "rejections": f.rejections,
        "reparameterizations": f.reparam_count,
        "max_gauge_deviation": max(res.gauge_deviation, default=0.0),
        "N": cfg.N,
        "fixtures": fixture_hashes(cfg.alpha, cfg.N),
        "files": files,
    }
    if res.termination == STEP_COLLAPSE:
        manifest["collapse_step"] = f.step
        manifest["collapse_t"] = f.t
    write_manifest(out / "manifest.json", manifest)
    code = EXIT_COLLAPSE if res.termination == STEP_COLLAPSE else EXIT_OK
    return code, manifest


def cmd_flow(args) -> int:
    if not args.config:
        raise ConfigError("flow needs --config")
    cfg = read_config(args.config, _overrides(args))
    base = Path(args.config).resolve().parent
    cfg.initial_curve(base)  # fail before any file is written
    out = Path(args.out or "run")
    code, man = execute_run(cfg, out, base, figures=not args.no_figures)
    print(f"run {man['run_id']}: {man['termination']} after {man['steps']} steps, "
          f"t={man['t_final']:.6g}, residual={man['residual_final']:.3e}, L={man['length_final']:.10g}")
    print(f"outputs in {out}")
    return code


def cmd_validate(args) -> int:
    from .validation import format_table, run_validation

    checks = run_validation(args.fixtures)
    print(format_table(checks))
    failed = [c.name for c in checks if not c.passed]
    report = {"passed": not failed, "failed": failed, "checks": [c.as_dict() for c in checks]}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "validate.json").write_text(json.dumps(report, indent=2) + "\n")
    print("VALIDATE " + ("PASS" if not failed else "FAIL: " + ", ".join(failed)))
    return EXIT_OK if not failed else EXIT_FAIL


def _energy_params(args) -> EnergyParams:
    try:
        return EnergyParams(args.alpha, args.lam)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _load_curve(args):
    if not args.curve:
        raise ConfigError("a curve file is required")
    return read_curve(args.curve)


def cmd_energy(args) -> int:
    p = _energy_params(args)
    c = _load_curve(args)
    e = ohara_energy(c, p)
    print(f"E_alpha {e!r}")
    print(f"length {c.length!r}")
    print(f"total {e + p.lam * c.length!r}")
    return EXIT_OK


def cmd_gradient(args) -> int:
    p = _energy_params(args)
    c = _load_curve(args)
    H = gradient_direct(c, p.alpha)
    V = flow_velocity(c, p, H)
    out = Path(args.out or "gradient.csv")
    if out.suffix != ".csv":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "gradient.csv"
    write_field_csv(out, {"gamma": c.samples, "H": H.values, "V": V.values})
    print(f"wrote {out}")
    return EXIT_OK


def _sweep_job(job):
    cfg, out, base = job
    logging.disable(logging.INFO)
    try:
        code, man = execute_run(cfg, Path(out), base, figures=False)
        return {"dir": out, "code": code, "termination": man["termination"], "steps": man["steps"],
                "residual": man["residual_final"], "energy": man["energy_final"], "length": man["length_final"]}
    except Exception as exc:  # one failing run must not sink the sweep
        return {"dir": out, "code": EXIT_FAIL, "termination": type(exc).__name__, "steps": -1,
                "residual": float("nan"), "energy": float("nan"), "length": float("nan")}


def cmd_sweep(args) -> int:
    if not args.config:
        raise ConfigError("sweep needs --config")
    cfg = read_config(args.config, _overrides(args))
    if not cfg.sweep:
        raise ConfigError("config has no 'sweep' block")
    base = Path(args.config).resolve().parent
    axes = sorted(cfg.sweep)
    jobs, rows = [], []
    out = Path(args.out or "sweep")
    for i, combo in enumerate(itertools.product(*(cfg.sweep[a] for a in axes))):
        try:
            sub = dataclasses.replace(cfg, sweep={}, **dict(zip(axes, combo)))
            sub.flow_config()
            sub.initial_curve(base)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"sweep point {dict(zip(axes, combo))}: {exc}") from None
        jobs.append((sub, str(out / f"run_{i:03d}"), base))
        rows.append(dict(zip(axes, combo)))
    out.mkdir(parents=True, exist_ok=True)
    workers = max(1, args.threads or 1)
    if workers == 1:
        results = [_sweep_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_sweep_job, jobs))
    cols = axes + ["dir", "code", "termination", "steps", "residual", "energy", "length"]
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r, res in zip(rows, results):
            w.writerow([r[a] for a in axes] + [res[c] for c in cols[len(axes):]])
    for r, res in zip(rows, results):
        print(f"{r} -> {res['termination']} (residual {res['residual']:.3e})")
    return EXIT_OK if all(r["code"] == 0 for r in results) else EXIT_FAIL


def cmd_kernel(args) -> int:
    try:
        p = HeatKernelParams(args.s, args.t)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    x = np.linspace(-args.xmax, args.xmax, args.points)
    g = heat_kernel(x, p)
    out = Path(args.out or "kernel")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "kernel.csv", "w", newline="") as fh:
        fh.write(f"# s={args.s!r} t={args.t!r} mass={heat_kernel_mass(p)!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "G"])
        for xi, gi in zip(x, g):
            w.writerow([format(xi, ".17g"), format(gi, ".17g")])
    from .plotting import plot_kernel

    plot_kernel(x, g, out / "kernel.png", f"s={args.s:g}, t={args.t:g}")
    print(f"wrote {out / 'kernel.csv'} and {out / 'kernel.png'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (or .csv file for gradient)")
    common.add_argument("--seed", type=int, metavar="U64", help="override the config seed")
    common.add_argument("--threads", type=int, metavar="INT", help="worker processes (sweep) / BLAS threads")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="knotflow", description="Gradient flow of O'Hara knot energies.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("flow", parents=[common], help="run one flow from a config")
    p.add_argument("--no-figures", action="store_true", help="skip the PNG report")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("validate", parents=[common], help="run the invariant suite")
    p.add_argument("--fixtures", metavar="PATH", help="pinned-constant file to check against")
    p.set_defaults(func=cmd_validate)

    for name, fn, helptext in (("energy", cmd_energy, "print E^alpha, L and the total energy"),
                               ("gradient", cmd_gradient, "write H^alpha and V as CSV")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("curve", nargs="?", help="curve file {d, N, points}")
        p.add_argument("--alpha", type=float, default=2.5)
        p.add_argument("--lam", type=float, default=0.0)
        p.set_defaults(func=fn)

    p = sub.add_parser("sweep", parents=[common], help="run the cartesian product of a config's sweep block")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("kernel", parents=[common], help="tabulate the fractional heat kernel")
    p.add_argument("--s", type=float, default=1.5)
    p.add_argument("--t", type=float, default=0.1)
    p.add_argument("--xmax", type=float, default=3.0)
    p.add_argument("--points", type=int, default=201)
    p.set_defaults(func=cmd_kernel)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    _set_threads(args.threads)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RegularityError, EmbeddednessError) as exc:
        print(f"invalid curve: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
