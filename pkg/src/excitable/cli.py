"""Command-line entry point.

    excitable list [--json]
    excitable run NAME|SPEC.json [--seed N] [--out DIR] [--override k=v ...] [--format csv|json|svg] [--workers N]
    excitable certify RUN_DIR --mu MU [--t0 T] [--t1 T]
    excitable reproduce --figure 1|3|4 [--out DIR]

Exit codes: 0 success, 1 usage or validation error, 2 numerical divergence.
Data goes to stdout, diagnostics to stderr. The default output root is
$EXCITABLE_OUT (or ./runs).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path


from .contraction import alpha_certificate
from .integrator import DivergenceError, GridError
from .output import atomic_write, dumps, load_run, write_result
from .scenarios import FORMAT_VERSION, ScenarioError, ScenarioSpec, builtin_scenarios, get_scenario, run_scenario

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED = 0, 1, 2

FIGURES = {
    "1": ["fig1a", "fig1b", "fig1c", "fig1d"],
    "3": ["fig3a", "fig3b", "fig3c"],
    "4": ["fig4a", "fig4b"],
}


class UsageError(Exception):
    pass


def _registry():
    return builtin_scenarios()


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def _out_root():
    return Path(os.environ.get("EXCITABLE_OUT", "runs"))


def _load_spec(name_or_path: str) -> ScenarioSpec:
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        try:
            return ScenarioSpec.from_dict(json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: {exc}") from exc
    for spec in _registry():
        if spec.name == name_or_path:
            return spec
    raise UsageError(f"unknown scenario {name_or_path!r} (see `excitable list`)")


def _parse_overrides(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"override {item!r} is not of the form key=value")
        out[key] = value
    return out


def cmd_list(args) -> int:
    specs = _registry()
    if args.json:
        print(json.dumps([{"name": s.name, "model": s.model, "description": s.description} for s in specs], indent=2))
    else:
        for s in specs:
            print(f"{s.name:<15} {s.model:<4} {s.description}")
    return EXIT_OK


def _run_one(spec, out_dir, overrides, svg, workers):
    result = run_scenario(spec, overrides, workers=workers)
    manifest = write_result(result, out_dir, svg=svg)
    print(f"wrote {len(manifest.files)} files to {out_dir}", file=sys.stderr)
    return result, manifest


def cmd_run(args) -> int:
    spec = _load_spec(args.scenario)
    overrides = _parse_overrides(args.override)
    if args.seed is not None:
        overrides["seed"] = args.seed
    out_dir = Path(args.out) if args.out else _out_root() / spec.name
    result, manifest = _run_one(spec, out_dir, overrides, args.format == "svg", args.workers)
    if args.format == "json":
        sys.stdout.write(dumps({"format_version": FORMAT_VERSION, "spec_hash": manifest.spec_hash, "summary": result.summary}))
    else:
        print(out_dir)
    return EXIT_OK


def cmd_certify(args) -> int:
    if not args.mu > 0:
        raise UsageError("--mu must be positive")
    run_dir = Path(args.run_dir)
    if not (run_dir / "run.json").exists():
        raise UsageError(f"{run_dir} is not a result directory")
    run, doc = load_run(run_dir)
    if run.model != "fhn":
        raise UsageError("certificates need an FHN ensemble")
    t0 = run.t0 if args.t0 is None else args.t0
    t1 = run.t1 if args.t1 is None else args.t1
    if not run.t0 <= t0 <= t1 <= run.t1 + 1e-9:
        raise UsageError(f"window [{t0}, {t1}] outside the run horizon [{run.t0}, {run.t1}]")
    try:
        cert = alpha_certificate(run, args.mu, t0, t1)
    except GridError as exc:
        raise UsageError(str(exc)) from exc
    payload = {"format_version": FORMAT_VERSION, "spec_hash": doc["spec_hash"], **cert.to_dict(), "sound": cert.sound}
    text = dumps(payload)
    atomic_write(run_dir / "certify.json", text)
    sys.stdout.write(text)
    return EXIT_OK


def _figure_report(figure, results) -> dict:
    s = {name: r.summary for name, r in results.items()}
    if figure == "1":
        return {
            "distance_ratio": {k: v["distance_ratio"] for k, v in s.items()},
            "fig1d_segment_ratios": s["fig1d"].get("segment_ratios"),
            "certificates": {k: r.certificates[0].to_dict() for k, r in results.items() if r.certificates},
        }
    if figure == "3":
        return {
            k: {
                "distance_ratio": v["distance_ratio"],
                "max_tail_abs_y_minus_v_rest": max(v["tail_max_abs_y_minus_v_rest"]),
                "eta_u_sync_mean": v["eta_u_sync_mean"],
                "eta_pairwise_sync_min": v["eta_pairwise_sync_min"],
                "y_spikes_after": v["y_spikes_after"],
                "u_peaks_in_window": v["u_peaks_in_window"],
            }
            for k, v in s.items()
        }
    a, b = s["fig4a"]["peak_phase_dispersion"], s["fig4b"]["peak_phase_dispersion"]
    return {
        "peak_phase_dispersion": {"fig4a": a, "fig4b": b},
        "dispersion_ratio": (b / a) if a and b is not None else None,
        "threshold": 0.05 * 2 * math.pi,
    }


def cmd_reproduce(args) -> int:
    figure = str(args.figure)
    if figure not in FIGURES:
        raise UsageError(f"figure must be one of {', '.join(FIGURES)}")
    root = Path(args.out) if args.out else _out_root() / f"figure{figure}"
    results = {}
    for name in FIGURES[figure]:
        spec = get_scenario(name)
        overrides = {"seed": args.seed} if args.seed is not None else None
        results[name], _ = _run_one(spec, root / name, overrides, args.svg, args.workers)
    report = {
        "format_version": FORMAT_VERSION,
        "figure": figure,
        "runs": {k: {"spec_hash": r.provenance["spec_hash"], "seed": r.provenance["seed"]} for k, r in results.items()},
        "spec_hash": {k: r.provenance["spec_hash"] for k, r in results.items()},
        "report": _figure_report(figure, results),
    }
    text = dumps(report)
    atomic_write(root / "report.json", text)
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="excitable", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list", help="list builtin scenarios")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("run", help="run a builtin scenario or a scenario JSON file")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--override", action="append", metavar="KEY=VALUE")
    p.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("certify", help="average-contraction certificate for a stored FHN run")
    p.add_argument("run_dir")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--t0", type=float)
    p.add_argument("--t1", type=float)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("reproduce", help="run every scenario of a figure and write report.json")
    p.add_argument("--figure", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except DivergenceError as exc:
        _err(str(exc))
        return EXIT_DIVERGED
    except (UsageError, ScenarioError, KeyError, ValueError) as exc:
        _err(str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
