"""Command line entry point: ``tripletbeats <subcommand> [scenario] [flags]``.

Subcommands map to scenario run kinds::

    stationary     stationary-state report at one field
    beats          one Monte Carlo beat trace plus its analysis
    sweep-field    beat traces over B_list_T
    sweep-hopping  beat traces over tau_hop_list_ps
    projections    stationary reports over B_list_T

Exit status: 0 success, 1 invalid input, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis import analysis_report
from .fileio import report_to_json, reports_to_csv, sha256_file, write_json, write_trace_csv
from .montecarlo import ensemble_beats
from .scenario import Scenario, ScenarioError, parse_scenario, parse_scenario_text, scenario_dict
from .stationary import projection_field_sweep, stationary_report

log = logging.getLogger("tripletbeats")

SUBCOMMANDS = {
    "stationary": "stationary",
    "beats": "beats",
    "sweep-field": "field-sweep",
    "sweep-hopping": "hopping-sweep",
    "projections": "projection-sweep",
}


def _tag(value: float) -> str:
    return f"{value:g}".replace("-", "m")


def _write_beats(sc: Scenario, field, mc, stem: str, out: Path) -> list[Path]:
    trace = ensemble_beats(sc.crystal, field, mc, workers=sc.workers)
    csv_path = write_trace_csv(trace, out / f"{stem}.csv")
    try:
        report = analysis_report(trace)
    except ValueError as exc:
        report = {"error": str(exc)}
    json_path = write_json(report, out / f"{stem}.json")
    return [csv_path, json_path]


def run(sc: Scenario) -> list[Path]:
    """Execute a scenario; returns written paths, manifest last."""
    out = Path(sc.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    kind = sc.run_kind
    if kind == "stationary":
        rep = stationary_report(sc.config, sc.crystal, sc.field)
        (out / "stationary.csv").write_text(reports_to_csv([rep]))
        written += [out / "stationary.csv", write_json(report_to_json(rep), out / "stationary.json")]
    elif kind == "projection-sweep":
        reps = projection_field_sweep(sc.config, sc.crystal, sc.field_dir, sc.B_list_T)
        (out / "projections.csv").write_text(reports_to_csv(reps))
        written += [out / "projections.csv",
                    write_json([report_to_json(r) for r in reps], out / "projections.json")]
    elif kind == "beats":
        written += _write_beats(sc, sc.field, sc.mc(), "beats", out)
    elif kind == "field-sweep":
        for b in sc.B_list_T:
            log.info("field %g T", b)
            written += _write_beats(sc, sc.field_at(b), sc.mc(), f"beats_B{_tag(b)}T", out)
    elif kind == "hopping-sweep":
        for tau in sc.tau_hop_list_ps:
            log.info("tau_hop %g ps", tau)
            written += _write_beats(sc, sc.field, sc.mc(tau), f"beats_tau{_tag(tau)}ps", out)
    else:  # parse_scenario already rejects this
        raise ValueError(f"unknown run kind {kind!r}")
    manifest = {
        "manifest_version": 1,
        "code_version": __version__,
        "seed": sc.seed,
        "scenario": scenario_dict(sc),
        "outputs": {p.name: sha256_file(p) for p in written},
    }
    written.append(write_json(manifest, out / "manifest.json"))
    return written


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tripletbeats", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("scenario", nargs="?", help="scenario file (key = value text, JSON, or a run manifest)")
        p.add_argument("--preset", help="crystal preset, e.g. rubrene")
        p.add_argument("--seed", type=int)
        p.add_argument("--ntraj", type=int, dest="n_traj")
        p.add_argument("--out", dest="out_dir", help="output directory")
        p.add_argument("--config", help="pair configuration AA, BB or AB")
        p.add_argument("--field-T", dest="B_T", type=float, help="field magnitude in tesla")
        p.add_argument("--field-dir", dest="B_dir", help="x, y, z or 'bx,by,bz'")
        p.add_argument("--tau-hop-ps", dest="tau_hop_ps", type=float)
        p.add_argument("--t-max-ns", dest="t_max_ns", type=float)
        p.add_argument("--dt-ns", dest="dt_ns", type=float)
        p.add_argument("--fields-T", dest="B_list_T", help="comma separated field magnitudes")
        p.add_argument("--tau-hops-ps", dest="tau_hop_list_ps", help="comma separated hopping times")
        p.add_argument("--workers", type=int)
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any scenario key")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    kind = SUBCOMMANDS[args.command]
    overrides = {k: getattr(args, k) for k in (
        "preset", "seed", "n_traj", "out_dir", "config", "B_T", "B_dir", "tau_hop_ps", "t_max_ns",
        "dt_ns", "B_list_T", "tau_hop_list_ps", "workers")}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            print(f"error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return 1
        overrides[key.strip()] = value.strip()
    try:
        if args.scenario:
            sc = parse_scenario(args.scenario, overrides)
            if sc.run_kind != kind:
                raise ScenarioError(f"{args.scenario}: run_kind {sc.run_kind!r} does not match subcommand {args.command!r}")
        else:
            if overrides.get("preset") is None and not any(
                    overrides.get(k) is not None for k in ("D_cm1", "E_cm1", "theta_deg")):
                overrides["preset"] = "rubrene"
            sc = parse_scenario_text(f"run_kind = {kind}\n", "<command line>", overrides)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        paths = run(sc)
    except Exception as exc:  # reported, never swallowed silently
        log.debug("run failed", exc_info=True)
        print(f"error: run failed: {exc}", file=sys.stderr)
        return 2
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
