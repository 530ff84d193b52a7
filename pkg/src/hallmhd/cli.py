"""Command line entry point.

    hallmhd simulate --config run.cfg
    hallmhd study    --config run.cfg --axis modes_n --levels 3
    hallmhd verify   --config run.cfg

Artifacts go to ``$HMHD_OUTPUT_ROOT/<output.name>/`` (default root
``./hmhd_runs``). Exit codes: 0 pass, 1 usage error, 2 numerical failure,
3 acceptance failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import traceback

from . import io
from .config import ConfigError, load_config
from .harness import refinement_study
from .simulation import Timer, manifest, run_config, write_artifacts
from .verification import run_checks

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_ACCEPTANCE = 0, 1, 2, 3

log = logging.getLogger("hallmhd")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser():
    p = _Parser(prog="hallmhd", description="Spectral Galerkin solver for density-dependent Hall-MHD.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (("simulate", "run one simulation"),
                        ("verify", "run and judge every per-run check"),
                        ("study", "refinement study along one axis")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True)
        if name == "study":
            s.add_argument("--axis", required=True, choices=("modes_n", "mollify_eps", "tolerance"))
            s.add_argument("--levels", required=True, type=int)
    return p


def _run_dir(cfg, suffix=""):
    return io.output_root() / (cfg.output.name + suffix)


def _simulate(cfg, verify: bool):
    run_dir = _run_dir(cfg)
    timer = Timer()
    mpath = run_dir / "manifest.json"
    command = "verify" if verify else "simulate"
    try:
        traj, setup = run_config(cfg)
    except Exception as exc:  # setup or integration blew up outside the window machinery
        io.write_json(mpath, manifest(cfg, command, "numerical_failure", error=repr(exc),
                                      extra={"traceback": traceback.format_exc()}))
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    timer.mark("simulate")
    files = write_artifacts(traj, setup, run_dir)
    timer.mark("write")
    timings = dict(timer.marks, march_wall=traj.wall_time)
    if not traj.ok:
        io.write_json(mpath, manifest(cfg, command, "numerical_failure", traj=traj, timings=timings,
                                      files=files, error=traj.failure["reason"]))
        print(f"numerical failure: {traj.failure['reason']}", file=sys.stderr)
        return EXIT_NUMERICAL
    verdicts = []
    if verify:
        verdicts = run_checks(traj, setup)
        timer.mark("verify")
        timings.update(timer.marks)
        io.write_json(run_dir / "acceptance.json", [v.as_dict() for v in verdicts])
        files["acceptance_json"] = str(run_dir / "acceptance.json")
        for v in verdicts:
            print(v.line())
    ok = all(v.passed for v in verdicts)
    io.write_json(mpath, manifest(cfg, command, "pass" if ok else "acceptance_failure", traj=traj,
                                  timings=timings, files=files,
                                  verdicts=[v.as_dict() for v in verdicts]))
    print(f"run written to {run_dir}")
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def _study(cfg, axis, levels):
    run_dir = _run_dir(cfg, f"_study_{axis}")
    timer = Timer()
    report = refinement_study(cfg, axis, levels)
    timer.mark("study")
    io.write_json(run_dir / "study.json", report)
    io.write_csv(run_dir / "study_levels.csv",
                 ("level", "ok", "windows", "t_final", "energy_residual", "measure_drift"),
                 [(e["level"], int(e["ok"]), e["windows"], e["t_final"], e["energy_residual"],
                   e["measure_drift"]) for e in report["levels"]])
    io.write_csv(run_dir / "study_cauchy.csv", ("from", "to", "rho", "alpha", "beta"),
                 [(e["from"], e["to"], e["rho"], e["alpha"], e["beta"]) for e in report["cauchy"]])
    status = "pass" if report["failure"] is None else "numerical_failure"
    io.write_json(run_dir / "manifest.json",
                  manifest(cfg, "study", status, timings=timer.marks,
                           files={"report": str(run_dir / "study.json")},
                           error=report["failure"], extra={"axis": axis, "levels": levels}))
    print(f"study written to {run_dir}")
    return EXIT_OK if report["failure"] is None else EXIT_NUMERICAL


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    if args.command == "study":
        if args.levels < 3:
            print("study needs --levels >= 3", file=sys.stderr)
            return EXIT_USAGE
        if args.axis == "mollify_eps" and cfg.mollify.eps <= 0:
            print("mollify_eps study needs mollify.eps > 0", file=sys.stderr)
            return EXIT_USAGE
        return _study(cfg, args.axis, args.levels)
    return _simulate(cfg, verify=args.command == "verify")


if __name__ == "__main__":
    sys.exit(main())
