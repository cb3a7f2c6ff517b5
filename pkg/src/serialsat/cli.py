"""Command line interface.

Subcommands follow the design workflow: linearize the plant about its
commanded attitude, design gains, simulate the nonlinear closed loop,
compare the two methods, or run the self-check suite.

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(gimbal lock / singular mass matrix), 4 synthesis failure, 5 divergence.
Verbosity comes from the SERIALSAT_LOG environment variable (debug, info,
warning, error).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import __version__
from .config import load_scenario, resolve_config_path
from .errors import (ConfigError, DegenerateError, DivergedError,
                     GimbalLockError, InvalidRotationError,
                     NotStabilizableError, SingularBlockError,
                     SingularMassError, UncontrollableError)
from .report import (METHODS, dump_yaml, gains_doc, linearize_doc,
                     load_gain_matrix, perf_doc, run_compare, run_designs,
                     run_linearize, run_simulation)
from .simulate import write_trajectory_csv
from .verify import run_verification

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_SYNTHESIS = 4
EXIT_DIVERGED = 5

log = logging.getLogger("serialsat")


def _setup_logging():
    level = os.environ.get("SERIALSAT_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _parser():
    parser = argparse.ArgumentParser(
        prog="serialsat",
        description="Serial-chain spacecraft attitude modeling and control design")
    parser.add_argument("--version", action="version",
                        version=f"serialsat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="scenario YAML ('strawman' for the shipped one)")

    p = sub.add_parser("linearize", parents=[common],
                       help="write the A/B model about the commanded attitude")
    p.add_argument("-o", "--out", required=True, help="output YAML path")

    p = sub.add_parser("design", parents=[common], help="design feedback gains")
    p.add_argument("--method", choices=[*METHODS, "both"], default="both")
    p.add_argument("-o", "--out", required=True, help="output YAML path")

    p = sub.add_parser("simulate", parents=[common],
                       help="closed-loop nonlinear simulation with a designed gain")
    p.add_argument("--gain-file", required=True, help="YAML written by 'design'")
    p.add_argument("--method", choices=METHODS, default=None,
                   help="which design to use when the file holds both")
    p.add_argument("-o", "--out", required=True, help="trajectory CSV path")
    p.add_argument("--report", default=None, help="optional performance YAML path")
    p.add_argument("--no-plots", action="store_true",
                   help="skip figure rendering next to the CSV")

    p = sub.add_parser("compare", parents=[common],
                       help="full pipeline for both methods plus perturbation sweep")
    p.add_argument("-o", "--out-dir", required=True)
    p.add_argument("--no-plots", action="store_true")
    p.add_argument("--no-sweep", action="store_true",
                   help="skip the parameter perturbation sweep")

    sub.add_parser("verify", parents=[common],
                   help="run the named invariant self-checks")
    return parser


def cmd_linearize(args) -> int:
    scenario = load_scenario(resolve_config_path(args.config))
    eq, model = run_linearize(scenario)
    dump_yaml(linearize_doc(scenario, eq, model), args.out)
    print(f"wrote {args.out} (equilibrium residual {eq.residual:.3e})")
    return EXIT_OK


def cmd_design(args) -> int:
    scenario = load_scenario(resolve_config_path(args.config))
    _, model = run_linearize(scenario)
    methods = METHODS if args.method == "both" else (args.method,)
    designs = run_designs(scenario, model, methods)
    dump_yaml(gains_doc(scenario, designs), args.out)
    for method, design in designs.items():
        worst = float(np.max(design.closed_loop_eigenvalues.real))
        print(f"{method}: closed-loop spectral abscissa {worst:.3e}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    scenario = load_scenario(resolve_config_path(args.config))
    method, gain = load_gain_matrix(args.gain_file, args.method)
    traj, rep = run_simulation(scenario, gain)
    write_trajectory_csv(traj, args.out)
    print(f"wrote {args.out} ({traj.t.shape[0]} rows, method {method})")
    if args.report:
        doc = {"tool": "serialsat", "version": __version__,
               "config_hash": scenario.config_hash, "method": method,
               "performance": perf_doc(traj, rep)}
        dump_yaml(doc, args.report)
        print(f"wrote {args.report}")
    if not args.no_plots:
        from .figures import render_trajectory
        outdir = os.path.dirname(os.path.abspath(args.out))
        for path in render_trajectory(traj, outdir,
                                      os.path.splitext(os.path.basename(args.out))[0],
                                      label=method):
            print(f"wrote {path}")
    print(f"energy integral {rep.energy:.6e}, peak control {rep.peak_control:.3f}")
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario = load_scenario(resolve_config_path(args.config))
    result = run_compare(scenario, with_sweep=not args.no_sweep)
    os.makedirs(args.out_dir, exist_ok=True)
    report_path = os.path.join(args.out_dir, "report.yaml")
    dump_yaml(result.doc, report_path)
    print(f"wrote {report_path}")
    for method, traj in sorted(result.trajectories.items()):
        csv_path = os.path.join(args.out_dir, f"{method}.csv")
        write_trajectory_csv(traj, csv_path)
        print(f"wrote {csv_path}")
    if not args.no_plots:
        from .figures import render_comparison, render_trajectory
        figdir = os.path.join(args.out_dir, "figures")
        written = render_comparison(result.trajectories, figdir)
        for method, traj in sorted(result.trajectories.items()):
            written += render_trajectory(traj, figdir, method, label=method)
        for path in written:
            print(f"wrote {path}")
    for line in result.doc["verdicts"]:
        print(line)
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_verification(resolve_config_path(args.config))
    width = max(len(r.name) for r in results)
    all_ok = True
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        line = f"{r.name:<{width}}  {status}"
        if r.detail:
            line += f"  ({r.detail})"
        print(line)
        all_ok &= r.ok
    print(f"{'all checks passed' if all_ok else 'CHECKS FAILED'}")
    return EXIT_OK if all_ok else 1


def main(argv=None) -> int:
    _setup_logging()
    args = _parser().parse_args(argv)
    handlers = {
        "linearize": cmd_linearize,
        "design": cmd_design,
        "simulate": cmd_simulate,
        "compare": cmd_compare,
        "verify": cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GimbalLockError, SingularMassError, SingularBlockError,
            InvalidRotationError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (NotStabilizableError, UncontrollableError, DegenerateError) as exc:
        print(f"synthesis failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SYNTHESIS
    except DivergedError as exc:
        print(f"simulation diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
