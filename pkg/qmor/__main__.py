"""
qmor CLI entry point

Run as: python -m qmor <command> [options]
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from qmor.config import DEFAULT_CONFIG_PATH, GridSpec, load_config
from qmor.errors import ArtifactError, ComponentStateError, InvalidArgumentError, QmorError
from qmor.fom.types import StateLabel
from qmor.workbench import Workbench, parse_states

logger = logging.getLogger("qmor")

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INVALID = 2
EXIT_MISSING = 3
EXIT_VALIDATION = 4


def exit_code_for(error: QmorError) -> int:
    if isinstance(error, InvalidArgumentError):
        return EXIT_INVALID
    if isinstance(error, (ArtifactError, ComponentStateError)):
        return EXIT_MISSING
    # overflow, degenerate stability, EIM degeneracy, untrainable, classification
    return EXIT_NUMERICAL


def _mu(args) -> tuple:
    return (args.epsilon, args.alpha)


def cmd_fom(bench: Workbench, args) -> int:
    states = parse_states(args.states)
    print(f"🔬 FOM at mu=({args.epsilon:g}, {args.alpha:g}) for {', '.join(s.value for s in states)}")
    pss = bench.fom(_mu(args), states)
    for label in states:
        branch = pss.attempts.get(label)
        if branch is not None:
            energy = f"{branch.energy:.12g}" if branch.energy is not None else "-"
            print(
                f"   {label.value:<4} {branch.outcome.value:<20} E={energy:<20} "
                f"it={branch.iterations:<6} {branch.seconds:.2f}s"
            )
        elif label in pss.failures:
            print(f"   {label.value:<4} ❌ {pss.failures[label]}")
    print(f"✅ {len(pss)} branch(es) kept: {', '.join(s.value for s in pss.labels) or 'none'}")
    return EXIT_NUMERICAL if pss.failures else EXIT_OK


def cmd_train(bench: Workbench, args) -> int:
    states = parse_states(args.states)
    print(f"🏗️  Training {', '.join(s.value for s in states)} under {bench.root}")
    summary = bench.train(states, force=args.force)
    for label in summary.skipped:
        print(f"   ⏭️  {label.value}: already trained")
    for label in summary.trained:
        print(f"   ✅ {label.value}: trained")
    for label, reason in summary.failed.items():
        print(f"   ❌ {label.value}: {reason}")
    if summary.trained:
        print(f"   FOM calls: {summary.fom_calls} ({summary.fom_seconds:.1f}s), total {summary.seconds:.1f}s")
    return EXIT_NUMERICAL if summary.failed else EXIT_OK


def cmd_online(bench: Workbench, args) -> int:
    states = parse_states(args.state)
    results = bench.online(_mu(args), states, compare_fom=args.compare_fom, save_fields=args.save_fields)
    if args.json:
        print(json.dumps([r.to_dict() for r in results], indent=2))
        return EXIT_OK
    print(f"⚡ Online solves at mu=({args.epsilon:g}, {args.alpha:g})")
    for r in results:
        s = r.solution
        line = (
            f"   {s.label.value:<4} E_rb={s.energy:.12g}  it={s.iterations}  "
            f"{s.seconds * 1e3:.2f} ms  {s.outcome.value}"
        )
        if r.solution_error is not None:
            line += f"  phi_err={r.solution_error:.3e}"
        if r.energy_error is not None:
            line += f"  E_err={r.energy_error:.3e}"
        if r.speedup is not None:
            line += f"  speedup={r.speedup:.0f}x"
        print(line)
        if r.field_dir is not None:
            print(f"        field: {r.field_dir}")
    return EXIT_OK


def cmd_diagram(bench: Workbench, args) -> int:
    grid_spec = None
    if args.eps or args.alpha_range:
        coarse = bench.config.diagram.coarse
        try:
            grid_spec = GridSpec(epsilon=args.eps or coarse.epsilon, alpha=args.alpha_range or coarse.alpha)
        except ValidationError as e:
            raise InvalidArgumentError(f"Bad diagram grid: {e}")
    print(f"🗺️  {args.mode.capitalize()} phase diagram")
    diagram, directory = bench.diagram(args.mode, grid_spec, args.iterations, args.name)
    for row in diagram.history:
        print(
            f"   iteration {int(row['iteration'])}: +{int(row['points_added'])} point(s), "
            f"{int(row['total_points'])} total, {row['seconds_total']:.2f}s"
        )
    counts = ", ".join(f"{k}={v}" for k, v in diagram.counts().items())
    print(f"✅ {len(diagram)} point(s) [{counts}] written to {directory}")
    return EXIT_OK


def cmd_validate(bench: Workbench, args) -> int:
    print(f"🧪 Validation level '{args.level}'")
    report, path = bench.validate(args.level)
    for check in report.checks:
        mark = "✅" if check.passed else "❌"
        measured = f" measured={check.measured:.3e}" if check.measured is not None else ""
        threshold = f" threshold={check.threshold:.3e}" if check.threshold is not None else ""
        detail = f" ({check.detail})" if check.detail else ""
        print(f"   {mark} {check.name}{measured}{threshold}{detail}")
    passed = sum(c.passed for c in report.checks)
    print(f"{'✅' if report.passed else '❌'} {passed}/{len(report.checks)} passed, report at {path}")
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_export(bench: Workbench, args) -> int:
    if args.what == "diagram":
        path = bench.export_diagram(args.name, args.output)
    else:
        if args.epsilon is None or args.alpha is None:
            raise InvalidArgumentError("export field needs --epsilon and --alpha")
        path = bench.export_field(
            _mu(args), StateLabel.parse(args.state), source=args.source,
            extent=args.extent, resolution=args.resolution, output=args.output,
        )
    print(f"📦 Exported to {path}")
    return EXIT_OK


def _add_mu(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--epsilon", type=float, required=required, help="Temperature-like parameter")
    parser.add_argument("--alpha", type=float, required=required, help="Cubic coefficient")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmor",
        description="Reduced basis workbench for quasicrystal phase diagrams",
    )
    parser.add_argument("--config", default=None, help=f"TOML config file (default: {DEFAULT_CONFIG_PATH} if present)")
    parser.add_argument("--root", default=None, help="Artifact root directory (overrides paths.root)")
    parser.add_argument("--n-h", type=int, default=None, help="Modes per lifted dimension (overrides grid.n_h)")
    parser.add_argument("--workers", type=int, default=None, help="Worker threads, 0 = one per CPU")
    parser.add_argument("--strict", action="store_true", help="Reject parameters outside the domain")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fom", help="Run the full-order model at one parameter")
    _add_mu(p)
    p.add_argument("--states", default="all", help="Comma-separated seeds (QC,C6,LQ,T6,Lam) or 'all'")
    p.set_defaults(handler=cmd_fom)

    p = sub.add_parser("train", help="Train EIM and reduced components")
    p.add_argument("--states", default="all", help="Comma-separated states or 'all'")
    p.add_argument("--force", action="store_true", help="Retrain components that already exist")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("online", help="Solve the reduced models at one parameter")
    _add_mu(p)
    p.add_argument("--state", default="all", help="State label(s) or 'all'")
    p.add_argument("--compare-fom", action="store_true", help="Also run (or load) the FOM and report errors")
    p.add_argument("--save-fields", action="store_true", help="Persist reconstructed fields")
    p.add_argument("--json", action="store_true", help="Print results as JSON")
    p.set_defaults(handler=cmd_online)

    p = sub.add_parser("diagram", help="Generate a phase diagram")
    p.add_argument("--mode", choices=["uniform", "adaptive"], default="adaptive")
    p.add_argument("--eps", default=None, help="epsilon range start:step:stop (default: diagram.coarse)")
    p.add_argument("--alpha-range", default=None, help="alpha range start:step:stop (default: diagram.coarse)")
    p.add_argument("--iterations", type=int, default=None, help="Refinement iterations (adaptive)")
    p.add_argument("--name", default=None, help="Output name under diagrams/")
    p.set_defaults(handler=cmd_diagram)

    p = sub.add_parser("validate", help="Run a validation suite")
    p.add_argument("--level", choices=["unit", "oracle", "paper"], default="unit")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("export", help="Export fields or diagrams as CSV")
    p.add_argument("what", choices=["field", "diagram"])
    _add_mu(p, required=False)
    p.add_argument("--state", default="QC", help="State label (field export)")
    p.add_argument("--source", choices=["reduced", "fom"], default="reduced")
    p.add_argument("--extent", type=float, default=60.0, help="Side of the sampled square")
    p.add_argument("--resolution", type=int, default=128, help="Samples per side")
    p.add_argument("--name", default="adaptive", help="Diagram name (diagram export)")
    p.add_argument("--output", default=None, help="Output CSV path")
    p.set_defaults(handler=cmd_export)
    return parser


def _overrides(args) -> Dict[str, Dict[str, Any]]:
    overrides: Dict[str, Dict[str, Any]] = {}
    if args.root is not None:
        overrides.setdefault("paths", {})["root"] = args.root
    if args.n_h is not None:
        overrides.setdefault("grid", {})["n_h"] = args.n_h
    if args.workers is not None:
        overrides.setdefault("parallel", {})["workers"] = args.workers
    return overrides


def cli(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        format='%(asctime)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        level=logging.DEBUG if args.verbose else logging.INFO
    )
    try:
        path = args.config or (DEFAULT_CONFIG_PATH if Path(DEFAULT_CONFIG_PATH).exists() else None)
        config = load_config(path, overrides=_overrides(args))
        bench = Workbench(config, strict=args.strict)
        return args.handler(bench, args)
    except QmorError as e:
        code = exit_code_for(e)
        logger.error(str(e))
        print(f"❌ {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(cli())
