"""Command-line interface: ``qmask run|fixtures-check|stats|export|reconstruct``.

Reports go to stdout; logs go to stderr. Exit codes: 0 when the scenario
verdict matches the expected one, 1 on a mismatch, 2 on any error.
"""

import argparse
import logging
import sys
from collections.abc import Sequence

import pandas as pd

from . import __version__
from .config import Settings, settings
from .density import to_json
from .errors import QMaskError
from .experiments import (
    EXPORT_TARGETS,
    exit_code,
    export,
    fixtures_check,
    run_scenario,
    scenario_from_settings,
    stats_report,
)
from .fixtures import load_fixtures
from .models import FixtureCheckReport, ScenarioName, ScenarioReport, StatsReport
from .stats import TABLE_COLUMNS
from .tomography import load_manifest, reconstruct_linear_inversion

logger = logging.getLogger(__name__)

SCENARIOS = [s.value for s in ScenarioName]


def _sampling_options(parser: argparse.ArgumentParser, trials: bool = True) -> None:
    parser.add_argument("--shots", type=int, default=None, help=f"shots per run (default {settings.shots})")
    if trials:
        parser.add_argument("--trials", type=int, default=None, help=f"repeated runs (default {settings.trials})")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (QMASK_SEED overrides)")


def _format_option(parser: argparse.ArgumentParser, choices: Sequence[str], default: str) -> None:
    parser.add_argument("--format", choices=list(choices), default=default, help=f"output format (default {default})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmask",
        description="Quantum information masking: exact checks, sampled tomography and published-value comparisons.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run a scenario end to end")
    run.add_argument("scenario", choices=SCENARIOS)
    _sampling_options(run)
    _format_option(run, ("table", "json", "csv"), "table")
    mode = run.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="exact", action="store_true", help="exact simulation only")
    mode.add_argument("--sampled", dest="exact", action="store_false", help="add sampled tomography (default)")
    run.set_defaults(exact=False)
    run.add_argument("--theta-grid", type=int, default=None, help="number of GHZ θ values in (0, π)")
    run.add_argument("--alpha1", type=complex, default=None, help="coefficient α₁, e.g. 0.7071+0j")
    run.add_argument("--alpha2", type=complex, default=None, help="coefficient α₂, e.g. 0.7071j")
    run.add_argument("--angles0", type=float, nargs=3, metavar=("THETA", "PHI", "LAM"), default=None)
    run.add_argument("--angles1", type=float, nargs=3, metavar=("THETA", "PHI", "LAM"), default=None)
    run.add_argument("--phi", type=float, default=None, help="GHZ U3 φ")
    run.add_argument("--lam", type=float, default=None, help="GHZ U3 λ")

    check = commands.add_parser("fixtures-check", help="recompute published metrics from printed matrices")
    check.add_argument("--path", default=None, help="fixture file (default: bundled)")
    _format_option(check, ("table", "json", "csv"), "table")

    stats = commands.add_parser("stats", help="repeated-trial outcome statistics")
    stats.add_argument("scenario", choices=SCENARIOS)
    _sampling_options(stats)
    _format_option(stats, ("table", "json", "csv"), "table")

    exp = commands.add_parser("export", help="write density matrices to a file")
    exp.add_argument("target", choices=EXPORT_TARGETS)
    exp.add_argument("--path", required=True, help="output file")
    _sampling_options(exp, trials=False)
    _format_option(exp, ("json", "csv"), "json")

    rec = commands.add_parser("reconstruct", help="reconstruct a density matrix from a counts manifest")
    rec.add_argument("manifest", help="manifest JSON listing one counts file per setting")
    _format_option(rec, ("json", "table"), "json")

    return parser


def resolve_seed(arg_seed: int | None, cfg: Settings) -> int:
    """QMASK_SEED (an explicitly set ``seed`` setting) wins over ``--seed``."""
    if "seed" in cfg.model_fields_set or arg_seed is None:
        return cfg.seed
    return arg_seed


def render_report(report: ScenarioReport, fmt: str) -> str:
    if fmt == "json":
        return report.model_dump_json(indent=2)
    checks = pd.DataFrame([c.model_dump() for c in report.checks], columns=["name", "value", "threshold", "passed", "note"])
    if fmt == "csv":
        return checks.to_csv(index=False, float_format="%.17g")
    lines = [
        f"scenario: {report.scenario} ({report.mode})",
        f"masked: {report.masked}  expected: {report.expected_masked}  "
        f"verdict: {'OK' if report.verdict_matches else 'MISMATCH'}",
        "",
        checks.to_string(index=False, float_format=lambda v: f"{v:.3e}"),
    ]
    if report.metrics:
        lines += ["", "metrics:"] + [f"  {k}: {v:.6f}" for k, v in report.metrics.items()]
    if report.flags:
        lines += ["", "flags:"] + [f"  - {f}" for f in report.flags]
    return "\n".join(lines)


def render_fixtures(report: FixtureCheckReport, fmt: str) -> str:
    if fmt == "json":
        return report.model_dump_json(indent=2)
    table = pd.DataFrame(
        [r.model_dump() for r in report.rows],
        columns=["id", "status", "reported", "recomputed", "recomputed_unhalved", "delta", "tolerance", "note"],
    )
    if fmt == "csv":
        return table.to_csv(index=False, float_format="%.17g")
    summary = f"{report.passed} PASS, {report.flagged} FLAGGED, {report.skipped} SKIPPED"
    return table.drop(columns="note").to_string(index=False, float_format=lambda v: f"{v:.4f}", na_rep="-") + "\n\n" + summary


def render_stats(report: StatsReport, fmt: str) -> str:
    if fmt == "json":
        return report.model_dump_json(indent=2)
    table = pd.DataFrame([r.model_dump() for r in report.rows], columns=TABLE_COLUMNS)
    if fmt == "csv":
        return table.to_csv(index=False, float_format="%.17g")
    text = table.to_string(index=False, float_format=lambda v: f"{v:.4f}")
    if report.hardware_reference:
        reference = pd.DataFrame(report.hardware_reference, columns=["outcome", "mean", "sd", "max", "min"])
        text += "\n\nhardware reference (published, not a target):\n" + reference.to_string(index=False)
    return text


def _run(args: argparse.Namespace, cfg: Settings) -> int:
    scenario = scenario_from_settings(
        args.scenario,
        exact=args.exact,
        shots=args.shots,
        trials=args.trials,
        seed=resolve_seed(args.seed, cfg),
        theta_grid=args.theta_grid,
        alpha1=args.alpha1,
        alpha2=args.alpha2,
        angles0=tuple(args.angles0) if args.angles0 else None,
        angles1=tuple(args.angles1) if args.angles1 else None,
        phi=args.phi,
        lam=args.lam,
    )
    report = run_scenario(scenario)
    print(render_report(report, args.format))
    return exit_code(report)


def _fixtures_check(args: argparse.Namespace, cfg: Settings) -> int:
    fixtures = load_fixtures(args.path) if args.path else None
    print(render_fixtures(fixtures_check(fixtures), args.format))
    return 0


def _stats(args: argparse.Namespace, cfg: Settings) -> int:
    scenario = scenario_from_settings(
        args.scenario, shots=args.shots, trials=args.trials, seed=resolve_seed(args.seed, cfg)
    )
    print(render_stats(stats_report(scenario), args.format))
    return 0


def _export(args: argparse.Namespace, cfg: Settings) -> int:
    scenario = scenario_from_settings(ScenarioName.ORTHOGONAL, shots=args.shots, seed=resolve_seed(args.seed, cfg))
    path = export(args.target, scenario, args.path, args.format)
    print(path)
    return 0


def _reconstruct(args: argparse.Namespace, cfg: Settings) -> int:
    counts, seed = load_manifest(args.manifest)
    result = reconstruct_linear_inversion(counts, seed=seed)
    if args.format == "json":
        print(to_json(result.rho))
    else:
        m = result.rho.matrix
        print("re:\n" + pd.DataFrame(m.real).to_string(float_format=lambda v: f"{v:.4f}"))
        print("im:\n" + pd.DataFrame(m.imag).to_string(float_format=lambda v: f"{v:.4f}"))
        print(f"raw min eigenvalue: {result.raw_min_eigenvalue:.3e}")
    return 0


_COMMANDS = {
    "run": _run,
    "fixtures-check": _fixtures_check,
    "stats": _stats,
    "export": _export,
    "reconstruct": _reconstruct,
}


def main(argv: Sequence[str] | None = None, cfg: Settings | None = None) -> int:
    """Parse arguments, run one command and return its exit code."""
    cfg = cfg or settings
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if cfg.debug else logging.WARNING,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args, cfg)
    except (QMaskError, OSError) as e:
        logger.error(f"❌ {args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
