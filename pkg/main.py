#!/usr/bin/env python3
"""
kinchem - radially symmetric kinetic chemotaxis simulator.

Usage:
    python main.py simulate --config run.json [--out DIR] [--resume CHECKPOINT]
    python main.py preset NAME [--out DIR]
    python main.py thresholds --model ball --chi0 1 --R 1 [--alpha A --mass M --I0 I --mu0 MU]
    python main.py [--seed S] [--threads N] verify-lemmas
    python main.py limit-study [--epsilons 0.4,0.2,0.1] [--equilibrium uniform-ball]
    python main.py gamma-star
    python main.py compare-parabolic --mass M [--chi0 1 --R 1]

Every command prints a JSON document on stdout. Failures print a problem
record on stderr and exit 1 (input), 2 (blow-up verdict) or 3 (numerical).
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from models.config import Equilibrium, KinchemSettings, PRESETS, ThresholdModel, preset
from problem_details import EXIT_NUMERICAL, EXIT_OK, KinchemError, UsageError, emit_problem, problem_from_exception
from services import compare_parabolic, limit_study, run_battery
from services import comparison, persistence, thresholds
from services.runner import SimulationRunner

logger = logging.getLogger("kinchem")


class _Parser(argparse.ArgumentParser):
    """Usage errors become problem records with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _print(payload) -> None:
    if hasattr(payload, "model_dump"):
        payload = payload.model_dump(mode="json", by_alias=True)
    print(json.dumps(payload, indent=2, allow_nan=True))


def _out_dir(args, settings: KinchemSettings, name: str) -> Path:
    return Path(args.out) if args.out else settings.output_dir / name


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_simulate(args, settings):
    if not args.config:
        raise UsageError("simulate needs --config")
    config = persistence.load_run_config(Path(args.config))
    resume = persistence.load_checkpoint(Path(args.resume)) if args.resume else None
    outcome = SimulationRunner(config, _out_dir(args, settings, config.name)).run(resume=resume)
    _print(outcome.manifest)
    return outcome.exit_code


def cmd_preset(args, settings):
    if args.name not in PRESETS:
        raise UsageError(f"unknown preset '{args.name}'; choose from {', '.join(sorted(PRESETS))}")
    config = preset(args.name)
    if args.show:
        _print(config.model_dump(mode="json"))
        return EXIT_OK
    outcome = SimulationRunner(config, _out_dir(args, settings, config.name)).run()
    _print(outcome.manifest)
    return outcome.exit_code


def cmd_thresholds(args, settings):
    report = thresholds.threshold_report(
        ThresholdModel(args.model), args.chi0, args.R, args.alpha, M=args.mass, I0=args.I0, mu0=args.mu0
    )
    _print(report)
    return EXIT_OK


def cmd_verify_lemmas(args, settings):
    seed = settings.seed if args.seed is None else args.seed
    threads = settings.threads if args.threads is None else args.threads
    report = run_battery(seed=seed, threads=threads)
    _print(report)
    return EXIT_OK if report.passed else EXIT_NUMERICAL


def cmd_limit_study(args, settings):
    base = persistence.load_run_config(Path(args.config)) if args.config else preset("limit-gaussian")
    try:
        epsilons = [float(e) for e in args.epsilons.split(",") if e.strip()]
    except ValueError:
        raise UsageError(f"--epsilons must be a comma-separated list of numbers, got '{args.epsilons}'") from None
    threads = settings.threads if args.threads is None else args.threads
    report = limit_study(base, epsilons, Equilibrium(args.equilibrium), threads=threads, relaxation_weight=args.kappa)
    _print(report)
    return EXIT_OK


def cmd_gamma_star(args, settings):
    _print(comparison.gamma_star())
    return EXIT_OK


def cmd_compare_parabolic(args, settings):
    report = compare_parabolic(args.mass, chi0=args.chi0, R=args.R, equilibrium=Equilibrium(args.equilibrium))
    _print(report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kinchem", description="Radially symmetric kinetic chemotaxis simulator")
    parser.add_argument("--threads", type=int, default=None, help="Worker threads for batteries and studies")
    parser.add_argument("--seed", type=int, default=None, help="Seed for randomized checks")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("simulate", help="Run one configuration")
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="Output directory")
    p.add_argument("--resume", help="Checkpoint to continue from")

    p = sub.add_parser("preset", help="Run (or show) a named preset")
    p.add_argument("name", help=f"One of {', '.join(sorted(PRESETS))}")
    p.add_argument("--out", help="Output directory")
    p.add_argument("--show", action="store_true", help="Print the preset configuration and exit")

    p = sub.add_parser("thresholds", help="Critical mass and derived constants")
    p.add_argument("--model", choices=[m.value for m in ThresholdModel], default=ThresholdModel.BALL_KINETIC.value)
    p.add_argument("--chi0", type=float, default=1.0)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--mass", type=float, default=None)
    p.add_argument("--I0", type=float, default=None)
    p.add_argument("--mu0", type=float, default=None)

    sub.add_parser("verify-lemmas", help="Check closed forms and inequalities against oracles")

    p = sub.add_parser("limit-study", help="Kinetic-to-parabolic convergence study")
    p.add_argument("--config", help="Base configuration (defaults to the limit-gaussian preset)")
    p.add_argument("--epsilons", default="0.4,0.2,0.1")
    p.add_argument("--equilibrium", choices=[e.value for e in Equilibrium], default=Equilibrium.UNIFORM_BALL.value)
    p.add_argument("--kappa", type=float, default=1.0, help="Relaxation weight")

    sub.add_parser("gamma-star", help="Best comparison exponent")

    p = sub.add_parser("compare-parabolic", help="Parabolic virial dichotomy at one mass")
    p.add_argument("--mass", type=float, required=True)
    p.add_argument("--chi0", type=float, default=1.0)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--equilibrium", choices=[e.value for e in Equilibrium], default=Equilibrium.UNIFORM_BALL.value)
    return parser


CMD_MAP = {
    "simulate": cmd_simulate,
    "preset": cmd_preset,
    "thresholds": cmd_thresholds,
    "verify-lemmas": cmd_verify_lemmas,
    "limit-study": cmd_limit_study,
    "gamma-star": cmd_gamma_star,
    "compare-parabolic": cmd_compare_parabolic,
}


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    settings = KinchemSettings()
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    parser = build_parser()
    command = None
    try:
        args = parser.parse_args(argv)
        command = args.command
        if not command:
            parser.print_help(sys.stderr)
            return 1
        return CMD_MAP[command](args, settings)
    except KinchemError as exc:
        return emit_problem(problem_from_exception(exc, instance=command))
    except Exception as exc:  # noqa: BLE001
        return emit_problem(problem_from_exception(exc, instance=command))


if __name__ == "__main__":
    sys.exit(main())
