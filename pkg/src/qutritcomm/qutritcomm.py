#!/usr/bin/env python3
"""
Three-party qutrit communication simulator CLI

Runs the exhaustive ideal-case checks, noisy Monte Carlo campaigns of the
interferometer, the classical-bound oracle and the phase-settings tables.
"""

import argparse
import logging
import sys
from importlib.metadata import PackageNotFoundError, version

from dotenv import load_dotenv

from .analysis import campaign_summary
from .campaign_runner import run_campaign
from .classical_baseline import (
    evaluate_strategy,
    exhaustive_bound_reduced_class,
    optimal_strategy,
    random_strategy_search,
)
from .config_manager import ConfigManager
from .encoding_settings import CONVENTION_CHOICES, Convention, PartyRole, encoding_table
from .exceptions import AnalysisError, QutritCommError, VerificationError
from .physical_model import DEFAULT_DRIFT_TARGET, calibrate_drift_sigma, drift_error
from .protocol_engine import Party, Protocol, verify_protocol
from .qutrit_core import make_rng
from .reference_data import OPTIMAL_CLASSICAL_SUCCESS
from .report_writer import FORMATS, render_campaign, render_settings_table, write_output
from .session import DEFAULT_QTER_FRACTION, run_session

logger = logging.getLogger(__name__)

PROTOCOL_CHOICES = [p.value for p in Protocol]


def get_version():
    """Get the version of qutritcomm."""
    try:
        return version("qutritcomm")
    except PackageNotFoundError:
        return "unknown"


def _resolve_config(args, **overrides):
    """Merge .env, config file and the flags given on the command line."""
    load_dotenv()
    return ConfigManager().resolve(overrides, config_path=getattr(args, "config", None))


def _resolve_seed(args):
    """Seed from the flag or the environment, for commands without a campaign."""
    load_dotenv()
    return ConfigManager().resolve_seed(args.seed)


def cmd_ideal(args):
    """Run the exhaustive ideal-case sweeps.

    Raises:
        VerificationError: If any protocol violates its ideal-case invariants
    """
    protocols = list(Protocol) if args.protocol == "all" else [Protocol.parse(args.protocol)]
    failures = []
    for protocol in protocols:
        result = verify_protocol(protocol)
        status = "pass" if result.passed else "FAIL"
        details = ", ".join(f"{k}={v}" for k, v in result.details.items())
        print(f"{protocol.display_name}: {result.cases_checked} cases checked, {status} ({details})")
        failures.extend(result.failures)
    if failures:
        for failure in failures[:10]:
            logger.error(failure)
        raise VerificationError(f"{len(failures)} ideal-case checks failed", failures=failures)


def cmd_simulate(args):
    """Run a Monte Carlo campaign and emit the per-setting table."""
    config = _resolve_config(
        args,
        protocol=args.protocol,
        settings=args.settings,
        seed=args.seed,
        format=args.format,
        out=args.out,
        concurrency=args.concurrency,
        triggers=args.triggers,
        zero_noise=args.zero_noise or None,
    )
    settings = config.resolved_settings()
    noise = config.noise_config()
    logger.debug(
        "Simulating %d %s settings, %d triggers each, drift sigma %.6f",
        len(settings),
        config.protocol,
        noise.triggers,
        noise.drift_sigma,
    )
    results = run_campaign(settings, noise, concurrency=config.concurrency, progress=True)

    empty = [r.setting.label for r in results if r.report is None]
    if empty:
        raise AnalysisError(f"No detections for settings: {', '.join(empty)}")
    reports = [r.report for r in results]
    content = render_campaign(
        reports, campaign_summary(reports), fmt=config.format, seed=config.seed, config_echo=config.echo()
    )
    write_output(content, config.out)


def cmd_classical_bound(args):
    """Report the classical optimum and optionally corroborate it."""
    reduced = exhaustive_bound_reduced_class()
    best = reduced.best.as_fraction()
    print(
        f"Reduced-class optimum: {reduced.best} = {best} ≈ {float(best):.4f} "
        f"({reduced.strategies_checked} strategies, {len(reduced.maximizers)} optimal)"
    )
    if best != OPTIMAL_CLASSICAL_SUCCESS:
        raise VerificationError(f"Reduced-class optimum {best} differs from 7/9")

    if args.verify_optimal_strategy:
        success = evaluate_strategy(optimal_strategy())
        print(f"Optimal strategy: {success} = {success.as_fraction()}")
        if success.as_fraction() != OPTIMAL_CLASSICAL_SUCCESS:
            raise VerificationError(f"Optimal strategy scores {success}, not 7/9")

    if args.trials:
        seed = _resolve_seed(args)
        search = random_strategy_search(args.trials, make_rng(seed))
        print(f"Random search: best {search.best} ≈ {float(search.best):.4f} over {search.trials} strategies")


def cmd_settings_table(args):
    """Emit the distributor and relay phase settings for one protocol."""
    convention = Convention(args.convention)
    distributor = encoding_table(args.protocol, PartyRole.DISTRIBUTOR, convention)
    relay = encoding_table(args.protocol, PartyRole.RELAY, convention)
    content = render_settings_table(
        distributor,
        relay,
        fmt=args.format,
        protocol=Protocol.parse(args.protocol).value,
        convention=convention.value,
    )
    write_output(content, args.out)


def cmd_calibrate_drift(args):
    sigma = calibrate_drift_sigma(args.target)
    residual = drift_error(sigma) - args.target
    print(f"Drift sigma for target {args.target:.4f}: {sigma:.6f} rad (residual {residual:.2e})")


def cmd_session(args):
    """Play an ideal secret-sharing session and summarize it."""
    seed = _resolve_seed(args)
    result = run_session(
        args.rounds,
        rng=make_rng(seed),
        qter_fraction=args.qter_fraction,
        p_cheat=args.p_cheat,
        p_bar=args.p_bar,
    )
    print(
        f"Rounds: {len(result.rounds)}, valid: {len(result.valid_rounds)} "
        f"({100.0 * result.sift_rate:.2f}%), sampled: {len(result.sample_rounds)}, "
        f"key: {len(result.key_rounds)}"
    )
    if result.qter is not None:
        print(f"QTER: {100.0 * result.qter:.2f}%")
    if result.block_size is not None:
        print(f"Privacy amplification: {result.block_size} rounds per trit, {len(result.folds)} trits")
    for party in Party:
        print(f"  {party.value}: {''.join(str(v) for v in result.shares(party))}")


COMMANDS = {
    "ideal": cmd_ideal,
    "simulate": cmd_simulate,
    "classical-bound": cmd_classical_bound,
    "settings-table": cmd_settings_table,
    "calibrate-drift": cmd_calibrate_drift,
    "session": cmd_session,
}


def _handle(args):
    """Run a subcommand, mapping library errors to exit codes.

    Args:
        args: Parsed CLI arguments with the command name and its flags
    """
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s: %(message)s",
    )

    try:
        COMMANDS[args.command](args)
    except QutritCommError as e:
        # Every library error carries its own exit code
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(e.exit_code)
    except KeyboardInterrupt:
        print("\nOperation cancelled by user", file=sys.stderr)
        sys.exit(1)
    except Exception as e:
        print(f"Unexpected error: {e}", file=sys.stderr)
        sys.exit(1)


def build_parser():
    # Parent parser: shared flags inherited by all subcommands, no help
    parent_parser = argparse.ArgumentParser(add_help=False)
    parent_parser.add_argument(
        "--verbose", "-v", action="store_true", help="Enable verbose logging"
    )

    output_parser = argparse.ArgumentParser(add_help=False)
    output_parser.add_argument(
        "--format", choices=FORMATS, default=None, help="Output format (default: csv)"
    )
    output_parser.add_argument(
        "--out", "-o", default=None, help="Output file (default: standard output)"
    )

    parser = argparse.ArgumentParser(
        prog="qutritcomm",
        description="Simulate three-party single-qutrit communication protocols",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""Examples:
  qutritcomm ideal --protocol all
  qutritcomm simulate --protocol ss --seed 7 --format json --out runs/ss.json
  qutritcomm simulate --protocol ccp --zero-noise
  qutritcomm classical-bound --trials 10000 --verify-optimal-strategy
  qutritcomm settings-table --protocol ss --convention table-s1
  qutritcomm calibrate-drift --target 0.01
  qutritcomm session --rounds 3000 --p-cheat 0.3333 --p-bar 1e-4

Environment variables:
  QUTRITCOMM_CONFIG  - Campaign config file (JSON or TOML)
  QUTRITCOMM_SEED    - Default master seed
        """,
    )
    parser.add_argument(
        "--version",
        action="version",
        version=get_version(),
        help="Show program version and exit",
    )

    subparsers = parser.add_subparsers(dest="command")

    ideal_parser = subparsers.add_parser(
        "ideal", help="Exhaustively verify the ideal protocols", parents=[parent_parser]
    )
    ideal_parser.add_argument(
        "--protocol", choices=PROTOCOL_CHOICES + ["all"], default="all", help="Protocol to verify (default: all)"
    )

    simulate_parser = subparsers.add_parser(
        "simulate",
        help="Run a noisy Monte Carlo campaign",
        parents=[parent_parser, output_parser],
    )
    simulate_parser.add_argument("--config", help="Campaign config file (JSON or TOML)")
    simulate_parser.add_argument("--protocol", choices=PROTOCOL_CHOICES, default=None)
    simulate_parser.add_argument(
        "--settings",
        choices=["recorded", "exhaustive"],
        default=None,
        help="Recorded table settings or every input combination (default: recorded)",
    )
    simulate_parser.add_argument("--seed", type=int, default=None, help="Master seed")
    simulate_parser.add_argument("--triggers", type=int, default=None, help="Laser triggers per setting")
    simulate_parser.add_argument(
        "--concurrency",
        type=int,
        default=None,
        help="Maximum settings simulated at once (default: 3)",
    )
    simulate_parser.add_argument(
        "--zero-noise",
        action="store_true",
        help="Disable dark counts and phase drift",
    )

    bound_parser = subparsers.add_parser(
        "classical-bound",
        help="Compute the optimal classical CCP success probability",
        parents=[parent_parser],
    )
    bound_parser.add_argument(
        "--trials", type=int, default=0, help="Random full-table strategies to sample (default: 0)"
    )
    bound_parser.add_argument("--seed", type=int, default=None, help="Seed for the random search")
    bound_parser.add_argument(
        "--verify-optimal-strategy",
        action="store_true",
        help="Score the known optimal strategy over all promise inputs",
    )

    table_parser = subparsers.add_parser(
        "settings-table",
        help="Emit the interferometer phase settings",
        parents=[parent_parser, output_parser],
    )
    table_parser.add_argument("--protocol", choices=PROTOCOL_CHOICES, required=True)
    table_parser.add_argument(
        "--convention",
        choices=CONVENTION_CHOICES,
        default=Convention.MAIN_TEXT.value,
        help="Operator ordering for secret-sharing settings (default: main-text)",
    )

    calibrate_parser = subparsers.add_parser(
        "calibrate-drift",
        help="Find the drift spread for a target error contribution",
        parents=[parent_parser],
    )
    calibrate_parser.add_argument(
        "--target",
        type=float,
        default=DEFAULT_DRIFT_TARGET,
        help=f"Wrong-detector probability from drift (default: {DEFAULT_DRIFT_TARGET})",
    )

    session_parser = subparsers.add_parser(
        "session",
        help="Play an ideal secret-sharing session with sifting and amplification",
        parents=[parent_parser],
    )
    session_parser.add_argument("--rounds", type=int, default=1000, help="Rounds to play (default: 1000)")
    session_parser.add_argument(
        "--qter-fraction",
        type=float,
        default=DEFAULT_QTER_FRACTION,
        help=f"Share of valid rounds announced for QTER estimation (default: {DEFAULT_QTER_FRACTION})",
    )
    session_parser.add_argument("--p-cheat", type=float, default=None, help="Per-round cheating probability")
    session_parser.add_argument("--p-bar", type=float, default=None, help="Target cheating probability")
    session_parser.add_argument("--seed", type=int, default=None, help="Master seed")

    return parser


def main():
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args()

    if args.command is None:
        parser.print_help()
        sys.exit(1)

    # settings-table has a fixed csv default; simulate leaves it to the config
    if args.command == "settings-table" and args.format is None:
        args.format = "csv"
    _handle(args)


if __name__ == "__main__":
    main()
