import argparse
import sys
from typing import List, Optional

from .config import get_config
from .errors import ConfigError, SpectrascopeError
from .handlers.commands import EXIT_USAGE, CommandHandlers
from .storage.service import StorageService
from .utils.logger import bind_run, configure_logging, get_logger

logger = get_logger(__name__)


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors as configuration errors."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _common_flags() -> argparse.ArgumentParser:
    config = get_config()
    common = _Parser(add_help=False)
    common.add_argument("--out", help="Output file; standard output when omitted")
    common.add_argument("--n", type=int, default=1000, help="Block length")
    common.add_argument("--gamma", type=float, default=0.02, help="Slack gamma > 0")
    common.add_argument("--samples", type=int, default=1000, help="Number of sample paths")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=config.WORKERS)
    common.add_argument("--tau-min", type=float, default=0.0)
    common.add_argument("--tau-max", type=float, default=None)
    common.add_argument("--tau-points", type=int, default=config.TAU_POINTS)
    common.add_argument("--cap", type=int, default=None, help="Enumeration cap (overrides SPECTRASCOPE_CAP)")
    common.add_argument("--certified-rate", action="append", metavar="INDEX=RATE",
                        help="Certified entropy rate for a mixture component")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _Parser(prog="spectrascope",
                     description="Information spectra, dominance checks and coding-bound verifiers.")
    parser.add_argument("--log-level", default=None, help="Log level (default SPECTRASCOPE_LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    exact = commands.add_parser("spectrum-exact", parents=[common], help="Exact staircase spectrum of a mixture")
    exact.add_argument("--model", required=True)

    estimate = commands.add_parser("spectrum-estimate", parents=[common], help="Monte Carlo spectrum")
    estimate.add_argument("--model", required=True)
    estimate.add_argument("--check-staircase", action="store_true",
                          help="Compare against the exact staircase instead of writing the estimate")
    estimate.add_argument("--tolerance", type=float, default=None)
    estimate.add_argument("--exclusion", type=float, default=None)

    dominance = commands.add_parser("dominance", parents=[common], help="Spectrum dominance check")
    dominance.add_argument("--upper", help="Spectrum of the image process Y")
    dominance.add_argument("--lower", help="Spectrum of the source process X")
    dominance.add_argument("--model", help="Source model, estimated together with --code")
    dominance.add_argument("--code", help="Sliding-block code mapping --model to its image")
    dominance.add_argument("--slack", type=float, default=None)

    verify = commands.add_parser("verify", help="Exact-enumeration verifiers")
    checks = verify.add_subparsers(dest="check", required=True, parser_class=_Parser)

    lemma2 = checks.add_parser("lemma2", parents=[common], help="Finite-block spectrum transfer bound")
    lemma2.add_argument("--model", required=True)
    lemma2.add_argument("--code", required=True)
    lemma2.add_argument("--reference", help="Code defining the target process (defaults to --code)")
    lemma2.add_argument("--grid", choices=["default", "custom"], default="default")
    lemma2.add_argument("--taus")
    lemma2.add_argument("--gammas")
    lemma2.add_argument("--betas")

    change = checks.add_parser("change-of-measure", parents=[common], help="Component-vs-mixture bound")
    change.add_argument("--model", required=True)
    change.add_argument("--component", type=int, default=0)

    types = checks.add_parser("types", parents=[common], help="Markov type census and bounds")
    types.add_argument("--k", type=int, default=1)
    types.add_argument("--alphabet-size", type=int, default=2)
    types.add_argument("--model", help="Also check same-type same-probability for this model")

    hamming = checks.add_parser("hamming", parents=[common], help="Hamming ball size bound")
    hamming.add_argument("--N", type=int, required=True)
    hamming.add_argument("--beta", type=float, required=True)
    hamming.add_argument("--alphabet-size", type=int, default=2)
    hamming.add_argument("--exhaustive", action="store_true")

    tail = checks.add_parser("tail", parents=[common], help="Exact upper tail of the self-information rate")
    tail.add_argument("--model", required=True)

    demo = commands.add_parser("iso-demo", parents=[common], help="Pasting and counterexample demos")
    demo.add_argument("--demo", choices=["pasting", "counterexample"], default="pasting")
    demo.add_argument("--window", type=int, default=1000, help="Classifier window n_c")
    demo.add_argument("--k-block", type=int, default=3)
    demo.add_argument("--tv-tolerance", type=float, default=0.02)

    entropy = commands.add_parser("entropy", parents=[common], help="Entropy rates and brackets")
    entropy.add_argument("--model", required=True)
    entropy.add_argument("--k", type=int, default=None)
    return parser


def dispatch(handlers: CommandHandlers, args: argparse.Namespace) -> int:
    if args.command == "verify":
        args.command = f"verify {args.check}"
        return {
            "lemma2": handlers.verify_lemma2,
            "change-of-measure": handlers.verify_change_of_measure,
            "types": handlers.verify_types,
            "hamming": handlers.verify_hamming,
            "tail": handlers.verify_tail,
        }[args.check](args)
    return {
        "spectrum-exact": handlers.spectrum_exact,
        "spectrum-estimate": handlers.spectrum_estimate,
        "dominance": handlers.dominance,
        "iso-demo": handlers.iso_demo,
        "entropy": handlers.entropy,
    }[args.command](args)


def run(argv: Optional[List[str]] = None) -> int:
    """Run one CLI command: 0 on success, 2 when a mathematical check fails, 1 otherwise."""
    try:
        configure_logging(get_config().LOG_LEVEL)
        args = build_parser().parse_args(argv)
        if args.log_level:
            configure_logging(args.log_level)
        bind_run(command=args.command, check=getattr(args, "check", None), seed=getattr(args, "seed", None),
                 model=getattr(args, "model", None))
        return dispatch(CommandHandlers(StorageService()), args)
    except (SpectrascopeError, OSError, ValueError) as e:
        logger.error(f"Command failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main():
    """Main entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
