from argparse import Namespace
from typing import Any, Dict, List, Optional

from ..config import RunConfig
from ..errors import ConfigError, RegularityError
from ..models.alphabet import Alphabet
from ..models.process import MixtureModel
from ..models.spectra import EntropyBracket
from ..services import coding, isomorph, mtypes, spectrum
from ..services.process import conditional_entropy, entropy_rate
from ..storage.service import StorageService
from ..utils.logger import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2


def _exit_code(passed: bool) -> int:
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def _certified_rates(entries: Optional[List[str]]) -> Dict[int, float]:
    """Parse repeated `index=rate` flags."""
    rates = {}
    for entry in entries or []:
        try:
            index, value = entry.split("=", 1)
            rates[int(index)] = float(value)
        except ValueError:
            raise ConfigError(f"--certified-rate expects index=value, got {entry!r}")
    return rates


def _floats(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"Expected a comma-separated list of numbers, got {text!r}")


def run_config(args: Namespace) -> RunConfig:
    models = [m for m in (getattr(args, "model", None), getattr(args, "upper", None),
                          getattr(args, "lower", None)) if m]
    return RunConfig(
        command=args.command,
        model_paths=models,
        out=getattr(args, "out", None),
        n=args.n,
        gamma=args.gamma,
        num_samples=args.samples,
        seed=args.seed,
        tau_min=args.tau_min,
        tau_max=args.tau_max,
        tau_points=args.tau_points,
        cap=args.cap,
        workers=args.workers,
    )


class CommandHandlers:
    """One handler per subcommand; each returns the process exit code."""

    def __init__(self, storage: StorageService):
        self.storage = storage

    def _require(self, args: Namespace, name: str) -> Any:
        value = getattr(args, name, None)
        if value is None:
            raise ConfigError(f"--{name.replace('_', '-')} is required for {args.command}")
        return value

    def spectrum_exact(self, args: Namespace) -> int:
        run = run_config(args)
        model = self.storage.load_model(self._require(args, "model"))
        staircase = spectrum.mixture_spectrum(model, _certified_rates(args.certified_rate))
        self.storage.save_spectrum(staircase, run.out)
        return EXIT_OK

    def spectrum_estimate(self, args: Namespace) -> int:
        run = run_config(args)
        model = self.storage.load_model(self._require(args, "model"))
        grid = run.tau_grid(model.alphabet.size)

        if args.check_staircase:
            report = spectrum.validate_theorem1(
                model, run.n, run.gamma, run.num_samples, run.seed,
                tolerance=args.tolerance, exclusion=args.exclusion, tau_grid=grid,
                workers=run.workers, certified_rates=_certified_rates(args.certified_rate),
            )
            self.storage.save_json(report.to_dict(), run.out)
            return _exit_code(report.passed)

        estimate = spectrum.empirical_spectrum(model, run.n, run.gamma, run.num_samples, grid,
                                               run.seed, run.workers)
        self.storage.save_spectrum(estimate, run.out)
        return EXIT_OK

    def dominance(self, args: Namespace) -> int:
        """Compare two saved spectra, or a model with its image under a code on coupled samples."""
        run = run_config(args)
        if args.code is not None:
            base = self.storage.load_model(self._require(args, "model"))
            code = self.storage.load_code(args.code)
            image = coding.pushforward_model(code, base)
            size = max(base.alphabet.size, image.alphabet.size)
            grid = run.tau_grid(size)
            lower = spectrum.empirical_spectrum(base, run.n, run.gamma, run.num_samples, grid, run.seed, run.workers)
            upper = spectrum.empirical_spectrum(image, run.n, run.gamma, run.num_samples, grid, run.seed, run.workers)
        else:
            upper = self.storage.load_spectrum(self._require(args, "upper"))
            lower = self.storage.load_spectrum(self._require(args, "lower"))

        report = spectrum.dominance_check(upper, lower, args.slack)
        self.storage.save_json(report.to_dict(), run.out)
        return _exit_code(report.dominates)

    def verify_lemma2(self, args: Namespace) -> int:
        run = run_config(args)
        model = self.storage.load_model(self._require(args, "model"))
        code = self.storage.load_code(self._require(args, "code"))
        reference = self.storage.load_code(args.reference) if args.reference else None
        if args.grid != "default" and not (args.taus or args.gammas or args.betas):
            raise ConfigError("--grid custom needs at least one of --taus, --gammas, --betas")
        reports = coding.finite_bound_grid(
            model, code, run.n, _floats(args.taus), _floats(args.gammas), _floats(args.betas),
            reference=reference, cap=run.cap,
        )
        passed = all(r.passed for r in reports)
        self.storage.save_json({
            "pass": passed,
            "points": len(reports),
            "informative_points": sum(1 for r in reports if r.informative),
            "reports": [r.to_dict() for r in reports],
        }, run.out)
        return _exit_code(passed)

    def verify_change_of_measure(self, args: Namespace) -> int:
        run = run_config(args)
        mixture = self.storage.load_model(self._require(args, "model"))
        if not isinstance(mixture, MixtureModel):
            raise ConfigError("verify change-of-measure needs a mixture model")
        if not 0 <= args.component < len(mixture.components):
            raise ConfigError(f"--component must index one of {len(mixture.components)} components")
        report = coding.verify_change_of_measure(mixture.components[args.component], mixture,
                                                 run.n, run.gamma, run.cap)
        self.storage.save_json(report.to_dict(), run.out)
        return _exit_code(report.passed)

    def verify_types(self, args: Namespace) -> int:
        run = run_config(args)
        alphabet_size = args.alphabet_size
        payload: Dict[str, Any] = {}
        count = mtypes.type_count_bound(run.n, args.k, alphabet_size, run.cap)
        payload["type_count"] = count.to_dict()
        census = mtypes.type_census(run.n, args.k, Alphabet.of_size(alphabet_size), run.cap)
        covered = sum(census.values())
        payload["partition"] = {"classes": len(census), "covered": covered,
                                "pass": covered == alphabet_size ** run.n}
        passed = count.passed and payload["partition"]["pass"]

        if args.model:
            model = self.storage.load_model(args.model)
            same = mtypes.verify_same_type_probability(model, run.n, args.k, run.cap)
            payload["same_type"] = same.to_dict()
            passed = passed and same.passed
        payload["pass"] = passed
        self.storage.save_json(payload, run.out)
        return _exit_code(passed)

    def verify_hamming(self, args: Namespace) -> int:
        run = run_config(args)
        report = coding.hamming_ball_bound_check(args.N, args.beta, args.alphabet_size,
                                                 exhaustive=args.exhaustive, cap=run.cap)
        self.storage.save_json(report.to_dict(), run.out)
        return _exit_code(report.passed)

    def verify_tail(self, args: Namespace) -> int:
        run = run_config(args)
        model = self.storage.load_model(self._require(args, "model"))
        report = spectrum.tail_probability(model, run.n, run.gamma, run.cap)
        self.storage.save_json(report.to_dict(), run.out)
        return _exit_code(report.passed)

    def iso_demo(self, args: Namespace) -> int:
        run = run_config(args)
        if args.demo == "counterexample":
            x, y = isomorph.regularity_counterexample()
            report = isomorph.invariant_check(x, y)
            try:
                isomorph.RegularMixturePair.build(x, x)
                regular = True
            except RegularityError as e:
                logger.info(f"Counterexample mixture is irregular: {e}")
                regular = False
            self.storage.save_json({"invariants": report.to_dict(), "x_regular": regular}, run.out)
            return _exit_code(report.verdict == isomorph.VERDICT_BY_ERGODICITY and not regular)

        pair, pasted = isomorph.pasting_demo(args.window)
        certificate = isomorph.verify_isomorphism(pair, pasted, run.n, run.num_samples, args.k_block,
                                                  run.seed, run.workers)
        invariants = isomorph.invariant_check(pair.x, pair.y)
        passed = (
            certificate.verdict == isomorph.VERDICT_CONSISTENT
            and certificate.tv_distance <= args.tv_tolerance
            and invariants.spectra_equal
        )
        self.storage.save_json({
            "certificate": certificate.to_dict(),
            "invariants": invariants.to_dict(),
            "tv_tolerance": args.tv_tolerance,
            "pass": passed,
        }, run.out)
        return _exit_code(passed)

    def entropy(self, args: Namespace) -> int:
        run = run_config(args)
        model = self.storage.load_model(self._require(args, "model"))
        payload: Dict[str, Any] = {}
        if isinstance(model, MixtureModel):
            certified = _certified_rates(args.certified_rate)
            staircase = spectrum.mixture_spectrum(model, certified)
            payload["components"] = [
                {"weight": float(w), "entropy_rate": spectrum.component_rate(c, certified.get(i))}
                for i, (c, w) in enumerate(zip(model.components, model.weights))
            ]
            payload["entropy_rate"] = spectrum.entropy_integral(staircase)
            payload["spectral_bounds"] = spectrum.spectral_bounds(staircase).to_dict()
        else:
            rate = entropy_rate(model, args.k, run.cap)
            if isinstance(rate, EntropyBracket):
                payload["bracket"] = rate.to_dict()
            else:
                payload["entropy_rate"] = rate
            if args.k is not None:
                payload["conditional_entropies"] = [
                    conditional_entropy(model, j, run.cap) for j in range(args.k + 1)
                ]
        self.storage.save_json(payload, run.out)
        return EXIT_OK
