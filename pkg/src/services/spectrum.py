"""Exact and empirical information spectra and the checks built on them."""

from typing import Dict, List, Optional, Tuple

import numpy as np

from ..config import get_config
from ..errors import (
    EntropyRateUnavailableError,
    IncomparableGridsError,
    ModelValidationError,
)
from ..models.process import MixtureModel, ProcessModel
from ..models.reports import (
    VERDICT_DOMINATES,
    VERDICT_VIOLATED,
    DominanceReport,
    TailBoundReport,
    Theorem1Report,
)
from ..models.spectra import (
    EntropyBracket,
    SpectralBounds,
    Spectrum,
    SpectrumEstimate,
    StaircaseSpectrum,
)
from ..utils.logger import get_logger
from ..utils.parallel import chunk_ranges, map_chunks
from .process import block_probabilities, entropy_rate, log2, rates_batch, sample_batch

logger = get_logger(__name__)


def _components(model: ProcessModel) -> Tuple[list, np.ndarray]:
    if isinstance(model, MixtureModel):
        return list(model.components), model.weights
    return [model], np.ones(1)


def component_rate(component, certified: Optional[float] = None) -> float:
    """Exact entropy rate of an ergodic component, or its certified value."""
    if certified is not None:
        return float(certified)
    rate = entropy_rate(component)
    if isinstance(rate, EntropyBracket):
        if rate.width <= get_config().MERGE_TOLERANCE:
            return 0.5 * (rate.lower + rate.upper)
        raise EntropyRateUnavailableError(
            f"Factor component entropy rate only bracketed to [{rate.lower:.6f}, {rate.upper:.6f}]; "
            "supply a certified value"
        )
    return rate


def mixture_spectrum(model: ProcessModel, certified_rates: Optional[Dict[int, float]] = None,
                     merge_tol: Optional[float] = None) -> StaircaseSpectrum:
    """Staircase F(tau) = w({theta : H(X_theta) <= tau}) of a finite mixture.

    An ergodic model is treated as a one-component mixture. Zero-weight components
    are dropped; rates within merge_tol of their neighbour share one jump.
    """
    merge_tol = get_config().MERGE_TOLERANCE if merge_tol is None else merge_tol
    certified_rates = certified_rates or {}
    components, weights = _components(model)

    atoms = sorted(
        (component_rate(comp, certified_rates.get(i)), float(w))
        for i, (comp, w) in enumerate(zip(components, weights))
        if w > 0
    )
    jumps: List[List[float]] = []
    last = None
    for rate, mass in atoms:
        if last is not None and rate - last <= merge_tol:
            jumps[-1][1] += mass
        else:
            jumps.append([rate, mass])
        last = rate
    return StaircaseSpectrum(tuple((t, m) for t, m in jumps))


def default_tau_grid(alphabet_size: int, gamma: float, points: Optional[int] = None) -> np.ndarray:
    points = get_config().TAU_POINTS if points is None else points
    return np.linspace(0.0, np.log2(alphabet_size) + 2 * gamma, points)


def _chunk_rates(model: ProcessModel, n: int, seed: int, start: int, count: int) -> np.ndarray:
    return rates_batch(model, sample_batch(model, n, seed, start, count))


def sampled_rates(model: ProcessModel, n: int, num_samples: int, seed: int,
                  workers: Optional[int] = None, chunk_size: Optional[int] = None) -> np.ndarray:
    """Self-information rates of num_samples seeded paths, in path order."""
    config = get_config()
    workers = config.WORKERS if workers is None else workers
    chunk_size = config.CHUNK_SIZE if chunk_size is None else chunk_size
    jobs = [(model, n, seed, start, count) for start, count in chunk_ranges(num_samples, chunk_size)]
    logger.info(f"Sampling {num_samples} paths of length {n} in {len(jobs)} chunks")
    return np.concatenate(map_chunks(_chunk_rates, jobs, workers))


def empirical_spectrum(model: ProcessModel, n: int, gamma: float, num_samples: int,
                       tau_grid=None, seed: int = 0, workers: Optional[int] = None) -> SpectrumEstimate:
    """Fraction of sampled paths with rate <= tau + gamma at each grid point."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if num_samples < 1:
        raise ValueError(f"num_samples must be >= 1, got {num_samples}")
    grid = default_tau_grid(model.alphabet.size, gamma) if tau_grid is None else np.asarray(tau_grid, float)

    rates = np.sort(sampled_rates(model, n, num_samples, seed, workers))
    cdf = np.searchsorted(rates, grid + gamma, side="right") / num_samples
    return SpectrumEstimate(
        n=n, gamma=gamma, num_samples=num_samples, tau_grid=grid, cdf=cdf, seed=seed,
        alphabet_size=model.alphabet.size,
    )


def spectral_bounds(spectrum: Spectrum, epsilon: Optional[float] = None) -> SpectralBounds:
    """Spectral inf/sup entropies.

    Staircases: smallest and largest jump. Estimates: the epsilon and 1 - epsilon
    generalized quantiles of the estimated CDF, clipped to [0, log2|X|].
    """
    if isinstance(spectrum, StaircaseSpectrum):
        taus = spectrum.taus
        return SpectralBounds(inf_entropy=float(taus.min()), sup_entropy=float(taus.max()))

    epsilon = 0.05 if epsilon is None else epsilon
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 0.5), got {epsilon}")
    grid, cdf = spectrum.tau_grid, spectrum.cdf
    if grid.size == 0:
        raise ModelValidationError("Empty spectrum estimate")

    def quantile(level: float) -> float:
        hits = np.flatnonzero(cdf >= level)
        return float(grid[hits[0]] if hits.size else grid[-1])

    top = float(np.log2(spectrum.alphabet_size))
    lower = min(max(quantile(epsilon), 0.0), top)
    upper = min(max(quantile(1 - epsilon), 0.0), top)
    return SpectralBounds(inf_entropy=lower, sup_entropy=upper)


def entropy_integral(spectrum: StaircaseSpectrum) -> float:
    """Integral of 1 - F(tau) over [0, inf) by piecewise-constant integration."""
    breaks = np.unique(np.concatenate([[0.0], spectrum.taus]))
    if breaks.size < 2:
        return 0.0
    levels = 1.0 - spectrum.evaluate(breaks[:-1])
    return float(np.sum(np.diff(breaks) * levels))


def dkw_radius(num_samples: int, alpha: Optional[float] = None) -> float:
    """Dvoretzky-Kiefer-Wolfowitz uniform CDF deviation radius at level 1 - alpha."""
    alpha = get_config().DKW_ALPHA if alpha is None else alpha
    return float(np.sqrt(np.log(2.0 / alpha) / (2.0 * num_samples)))


def _evaluation_points(upper: Spectrum, lower: Spectrum) -> np.ndarray:
    estimates = [s for s in (upper, lower) if isinstance(s, SpectrumEstimate)]
    if not estimates:
        return np.union1d(upper.taus, lower.taus)
    grid = estimates[0].tau_grid
    for other in estimates[1:]:
        if other.tau_grid.shape != grid.shape or not np.allclose(other.tau_grid, grid, rtol=0, atol=1e-12):
            raise IncomparableGridsError("Spectrum estimates must share one tau grid")
        if abs(other.gamma - estimates[0].gamma) > 1e-12:
            raise IncomparableGridsError("Spectrum estimates must share one gamma")
    return grid


def default_slack(upper: Spectrum, lower: Spectrum) -> float:
    return sum(dkw_radius(s.num_samples) for s in (upper, lower) if isinstance(s, SpectrumEstimate))


def dominance_check(upper: Spectrum, lower: Spectrum, slack: Optional[float] = None,
                    jump_tol: Optional[float] = None) -> DominanceReport:
    """Check F_X(tau) <= F_Y(tau) + slack with upper = F_Y (image) and lower = F_X (source).

    Between two staircases, F_Y is read jump_tol (default MERGE_TOLERANCE) to the right,
    so jumps that agree up to that tolerance count as the same jump.

    A violated verdict certifies that no homomorphism from X to Y exists (up to the
    statistical confidence of any estimates involved).
    """
    slack = default_slack(upper, lower) if slack is None else slack
    if slack < 0:
        raise ValueError(f"slack must be >= 0, got {slack}")
    points = _evaluation_points(upper, lower)
    shift = 0.0
    if isinstance(upper, StaircaseSpectrum) and isinstance(lower, StaircaseSpectrum):
        shift = get_config().MERGE_TOLERANCE if jump_tol is None else jump_tol
    diff = np.asarray(lower.evaluate(points)) - np.asarray(upper.evaluate(points + shift))
    worst = int(np.argmax(diff))
    gap = float(diff[worst])

    conditions: Dict[str, Optional[bool]] = {"sup_entropy": None, "inf_entropy": None, "entropy": None}
    if isinstance(upper, StaircaseSpectrum) and isinstance(lower, StaircaseSpectrum):
        tol = get_config().MERGE_TOLERANCE
        y_bounds, x_bounds = spectral_bounds(upper), spectral_bounds(lower)
        conditions["sup_entropy"] = y_bounds.sup_entropy <= x_bounds.sup_entropy + tol
        conditions["inf_entropy"] = y_bounds.inf_entropy <= x_bounds.inf_entropy + tol
        conditions["entropy"] = entropy_integral(upper) <= entropy_integral(lower) + tol

    if gap > slack + 1e-12:
        logger.info(f"Dominance violated at tau={points[worst]:.6f} with gap {gap:.6f}")
        return DominanceReport(VERDICT_VIOLATED, float(points[worst]), gap, slack, conditions)
    return DominanceReport(VERDICT_DOMINATES, None, gap, slack, conditions)


def spectra_equal(first: StaircaseSpectrum, second: StaircaseSpectrum, tol: Optional[float] = None) -> bool:
    tol = get_config().MERGE_TOLERANCE if tol is None else tol
    if len(first.jumps) != len(second.jumps):
        return False
    return bool(
        np.allclose(first.taus, second.taus, rtol=0, atol=tol)
        and np.allclose(first.masses, second.masses, rtol=0, atol=tol)
    )


def comparison_mask(grid: np.ndarray, jumps: np.ndarray, gamma: float, exclusion: float) -> np.ndarray:
    """Grid points outside [tau_j - gamma - exclusion, tau_j + exclusion] for every jump.

    At finite n the gamma-slack estimator rises near tau_j - gamma rather than tau_j,
    so the band reaches gamma further to the left.
    """
    keep = np.ones(grid.shape, dtype=bool)
    for tau in jumps:
        keep &= (grid <= tau - gamma - exclusion) | (grid >= tau + exclusion)
    return keep


def validate_theorem1(model: ProcessModel, n: int, gamma: float, num_samples: int, seed: int,
                      tolerance: Optional[float] = None, exclusion: Optional[float] = None,
                      tau_grid=None, workers: Optional[int] = None,
                      certified_rates: Optional[Dict[int, float]] = None) -> Theorem1Report:
    """Compare the sampled spectrum of a mixture with its exact staircase away from jumps."""
    config = get_config()
    tolerance = config.THEOREM1_TOLERANCE if tolerance is None else tolerance
    exclusion = config.THEOREM1_EXCLUSION if exclusion is None else exclusion

    staircase = mixture_spectrum(model, certified_rates)
    estimate = empirical_spectrum(model, n, gamma, num_samples, tau_grid, seed, workers)
    keep = comparison_mask(estimate.tau_grid, staircase.taus, gamma, exclusion)
    if not keep.any():
        raise ValueError("No grid point lies outside the excluded jump neighbourhoods")

    gaps = np.abs(estimate.cdf[keep] - staircase.evaluate(estimate.tau_grid[keep]))
    sup_gap = float(gaps.max())
    passed = sup_gap <= tolerance
    logger.info(f"Staircase validation sup gap {sup_gap:.4f} (tolerance {tolerance}): {'pass' if passed else 'fail'}")
    return Theorem1Report(
        sup_gap=sup_gap, tolerance=tolerance, passed=passed, n=n, gamma=gamma,
        num_samples=num_samples, seed=seed, compared_points=int(keep.sum()),
        jumps=len(staircase.jumps),
    )


def tail_probability(model: ProcessModel, n: int, gamma: float, cap: Optional[int] = None) -> TailBoundReport:
    """Exact Pr(rate > log2|X| + gamma) against its bound 2^(-n gamma)."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    probs = block_probabilities(model, n, cap)
    with np.errstate(divide="ignore"):
        rates = -log2(probs) / n
    threshold = np.log2(model.alphabet.size) + gamma
    probability = float(probs[(probs > 0) & (rates > threshold)].sum())
    bound = float(2.0 ** (-n * gamma))
    return TailBoundReport(n=n, gamma=gamma, probability=probability, bound=bound,
                           passed=probability <= bound + 1e-15)
