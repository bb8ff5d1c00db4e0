from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from ..config import get_config
from ..errors import ModelValidationError


@dataclass(frozen=True)
class StaircaseSpectrum:
    """Exact spectrum of a finite mixture: F(tau) = sum of masses with tau_j <= tau."""

    jumps: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        jumps = tuple((float(t), float(m)) for t, m in self.jumps)
        object.__setattr__(self, "jumps", jumps)
        if not jumps:
            raise ModelValidationError("A staircase spectrum needs at least one jump")
        taus = np.array([t for t, _ in jumps])
        masses = np.array([m for _, m in jumps])
        if np.any(np.diff(taus) <= 0):
            raise ModelValidationError("Staircase jump locations must be strictly increasing")
        if np.any(masses <= 0) or np.any(masses > 1):
            raise ModelValidationError("Staircase masses must lie in (0, 1]")
        if abs(masses.sum() - 1.0) > get_config().PROBABILITY_TOLERANCE:
            raise ModelValidationError(f"Staircase masses sum to {masses.sum():.15g}, not 1")

    @property
    def taus(self) -> np.ndarray:
        return np.array([t for t, _ in self.jumps])

    @property
    def masses(self) -> np.ndarray:
        return np.array([m for _, m in self.jumps])

    def evaluate(self, tau):
        """Right-continuous CDF value(s) at tau."""
        cumulative = np.minimum(np.concatenate([[0.0], np.cumsum(self.masses)]), 1.0)
        idx = np.searchsorted(self.taus, np.asarray(tau, dtype=float), side="right")
        values = cumulative[idx]
        return float(values) if np.ndim(values) == 0 else values

    def to_dict(self) -> Dict[str, Any]:
        return {"jumps": [[t, m] for t, m in self.jumps]}


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    """Empirical CDF of the normalized self-information at fixed (n, gamma).

    cdf[i] = fraction of sampled paths with rate <= tau_grid[i] + gamma.
    """

    n: int
    gamma: float
    num_samples: int
    tau_grid: np.ndarray
    cdf: np.ndarray
    seed: int
    alphabet_size: int

    def __post_init__(self):
        grid = np.array(self.tau_grid, dtype=float)
        cdf = np.array(self.cdf, dtype=float)
        grid.setflags(write=False)
        cdf.setflags(write=False)
        object.__setattr__(self, "tau_grid", grid)
        object.__setattr__(self, "cdf", cdf)
        if grid.size == 0 or grid.shape != cdf.shape:
            raise ModelValidationError("Spectrum estimate needs a non-empty grid matching its cdf")
        if np.any(np.diff(grid) < 0):
            raise ModelValidationError("Spectrum estimate grid must be sorted")

    def evaluate(self, tau):
        """Step interpolation of the estimate; 0 below the first grid point."""
        idx = np.searchsorted(self.tau_grid, np.asarray(tau, dtype=float), side="right") - 1
        values = np.where(idx >= 0, self.cdf[np.clip(idx, 0, None)], 0.0)
        return float(values) if np.ndim(values) == 0 else values

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "gamma": self.gamma,
            "num_samples": self.num_samples,
            "seed": self.seed,
            "alphabet_size": self.alphabet_size,
            "tau": self.tau_grid.tolist(),
            "F": self.cdf.tolist(),
        }


Spectrum = Union[StaircaseSpectrum, SpectrumEstimate]


@dataclass(frozen=True)
class SpectralBounds:
    inf_entropy: float
    sup_entropy: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class EntropyBracket:
    """Certified interval for the entropy rate of a hidden-Markov (Factor) model."""

    lower: float
    upper: float
    order: int
    gap: Optional[float] = None

    def contains(self, value: float, tol: float = 1e-12) -> bool:
        return self.lower - tol <= value <= self.upper + tol

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
