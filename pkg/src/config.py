import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional

import numpy as np
from dotenv import load_dotenv

from .errors import ConfigError

ENV_PREFIX = "SPECTRASCOPE_"


@dataclass
class Config:
    # Enumeration
    ENUMERATION_CAP: int = 2 ** 20
    FACTOR_STATE_CAP: int = 2 ** 16

    # Numerical tolerances
    PROBABILITY_TOLERANCE: float = 1e-12
    STATIONARY_TOLERANCE: float = 1e-10
    POWER_ITERATION_TOLERANCE: float = 1e-12
    STATIONARY_MAX_ITER: int = 200_000
    MERGE_TOLERANCE: float = 1e-9
    REGULARITY_GAP: float = 1e-6
    WEIGHT_MATCH_TOLERANCE: float = 1e-9

    # Spectrum estimation
    TAU_POINTS: int = 512
    BRACKET_ORDER: int = 6
    DKW_ALPHA: float = 0.05
    THEOREM1_TOLERANCE: float = 0.03
    THEOREM1_EXCLUSION: float = 0.05

    # Workers
    WORKERS: int = 1
    CHUNK_SIZE: int = 500

    # Logging
    LOG_LEVEL: str = "WARNING"

    def __post_init__(self):
        if self.ENUMERATION_CAP <= 0 or self.FACTOR_STATE_CAP <= 0:
            raise ConfigError("Enumeration caps must be positive")
        if self.WORKERS < 1 or self.CHUNK_SIZE < 1:
            raise ConfigError("WORKERS and CHUNK_SIZE must be at least 1")


def _env(name: str, default: str) -> str:
    return os.getenv(f"{ENV_PREFIX}{name}", default)


def load_config() -> Config:
    """Load configuration from environment variables (and a .env file if present)."""
    load_dotenv()
    try:
        return Config(
            ENUMERATION_CAP=int(_env("CAP", str(2 ** 20))),
            FACTOR_STATE_CAP=int(_env("FACTOR_STATE_CAP", str(2 ** 16))),
            STATIONARY_MAX_ITER=int(_env("STATIONARY_MAX_ITER", "200000")),
            TAU_POINTS=int(_env("TAU_POINTS", "512")),
            BRACKET_ORDER=int(_env("BRACKET_ORDER", "6")),
            DKW_ALPHA=float(_env("DKW_ALPHA", "0.05")),
            THEOREM1_TOLERANCE=float(_env("THEOREM1_TOLERANCE", "0.03")),
            THEOREM1_EXCLUSION=float(_env("THEOREM1_EXCLUSION", "0.05")),
            WORKERS=int(_env("WORKERS", "1")),
            CHUNK_SIZE=int(_env("CHUNK_SIZE", "500")),
            LOG_LEVEL=_env("LOG_LEVEL", "WARNING"),
        )
    except ValueError as e:
        raise ConfigError(f"Invalid {ENV_PREFIX}* environment value: {e}") from e


@lru_cache(maxsize=1)
def get_config() -> Config:
    """Process-wide configuration used for library defaults."""
    return load_config()


def resolve_cap(cap: Optional[int]) -> int:
    if cap is None:
        return get_config().ENUMERATION_CAP
    if cap <= 0:
        raise ConfigError(f"Enumeration cap must be positive, got {cap}")
    return cap


@dataclass
class RunConfig:
    """Validated parameters of one CLI invocation."""

    command: str
    model_paths: List[str] = field(default_factory=list)
    out: Optional[str] = None
    n: int = 1000
    gamma: float = 0.02
    num_samples: int = 1000
    seed: int = 0
    tau_min: float = 0.0
    tau_max: Optional[float] = None
    tau_points: int = 512
    cap: Optional[int] = None
    workers: int = 1

    def __post_init__(self):
        if self.gamma <= 0:
            raise ConfigError(f"--gamma must be positive, got {self.gamma}")
        if self.num_samples < 1:
            raise ConfigError(f"--samples must be at least 1, got {self.num_samples}")
        if self.n < 1:
            raise ConfigError(f"--n must be at least 1, got {self.n}")
        if self.cap is not None and self.cap <= 0:
            raise ConfigError(f"--cap must be positive, got {self.cap}")
        if self.workers < 1:
            raise ConfigError(f"--workers must be at least 1, got {self.workers}")
        if self.tau_points < 2:
            raise ConfigError("--tau-points must be at least 2")
        if self.tau_max is not None and self.tau_max <= self.tau_min:
            raise ConfigError("--tau-max must exceed --tau-min")

    def tau_grid(self, alphabet_size: int) -> np.ndarray:
        """Evenly spaced grid on [tau_min, tau_max], tau_max defaulting to log2|X| + 2 gamma."""
        top = np.log2(alphabet_size) + 2 * self.gamma if self.tau_max is None else self.tau_max
        return np.linspace(self.tau_min, top, self.tau_points)
