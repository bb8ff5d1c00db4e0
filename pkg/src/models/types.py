from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from ..errors import ModelValidationError
from ..utils.enumeration import all_blocks
from .alphabet import Alphabet


@dataclass(frozen=True, eq=False)
class MarkovType:
    """kth-order Markov type: overlapping (k+1)-block counts over n - k windows.

    Counts are exact integers so that class membership is an exact comparison.
    """

    alphabet: Alphabet
    k: int
    counts: np.ndarray
    windows: int

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        if counts.shape != (self.alphabet.size ** (self.k + 1),):
            raise ModelValidationError("Markov type counts must cover every (k+1)-block")
        if self.windows < 1 or int(counts.sum()) != self.windows or counts.min() < 0:
            raise ModelValidationError("Markov type counts must be non-negative and sum to n - k")

    @property
    def key(self) -> Tuple[int, Tuple[int, ...]]:
        return self.k, tuple(self.counts.tolist())

    @property
    def distribution(self) -> np.ndarray:
        return self.counts / self.windows

    def mass(self, block: str) -> float:
        index = 0
        for s in self.alphabet.encode(block):
            index = index * self.alphabet.size + int(s)
        return float(self.counts[index]) / self.windows

    def __eq__(self, other) -> bool:
        if not isinstance(other, MarkovType):
            return NotImplemented
        return self.alphabet == other.alphabet and self.key == other.key

    def __hash__(self) -> int:
        return hash((self.alphabet, self.key))

    def to_dict(self) -> Dict[str, Any]:
        blocks = all_blocks(self.alphabet.size, self.k + 1)
        return {
            "k": self.k,
            "alphabet": self.alphabet.to_list(),
            "counts": {
                self.alphabet.decode(b): int(c) for b, c in zip(blocks, self.counts) if c > 0
            },
            "windows": self.windows,
        }


@dataclass(frozen=True, eq=False)
class MarkovApproximation:
    """Order-k conditional law built from a model's exact (k+1)-block marginals.

    cond[s, a] = P(x_{k+1} = a | x_1^k = s); rows whose conditioning block has
    probability zero are NaN (undefined).
    """

    alphabet: Alphabet
    k: int
    cond: np.ndarray
    block_probs: np.ndarray

    def defined(self) -> np.ndarray:
        return ~np.isnan(self.cond[:, 0])
