from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np

from ..errors import CodeValidationError
from ..utils.enumeration import all_blocks
from .alphabet import Alphabet


@dataclass(frozen=True, eq=False)
class SlidingBlockCode:
    """Finite-window stationary coding y_i = f(x_{i-l}, ..., x_{i+l}).

    `table[w]` is the output index for window w, windows indexed lexicographically
    (first symbol most significant).
    """

    input_alphabet: Alphabet
    output_alphabet: Alphabet
    radius: int
    table: np.ndarray

    def __post_init__(self):
        if self.radius < 0:
            raise CodeValidationError(f"Code radius must be >= 0, got {self.radius}")
        table = np.array(self.table, dtype=np.int64)
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        expected = self.input_alphabet.size ** self.width
        if table.shape != (expected,):
            raise CodeValidationError(
                f"Code table must define all {expected} windows of width {self.width}, got {table.shape}"
            )
        if table.size and (table.min() < 0 or table.max() >= self.output_alphabet.size):
            raise CodeValidationError("Code table maps a window outside the output alphabet")

    @property
    def width(self) -> int:
        return 2 * self.radius + 1

    @classmethod
    def from_function(cls, input_alphabet: Alphabet, output_alphabet: Alphabet, radius: int,
                      fn: Callable[[Sequence[int]], int]) -> "SlidingBlockCode":
        windows = all_blocks(input_alphabet.size, 2 * radius + 1)
        table = [int(fn(tuple(int(s) for s in w))) for w in windows]
        return cls(input_alphabet, output_alphabet, radius, table)

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "SlidingBlockCode":
        return cls(alphabet, alphabet, 0, np.arange(alphabet.size))

    @classmethod
    def constant(cls, input_alphabet: Alphabet, output_alphabet: Alphabet,
                 symbol: int = 0, radius: int = 0) -> "SlidingBlockCode":
        size = input_alphabet.size ** (2 * radius + 1)
        return cls(input_alphabet, output_alphabet, radius, np.full(size, symbol))

    @classmethod
    def permutation(cls, alphabet: Alphabet, mapping: Sequence[int],
                    output_alphabet: Optional[Alphabet] = None) -> "SlidingBlockCode":
        """Radius-0 relabeling; mapping[i] is the image of symbol i."""
        out = output_alphabet or alphabet
        if sorted(mapping) != list(range(out.size)) or len(mapping) != alphabet.size:
            raise CodeValidationError(f"{list(mapping)} is not a bijection onto the output alphabet")
        return cls(alphabet, out, 0, list(mapping))

    @classmethod
    def bit_flip(cls) -> "SlidingBlockCode":
        return cls.permutation(Alphabet.binary(), [1, 0])

    @classmethod
    def xor(cls, radius: int = 1) -> "SlidingBlockCode":
        """Binary code emitting the parity of the whole window."""
        binary = Alphabet.binary()
        return cls.from_function(binary, binary, radius, lambda w: sum(w) % 2)

    def inverse(self) -> "SlidingBlockCode":
        """Inverse of a radius-0 bijective relabeling."""
        if self.radius != 0 or sorted(self.table.tolist()) != list(range(self.output_alphabet.size)) \
                or self.input_alphabet.size != self.output_alphabet.size:
            raise CodeValidationError("Only radius-0 bijective codes have a symbolwise inverse")
        inv = np.empty_like(self.table)
        inv[self.table] = np.arange(self.table.size)
        return SlidingBlockCode(self.output_alphabet, self.input_alphabet, 0, inv)

    def to_dict(self) -> Dict[str, Any]:
        windows = all_blocks(self.input_alphabet.size, self.width)
        return {
            "radius": self.radius,
            "input_alphabet": self.input_alphabet.to_list(),
            "output_alphabet": self.output_alphabet.to_list(),
            "table": {
                self.input_alphabet.decode(w): self.output_alphabet.label(int(y))
                for w, y in zip(windows, self.table)
            },
        }


@dataclass(frozen=True)
class CodePair:
    """Forward code X -> Y with its candidate inverse Y -> X."""

    forward: SlidingBlockCode
    backward: SlidingBlockCode

    def __post_init__(self):
        if self.forward.output_alphabet != self.backward.input_alphabet:
            raise CodeValidationError("Backward code must read the forward code's output alphabet")
        if self.backward.output_alphabet != self.forward.input_alphabet:
            raise CodeValidationError("Backward code must write the forward code's input alphabet")

    @classmethod
    def relabeling(cls, code: SlidingBlockCode) -> "CodePair":
        return cls(code, code.inverse())


@dataclass(frozen=True, eq=False)
class Coupling:
    """Exact joint law of (X_{-m}^m, Y_{-n}^n) for a deterministic sliding-block target.

    Every X-block x carries mass `x_probs[x]` and sits on the single Y-block
    `target_index[x]`; `approx_index[x]` is the image under the approximating code.
    """

    m: int
    n: int
    x_alphabet: Alphabet
    y_alphabet: Alphabet
    x_probs: np.ndarray
    target_index: np.ndarray
    approx_index: np.ndarray

    @property
    def x_length(self) -> int:
        return 2 * self.m + 1

    @property
    def y_length(self) -> int:
        return 2 * self.n + 1

    def y_marginal(self) -> np.ndarray:
        return np.bincount(
            self.target_index, weights=self.x_probs, minlength=self.y_alphabet.size ** self.y_length
        )

    def joint(self) -> np.ndarray:
        """Dense joint table; only sensible at tiny scale."""
        table = np.zeros((self.x_probs.size, self.y_alphabet.size ** self.y_length))
        table[np.arange(self.x_probs.size), self.target_index] = self.x_probs
        return table

    def total_mass(self) -> float:
        return float(self.x_probs.sum())
