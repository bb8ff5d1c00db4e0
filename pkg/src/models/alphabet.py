from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..errors import AlphabetMismatchError, ModelValidationError


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of symbol labels; the index of a label is its position."""

    symbols: Tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if not symbols:
            raise ModelValidationError("Alphabet must contain at least one symbol")
        if len(set(symbols)) != len(symbols):
            raise ModelValidationError(f"Alphabet labels must be unique: {symbols}")
        if any(not s or any(ch.isspace() for ch in s) for s in symbols):
            raise ModelValidationError("Alphabet labels must be non-empty and contain no whitespace")

    @classmethod
    def of_size(cls, size: int) -> "Alphabet":
        return cls(tuple(str(i) for i in range(size)))

    @classmethod
    def binary(cls) -> "Alphabet":
        return cls.of_size(2)

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def compact(self) -> bool:
        """True when every label is one character and paths are written without separators."""
        return all(len(s) == 1 for s in self.symbols)

    def _lookup(self) -> Dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    def index(self, label: str) -> int:
        try:
            return self.symbols.index(label)
        except ValueError:
            raise AlphabetMismatchError(f"Symbol {label!r} is not in alphabet {self.symbols}")

    def label(self, index: int) -> str:
        return self.symbols[index]

    def encode(self, text: str) -> np.ndarray:
        tokens: Sequence[str] = list(text) if self.compact else text.split()
        lookup = self._lookup()
        try:
            return np.array([lookup[t] for t in tokens], dtype=np.int64)
        except KeyError as e:
            raise AlphabetMismatchError(f"Symbol {e.args[0]!r} is not in alphabet {self.symbols}")

    def decode(self, indices) -> str:
        sep = "" if self.compact else " "
        return sep.join(self.symbols[int(i)] for i in indices)

    def to_list(self) -> List[str]:
        return list(self.symbols)
