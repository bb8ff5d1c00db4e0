import hashlib
import json
from dataclasses import dataclass
from math import gcd
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from ..config import get_config
from ..errors import (
    AlphabetMismatchError,
    EmptyPathError,
    ModelValidationError,
)
from .code import SlidingBlockCode
from .alphabet import Alphabet


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _check_distribution(name: str, probs: np.ndarray, tol: float):
    if probs.ndim != 1 or probs.size == 0:
        raise ModelValidationError(f"{name} must be a non-empty probability vector")
    if np.any(probs < 0) or not np.all(np.isfinite(probs)):
        raise ModelValidationError(f"{name} has negative or non-finite entries")
    if abs(probs.sum() - 1.0) > tol:
        raise ModelValidationError(f"{name} sums to {probs.sum():.15g}, not 1")


def transition_matrix(kernel: np.ndarray, alphabet_size: int, order: int) -> csr_matrix:
    """Sparse transition matrix of the k-block chain driven by an order-k kernel.

    State s is the k-block in lexicographic order; appending symbol a moves s to
    (s * |X| + a) mod |X|^k.
    """
    states = alphabet_size ** order
    src = np.repeat(np.arange(states), alphabet_size)
    sym = np.tile(np.arange(alphabet_size), states)
    dst = (src * alphabet_size + sym) % states
    return csr_matrix((kernel.reshape(-1), (src, dst)), shape=(states, states))


def _closed_class_period(matrix: csr_matrix) -> Tuple[int, int]:
    """Number of closed communicating classes and the period of the first one."""
    support = (matrix > 0).astype(np.int8).tocsr()
    n_comp, labels = connected_components(support, directed=True, connection="strong")
    coo = support.tocoo()
    leaving = labels[coo.row] != labels[coo.col]
    open_classes = set(labels[coo.row[leaving]].tolist())
    closed = [c for c in range(n_comp) if c not in open_classes]
    if not closed:
        return 0, 0

    members = np.flatnonzero(labels == closed[0])
    order, _ = breadth_first_order(support, members[0], directed=True)
    level = np.full(support.shape[0], -1, dtype=np.int64)
    level[members[0]] = 0
    # BFS order visits parents before children, so a single sweep assigns levels.
    for u in order:
        row = support.indices[support.indptr[u]:support.indptr[u + 1]]
        for v in row:
            if level[v] < 0:
                level[v] = level[u] + 1

    period = 0
    inside = (labels[coo.row] == closed[0]) & (labels[coo.col] == closed[0])
    for u, v in zip(coo.row[inside], coo.col[inside]):
        period = gcd(period, int(abs(level[u] + 1 - level[v])))
    return len(closed), period


def solve_stationary(kernel: np.ndarray, alphabet_size: int, order: int,
                     tol: Optional[float] = None, max_iter: Optional[int] = None) -> np.ndarray:
    """Stationary k-block distribution of an order-k kernel by power iteration.

    Rejects kernels whose block chain has more than one closed class or whose closed
    class is periodic, since the fixed point is then not unique or not attracting.
    """
    config = get_config()
    tol = config.POWER_ITERATION_TOLERANCE if tol is None else tol
    max_iter = config.STATIONARY_MAX_ITER if max_iter is None else max_iter

    matrix = transition_matrix(kernel, alphabet_size, order)
    n_closed, period = _closed_class_period(matrix)
    if n_closed != 1:
        raise ModelValidationError(
            f"Markov kernel is not irreducible: {n_closed} closed communicating classes"
        )
    if period != 1:
        raise ModelValidationError(f"Markov kernel is periodic with period {period}")

    states = matrix.shape[0]
    step = matrix.T.tocsr()
    pi = np.full(states, 1.0 / states)
    for _ in range(max_iter):
        nxt = step @ pi
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) < tol:
            return nxt
        pi = nxt
    raise ModelValidationError(f"Power iteration did not converge in {max_iter} steps")


@dataclass(frozen=True, eq=False)
class IIDModel:
    alphabet: Alphabet
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen_array(self.probs))
        _check_distribution("IID probs", self.probs, get_config().PROBABILITY_TOLERANCE)
        if self.probs.size != self.alphabet.size:
            raise ModelValidationError(
                f"IID probs have {self.probs.size} entries for alphabet of size {self.alphabet.size}"
            )

    @property
    def order(self) -> int:
        return 0

    def conditional_table(self) -> np.ndarray:
        return self.probs.reshape(1, -1)

    def to_dict(self) -> Dict[str, Any]:
        return {"type": "iid", "alphabet": self.alphabet.to_list(), "probs": self.probs.tolist()}


@dataclass(frozen=True, eq=False)
class MarkovModel:
    """Order-k Markov chain with its stationary initial k-block law.

    kernel[s, a] = P(x_{k+1} = a | x_1^k = s) with s the lexicographic index of the block.
    """

    alphabet: Alphabet
    order: int
    kernel: np.ndarray
    initial: np.ndarray

    def __post_init__(self):
        config = get_config()
        q = self.alphabet.size
        if self.order < 1:
            raise ModelValidationError(f"Markov order must be >= 1, got {self.order}")
        kernel = _frozen_array(self.kernel)
        initial = _frozen_array(self.initial)
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "initial", initial)

        states = q ** self.order
        if kernel.shape != (states, q):
            raise ModelValidationError(f"Markov kernel must have shape {(states, q)}, got {kernel.shape}")
        for s in range(states):
            _check_distribution(f"Markov kernel row {s}", kernel[s], config.PROBABILITY_TOLERANCE)
        _check_distribution("Markov initial", initial, config.PROBABILITY_TOLERANCE)
        if initial.size != states:
            raise ModelValidationError(f"Markov initial must have {states} entries")

        matrix = transition_matrix(kernel, q, self.order)
        n_closed, period = _closed_class_period(matrix)
        if n_closed != 1 or period != 1:
            raise ModelValidationError("Markov kernel must be irreducible and aperiodic")
        drift = np.max(np.abs(matrix.T @ initial - initial))
        if drift > config.STATIONARY_TOLERANCE:
            raise ModelValidationError(f"Markov initial is not stationary (drift {drift:.3g})")

    @classmethod
    def from_kernel(cls, alphabet: Alphabet, order: int, kernel) -> "MarkovModel":
        kernel = np.asarray(kernel, dtype=float)
        if kernel.shape != (alphabet.size ** order, alphabet.size):
            raise ModelValidationError(
                f"Markov kernel must have shape {(alphabet.size ** order, alphabet.size)}, got {kernel.shape}"
            )
        initial = solve_stationary(kernel, alphabet.size, order)
        return cls(alphabet=alphabet, order=order, kernel=kernel, initial=initial)

    def conditional_table(self) -> np.ndarray:
        return self.kernel

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": "markov",
            "alphabet": self.alphabet.to_list(),
            "order": self.order,
            "kernel": self.kernel.tolist(),
            "initial": self.initial.tolist(),
        }


@dataclass(frozen=True, eq=False)
class FactorModel:
    """Sliding-block image of an IID or Markov base process."""

    base: Union[IIDModel, MarkovModel]
    code: SlidingBlockCode

    def __post_init__(self):
        if not isinstance(self.base, (IIDModel, MarkovModel)):
            raise ModelValidationError("Factor base must be an IID or Markov model")
        if self.code.input_alphabet != self.base.alphabet:
            raise AlphabetMismatchError("Code input alphabet does not match the base alphabet")

    @property
    def alphabet(self) -> Alphabet:
        return self.code.output_alphabet

    @property
    def lift_length(self) -> int:
        """Length of the base blocks used as hidden states of the forward recursion."""
        return max(self.code.width, self.base.order + 1)

    def to_dict(self) -> Dict[str, Any]:
        return {"type": "factor", "base": self.base.to_dict(), "code": self.code.to_dict()}


ErgodicModel = Union[IIDModel, MarkovModel, FactorModel]


@dataclass(frozen=True, eq=False)
class MixtureModel:
    """Finite mixture sum_theta w(theta) mu_theta of ergodic components."""

    components: Tuple[ErgodicModel, ...]
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "weights", _frozen_array(self.weights))
        if not self.components:
            raise ModelValidationError("Mixture needs at least one component")
        for comp in self.components:
            if isinstance(comp, MixtureModel):
                raise ModelValidationError("Mixture components must not be mixtures")
        _check_distribution("Mixture weights", self.weights, get_config().PROBABILITY_TOLERANCE)
        if self.weights.size != len(self.components):
            raise ModelValidationError("Mixture weights and components differ in length")
        first = self.components[0].alphabet
        if any(comp.alphabet != first for comp in self.components[1:]):
            raise AlphabetMismatchError("Mixture components must share one alphabet")

    @property
    def alphabet(self) -> Alphabet:
        return self.components[0].alphabet

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": "mixture",
            "components": [comp.to_dict() for comp in self.components],
            "weights": self.weights.tolist(),
        }


ProcessModel = Union[IIDModel, MarkovModel, FactorModel, MixtureModel]


def model_id(model: ProcessModel) -> str:
    """Short content hash identifying a model in path provenance."""
    payload = json.dumps(model.to_dict(), sort_keys=True).encode()
    return hashlib.sha1(payload).hexdigest()[:12]


@dataclass(frozen=True, eq=False)
class SamplePath:
    alphabet: Alphabet
    symbols: np.ndarray
    seed: Optional[int] = None
    model_id: Optional[str] = None

    def __post_init__(self):
        symbols = _frozen_array(self.symbols, dtype=np.int64)
        object.__setattr__(self, "symbols", symbols)
        if symbols.ndim != 1 or symbols.size == 0:
            raise EmptyPathError("A sample path must contain at least one symbol")
        if symbols.min() < 0 or symbols.max() >= self.alphabet.size:
            raise AlphabetMismatchError("Path symbol index outside the alphabet")

    def __len__(self) -> int:
        return int(self.symbols.size)

    @classmethod
    def from_string(cls, alphabet: Alphabet, text: str, **kwargs) -> "SamplePath":
        return cls(alphabet=alphabet, symbols=alphabet.encode(text), **kwargs)

    def to_string(self) -> str:
        return self.alphabet.decode(self.symbols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SamplePath):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.symbols, other.symbols)

    def __hash__(self) -> int:
        return hash((self.alphabet, self.symbols.tobytes()))

    def to_dict(self) -> Dict[str, Any]:
        return {"path": self.to_string(), "seed": self.seed, "model_id": self.model_id}
