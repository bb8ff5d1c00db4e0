"""kth-order Markov types, type classes and Markov approximations."""

from typing import Dict, List, Optional

import numpy as np

from ..errors import PathTooShortError, UnsupportedModelError, ZeroProbabilityError
from ..models.alphabet import Alphabet
from ..models.process import MixtureModel, ProcessModel, SamplePath
from ..models.reports import SameTypeReport, TypeCountReport
from ..models.types import MarkovApproximation, MarkovType
from ..utils.enumeration import all_blocks, window_indices
from ..utils.logger import get_logger
from .process import block_probabilities, entropy_bits, log2, logsumexp2, require_ergodic

logger = get_logger(__name__)


def _check_order(n: int, k: int):
    if k < 0:
        raise ValueError(f"Type order must be >= 0, got {k}")
    if n <= k:
        raise PathTooShortError(f"A kth-order type needs n > k, got n={n}, k={k}")


def type_counts(symbols: np.ndarray, alphabet_size: int, k: int) -> np.ndarray:
    """Overlapping (k+1)-block counts of every row of a (rows, n) array."""
    windows = window_indices(symbols, alphabet_size, k + 1)
    rows = windows.shape[0]
    blocks = alphabet_size ** (k + 1)
    flat = (windows + blocks * np.arange(rows)[:, None]).ravel()
    return np.bincount(flat, minlength=rows * blocks).reshape(rows, blocks)


def markov_type(path: SamplePath, k: int) -> MarkovType:
    n = len(path)
    _check_order(n, k)
    counts = type_counts(path.symbols[None, :], path.alphabet.size, k)[0]
    return MarkovType(alphabet=path.alphabet, k=k, counts=counts, windows=n - k)


def _all_types(n: int, k: int, alphabet: Alphabet, cap: Optional[int]):
    _check_order(n, k)
    blocks = all_blocks(alphabet.size, n, cap)
    return blocks, type_counts(blocks, alphabet.size, k)


def type_class(n: int, k: int, q: MarkovType, cap: Optional[int] = None) -> List[SamplePath]:
    """Every sequence of length n whose kth-order type is q, in lexicographic order."""
    if q.k != k:
        raise ValueError(f"Type has order {q.k}, expected {k}")
    if q.windows != n - k:
        return []
    blocks, counts = _all_types(n, k, q.alphabet, cap)
    members = np.flatnonzero(np.all(counts == q.counts[None, :], axis=1))
    return [SamplePath(alphabet=q.alphabet, symbols=blocks[i]) for i in members]


def type_census(n: int, k: int, alphabet: Alphabet, cap: Optional[int] = None) -> Dict[MarkovType, int]:
    """Number of sequences of length n in each kth-order type class."""
    _, counts = _all_types(n, k, alphabet, cap)
    distinct, sizes = np.unique(counts, axis=0, return_counts=True)
    return {
        MarkovType(alphabet=alphabet, k=k, counts=row, windows=n - k): int(size)
        for row, size in zip(distinct, sizes)
    }


def type_count_bound(n: int, k: int, alphabet_size: int, cap: Optional[int] = None) -> TypeCountReport:
    """Distinct kth-order types among all sequences of length n against (n - k + 1)^(|X|^(k+1))."""
    _, counts = _all_types(n, k, Alphabet.of_size(alphabet_size), cap)
    observed = int(np.unique(counts, axis=0).shape[0])
    bound = (n - k + 1) ** (alphabet_size ** (k + 1))
    return TypeCountReport(n=n, k=k, alphabet_size=alphabet_size, observed=observed,
                           bound=bound, passed=observed <= bound)


def type_distance(q: MarkovType, model: ProcessModel, cap: Optional[int] = None) -> float:
    """Max-norm distance between a type and the model's exact (k+1)-block law."""
    if q.alphabet != model.alphabet:
        raise ValueError("Type and model alphabets differ")
    return float(np.max(np.abs(q.distribution - block_probabilities(model, q.k + 1, cap))))


def markov_approximation(model: ProcessModel, k: int, cap: Optional[int] = None) -> MarkovApproximation:
    """P^(k)(x_{k+1} | x_1^k) from the model's exact (k+1)-block marginals."""
    model = require_ergodic(model, "markov_approximation")
    if k < 0:
        raise ValueError(f"Approximation order must be >= 0, got {k}")
    q = model.alphabet.size
    joint = block_probabilities(model, k + 1, cap).reshape(q ** k, q)
    prefix = joint.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(prefix[:, None] > 0, joint / prefix[:, None], np.nan)
    return MarkovApproximation(alphabet=model.alphabet, k=k, cond=cond, block_probs=prefix)


def approx_conditional_entropy(approx: MarkovApproximation) -> float:
    rows = approx.defined()
    return float(sum(
        p * entropy_bits(row) for p, row in zip(approx.block_probs[rows], approx.cond[rows])
    ))


def _approx_log_rows(approx: MarkovApproximation, symbols: np.ndarray) -> np.ndarray:
    """Product-formula log2 P^(k)(x_{k+1}^n | x_1^k) per row; NaN where undefined."""
    windows = window_indices(symbols, approx.alphabet.size, approx.k + 1)
    return log2(approx.cond.reshape(-1))[windows].sum(axis=1)


def approx_log_probability(approx: MarkovApproximation, path: SamplePath) -> float:
    if path.alphabet != approx.alphabet:
        raise ValueError("Path and approximation alphabets differ")
    if len(path) < approx.k:
        raise PathTooShortError(f"Path of length {len(path)} is shorter than the order {approx.k}")
    value = float(_approx_log_rows(approx, path.symbols[None, :])[0])
    if np.isnan(value):
        raise ZeroProbabilityError("A conditioning block of the path has probability zero under the model")
    return value


def _mixed_log_rows(approxes: List[MarkovApproximation], weights: np.ndarray, symbols: np.ndarray) -> np.ndarray:
    scores = np.stack([np.log2(w) + _approx_log_rows(a, symbols) for a, w in zip(approxes, weights) if w > 0])
    # Undefined conditioning contributes zero mass for that component.
    scores = np.where(np.isnan(scores), -np.inf, scores)
    return logsumexp2(scores, axis=0)


def mixed_approx_log_probability(mixture: MixtureModel, k: int, path: SamplePath,
                                 cap: Optional[int] = None) -> float:
    """log2 of the weight-mixture of component approximations of x_{k+1}^n given x_1^k."""
    if not isinstance(mixture, MixtureModel):
        raise UnsupportedModelError("mixed_approx_log_probability needs a mixture")
    approxes = [markov_approximation(comp, k, cap) for comp in mixture.components]
    value = float(_mixed_log_rows(approxes, mixture.weights, path.symbols[None, :])[0])
    if value == -np.inf:
        raise ZeroProbabilityError("No component assigns positive approximate probability to the path")
    return value


def verify_same_type_probability(model: ProcessModel, n: int, k: int, cap: Optional[int] = None,
                                 tolerance: float = 1e-12) -> SameTypeReport:
    """Largest spread of P^(k)(x_{k+1}^n | x_1^k) within one type class over all of X^n.

    Mixtures use the weight-mixture of component approximations.
    """
    blocks, counts = _all_types(n, k, model.alphabet, cap)
    if isinstance(model, MixtureModel):
        approxes = [markov_approximation(comp, k, cap) for comp in model.components]
        logs = _mixed_log_rows(approxes, model.weights, blocks)
    else:
        logs = _approx_log_rows(markov_approximation(model, k, cap), blocks)
        logs = np.where(np.isnan(logs), -np.inf, logs)

    probs = np.exp2(logs)
    _, labels = np.unique(counts, axis=0, return_inverse=True)
    labels = labels.ravel()
    classes = int(labels.max()) + 1
    high = np.full(classes, -np.inf)
    low = np.full(classes, np.inf)
    np.maximum.at(high, labels, probs)
    np.minimum.at(low, labels, probs)
    spread = float(np.max(high - low))
    logger.debug(f"Same-type check over {classes} classes: max spread {spread:.3g}")
    return SameTypeReport(n=n, k=k, classes=classes, max_spread=spread, passed=spread <= tolerance)
