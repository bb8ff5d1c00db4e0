"""Exact evaluation, sampling and entropies of finite-alphabet stationary processes.

All logarithms are base 2. Zero probability is -inf log-probability and +inf rate.
"""

from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.special import logsumexp

from ..config import get_config
from ..errors import (
    AlphabetMismatchError,
    EmptyPathError,
    UnsupportedModelError,
)
from ..models.process import (
    ErgodicModel,
    FactorModel,
    IIDModel,
    MarkovModel,
    MixtureModel,
    ProcessModel,
    SamplePath,
    model_id,
    solve_stationary,
)
from ..models.spectra import EntropyBracket
from ..utils.enumeration import all_blocks, block_index, ensure_within_cap, window_indices
from ..utils.logger import get_logger
from ..utils.parallel import path_rng, single_rng

logger = get_logger(__name__)

LN2 = float(np.log(2.0))


def log2(values) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log2(values)


def logsumexp2(values, axis=None) -> np.ndarray:
    """Base-2 log-sum-exp; rows that are entirely -inf stay -inf."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return logsumexp(np.asarray(values) * LN2, axis=axis) / LN2


def entropy_bits(probs) -> float:
    p = np.asarray(probs, dtype=float).ravel()
    p = p[p > 0]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def require_ergodic(model: ProcessModel, what: str) -> ErgodicModel:
    if isinstance(model, MixtureModel):
        raise UnsupportedModelError(f"{what} needs an ergodic model, got a mixture")
    return model


def _as_symbols(symbols) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(symbols, dtype=np.int64))
    if arr.shape[1] == 0:
        raise EmptyPathError("Cannot evaluate an empty path")
    return arr


def _check_path(model: ProcessModel, path: SamplePath):
    if path.alphabet != model.alphabet:
        raise AlphabetMismatchError(
            f"Path alphabet {path.alphabet.symbols} does not match model alphabet {model.alphabet.symbols}"
        )


def _markov_log_prob(model: MarkovModel, symbols: np.ndarray) -> np.ndarray:
    q, k = model.alphabet.size, model.order
    n = symbols.shape[1]
    if n <= k:
        marginal = model.initial.reshape((q,) * k).sum(axis=tuple(range(n, k))).reshape(-1)
        return log2(marginal)[block_index(symbols, q)]
    lp = log2(model.initial)[block_index(symbols[:, :k], q)]
    steps = window_indices(symbols, q, k + 1)
    return lp + log2(model.kernel.reshape(-1))[steps].sum(axis=1)


def _factor_tables(model: FactorModel):
    """Emission, arrival log-probability and initial law over lifted base blocks."""
    base, code = model.base, model.code
    q, length = base.alphabet.size, model.lift_length
    size = ensure_within_cap("factor lift states", q ** length, get_config().FACTOR_STATE_CAP)
    states = np.arange(size)
    emit = code.table[states % q ** code.width]
    arrive = log2(base.conditional_table().reshape(-1))[states % q ** (base.order + 1)]
    initial = log2(block_probabilities(base, length))
    return emit, arrive, initial


def _factor_forward(model: FactorModel, ys: np.ndarray,
                    init_alpha: Optional[np.ndarray] = None) -> np.ndarray:
    """Log-domain forward recursion over the lifted hidden states.

    Hidden state i is the base block x_i .. x_{i+L-1}; it emits f applied to its last
    2l+1 symbols. Appending symbol a to state c*q^(L-1) + m gives m*q + a.
    """
    emit, arrive, initial = _factor_tables(model)
    q = model.base.alphabet.size
    rows, n = ys.shape
    size = emit.size
    if init_alpha is None:
        alpha = np.broadcast_to(initial, (rows, size)).copy()
    else:
        alpha = init_alpha.copy()

    alpha[emit[None, :] != ys[:, [0]]] = -np.inf
    for i in range(1, n):
        beta = logsumexp2(alpha.reshape(rows, q, size // q), axis=1)
        alpha = np.repeat(beta, q, axis=1) + arrive[None, :]
        alpha[emit[None, :] != ys[:, [i]]] = -np.inf
    return logsumexp2(alpha, axis=1)


def log_probability_batch(model: ProcessModel, symbols) -> np.ndarray:
    """Exact log2 P(x_1^n) for every row of a (rows, n) symbol array."""
    symbols = _as_symbols(symbols)
    if symbols.min() < 0 or symbols.max() >= model.alphabet.size:
        raise AlphabetMismatchError("Symbol index outside the model alphabet")

    if isinstance(model, IIDModel):
        return log2(model.probs)[symbols].sum(axis=1)
    if isinstance(model, MarkovModel):
        return _markov_log_prob(model, symbols)
    if isinstance(model, FactorModel):
        return _factor_forward(model, symbols)
    if isinstance(model, MixtureModel):
        scores = np.stack([
            log2(w) + log_probability_batch(comp, symbols)
            for comp, w in zip(model.components, model.weights)
        ])
        return logsumexp2(scores, axis=0)
    raise UnsupportedModelError(f"Unknown model type {type(model).__name__}")


def log_probability(model: ProcessModel, path: SamplePath) -> float:
    """Exact log2-probability of a path (bits, <= 0 or -inf)."""
    _check_path(model, path)
    return float(log_probability_batch(model, path.symbols[None, :])[0])


def self_information_rate(model: ProcessModel, path: SamplePath) -> float:
    """(1/n) log2 1/P(x^n); +inf when the path has probability zero."""
    lp = log_probability(model, path)
    return max(0.0, -lp / len(path))


def rates_batch(model: ProcessModel, symbols) -> np.ndarray:
    symbols = _as_symbols(symbols)
    return np.maximum(0.0, -log_probability_batch(model, symbols) / symbols.shape[1])


def block_probabilities(model: ProcessModel, length: int, cap: Optional[int] = None) -> np.ndarray:
    """Exact law of X_1^length over all blocks in lexicographic order."""
    if length == 0:
        return np.ones(1)
    blocks = all_blocks(model.alphabet.size, length, cap)
    logger.debug(f"Enumerating {blocks.shape[0]} blocks of length {length}")
    return np.exp2(log_probability_batch(model, blocks))


def block_entropy(model: ProcessModel, n: int, cap: Optional[int] = None) -> float:
    """H(X_1, ..., X_n) in bits."""
    return entropy_bits(block_probabilities(model, n, cap))


def conditional_entropy(model: ProcessModel, k: int, cap: Optional[int] = None) -> float:
    """H(X_{k+1} | X_1^k) by exact enumeration of (k+1)-blocks; H(X_1) for k = 0.

    For stationary processes this is nonincreasing in k and converges to the entropy
    rate from above.
    """
    model = require_ergodic(model, "conditional_entropy")
    if k < 0:
        raise ValueError(f"Conditioning order must be >= 0, got {k}")
    q = model.alphabet.size
    joint = block_probabilities(model, k + 1, cap).reshape(q ** k, q)
    prefix = joint.sum(axis=1, keepdims=True)
    mask = joint > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(mask, joint / prefix, 1.0)
    return float(max(0.0, -np.sum(joint[mask] * np.log2(cond[mask]))))


def _conditioned_block_entropy(model: FactorModel, m: int, cap: Optional[int]) -> float:
    """H(Y_1^m | S_1) where S_1 is the lifted hidden state at time 1."""
    if m == 0:
        return 0.0
    emit, _, initial = _factor_tables(model)
    size = emit.size
    ys = all_blocks(model.alphabet.size, m, cap)
    ensure_within_cap("conditioned forward rows", ys.shape[0] * size * size, cap)

    rows = np.repeat(ys, size, axis=0)
    start = np.where(np.eye(size, dtype=bool), 0.0, -np.inf)
    init_alpha = np.tile(start, (ys.shape[0], 1))
    cond = np.exp2(_factor_forward(model, rows, init_alpha)).reshape(ys.shape[0], size)

    state_probs = np.exp2(initial)
    total = 0.0
    for s in np.flatnonzero(state_probs > 0):
        total += state_probs[s] * entropy_bits(cond[:, s])
    return total


def factor_entropy_bracket(model: FactorModel, k: Optional[int] = None,
                           cap: Optional[int] = None) -> EntropyBracket:
    """Certified bracket H(Y_{k+1}|Y_1^k, S_1) <= H(Y) <= H(Y_{k+1}|Y_1^k)."""
    k = get_config().BRACKET_ORDER if k is None else k
    upper = conditional_entropy(model, k, cap)
    lower = _conditioned_block_entropy(model, k + 1, cap) - _conditioned_block_entropy(model, k, cap)
    lower = min(max(0.0, lower), upper)
    return EntropyBracket(lower=lower, upper=upper, order=k, gap=upper - lower)


def entropy_rate(model: ProcessModel, k: Optional[int] = None,
                 cap: Optional[int] = None) -> Union[float, EntropyBracket]:
    """Entropy rate in bits: exact for IID/Markov, a certified bracket for Factor."""
    if isinstance(model, IIDModel):
        return entropy_bits(model.probs)
    if isinstance(model, MarkovModel):
        rows = np.array([entropy_bits(row) for row in model.kernel])
        return float(np.dot(model.initial, rows))
    if isinstance(model, FactorModel):
        return factor_entropy_bracket(model, k, cap)
    raise UnsupportedModelError(
        "Entropy rate of a mixture is the spectrum integral; use spectrum.entropy_integral"
    )


def _cumulative(probs: np.ndarray) -> np.ndarray:
    cum = np.cumsum(probs, axis=-1)
    cum[..., -1] = 1.0
    return cum


def _inverse_cdf(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Index of the first cumulative entry exceeding u, row-wise when cum is 2-D."""
    return (u[..., None] >= cum).sum(axis=-1)


def _digits(index: np.ndarray, size: int, length: int) -> np.ndarray:
    powers = size ** np.arange(length - 1, -1, -1, dtype=np.int64)
    return (index[:, None] // powers[None, :]) % size


def _draw(model: ProcessModel, n: int, rngs: Sequence[np.random.Generator]) -> np.ndarray:
    """Sample one path per generator, each generator consumed in a fixed order."""
    count = len(rngs)
    if isinstance(model, IIDModel):
        uniforms = np.stack([rng.random(n) for rng in rngs])
        return _inverse_cdf(_cumulative(model.probs), uniforms)

    if isinstance(model, MarkovModel):
        q, k = model.alphabet.size, model.order
        first = np.array([rng.random() for rng in rngs])
        state = _inverse_cdf(_cumulative(model.initial), first)
        out = np.empty((count, max(n, k)), dtype=np.int64)
        out[:, :k] = _digits(state, q, k)
        if n > k:
            uniforms = np.stack([rng.random(n - k) for rng in rngs])
            cum = _cumulative(model.kernel)
            for t in range(n - k):
                a = _inverse_cdf(cum[state], uniforms[:, t])
                out[:, k + t] = a
                state = (state * q + a) % q ** k
        return out[:, :n]

    if isinstance(model, FactorModel):
        code = model.code
        base = _draw(model.base, n + 2 * code.radius, rngs)
        return code.table[window_indices(base, model.base.alphabet.size, code.width)]

    if isinstance(model, MixtureModel):
        chosen = _inverse_cdf(_cumulative(model.weights), np.array([rng.random() for rng in rngs]))
        out = np.empty((count, n), dtype=np.int64)
        for c in np.unique(chosen):
            rows = np.flatnonzero(chosen == c)
            out[rows] = _draw(model.components[c], n, [rngs[i] for i in rows])
        return out

    raise UnsupportedModelError(f"Unknown model type {type(model).__name__}")


def sample(model: ProcessModel, n: int, seed: int) -> SamplePath:
    """Deterministic sample path of length n for a fixed (model, n, seed)."""
    if n < 1:
        raise EmptyPathError(f"Sample length must be >= 1, got {n}")
    symbols = _draw(model, n, [single_rng(seed)])[0]
    return SamplePath(alphabet=model.alphabet, symbols=symbols, seed=seed, model_id=model_id(model))


def sample_batch(model: ProcessModel, n: int, seed: int, start: int = 0, count: int = 1) -> np.ndarray:
    """Paths start .. start+count-1 of the seeded batch, one row per path."""
    if n < 1:
        raise EmptyPathError(f"Sample length must be >= 1, got {n}")
    rngs: List[np.random.Generator] = [path_rng(seed, start + i) for i in range(count)]
    return _draw(model, n, rngs)


def mixture_labels(model: MixtureModel, seed: int, start: int = 0, count: int = 1) -> np.ndarray:
    """Component drawn for each path of a seeded mixture batch.

    Replays the first uniform of every path substream, which is the one `_draw` spends
    on the component choice.
    """
    uniforms = np.array([path_rng(seed, start + i).random() for i in range(count)])
    return _inverse_cdf(_cumulative(model.weights), uniforms)
