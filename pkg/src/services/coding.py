"""Sliding-block codes, pushforward processes and the exact coding-bound verifiers."""

from math import comb, floor
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import get_config
from ..errors import (
    AlphabetMismatchError,
    PathTooShortError,
    UnsupportedModelError,
)
from ..models.code import Coupling, SlidingBlockCode
from ..models.process import (
    FactorModel,
    IIDModel,
    MarkovModel,
    MixtureModel,
    ProcessModel,
    SamplePath,
)
from ..models.reports import (
    STATUS_FAIL,
    STATUS_PASS,
    STATUS_TRIVIAL,
    ChangeOfMeasureReport,
    FiniteBoundReport,
    HammingBallReport,
)
from ..utils.enumeration import all_blocks, block_index, ensure_within_cap, window_indices
from ..utils.logger import get_logger
from .process import block_probabilities, log2, log_probability_batch, sample_batch

logger = get_logger(__name__)

POLICY_TRUNCATE = "truncate"
POLICY_EXACT = "exact"

DEFAULT_TAUS = tuple(round(0.2 + 0.1 * i, 10) for i in range(11))
DEFAULT_GAMMAS = (0.05, 0.2, 0.5)
DEFAULT_BETAS = (0.01, 0.05, 0.25)


def binary_entropy(beta: float) -> float:
    """h(beta) in bits with h(0) = h(1) = 0."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"binary_entropy needs beta in [0, 1], got {beta}")
    if beta in (0.0, 1.0):
        return 0.0
    return float(-beta * np.log2(beta) - (1 - beta) * np.log2(1 - beta))


def hamming_distance(first: Union[SamplePath, Sequence[int]], second: Union[SamplePath, Sequence[int]]) -> int:
    a = first.symbols if isinstance(first, SamplePath) else np.asarray(first)
    b = second.symbols if isinstance(second, SamplePath) else np.asarray(second)
    if a.shape != b.shape:
        raise ValueError(f"Hamming distance needs equal lengths, got {a.size} and {b.size}")
    return int(np.count_nonzero(a != b))


def apply_code(code: SlidingBlockCode, path: SamplePath, policy: str = POLICY_TRUNCATE,
               boundary: Optional[Tuple[Sequence[int], Sequence[int]]] = None) -> SamplePath:
    """y_i = f(x_{i-l} .. x_{i+l}) at every index where the window is available.

    `truncate` returns n - 2l symbols; `exact` pads with the caller's l left and l right
    boundary symbols and returns n symbols.
    """
    if path.alphabet != code.input_alphabet:
        raise AlphabetMismatchError("Path alphabet does not match the code input alphabet")
    symbols = path.symbols
    if policy == POLICY_EXACT:
        if boundary is None:
            raise PathTooShortError("The exact boundary policy needs left and right boundary symbols")
        left, right = (np.asarray(side, dtype=np.int64) for side in boundary)
        if left.size != code.radius or right.size != code.radius:
            raise PathTooShortError(f"Boundary blocks must each hold {code.radius} symbols")
        symbols = np.concatenate([left, symbols, right])
    elif policy != POLICY_TRUNCATE:
        raise ValueError(f"Unknown boundary policy {policy!r}")

    if symbols.size < code.width:
        raise PathTooShortError(f"Path of length {len(path)} is shorter than the code window {code.width}")
    out = code.table[window_indices(symbols, code.input_alphabet.size, code.width)[0]]
    return SamplePath(alphabet=code.output_alphabet, symbols=out, seed=path.seed)


def apply_code_batch(code: SlidingBlockCode, symbols: np.ndarray) -> np.ndarray:
    """Truncating code application to every row of a (rows, n) array."""
    return code.table[window_indices(symbols, code.input_alphabet.size, code.width)]


def pushforward_model(code: SlidingBlockCode, base: ProcessModel) -> Union[FactorModel, MixtureModel]:
    """Factor model of the image process; a mixture maps to the mixture of images."""
    if isinstance(base, MixtureModel):
        return MixtureModel(
            components=tuple(pushforward_model(code, comp) for comp in base.components),
            weights=base.weights,
        )
    if not isinstance(base, (IIDModel, MarkovModel)):
        raise UnsupportedModelError("Only IID and Markov processes can be pushed forward")
    factor = FactorModel(base=base, code=code)
    ensure_within_cap("factor lift states", base.alphabet.size ** factor.lift_length,
                      get_config().FACTOR_STATE_CAP)
    return factor


def _check_code_pair(code: SlidingBlockCode, reference: SlidingBlockCode):
    if code.input_alphabet != reference.input_alphabet or code.output_alphabet != reference.output_alphabet:
        raise AlphabetMismatchError("Code and reference must share input and output alphabets")


def _centered_outputs(code: SlidingBlockCode, blocks: np.ndarray, radius: int) -> np.ndarray:
    """Code output at the centre of blocks of length 2*radius + 1."""
    offset = radius - code.radius
    window = blocks[:, offset:offset + code.width]
    return code.table[block_index(window, code.input_alphabet.size)]


def mismatch_rate(code: SlidingBlockCode, reference: SlidingBlockCode, base: ProcessModel,
                  num_samples: Optional[int] = None, seed: int = 0, cap: Optional[int] = None) -> float:
    """Pr(reference(X)_0 != code(X)_0), exactly or from num_samples sampled windows."""
    _check_code_pair(code, reference)
    if base.alphabet != code.input_alphabet:
        raise AlphabetMismatchError("Base process alphabet does not match the code input alphabet")
    radius = max(code.radius, reference.radius)
    length = 2 * radius + 1

    if num_samples is None:
        blocks = all_blocks(base.alphabet.size, length, cap)
        probs = block_probabilities(base, length, cap)
        differ = _centered_outputs(code, blocks, radius) != _centered_outputs(reference, blocks, radius)
        return float(min(1.0, probs[differ].sum()))

    blocks = sample_batch(base, length, seed, 0, num_samples)
    differ = _centered_outputs(code, blocks, radius) != _centered_outputs(reference, blocks, radius)
    return float(differ.mean())


def _block_image_index(code: SlidingBlockCode, blocks: np.ndarray, m: int, n: int) -> np.ndarray:
    """Index of the image block Y_{-n}^n read from X_{-m}^m blocks."""
    start = m - n - code.radius
    window = blocks[:, start:start + 2 * (n + code.radius) + 1]
    images = apply_code_batch(code, window)
    return block_index(images, code.output_alphabet.size)


def build_coupling(base: ProcessModel, code: SlidingBlockCode, n: int,
                   reference: Optional[SlidingBlockCode] = None, cap: Optional[int] = None) -> Coupling:
    """Joint law of (X_{-m}^m, Y_{-n}^n) where Y is the reference image and m = n + l.

    The reference defaults to the code itself, which makes Y its exact pushforward.
    """
    reference = reference or code
    _check_code_pair(code, reference)
    if n < 0:
        raise ValueError(f"Coupling radius n must be >= 0, got {n}")
    m = n + max(code.radius, reference.radius)
    x_length, y_length = 2 * m + 1, 2 * n + 1
    ensure_within_cap("coupling image blocks", code.output_alphabet.size ** y_length, cap)
    blocks = all_blocks(base.alphabet.size, x_length, cap)
    logger.info(f"Building coupling over {blocks.shape[0]} blocks (m={m}, n={n})")

    return Coupling(
        m=m,
        n=n,
        x_alphabet=base.alphabet,
        y_alphabet=code.output_alphabet,
        x_probs=block_probabilities(base, x_length, cap),
        target_index=_block_image_index(reference, blocks, m, n),
        approx_index=_block_image_index(code, blocks, m, n),
    )


def verify_change_of_measure(component: ProcessModel, mixture: MixtureModel, n: int, gamma: float,
                             cap: Optional[int] = None) -> ChangeOfMeasureReport:
    """Exact Pr_theta((1/n) log2 P_theta/P <= -gamma) against 2^(-n gamma)."""
    if not isinstance(mixture, MixtureModel):
        raise UnsupportedModelError("Change of measure compares a component with its mixture")
    if not any(comp is component or comp.to_dict() == component.to_dict() for comp in mixture.components):
        raise UnsupportedModelError("The component is not part of the mixture")
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")

    blocks = all_blocks(mixture.alphabet.size, n, cap)
    lp_component = log_probability_batch(component, blocks)
    lp_mixture = log_probability_batch(mixture, blocks)
    support = np.isfinite(lp_component)
    ratio = lp_component[support] - lp_mixture[support]
    lhs = float(np.exp2(lp_component[support])[ratio <= -n * gamma].sum())
    bound = float(2.0 ** (-n * gamma))
    passed = lhs <= bound + 1e-15
    if not passed:
        logger.warning(f"Change-of-measure bound fails at n={n}, gamma={gamma}: {lhs} > {bound}")
    return ChangeOfMeasureReport(n=n, gamma=gamma, lhs=lhs, bound=bound, passed=passed)


def _block_rates(probs: np.ndarray, length: int) -> np.ndarray:
    return -log2(probs) / length


def _finite_bound(coupling: Coupling, epsilon: float, x_rates: np.ndarray, y_rates: np.ndarray,
                  tau: float, gamma: float, beta: float) -> FiniteBoundReport:
    if not 0 < beta < 0.5:
        raise ValueError(f"beta must lie in (0, 1/2), got {beta}")
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    N = coupling.y_length
    q_y = coupling.y_alphabet.size
    probs = coupling.x_probs

    lhs = float(probs[x_rates <= tau + gamma].sum())
    image_tail = float(probs[y_rates[coupling.target_index] <= tau + 2 * gamma].sum())
    exponent = gamma - binary_entropy(beta) - beta * np.log2(q_y)
    terms = {
        "image_tail": image_tail,
        "mismatch": epsilon / beta,
        "exponential": float(2.0 ** (-N * exponent)),
    }
    if exponent <= 0:
        status = STATUS_TRIVIAL
    elif lhs <= sum(terms.values()) + 1e-12:
        status = STATUS_PASS
    else:
        status = STATUS_FAIL
    return FiniteBoundReport(
        tau=tau, gamma=gamma, beta=beta, n=coupling.n, m=coupling.m, epsilon=epsilon,
        lhs=lhs, rhs_terms=terms, exponent=float(exponent), status=status,
    )


def finite_bound_grid(x_model: ProcessModel, code: SlidingBlockCode, n: int,
                      taus: Optional[Iterable[float]] = None, gammas: Optional[Iterable[float]] = None,
                      betas: Optional[Iterable[float]] = None, reference: Optional[SlidingBlockCode] = None,
                      cap: Optional[int] = None) -> List[FiniteBoundReport]:
    """Verify the finite-block spectrum transfer bound on a (tau, gamma, beta) grid.

    One coupling and one exact mismatch rate are shared by every grid point.
    """
    reference = reference or code
    coupling = build_coupling(x_model, code, n, reference, cap)
    epsilon = 0.0 if reference is code else mismatch_rate(code, reference, x_model, cap=cap)
    x_rates = _block_rates(coupling.x_probs, coupling.y_length)
    y_rates = _block_rates(coupling.y_marginal(), coupling.y_length)

    reports = [
        _finite_bound(coupling, epsilon, x_rates, y_rates, float(tau), float(gamma), float(beta))
        for tau in (DEFAULT_TAUS if taus is None else taus)
        for gamma in (DEFAULT_GAMMAS if gammas is None else gammas)
        for beta in (DEFAULT_BETAS if betas is None else betas)
    ]
    failures = sum(1 for r in reports if not r.passed)
    if failures:
        logger.warning(f"Finite bound failed at {failures} of {len(reports)} grid points")
    return reports


def verify_finite_bound(x_model: ProcessModel, code: SlidingBlockCode, n: int, tau: float, gamma: float,
                        beta: float, reference: Optional[SlidingBlockCode] = None,
                        cap: Optional[int] = None) -> FiniteBoundReport:
    """Exact check of

    Pr((1/N) log 1/P(X_{-m}^m) <= tau + gamma)
        <= Pr((1/N) log 1/P(Y_{-n}^n) <= tau + 2 gamma) + eps/beta + 2^(-N(gamma - h(beta) - beta log|Y|))

    with N = 2n + 1 and eps the exact mismatch rate of the code against the reference.
    """
    return finite_bound_grid(x_model, code, n, [tau], [gamma], [beta], reference, cap)[0]


def hamming_ball_bound_check(N: int, beta: float, alphabet_size: int,
                             exhaustive: bool = False, cap: Optional[int] = None) -> HammingBallReport:
    """Size of a Hamming ball of radius N*beta against |Y|^(N beta) 2^(N h(beta))."""
    if not 0 <= beta < 0.5:
        raise ValueError(f"beta must lie in [0, 1/2), got {beta}")
    if N < 1 or alphabet_size < 1:
        raise ValueError("N and alphabet_size must be positive")
    radius = floor(N * beta + 1e-12)
    count = sum(comb(N, i) * (alphabet_size - 1) ** i for i in range(radius + 1))
    if exhaustive:
        words = all_blocks(alphabet_size, N, cap)
        brute = int(np.count_nonzero(np.count_nonzero(words, axis=1) <= radius))
        if brute != count:
            raise ArithmeticError(f"Ball count mismatch: formula {count}, enumeration {brute}")

    bound = float(alphabet_size ** (N * beta) * 2.0 ** (N * binary_entropy(beta)))
    return HammingBallReport(
        N=N, beta=beta, alphabet_size=alphabet_size, radius=radius, count=count,
        bound=bound, passed=count <= bound * (1 + 1e-12),
    )
