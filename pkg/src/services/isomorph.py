"""Pasting component isomorphisms into one map between regular mixtures.

A regular mixture has pairwise distinct component entropy rates, so its components
are told apart by the spectrum alone and can be matched one to one with those of
another mixture. Component codes are supplied by the caller; paths are routed to a
component by a finite-window likelihood classifier.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config import get_config
from ..errors import (
    AlphabetMismatchError,
    CodeValidationError,
    ModelValidationError,
    PathTooShortError,
    RegularityError,
    ZeroProbabilityError,
)
from ..models import catalog
from ..models.code import CodePair, SlidingBlockCode
from ..models.process import IIDModel, MarkovModel, MixtureModel, ProcessModel, SamplePath
from ..models.reports import InvariantReport, IsomorphismCertificate
from ..utils.logger import get_logger
from ..utils.parallel import chunk_ranges, map_chunks
from .coding import apply_code_batch
from .mtypes import type_counts
from .process import block_probabilities, log_probability_batch, logsumexp2, mixture_labels, sample_batch
from .spectrum import component_rate, dominance_check, mixture_spectrum, spectra_equal

logger = get_logger(__name__)

ERGODIC = "ergodic"
NON_ERGODIC = "non_ergodic_mixture"

VERDICT_CONSISTENT = "consistent"
VERDICT_BY_SPECTRUM = "non_isomorphic_by_spectrum"
VERDICT_BY_ERGODICITY = "non_isomorphic_by_ergodicity"
VERDICT_ROUND_TRIP = "round_trip_failed"

UNCLASSIFIED = -1


def _as_mixture(model: ProcessModel) -> MixtureModel:
    if isinstance(model, MixtureModel):
        return model
    return MixtureModel(components=(model,), weights=[1.0])


def _check_regular(rates: Sequence[float], weights: np.ndarray, side: str):
    gap = get_config().REGULARITY_GAP
    live = [(r, i) for i, (r, w) in enumerate(zip(rates, weights)) if w > 0]
    for a in range(len(live)):
        for b in range(a + 1, len(live)):
            if abs(live[a][0] - live[b][0]) <= gap:
                raise RegularityError(
                    f"{side} components {live[a][1]} and {live[b][1]} share entropy rate {live[a][0]:.9f}; "
                    "equal-rate components are indistinguishable by the spectrum and the mixture may not "
                    "be isomorphic to any regular mixture with the same staircase "
                    "(see isomorph.regularity_counterexample)"
                )


@dataclass(frozen=True)
class RegularMixturePair:
    """Two regular mixtures with the rate- and weight-preserving matching kappa.

    matching[theta] is the Y component paired with X component theta.
    """

    x: MixtureModel
    y: MixtureModel
    matching: Tuple[int, ...]
    x_rates: Tuple[float, ...]
    y_rates: Tuple[float, ...]

    @classmethod
    def build(cls, x: ProcessModel, y: ProcessModel,
              x_certified: Optional[Dict[int, float]] = None,
              y_certified: Optional[Dict[int, float]] = None) -> "RegularMixturePair":
        config = get_config()
        x, y = _as_mixture(x), _as_mixture(y)
        x_certified, y_certified = x_certified or {}, y_certified or {}
        if len(x.components) != len(y.components):
            raise ModelValidationError(
                f"Mixtures have {len(x.components)} and {len(y.components)} components"
            )
        x_rates = tuple(component_rate(c, x_certified.get(i)) for i, c in enumerate(x.components))
        y_rates = tuple(component_rate(c, y_certified.get(i)) for i, c in enumerate(y.components))
        _check_regular(x_rates, x.weights, "X")
        _check_regular(y_rates, y.weights, "Y")

        matching = []
        for theta, (rate, weight) in enumerate(zip(x_rates, x.weights)):
            partners = [
                j for j, (r, v) in enumerate(zip(y_rates, y.weights))
                if abs(r - rate) <= config.MERGE_TOLERANCE and abs(v - weight) <= config.WEIGHT_MATCH_TOLERANCE
            ]
            if len(partners) != 1:
                raise ModelValidationError(
                    f"X component {theta} (rate {rate:.9f}, weight {weight}) has no unique partner in Y"
                )
            matching.append(partners[0])
        if sorted(matching) != list(range(len(matching))):
            raise ModelValidationError("Component matching is not a bijection")
        return cls(x=x, y=y, matching=tuple(matching), x_rates=x_rates, y_rates=y_rates)

    @property
    def inverse_matching(self) -> Tuple[int, ...]:
        inverse = [0] * len(self.matching)
        for theta, j in enumerate(self.matching):
            inverse[j] = theta
        return tuple(inverse)


def classify_batch(mixture: MixtureModel, symbols: np.ndarray, window: int) -> Tuple[np.ndarray, np.ndarray]:
    """Component index and posterior for the first `window` symbols of every row.

    Rows no component can produce are labelled UNCLASSIFIED with posterior 0.
    """
    symbols = np.atleast_2d(symbols)
    if symbols.shape[1] < window:
        raise PathTooShortError(f"Paths of length {symbols.shape[1]} are shorter than the window {window}")
    head = symbols[:, :window]
    with np.errstate(divide="ignore"):
        scores = np.stack([
            np.log2(w) + log_probability_batch(comp, head)
            for comp, w in zip(mixture.components, mixture.weights)
        ])
    best = np.argmax(scores, axis=0)
    top = scores[best, np.arange(head.shape[0])]
    total = logsumexp2(scores, axis=0)
    alive = np.isfinite(top)
    posterior = np.where(alive, np.exp2(np.where(alive, top - total, -np.inf)), 0.0)
    return np.where(alive, best, UNCLASSIFIED), posterior


def classify_component(mixture: ProcessModel, path: SamplePath, window: Optional[int] = None) -> Tuple[int, float]:
    """argmax_theta log2 w_theta + log2 P_theta(window) with its posterior; ties go to the lowest index."""
    mixture = _as_mixture(mixture)
    window = len(path) if window is None else window
    labels, posterior = classify_batch(mixture, path.symbols[None, :], window)
    if labels[0] == UNCLASSIFIED:
        raise ZeroProbabilityError("Every component assigns probability zero to the classification window")
    return int(labels[0]), float(posterior[0])


@dataclass(frozen=True)
class PastedCode:
    """Per-component code pairs combined by routing each path through a classifier.

    component_pairs[theta] maps X component theta onto Y component matching[theta].
    Unclassifiable paths map to the constant fallback symbol.
    """

    pair: RegularMixturePair
    component_pairs: Tuple[CodePair, ...]
    window: int
    fallback: int = 0

    def __post_init__(self):
        object.__setattr__(self, "component_pairs", tuple(self.component_pairs))
        if len(self.component_pairs) != len(self.pair.x.components):
            raise CodeValidationError(
                f"Need one code pair per component, got {len(self.component_pairs)} for "
                f"{len(self.pair.x.components)}"
            )
        for codes in self.component_pairs:
            if codes.forward.input_alphabet != self.pair.x.alphabet:
                raise AlphabetMismatchError("Forward codes must read the X alphabet")
            if codes.forward.output_alphabet != self.pair.y.alphabet:
                raise AlphabetMismatchError("Forward codes must write the Y alphabet")
        if self.window < 1:
            raise ValueError(f"Classifier window must be >= 1, got {self.window}")
        if not 0 <= self.fallback < self.pair.y.alphabet.size:
            raise CodeValidationError("Fallback symbol lies outside the Y alphabet")

    @property
    def max_radius(self) -> int:
        return max(c.forward.radius for c in self.component_pairs)

    def forward_batch(self, symbols: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Images of every row and the X component each row was routed to."""
        if symbols.shape[1] < self.window:
            raise PathTooShortError(f"Paths must hold at least the classifier window of {self.window}")
        radius = self.max_radius
        return self._route_uniform(symbols, self.pair.x, [c.forward for c in self.component_pairs], radius)

    def backward_batch(self, symbols: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Preimages of every row and the Y component each row was routed to."""
        backward = [None] * len(self.component_pairs)
        for theta, j in enumerate(self.pair.matching):
            backward[j] = self.component_pairs[theta].backward
        radius = max(code.radius for code in backward)
        return self._route_uniform(symbols, self.pair.y, backward, radius)

    def _route_uniform(self, symbols: np.ndarray, mixture: MixtureModel, codes: List[SlidingBlockCode],
                       radius: int) -> Tuple[np.ndarray, np.ndarray]:
        """Route rows to their component code; images are centred to length n - 2*radius."""
        n = symbols.shape[1]
        out_length = n - 2 * radius
        if out_length < 1:
            raise PathTooShortError(f"Paths of length {n} are shorter than the widest code window")
        labels, _ = classify_batch(mixture, symbols, min(self.window, n))
        out = np.full((symbols.shape[0], out_length), self.fallback, dtype=np.int64)
        for label in np.unique(labels[labels != UNCLASSIFIED]):
            rows = np.flatnonzero(labels == label)
            code = codes[label]
            shift = radius - code.radius
            out[rows] = apply_code_batch(code, symbols[rows][:, shift:n - shift])
        return out, labels

    def forward(self, path: SamplePath) -> SamplePath:
        image, _ = self.forward_batch(path.symbols[None, :])
        return SamplePath(alphabet=self.pair.y.alphabet, symbols=image[0], seed=path.seed)

    def backward(self, path: SamplePath) -> SamplePath:
        if path.alphabet != self.pair.y.alphabet:
            raise AlphabetMismatchError("Backward map reads paths over the Y alphabet")
        preimage, _ = self.backward_batch(path.symbols[None, :])
        return SamplePath(alphabet=self.pair.x.alphabet, symbols=preimage[0], seed=path.seed)

    def round_trip(self, path: SamplePath) -> SamplePath:
        return self.backward(self.forward(path))


def paste_codes(pair: RegularMixturePair, component_pairs: Sequence[CodePair], window: int,
                fallback: Optional[int] = None) -> PastedCode:
    """Combine per-component code pairs into one map X -> Y.

    Each radius-0 pair is checked to be an exact inverse on every symbol before pasting.
    """
    for theta, codes in enumerate(component_pairs):
        if codes.forward.radius == 0 and codes.backward.radius == 0:
            symbols = np.arange(codes.forward.input_alphabet.size)
            back = codes.backward.table[codes.forward.table[symbols]]
            if not np.array_equal(back, symbols):
                raise CodeValidationError(f"Code pair {theta} is not an exact symbolwise inverse")
    return PastedCode(pair=pair, component_pairs=tuple(component_pairs), window=window,
                      fallback=0 if fallback is None else fallback)


def _certificate_chunk(pasted: PastedCode, n: int, seed: int, start: int, count: int, k_block: int) -> Dict:
    pair = pasted.pair
    thetas = len(pair.x.components)
    symbols = sample_batch(pair.x, n, seed, start, count)
    truth = mixture_labels(pair.x, seed, start, count)

    images, routed = pasted.forward_batch(symbols)
    preimages, routed_back = pasted.backward_batch(images)

    confusion = np.zeros((thetas, thetas + 1), dtype=np.int64)
    np.add.at(confusion, (truth, np.where(routed == UNCLASSIFIED, thetas, routed)), 1)

    correct = routed == truth
    trim = (n - preimages.shape[1]) // 2
    reference = symbols[:, trim:n - trim]
    mismatched = int(np.count_nonzero(preimages[correct] != reference[correct]))
    compared = int(correct.sum()) * reference.shape[1]

    kappa = np.array(pair.matching + (UNCLASSIFIED,))
    routed_y = kappa[np.where(routed == UNCLASSIFIED, thetas, routed)]
    agree = int(np.count_nonzero((routed != UNCLASSIFIED) & (routed_y == routed_back)))

    blocks = type_counts(images, pair.y.alphabet.size, k_block - 1).sum(axis=0)
    return {"confusion": confusion, "mismatched": mismatched, "compared": compared,
            "agree": agree, "blocks": blocks}


def _same_process(first: ProcessModel, second: ProcessModel) -> bool:
    """Law equality for IID and Markov components, structural equality otherwise.

    Two chains of order at most k with equal stationary (k+1)-block laws are the same
    process. Factor components are compared by their serialized form, so equal laws
    written as different codes or bases still count as distinct.
    """
    chains = (IIDModel, MarkovModel)
    if isinstance(first, chains) and isinstance(second, chains):
        if first.alphabet != second.alphabet:
            return False
        length = max(first.order, second.order) + 1
        return bool(np.allclose(block_probabilities(first, length), block_probabilities(second, length),
                                rtol=0, atol=get_config().STATIONARY_TOLERANCE))
    return first.to_dict() == second.to_dict()


def ergodicity_flag(model: ProcessModel) -> str:
    """Mixtures with at least two distinct positive-weight components are non-ergodic."""
    if not isinstance(model, MixtureModel):
        return ERGODIC
    live = [comp for comp, w in zip(model.components, model.weights) if w > 0]
    one_law = all(_same_process(live[0], other) for other in live[1:])
    return ERGODIC if one_law else NON_ERGODIC


def verify_isomorphism(pair: RegularMixturePair, pasted: PastedCode, n: int, num_samples: int,
                       k_block: int, seed: int, workers: Optional[int] = None) -> IsomorphismCertificate:
    """Sample X, push through the pasted map and measure round trip, law and routing."""
    config = get_config()
    workers = config.WORKERS if workers is None else workers
    if n < pasted.window:
        raise PathTooShortError(f"Sample length {n} is shorter than the classifier window {pasted.window}")
    if num_samples < 1 or k_block < 1:
        raise ValueError("num_samples and k_block must be positive")

    jobs = [(pasted, n, seed, start, count, k_block) for start, count in chunk_ranges(num_samples, config.CHUNK_SIZE)]
    parts = map_chunks(_certificate_chunk, jobs, workers)

    confusion = sum(p["confusion"] for p in parts)
    mismatched = sum(p["mismatched"] for p in parts)
    compared = sum(p["compared"] for p in parts)
    blocks = sum(p["blocks"] for p in parts)

    empirical = blocks / blocks.sum()
    exact = block_probabilities(pair.y, k_block)
    tv = float(0.5 * np.abs(empirical - exact).sum())
    failure = mismatched / compared if compared else 0.0
    misclassified = 1.0 - np.trace(confusion[:, :-1]) / num_samples

    ergodicity = {"x": ergodicity_flag(pair.x), "y": ergodicity_flag(pair.y)}
    if ergodicity["x"] != ergodicity["y"]:
        verdict = VERDICT_BY_ERGODICITY
    elif failure > 0:
        verdict = VERDICT_ROUND_TRIP
    else:
        verdict = VERDICT_CONSISTENT
    logger.info(f"Isomorphism certificate: failure {failure:.3g}, TV {tv:.4f}, misclassified {misclassified:.4f}")

    return IsomorphismCertificate(
        round_trip_failure_rate=float(failure),
        misclassification_rate=float(misclassified),
        image_classification_agreement=sum(p["agree"] for p in parts) / num_samples,
        tv_distance=tv,
        k_block=k_block,
        samples=num_samples,
        n=n,
        window=pasted.window,
        seed=seed,
        classification_confusion_matrix=confusion.tolist(),
        ergodicity=ergodicity,
        verdict=verdict,
    )


def invariant_check(x: ProcessModel, y: ProcessModel,
                    x_certified: Optional[Dict[int, float]] = None,
                    y_certified: Optional[Dict[int, float]] = None) -> InvariantReport:
    """Compare the isomorphism invariants of two processes: staircase spectrum and ergodicity."""
    fx = mixture_spectrum(x, x_certified)
    fy = mixture_spectrum(y, y_certified)
    forward = dominance_check(upper=fy, lower=fx, slack=0.0)
    backward = dominance_check(upper=fx, lower=fy, slack=0.0)
    equal = spectra_equal(fx, fy)
    x_flag, y_flag = ergodicity_flag(x), ergodicity_flag(y)

    if not equal:
        verdict = VERDICT_BY_SPECTRUM
    elif x_flag != y_flag:
        verdict = VERDICT_BY_ERGODICITY
    else:
        verdict = VERDICT_CONSISTENT
    return InvariantReport(
        spectra_equal=equal,
        x_ergodicity=x_flag,
        y_ergodicity=y_flag,
        forward_dominance=forward.verdict,
        backward_dominance=backward.verdict,
        verdict=verdict,
    )


def regularity_counterexample() -> Tuple[MixtureModel, ProcessModel]:
    """Equal staircases, different ergodicity: 1/2 Bern(0.1) + 1/2 Bern(0.9) against Bern(0.1)."""
    return catalog.irregular_mixture(), catalog.bernoulli(0.1)


def pasting_demo(window: int = 1000) -> Tuple[RegularMixturePair, PastedCode]:
    """{bit-flip, identity} pasting from {0.7 Bern(0.1), 0.3 fair} onto {0.7 Bern(0.9), 0.3 fair}."""
    pair = RegularMixturePair.build(catalog.regular_source(), catalog.regular_target())
    flip = CodePair.relabeling(SlidingBlockCode.bit_flip())
    identity = CodePair.relabeling(SlidingBlockCode.identity(pair.x.alphabet))
    return pair, paste_codes(pair, [flip, identity], window)
