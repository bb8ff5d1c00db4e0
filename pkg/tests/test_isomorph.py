import numpy as np
import pytest

from src.errors import CodeValidationError, ModelValidationError, PathTooShortError, RegularityError
from src.models import Alphabet, CodePair, FactorModel, MarkovModel, MixtureModel, SamplePath, SlidingBlockCode
from src.models import catalog
from src.services.isomorph import (
    ERGODIC,
    NON_ERGODIC,
    VERDICT_BY_ERGODICITY,
    VERDICT_BY_SPECTRUM,
    VERDICT_CONSISTENT,
    RegularMixturePair,
    classify_batch,
    classify_component,
    ergodicity_flag,
    invariant_check,
    paste_codes,
    pasting_demo,
    regularity_counterexample,
    verify_isomorphism,
)
from src.services.process import mixture_labels, sample, sample_batch

BINARY = Alphabet.binary()
IDENTITY = CodePair.relabeling(SlidingBlockCode.identity(BINARY))
FLIP = CodePair.relabeling(SlidingBlockCode.bit_flip())


def coin_or_biased() -> MixtureModel:
    return MixtureModel(components=(catalog.bernoulli(0.1), catalog.fair_coin()), weights=[0.5, 0.5])


class TestClassifier:
    def test_fair_component(self):
        drawn = sample(catalog.fair_coin(), 1000, seed=42)
        label, posterior = classify_component(coin_or_biased(), drawn, 1000)
        assert label == 1
        assert posterior > 0.99

    def test_single_component(self):
        label, posterior = classify_component(catalog.bernoulli(0.3), sample(catalog.bernoulli(0.3), 50, seed=0))
        assert label == 0
        assert posterior == pytest.approx(1.0)

    def test_ties_go_to_lowest_index(self):
        twins = MixtureModel(components=(catalog.fair_coin(), catalog.fair_coin()), weights=[0.5, 0.5])
        label, posterior = classify_component(twins, SamplePath.from_string(BINARY, "0110"))
        assert label == 0
        assert posterior == pytest.approx(0.5)

    def test_window_longer_than_path(self):
        with pytest.raises(PathTooShortError):
            classify_component(coin_or_biased(), SamplePath.from_string(BINARY, "01"), 10)

    def test_misclassification_nonincreasing_in_window(self):
        mixture = coin_or_biased()
        symbols = sample_batch(mixture, 1000, seed=8, count=1000)
        truth = mixture_labels(mixture, seed=8, count=1000)
        rates = []
        for window in (100, 300, 1000):
            labels, _ = classify_batch(mixture, symbols, window)
            rates.append(float(np.mean(labels != truth)))
        assert rates == sorted(rates, reverse=True)


class TestRegularMixturePair:
    def test_matching(self):
        pair = RegularMixturePair.build(catalog.regular_source(), catalog.regular_target())
        assert pair.matching == (0, 1)
        assert pair.inverse_matching == (0, 1)

    def test_matching_follows_rates(self):
        swapped = MixtureModel(components=(catalog.fair_coin(), catalog.bernoulli(0.9)), weights=[0.3, 0.7])
        pair = RegularMixturePair.build(catalog.regular_source(), swapped)
        assert pair.matching == (1, 0)

    def test_irregular_mixture_is_rejected(self):
        with pytest.raises(RegularityError, match="regularity_counterexample"):
            RegularMixturePair.build(catalog.irregular_mixture(), catalog.irregular_mixture())

    def test_unmatched_weights(self):
        with pytest.raises(ModelValidationError):
            RegularMixturePair.build(catalog.regular_source(), coin_or_biased())


class TestPastedCode:
    def test_component_code_is_applied(self):
        pair, pasted = pasting_demo(window=500)
        biased = sample(catalog.bernoulli(0.1), 500, seed=3)
        assert np.array_equal(pasted.forward(biased).symbols, 1 - biased.symbols)
        fair = sample(catalog.fair_coin(), 500, seed=3)
        assert pasted.forward(fair) == fair

    def test_round_trip(self):
        _, pasted = pasting_demo(window=500)
        drawn = sample(catalog.regular_source(), 600, seed=10)
        assert pasted.round_trip(drawn) == drawn

    def test_single_component_equals_its_code(self):
        pair = RegularMixturePair.build(catalog.bernoulli(0.1), catalog.bernoulli(0.9))
        pasted = paste_codes(pair, [FLIP], window=20)
        drawn = sample(catalog.bernoulli(0.1), 40, seed=1)
        assert np.array_equal(pasted.forward(drawn).symbols, 1 - drawn.symbols)

    def test_component_count(self):
        pair = RegularMixturePair.build(catalog.regular_source(), catalog.regular_target())
        with pytest.raises(CodeValidationError):
            paste_codes(pair, [FLIP], window=20)

    def test_pairs_must_be_inverses(self):
        pair = RegularMixturePair.build(catalog.regular_source(), catalog.regular_target())
        broken = CodePair(SlidingBlockCode.bit_flip(), SlidingBlockCode.identity(BINARY))
        with pytest.raises(CodeValidationError):
            paste_codes(pair, [broken, IDENTITY], window=20)

    def test_wider_codes_are_centred(self):
        shift = SlidingBlockCode.from_function(BINARY, BINARY, 1, lambda w: w[1])
        pair = RegularMixturePair.build(catalog.regular_source(), catalog.regular_source())
        pasted = paste_codes(pair, [CodePair(shift, shift), IDENTITY], window=30)
        drawn = sample(catalog.regular_source(), 40, seed=2)
        image = pasted.forward(drawn)
        assert len(image) == 38
        assert np.array_equal(image.symbols, drawn.symbols[1:-1])


class TestVerifyIsomorphism:
    def test_identity_pasting(self):
        pair = RegularMixturePair.build(catalog.regular_source(), catalog.regular_source())
        pasted = paste_codes(pair, [IDENTITY, IDENTITY], window=300)
        certificate = verify_isomorphism(pair, pasted, 300, 500, 3, seed=4)
        assert certificate.round_trip_failure_rate == 0.0
        assert certificate.tv_distance < 0.05
        assert certificate.verdict == VERDICT_CONSISTENT
        assert certificate.image_classification_agreement == pytest.approx(1.0)

    def test_workers_agree(self):
        pair, pasted = pasting_demo(window=200)
        one = verify_isomorphism(pair, pasted, 200, 1200, 3, seed=6, workers=1)
        three = verify_isomorphism(pair, pasted, 200, 1200, 3, seed=6, workers=3)
        assert one.to_dict() == three.to_dict()

    def test_routed_fractions_track_weights(self):
        pair, pasted = pasting_demo(window=200)
        samples = 2000
        certificate = verify_isomorphism(pair, pasted, 300, samples, 3, seed=11)
        confusion = np.array(certificate.classification_confusion_matrix)
        weights = pair.x.weights
        sigma = np.sqrt(weights * (1 - weights) / samples)
        drawn = confusion.sum(axis=1) / samples
        routed = confusion[:, :-1].sum(axis=0) / samples
        assert np.all(np.abs(drawn - weights) <= 3 * sigma)
        assert np.all(np.abs(routed - weights) <= 3 * sigma + certificate.misclassification_rate)

    def test_sample_length_covers_window(self):
        pair, pasted = pasting_demo(window=200)
        with pytest.raises(PathTooShortError):
            verify_isomorphism(pair, pasted, 100, 10, 3, seed=0)

    @pytest.mark.slow
    def test_pasting_demo(self):
        pair, pasted = pasting_demo(window=1000)
        certificate = verify_isomorphism(pair, pasted, 2000, 5000, 3, seed=0)
        assert certificate.round_trip_failure_rate == 0.0
        assert certificate.misclassification_rate <= 0.001
        assert certificate.tv_distance <= 0.02
        assert certificate.verdict == VERDICT_CONSISTENT
        assert invariant_check(pair.x, pair.y).spectra_equal


class TestInvariants:
    def test_ergodicity_flag(self):
        assert ergodicity_flag(catalog.bernoulli(0.3)) == ERGODIC
        assert ergodicity_flag(catalog.coin_or_zeros()) == NON_ERGODIC
        degenerate = MixtureModel(components=(catalog.fair_coin(), catalog.bernoulli(0.1)), weights=[1.0, 0.0])
        assert ergodicity_flag(degenerate) == ERGODIC

    def test_ergodicity_compares_chain_laws(self):
        as_chain = MarkovModel.from_kernel(BINARY, 1, [[0.7, 0.3], [0.7, 0.3]])
        same = MixtureModel(components=(catalog.bernoulli(0.3), as_chain), weights=[0.5, 0.5])
        assert ergodicity_flag(same) == ERGODIC
        sticky = MixtureModel(components=(catalog.bernoulli(0.3), catalog.symmetric_markov(0.3)), weights=[0.5, 0.5])
        assert ergodicity_flag(sticky) == NON_ERGODIC

    def test_factor_components_compare_by_form(self):
        flipped = FactorModel(base=catalog.bernoulli(0.3), code=SlidingBlockCode.bit_flip())
        mixture = MixtureModel(components=(flipped, catalog.bernoulli(0.7)), weights=[0.5, 0.5])
        assert ergodicity_flag(mixture) == NON_ERGODIC

    def test_counterexample(self):
        x, y = regularity_counterexample()
        report = invariant_check(x, y)
        assert report.spectra_equal
        assert report.forward_dominance == report.backward_dominance == "dominates"
        assert (report.x_ergodicity, report.y_ergodicity) == (NON_ERGODIC, ERGODIC)
        assert report.verdict == VERDICT_BY_ERGODICITY

    def test_different_spectra(self):
        report = invariant_check(catalog.bernoulli(0.1), catalog.fair_coin())
        assert report.verdict == VERDICT_BY_SPECTRUM
        assert report.forward_dominance == "violated"
        assert report.backward_dominance == "dominates"
