import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.errors import AlphabetMismatchError, CodeValidationError, PathTooShortError, UnsupportedModelError
from src.models import Alphabet, CodePair, FactorModel, MixtureModel, SamplePath, SlidingBlockCode
from src.models import catalog
from src.models.reports import STATUS_FAIL, STATUS_TRIVIAL
from src.services.coding import (
    POLICY_EXACT,
    apply_code,
    binary_entropy,
    build_coupling,
    finite_bound_grid,
    hamming_ball_bound_check,
    hamming_distance,
    mismatch_rate,
    pushforward_model,
    verify_change_of_measure,
    verify_finite_bound,
)
from src.services.process import block_probabilities

BINARY = Alphabet.binary()


def path(text):
    return SamplePath.from_string(BINARY, text)


class TestCodes:
    def test_identity(self):
        assert apply_code(SlidingBlockCode.identity(BINARY), path("01101")).to_string() == "01101"

    def test_xor3_truncates(self):
        assert apply_code(SlidingBlockCode.xor(1), path("01101")).to_string() == "000"

    def test_exact_policy_pads(self):
        image = apply_code(SlidingBlockCode.xor(1), path("01101"), policy=POLICY_EXACT, boundary=([0], [0]))
        assert image.to_string() == "10001"

    def test_exact_policy_needs_boundary(self):
        with pytest.raises(PathTooShortError):
            apply_code(SlidingBlockCode.xor(1), path("01101"), policy=POLICY_EXACT)

    def test_path_shorter_than_window(self):
        with pytest.raises(PathTooShortError):
            apply_code(SlidingBlockCode.xor(2), path("0110"))

    def test_table_must_cover_every_window(self):
        with pytest.raises(CodeValidationError):
            SlidingBlockCode(BINARY, BINARY, 1, [0, 1, 0])

    def test_permutation_inverse(self):
        ternary = Alphabet.of_size(3)
        code = SlidingBlockCode.permutation(ternary, [2, 0, 1])
        assert np.array_equal(code.inverse().table[code.table], [0, 1, 2])
        with pytest.raises(CodeValidationError):
            SlidingBlockCode.xor(1).inverse()

    def test_code_pair_alphabets(self):
        with pytest.raises(CodeValidationError):
            CodePair(SlidingBlockCode.identity(BINARY), SlidingBlockCode.identity(Alphabet.of_size(3)))

    def test_alphabet_mismatch(self):
        with pytest.raises(AlphabetMismatchError):
            apply_code(SlidingBlockCode.identity(Alphabet.of_size(3)), path("01"))

    def test_hamming_distance(self):
        assert hamming_distance(path("0110"), path("0011")) == 2
        with pytest.raises(ValueError):
            hamming_distance(path("01"), path("011"))

    def test_pushforward_of_mixture(self, two_level):
        image = pushforward_model(SlidingBlockCode.bit_flip(), two_level)
        assert isinstance(image, MixtureModel)
        assert all(isinstance(c, FactorModel) for c in image.components)
        flipped = block_probabilities(image, 3)
        assert flipped == pytest.approx(block_probabilities(two_level, 3)[::-1], abs=1e-12)

    @given(text=st.text(alphabet="01", min_size=6, max_size=40), radius=st.integers(0, 2), majority=st.booleans())
    @settings(max_examples=50, deadline=None)
    def test_shift_commutes_with_code(self, text, radius, majority):
        if majority:
            code = SlidingBlockCode.from_function(BINARY, BINARY, radius, lambda w: int(2 * sum(w) > len(w)))
        else:
            code = SlidingBlockCode.xor(radius)
        image = apply_code(code, path(text))
        shifted = apply_code(code, path(text[1:]))
        assert shifted.to_string() == image.to_string()[1:]


class TestMismatchRate:
    def test_identity_vs_constant(self):
        constant = SlidingBlockCode.constant(BINARY, BINARY)
        assert mismatch_rate(SlidingBlockCode.identity(BINARY), constant, catalog.fair_coin()) == pytest.approx(0.5)

    def test_bit_flip_vs_identity(self):
        rate = mismatch_rate(SlidingBlockCode.bit_flip(), SlidingBlockCode.identity(BINARY), catalog.fair_coin())
        assert rate == pytest.approx(1.0)

    def test_code_against_itself(self):
        assert mismatch_rate(SlidingBlockCode.xor(1), SlidingBlockCode.xor(1), catalog.symmetric_markov(0.2)) == 0.0

    def test_sampled_estimate(self):
        constant = SlidingBlockCode.constant(BINARY, BINARY)
        rate = mismatch_rate(SlidingBlockCode.identity(BINARY), constant, catalog.fair_coin(), num_samples=4000)
        assert abs(rate - 0.5) < 0.05


class TestChangeOfMeasure:
    def test_loose_gamma(self):
        mixture = MixtureModel(components=(catalog.fair_coin(), catalog.bernoulli(0.1)), weights=[0.5, 0.5])
        report = verify_change_of_measure(mixture.components[0], mixture, 8, 0.05)
        assert report.passed
        assert report.bound == pytest.approx(2 ** -0.4)

    def test_tight_gamma(self):
        mixture = MixtureModel(components=(catalog.fair_coin(), catalog.bernoulli(0.1)), weights=[0.5, 0.5])
        report = verify_change_of_measure(mixture.components[0], mixture, 8, 0.5)
        assert report.passed
        assert report.lhs <= 2 ** -4

    @pytest.mark.parametrize("name", ["two_level_mixture", "markov_mixture", "coin_or_zeros"])
    @pytest.mark.parametrize("n", [6, 8, 10])
    @pytest.mark.parametrize("gamma", [0.05, 0.2, 0.5])
    def test_grid(self, name, n, gamma):
        mixture = catalog.load_catalog_model(name)
        for component in mixture.components:
            assert verify_change_of_measure(component, mixture, n, gamma).passed

    def test_foreign_component(self, two_level):
        with pytest.raises(UnsupportedModelError):
            verify_change_of_measure(catalog.bernoulli(0.3), two_level, 4, 0.1)

    @given(p=st.floats(0.0, 1.0), q=st.floats(0.0, 1.0), w=st.floats(0.01, 0.99),
           n=st.integers(1, 8), gamma=st.floats(0.01, 1.0))
    @settings(max_examples=40, deadline=None)
    def test_bound_holds(self, p, q, w, n, gamma):
        mixture = MixtureModel(components=(catalog.bernoulli(p), catalog.bernoulli(q)), weights=[w, 1 - w])
        assert verify_change_of_measure(mixture.components[0], mixture, n, gamma).passed


class TestCoupling:
    def test_marginals(self):
        coupling = build_coupling(catalog.symmetric_markov(0.2), SlidingBlockCode.xor(1), 2)
        assert coupling.m == 3
        assert coupling.total_mass() == pytest.approx(1.0, abs=1e-12)
        image = pushforward_model(SlidingBlockCode.xor(1), catalog.symmetric_markov(0.2))
        assert coupling.y_marginal() == pytest.approx(block_probabilities(image, 5), abs=1e-12)

    def test_joint_rows_hold_x_law(self):
        coupling = build_coupling(catalog.bernoulli(0.25), SlidingBlockCode.bit_flip(), 1)
        assert coupling.joint().sum(axis=1) == pytest.approx(coupling.x_probs)


class TestFiniteBound:
    def test_identity_on_uniform(self):
        report = verify_finite_bound(catalog.fair_coin(), SlidingBlockCode.identity(BINARY), 2, 1.0, 0.1, 0.25)
        assert report.lhs == pytest.approx(1.0)
        assert report.rhs >= 1.0
        assert report.passed

    def test_bit_flip_on_bernoulli_grid(self):
        reports = finite_bound_grid(catalog.bernoulli(0.25), SlidingBlockCode.bit_flip(), 3,
                                    taus=[0.2 + 0.1 * i for i in range(11)], gammas=[0.05, 0.2], betas=[0.05, 0.25])
        assert len(reports) == 44
        assert all(r.passed for r in reports)

    @pytest.mark.parametrize("model, code, reference, n", [
        (catalog.bernoulli(0.25), SlidingBlockCode.bit_flip(), None, 3),
        (catalog.symmetric_markov(0.2), SlidingBlockCode.xor(1), None, 3),
        (catalog.fair_coin(), SlidingBlockCode.xor(1), SlidingBlockCode.identity(Alphabet.binary()), 4),
        (catalog.two_level_mixture(), SlidingBlockCode.xor(1), None, 3),
    ])
    def test_default_grid(self, model, code, reference, n):
        reports = finite_bound_grid(model, code, n, reference=reference)
        assert len(reports) == 99
        assert sum(r.informative for r in reports) >= 4
        assert not [r.to_dict() for r in reports if r.status == STATUS_FAIL]
        assert all(2 * r.m + 1 <= 11 for r in reports)

    def test_trivial_regime_is_reported(self):
        report = verify_finite_bound(catalog.fair_coin(), SlidingBlockCode.identity(BINARY), 1, 0.5, 0.05, 0.25)
        assert report.exponent <= 0
        assert report.status == STATUS_TRIVIAL

    def test_mismatch_term_uses_reference(self):
        report = verify_finite_bound(catalog.fair_coin(), SlidingBlockCode.identity(BINARY), 1, 0.5, 0.5, 0.1,
                                     reference=SlidingBlockCode.constant(BINARY, BINARY))
        assert report.epsilon == pytest.approx(0.5)
        assert report.rhs_terms["mismatch"] == pytest.approx(5.0)

    def test_beta_range(self):
        with pytest.raises(ValueError):
            verify_finite_bound(catalog.fair_coin(), SlidingBlockCode.identity(BINARY), 1, 0.5, 0.5, 0.5)


class TestHammingBall:
    def test_radius_one(self):
        report = hamming_ball_bound_check(5, 0.2, 2)
        assert report.radius == 1
        assert report.count == 6
        assert report.bound == pytest.approx(2 * 2 ** (5 * 0.7219281), rel=1e-6)
        assert report.passed

    def test_exhaustive_agrees(self):
        assert hamming_ball_bound_check(8, 0.3, 3, exhaustive=True).passed

    @given(N=st.integers(1, 40), beta=st.floats(0.0, 0.49), q=st.integers(2, 5))
    @settings(max_examples=100, deadline=None)
    def test_bound_holds(self, N, beta, q):
        assert hamming_ball_bound_check(N, beta, q).passed

    def test_beta_range(self):
        with pytest.raises(ValueError):
            hamming_ball_bound_check(5, 0.5, 2)


class TestBinaryEntropy:
    def test_values(self):
        assert binary_entropy(0.5) == 1.0
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(0.1) == pytest.approx(0.4689956, abs=1e-7)
