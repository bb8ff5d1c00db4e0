import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.config import Config, RunConfig, get_config
from src.errors import (
    AlphabetMismatchError,
    ConfigError,
    EmptyPathError,
    EnumerationCapError,
    ModelValidationError,
    UnsupportedModelError,
)
from src.models import Alphabet, FactorModel, IIDModel, MarkovModel, MixtureModel, SamplePath, SlidingBlockCode
from src.models import catalog
from src.models.spectra import EntropyBracket
from src.services.process import (
    block_entropy,
    block_probabilities,
    conditional_entropy,
    entropy_rate,
    factor_entropy_bracket,
    log_probability,
    sample,
    sample_batch,
    self_information_rate,
)

BINARY = Alphabet.binary()


def path(text, alphabet=BINARY):
    return SamplePath.from_string(alphabet, text)


class TestModels:
    def test_iid_probs_must_sum_to_one(self):
        with pytest.raises(ModelValidationError):
            IIDModel(alphabet=BINARY, probs=[0.5, 0.6])

    def test_markov_initial_must_be_stationary(self):
        with pytest.raises(ModelValidationError):
            MarkovModel(alphabet=BINARY, order=1, kernel=[[0.9, 0.1], [0.2, 0.8]], initial=[0.5, 0.5])

    def test_periodic_kernel_is_rejected(self):
        with pytest.raises(ModelValidationError):
            MarkovModel.from_kernel(BINARY, 1, [[0.0, 1.0], [1.0, 0.0]])

    def test_from_kernel_solves_stationary_law(self):
        model = MarkovModel.from_kernel(BINARY, 1, [[0.9, 0.1], [0.2, 0.8]])
        assert model.initial == pytest.approx([2 / 3, 1 / 3], abs=1e-10)

    def test_mixture_components_share_alphabet(self):
        with pytest.raises(AlphabetMismatchError):
            MixtureModel(components=(catalog.fair_coin(), catalog.uniform(4)), weights=[0.5, 0.5])

    def test_nested_mixture_is_rejected(self):
        with pytest.raises(ModelValidationError):
            MixtureModel(components=(catalog.two_level_mixture(),), weights=[1.0])

    def test_bernoulli_mirrors_exactly(self):
        assert catalog.bernoulli(0.9).probs.tolist() == catalog.bernoulli(0.1).probs.tolist()[::-1]

    def test_empty_path_is_rejected(self):
        with pytest.raises(EmptyPathError):
            SamplePath(alphabet=BINARY, symbols=[])


class TestLogProbability:
    def test_uniform_binary(self):
        assert log_probability(catalog.fair_coin(), path("01101001")) == pytest.approx(-8.0)

    def test_bernoulli_quarter(self):
        assert log_probability(catalog.bernoulli(0.25), path("0001")) == pytest.approx(-3.2451125, abs=1e-7)

    def test_mixture_uses_log_sum_exp(self, coin_or_zeros):
        assert log_probability(coin_or_zeros, path("0000")) == pytest.approx(np.log2(17 / 32), abs=1e-12)
        assert log_probability(coin_or_zeros, path("0000")) == pytest.approx(-0.912537, abs=1e-6)

    def test_constant_factor(self):
        constant = FactorModel(base=catalog.fair_coin(), code=SlidingBlockCode.constant(BINARY, BINARY))
        assert log_probability(constant, path("0000")) == pytest.approx(0.0, abs=1e-12)
        assert log_probability(constant, path("0010")) == -np.inf

    def test_markov_path(self):
        model = catalog.symmetric_markov(0.2)
        expected = np.log2(0.5) + np.log2(0.8) + np.log2(0.2)
        assert log_probability(model, path("001")) == pytest.approx(expected)

    def test_factor_forward_matches_enumeration(self):
        model = FactorModel(base=catalog.symmetric_markov(0.2), code=SlidingBlockCode.xor(1))
        probs = block_probabilities(model, 5)
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        # Y_1^4 is the marginal of Y_1^5.
        assert block_probabilities(model, 4) == pytest.approx(probs.reshape(16, 2).sum(axis=1), abs=1e-12)

    def test_alphabet_mismatch(self):
        with pytest.raises(AlphabetMismatchError):
            log_probability(catalog.uniform(4), path("0101"))

    @given(text=st.text(alphabet="01", min_size=1, max_size=30))
    @settings(max_examples=50, deadline=None)
    def test_mixture_dominates_each_weighted_component(self, text):
        mixture = catalog.three_markov_mixture()
        total = log_probability(mixture, path(text))
        for component, weight in zip(mixture.components, mixture.weights):
            assert total >= np.log2(weight) + log_probability(component, path(text)) - 1e-9


class TestStationarity:
    @pytest.mark.parametrize("name", catalog.catalog_names())
    def test_first_and_last_symbol_marginals(self, name):
        model = catalog.load_catalog_model(name)
        q = model.alphabet.size
        shorter = block_probabilities(model, 4)
        longer = block_probabilities(model, 5)
        assert longer.reshape(q, q ** 4).sum(axis=0) == pytest.approx(shorter, abs=1e-10)
        assert longer.reshape(q ** 4, q).sum(axis=1) == pytest.approx(shorter, abs=1e-10)


class TestSelfInformationRate:
    def test_uniform_rate_is_one(self):
        assert self_information_rate(catalog.fair_coin(), path("00000000")) == 1.0

    def test_bernoulli_rate(self):
        assert self_information_rate(catalog.bernoulli(0.25), path("0001")) == pytest.approx(0.8112781, abs=1e-7)

    def test_mixture_rate(self, coin_or_zeros):
        assert self_information_rate(coin_or_zeros, path("0000")) == pytest.approx(0.2281342, abs=1e-7)

    def test_zero_probability_is_infinite(self):
        assert self_information_rate(catalog.all_zeros(), path("01")) == np.inf


class TestSampling:
    def test_same_seed_same_path(self, two_level):
        assert sample(two_level, 200, seed=7) == sample(two_level, 200, seed=7)

    def test_all_zeros(self):
        assert sample(catalog.all_zeros(), 50, seed=123).to_string() == "0" * 50

    def test_bernoulli_frequency(self):
        drawn = sample(catalog.bernoulli(0.25), 100_000, seed=2024)
        assert abs(drawn.symbols.mean() - 0.25) < 0.01

    def test_factor_image_has_requested_length(self):
        assert len(sample(catalog.xor3_fair(), 37, seed=1)) == 37

    def test_batch_rows_do_not_depend_on_split(self, two_level):
        whole = sample_batch(two_level, 64, seed=5, start=0, count=10)
        parts = np.vstack([sample_batch(two_level, 64, seed=5, start=0, count=4),
                           sample_batch(two_level, 64, seed=5, start=4, count=6)])
        assert np.array_equal(whole, parts)

    def test_image_sample_extends_base_prefix(self):
        # A model and its pushforward drawn with one seed share their uniforms.
        base = catalog.symmetric_markov(0.2)
        code = SlidingBlockCode.xor(1)
        xs = sample_batch(base, 22, seed=3, count=5)
        ys = sample_batch(FactorModel(base=base, code=code), 20, seed=3, count=5)
        assert np.array_equal(ys, code.table[xs[:, :-2] * 4 + xs[:, 1:-1] * 2 + xs[:, 2:]])

    def test_empty_sample(self):
        with pytest.raises(EmptyPathError):
            sample(catalog.fair_coin(), 0, seed=0)


class TestEntropies:
    def test_iid_conditional_entropy(self):
        model = catalog.bernoulli(0.25)
        for k in range(4):
            assert conditional_entropy(model, k) == pytest.approx(0.8112781, abs=1e-7)

    def test_symmetric_markov_conditional_entropy(self):
        model = catalog.symmetric_markov(0.2)
        assert conditional_entropy(model, 0) == pytest.approx(1.0)
        for k in (1, 2, 3):
            assert conditional_entropy(model, k) == pytest.approx(0.7219281, abs=1e-7)

    def test_conditional_entropy_rejects_mixture(self, two_level):
        with pytest.raises(UnsupportedModelError):
            conditional_entropy(two_level, 1)

    def test_conditional_entropy_nonincreasing_for_factor(self):
        model = FactorModel(base=catalog.symmetric_markov(0.2), code=SlidingBlockCode.xor(1))
        values = [conditional_entropy(model, k) for k in range(6)]
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))

    def test_markov_entropy_rate(self):
        assert entropy_rate(catalog.symmetric_markov(0.2)) == pytest.approx(0.7219281, abs=1e-7)

    def test_factor_bracket_contains_rate(self):
        # Rule-150 XOR is finite-to-one, so it preserves the base entropy rate.
        bracket = factor_entropy_bracket(FactorModel(base=catalog.symmetric_markov(0.2),
                                                     code=SlidingBlockCode.xor(1)), k=6)
        assert isinstance(bracket, EntropyBracket)
        assert bracket.lower <= bracket.upper
        assert bracket.contains(0.7219281, tol=1e-6)

    def test_block_entropy_of_iid(self):
        assert block_entropy(catalog.bernoulli(0.25), 3) == pytest.approx(3 * 0.8112781, abs=1e-6)

    def test_enumeration_cap(self):
        with pytest.raises(EnumerationCapError):
            block_probabilities(catalog.fair_coin(), 12, cap=1000)

    @given(p=st.floats(0.0, 1.0), n=st.integers(1, 8))
    @settings(max_examples=50, deadline=None)
    def test_block_law_sums_to_one(self, p, n):
        assert block_probabilities(catalog.bernoulli(p), n).sum() == pytest.approx(1.0, abs=1e-9)


class TestConfig:
    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("SPECTRASCOPE_CAP", "4096")
        get_config.cache_clear()
        assert get_config().ENUMERATION_CAP == 4096

    def test_invalid_env_value(self, monkeypatch):
        monkeypatch.setenv("SPECTRASCOPE_WORKERS", "many")
        get_config.cache_clear()
        with pytest.raises(ConfigError):
            get_config()

    def test_invalid_config(self):
        with pytest.raises(ConfigError):
            Config(WORKERS=0)

    def test_run_config_validation(self):
        with pytest.raises(ConfigError):
            RunConfig(command="spectrum-estimate", gamma=0.0)
        with pytest.raises(ConfigError):
            RunConfig(command="spectrum-estimate", tau_min=1.0, tau_max=0.5)

    def test_run_config_default_grid(self):
        grid = RunConfig(command="spectrum-estimate", gamma=0.05, tau_points=11).tau_grid(4)
        assert grid[0] == 0.0
        assert grid[-1] == pytest.approx(2.1)
        assert grid.size == 11
