"""Bundled process models, addressable on the command line as `catalog:<name>`."""

from decimal import Decimal
from typing import Callable, Dict, List

from ..errors import SchemaError
from .alphabet import Alphabet
from .code import SlidingBlockCode
from .process import FactorModel, IIDModel, MarkovModel, MixtureModel, ProcessModel


def bernoulli(p: float) -> IIDModel:
    """Binary IID model with P('1') = p.

    The complement is taken in decimal so bernoulli(1 - p) mirrors bernoulli(p) exactly.
    """
    return IIDModel(alphabet=Alphabet.binary(), probs=[float(Decimal(1) - Decimal(repr(float(p)))), p])


def uniform(size: int) -> IIDModel:
    return IIDModel(alphabet=Alphabet.of_size(size), probs=[1.0 / size] * size)


def symmetric_markov(flip: float) -> MarkovModel:
    """Binary first-order chain that changes symbol with probability `flip`."""
    kernel = [[1.0 - flip, flip], [flip, 1.0 - flip]]
    return MarkovModel(alphabet=Alphabet.binary(), order=1, kernel=kernel, initial=[0.5, 0.5])


def fair_coin() -> IIDModel:
    return bernoulli(0.5)


def all_zeros() -> IIDModel:
    return bernoulli(0.0)


def two_level_mixture() -> MixtureModel:
    return MixtureModel(components=(fair_coin(), bernoulli(0.1)), weights=[0.3, 0.7])


def markov_mixture() -> MixtureModel:
    return MixtureModel(components=(symmetric_markov(0.1), symmetric_markov(0.25)), weights=[0.5, 0.5])


def three_markov_mixture() -> MixtureModel:
    return MixtureModel(
        components=(symmetric_markov(0.05), symmetric_markov(0.2), symmetric_markov(0.4)),
        weights=[0.2, 0.5, 0.3],
    )


def coin_or_zeros() -> MixtureModel:
    return MixtureModel(components=(fair_coin(), all_zeros()), weights=[0.5, 0.5])


def regular_source() -> MixtureModel:
    return MixtureModel(components=(bernoulli(0.1), fair_coin()), weights=[0.7, 0.3])


def regular_target() -> MixtureModel:
    return MixtureModel(components=(bernoulli(0.9), fair_coin()), weights=[0.7, 0.3])


def irregular_mixture() -> MixtureModel:
    """Two distinct ergodic components sharing the entropy rate h(0.1)."""
    return MixtureModel(components=(bernoulli(0.1), bernoulli(0.9)), weights=[0.5, 0.5])


def xor3_fair() -> FactorModel:
    return FactorModel(base=fair_coin(), code=SlidingBlockCode.xor(1))


CATALOG: Dict[str, Callable[[], ProcessModel]] = {
    "fair_coin": fair_coin,
    "all_zeros": all_zeros,
    "bernoulli_0.1": lambda: bernoulli(0.1),
    "bernoulli_0.25": lambda: bernoulli(0.25),
    "bernoulli_0.9": lambda: bernoulli(0.9),
    "uniform_4": lambda: uniform(4),
    "symmetric_markov_0.2": lambda: symmetric_markov(0.2),
    "xor3_fair": xor3_fair,
    "two_level_mixture": two_level_mixture,
    "markov_mixture": markov_mixture,
    "three_markov_mixture": three_markov_mixture,
    "coin_or_zeros": coin_or_zeros,
    "regular_source": regular_source,
    "regular_target": regular_target,
    "irregular_mixture": irregular_mixture,
}


def catalog_names() -> List[str]:
    return sorted(CATALOG)


def load_catalog_model(name: str) -> ProcessModel:
    try:
        return CATALOG[name]()
    except KeyError:
        raise SchemaError(f"Unknown catalog model {name!r}; available: {', '.join(catalog_names())}")
