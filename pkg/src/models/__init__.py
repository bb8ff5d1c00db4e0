from .alphabet import Alphabet
from .code import CodePair, Coupling, SlidingBlockCode
from .process import (
    ErgodicModel,
    FactorModel,
    IIDModel,
    MarkovModel,
    MixtureModel,
    ProcessModel,
    SamplePath,
    model_id,
)
from .spectra import EntropyBracket, SpectralBounds, SpectrumEstimate, StaircaseSpectrum
from .types import MarkovApproximation, MarkovType

__all__ = [
    "Alphabet",
    "CodePair",
    "Coupling",
    "EntropyBracket",
    "ErgodicModel",
    "FactorModel",
    "IIDModel",
    "MarkovApproximation",
    "MarkovModel",
    "MarkovType",
    "MixtureModel",
    "ProcessModel",
    "SamplePath",
    "SlidingBlockCode",
    "SpectralBounds",
    "SpectrumEstimate",
    "StaircaseSpectrum",
    "model_id",
]
