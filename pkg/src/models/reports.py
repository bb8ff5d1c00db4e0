from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

VERDICT_DOMINATES = "dominates"
VERDICT_VIOLATED = "violated"

STATUS_PASS = "pass"
STATUS_TRIVIAL = "trivially_pass"
STATUS_FAIL = "fail"


@dataclass
class DominanceReport:
    verdict: str
    tau_star: Optional[float]
    gap: float
    slack: float
    necessary_conditions: Dict[str, Optional[bool]] = field(default_factory=dict)

    @property
    def dominates(self) -> bool:
        return self.verdict == VERDICT_DOMINATES

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class Theorem1Report:
    sup_gap: float
    tolerance: float
    passed: bool
    n: int
    gamma: float
    num_samples: int
    seed: int
    compared_points: int
    jumps: int

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["pass"] = data.pop("passed")
        return data


@dataclass
class TailBoundReport:
    n: int
    gamma: float
    probability: float
    bound: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["pass"] = data.pop("passed")
        return data


@dataclass
class ChangeOfMeasureReport:
    n: int
    gamma: float
    lhs: float
    bound: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["pass"] = data.pop("passed")
        return data


@dataclass
class FiniteBoundReport:
    """Exact check of the finite-block spectrum transfer bound for one (tau, gamma, beta)."""

    tau: float
    gamma: float
    beta: float
    n: int
    m: int
    epsilon: float
    lhs: float
    rhs_terms: Dict[str, float]
    exponent: float
    status: str

    @property
    def rhs(self) -> float:
        return sum(self.rhs_terms.values())

    @property
    def passed(self) -> bool:
        return self.status != STATUS_FAIL

    @property
    def informative(self) -> bool:
        return self.exponent > 0

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["rhs"] = self.rhs
        data["pass"] = self.passed
        return data


@dataclass
class HammingBallReport:
    N: int
    beta: float
    alphabet_size: int
    radius: int
    count: int
    bound: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["pass"] = data.pop("passed")
        return data


@dataclass
class TypeCountReport:
    n: int
    k: int
    alphabet_size: int
    observed: int
    bound: int
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["bound"] = str(self.bound) if self.bound > 2 ** 53 else self.bound
        data["pass"] = data.pop("passed")
        return data


@dataclass
class SameTypeReport:
    n: int
    k: int
    classes: int
    max_spread: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["pass"] = data.pop("passed")
        return data


@dataclass
class IsomorphismCertificate:
    round_trip_failure_rate: float
    misclassification_rate: float
    image_classification_agreement: float
    tv_distance: float
    k_block: int
    samples: int
    n: int
    window: int
    seed: int
    classification_confusion_matrix: List[List[int]]
    ergodicity: Dict[str, str] = field(default_factory=dict)
    verdict: str = "consistent"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class InvariantReport:
    spectra_equal: bool
    x_ergodicity: str
    y_ergodicity: str
    forward_dominance: str
    backward_dominance: str
    verdict: str

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
