"""
Data models for Sheaf Invariants
"""

from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple


SCHEMA_VERSION = 1


class SpaceKind(Enum):
    SURFACE = "surface"
    FLOP_THREEFOLD = "flop"


class ClassKind(Enum):
    SPLIT = "split"
    GENERIC = "generic"
    EXPLICIT = "explicit"


class Verdict(Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


class OutputFormat(Enum):
    JSON = "json"
    CSV = "csv"
    PRETTY = "pretty"


class SheafInvariantsError(Exception):
    """Base class for every error raised by the package"""

    exit_code = 1


class UsageError(SheafInvariantsError):
    """Bad input: arity mismatch, malformed polynomial, violated pre-condition"""

    exit_code = 1


class ConfigError(SheafInvariantsError):
    exit_code = 1


class TruncationOverflowError(SheafInvariantsError):
    """A truncated computation did not stabilize within the allowed rounds"""

    exit_code = 2

    def __init__(self, message: str, previous: Any = None, current: Any = None):
        super().__init__(f"{message} (previous={previous}, current={current})")
        self.previous = previous
        self.current = current


class ClaimVerificationError(SheafInvariantsError):
    """A computed value contradicts a stated identity or expected table value"""

    exit_code = 3


def format_scalar(value) -> Any:
    """JSON-friendly rendering of an exact rational"""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return value.numerator
        return f"{value.numerator}/{value.denominator}"
    return value


@dataclass(frozen=True)
class CechSettings:
    """Truncation and certification knobs of the Čech engine"""
    max_rounds: int = 6
    certify: bool = True
    debug_dump: bool = False
    pole_start_offset: int = 1

    @classmethod
    def from_config(cls, config: Dict) -> "CechSettings":
        cech = config.get("cech", {}) or {}
        width = config.get("width", {}) or {}
        return cls(
            max_rounds=int(cech.get("max_rounds", 6)),
            certify=bool(cech.get("certify", True)),
            debug_dump=bool(cech.get("debug_dump", False)),
            pole_start_offset=int(width.get("pole_start_offset", 1)),
        )

    def cache_key(self) -> str:
        return f"r{self.max_rounds}-c{int(self.certify)}-p{self.pole_start_offset}"


@dataclass(frozen=True)
class TruncationCertificate:
    m: int
    z_window: Tuple[int, int]
    pole_bound: int = 0
    rounds: int = 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "zWindow": list(self.z_window),
            "poleBound": self.pole_bound,
        }


@dataclass(frozen=True)
class CohomologyResult:
    h0: int
    h1: int
    certificate: TruncationCertificate


@dataclass(frozen=True)
class InvariantReport:
    space: str
    j: int
    class_text: str
    width: int
    height: int
    chi: int
    h1_end: int
    delta0: int
    delta1: int
    certificate: TruncationCertificate
    class_digest: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "space": self.space,
            "j": self.j,
            "class": self.class_text,
            "w": self.width,
            "h": self.height,
            "chi": self.chi,
            "h1End": self.h1_end,
            "delta": [self.delta0, self.delta1],
            "certificate": self.certificate.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "InvariantReport":
        cert = data.get("certificate", {})
        return cls(
            space=data["space"],
            j=data["j"],
            class_text=data["class"],
            width=data["w"],
            height=data["h"],
            chi=data["chi"],
            h1_end=data["h1End"],
            delta0=data["delta"][0],
            delta1=data["delta"][1],
            certificate=TruncationCertificate(
                m=cert.get("m", 0),
                z_window=tuple(cert.get("zWindow", (0, 0))),
                pole_bound=cert.get("poleBound", 0),
            ),
            class_digest=data.get("digest", ""),
        )


@dataclass(frozen=True)
class HilbertPolynomial:
    """phi(E^(m), n) as ascending coefficients in n"""
    m: int
    coefficients: Tuple[Fraction, ...]
    endomorphism: bool = False

    def evaluate(self, n: int) -> Fraction:
        return sum((c * n ** i for i, c in enumerate(self.coefficients)), Fraction(0))

    @property
    def degree(self) -> int:
        nonzero = [i for i, c in enumerate(self.coefficients) if c != 0]
        return nonzero[-1] if nonzero else 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "end": self.endomorphism,
            "coefficients": [format_scalar(c) for c in self.coefficients],
        }


@dataclass(frozen=True)
class DeformationCount:
    j: int
    conormal: Tuple[int, int]
    gamma1: int
    gamma_full: Optional[int]
    proj_dim: int

    @property
    def gamma_full_finite(self) -> bool:
        return self.gamma_full is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "j": self.j,
            "conormal": list(self.conormal),
            "gamma1": self.gamma1,
            "gammaFull": self.gamma_full if self.gamma_full is not None else "infinite",
            "projDim": self.proj_dim,
        }


@dataclass(frozen=True)
class BoundsResult:
    lower: int
    upper: int
    attained_by: Tuple[Tuple[str, str], ...] = (("lower", "generic"), ("upper", "split"))

    def contains(self, value: int) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> Dict[str, Any]:
        return {"lower": self.lower, "upper": self.upper, "attainedBy": dict(self.attained_by)}


@dataclass(frozen=True)
class ModuliDimension:
    j: int
    dim: Optional[int]
    chi: int
    gamma1: int

    @property
    def degenerate(self) -> bool:
        return self.dim is None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "j": self.j,
            "gamma1": self.gamma1,
            "projDim": self.dim if self.dim is not None else "degenerate",
            "chi": self.chi,
        }


@dataclass(frozen=True)
class PencilPoint:
    c: Optional[Fraction]
    width: int
    height: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "c": "inf" if self.c is None else format_scalar(self.c),
            "w": self.width,
            "h": self.height,
        }


@dataclass
class WitnessRecord:
    claim: str
    space: str
    j: int
    class_text: str
    report: Optional[InvariantReport]
    verdict: Verdict
    seed: Optional[int] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "claim": self.claim,
            "space": self.space,
            "j": self.j,
            "class": self.class_text,
            "seed": self.seed,
            "report": self.report.to_dict() if self.report else None,
            "verdict": self.verdict.value,
            "details": self.details,
        }


@dataclass
class ChargeSpectrum:
    k: int
    achieved: Dict[int, List[int]]
    samples: int
    min_chi: Optional[int]
    bound_certified: bool
    verdict: Verdict

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "achieved": {str(j): values for j, values in sorted(self.achieved.items())},
            "samples": self.samples,
            "minChi": self.min_chi,
            "boundCertified": self.bound_certified,
            "verdict": self.verdict.value,
        }


@dataclass
class ScanReport:
    k: int
    j: int
    lower: int
    upper: int
    achieved: List[int]
    not_observed: List[int]
    seeds: List[int]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class BoundsSweepRow:
    space: str
    j: int
    lower: int
    upper: int
    split_chi: int
    sampled_min_chi: int
    sampled_max_chi: int
    sampled_min_h1_end: int
    split_h1_end: int
    violations: List[str]
    non_split_at_upper: bool

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class Table1Row:
    space: str
    kind: ClassKind
    width: int
    height: int
    h1_end: int
    expected: Tuple[int, int, int]
    status: str
    samples: int = 0
    seeds: List[int] = field(default_factory=list)

    @property
    def values(self) -> Tuple[int, int, int]:
        return (self.width, self.height, self.h1_end)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "space": self.space,
            "kind": self.kind.value,
            "w": self.width,
            "h": self.height,
            "h1end": self.h1_end,
            "expected": list(self.expected),
            "status": self.status,
            "samples": self.samples,
            "seeds": self.seeds,
        }
