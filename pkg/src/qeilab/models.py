"""Scattering models and their two-particle scattering functions S(zeta)."""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import (ConjugationViolation, MassViolation, ModelSpecError,
                     PoleEncountered, RangeViolation)

POLE_TOLERANCE = 1e-300


class Family(str, enum.Enum):
    FREE = "Free"
    ISING = "Ising"
    SINH_GORDON = "SinhGordon"
    GENERALIZED_SINH_GORDON = "GeneralizedSinhGordon"
    GENERALIZED_ISING = "GeneralizedIsing"

    @classmethod
    def parse(cls, name: str) -> "Family":
        key = name.replace("-", "").replace("_", "").replace(" ", "").lower()
        aliases = {
            "free": cls.FREE,
            "ising": cls.ISING,
            "sinhgordon": cls.SINH_GORDON,
            "sg": cls.SINH_GORDON,
            "generalizedsinhgordon": cls.GENERALIZED_SINH_GORDON,
            "gensinhgordon": cls.GENERALIZED_SINH_GORDON,
            "generalizedising": cls.GENERALIZED_ISING,
            "genising": cls.GENERALIZED_ISING,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ModelSpecError(f"unknown model family {name!r}") from None

    @property
    def generalized(self) -> bool:
        return self in (Family.GENERALIZED_SINH_GORDON, Family.GENERALIZED_ISING)


@dataclass(frozen=True)
class ModelSpec:
    """A scattering model: family, couplings B_j and particle mass.

    Couplings are stored as complex numbers in the order given. The dataclass
    is frozen and hashable so evaluators can be memoized per spec.
    """

    family: Family
    couplings: tuple[complex, ...] = ()
    mass: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "couplings", tuple(complex(b) for b in self.couplings))
        object.__setattr__(self, "mass", float(self.mass))

    @classmethod
    def free(cls, mass: float = 1.0) -> "ModelSpec":
        return cls(Family.FREE, (), mass)

    @classmethod
    def ising(cls, mass: float = 1.0) -> "ModelSpec":
        return cls(Family.ISING, (), mass)

    @classmethod
    def sinh_gordon(cls, b: float, mass: float = 1.0) -> "ModelSpec":
        return cls(Family.SINH_GORDON, (complex(b),), mass)

    @classmethod
    def generalized_sinh_gordon(cls, couplings: Sequence[complex], mass: float = 1.0) -> "ModelSpec":
        return cls(Family.GENERALIZED_SINH_GORDON, tuple(couplings), mass)

    @classmethod
    def generalized_ising(cls, couplings: Sequence[complex], mass: float = 1.0) -> "ModelSpec":
        return cls(Family.GENERALIZED_ISING, tuple(couplings), mass)

    def to_json(self) -> dict:
        return {
            "family": self.family.value,
            "couplings": [[b.real, b.imag] for b in self.couplings],
            "mass": self.mass,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ModelSpec":
        try:
            family = Family.parse(str(data["family"]))
        except KeyError:
            raise ModelSpecError("model entry needs a 'family' key") from None
        couplings = []
        for c in data.get("couplings", []):
            if isinstance(c, (list, tuple)):
                if len(c) != 2:
                    raise ModelSpecError(f"coupling must be [re, im], got {c!r}")
                couplings.append(complex(float(c[0]), float(c[1])))
            else:
                couplings.append(complex(c))
        spec = cls(family, tuple(couplings), float(data.get("mass", 1.0)))
        validate(spec)
        return spec

    def describe(self) -> str:
        if not self.couplings:
            return self.family.value
        bs = ",".join(_format_coupling(b) for b in self.couplings)
        return f"{self.family.value}[{bs}]"


def _format_coupling(b: complex) -> str:
    if b.imag == 0:
        return f"{b.real:g}"
    return f"{b.real:g}{b.imag:+g}i"


def validate(spec: ModelSpec) -> None:
    """Raise a ModelSpecError subclass if ``spec`` violates an invariant."""
    if not (spec.mass > 0) or not math.isfinite(spec.mass):
        raise MassViolation(f"mass must be positive, got {spec.mass}")
    fam = spec.family
    n = len(spec.couplings)
    if fam in (Family.FREE, Family.ISING) and n:
        raise ModelSpecError(f"{fam.value} takes no couplings, got {n}")
    if fam is Family.SINH_GORDON:
        if n != 1:
            raise ModelSpecError(f"SinhGordon needs exactly one coupling, got {n}")
        if spec.couplings[0].imag != 0:
            raise ConjugationViolation("SinhGordon coupling must be real")
    if fam.generalized and n < 1:
        raise ModelSpecError(f"{fam.value} needs at least one coupling")
    for b in spec.couplings:
        if not (cmath.isfinite(b) and 0.0 < b.real < 2.0):
            raise RangeViolation(f"coupling {b} must have real part in (0, 2)")
    upper = sorted((b.real, b.imag) for b in spec.couplings if b.imag > 0)
    lower = sorted((b.real, -b.imag) for b in spec.couplings if b.imag < 0)
    if upper != lower:
        raise ConjugationViolation(
            "non-real couplings must come in complex-conjugate pairs: "
            + ", ".join(_format_coupling(b) for b in spec.couplings if b.imag != 0))


def sinh_gordon_factor(b: complex, zeta: complex) -> complex:
    """(sinh z - i sin(B pi/2)) / (sinh z + i sin(B pi/2))."""
    s = cmath.sin(complex(b) * math.pi / 2)
    sh = cmath.sinh(complex(zeta))
    den = sh + 1j * s
    if abs(den) < POLE_TOLERANCE:
        raise PoleEncountered(f"S has a pole at zeta={zeta} for B={b}")
    return (sh - 1j * s) / den


def scattering_value(spec: ModelSpec, zeta: complex) -> complex:
    fam = spec.family
    if fam is Family.FREE:
        return 1.0 + 0j
    if fam is Family.ISING:
        return -1.0 + 0j
    prod = 1.0 + 0j
    for b in spec.couplings:
        prod *= sinh_gordon_factor(b, zeta)
    if fam is Family.GENERALIZED_ISING:
        return -prod
    return prod


# Zero order of F_min at zeta = 0 equals 1 exactly when S(0) = -1.
def s_at_zero(spec: ModelSpec) -> int:
    fam = spec.family
    if fam is Family.FREE:
        return 1
    if fam is Family.ISING:
        return -1
    sign = (-1) ** len(spec.couplings)
    return -sign if fam is Family.GENERALIZED_ISING else sign

