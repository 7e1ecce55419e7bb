"""Angular imperfections of the source and the detector.

Alice encodes bit 0 as |alpha1> (rectilinear) or |45+alpha2> (diagonal) and
bit 1 as |90+alpha3> or |-45+alpha4>. Bob measures with the pair
{|beta1>, |90+beta3>} or {|45+beta2>, |-45+beta4>}. A polarisation angle
``theta`` is the real ket ``(cos theta, sin theta)``. All angles are radians.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import DegenerateBasisError

__all__ = [
    "LargeAngleWarning",
    "PreparationAngles",
    "MeasurementAngles",
    "DeviceModel",
    "MeasurementVectors",
    "polarization_ket",
    "prep_rect_matrix",
    "prep_diag_matrix",
    "meas_vectors",
    "two_outcome_probability",
    "detection_flip_rate",
    "is_basis_dependent",
]

QUARTER_PI = math.pi / 4
DEGENERATE_TOL = 1e-12
# cos(pi/2) evaluates to 6e-17; anything this small is an exact zero
_TRIG_SNAP = 1e-15


class LargeAngleWarning(UserWarning):
    """An angular deviation is at least pi/4 in magnitude."""


def _check_angles(kind: str, values: dict[str, float]) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"{kind} angle {name} must be finite, got {value!r}")
    big = [n for n, v in values.items() if abs(v) >= QUARTER_PI]
    if big:
        warnings.warn(
            f"{kind} deviation(s) {', '.join(big)} are >= pi/4 in magnitude; "
            "check the angle unit",
            LargeAngleWarning,
            stacklevel=4,
        )


@dataclass(frozen=True)
class PreparationAngles:
    """Alice's deviations, in radians."""

    alpha1: float = 0.0
    alpha2: float = 0.0
    alpha3: float = 0.0
    alpha4: float = 0.0

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "alpha3", "alpha4"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _check_angles("preparation", self.__dict__)

    @classmethod
    def from_degrees(cls, *angles: float) -> PreparationAngles:
        return cls(*(math.radians(a) for a in angles))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha1, self.alpha2, self.alpha3, self.alpha4)


@dataclass(frozen=True)
class MeasurementAngles:
    """Bob's deviations, in radians."""

    beta1: float = 0.0
    beta2: float = 0.0
    beta3: float = 0.0
    beta4: float = 0.0

    def __post_init__(self):
        for name in ("beta1", "beta2", "beta3", "beta4"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _check_angles("measurement", self.__dict__)

    @classmethod
    def from_degrees(cls, *angles: float) -> MeasurementAngles:
        return cls(*(math.radians(a) for a in angles))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.beta1, self.beta2, self.beta3, self.beta4)


@dataclass(frozen=True)
class DeviceModel:
    prep: PreparationAngles = field(default_factory=PreparationAngles)
    meas: MeasurementAngles = field(default_factory=MeasurementAngles)

    @classmethod
    def perfect(cls) -> DeviceModel:
        return cls()

    @classmethod
    def family_a(cls, a: float) -> DeviceModel:
        """The one-parameter model alpha1 = beta1 = beta2 = a, everything else 0."""
        return cls(PreparationAngles(alpha1=a), MeasurementAngles(beta1=a, beta2=a))

    @classmethod
    def rect_only(cls) -> DeviceModel:
        """Degenerate model where both "diagonal" states coincide with |0>, |90>.

        alpha2 = beta2 = -pi/4 and alpha4 = beta4 = 3pi/4, so the protocol only
        ever uses the rectilinear basis.
        """
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LargeAngleWarning)
            return cls(
                PreparationAngles(alpha2=-QUARTER_PI, alpha4=3 * QUARTER_PI),
                MeasurementAngles(beta2=-QUARTER_PI, beta4=3 * QUARTER_PI),
            )

    def family_parameter(self, tol: float = 1e-12) -> float | None:
        """Return ``a`` if this model is ``family_a(a)``, else ``None``."""
        a = self.prep.alpha1
        zeros = (self.prep.alpha2, self.prep.alpha3, self.prep.alpha4,
                 self.meas.beta3, self.meas.beta4)
        if (abs(self.meas.beta1 - a) <= tol and abs(self.meas.beta2 - a) <= tol
                and all(abs(z) <= tol for z in zeros)):
            return a
        return None


def _cos_sin(theta: float) -> tuple[float, float]:
    c, s = math.cos(theta), math.sin(theta)
    return (0.0 if abs(c) < _TRIG_SNAP else c), (0.0 if abs(s) < _TRIG_SNAP else s)


def polarization_ket(theta: float) -> np.ndarray:
    return np.array(_cos_sin(theta), dtype=complex)


def prep_rect_matrix(prep: PreparationAngles) -> np.ndarray:
    """Columns are the states Alice actually emits for rectilinear bits 0 and 1.

    Generally not unitary: the columns are unit vectors but need not be
    orthogonal.
    """
    c1, s1 = _cos_sin(prep.alpha1)
    c3, s3 = _cos_sin(prep.alpha3)
    return np.array([[c1, -s3],
                     [s1, c3]], dtype=complex)


def prep_diag_matrix(prep: PreparationAngles) -> np.ndarray:
    """Columns are the emitted diagonal states |45+alpha2> and |-45+alpha4>."""
    c0, s0 = _cos_sin(prep.alpha2 + QUARTER_PI)
    c1, s1 = _cos_sin(prep.alpha4 - QUARTER_PI)
    return np.array([[c0, c1],
                     [s0, s1]], dtype=complex)


class MeasurementVectors(NamedTuple):
    rect0: np.ndarray
    rect1: np.ndarray
    diag0: np.ndarray
    diag1: np.ndarray

    def basis(self, diagonal: bool) -> tuple[np.ndarray, np.ndarray]:
        return (self.diag0, self.diag1) if diagonal else (self.rect0, self.rect1)


def meas_vectors(meas: MeasurementAngles) -> MeasurementVectors:
    return MeasurementVectors(
        rect0=polarization_ket(meas.beta1),
        rect1=polarization_ket(meas.beta3 + math.pi / 2),
        diag0=polarization_ket(meas.beta2 + QUARTER_PI),
        diag1=polarization_ket(meas.beta4 - QUARTER_PI),
    )


def two_outcome_probability(state: np.ndarray, outcome0: np.ndarray,
                            outcome1: np.ndarray) -> float:
    """Probability that Bob reads bit 1 when measuring ``state``.

    The two projector overlaps are renormalised by their sum; no
    inconclusive outcome is modelled.
    """
    w0 = abs(np.vdot(outcome0, state)) ** 2
    w1 = abs(np.vdot(outcome1, state)) ** 2
    total = w0 + w1
    if total < DEGENERATE_TOL:
        raise DegenerateBasisError(
            "both measurement outcomes have vanishing overlap with the input state"
        )
    return w1 / total


def _flip_fraction(s: float, c: float) -> float:
    # s = sin^2 of the wrong-outcome tilt, c = cos^2 of the right outcome's tilt
    denom = s + c
    if denom < DEGENERATE_TOL:
        raise DegenerateBasisError(
            "measurement basis vectors are parallel; the flip rate is undefined"
        )
    return s / denom


def detection_flip_rate(meas: MeasurementAngles) -> float:
    """Bit-flip probability caused by Bob's tilted bases on ideal BB84 inputs.

    Each basis contributes the mean of its two conditional flip fractions and
    the two bases are equally likely.
    """
    b1, b2, b3, b4 = meas.as_tuple()
    sin2 = lambda x: math.sin(x) ** 2  # noqa: E731
    cos2 = lambda x: math.cos(x) ** 2  # noqa: E731
    rect = 0.5 * (_flip_fraction(sin2(b1), cos2(b3)) + _flip_fraction(sin2(b3), cos2(b1)))
    diag = 0.5 * (_flip_fraction(sin2(b2), cos2(b4)) + _flip_fraction(sin2(b4), cos2(b2)))
    return 0.5 * (rect + diag)


def is_basis_dependent(model: DeviceModel, tol: float = 1e-12) -> bool:
    """True when deviations coincide within each basis (a unitary-like tilt)."""
    p, m = model.prep, model.meas
    return (abs(p.alpha1 - p.alpha3) <= tol and abs(p.alpha2 - p.alpha4) <= tol
            and abs(m.beta1 - m.beta3) <= tol and abs(m.beta2 - m.beta4) <= tol)
