"""Secret-key rates and phase-error bounds.

The asymptotic distillable fraction is ``1 - h(e_bit) - h(e_phase)``; the
detector's own flip rate is treated as noisy post-processing and costs a
further factor ``1 - h(e_bit1)``. The phase error rate cannot be observed, so
it is replaced by an upper bound: either the hand-derived bound for the
one-parameter device family, or the exact worst case over all Pauli channels
consistent with the inferred bit error rate.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .devices import DeviceModel, PreparationAngles, detection_flip_rate
from .edp import PauliChannel, combined_qber, invert_qber, rate_coefficients
from .exceptions import InfeasibleTargetError, NoKeyError

__all__ = [
    "BoundMode",
    "KeyRateResult",
    "binary_entropy",
    "keyrate_from_rates",
    "keyrate_perfect",
    "phase_gap_bound_analytic",
    "attainable_bit_error_interval",
    "worst_case_phase_error",
    "worst_case_channel",
    "max_phase_gap",
    "keyrate_imperfect",
    "qber_threshold",
    "rect_only_rates",
    "rect_only_bound",
    "qber_window",
    "device_threshold",
    "PERFECT_THRESHOLD_BRACKET",
]

_FEASIBILITY_TOL = 1e-12
PERFECT_THRESHOLD_BRACKET = (0.0, 0.5)


class BoundMode(str, enum.Enum):
    ANALYTIC_FAMILY_A = "analytic_family_a"
    EXACT_OPTIMIZER = "exact_optimizer"


@dataclass(frozen=True)
class KeyRateResult:
    """A key rate together with the quantities it was computed from.

    ``rate`` is clamped at zero; ``raw_rate`` keeps the signed value.
    """

    rate: float
    raw_rate: float
    e_bit: float
    e_phase_bound: float
    e_bit1: float = 0.0
    Q: float | None = None


def binary_entropy(x: float, tol: float = 1e-12) -> float:
    """Shannon entropy in bits of a biased coin, with h(0) = h(1) = 0."""
    if not (-tol <= x <= 1 + tol):
        raise ValueError(f"binary entropy argument must lie in [0, 1], got {x!r}")
    x = min(max(x, 0.0), 1.0)
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def keyrate_from_rates(e_bit: float, e_phase_bound: float, e_bit1: float = 0.0,
                       q: float | None = None) -> KeyRateResult:
    """``(1 - h(e_phase) - h(e_bit)) * (1 - h(e_bit1))``, clamped at zero.

    A phase-error bound above 1/2 is charged as 1/2: the entropy is
    increasing on [0, 1/2], so that is the worst case compatible with the
    bound.
    """
    bound = min(max(e_phase_bound, 0.0), 1.0)
    raw = ((1 - binary_entropy(min(bound, 0.5)) - binary_entropy(e_bit))
           * (1 - binary_entropy(e_bit1)))
    return KeyRateResult(rate=max(0.0, raw), raw_rate=raw, e_bit=e_bit,
                         e_phase_bound=bound, e_bit1=e_bit1, Q=q)


def keyrate_perfect(e_bit: float) -> KeyRateResult:
    """Ideal devices: the phase error rate equals the bit error rate."""
    if not 0.0 <= e_bit <= 0.5:
        raise ValueError(f"e_bit must lie in [0, 0.5], got {e_bit!r}")
    return keyrate_from_rates(e_bit, e_bit, 0.0, q=e_bit)


def phase_gap_bound_analytic(a: float) -> float:
    """Upper bound on ``e_phase - e_bit`` for the family alpha1 = beta1 = beta2 = a."""
    return 0.5 * (1 + math.sin(a) ** 2 - math.cos(a))


def attainable_bit_error_interval(prep: PreparationAngles) -> tuple[float, float]:
    bit, _ = rate_coefficients(prep)
    return float(bit.min()), float(bit.max())


def _worst_case_from_coefficients(bit: np.ndarray, phase: np.ndarray,
                                  target: float) -> tuple[float, np.ndarray]:
    # Candidates are the extreme points of {p in simplex : bit @ p = target}:
    # simplex vertices on the hyperplane and hyperplane crossings of edges.
    candidates = []
    for i in range(4):
        if abs(bit[i] - target) <= _FEASIBILITY_TOL:
            p = np.zeros(4)
            p[i] = 1.0
            candidates.append(p)
    for i, j in itertools.combinations(range(4), 2):
        span = bit[i] - bit[j]
        if abs(span) <= _FEASIBILITY_TOL:
            continue
        lam = (target - bit[j]) / span
        if -_FEASIBILITY_TOL <= lam <= 1 + _FEASIBILITY_TOL:
            lam = min(max(lam, 0.0), 1.0)
            p = np.zeros(4)
            p[i], p[j] = lam, 1.0 - lam
            candidates.append(p)
    if not candidates:
        raise InfeasibleTargetError(target, (float(bit.min()), float(bit.max())))
    values = [float(phase @ p) for p in candidates]
    best = int(np.argmax(values))
    return values[best], candidates[best]


def worst_case_phase_error(prep: PreparationAngles, e_bit_target: float) -> float:
    """Largest phase error rate of any Pauli channel with the given bit error rate.

    Both rates are linear in the channel probabilities, so the maximum sits
    at an extreme point of the simplex slice and a finite enumeration is
    exact.

    Raises:
        InfeasibleTargetError: if no channel reaches ``e_bit_target``.
    """
    bit, phase = rate_coefficients(prep)
    value, _ = _worst_case_from_coefficients(bit, phase, e_bit_target)
    return value


def worst_case_channel(prep: PreparationAngles, e_bit_target: float) -> PauliChannel:
    """A channel attaining :func:`worst_case_phase_error`."""
    bit, phase = rate_coefficients(prep)
    _, p = _worst_case_from_coefficients(bit, phase, e_bit_target)
    return PauliChannel(*p)


def max_phase_gap(prep: PreparationAngles) -> tuple[float, PauliChannel]:
    """Largest ``e_phase - e_bit`` over all Pauli channels, and a channel attaining it.

    The gap is linear in the channel, so one of the four pure Paulis wins.
    """
    bit, phase = rate_coefficients(prep)
    gap = phase - bit
    k = int(np.argmax(gap))
    p = np.zeros(4)
    p[k] = 1.0
    return float(gap[k]), PauliChannel(*p)


def keyrate_imperfect(q: float, model: DeviceModel,
                      bound_mode: BoundMode | str = BoundMode.ANALYTIC_FAMILY_A) -> KeyRateResult:
    """Key rate for an observed QBER ``q`` and a device model.

    The distillation-level bit error rate is recovered from ``q`` by removing
    the detector flip rate; the phase error rate is then bounded according to
    ``bound_mode``.

    Raises:
        ValueError: ``analytic_family_a`` requested for a model outside that family.
        OutOfModelError: ``q`` is below the detector flip rate.
        InfeasibleTargetError: exact mode and no channel yields the inferred
            bit error rate.
    """
    bound_mode = BoundMode(bound_mode)
    e_bit1 = detection_flip_rate(model.meas)
    e_bit = invert_qber(q, e_bit1)
    if bound_mode is BoundMode.ANALYTIC_FAMILY_A:
        a = model.family_parameter()
        if a is None:
            raise ValueError(
                "analytic bound requires alpha1 = beta1 = beta2 = a with all other angles zero"
            )
        e_phase_bound = e_bit + phase_gap_bound_analytic(a)
    else:
        e_phase_bound = worst_case_phase_error(model.prep, e_bit)
    return keyrate_from_rates(e_bit, e_phase_bound, e_bit1, q=q)


def qber_threshold(rate_fn: Callable[[float], float], lo: float, hi: float,
                   tol: float = 1e-6) -> float:
    """Bisect for the QBER at which ``rate_fn`` stops being positive.

    Requires ``rate_fn(lo) > 0 >= rate_fn(hi)``. The returned point is
    within ``tol`` of the crossing.
    """
    if not lo < hi:
        raise ValueError(f"invalid bracket [{lo!r}, {hi!r}]")
    if not rate_fn(lo) > 0:
        raise ValueError(f"rate at lower end Q={lo!r} is not positive")
    if rate_fn(hi) > 0:
        raise ValueError(f"rate at upper end Q={hi!r} is still positive")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rate_fn(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def rect_only_rates(channel: PauliChannel) -> tuple[float, float]:
    """Bit and phase error rates when every state is sent in the rectilinear basis."""
    p00, p01, p10, p11 = channel.as_array()
    e_bit = 0.25 * (p00 + p01 + 3 * p10 + 3 * p11)
    e_phase = 0.25 * (p00 + 3 * p01 + p10 + 3 * p11)
    return float(e_bit), float(e_phase)


def rect_only_bound(channel: PauliChannel) -> tuple[float, float]:
    """``(e_bit, e_bit + 1/2)``; the bound is capped at 1.

    ``e_phase - e_bit = |p10 - p01| / 2`` in this model, and Eve is free to
    choose that difference, so nothing tighter than 1/2 holds uniformly.
    """
    e_bit, _ = rect_only_rates(channel)
    return e_bit, min(e_bit + 0.5, 1.0)


def qber_window(model: DeviceModel, bound_mode: BoundMode | str) -> tuple[float, float]:
    """Range of observed QBER for which ``keyrate_imperfect`` is defined.

    The upper end is capped at 1/2.
    """
    bound_mode = BoundMode(bound_mode)
    e_bit1 = detection_flip_rate(model.meas)
    if bound_mode is BoundMode.ANALYTIC_FAMILY_A:
        return e_bit1, 0.5
    lo, hi = attainable_bit_error_interval(model.prep)
    return combined_qber(lo, e_bit1), min(combined_qber(min(hi, 0.5), e_bit1), 0.5)


def device_threshold(model: DeviceModel,
                     bound_mode: BoundMode | str = BoundMode.ANALYTIC_FAMILY_A,
                     grid: int = 512, tol: float = 1e-6) -> float:
    """Largest observed QBER that still gives a positive key rate.

    The admissible window is scanned on a grid to locate the last positive
    sample, which is then refined by bisection.

    Raises:
        NoKeyError: if no grid point has a positive rate.
    """
    bound_mode = BoundMode(bound_mode)
    lo, hi = qber_window(model, bound_mode)

    def rate(q: float) -> float:
        return keyrate_imperfect(q, model, bound_mode).raw_rate

    qs = np.linspace(lo, hi, grid + 1)
    positive = [i for i, q in enumerate(qs) if rate(float(q)) > 0]
    if not positive:
        raise NoKeyError("no observed QBER yields a positive key rate for this device model")
    last = positive[-1]
    if last == grid:
        return float(hi)
    return qber_threshold(rate, float(qs[last]), float(qs[last + 1]), tol=tol)
