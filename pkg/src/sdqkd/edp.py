"""Post-sifting Alice-Bob states of the entanglement-based picture.

Alice holds half of |phi_1>; the other half goes through her (possibly
imperfect) encoding matrix, a Pauli error ``X^u Z^v`` chosen by Eve, and
Bob's perfect basis rotation. Only matching-basis rounds survive sifting, so
the joint state is an equal mixture of a rectilinear and a diagonal branch.
Bit and phase error rates are read off from Bell-state populations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .devices import PreparationAngles, prep_diag_matrix, prep_rect_matrix
from .exceptions import DegenerateBasisError, NumericalConsistencyError, OutOfModelError
from .quantum import (
    HADAMARD,
    IDENTITY,
    PAULI_X,
    PAULI_Z,
    apply_to_second,
    bell_populations,
    bell_state,
)

__all__ = [
    "PAULI_INDICES",
    "BRANCH_WEIGHT",
    "PauliChannel",
    "ErrorRates",
    "pauli_error",
    "rho_perfect",
    "rho_imperfect",
    "edp_error_rates",
    "imperfect_error_rates",
    "rate_coefficients",
    "closed_form_rates_family_a",
    "combined_qber",
    "invert_qber",
]

# (u, v) for the operator X^u Z^v, in the order p00, p01, p10, p11
PAULI_INDICES = ((0, 0), (0, 1), (1, 0), (1, 1))

# Each of the four (Alice, Bob) basis pairs has probability 1/4; after
# sifting the two surviving pairs carry 1/2 each.
BRANCH_WEIGHT = 0.5

_PROB_TOL = 1e-12
_NORM_TOL = 1e-10
_PHI1 = bell_state(1)


@dataclass(frozen=True)
class PauliChannel:
    """Probabilities of Eve applying ``X^u Z^v`` to the transmitted qubit."""

    p00: float
    p01: float
    p10: float
    p11: float

    def __post_init__(self):
        probs = [float(getattr(self, n)) for n in ("p00", "p01", "p10", "p11")]
        for name, p in zip(("p00", "p01", "p10", "p11"), probs):
            if not math.isfinite(p) or p < 0:
                raise ValueError(f"{name} must be a non-negative probability, got {p!r}")
            object.__setattr__(self, name, p)
        total = math.fsum(probs)
        if abs(total - 1.0) > _PROB_TOL:
            raise ValueError(f"Pauli probabilities must sum to 1, got {total!r}")

    @classmethod
    def from_sequence(cls, probs: Iterable[float]) -> PauliChannel:
        return cls(*probs)

    @classmethod
    def identity(cls) -> PauliChannel:
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def depolarizing(cls) -> PauliChannel:
        return cls(0.25, 0.25, 0.25, 0.25)

    def as_array(self) -> np.ndarray:
        return np.array([self.p00, self.p01, self.p10, self.p11])


@dataclass(frozen=True)
class ErrorRates:
    e_bit: float
    e_phase: float


def pauli_error(u: int, v: int) -> np.ndarray:
    """The matrix ``X^u Z^v``."""
    x = PAULI_X if u else IDENTITY
    z = PAULI_Z if v else IDENTITY
    return x @ z


def _branch_states(ops: np.ndarray) -> np.ndarray:
    """Rows ``(I ⊗ op)|phi_1>`` for a stack of ops, checked for unit norm, not renormalised."""
    psi = np.stack([apply_to_second(op, _PHI1) for op in ops])
    norms = np.sqrt(np.einsum("ki,ki->k", psi.conj(), psi).real)
    bad = np.abs(norms - 1.0) > _NORM_TOL
    if bad.any():
        raise NumericalConsistencyError(
            f"branch state has norm {norms[bad][0]!r}; encoding matrix columns are not unit vectors"
        )
    return psi


def _pauli_branches(rect_enc: np.ndarray, diag_enc: np.ndarray) -> np.ndarray:
    """Branch states indexed ``[pauli, basis]``; independent of the channel weights."""
    ops = []
    for u, v in PAULI_INDICES:
        err = pauli_error(u, v)
        ops += [IDENTITY @ err @ rect_enc, HADAMARD @ err @ diag_enc]
    return _branch_states(ops).reshape(4, 2, 4)


_PERFECT_BRANCHES = _pauli_branches(IDENTITY, HADAMARD)


def _sifted_state(channel: PauliChannel, branches: np.ndarray) -> np.ndarray:
    weights = channel.as_array() * BRANCH_WEIGHT
    return np.einsum("p,pbi,pbj->ij", weights, branches, branches.conj())


def rho_perfect(channel: PauliChannel) -> np.ndarray:
    """Joint state for ideal devices: Alice's encoding is I or H."""
    return _sifted_state(channel, _PERFECT_BRANCHES)


def rho_imperfect(channel: PauliChannel, prep: PreparationAngles) -> np.ndarray:
    """Joint state with Alice's tilted encoding matrices.

    Bob's virtual rotation stays perfect; his measurement tilt does not enter
    here and is accounted for separately through the detection flip rate.
    """
    return _sifted_state(channel, _pauli_branches(prep_rect_matrix(prep), prep_diag_matrix(prep)))


def edp_error_rates(rho: np.ndarray, trace_tol: float = 1e-10) -> ErrorRates:
    """Bit errors are |phi_2>, |phi_4> populations; phase errors |phi_3>, |phi_4>."""
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise NumericalConsistencyError(f"state trace is {tr.real!r}, expected 1")
    pops = bell_populations(rho)
    return ErrorRates(e_bit=pops[1] + pops[3], e_phase=pops[2] + pops[3])


def imperfect_error_rates(channel: PauliChannel, prep: PreparationAngles) -> ErrorRates:
    return edp_error_rates(rho_imperfect(channel, prep))


def rate_coefficients(prep: PreparationAngles) -> tuple[np.ndarray, np.ndarray]:
    """Per-Pauli-operator bit and phase error rates.

    Both rates are linear in the channel probabilities, so
    ``e_bit(p) = bit @ p`` and ``e_phase(p) = phase @ p``.
    """
    branches = _pauli_branches(prep_rect_matrix(prep), prep_diag_matrix(prep))
    bit = np.empty(4)
    phase = np.empty(4)
    for i in range(4):
        vertex = PauliChannel(*np.eye(4)[i])
        rates = edp_error_rates(_sifted_state(vertex, branches))
        bit[i], phase[i] = rates.e_bit, rates.e_phase
    return bit, phase


def closed_form_rates_family_a(channel: PauliChannel, a: float) -> ErrorRates:
    """Hand-reduced error rates for alpha1 = beta1 = beta2 = a, others zero."""
    p00, p01, p10, p11 = channel.as_array()
    c = math.cos(a)
    c2 = c * c
    s2 = math.sin(a) ** 2
    shared = (c2 * (p11 + p10) + s2 * (p00 + p01) + c * (-2 * p10 + 2 * p11)
              + p10 + 5 * p11) / 8
    e_bit = (c2 * (p11 + p10) + s2 * (p00 + p01) + c * (2 * p10 - 2 * p11)
             + 4 * p01 + p10 + p11) / 8 + shared
    e_phase = (c2 * (p00 + p01) + s2 * (p10 + p11) + c * (2 * p01 - 2 * p00)
               + 4 * p10 + p01 + p00) / 8 + shared
    return ErrorRates(e_bit=e_bit, e_phase=e_phase)


def combined_qber(e_bit: float, e_bit1: float) -> float:
    """Observed QBER when a distillation-level error and a detection flip compose.

    An error shows up when exactly one of the two stages flips the bit.
    """
    return 1 - (1 - e_bit1) * (1 - e_bit) - e_bit * e_bit1


def invert_qber(q: float, e_bit1: float) -> float:
    """Recover the distillation-level bit error rate from the observed QBER."""
    if e_bit1 >= 0.5:
        raise DegenerateBasisError(
            f"detection flip rate {e_bit1!r} >= 0.5 carries no bit information"
        )
    if q < e_bit1 - _PROB_TOL:
        raise OutOfModelError(
            f"observed QBER {q!r} is below the detection flip rate {e_bit1!r}; "
            "the device model cannot produce it"
        )
    return max(q - e_bit1, 0.0) / (1 - 2 * e_bit1)
