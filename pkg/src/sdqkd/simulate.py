"""Pulse-by-pulse Monte Carlo of prepare-and-measure BB84 with tilted devices.

Per pulse Alice draws a bit and a basis, emits the corresponding column of
her encoding matrix, the channel applies ``X^u Z^v`` with probability
``p_uv``, an optional intercept-resend eavesdropper measures in the ideal
rectilinear basis and resends, and Bob measures in a random basis with the
renormalised two-outcome rule. Matching-basis pulses are kept.

Pulses are generated in fixed-size blocks, each with its own child seed of
the run seed, so the result depends only on ``(config, seed)`` and not on
how blocks are scheduled across workers.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .devices import (
    DeviceModel,
    detection_flip_rate,
    meas_vectors,
    prep_diag_matrix,
    prep_rect_matrix,
    two_outcome_probability,
)
from .edp import PAULI_INDICES, PauliChannel, combined_qber, imperfect_error_rates, pauli_error

__all__ = [
    "Eve",
    "ProtocolConfig",
    "SimResult",
    "BLOCK_SIZE",
    "outcome_tables",
    "expected_qber",
    "analytic_qber",
    "run_protocol",
    "intercept_resend",
]

BLOCK_SIZE = 1 << 16

_RECT_KETS = (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex))


class Eve(str, enum.Enum):
    NONE = "none"
    INTERCEPT_RESEND_RECT = "intercept_resend_rect"


@dataclass(frozen=True)
class ProtocolConfig:
    n_pulses: int
    seed: int = 0
    model: DeviceModel = field(default_factory=DeviceModel)
    channel: PauliChannel = field(default_factory=PauliChannel.identity)
    eve: Eve = Eve.NONE

    def __post_init__(self):
        if int(self.n_pulses) != self.n_pulses or self.n_pulses < 1:
            raise ValueError(f"n_pulses must be a positive integer, got {self.n_pulses!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        object.__setattr__(self, "n_pulses", int(self.n_pulses))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "eve", Eve(self.eve))


@dataclass(frozen=True)
class SimResult:
    n_pulses: int
    sifted: int
    errors: int

    @property
    def qber(self) -> float:
        return self.errors / self.sifted if self.sifted else 0.0

    @property
    def stderr(self) -> float:
        """Binomial standard error of :attr:`qber`."""
        if not self.sifted:
            return 0.0
        q = self.qber
        return math.sqrt(q * (1 - q) / self.sifted)

    def __add__(self, other: SimResult) -> SimResult:
        return SimResult(self.n_pulses + other.n_pulses, self.sifted + other.sifted,
                         self.errors + other.errors)


@dataclass(frozen=True)
class _Tables:
    # bob_one[alice_basis, bit, pauli, bob_basis]: P(Bob reads 1), no Eve
    bob_one: np.ndarray
    # eve_one[alice_basis, bit, pauli]: P(Eve reads 1 in the ideal rectilinear basis)
    eve_one: np.ndarray
    # resent_one[eve_bit, bob_basis]: P(Bob reads 1) on Eve's resent state
    resent_one: np.ndarray
    pauli_cdf: np.ndarray


def outcome_tables(model: DeviceModel, channel: PauliChannel) -> _Tables:
    """Born-rule lookup tables for every discrete branch of a pulse."""
    encoders = (prep_rect_matrix(model.prep), prep_diag_matrix(model.prep))
    vecs = meas_vectors(model.meas)
    paulis = [pauli_error(u, v) for u, v in PAULI_INDICES]

    bob_one = np.empty((2, 2, 4, 2))
    eve_one = np.empty((2, 2, 4))
    for basis, enc in enumerate(encoders):
        for bit in (0, 1):
            for k, err in enumerate(paulis):
                state = err @ enc[:, bit]
                for bob_basis in (0, 1):
                    bob_one[basis, bit, k, bob_basis] = two_outcome_probability(
                        state, *vecs.basis(bool(bob_basis)))
                eve_one[basis, bit, k] = two_outcome_probability(state, *_RECT_KETS)
    resent_one = np.array([[two_outcome_probability(ket, *vecs.basis(bool(b)))
                            for b in (0, 1)] for ket in _RECT_KETS])
    cdf = np.cumsum(channel.as_array())
    cdf[-1] = 1.0
    return _Tables(bob_one, eve_one, resent_one, cdf)


def expected_qber(model: DeviceModel, channel: PauliChannel, eve: Eve | str = Eve.NONE) -> float:
    """Exact sifted QBER of the simulated process, by enumerating all branches."""
    t = outcome_tables(model, channel)
    probs = channel.as_array()
    eve = Eve(eve)
    total = 0.0
    for basis in (0, 1):
        for bit in (0, 1):
            for k in range(4):
                if eve is Eve.NONE:
                    p_one = t.bob_one[basis, bit, k, basis]
                else:
                    e1 = t.eve_one[basis, bit, k]
                    p_one = (1 - e1) * t.resent_one[0, basis] + e1 * t.resent_one[1, basis]
                p_err = p_one if bit == 0 else 1 - p_one
                total += 0.25 * probs[k] * p_err
    return total


def analytic_qber(model: DeviceModel, channel: PauliChannel) -> float:
    """QBER predicted by the entanglement-based analysis plus the detector flip rate."""
    e_bit = imperfect_error_rates(channel, model.prep).e_bit
    return combined_qber(e_bit, detection_flip_rate(model.meas))


def _run_block(tables: _Tables, eve: Eve, seed: int, index: int, size: int) -> SimResult:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
    choice = rng.integers(0, 8, size=size, dtype=np.uint8)
    bit = choice & 1
    alice_basis = (choice >> 1) & 1
    bob_basis = choice >> 2
    pauli = np.searchsorted(tables.pauli_cdf, rng.random(size), side="right")
    np.minimum(pauli, 3, out=pauli)

    if eve is Eve.NONE:
        p_one = tables.bob_one[alice_basis, bit, pauli, bob_basis]
    else:
        eve_bit = (rng.random(size) < tables.eve_one[alice_basis, bit, pauli]).astype(np.intp)
        p_one = tables.resent_one[eve_bit, bob_basis]
    bob_bit = rng.random(size) < p_one

    sifted = alice_basis == bob_basis
    errors = sifted & (bob_bit != bit.astype(bool))
    return SimResult(size, int(np.count_nonzero(sifted)), int(np.count_nonzero(errors)))


def run_protocol(config: ProtocolConfig, workers: int = 1) -> SimResult:
    """Simulate ``config.n_pulses`` pulses and count sifted bits and errors.

    Raises:
        DegenerateBasisError: a measurement basis cannot discriminate its inputs.
    """
    tables = outcome_tables(config.model, config.channel)
    n_blocks, last = divmod(config.n_pulses, BLOCK_SIZE)
    sizes = [BLOCK_SIZE] * n_blocks + ([last] if last else [])
    jobs = [(tables, config.eve, config.seed, i, s) for i, s in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _run_block(*job), jobs))
    else:
        parts = [_run_block(*job) for job in jobs]
    total = SimResult(0, 0, 0)
    for part in parts:
        total = total + part
    return total


def intercept_resend(config: ProtocolConfig, workers: int = 1) -> SimResult:
    """Run the protocol with Eve measuring every pulse rectilinearly and resending."""
    if config.eve is not Eve.INTERCEPT_RESEND_RECT:
        raise ValueError("intercept_resend requires eve='intercept_resend_rect'")
    return run_protocol(config, workers=workers)
