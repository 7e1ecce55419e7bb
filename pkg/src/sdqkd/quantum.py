"""Small dense linear algebra for one- and two-qubit objects.

Everything is a plain ``numpy`` complex array. Two-qubit vectors are ordered
``|00>, |01>, |10>, |11>`` where the first slot is Alice's kept qubit and the
second slot is the transmitted qubit, so ``tensor(identity, M)`` is an
operator acting on the transmitted half only.
"""

from __future__ import annotations

import numpy as np

from .exceptions import NumericalConsistencyError

__all__ = [
    "IDENTITY",
    "PAULI_X",
    "PAULI_Z",
    "HADAMARD",
    "standard_operator",
    "tensor",
    "apply_to_second",
    "bell_state",
    "bell_projection",
    "bell_populations",
    "projector",
    "is_unitary",
    "has_unit_columns",
    "is_hermitian",
    "check_density_matrix",
]


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.flags.writeable = False
    return arr


_SQRT_HALF = 1.0 / np.sqrt(2.0)
# populations closer than this to 0 or 1 are rounding residue of the 4x4 products
_POPULATION_SNAP = 1e-15

IDENTITY = _frozen([[1, 0], [0, 1]])
PAULI_X = _frozen([[0, 1], [1, 0]])
PAULI_Z = _frozen([[1, 0], [0, -1]])
HADAMARD = _frozen(np.array([[1, 1], [1, -1]]) * _SQRT_HALF)

_OPERATORS = {
    "identity": IDENTITY,
    "pauli_x": PAULI_X,
    "pauli_z": PAULI_Z,
    "hadamard": HADAMARD,
}

_BELL = (
    _frozen(np.array([1, 0, 0, 1]) * _SQRT_HALF),
    _frozen(np.array([0, 1, 1, 0]) * _SQRT_HALF),
    _frozen(np.array([1, 0, 0, -1]) * _SQRT_HALF),
    _frozen(np.array([0, 1, -1, 0]) * _SQRT_HALF),
)
_BELL_ROWS = _frozen(np.stack(_BELL))


def standard_operator(name: str) -> np.ndarray:
    """Return one of ``identity``, ``pauli_x``, ``pauli_z``, ``hadamard``."""
    try:
        return _OPERATORS[name]
    except KeyError:
        raise ValueError(
            f"unknown operator {name!r}; expected one of {sorted(_OPERATORS)}"
        ) from None


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product ``a ⊗ b`` with ``a`` on the first (Alice) slot."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def apply_to_second(op: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """``(I ⊗ op) psi`` for a two-qubit vector, without forming the 4x4 operator."""
    return (np.asarray(psi).reshape(2, 2) @ np.asarray(op).T).reshape(4)


def bell_state(k: int) -> np.ndarray:
    """Bell vector number ``k`` (1-based).

    1: (|00>+|11>)/√2, 2: (|01>+|10>)/√2, 3: (|00>-|11>)/√2, 4: (|01>-|10>)/√2.
    """
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or not 1 <= k <= 4:
        raise ValueError(f"Bell state index must be 1..4, got {k!r}")
    return _BELL[int(k) - 1]


def projector(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def _checked_population(value: complex, k: int, imag_tol: float) -> float:
    if abs(value.imag) > imag_tol:
        raise NumericalConsistencyError(
            f"Bell projection {k} has imaginary part {value.imag:.3e}; rho is not Hermitian"
        )
    real = value.real
    if real < -imag_tol or real > 1 + imag_tol:
        raise NumericalConsistencyError(f"Bell projection {k} = {real!r} outside [0, 1]")
    if real < _POPULATION_SNAP:
        return 0.0
    if real > 1 - _POPULATION_SNAP:
        return 1.0
    return real


def bell_projection(rho: np.ndarray, k: int, imag_tol: float = 1e-9) -> float:
    """Population ``<phi_k|rho|phi_k>`` of Bell state ``k``.

    Raises:
        NumericalConsistencyError: if the overlap has an imaginary part above
            ``imag_tol`` or falls outside [0, 1] by more than that amount.
    """
    phi = bell_state(k)
    return _checked_population(complex(phi.conj() @ np.asarray(rho) @ phi), k, imag_tol)


def bell_populations(rho: np.ndarray, imag_tol: float = 1e-9) -> tuple[float, ...]:
    """All four Bell populations at once, with the checks of :func:`bell_projection`."""
    diag = np.einsum("ki,ij,kj->k", _BELL_ROWS.conj(), np.asarray(rho), _BELL_ROWS)
    return tuple(_checked_population(complex(v), k, imag_tol) for k, v in enumerate(diag, 1))


def is_unitary(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    return bool(np.allclose(m.conj().T @ m, np.eye(m.shape[1]), rtol=0, atol=tol))


def has_unit_columns(m: np.ndarray, tol: float = 1e-12) -> bool:
    norms = np.linalg.norm(np.asarray(m), axis=0)
    return bool(np.all(np.abs(norms - 1.0) <= tol))


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    return bool(np.allclose(m, m.conj().T, rtol=0, atol=tol))


def check_density_matrix(
    rho: np.ndarray,
    hermitian_tol: float = 1e-12,
    eig_tol: float = 1e-10,
    trace_tol: float | None = 1e-10,
) -> np.ndarray:
    """Validate a 4x4 density matrix and return it as a complex array.

    Pass ``trace_tol=None`` to skip the unit-trace check.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise NumericalConsistencyError("density matrix has non-finite entries")
    if not is_hermitian(rho, hermitian_tol):
        raise NumericalConsistencyError("density matrix is not Hermitian")
    eigs = np.linalg.eigvalsh(rho)
    if eigs.min() < -eig_tol:
        raise NumericalConsistencyError(f"density matrix has eigenvalue {eigs.min():.3e}")
    if trace_tol is not None:
        tr = np.trace(rho)
        if abs(tr - 1.0) > trace_tol:
            raise NumericalConsistencyError(f"density matrix trace is {tr.real!r}, not 1")
    return rho
