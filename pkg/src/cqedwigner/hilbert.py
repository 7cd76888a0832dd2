"""Dense operators on the truncated resonator space and on qubit x resonator.

Joint basis ordering is qubit-major::

    index = q * n_fock + n,    q = 0 <-> |g>,  q = 1 <-> |e>

so ``tensor(qubit_op, field_op)`` is ``np.kron(qubit_op, field_op)``.
Pauli matrices follow ``sigma_z |e> = +|e>``, ``sigma_z |g> = -|g>``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as la

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-10


class TruncationWarning(UserWarning):
    """The Fock truncation is probably too small for the requested amplitude."""


@dataclass(frozen=True)
class FrameTag:
    """Rotating frame shared by qubit and field.

    The frame rotates at ``rotation_frequency`` with generator
    ``a^dag a + sigma_z / 2`` and coincides with the lab frame at
    ``reference_time``.
    """

    rotation_frequency: float = 0.0
    reference_time: float = 0.0


@dataclass(frozen=True, eq=False)
class JointState:
    """Pure state of qubit x truncated field, tagged with its frame and clock."""

    amplitudes: np.ndarray
    n_fock: int
    frame: FrameTag = field(default_factory=FrameTag)
    time: float = 0.0
    norm_tolerance: float = NORM_TOL

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2 * self.n_fock,):
            raise ValueError(
                f"amplitudes must have length {2 * self.n_fock}, got {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > self.norm_tolerance:
            raise ValueError(f"state is not normalized (norm={norm:.3e})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def product(cls, qubit, field_state, **kwargs) -> "JointState":
        """``|qubit> (x) |field>``; ``qubit`` may be ``'g'``, ``'e'`` or a 2-vector."""
        if isinstance(qubit, str):
            qubit = {"g": [1.0, 0.0], "e": [0.0, 1.0]}[qubit]
        field_state = np.asarray(field_state, dtype=complex)
        return cls(np.kron(np.asarray(qubit, dtype=complex), field_state),
                   n_fock=field_state.shape[0], **kwargs)

    def with_amplitudes(self, amplitudes, **changes) -> "JointState":
        return replace(self, amplitudes=amplitudes, **changes)

    def populations(self) -> tuple[float, float]:
        """Return ``(P_e, P_g)``."""
        probs = np.abs(self.amplitudes) ** 2
        return float(probs[self.n_fock:].sum()), float(probs[:self.n_fock].sum())

    def fock_populations(self) -> np.ndarray:
        probs = np.abs(self.amplitudes.reshape(2, self.n_fock)) ** 2
        return probs.sum(axis=0)

    def project(self, qubit: str) -> tuple[np.ndarray, float]:
        """Project the qubit onto ``'g'`` or ``'e'``.

        Returns the normalized field vector and the outcome probability.
        """
        block = self.amplitudes.reshape(2, self.n_fock)[{"g": 0, "e": 1}[qubit]]
        prob = float(np.vdot(block, block).real)
        if prob == 0.0:
            return np.zeros_like(block), 0.0
        return block / np.sqrt(prob), prob


def _check_n_fock(n_fock: int) -> None:
    if int(n_fock) != n_fock or n_fock < 2:
        raise ValueError(f"n_fock must be an integer >= 2, got {n_fock}")


def annihilation(n_fock: int) -> np.ndarray:
    _check_n_fock(n_fock)
    return np.diag(np.sqrt(np.arange(1, n_fock, dtype=float)), k=1).astype(complex)


def creation(n_fock: int) -> np.ndarray:
    return annihilation(n_fock).conj().T


def number(n_fock: int) -> np.ndarray:
    _check_n_fock(n_fock)
    return np.diag(np.arange(n_fock, dtype=float)).astype(complex)


def parity(n_fock: int) -> np.ndarray:
    """``exp(-i pi a^dag a)``, i.e. ``diag((-1)**n)``."""
    _check_n_fock(n_fock)
    return np.diag((-1.0) ** np.arange(n_fock)).astype(complex)


def truncation_adequate(n_fock: int, alpha: complex) -> bool:
    r = abs(alpha)
    return r * r + 6.0 * r <= n_fock


def warn_truncation(n_fock: int, alpha: complex, stacklevel: int = 3) -> None:
    if not truncation_adequate(n_fock, alpha):
        warnings.warn(
            f"n_fock={n_fock} is small for |alpha|={abs(alpha):.3g}",
            TruncationWarning,
            stacklevel=stacklevel,
        )


def displacement(n_fock: int, alpha: complex) -> np.ndarray:
    """``D(alpha) = exp(alpha a^dag - conj(alpha) a)`` on the truncated space.

    Evaluated as ``exp(-i H)`` with the Hermitian ``H = i (alpha a^dag - conj(alpha) a)``.
    """
    warn_truncation(n_fock, alpha)
    if alpha == 0:
        return np.eye(n_fock, dtype=complex)
    a = annihilation(n_fock)
    gen = 1j * (alpha * a.conj().T - np.conj(alpha) * a)
    return expm_hermitian(gen, 1.0)


_PAULI = {
    # (g, e) ordering
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
    "z": np.array([[-1, 0], [0, 1]], dtype=complex),
}


def pauli(axis: str) -> np.ndarray:
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def sigma_plus() -> np.ndarray:
    """``|e><g|``."""
    return np.array([[0, 0], [1, 0]], dtype=complex)


def sigma_minus() -> np.ndarray:
    """``|g><e|``."""
    return np.array([[0, 1], [0, 0]], dtype=complex)


def tensor(qubit_op: np.ndarray, field_op: np.ndarray) -> np.ndarray:
    qubit_op = np.asarray(qubit_op)
    field_op = np.asarray(field_op)
    if qubit_op.shape != (2, 2):
        raise ValueError(f"qubit operator must be 2x2, got {qubit_op.shape}")
    if field_op.ndim != 2 or field_op.shape[0] != field_op.shape[1]:
        raise ValueError(f"field operator must be square, got {field_op.shape}")
    return np.kron(qubit_op, field_op)


def is_hermitian(mat: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    scale = max(1.0, float(np.max(np.abs(mat)))) if mat.size else 1.0
    return bool(np.max(np.abs(mat - mat.conj().T), initial=0.0) <= tol * scale)


def expm_hermitian(H: np.ndarray, t: float) -> np.ndarray:
    """Propagator ``exp(-i H t)`` from the eigendecomposition of Hermitian ``H``.

    Raises
    ------
    ValueError
        If ``H`` is not square or not Hermitian.
    numpy.linalg.LinAlgError
        If the eigensolver does not converge.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    if not is_hermitian(H):
        raise ValueError("expm_hermitian requires a Hermitian matrix")
    evals, evecs = la.eigh(H)
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def as_density_matrix(state) -> np.ndarray:
    """Accept a ket or a density matrix; return a density matrix."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state


def check_density_matrix(rho: np.ndarray) -> None:
    """Raise ``ValueError`` unless ``rho`` is a unit-trace Hermitian PSD matrix."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise ValueError(f"density matrix trace is {np.trace(rho).real:.12g}")
    if not is_hermitian(rho):
        raise ValueError("density matrix is not Hermitian")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise ValueError("density matrix has negative eigenvalues")


def partial_trace_qubit(state) -> np.ndarray:
    """Reduced field density matrix from a ``JointState``, joint ket or joint density matrix."""
    if isinstance(state, JointState):
        n = state.n_fock
        psi = state.amplitudes.reshape(2, n)
        return psi.T @ psi.conj()
    state = np.asarray(state, dtype=complex)
    dim = state.shape[0]
    if dim % 2:
        raise ValueError(f"joint dimension must be even, got {dim}")
    n = dim // 2
    if state.ndim == 1:
        psi = state.reshape(2, n)
        return psi.T @ psi.conj()
    if state.shape != (dim, dim):
        raise ValueError(f"expected a square joint density matrix, got {state.shape}")
    return np.einsum("qiqj->ij", state.reshape(2, n, 2, n))


def tail_population(field_probs: np.ndarray, levels: int = 2) -> float:
    """Population in the top ``levels`` Fock states."""
    return float(np.sum(field_probs[-levels:]))
