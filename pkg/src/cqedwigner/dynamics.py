"""Qubit-resonator Hamiltonians, piecewise-constant drive schedules and frames.

Each drive segment is simulated in the frame co-rotating at its own drive
frequency ``omega_d`` for both subsystems (generator ``a^dag a + sigma_z/2``,
phase origin at absolute time 0). In that frame the segment Hamiltonian is
time independent and the propagator is exact. When consecutive segments use
different drive frequencies the state is moved between frames by the diagonal
unitary ``exp(i (w_new - w_old) (a^dag a + sigma_z/2) t)``.
"""

from __future__ import annotations

import enum
import functools
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .hilbert import (
    FrameTag,
    JointState,
    annihilation,
    expm_hermitian,
    number,
    pauli,
    sigma_minus,
    sigma_plus,
    tensor,
)

__all__ = [
    "RegimeWarning",
    "Engine",
    "SegmentLabel",
    "SystemParams",
    "DriveSegment",
    "FrameTag",
    "ScheduleDiagnostics",
    "jc_drive_hamiltonian",
    "effective_hamiltonian",
    "propagate",
    "frame_shift",
    "evolve_schedule",
    "dressing_unitary",
]

logger = logging.getLogger(__name__)

ADVISORY_RATIO = 0.1
RENORM_THRESHOLD = 1e-12


class RegimeWarning(UserWarning):
    """An approximation regime (charge, dispersive, ...) is not comfortably met."""


class Engine(str, enum.Enum):
    EXACT = "exact"
    EFFECTIVE = "effective"
    ANALYTIC = "analytic"

    @classmethod
    def parse(cls, value) -> "Engine":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown engine {value!r}") from None


class SegmentLabel(str, enum.Enum):
    DISPLACE = "displace"
    HALF_PI_PULSE = "half_pi_pulse"
    FREE_DISPERSIVE = "free_dispersive"
    CUSTOM = "custom"


@dataclass(frozen=True)
class SystemParams:
    """Resonator frequency, detuning ``omega0 - omega`` and coupling, all in units of omega."""

    delta: float
    g: float
    omega: float = 1.0

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError("coupling g must be positive")

    @property
    def omega0(self) -> float:
        return self.omega + self.delta

    @property
    def chi(self) -> float:
        """Dispersive shift ``g**2 / delta``."""
        if self.delta == 0:
            raise ValueError("dispersive shift undefined at zero detuning")
        return self.g ** 2 / self.delta


@dataclass(frozen=True)
class DriveSegment:
    omega_d: float
    epsilon: complex
    duration: float
    label: SegmentLabel = SegmentLabel.CUSTOM

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("segment duration must be non-negative")
        object.__setattr__(self, "epsilon", complex(self.epsilon))


@dataclass
class ScheduleDiagnostics:
    tail_populations: list[float] = field(default_factory=list)
    elapsed: float = 0.0
    max_norm_drift: float = 0.0

    @property
    def max_tail_population(self) -> float:
        return max(self.tail_populations, default=0.0)


def _frame_generator(n_fock: int) -> np.ndarray:
    """Diagonal of ``a^dag a + sigma_z / 2`` in the qubit-major basis."""
    n = np.arange(n_fock, dtype=float)
    return np.concatenate([n - 0.5, n + 0.5])


def jc_drive_hamiltonian(sys: SystemParams, seg: DriveSegment, n_fock: int) -> np.ndarray:
    """Jaynes-Cummings model plus resonator drive, in the frame rotating at ``seg.omega_d``.

    ``H = (w - wd) a^dag a + (w0 - wd) sz/2 + g (a^dag s- + a s+) + eps a^dag + eps* a``
    """
    a = annihilation(n_fock)
    ad = a.conj().T
    eye_f = np.eye(n_fock)
    eye_q = np.eye(2)
    H = (sys.omega - seg.omega_d) * tensor(eye_q, number(n_fock))
    H = H + 0.5 * (sys.omega0 - seg.omega_d) * tensor(pauli("z"), eye_f)
    H = H + sys.g * (tensor(sigma_minus(), ad) + tensor(sigma_plus(), a))
    eps = seg.epsilon
    if eps != 0:
        H = H + tensor(eye_q, eps * ad + np.conj(eps) * a)
    return H


def dispersive_ratio(sys: SystemParams, n_mean: float) -> float:
    """``|g sqrt(n + 1) / delta|``."""
    return abs(sys.g * np.sqrt(n_mean + 1.0) / sys.delta)


def effective_hamiltonian(sys: SystemParams, seg: DriveSegment, n_fock: int,
                          n_mean: float | None = None) -> np.ndarray:
    """Second-order dispersive Hamiltonian with drive, in the frame rotating at ``seg.omega_d``.

    ``H = (w - wd) a^dag a + (eps a^dag + h.c.) + Omega . sigma / 2`` with
    ``Omega = (2g/D eps_R, -2g/D eps_I, w0 - wd + g^2/D (2 a^dag a + 1))``.
    If ``n_mean`` is given a ``RegimeWarning`` is issued when the dispersive
    ratio exceeds 0.1.
    """
    if sys.delta == 0:
        raise ValueError("effective Hamiltonian requires nonzero detuning")
    if n_mean is not None and dispersive_ratio(sys, n_mean) > ADVISORY_RATIO:
        warnings.warn(
            f"dispersive ratio {dispersive_ratio(sys, n_mean):.3g} exceeds {ADVISORY_RATIO}",
            RegimeWarning,
            stacklevel=2,
        )
    a = annihilation(n_fock)
    ad = a.conj().T
    num = number(n_fock)
    eye_f = np.eye(n_fock)
    eye_q = np.eye(2)
    eps = seg.epsilon
    H = tensor(eye_q, (sys.omega - seg.omega_d) * num + eps * ad + np.conj(eps) * a)
    rabi = (sys.g / sys.delta) * (eps.real * pauli("x") - eps.imag * pauli("y"))
    H = H + tensor(rabi, eye_f)
    omega_z = (sys.omega0 - seg.omega_d) * eye_f + sys.chi * (2.0 * num + eye_f)
    H = H + 0.5 * tensor(pauli("z"), omega_z)
    return H


@functools.lru_cache(maxsize=16)
def dressing_unitary(sys: SystemParams, n_fock: int) -> np.ndarray:
    """Columns are the undriven Jaynes-Cummings eigenstates, labelled by bare states.

    Column ``|g,k>`` is ``cos t |g,k> - sin t |e,k-1>`` and column ``|e,k-1>`` is
    ``sin t |g,k> + cos t |e,k-1>`` with ``tan 2t = 2 g sqrt(k) / delta``, so each
    dressed state connects continuously to its bare label as ``g -> 0``.
    The returned array is read-only.
    """
    if sys.delta == 0:
        raise ValueError("dressed labels are ambiguous at zero detuning")
    U = np.eye(2 * n_fock, dtype=complex)
    for k in range(1, n_fock):
        theta = 0.5 * np.arctan(2 * sys.g * np.sqrt(k) / sys.delta)
        c, s = np.cos(theta), np.sin(theta)
        i, j = k, n_fock + k - 1
        U[i, i], U[j, i], U[i, j], U[j, j] = c, -s, s, c
    U.setflags(write=False)
    return U


@functools.lru_cache(maxsize=64)
def segment_propagator(sys: SystemParams, seg: DriveSegment, n_fock: int,
                       engine: Engine) -> np.ndarray:
    """Cached ``exp(-i H t)`` of one segment; the returned array is read-only."""
    if engine is Engine.EXACT:
        H = jc_drive_hamiltonian(sys, seg, n_fock)
    elif engine is Engine.EFFECTIVE:
        H = effective_hamiltonian(sys, seg, n_fock)
    else:
        raise ValueError(f"engine {engine} cannot propagate schedules")
    U = expm_hermitian(H, seg.duration)
    U.setflags(write=False)
    return U


def _renormalize(cols: np.ndarray) -> tuple[np.ndarray, float]:
    norms = np.linalg.norm(cols, axis=0)
    drift = float(np.max(np.abs(norms - 1.0)))
    if drift > RENORM_THRESHOLD:
        logger.debug("renormalizing state, norm drift %.3e", drift)
        cols = cols / norms
    return cols, drift


def propagate(H: np.ndarray, t: float, state: JointState) -> JointState:
    """Apply ``exp(-i H t)`` to ``state``; the frame tag and clock are left unchanged."""
    if t < 0:
        raise ValueError("propagation time must be non-negative")
    if H.shape != (state.amplitudes.size,) * 2:
        raise ValueError(
            f"Hamiltonian shape {H.shape} does not match state dimension {state.amplitudes.size}"
        )
    if t == 0:
        return state
    psi, _ = _renormalize((expm_hermitian(H, t) @ state.amplitudes)[:, None])
    return state.with_amplitudes(psi[:, 0])


def frame_shift(state: JointState, delta_freq: float, t: float) -> JointState:
    """Move ``state`` into the frame rotating ``delta_freq`` faster, at absolute time ``t``."""
    if delta_freq == 0:
        return state
    phases = np.exp(1j * delta_freq * t * _frame_generator(state.n_fock))
    frame = FrameTag(state.frame.rotation_frequency + delta_freq, state.frame.reference_time)
    return state.with_amplitudes(phases * state.amplitudes, frame=frame)


def evolve_columns(cols: np.ndarray, n_fock: int, frame_freq: float, time: float,
                   sys: SystemParams, segments, engine: Engine,
                   weights: np.ndarray | None = None):
    """Evolve the columns of ``cols`` (one joint ket each) through ``segments``.

    Returns ``(cols, frame_freq, time, diagnostics)``. ``weights`` (summing to
    one) combine the per-column tail populations into one diagnostic value.
    """
    engine = Engine.parse(engine)
    diag = ScheduleDiagnostics()
    if weights is None:
        weights = np.full(cols.shape[1], 1.0 / cols.shape[1])
    generator = _frame_generator(n_fock)
    for seg in segments:
        if seg.omega_d != frame_freq:
            shift = seg.omega_d - frame_freq
            cols = np.exp(1j * shift * time * generator)[:, None] * cols
            frame_freq = seg.omega_d
        if seg.duration > 0:
            U = segment_propagator(sys, seg, n_fock, engine)
            cols, drift = _renormalize(U @ cols)
            diag.max_norm_drift = max(diag.max_norm_drift, drift)
        time += seg.duration
        probs = np.abs(cols.reshape(2, n_fock, -1)) ** 2
        tails = probs[:, -2:, :].sum(axis=(0, 1))
        diag.tail_populations.append(float(weights @ tails))
    diag.elapsed = time
    return cols, frame_freq, time, diag


def evolve_schedule(state: JointState, sys: SystemParams, segments,
                    engine: Engine | str = Engine.EXACT):
    """Run a piecewise-constant drive schedule.

    Parameters
    ----------
    state : JointState
        Initial state; its frame tag and clock are honoured.
    sys : SystemParams
    segments : sequence of DriveSegment
    engine : Engine or str
        ``"exact"`` (Jaynes-Cummings + drive) or ``"effective"`` (dispersive).

    Returns
    -------
    (JointState, ScheduleDiagnostics)
        The final state sits in the frame of the last segment. Diagnostics
        record the top-two-Fock-level population after each segment and the
        absolute time at the end.
    """
    segments = list(segments)
    if not segments:
        raise ValueError("schedule must contain at least one segment")
    cols, freq, time, diag = evolve_columns(
        state.amplitudes[:, None], state.n_fock, state.frame.rotation_frequency,
        state.time, sys, segments, engine,
    )
    frame = FrameTag(freq, state.frame.reference_time)
    return state.with_amplitudes(cols[:, 0], frame=frame, time=time), diag
