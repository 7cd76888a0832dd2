"""Four-step encoding of the resonator Wigner function into qubit populations.

Steps, starting from ``|g> (x) rho`` at absolute time 0:

1. drive at ``omega - g^2/delta`` with ``|eps_D|`` for ``t_D = |alpha| / |eps_D|``
   (displaces the field by ``alpha``),
2. pi/2 pulse at ``omega0`` with ``|eps_half| e^{i phi1}`` for ``t_half``,
3. free dispersive evolution for ``t_P = pi delta / (2 g^2)``,
4. pi/2 pulse at ``omega0`` with ``|eps_half| e^{i phi2}`` for ``t_half``.

Then ``P_e - P_g = sin(phi1 - phi2) Tr[rho D(beta)^dag P D(beta)]``, i.e.
``pi W(-beta) sin(phi1 - phi2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .dynamics import (
    DriveSegment,
    Engine,
    SegmentLabel,
    SystemParams,
    dressing_unitary,
    evolve_columns,
)
from .hilbert import (
    annihilation,
    check_density_matrix,
    displacement,
    as_density_matrix,
    pauli,
    warn_truncation,
)

OMEGA_GHZ = 10.0
UNRELIABLE_TAIL = 1e-4


def to_ns(t: float, omega_ghz: float = OMEGA_GHZ) -> float:
    """Convert a time in units of ``1/omega`` to nanoseconds, ``omega = 2 pi omega_ghz GHz``."""
    return t / (2.0 * math.pi * omega_ghz)


def eps_half_from_m(delta: float, g: float, m: int) -> float:
    """Pulse amplitude making ``t_half * delta / 2 = m pi``."""
    return delta ** 2 / (8.0 * m * g)


@dataclass(frozen=True)
class ProtocolParams:
    """Tomography parameters in units of the resonator frequency.

    Give either ``m`` (then ``eps_half_mag = delta^2 / (8 m g)``, which makes
    ``beta == alpha``) or an explicit ``eps_half_mag`` with ``m=None``.
    ``kappa_inv`` / ``gamma_inv`` are lifetimes in ns, carried as metadata.
    """

    sys: SystemParams
    eps_D: complex
    m: int | None = None
    eps_half_mag: float | None = None
    phi1: float = math.pi / 2
    phi2: float = 0.0
    n_fock: int = 64
    kappa_inv: float | None = None
    gamma_inv: float | None = None

    def __post_init__(self):
        if self.sys.delta == 0:
            raise ValueError("the protocol needs a nonzero detuning")
        if self.m is not None:
            if int(self.m) != self.m or self.m < 1:
                raise ValueError(f"m must be a positive integer, got {self.m}")
            derived = eps_half_from_m(self.sys.delta, self.sys.g, int(self.m))
            if self.eps_half_mag is not None and not math.isclose(
                self.eps_half_mag, derived, rel_tol=1e-12
            ):
                raise ValueError(
                    f"eps_half_mag={self.eps_half_mag} is inconsistent with m={self.m} "
                    f"(expected {derived})"
                )
            object.__setattr__(self, "eps_half_mag", derived)
        elif self.eps_half_mag is None or self.eps_half_mag <= 0:
            raise ValueError("either m or a positive eps_half_mag is required")
        object.__setattr__(self, "eps_D", complex(self.eps_D))

    @property
    def wigner_mode(self) -> bool:
        """False for generalized-quadrature runs (``phi1 - phi2 != pi/2``)."""
        return math.isclose(self.phi1 - self.phi2, math.pi / 2, abs_tol=1e-12)


class StepTimes(NamedTuple):
    t_D: float
    t_half: float
    t_P: float

    @property
    def total(self) -> float:
        return self.t_D + 2 * self.t_half + self.t_P


def step_times(p: ProtocolParams, alpha: complex) -> StepTimes:
    if abs(p.eps_D) == 0:
        raise ValueError("displacement drive amplitude is zero")
    delta, g = p.sys.delta, p.sys.g
    return StepTimes(
        t_D=abs(alpha) / abs(p.eps_D),
        t_half=math.pi * delta / (4.0 * g * p.eps_half_mag),
        t_P=math.pi * delta / (2.0 * g ** 2),
    )


def build_schedule(p: ProtocolParams, alpha: complex) -> list[DriveSegment]:
    t = step_times(p, alpha)
    sys = p.sys
    # -i * eps * t_D == alpha
    direction = 1j * alpha / abs(alpha) if alpha != 0 else 1.0
    return [
        DriveSegment(sys.omega - sys.chi, abs(p.eps_D) * direction, t.t_D,
                     SegmentLabel.DISPLACE),
        DriveSegment(sys.omega0, p.eps_half_mag * np.exp(1j * p.phi1), t.t_half,
                     SegmentLabel.HALF_PI_PULSE),
        DriveSegment(sys.omega0, 0.0, t.t_P, SegmentLabel.FREE_DISPERSIVE),
        DriveSegment(sys.omega0, p.eps_half_mag * np.exp(1j * p.phi2), t.t_half,
                     SegmentLabel.HALF_PI_PULSE),
    ]


def beta_of(p: ProtocolParams, alpha: complex) -> tuple[complex, float]:
    """Phase-space offset ``beta`` (W is sampled at ``-beta``) and its phase ``phi``."""
    t = step_times(p, alpha)
    delta, g = p.sys.delta, p.sys.g
    phi = (t.t_D + t.t_half / 2) * delta + g ** 2 * t.t_D / delta + math.pi / 2 - p.phi1
    if p.m is not None:
        # sin(m pi) vanishes identically
        return complex(alpha), phi
    shift = (2 * p.eps_half_mag / delta) * math.sin(t.t_half * delta / 2)
    return complex(alpha + shift * np.exp(-1j * phi)), phi


def _pulse_rotation(phi: float, angle: float = math.pi / 2) -> np.ndarray:
    """``exp(-i angle n.sigma / 2)`` with axis ``n = (cos phi, -sin phi, 0)``."""
    n_sigma = math.cos(phi) * pauli("x") - math.sin(phi) * pauli("y")
    return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * n_sigma


def _pulse_field_unitary(p: ProtocolParams, eps: complex, duration: float) -> np.ndarray:
    delta = p.sys.delta
    alpha_pulse = -eps * (1 - np.exp(-1j * delta * duration)) / delta
    n = np.arange(p.n_fock)
    return np.exp(1j * delta * duration * n)[:, None] * displacement(p.n_fock, alpha_pulse)


def analytic_total_unitary(p: ProtocolParams, alpha: complex) -> np.ndarray:
    """Closed-form encoding unitary ``U4 U3 U2 U_frame U1`` on the joint space."""
    t = step_times(p, alpha)
    delta, g = p.sys.delta, p.sys.g
    N = p.n_fock
    n = np.arange(N, dtype=float)
    sz = np.array([-1.0, 1.0])

    u1 = np.kron(np.eye(2), displacement(N, alpha))
    gen = (n[None, :] + sz[:, None] / 2).ravel()
    u_frame = np.exp(1j * (delta + g ** 2 / delta) * gen * t.t_D)
    eps1 = p.eps_half_mag * np.exp(1j * p.phi1)
    eps2 = p.eps_half_mag * np.exp(1j * p.phi2)
    u2 = np.kron(_pulse_rotation(p.phi1), _pulse_field_unitary(p, eps1, t.t_half))
    u3 = (np.exp(1j * math.pi * delta ** 2 / (2 * g ** 2) * n)[None, :]
          * np.exp(-1j * (math.pi / 2) * np.outer(sz, n + 0.5))).ravel()
    u4 = np.kron(_pulse_rotation(p.phi2), _pulse_field_unitary(p, eps2, t.t_half))
    return u4 @ (u3[:, None] * (u2 @ (u_frame[:, None] * u1)))


@dataclass
class RegimeCheck:
    name: str
    ratio: float

    @property
    def status(self) -> str:
        if self.ratio <= 0.1:
            return "ok"
        if self.ratio <= 0.5:
            return "marginal"
        return "violated"


@dataclass
class RegimeReport:
    n_mean: float
    checks: dict[str, RegimeCheck] = field(default_factory=dict)

    @property
    def worst(self) -> str:
        order = ["ok", "marginal", "violated"]
        return max((c.status for c in self.checks.values()), key=order.index, default="ok")

    def ratios(self) -> dict[str, float]:
        return {k: c.ratio for k, c in self.checks.items()}

    def as_dict(self) -> dict:
        return {
            "n_mean": self.n_mean,
            "checks": {k: {"ratio": c.ratio, "status": c.status} for k, c in self.checks.items()},
            "worst": self.worst,
        }


def displaced_mean_photons(rho_field: np.ndarray, alpha: complex) -> float:
    """Mean photon number of ``D(alpha) rho D(alpha)^dag``."""
    N = rho_field.shape[0]
    a = annihilation(N)
    n_mean = float(np.real(np.sum(np.arange(N) * np.diag(rho_field))))
    a_mean = complex(np.trace(rho_field @ a))
    return n_mean + 2 * (np.conj(alpha) * a_mean).real + abs(alpha) ** 2


def validate_regime(p: ProtocolParams, rho_field, alpha: complex) -> RegimeReport:
    """Ratios of each approximation condition, evaluated at the displaced photon number.

    A ratio ``<= 0.1`` is ``ok``, ``<= 0.5`` ``marginal``, otherwise ``violated``.
    """
    rho = as_density_matrix(rho_field)
    delta, g = p.sys.delta, p.sys.g
    nbar = displaced_mean_photons(rho, alpha)
    half_pi_room = p.eps_half_mag / g - 0.5
    report = RegimeReport(n_mean=nbar)
    report.checks["dispersive"] = RegimeCheck(
        "dispersive", abs(g * math.sqrt(nbar + 1) / delta))
    report.checks["displacement_drive"] = RegimeCheck(
        "displacement_drive", abs(p.eps_D) / (g + delta ** 2 / (2 * g)))
    report.checks["half_pi_pulse"] = RegimeCheck(
        "half_pi_pulse", nbar / half_pi_room if half_pi_room > 0 else math.inf)
    return report


@dataclass
class TomographyOutcome:
    point: complex
    p_e: float
    p_g: float
    w_est: float
    beta: complex
    tail_population: float
    duration: float
    regime: RegimeReport
    engine: Engine

    @property
    def unreliable(self) -> bool:
        return self.tail_population > UNRELIABLE_TAIL

    @property
    def duration_ns(self) -> float:
        return to_ns(self.duration)


def _populations_analytic(p: ProtocolParams, rho: np.ndarray, alpha: complex):
    N = p.n_fock
    U = analytic_total_unitary(p, alpha)
    M = U[:, :N]  # qubit starts in |g>
    final = M @ rho @ M.conj().T
    d = np.real(np.diag(final))
    field_probs = d[:N] + d[N:]
    return float(d[N:].sum()), float(d[:N].sum()), float(field_probs[-2:].sum())


def _populations_schedule(p: ProtocolParams, rho: np.ndarray, alpha: complex,
                          engine: Engine, basis: str):
    N = p.n_fock
    weights, vecs = np.linalg.eigh(rho)
    keep = weights > 1e-14
    weights = weights[keep] / weights[keep].sum()
    cols = np.zeros((2 * N, weights.size), dtype=complex)
    cols[:N] = vecs[:, keep]
    dressed = engine is Engine.EXACT and basis == "dressed"
    if dressed:
        U = dressing_unitary(p.sys, N)
        cols = U @ cols
    segments = build_schedule(p, alpha)
    cols, _, _, diag = evolve_columns(
        cols, N, segments[0].omega_d, 0.0, p.sys, segments, engine, weights=weights,
    )
    if dressed:
        cols = U.conj().T @ cols
    probs = np.abs(cols) ** 2 @ weights
    return float(probs[N:].sum()), float(probs[:N].sum()), diag.max_tail_population


def measure_wigner_point(rho_field, p: ProtocolParams, alpha: complex,
                         engine: Engine | str = Engine.EXACT,
                         basis: str = "dressed") -> TomographyOutcome:
    """Simulate one run of the protocol and read out ``W(-beta) = (P_e - P_g) / pi``.

    ``rho_field`` is a field ket or density matrix on ``p.n_fock`` levels; the
    qubit starts in ``|g>``. Outcomes whose truncation tail exceeds 1e-4 are
    flagged ``unreliable`` but still returned.

    ``basis`` only affects the exact engine. With ``"dressed"`` the initial
    ``|g> (x) rho`` and the final qubit populations refer to the undriven
    Jaynes-Cummings eigenstates, the frame in which the dispersive model (and
    the readout relation above) holds. ``"bare"`` uses the uncoupled product
    basis, which adds an error of first order in ``g sqrt(n) / delta``.
    """
    engine = Engine.parse(engine)
    if basis not in ("dressed", "bare"):
        raise ValueError(f"basis must be 'dressed' or 'bare', got {basis!r}")
    rho = as_density_matrix(rho_field)
    if rho.shape != (p.n_fock, p.n_fock):
        raise ValueError(f"field state has dimension {rho.shape[0]}, expected {p.n_fock}")
    check_density_matrix(rho)
    warn_truncation(p.n_fock, alpha)
    if engine is Engine.ANALYTIC:
        p_e, p_g, tail = _populations_analytic(p, rho, alpha)
    else:
        p_e, p_g, tail = _populations_schedule(p, rho, alpha, engine, basis)
    beta, _ = beta_of(p, alpha)
    return TomographyOutcome(
        point=-beta,
        p_e=p_e,
        p_g=p_g,
        w_est=(p_e - p_g) / math.pi,
        beta=beta,
        tail_population=tail,
        duration=step_times(p, alpha).total,
        regime=validate_regime(p, rho, alpha),
        engine=engine,
    )
