"""Field states, Wigner functions and simulated state preparation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import eval_laguerre, gammaln

from .dynamics import DriveSegment, Engine, SegmentLabel, SystemParams, evolve_columns
from .hilbert import (
    annihilation,
    as_density_matrix,
    displacement,
    partial_trace_qubit,
    warn_truncation,
)
from .protocol import (
    ProtocolParams,
    analytic_total_unitary,
    build_schedule,
    step_times,
)

IMAG_TOL = 1e-10


def fock(n: int, n_fock: int) -> np.ndarray:
    if not 0 <= n < n_fock:
        raise ValueError(f"Fock level {n} outside truncation {n_fock}")
    vec = np.zeros(n_fock, dtype=complex)
    vec[n] = 1.0
    return vec


def coherent(alpha: complex, n_fock: int) -> np.ndarray:
    """Coherent state from its Fock amplitudes, renormalized after truncation."""
    warn_truncation(n_fock, alpha)
    vec = _coherent_unnormalized(alpha, n_fock)
    return vec / np.linalg.norm(vec)


def _sign_value(sign) -> int:
    if sign in ("+", 1, +1.0):
        return 1
    if sign in ("-", -1, -1.0):
        return -1
    raise ValueError(f"cat sign must be '+' or '-', got {sign!r}")


def cat_norm_sq(alpha0: complex, relative_phase: float = 0.0, sign="-") -> float:
    """Squared norm of ``|alpha0> + sign e^{i phi} |-alpha0>``."""
    s = _sign_value(sign)
    return 2.0 * (1.0 + s * math.exp(-2 * abs(alpha0) ** 2) * math.cos(relative_phase))


def cat(alpha0: complex, relative_phase: float = 0.0, sign="-", n_fock: int = 128) -> np.ndarray:
    """Normalized ``(|alpha0> + sign e^{i phi} |-alpha0>) / N``."""
    s = _sign_value(sign)
    warn_truncation(n_fock, alpha0)
    n = np.arange(n_fock)
    # |-a> has amplitudes (-1)^n times those of |a>
    base = _coherent_unnormalized(alpha0, n_fock)
    vec = base * (1.0 + s * np.exp(1j * relative_phase) * (-1.0) ** n)
    norm = np.linalg.norm(vec)
    if norm < 1e-14:
        raise ValueError("cat state vanishes for these parameters")
    return vec / norm


def _coherent_unnormalized(alpha: complex, n_fock: int) -> np.ndarray:
    if alpha == 0:
        return fock(0, n_fock)
    n = np.arange(n_fock)
    log_mag = -abs(alpha) ** 2 / 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag + 1j * n * np.angle(alpha))


def wigner_direct(rho, alpha: complex) -> float:
    """``(1/pi) Tr[rho D(alpha) P D(alpha)^dag]`` by matrix evaluation."""
    rho = as_density_matrix(rho)
    N = rho.shape[0]
    D = displacement(N, alpha)
    shifted = D.conj().T @ rho @ D
    val = np.sum(np.diag(shifted) * (-1.0) ** np.arange(N)) / math.pi
    if abs(val.imag) > IMAG_TOL:
        raise ArithmeticError(f"Wigner value has imaginary part {val.imag:.3e}")
    return float(val.real)


def _coherent_cross_term(b1: complex, b2: complex, alpha: complex) -> complex:
    """``<b2| D(alpha) P D(alpha)^dag |b1>`` for coherent states."""
    x = 2 * alpha - b1
    overlap = np.exp(-abs(b2) ** 2 / 2 - abs(x) ** 2 / 2 + np.conj(b2) * x)
    return np.exp(np.conj(alpha) * b1 - alpha * np.conj(b1)) * overlap


def _superposition_wigner(amps, centers, alpha: complex) -> float:
    total = 0j
    for cj, bj in zip(amps, centers):
        for ck, bk in zip(amps, centers):
            total += cj * np.conj(ck) * _coherent_cross_term(bj, bk, alpha)
    return float(total.real) / math.pi


def wigner_analytic(kind: str, params: dict | None, alpha: complex) -> float:
    """Closed-form Wigner functions.

    ``kind`` is one of ``vacuum``, ``coherent`` (``params={'alpha': a}``),
    ``fock`` (``{'n': n}``) or ``cat`` (``{'alpha0': a0, 'relative_phase': phi,
    'sign': '+'|'-'}``).
    """
    params = params or {}
    if kind == "vacuum":
        return math.exp(-2 * abs(alpha) ** 2) / math.pi
    if kind == "coherent":
        return math.exp(-2 * abs(alpha - params["alpha"]) ** 2) / math.pi
    if kind == "fock":
        n = int(params["n"])
        r2 = abs(alpha) ** 2
        return (-1) ** n * eval_laguerre(n, 4 * r2) * math.exp(-2 * r2) / math.pi
    if kind == "cat":
        a0 = complex(params["alpha0"])
        phi = float(params.get("relative_phase", 0.0))
        sign = params.get("sign", "-")
        norm = math.sqrt(cat_norm_sq(a0, phi, sign))
        amps = [1 / norm, _sign_value(sign) * np.exp(1j * phi) / norm]
        return _superposition_wigner(amps, [a0, -a0], alpha)
    raise ValueError(f"unsupported state kind {kind!r}")


@dataclass
class PreparedState:
    field: np.ndarray
    fidelity_vs_target: float
    duration: float
    success_probability: float = 1.0
    details: dict = field(default_factory=dict)


def _field_fidelity(rho_field: np.ndarray, target: np.ndarray) -> float:
    val = float(np.real(np.vdot(target, rho_field @ target)))
    return min(max(val, 0.0), 1.0)


def _run(cols: np.ndarray, sys: SystemParams, segments, engine, n_fock: int,
         frame_freq: float | None = None, time: float = 0.0):
    if frame_freq is None:
        frame_freq = segments[0].omega_d
    return evolve_columns(cols, n_fock, frame_freq, time, sys, segments, engine)


def prepare_coherent(p: ProtocolParams, alpha: complex,
                     engine: Engine | str = Engine.EXACT) -> PreparedState:
    """Displace ``|g, 0>`` with the step-1 drive and compare the field with ``|alpha>``.

    The fidelity is evaluated in the displacement drive's rotating frame.
    """
    N = p.n_fock
    seg = build_schedule(p, alpha)[0]
    cols = np.kron([1.0, 0.0], fock(0, N))[:, None]
    cols, _, time, diag = _run(cols, p.sys, [seg], engine, N)
    rho = partial_trace_qubit(cols[:, 0])
    return PreparedState(
        field=rho,
        fidelity_vs_target=_field_fidelity(rho, coherent(alpha, N)),
        duration=time,
        details={"tail_population": diag.max_tail_population},
    )


def fock_pi_amplitude(sys: SystemParams, m_pi: int) -> float:
    """pi-pulse amplitude with ``t_pi * delta / 2 = m_pi * pi``."""
    return sys.delta ** 2 / (4.0 * m_pi * sys.g)


def prepare_fock_one(p: ProtocolParams, eps_pi_mag: float | None = None, m_pi: int = 15,
                     engine: Engine | str = Engine.EXACT) -> PreparedState:
    """pi pulse on ``|g, 0>``, sudden tuning to resonance, vacuum-Rabi half period, tune back.

    The flux switches are instantaneous parameter changes. Returns the field
    state and its population of ``|1>``.
    """
    sys, N = p.sys, p.n_fock
    expected = fock_pi_amplitude(sys, m_pi)
    if eps_pi_mag is None:
        eps_pi_mag = expected
    elif not math.isclose(eps_pi_mag, expected, rel_tol=1e-9):
        raise ValueError(
            f"|eps_pi|={eps_pi_mag} is inconsistent with m_pi={m_pi} (expected {expected})"
        )
    t_pi = math.pi * sys.delta / (2 * sys.g * eps_pi_mag)
    t_ra = math.pi / (2 * sys.g)
    pulse = DriveSegment(sys.omega0, eps_pi_mag, t_pi, SegmentLabel.CUSTOM)
    cols = np.kron([1.0, 0.0], fock(0, N))[:, None]
    cols, freq, time, _ = _run(cols, sys, [pulse], engine, N)
    resonant = SystemParams(delta=0.0, g=sys.g, omega=sys.omega)
    rabi = DriveSegment(resonant.omega0, 0.0, t_ra, SegmentLabel.CUSTOM)
    # the dispersive model has no resonant limit
    cols, freq, time, _ = _run(cols, resonant, [rabi], Engine.EXACT, N, freq, time)
    rho = partial_trace_qubit(cols[:, 0])
    return PreparedState(
        field=rho,
        fidelity_vs_target=_field_fidelity(rho, fock(1, N)),
        duration=time,
        details={"t_pi": t_pi, "t_ra": t_ra, "eps_pi": eps_pi_mag, "m_pi": m_pi},
    )


def _best_cat_fit(psi: np.ndarray, alpha0_mag: float, sign) -> tuple[float, complex, float]:
    """Maximize ``|<cat|psi>|^2`` over the cat's orientation and relative phase.

    Returns ``(fidelity, fitted_alpha0, fitted_relative_phase)``.
    """
    N = psi.size
    if alpha0_mag == 0:
        vac = fock(0, N)
        return (abs(np.vdot(vac, psi)) ** 2 if _sign_value(sign) > 0 else 0.0), 0j, 0.0
    a = annihilation(N)
    a2 = complex(np.vdot(psi, a @ (a @ psi)))
    theta0 = np.angle(a2) / 2

    def infidelity(x):
        theta, phi = x
        try:
            target = cat(alpha0_mag * np.exp(1j * theta), phi, sign, N)
        except ValueError:
            return 1.0
        return 1.0 - abs(np.vdot(target, psi)) ** 2

    # coarse scan over the relative phase, then polish both angles
    phis = np.linspace(0, 2 * np.pi, 24, endpoint=False)
    phi0 = phis[np.argmin([infidelity((theta0, ph)) for ph in phis])]
    res = optimize.minimize(infidelity, x0=[theta0, phi0], method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 2000})
    theta, phi = res.x
    return 1.0 - float(res.fun), alpha0_mag * np.exp(1j * theta), float(np.mod(phi, 2 * np.pi))


@dataclass
class CatPreparation:
    even: PreparedState  # qubit found in |e>
    odd: PreparedState   # qubit found in |g>

    @property
    def total_probability(self) -> float:
        return self.even.success_probability + self.odd.success_probability


def prepare_cat(p: ProtocolParams, alpha0: complex,
                engine: Engine | str = Engine.EXACT) -> CatPreparation:
    """Run the encoding on ``|g> (x) |alpha0>`` (no displacement step) and read the qubit.

    Each outcome's field is compared with the closest cat of amplitude
    ``|alpha0|``; orientation and relative phase are fitted and reported.
    """
    engine = Engine.parse(engine)
    N = p.n_fock
    psi0 = np.kron([1.0, 0.0], coherent(alpha0, N))
    if engine is Engine.ANALYTIC:
        final = analytic_total_unitary(p, 0.0) @ psi0
    else:
        cols, _, _, _ = _run(psi0[:, None], p.sys, build_schedule(p, 0.0), engine, N)
        final = cols[:, 0]
    blocks = final.reshape(2, N)
    duration = step_times(p, 0.0).total
    outcomes = {}
    for key, block, sign in (("even", blocks[1], "+"), ("odd", blocks[0], "-")):
        prob = float(np.vdot(block, block).real)
        if prob < 1e-14:
            outcomes[key] = PreparedState(np.zeros((N, N), complex), 0.0, duration, prob)
            continue
        psi = block / math.sqrt(prob)
        fid, a_fit, phi_fit = _best_cat_fit(psi, abs(alpha0), sign)
        outcomes[key] = PreparedState(
            field=np.outer(psi, psi.conj()),
            fidelity_vs_target=min(max(fid, 0.0), 1.0),
            duration=duration,
            success_probability=prob,
            details={"fitted_alpha0": a_fit, "fitted_relative_phase": phi_fit, "sign": sign},
        )
    return CatPreparation(**outcomes)
