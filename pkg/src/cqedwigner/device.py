"""Cooper-pair box and transmission-line parameters.

Everything here may be used in physical units (pass ``hbar=scipy.constants.hbar``
and energies in joules) or in the package's natural units (``hbar=1``,
energies as angular frequencies in units of the resonator frequency).
``system_from_device`` is the one bridge between the two.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import constants

from .dynamics import RegimeWarning, SystemParams


@dataclass(frozen=True)
class CPBParams:
    E_C: float
    E_J0: float
    flux_ratio: float = 0.0
    n_g_dc: float = 0.5
    n_cut: int = 10

    def __post_init__(self):
        if self.E_C <= 0:
            raise ValueError("E_C must be positive")
        if self.E_J0 < 0:
            raise ValueError("E_J0 must be non-negative")
        if self.n_cut < 3:
            raise ValueError("n_cut must be >= 3")

    @property
    def E_J(self) -> float:
        return josephson_energy(self.E_J0, self.flux_ratio)


@dataclass(frozen=True)
class LineParams:
    """Resonator mode and gate capacitances (SI units)."""

    omega: float
    length_capacitance_product: float
    C_g: float
    C_Sigma: float

    def __post_init__(self):
        for name in ("omega", "length_capacitance_product", "C_g", "C_Sigma"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.C_g > self.C_Sigma:
            raise ValueError("C_g cannot exceed C_Sigma")


def josephson_energy(E_J0: float, flux_ratio: float) -> float:
    """Effective Josephson energy of the SQUID, ``2 E_J0 cos(pi Phi/Phi_0)``; sign kept."""
    return 2.0 * E_J0 * math.cos(math.pi * flux_ratio)


def qubit_frequency(E_C: float, E_J: float, n_g_dc: float, hbar: float = 1.0) -> float:
    """Two-level transition frequency of the box in the charge regime.

    Warns with ``RegimeWarning`` when ``E_C < 4 |E_J|``.
    """
    if E_C < 4.0 * abs(E_J):
        warnings.warn(
            f"charge regime not satisfied: E_C={E_C:.3g} < 4 E_J={4 * abs(E_J):.3g}",
            RegimeWarning,
            stacklevel=2,
        )
    return math.hypot(E_J, 4.0 * E_C * (1.0 - 2.0 * n_g_dc)) / hbar


def coupling_g(line: LineParams, hbar: float = constants.hbar,
               e: float = constants.e) -> float:
    """Vacuum Rabi coupling ``(e C_g / C_Sigma) sqrt(hbar omega / L c) / hbar`` in rad/s."""
    v_rms = math.sqrt(hbar * line.omega / line.length_capacitance_product)
    return e * line.C_g / line.C_Sigma * v_rms / hbar


def charge_hamiltonian(p: CPBParams, n_g: float | None = None) -> np.ndarray:
    """Box Hamiltonian ``4 E_C (n - n_g)^2 - E_J cos(theta)`` in the charge basis.

    The basis is ``n = -n_cut, ..., n_cut``; ``cos(theta)`` hops one Cooper pair,
    ``(|n><n+1| + |n+1><n|) / 2``.
    """
    n_g = p.n_g_dc if n_g is None else n_g
    charges = np.arange(-p.n_cut, p.n_cut + 1, dtype=float)
    hop = np.full(charges.size - 1, -p.E_J / 2.0)
    H = np.diag(4.0 * p.E_C * (charges - n_g) ** 2) + np.diag(hop, 1) + np.diag(hop, -1)
    return H.astype(complex)


def charge_gap(p: CPBParams, n_g: float | None = None) -> float:
    """Difference of the two lowest eigenvalues of ``charge_hamiltonian``."""
    evals = np.linalg.eigvalsh(charge_hamiltonian(p, n_g))
    return float(evals[1] - evals[0])


def bose_occupation(x: float) -> float:
    """``1 / (exp(x) - 1)`` for ``x = hbar omega / k T``."""
    if x <= 0:
        raise ValueError("hbar omega / kT must be positive")
    return float(1.0 / np.expm1(x))


def thermal_occupation(T: float, omega: float) -> float:
    """Mean thermal photon number of a mode at angular frequency ``omega`` (rad/s), temperature ``T`` (K)."""
    if T <= 0:
        raise ValueError("temperature must be positive")
    return bose_occupation(constants.hbar * omega / (constants.k * T))


def system_from_device(cpb: CPBParams, line: LineParams) -> SystemParams:
    """Express a physical device as dimensionless ``SystemParams`` (units of ``line.omega``).

    ``cpb`` energies are in joules.
    """
    omega0 = qubit_frequency(cpb.E_C, cpb.E_J, cpb.n_g_dc, hbar=constants.hbar)
    return SystemParams(
        delta=omega0 / line.omega - 1.0,
        g=coupling_g(line) / line.omega,
    )
