import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import constants

from cqedwigner.device import (
    CPBParams,
    LineParams,
    bose_occupation,
    charge_gap,
    charge_hamiltonian,
    coupling_g,
    josephson_energy,
    qubit_frequency,
    system_from_device,
    thermal_occupation,
)
from cqedwigner.dynamics import RegimeWarning

OMEGA = 2 * math.pi * 10e9


def test_josephson_energy():
    assert josephson_energy(0.7, 0) == pytest.approx(1.4)
    assert josephson_energy(1.0, 0.5) == pytest.approx(0, abs=1e-15)
    assert josephson_energy(1.0, 1 / 3) == pytest.approx(1.0)
    assert josephson_energy(1.0, 1.0) == pytest.approx(-2.0)


def test_qubit_frequency_examples():
    assert qubit_frequency(1.0, 0.2, 0.5) == pytest.approx(0.2)
    assert qubit_frequency(1.0, 0.0, 0.25) == pytest.approx(2.0)
    assert qubit_frequency(1.0, 0.1, 0.45) == pytest.approx(0.41231, abs=5e-6)
    assert qubit_frequency(1.0, 0.1, 0.45) == pytest.approx(math.sqrt(0.17), rel=1e-14)


def test_qubit_frequency_regime_warning():
    with pytest.warns(RegimeWarning):
        qubit_frequency(1.0, 0.5, 0.5)


def test_sweet_spot_minimum():
    grid = np.linspace(0, 1, 201)
    freqs = [qubit_frequency(1.0, 0.1, ng) for ng in grid]
    assert grid[int(np.argmin(freqs))] == pytest.approx(0.5)
    assert min(freqs) == pytest.approx(0.1)


def test_coupling_g_scaling():
    line = LineParams(OMEGA, 1e-12, 8.0e-17, 1e-15)
    g = coupling_g(line)
    doubled = coupling_g(LineParams(2 * OMEGA, 1e-12, 8.0e-17, 1e-15))
    assert doubled / g == pytest.approx(math.sqrt(2))
    tiny = coupling_g(LineParams(OMEGA, 1e-12, 1e-30, 1e-15))
    assert tiny / OMEGA < 1e-15


def test_coupling_g_table_value():
    # 1 pF line, C_g / C_Sigma = 0.0803 at 10 GHz
    line = LineParams(OMEGA, 1e-12, 8.03e-17, 1e-15)
    assert coupling_g(line) / OMEGA == pytest.approx(5e-3, rel=1e-3)


def test_line_params_validation():
    with pytest.raises(ValueError):
        LineParams(OMEGA, 1e-12, 2e-15, 1e-15)
    with pytest.raises(ValueError):
        CPBParams(E_C=1.0, E_J0=0.1, n_cut=2)


def test_charge_hamiltonian_diagonal_when_ej_zero():
    p = CPBParams(E_C=1.0, E_J0=0.0, n_g_dc=0.3, n_cut=4)
    H = charge_hamiltonian(p)
    n = np.arange(-4, 5)
    assert np.allclose(H, np.diag(4 * (n - 0.3) ** 2))


def test_charge_hamiltonian_structure():
    p = CPBParams(E_C=1.0, E_J0=0.05, n_cut=5)
    H = charge_hamiltonian(p)
    assert np.allclose(np.diag(H, 1), -p.E_J / 2)
    assert np.allclose(H, H.conj().T)
    assert np.count_nonzero(np.triu(H, 2)) == 0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 0.3))
def test_charge_reflection_symmetry(n_g, e_j):
    # n -> 1 - n shifts the charge window by one, so only the converged
    # low-lying levels are expected to agree
    p = CPBParams(E_C=1.0, E_J0=e_j / 2, n_cut=10)
    a = np.linalg.eigvalsh(charge_hamiltonian(p, n_g))[:6]
    b = np.linalg.eigvalsh(charge_hamiltonian(p, 1 - n_g))[:6]
    assert np.max(np.abs(a - b)) <= 1e-10
    # n -> -n keeps the window and is exact for the whole spectrum
    c = np.linalg.eigvalsh(charge_hamiltonian(p, -n_g))
    assert np.max(np.abs(np.linalg.eigvalsh(charge_hamiltonian(p, n_g)) - c)) <= 1e-10


def test_gap_matches_two_level_formula():
    p = CPBParams(E_C=1.0, E_J0=0.05, n_g_dc=0.45, n_cut=10)
    assert p.E_J == pytest.approx(0.1)
    gap = charge_gap(p)
    assert gap == pytest.approx(qubit_frequency(1.0, 0.1, 0.45), rel=0.01)


def test_gap_converges_in_n_cut():
    small = charge_gap(CPBParams(1.0, 0.05, n_g_dc=0.45, n_cut=10))
    large = charge_gap(CPBParams(1.0, 0.05, n_g_dc=0.45, n_cut=20))
    assert abs(small - large) / large < 1e-10


def test_thermal_occupation():
    omega = 0.480 * constants.k / constants.hbar
    assert thermal_occupation(0.1, omega) == pytest.approx(0.00830, abs=1e-5)
    assert bose_occupation(math.log(2)) == pytest.approx(1.0)
    assert bose_occupation(40) <= 1e-15
    with pytest.raises(ValueError):
        thermal_occupation(0.0, omega)


def test_system_from_device():
    # E_J = 1.1 hbar omega at the sweet spot puts the qubit 10% above the line
    hw = constants.hbar * OMEGA
    cpb = CPBParams(E_C=5 * hw, E_J0=0.55 * hw, n_g_dc=0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sys = system_from_device(cpb, LineParams(OMEGA, 1e-12, 8.03e-17, 1e-15))
    assert sys.delta == pytest.approx(0.1)
    assert sys.g == pytest.approx(5e-3, rel=1e-3)
