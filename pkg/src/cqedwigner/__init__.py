"""Wigner-function tomography of a transmission-line resonator through a
permanently coupled Cooper-pair-box qubit.

Units: hbar = 1 and every frequency is measured in units of the resonator
frequency, so ``omega == 1`` and times are in units of ``1/omega``.
"""

from .hilbert import (
    TruncationWarning,
    JointState,
    annihilation,
    creation,
    number,
    parity,
    displacement,
    pauli,
    tensor,
    expm_hermitian,
    partial_trace_qubit,
)
from .dynamics import SystemParams, DriveSegment, FrameTag, Engine
from .protocol import ProtocolParams, TomographyOutcome, measure_wigner_point
from .states import fock, coherent, cat, wigner_direct, wigner_analytic


__all__ = [
    "TruncationWarning",
    "JointState",
    "annihilation",
    "creation",
    "number",
    "parity",
    "displacement",
    "pauli",
    "tensor",
    "expm_hermitian",
    "partial_trace_qubit",
    "SystemParams",
    "DriveSegment",
    "FrameTag",
    "Engine",
    "ProtocolParams",
    "TomographyOutcome",
    "measure_wigner_point",
    "fock",
    "coherent",
    "cat",
    "wigner_direct",
    "wigner_analytic",
]
