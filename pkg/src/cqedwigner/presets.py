"""Published device parameter sets (units of the resonator frequency, lifetimes in ns)."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dynamics import SystemParams
from .protocol import ProtocolParams


@dataclass(frozen=True)
class Preset:
    name: str
    delta: float
    g: float
    eps_D: float
    eps_half_table: float  # as printed; the protocol uses the m-derived value
    kappa_inv_ns: float
    gamma_inv_ns: float
    m: int
    omega_ghz: float = 10.0

    def protocol(self, n_fock: int = 128, phi1: float = math.pi / 2,
                 phi2: float = 0.0) -> ProtocolParams:
        return ProtocolParams(
            sys=SystemParams(delta=self.delta, g=self.g),
            eps_D=self.eps_D,
            m=self.m,
            phi1=phi1,
            phi2=phi2,
            n_fock=n_fock,
            kappa_inv=self.kappa_inv_ns,
            gamma_inv=self.gamma_inv_ns,
        )


SET1 = Preset("set1", delta=0.1, g=5e-3, eps_D=0.025, eps_half_table=0.025,
              kappa_inv_ns=160.0, gamma_inv_ns=2000.0, m=10)
SET2 = Preset("set2", delta=0.3, g=5e-3, eps_D=0.025, eps_half_table=0.281,
              kappa_inv_ns=1000.0, gamma_inv_ns=2000.0, m=8)

PRESETS = {p.name: p for p in (SET1, SET2)}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
