"""Built-in particle presets (K0, B0, pi0)."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

from .meson import CpViolation, MesonParams
from .scalar import ScalarParams
from .units import mev_to_rate


class MeasuredLambda(NamedTuple):
    value: float
    err_lo: float
    err_hi: float


@dataclass(frozen=True)
class ParticlePreset:
    name: str
    params: MesonParams | ScalarParams
    epsilon: CpViolation | None = None
    mass_mev: float | None = None
    measured_lambda: MeasuredLambda | None = None
    note: str = ""

    @property
    def is_meson(self) -> bool:
        return isinstance(self.params, MesonParams)

    def with_params(self, **changes) -> "ParticlePreset":
        params = replace(self.params, **changes)
        eps = self.epsilon
        if self.is_meson and "delta_L" in changes:
            eps = CpViolation.from_delta_L(params.delta_L)
        return replace(self, params=params, epsilon=eps, name=self.name if not changes else f"{self.name}*")


K0_DELTA_M = 0.5292e10
K0_TAU_S = 0.8953e-10
K0_TAU_L = 5.18e-8
K0_DELTA_L = 3.27e-3
K0_EPS_MODULUS = 2.284e-3
K0_MASS_MEV = 497.648

B0_DELTA_M = 0.502e12
B0_TAU = 1.536e-12
B0_RE_EPS_OVER_NORM = 0.5e-3
B0_MASS_MEV = 5279.4

# pi0 is not quantified in the source tables; PDG 2004 lifetime and mass
PI0_TAU = 8.4e-17
PI0_MASS_MEV = 134.9766


def k0() -> ParticlePreset:
    params = MesonParams(1.0 / K0_TAU_S, 1.0 / K0_TAU_L, K0_DELTA_M, K0_DELTA_L)
    return ParticlePreset(
        "K0", params,
        epsilon=CpViolation.from_delta_L(K0_DELTA_L, modulus=K0_EPS_MODULUS),
        mass_mev=K0_MASS_MEV,
        measured_lambda=MeasuredLambda(2.80e9, 3.30e9, 3.80e9),
        note="PDG 2004 kaon constants; lambda from entangled K0 K0bar data",
    )


def b0() -> ParticlePreset:
    delta = 2.0 * B0_RE_EPS_OVER_NORM
    params = MesonParams(1.0 / B0_TAU, 1.0 / B0_TAU, B0_DELTA_M, delta)
    return ParticlePreset(
        "B0", params,
        epsilon=CpViolation.from_delta_L(delta),
        mass_mev=B0_MASS_MEV,
        measured_lambda=MeasuredLambda(-0.71e11, 1.15e11, 1.15e11),
        note="PDG 2004 B0 constants; Gamma_S = Gamma_L; real epsilon assumed",
    )


def pi0() -> ParticlePreset:
    params = ScalarParams(gamma=1.0 / PI0_TAU, mass_freq=0.0)
    return ParticlePreset("pi0", params, mass_mev=PI0_MASS_MEV,
                          note="PDG 2004 pi0 lifetime; superselected channel")


PRESETS = {"K0": k0, "B0": b0, "pi0": pi0}


def get_preset(name: str) -> ParticlePreset:
    lookup = {k.lower(): f for k, f in PRESETS.items()}
    try:
        return lookup[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def mass_freq(preset: ParticlePreset) -> float:
    """Mean mass of the preset as an angular frequency (1/s)."""
    return mev_to_rate(preset.mass_mev) if preset.mass_mev is not None else 0.0
