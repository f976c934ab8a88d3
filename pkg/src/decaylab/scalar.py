"""Two-level (particle + vacuum) channel of a decaying (pseudo)scalar, e.g. pi0.

Basis order is ``|pi0> = (1, 0)``, ``|0> = (0, 1)``. Rates are in 1/s and
times in s, although any coherent unit system works.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import KrausSet, LindbladModel, choi_matrix
from .linalg import as_matrix, is_psd

DEGENERATE_REL = 1e-9
POSITIVITY_TOL = 1e-12

PARTICLE = np.array([[1, 0], [0, 0]], dtype=complex)
VACUUM = np.array([[0, 0], [0, 1]], dtype=complex)
DECAY = np.array([[0, 0], [1, 0]], dtype=complex)  # |0><pi0|


@dataclass(frozen=True)
class ScalarParams:
    """Decay width, mass frequency, decoherence rate and coherence-transfer amplitude.

    ``mu`` is the phase rate of the particle/vacuum coherence; it defaults to
    ``mass_freq``, which is what consistency with exponential decay demands.
    ``z`` enters the coherence transfer exactly as a raw coefficient: it is
    dimensionless in the generic branch and carries 1/s in the degenerate
    branch ``lam == gamma, mu == 0``.
    """

    gamma: float
    mass_freq: float = 0.0
    lam: float = 0.0
    mu: float | None = None
    z: complex = 0.0

    def __post_init__(self):
        if self.mu is None:
            object.__setattr__(self, "mu", float(self.mass_freq))
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.mu < 0:
            raise ValueError("mu must be non-negative")
        if self.lam == 0 and self.z != 0:
            raise ValueError("lambda = 0 requires z = 0")

    @property
    def degenerate(self) -> bool:
        return (abs(self.lam - self.gamma) <= DEGENERATE_REL * self.gamma
                and abs(self.mu) <= DEGENERATE_REL * self.gamma)


def _check_time(t: float) -> None:
    if t < 0:
        raise ValueError("negative time")


def scalar_coefficients(p: ScalarParams, t: float) -> tuple[complex, complex]:
    """Return ``(A11, A12)``: the particle-to-coherence and coherence-decay amplitudes."""
    _check_time(t)
    rate = 0.5 * (p.gamma + p.lam) + 1j * p.mu
    a12 = np.exp(-t * rate)
    if p.degenerate:
        a11 = p.z * t * np.exp(-t * p.gamma)
    else:
        a11 = p.z * (np.exp(-t * p.gamma) - a12)
    return complex(a11), complex(a12)


def scalar_map(p: ScalarParams, t: float):
    """The channel at time ``t`` as a linear function on arbitrary 2x2 matrices."""
    a11, a12 = scalar_coefficients(p, t)
    decay = np.exp(-t * p.gamma)

    def channel(x):
        x = np.asarray(x, dtype=complex)
        return np.array([
            [decay * x[0, 0], a12 * x[0, 1] + a11 * x[0, 0]],
            [np.conj(a12) * x[1, 0] + np.conj(a11) * x[0, 0], x[1, 1] + (1.0 - decay) * x[0, 0]],
        ])

    return channel


def evolve_scalar_general(rho0, p: ScalarParams, t: float) -> np.ndarray:
    _check_time(t)
    rho = as_matrix(rho0)
    a11, a12 = scalar_coefficients(p, t)
    r11 = np.exp(-t * p.gamma) * rho[0, 0].real
    r12 = a12 * rho[0, 1] + a11 * rho[0, 0].real
    return np.array([[r11, r12], [np.conj(r12), 1.0 - r11]], dtype=complex)


def scalar_choi(p: ScalarParams, t: float) -> np.ndarray:
    _check_time(t)
    return choi_matrix(scalar_map(p, t), 2)


def scalar_positivity_ok(p: ScalarParams, t: float, tol: float = POSITIVITY_TOL) -> bool:
    a11, a12 = scalar_coefficients(p, t)
    decay = np.exp(-t * p.gamma)
    ok_coherence = abs(a12) ** 2 <= decay + tol
    ok_transfer = abs(a11) ** 2 <= -np.expm1(-t * p.gamma) * (decay - abs(a12) ** 2) + tol
    return bool(ok_coherence and ok_transfer)


def z_admissible(p: ScalarParams, points: int = 64) -> bool:
    """Check the coherence-transfer bound for ``z`` over all times.

    Samples ``points`` log-spaced times in ``[1e-3, 20] / gamma`` and adds the
    small-time limit, which reduces to ``alpha <= 1``. The large-time limit is
    always satisfied.
    """
    if p.z == 0:
        return True
    if _alpha(p) > 1.0 + POSITIVITY_TOL:
        return False
    ts = np.logspace(-3, np.log10(20.0), points) / p.gamma
    return all(scalar_positivity_ok(p, t) for t in ts)


def scalar_kraus_general(p: ScalarParams, t: float) -> KrausSet:
    if p.lam == 0:
        return scalar_kraus_superselected(p.gamma, p.mu, t)
    if t <= 0:
        raise ValueError("general Kraus set needs t > 0")
    a11, a12 = scalar_coefficients(p, t)
    dephased = -np.expm1(-t * p.lam)
    radicand = -np.expm1(-t * p.gamma) - abs(a11) ** 2 * np.exp(t * p.gamma) / dephased
    if radicand < -POSITIVITY_TOL:
        raise ValueError(f"not completely positive at t={t!r}: radicand {radicand:.3e}")
    e0 = a12 * PARTICLE + VACUUM
    e1 = np.sqrt(max(radicand, 0.0)) * DECAY
    e2 = (np.exp(-0.5 * t * p.gamma) * np.sqrt(dephased) * PARTICLE
          + np.conj(a11) * np.exp(0.5 * t * p.gamma) / np.sqrt(dephased) * DECAY)
    return KrausSet((e0, e1, e2))


def scalar_kraus_superselected(gamma: float, mass_freq: float, t: float) -> KrausSet:
    _check_time(t)
    e0 = np.exp(-t * (0.5 * gamma + 1j * mass_freq)) * PARTICLE + VACUUM
    e1 = np.sqrt(-np.expm1(-t * gamma)) * DECAY
    return KrausSet((e0, e1))


def _alpha(p: ScalarParams) -> float:
    if p.z == 0:
        return 0.0
    if p.degenerate:
        return abs(p.z) ** 2 / p.gamma ** 2
    return abs(p.z) ** 2 * (4 * p.mu ** 2 + (p.gamma - p.lam) ** 2) / (4 * p.gamma * p.lam)


def _beta(p: ScalarParams) -> complex:
    # Complex rate, not its modulus: this is the constant that makes the
    # generator reproduce A11 exactly (the phase of z(mu i + (lam - gamma)/2)).
    if p.degenerate:
        return complex(p.z)
    return complex(p.z * (0.5 * (p.lam - p.gamma) + 1j * p.mu))


def scalar_lindblad(p: ScalarParams) -> LindbladModel:
    """Hamiltonian and Lindblad operators generating the general evolution.

    For ``lam == 0`` the superselected model ``H = m|pi0><pi0|``,
    ``L1 = sqrt(gamma)|0><pi0|`` is returned.
    """
    if p.lam == 0:
        return LindbladModel(p.mu * PARTICLE, (np.sqrt(p.gamma) * DECAY,))
    alpha = _alpha(p)
    if alpha > 1.0:
        raise ValueError("z too large: L1 coefficient imaginary")
    beta = _beta(p)
    l1 = np.sqrt(p.gamma * (1.0 - alpha)) * DECAY
    l2 = np.sqrt(p.lam) * PARTICLE + np.conj(beta) / np.sqrt(p.lam) * DECAY
    return LindbladModel(p.mu * PARTICLE, (l1, l2))


def survival_probability(gamma: float, t) -> float:
    """Probability of still finding the particle: ``exp(-gamma t)``."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("negative time")
    return np.exp(-np.asarray(t, dtype=float) * gamma)


def pure_state(kind: str) -> np.ndarray:
    kinds = {"pi0": PARTICLE, "particle": PARTICLE, "vacuum": VACUUM}
    try:
        return kinds[kind.lower()].copy()
    except KeyError:
        raise ValueError(f"unknown scalar state {kind!r}") from None


def is_valid_state(rho, tol: float = 1e-12) -> bool:
    rho = as_matrix(rho)
    return (np.allclose(rho, rho.conj().T, atol=tol)
            and abs(np.trace(rho) - 1) <= tol and is_psd(rho, tol))
