"""Reference computations that share no code with the package under test.

They use scipy (expm, brentq) and the textbook Weisskopf-Wigner description,
which is exact for the lambda = 0 semigroup restricted to the particle sector.
"""
import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq


def ks_kl_strangeness(eps: complex):
    n = np.sqrt(2.0 * (1.0 + abs(eps) ** 2))
    ks = np.array([1 + eps, 1 - eps]) / n
    kl = np.array([1 + eps, -(1 - eps)]) / n
    return ks, kl


def ww_amplitude(eps, gamma_s, gamma_l, delta_m, psi0, t):
    """Two-level amplitude in the (K0, K0bar) basis under H_eff; mean mass zero."""
    ks, kl = ks_kl_strangeness(eps)
    m = np.column_stack([ks, kl])
    lam = np.diag([-0.5 * delta_m - 0.5j * gamma_s, 0.5 * delta_m - 0.5j * gamma_l])
    h_eff = m @ lam @ np.linalg.inv(m)
    return expm(-1j * h_eff * t) @ np.asarray(psi0, dtype=complex)


def ww_probabilities(eps, gamma_s, gamma_l, delta_m, psi0, t):
    a = ww_amplitude(eps, gamma_s, gamma_l, delta_m, psi0, t)
    pk, pkb = abs(a[0]) ** 2, abs(a[1]) ** 2
    return pk, pkb, 1.0 - pk - pkb


def raw_discriminant(gs, gl, dm, d, t):
    return (1 - np.exp(-t * gs)) * (1 - np.exp(-t * gl)) - d ** 2 * np.sin(t * dm) ** 2


def raw_t_plus(gs, gl, dm, d):
    """Root of cos(t dm) - sqrt(D)/delta by brentq on a coarse bracket."""
    f = lambda t: np.cos(t * dm) - np.sqrt(max(raw_discriminant(gs, gl, dm, d, t), 0.0)) / d
    ts = np.logspace(np.log10(1e-4 / max(gs, dm)), np.log10(np.pi / dm), 4000)
    vals = np.array([f(t) for t in ts])
    k = int(np.argmax(vals <= 0))
    return brentq(f, ts[k - 1], ts[k], xtol=1e-30, rtol=1e-14)


def raw_upper(gs, gl, dm, d, t):
    g = 0.5 * (gs + gl)
    return -np.log(np.cos(t * dm) - np.sqrt(raw_discriminant(gs, gl, dm, d, t)) / d) / t - g
