"""Three-level (K_S, K_L, vacuum) channel of a neutral K0 or B0 meson with CP violation.

Physical states are stored as dyad coefficients ``rt`` on the nonorthogonal
``|KS>, |KL>, |0>`` basis (:class:`TildeState`). The density matrix in the
orthonormal CP basis ``|K1>, |K2>, |0>`` is ``V rt V^H`` and traces in the
dyad representation are taken against the metric ``g = V^H V``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .dynamics import Basis, KrausSet, LindbladModel, choi_matrix, drop_negligible
from .linalg import as_matrix, frobenius, is_psd

S, L, O = 0, 1, 2  # index of K_S, K_L, vacuum in dyad coordinates
SUPERSELECTION_TOL = 1e-15
RADICAND_TOL = 1e-15


class SuperselectionError(ValueError):
    pass


class NotCompletelyPositiveError(ValueError):
    def __init__(self, t: float, radicand: float):
        super().__init__(f"not completely positive at t={t!r}: radicand {radicand:.6e} < 0")
        self.t = t
        self.radicand = radicand


class LindbladFamilyError(ValueError):
    pass


@dataclass(frozen=True)
class MesonParams:
    gamma_S: float
    gamma_L: float
    delta_m: float
    delta_L: float
    lam: float = 0.0
    mean_mass_freq: float = 0.0

    def __post_init__(self):
        if not (self.gamma_S > 0 and self.gamma_L > 0):
            raise ValueError("decay widths must be positive")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if not 0 <= self.delta_L < 1:
            raise ValueError("delta_L must lie in [0, 1)")
        if self.delta_m < 0:
            raise ValueError("delta_m must be non-negative")

    @property
    def gamma(self) -> float:
        return 0.5 * (self.gamma_S + self.gamma_L)

    @property
    def delta_gamma(self) -> float:
        return self.gamma_S - self.gamma_L

    @property
    def m_S(self) -> float:
        return self.mean_mass_freq - 0.5 * self.delta_m

    @property
    def m_L(self) -> float:
        return self.mean_mass_freq + 0.5 * self.delta_m

    @property
    def tau_S(self) -> float:
        return 1.0 / self.gamma_S

    @property
    def tau_L(self) -> float:
        return 1.0 / self.gamma_L

    @property
    def coherence_rate(self) -> complex:
        """``Gamma + lambda - i delta_m``; the S-L coherence decays as ``exp(-t * this)``."""
        return self.gamma + self.lam - 1j * self.delta_m

    def cp_family_ok(self) -> bool:
        return self.delta_m == 0 or self.delta_L <= np.sqrt(self.gamma_S * self.gamma_L) / self.delta_m

    def with_lambda(self, lam: float) -> "MesonParams":
        return replace(self, lam=lam)


@dataclass(frozen=True)
class CpViolation:
    epsilon: complex = 0.0

    def __post_init__(self):
        if abs(self.epsilon) >= 1:
            raise ValueError("|epsilon| must be < 1")

    @property
    def delta_L(self) -> float:
        return delta_L_from_epsilon(self)

    @classmethod
    def from_delta_L(cls, delta_L: float, modulus: float | None = None) -> "CpViolation":
        """Build epsilon with overlap ``delta_L``.

        Without ``modulus`` epsilon is taken real. With ``modulus = |epsilon|``
        the real part is fixed by ``delta_L`` and the imaginary part is the
        non-negative remainder.
        """
        if not 0 <= delta_L < 1:
            raise ValueError("delta_L must lie in [0, 1)")
        if modulus is None:
            return cls(delta_L / (1.0 + np.sqrt(1.0 - delta_L ** 2)))
        re = 0.5 * delta_L * (1.0 + modulus ** 2)
        if re > modulus * (1.0 + 1e-12):
            raise ValueError("|epsilon| too small for this delta_L")
        return cls(complex(re, np.sqrt(max(modulus ** 2 - re ** 2, 0.0))))


def delta_L_from_epsilon(e: CpViolation) -> float:
    eps = complex(e.epsilon)
    return 2.0 * eps.real / (1.0 + abs(eps) ** 2)


_CP_IN_STRANGENESS = np.array([[1, 1, 0], [1, -1, 0], [0, 0, np.sqrt(2)]], dtype=complex).T / np.sqrt(2)


def basis_vectors(e: CpViolation) -> dict[str, np.ndarray]:
    """``K1, K2, KS, KL`` (and ``K0, K0bar, vacuum``) in strangeness coordinates."""
    eps = complex(e.epsilon)
    norm = np.sqrt(1.0 + abs(eps) ** 2)
    k0 = np.array([1, 0, 0], dtype=complex)
    k0bar = np.array([0, 1, 0], dtype=complex)
    vac = np.array([0, 0, 1], dtype=complex)
    k1 = (k0 + k0bar) / np.sqrt(2)
    k2 = (k0 - k0bar) / np.sqrt(2)
    return {
        "K0": k0, "K0bar": k0bar, "vacuum": vac, "K1": k1, "K2": k2,
        "KS": (k1 + eps * k2) / norm, "KL": (eps * k1 + k2) / norm,
    }


def v_matrix(e: CpViolation) -> np.ndarray:
    eps = complex(e.epsilon)
    c = 1.0 / np.sqrt(1.0 + abs(eps) ** 2)
    return np.array([[c, eps * c, 0], [eps * c, c, 0], [0, 0, 1]], dtype=complex)


def g_matrix(delta_L: float) -> np.ndarray:
    return np.array([[1, delta_L, 0], [delta_L, 1, 0], [0, 0, 1]], dtype=complex)


def g_inverse(delta_L: float) -> np.ndarray:
    d = 1.0 - delta_L ** 2
    return np.array([[1 / d, -delta_L / d, 0], [-delta_L / d, 1 / d, 0], [0, 0, 1]], dtype=complex)


def strangeness_change() -> np.ndarray:
    """Unitary taking CP-basis coordinates to strangeness-basis coordinates."""
    return _CP_IN_STRANGENESS.copy()


def convert(rho, frm: Basis, to: Basis, e: CpViolation) -> np.ndarray:
    """Convert a density matrix between CP, strangeness and dyad-coefficient forms."""
    rho = as_matrix(rho)
    v = v_matrix(e)
    u = strangeness_change()
    if frm == to:
        return rho.copy()
    # everything goes through the CP orthonormal basis
    if frm is Basis.SL_TILDE:
        cp = v @ rho @ v.conj().T
    elif frm is Basis.STRANGENESS:
        cp = u.conj().T @ rho @ u
    elif frm is Basis.CP_ORTHONORMAL:
        cp = rho
    else:
        raise ValueError(f"unsupported basis {frm}")
    if to is Basis.CP_ORTHONORMAL:
        return cp
    if to is Basis.STRANGENESS:
        return u @ cp @ u.conj().T
    if to is Basis.SL_TILDE:
        vinv = np.linalg.inv(v)
        return vinv @ cp @ vinv.conj().T
    raise ValueError(f"unsupported basis {to}")


@dataclass(frozen=True)
class TildeState:
    """Dyad coefficients ``rt`` of the density operator on ``|KS>, |KL>, |0>``."""

    matrix: np.ndarray
    delta_L: float

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_matrix(self.matrix))
        if self.matrix.shape != (3, 3):
            raise ValueError("tilde state must be 3x3")

    @property
    def metric(self) -> np.ndarray:
        return g_matrix(self.delta_L)

    def metric_trace(self) -> complex:
        return complex(np.trace(self.matrix @ self.metric))

    def superselected(self, tol: float = SUPERSELECTION_TOL) -> bool:
        m = self.matrix
        scale = max(frobenius(m), 1.0)
        return max(abs(m[S, O]), abs(m[L, O]), abs(m[O, S]), abs(m[O, L])) <= tol * scale

    def orthonormal(self, e: CpViolation | None = None) -> np.ndarray:
        e = e if e is not None else CpViolation.from_delta_L(self.delta_L)
        v = v_matrix(e)
        return v @ self.matrix @ v.conj().T

    def is_physical(self, tol: float = 1e-12) -> bool:
        m = self.matrix
        return (self.superselected()
                and np.allclose(m, m.conj().T, atol=tol)
                and abs(self.metric_trace() - 1) <= tol
                and is_psd(self.orthonormal(), tol))


INITIAL_KINDS = ("K0", "K0bar", "KS", "KL", "K1", "K2", "vacuum")


def prepare_tilde(kind: str, delta_L: float, e: CpViolation | None = None) -> TildeState:
    """Dyad coefficients of a pure initial state.

    ``K0``, ``K0bar``, ``KS``, ``KL`` and ``vacuum`` depend on ``delta_L`` only.
    ``K1`` and ``K2`` depend on the phase of epsilon; a real epsilon is assumed
    unless ``e`` is given.
    """
    if not 0 <= delta_L < 1:
        raise ValueError("delta_L must lie in [0, 1)")
    key = {k.lower(): k for k in INITIAL_KINDS}.get(kind.lower())
    if key is None:
        raise ValueError(f"unknown initial state {kind!r}")
    m = np.zeros((3, 3), dtype=complex)
    if key == "KS":
        m[S, S] = 1.0
    elif key == "KL":
        m[L, L] = 1.0
    elif key == "vacuum":
        m[O, O] = 1.0
    elif key == "K0":
        m[:2, :2] = 1.0 / (2.0 * (1.0 + delta_L))
    elif key == "K0bar":
        w = 1.0 / (2.0 * (1.0 - delta_L))
        m[:2, :2] = [[w, -w], [-w, w]]
    else:
        e = e if e is not None else CpViolation.from_delta_L(delta_L)
        if not np.isclose(e.delta_L, delta_L, rtol=0, atol=1e-15):
            raise ValueError("epsilon inconsistent with delta_L")
        ket = np.zeros(3, dtype=complex)
        ket[0 if key == "K1" else 1] = 1.0
        m = convert(np.outer(ket, ket.conj()), Basis.CP_ORTHONORMAL, Basis.SL_TILDE, e)
        m[S, O] = m[L, O] = m[O, S] = m[O, L] = 0.0
    return TildeState(m, delta_L)


class Coefficients(NamedTuple):
    A_SL: complex
    B_S0: complex
    C_L0: complex
    D_SS: float
    D_LL: float
    D_SL: complex


def coefficient_functions(p: MesonParams, t: float) -> Coefficients:
    if t < 0:
        raise ValueError("negative time")
    a_sl = np.exp(-t * p.coherence_rate)
    b_s0 = np.exp(-t * (0.5 * p.gamma_S + p.lam + 1j * p.m_S))
    c_l0 = np.exp(-t * (0.5 * p.gamma_L + p.lam + 1j * p.m_L))
    # written as -expm1(-x) so small-t values keep full relative precision
    d_ss = -np.expm1(-t * p.gamma_S)
    d_ll = -np.expm1(-t * p.gamma_L)
    d_sl = -p.delta_L * np.expm1(-t * p.coherence_rate)
    return Coefficients(complex(a_sl), complex(b_s0), complex(c_l0), float(d_ss), float(d_ll), complex(d_sl))


def tilde_map(p: MesonParams, t: float):
    """The most general admissible map at time ``t`` as a linear function on 3x3 matrices."""
    c = coefficient_functions(p, t)
    es, el = np.exp(-t * p.gamma_S), np.exp(-t * p.gamma_L)

    def channel(x):
        x = np.asarray(x, dtype=complex)
        y = np.zeros((3, 3), dtype=complex)
        y[S, S] = es * x[S, S]
        y[L, L] = el * x[L, L]
        y[S, L] = c.A_SL * x[S, L]
        y[L, S] = np.conj(c.A_SL) * x[L, S]
        y[S, O] = c.B_S0 * x[S, O]
        y[O, S] = np.conj(c.B_S0) * x[O, S]
        y[L, O] = c.C_L0 * x[L, O]
        y[O, L] = np.conj(c.C_L0) * x[O, L]
        y[O, O] = (c.D_SS * x[S, S] + c.D_LL * x[L, L]
                   + c.D_SL * x[S, L] + np.conj(c.D_SL) * x[L, S] + x[O, O])
        return y

    return channel


def meson_choi(p: MesonParams, t: float) -> np.ndarray:
    """9x9 Choi matrix of the dyad-coefficient map, built from the coefficient functions."""
    return choi_matrix(tilde_map(p, t), 3)


def evolve_tilde(rho0: TildeState, p: MesonParams, t: float) -> TildeState:
    if t < 0:
        raise ValueError("negative time")
    if not rho0.superselected():
        raise SuperselectionError("superselection violated: nonzero particle-vacuum coefficients")
    if not np.isclose(rho0.delta_L, p.delta_L, rtol=0, atol=1e-15):
        raise ValueError("state and parameters disagree on delta_L")
    r = rho0.matrix
    a = np.exp(-t * p.coherence_rate)
    out = np.zeros((3, 3), dtype=complex)
    out[S, S] = np.exp(-t * p.gamma_S) * r[S, S]
    out[L, L] = np.exp(-t * p.gamma_L) * r[L, L]
    out[S, L] = a * r[S, L]
    out[L, S] = np.conj(out[S, L])
    out[O, O] = (-np.expm1(-t * p.gamma_S) * r[S, S] - np.expm1(-t * p.gamma_L) * r[L, L]
                 + 2.0 * p.delta_L * np.real(-np.expm1(-t * p.coherence_rate) * r[S, L]) + r[O, O])
    return TildeState(out, rho0.delta_L)


def _e1_radicand(p: MesonParams, t: float) -> float:
    d_ll = -np.expm1(-t * p.gamma_L)
    return -np.expm1(-t * p.gamma_S) - p.delta_L ** 2 * abs(np.expm1(-t * p.coherence_rate)) ** 2 / d_ll


def kraus_breve(p: MesonParams, t: float, drop: bool = True) -> KrausSet:
    """Kraus matrices acting directly on the dyad coefficients (completeness metric ``g``).

    Operators with Frobenius norm below 1e-15 are dropped unless ``drop`` is false.
    """
    g = g_matrix(p.delta_L)
    if t < 0:
        raise ValueError("negative time")
    if t == 0:
        return KrausSet((np.eye(3, dtype=complex),), g, Basis.SL_TILDE)
    radicand = _e1_radicand(p, t)
    if radicand < -RADICAND_TOL:
        raise NotCompletelyPositiveError(t, radicand)
    d_ll = -np.expm1(-t * p.gamma_L)
    dephase = np.sqrt(-np.expm1(-t * p.lam))

    e0 = np.diag([
        np.exp(-t * (0.5 * (p.gamma_S + p.lam) + 1j * p.m_S)),
        np.exp(-t * (0.5 * (p.gamma_L + p.lam) + 1j * p.m_L)),
        np.exp(-0.5 * t * p.lam),
    ]).astype(complex)
    e1 = np.zeros((3, 3), dtype=complex)
    e1[O, S] = np.sqrt(max(radicand, 0.0))
    e2 = np.zeros((3, 3), dtype=complex)
    e2[O, S] = -p.delta_L * np.expm1(-t * p.coherence_rate) / d_ll
    e2[O, L] = 1.0
    e2 *= np.sqrt(d_ll)
    e3 = np.zeros((3, 3), dtype=complex)
    e3[S, S] = np.exp(-0.5 * t * p.gamma_S) * dephase
    e4 = np.zeros((3, 3), dtype=complex)
    e4[L, L] = np.exp(-0.5 * t * p.gamma_L) * dephase
    e5 = np.zeros((3, 3), dtype=complex)
    e5[O, O] = dephase
    ops = [e0, e1, e2, e3, e4, e5]
    return KrausSet(tuple(drop_negligible(ops) if drop else ops), g, Basis.SL_TILDE)


def kraus_orthonormal(p: MesonParams, e: CpViolation, t: float) -> KrausSet:
    """``E_i = V Eb_i V^-1``: Kraus operators in the CP basis with identity metric."""
    if not np.isclose(e.delta_L, p.delta_L, rtol=0, atol=1e-15):
        raise ValueError("epsilon inconsistent with delta_L")
    v = v_matrix(e)
    vinv = np.linalg.inv(v)
    ops = tuple(v @ k @ vinv for k in kraus_breve(p, t).operators)
    return KrausSet(ops, None, Basis.CP_ORTHONORMAL)


def kraus_dyad(p: MesonParams, t: float) -> list[np.ndarray]:
    """Dyad coefficients of the Kraus operators: ``Et_i = Eb_i g^-1`` (all six kept)."""
    ginv = g_inverse(p.delta_L)
    return [k @ ginv for k in kraus_breve(p, t, drop=False).operators]


def kraus_dyad_explicit(p: MesonParams, t: float) -> list[np.ndarray]:
    """The six dyad-coefficient Kraus matrices written out term by term.

    Used as an independent cross-check of :func:`kraus_dyad`; the
    ``1/(1 - delta_L^2)`` prefactor multiplies every bracketed term.
    Operators that vanish (``lam == 0``) are kept here.
    """
    d = p.delta_L
    pref = 1.0 / (1.0 - d ** 2)
    es = np.exp(-t * (0.5 * (p.gamma_S + p.lam) + 1j * p.m_S))
    el = np.exp(-t * (0.5 * (p.gamma_L + p.lam) + 1j * p.m_L))
    one_minus_a = -np.expm1(-t * p.coherence_rate)
    d_ll = -np.expm1(-t * p.gamma_L)
    root_ll = np.sqrt(d_ll)
    dephase = np.sqrt(-np.expm1(-t * p.lam))

    def dy(i, j):
        m = np.zeros((3, 3), dtype=complex)
        m[i, j] = 1.0
        return m

    e0 = pref * (es * dy(S, S) + el * dy(L, L) - d * (es * dy(S, L) + el * dy(L, S))) \
        + np.exp(-0.5 * t * p.lam) * dy(O, O)
    e1 = pref * np.sqrt(max(_e1_radicand(p, t), 0.0)) * (dy(O, S) - d * dy(O, L))
    e2 = pref * ((root_ll - d ** 2 * one_minus_a / root_ll) * dy(O, L)
                 - d * (root_ll - one_minus_a / root_ll) * dy(O, S))
    e3 = pref * np.exp(-0.5 * t * p.gamma_S) * dephase * (dy(S, S) - d * dy(S, L))
    e4 = pref * np.exp(-0.5 * t * p.gamma_L) * dephase * (dy(L, L) - d * dy(L, S))
    e5 = dephase * dy(O, O)
    return [e0, e1, e2, e3, e4, e5]


def hamiltonian_dyad(p: MesonParams) -> np.ndarray:
    """Dyad coefficients of the Hermitian Hamiltonian."""
    d = p.delta_L
    m = p.mean_mass_freq
    h = np.zeros((3, 3), dtype=complex)
    h[S, S] = p.m_S
    h[L, L] = p.m_L
    h[S, L] = -d * (m - 0.25j * p.delta_gamma)
    h[L, S] = -d * (m + 0.25j * p.delta_gamma)
    return h / (1.0 - d ** 2)


def lindblad_dyad(p: MesonParams) -> list[np.ndarray]:
    """Dyad coefficients of the five Lindblad operators."""
    d = p.delta_L
    pref = 1.0 / (1.0 - d ** 2)
    w = p.coherence_rate
    radicand = p.gamma_S - d ** 2 * abs(w) ** 2 / p.gamma_L
    if radicand < 0:
        raise LindbladFamilyError("Lindblad family invalid: L1 coefficient imaginary")
    rl = np.sqrt(p.gamma_L)
    rlam = np.sqrt(p.lam)
    l1 = np.zeros((3, 3), dtype=complex)
    l1[O, S], l1[O, L] = 1.0, -d
    l1 *= pref * np.sqrt(radicand)
    l2 = np.zeros((3, 3), dtype=complex)
    l2[O, L] = pref * (rl - d ** 2 * w / rl)
    l2[O, S] = -d * pref * (rl - w / rl)
    l3 = np.zeros((3, 3), dtype=complex)
    l3[S, S], l3[S, L] = pref * rlam, -d * pref * rlam
    l4 = np.zeros((3, 3), dtype=complex)
    l4[L, L], l4[L, S] = pref * rlam, -d * pref * rlam
    l5 = np.zeros((3, 3), dtype=complex)
    l5[O, O] = rlam
    return [l1, l2, l3, l4, l5]


def meson_lindblad(p: MesonParams, e: CpViolation | None = None) -> LindbladModel:
    """Hamiltonian and Lindblad operators in the orthonormal CP basis.

    Operators with dyad coefficients ``X`` are ``V X V^H`` in the CP basis.
    Zero operators (``lam == 0``) are dropped.
    """
    e = e if e is not None else CpViolation.from_delta_L(p.delta_L)
    if not np.isclose(e.delta_L, p.delta_L, rtol=0, atol=1e-15):
        raise ValueError("epsilon inconsistent with delta_L")
    v = v_matrix(e)
    h = v @ hamiltonian_dyad(p) @ v.conj().T
    ops = [v @ x @ v.conj().T for x in lindblad_dyad(p)]
    ops = [op for op in ops if frobenius(op) > 0]
    return LindbladModel(0.5 * (h + h.conj().T), tuple(ops))


def expectation(op_cp: np.ndarray, ket_strangeness: np.ndarray) -> complex:
    """``<psi|op|psi>`` for ``op`` in CP coordinates and ``psi`` in strangeness coordinates."""
    u = strangeness_change()
    op_s = u @ op_cp @ u.conj().T
    return complex(np.conj(ket_strangeness) @ op_s @ ket_strangeness)


class Detection(NamedTuple):
    p_K0: float
    p_K0bar: float
    p_vac: float


def detection_probabilities(rho0: TildeState, p: MesonParams, t: float) -> Detection:
    """Probabilities of finding K0, K0bar or nothing at time ``t``."""
    if t < 0:
        raise ValueError("negative time")
    r = rho0.matrix
    d = p.delta_L
    diag = np.exp(-t * p.gamma_S) * r[S, S].real + np.exp(-t * p.gamma_L) * r[L, L].real
    coh = 2.0 * np.real(np.exp(-t * p.coherence_rate) * r[S, L])
    p_k0 = 0.5 * (1.0 + d) * (diag + coh)
    p_k0bar = 0.5 * (1.0 - d) * (diag - coh)
    return Detection(float(p_k0), float(p_k0bar), float(1.0 - p_k0 - p_k0bar))


def strangeness_expectation(rho0: TildeState, p: MesonParams, t: float) -> float:
    if t < 0:
        raise ValueError("negative time")
    r = rho0.matrix
    diag = np.exp(-t * p.gamma_S) * r[S, S].real + np.exp(-t * p.gamma_L) * r[L, L].real
    return float(p.delta_L * diag + 2.0 * np.real(np.exp(-t * p.coherence_rate) * r[S, L]))
