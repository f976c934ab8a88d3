"""Representation-independent channel machinery.

Kraus application and completeness, Choi matrices of arbitrary linear maps,
a fixed-step RK4 Lindblad integrator used as the numerical oracle, the
semigroup residual, and product-channel evolution of noninteracting pairs.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .linalg import as_matrix, frobenius, hermitian_defect, hermitize

DROP_NORM = 1e-15


class Basis(enum.Enum):
    """Which coordinates a matrix is written in."""

    ORTHONORMAL = "orthonormal"  # generic orthonormal basis (pi0 / vacuum)
    CP_ORTHONORMAL = "cp"  # |K1>, |K2>, |0>
    STRANGENESS = "strangeness"  # |K0>, |K0bar>, |0>
    SL_TILDE = "sl_tilde"  # dyad coefficients on |KS>, |KL>, |0>


@dataclass(frozen=True)
class KrausSet:
    operators: tuple
    metric: np.ndarray | None = None
    basis: Basis = Basis.ORTHONORMAL

    def __post_init__(self):
        ops = tuple(as_matrix(k) for k in self.operators)
        if not ops:
            raise ValueError("empty Kraus set")
        dim = ops[0].shape[0]
        if any(k.shape != (dim, dim) for k in ops):
            raise ValueError("Kraus operators must share one dimension")
        object.__setattr__(self, "operators", ops)
        metric = np.eye(dim, dtype=complex) if self.metric is None else as_matrix(self.metric)
        if metric.shape != (dim, dim):
            raise ValueError("metric dimension does not match operators")
        object.__setattr__(self, "metric", metric)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self) -> int:
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)


@dataclass(frozen=True)
class LindbladModel:
    hamiltonian: np.ndarray
    lindblad_ops: tuple = field(default_factory=tuple)

    def __post_init__(self):
        h = as_matrix(self.hamiltonian)
        if hermitian_defect(h) > 1e-12 * max(frobenius(h), 1.0):
            raise ValueError("Hamiltonian is not Hermitian")
        ops = tuple(as_matrix(op) for op in self.lindblad_ops)
        if any(op.shape != h.shape for op in ops):
            raise ValueError("Lindblad operators must match the Hamiltonian dimension")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "lindblad_ops", ops)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def damping(self) -> np.ndarray:
        """``K = -1/2 sum L^H L``."""
        k = np.zeros_like(self.hamiltonian)
        for op in self.lindblad_ops:
            k -= 0.5 * op.conj().T @ op
        return k

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        h, k = self.hamiltonian, self.damping
        out = -1j * (h @ rho - rho @ h) + k @ rho + rho @ k
        for op in self.lindblad_ops:
            out += op @ rho @ op.conj().T
        return out

    def superoperator(self) -> np.ndarray:
        """Generator acting on row-major ``rho.reshape(-1)``."""
        n = self.dim
        eye = np.eye(n)
        h, k = self.hamiltonian, self.damping
        sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T)) + np.kron(k, eye) + np.kron(eye, k.T)
        for op in self.lindblad_ops:
            sup += np.kron(op, op.conj())
        return sup


def drop_negligible(ops: Sequence[np.ndarray], tol: float = DROP_NORM) -> list[np.ndarray]:
    kept = [op for op in ops if frobenius(op) >= tol]
    return kept or [ops[0]]


def apply_kraus(state, ks: KrausSet) -> np.ndarray:
    rho = as_matrix(state)
    if rho.shape != (ks.dim, ks.dim):
        raise ValueError(f"dimension mismatch: state {rho.shape}, Kraus operators {ks.dim}")
    out = np.zeros_like(rho)
    for k in ks.operators:
        out += k @ rho @ k.conj().T
    return out


def completeness_residual(ks: KrausSet) -> float:
    total = sum(k.conj().T @ ks.metric @ k for k in ks.operators)
    return frobenius(total - ks.metric)


def metric_trace(rho, metric=None) -> complex:
    rho = as_matrix(rho)
    if metric is None:
        return complex(np.trace(rho))
    return complex(np.trace(rho @ metric))


def choi_matrix(channel: Callable[[np.ndarray], np.ndarray], dim: int) -> np.ndarray:
    """``sum_ij |i><j| (x) channel(|i><j|)``; row index ``i*dim + k``."""
    choi = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            unit = np.zeros((dim, dim), dtype=complex)
            unit[i, j] = 1.0
            choi[i * dim:(i + 1) * dim, j * dim:(j + 1) * dim] = channel(unit)
    return choi


def superoperator_of(channel: Callable[[np.ndarray], np.ndarray], dim: int) -> np.ndarray:
    """Matrix of a linear map on row-major vectorised ``dim x dim`` matrices."""
    sup = np.zeros((dim * dim, dim * dim), dtype=complex)
    for col in range(dim * dim):
        unit = np.zeros(dim * dim, dtype=complex)
        unit[col] = 1.0
        sup[:, col] = np.asarray(channel(unit.reshape(dim, dim))).reshape(-1)
    return sup


def default_steps(model: LindbladModel, t: float, rate_step: float = 2e-2) -> int:
    # spectral radius, not a matrix norm: entries of the generator can be far
    # larger than its eigenvalues when the Lindblad operators nearly cancel
    rate = np.abs(np.linalg.eigvals(model.superoperator())).max()
    return max(1, int(np.ceil(rate * abs(t) / rate_step)))


def integrate_master(model: LindbladModel, rho0, t: float, steps: int | None = None) -> np.ndarray:
    """Classical RK4 on the Lindblad equation with re-Hermitisation after every step."""
    rho = as_matrix(rho0)
    if rho.shape != (model.dim, model.dim):
        raise ValueError("state dimension does not match the model")
    if hermitian_defect(rho) > 1e-12 * max(frobenius(rho), 1.0):
        raise ValueError("initial state is not Hermitian")
    if t == 0:
        return rho.copy()
    if steps is None:
        steps = default_steps(model, t)
    if steps < 1:
        raise ValueError("steps must be >= 1")

    n = model.dim
    sup = model.superoperator()
    h = t / steps
    y = hermitize(rho).reshape(-1)
    for _ in range(steps):
        k1 = sup @ y
        k2 = sup @ (y + 0.5 * h * k1)
        k3 = sup @ (y + 0.5 * h * k2)
        k4 = sup @ (y + h * k3)
        m = (y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).reshape(n, n)
        y = (0.5 * (m + m.conj().T)).reshape(-1)
    return y.reshape(n, n)


def semigroup_residual(evolver: Callable, state, t1: float, t2: float) -> float:
    if t1 < 0 or t2 < 0:
        raise ValueError("negative time")
    two_step = evolver(evolver(state, t1), t2)
    one_step = evolver(state, t1 + t2)
    return frobenius(_as_array(two_step) - _as_array(one_step))


def _as_array(state) -> np.ndarray:
    return np.asarray(getattr(state, "matrix", state))


def product_kraus(ka: KrausSet, kb: KrausSet) -> KrausSet:
    ops = [np.kron(a, b) for a in ka.operators for b in kb.operators]
    return KrausSet(tuple(ops), np.kron(ka.metric, kb.metric), ka.basis)


def tensor_evolve_pair(state12, pa, pb, ea, eb, t: float) -> np.ndarray:
    """Evolve a 9x9 two-meson state (CP basis for each factor) with ``{E_i (x) F_j}``."""
    from .meson import kraus_orthonormal

    ka = kraus_orthonormal(pa, ea, t)
    kb = kraus_orthonormal(pb, eb, t)
    return apply_kraus(state12, product_kraus(ka, kb))


def tensor_evolve_pair_tilde(state12, pa, pb, ea, eb, t: float) -> np.ndarray:
    """Same evolution routed through the coefficient propagator on each factor.

    Converts to dyad coefficients with ``(V (x) V)^-1``, applies the closed-form
    linear map of each particle on its own index pair, and maps back. Shares no
    code with the Kraus construction.
    """
    from .meson import tilde_map, v_matrix

    va, vb = v_matrix(ea), v_matrix(eb)
    vv = np.kron(va, vb)
    vv_inv = np.linalg.inv(vv)
    coeff = vv_inv @ as_matrix(state12) @ vv_inv.conj().T
    sa = superoperator_of(tilde_map(pa, t), 3).reshape(3, 3, 3, 3)
    sb = superoperator_of(tilde_map(pb, t), 3).reshape(3, 3, 3, 3)
    x = coeff.reshape(3, 3, 3, 3)  # (i, k, j, l): particle A rows/cols i, j; B k, l
    y = np.einsum("ijab,kleg,aebg->ikjl", sa, sb, x)
    return vv @ y.reshape(9, 9) @ vv.conj().T
