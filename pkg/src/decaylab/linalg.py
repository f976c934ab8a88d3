"""Small dense complex-matrix helpers.

Matrices are plain ``numpy`` complex arrays. Everything here is sized for
the 2x2 ... 9x9 objects the channels produce, so the Hermitian eigensolver
is a cyclic Jacobi sweep rather than a LAPACK call.
"""
from __future__ import annotations

import numpy as np

MAX_SWEEPS = 100
OFFDIAG_REL_TOL = 1e-14
HERMITIAN_REL_TOL = 1e-10


class NotHermitianError(ValueError):
    pass


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def adjoint(m) -> np.ndarray:
    return np.conj(as_matrix(m)).T


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    return a @ b + b @ a


def kron(a, b) -> np.ndarray:
    """Kronecker product, row index ``i*dim(b) + k``."""
    return np.kron(as_matrix(a), as_matrix(b))


def frobenius(m) -> float:
    a = np.abs(np.asarray(m))
    big = a.max(initial=0.0)
    if big == 0 or not np.isfinite(big):
        return float(big)
    # rescale first: squaring entries near 1e-200 or 1e200 would under/overflow
    return float(big * np.sqrt(np.sum((a / big) ** 2)))


def dyad(ket, bra) -> np.ndarray:
    """``|ket><bra|`` for vectors in the same orthonormal coordinates."""
    return np.outer(np.asarray(ket, dtype=complex), np.conj(np.asarray(bra, dtype=complex)))


def basis_dyad(dim: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((dim, dim), dtype=complex)
    m[i, j] = 1.0
    return m


def hermitian_defect(m) -> float:
    a = as_matrix(m)
    return frobenius(a - a.conj().T)


def is_hermitian(m, rel_tol: float = HERMITIAN_REL_TOL) -> bool:
    a = as_matrix(m)
    return hermitian_defect(a) <= rel_tol * max(frobenius(a), np.finfo(float).tiny)


def hermitize(m) -> np.ndarray:
    a = as_matrix(m)
    return 0.5 * (a + a.conj().T)


def _check_hermitian(a: np.ndarray) -> None:
    scale = frobenius(a)
    if hermitian_defect(a) > HERMITIAN_REL_TOL * scale:
        raise NotHermitianError(
            f"not Hermitian: |M - M^H|_F = {hermitian_defect(a):.3e} (|M|_F = {scale:.3e})"
        )


def jacobi_eigh(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(w, q)`` with ``w`` ascending and ``m ~= q @ diag(w) @ q^H``.
    Raises :class:`NotHermitianError` if ``m`` is not Hermitian to
    ``1e-10 * |m|_F``.
    """
    a = as_matrix(m).copy()
    _check_hermitian(a)
    a = hermitize(a)
    n = a.shape[0]
    q = np.eye(n, dtype=complex)
    threshold = OFFDIAG_REL_TOL * frobenius(a)

    for _ in range(MAX_SWEEPS):
        off = frobenius(a - np.diag(np.diag(a)))
        if off <= threshold:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                apq = a[p, r]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                theta = (a[r, r].real - a[p, p].real) / (2.0 * mag)
                if abs(theta) > 1e100:
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # columns p, r of the unitary rotation; phase makes the pivot real first
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)
                idx = [p, r]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[r, p] = a[p, r] = 0.0
                q[:, idx] = q[:, idx] @ g

    w = np.real(np.diag(a))
    order = np.argsort(w)
    return w[order], q[:, order]


def hermitian_eigenvalues(m) -> np.ndarray:
    return jacobi_eigh(m)[0]


def min_eigenvalue(m) -> float:
    return float(hermitian_eigenvalues(m)[0])


def is_psd(m, tol: float = 1e-12) -> bool:
    return min_eigenvalue(m) >= -tol
