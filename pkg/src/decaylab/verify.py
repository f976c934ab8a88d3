"""Invariant suites behind ``decaylab verify``.

Each suite returns a :class:`SuiteResult` carrying the worst residual it saw
and the tolerance it was held to. Suites never raise: a failure inside a
suite (e.g. a Kraus set that does not exist because lambda exceeds its
bound) is reported as a failed result.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import bounds, meson, scalar
from .dynamics import apply_kraus, completeness_residual, integrate_master, semigroup_residual
from .linalg import min_eigenvalue
from .presets import ParticlePreset, b0, k0, mass_freq, pi0


@dataclass
class SuiteResult:
    name: str
    max_residual: float
    tolerance: float
    passed: bool
    detail: str = ""


def _result(name, residual, tol, detail=""):
    return SuiteResult(name, float(residual), tol, bool(residual <= tol), detail)


def _random_physical_tilde(rng, delta_L: float) -> meson.TildeState:
    # random mixed state in the CP basis with no particle-vacuum coherence
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    block = a @ a.conj().T
    rho = np.zeros((3, 3), dtype=complex)
    rho[:2, :2] = block
    rho[2, 2] = rng.uniform(0, 1) * np.trace(block).real
    rho /= np.trace(rho).real
    eps = meson.CpViolation.from_delta_L(delta_L)
    m = meson.convert(rho, meson.Basis.CP_ORTHONORMAL, meson.Basis.SL_TILDE, eps)
    m[0, 2] = m[1, 2] = m[2, 0] = m[2, 1] = 0.0
    return meson.TildeState(m, delta_L)


def choi_times(p: meson.MesonParams, count: int = 200) -> np.ndarray:
    """Sample times for Choi scans: log-spaced around the active window ``(0, t_plus]``."""
    tp = bounds.t_plus(p)
    return np.logspace(np.log10(tp) - 4, np.log10(tp) + 1, count)


def suite_choi(presets: list[ParticlePreset], tol: float = 1e-12) -> SuiteResult:
    worst, witness = 0.0, []
    for pr in presets:
        p = pr.params
        for t in choi_times(p):
            lo = min_eigenvalue(meson.meson_choi(p, float(t)))
            if -lo > worst:
                worst = -lo
            if lo < -tol:
                witness.append(f"{pr.name}: t={t:.6e} min eig {lo:.3e}")
                break
    return _result("choi_psd", worst, tol, "; ".join(witness) or "all sampled times PSD")


def suite_kraus(presets: list[ParticlePreset]) -> list[SuiteResult]:
    meson_worst, ortho_worst = 0.0, 0.0
    for pr in presets:
        p = pr.params
        for t in np.array([0.1, 0.5, 1.0, 3.0]) * p.tau_S:
            meson_worst = max(meson_worst, completeness_residual(meson.kraus_breve(p, t)))
            ortho_worst = max(ortho_worst, completeness_residual(meson.kraus_orthonormal(p, pr.epsilon, t)))
    g = pi0().params.gamma
    ss_worst = max(completeness_residual(scalar.scalar_kraus_superselected(g, 0.0, t / g))
                   for t in np.linspace(0, 10, 51))
    return [
        _result("kraus_completeness_metric_g", meson_worst, 1e-11),
        _result("kraus_completeness_orthonormal", ortho_worst, 1e-11),
        _result("kraus_completeness_scalar_superselected", ss_worst, 1e-15),
    ]


def suite_trace(presets: list[ParticlePreset], seed: int = 0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for pr in presets:
        p = pr.params
        for _ in range(10):
            r0 = _random_physical_tilde(rng, p.delta_L)
            for t in np.linspace(0, 10 * p.tau_L, 25):
                worst = max(worst, abs(meson.evolve_tilde(r0, p, t).metric_trace() - r0.metric_trace()))
    sp = pi0().params
    for t in np.linspace(0, 10, 25) / sp.gamma:
        worst = max(worst, abs(np.trace(scalar.evolve_scalar_general(scalar.PARTICLE, sp, t)) - 1))
    return _result("trace_preservation", worst, 1e-13)


def suite_semigroup(presets: list[ParticlePreset]) -> SuiteResult:
    worst = 0.0
    for pr in presets:
        p = pr.params
        r0 = meson.prepare_tilde("K0", p.delta_L)
        worst = max(worst, semigroup_residual(lambda s, t: meson.evolve_tilde(s, p, t), r0, p.tau_S, 2 * p.tau_S))
    sp = scalar.ScalarParams(gamma=1.0, mass_freq=0.7, lam=0.4, z=0.05)
    rho = np.array([[0.5, 0.2 - 0.1j], [0.2 + 0.1j, 0.5]])
    worst = max(worst, semigroup_residual(lambda s, t: scalar.evolve_scalar_general(s, sp, t), rho, 0.3, 0.3))
    return _result("semigroup", worst, 1e-12)


def meson_oracle_residual(p: meson.MesonParams, e: meson.CpViolation, r0: meson.TildeState,
                          t: float, steps: int | None = None) -> float:
    """Pairwise max entrywise gap between closed form, Kraus conjugation and RK4."""
    v = meson.v_matrix(e)
    closed = v @ meson.evolve_tilde(r0, p, t).matrix @ v.conj().T
    rho0 = v @ r0.matrix @ v.conj().T
    kraus = apply_kraus(rho0, meson.kraus_orthonormal(p, e, t))
    rk4 = integrate_master(meson.meson_lindblad(p, e), rho0, t, steps)
    return max(np.abs(closed - kraus).max(), np.abs(closed - rk4).max(), np.abs(kraus - rk4).max())


def scalar_oracle_residual(p: scalar.ScalarParams, rho0, t: float, steps: int | None = None) -> float:
    closed = scalar.evolve_scalar_general(rho0, p, t)
    kraus = apply_kraus(rho0, scalar.scalar_kraus_general(p, t))
    rk4 = integrate_master(scalar.scalar_lindblad(p), rho0, t, steps)
    return max(np.abs(closed - kraus).max(), np.abs(closed - rk4).max(), np.abs(kraus - rk4).max())


def suite_oracle(presets: list[ParticlePreset]) -> SuiteResult:
    worst = 0.0
    for pr in presets:
        p = pr.params
        r0 = meson.prepare_tilde("K0", p.delta_L)
        worst = max(worst, meson_oracle_residual(p, pr.epsilon, r0, 3 * p.tau_S))
    sp = scalar.ScalarParams(gamma=1.0, mass_freq=2.0, lam=0.5, z=0.1)
    rho = np.array([[0.6, 0.2 + 0.1j], [0.2 - 0.1j, 0.4]])
    worst = max(worst, scalar_oracle_residual(sp, rho, 3.0))
    return _result("oracle_equivalence", worst, 1e-7)


def suite_cpt(presets: list[ParticlePreset]) -> SuiteResult:
    worst, tol = 0.0, 1e-12
    for pr in presets:
        m = mass_freq(pr)
        p = replace(pr.params, mean_mass_freq=m)
        h = meson.meson_lindblad(p, pr.epsilon).hamiltonian
        kets = meson.basis_vectors(pr.epsilon)
        diff = abs(meson.expectation(h, kets["K0"]) - meson.expectation(h, kets["K0bar"]))
        worst = max(worst, diff / m)
    return _result("cpt_mass_equality", worst, tol, "relative to mean mass")


def suite_reduction() -> SuiteResult:
    p = meson.MesonParams(1.0, 0.3, 0.8, 0.0, lam=0.0)
    worst = 0.0
    for kind, width in (("KS", p.gamma_S), ("KL", p.gamma_L)):
        r0 = meson.prepare_tilde(kind, 0.0)
        idx = 0 if kind == "KS" else 1
        sp = scalar.ScalarParams(gamma=width)
        for t in np.linspace(0, 10, 41):
            mt = meson.evolve_tilde(r0, p, t).matrix
            st = scalar.evolve_scalar_general(scalar.PARTICLE, sp, t)
            worst = max(worst, abs(mt[idx, idx] - st[0, 0]), abs(mt[2, 2] - st[1, 1]))
    return _result("reduction_delta0", worst, 1e-12)


def suite_geiger_nutall() -> SuiteResult:
    sp = pi0().params
    ts = np.linspace(0, 10, 100) / sp.gamma
    worst = max(abs(scalar.evolve_scalar_general(scalar.PARTICLE, sp, t)[0, 0].real - np.exp(-t * sp.gamma))
                for t in ts)
    return _result("geiger_nutall", worst, 1e-14)


def _guard(name: str, fn: Callable[[], object]) -> list[SuiteResult]:
    try:
        out = fn()
    except Exception as exc:  # reported, not raised
        return [SuiteResult(name, float("inf"), 0.0, False, f"{type(exc).__name__}: {exc}")]
    return out if isinstance(out, list) else [out]


def default_meson_presets(lam: float | None = None, lam_scale: float | None = 0.95) -> list[ParticlePreset]:
    """K0 and B0 presets at ``lam`` or at ``lam_scale * lambda_max``."""
    out = []
    for pr in (k0(), b0()):
        if lam is not None:
            value = lam
        elif lam_scale is not None:
            value = lam_scale * bounds.lambda_max(pr.params).lambda_max
        else:
            value = pr.params.lam
        out.append(pr.with_params(lam=value))
    return out


def run_all(presets: list[ParticlePreset] | None = None, threads: int | None = None) -> list[SuiteResult]:
    presets = presets if presets is not None else default_meson_presets()
    if threads is None:
        threads = int(os.environ.get("DECAYLAB_THREADS", os.cpu_count() or 1))
    jobs = [
        ("choi_psd", lambda: suite_choi(presets)),
        ("kraus_completeness", lambda: suite_kraus(presets)),
        ("trace_preservation", lambda: suite_trace(presets)),
        ("semigroup", lambda: suite_semigroup(presets)),
        ("oracle_equivalence", lambda: suite_oracle(presets)),
        ("cpt_mass_equality", lambda: suite_cpt(presets)),
        ("reduction_delta0", suite_reduction),
        ("geiger_nutall", suite_geiger_nutall),
    ]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        futures = [pool.submit(_guard, name, fn) for name, fn in jobs]
        results = []
        for f in futures:
            results.extend(f.result())
    return results
