import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.integrate import solve_ivp

from decaylab import scalar
from decaylab.dynamics import apply_kraus, completeness_residual, integrate_master
from decaylab.linalg import min_eigenvalue
from decaylab.scalar import PARTICLE, VACUUM, ScalarParams
from decaylab.units import HBAR_MEV_S, mev_to_rate, parse_rate, rate_to_mev

rates = st.floats(0.05, 5.0)
times = st.floats(0.0, 10.0)


@st.composite
def admissible(draw):
    g, lam, mu = draw(rates), draw(rates), draw(st.floats(0.0, 5.0))
    denom = 4 * mu ** 2 + (g - lam) ** 2
    # near lam = gamma, mu = 0 the generic-branch bound diverges; cap it
    zmax = min(np.sqrt(4 * g * lam / denom), 50.0) if denom > 0 else g
    z = draw(st.floats(0.0, 1.0)) * zmax * np.exp(1j * draw(st.floats(0, 2 * np.pi)))
    p = ScalarParams(gamma=g, mass_freq=mu, lam=lam, z=z)
    assume(scalar.z_admissible(p))
    return p


def random_state(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def ivp_reference(model, rho0, t):
    def f(_, y):
        return model.rhs(y.reshape(2, 2)).reshape(-1)

    sol = solve_ivp(f, (0, t), np.asarray(rho0, complex).reshape(-1), method="DOP853", rtol=1e-12, atol=1e-14)
    return sol.y[:, -1].reshape(2, 2)


@given(rates, times)
def test_geiger_nutall_law(g, t):
    p = ScalarParams(gamma=g)
    rho = scalar.evolve_scalar_general(PARTICLE, p, t)
    assert rho[0, 0].real == pytest.approx(np.exp(-g * t), abs=1e-15)
    assert scalar.survival_probability(g, t) == pytest.approx(np.exp(-g * t))


def test_survival_at_one_lifetime():
    assert scalar.evolve_scalar_general(PARTICLE, ScalarParams(gamma=1.0), 1.0)[0, 0].real == pytest.approx(0.367879441171)


@given(admissible(), st.floats(0.01, 8.0), st.integers(0, 1000))
def test_kraus_reproduces_closed_form(p, t, seed):
    rho = random_state(seed)
    ks = scalar.scalar_kraus_general(p, t)
    assert len(ks) == 3
    assert completeness_residual(ks) <= 1e-13
    assert np.abs(apply_kraus(rho, ks) - scalar.evolve_scalar_general(rho, p, t)).max() <= 1e-13


@given(admissible(), st.floats(0.01, 8.0))
def test_choi_psd_when_admissible(p, t):
    assert min_eigenvalue(scalar.scalar_choi(p, t)) >= -1e-12
    assert scalar.scalar_positivity_ok(p, t)


@pytest.mark.parametrize("z", [0.3, 0.4 - 0.2j, 1j * 0.25])
def test_generator_matches_closed_form(z):
    p = ScalarParams(gamma=1.0, mass_freq=1.7, lam=0.6, z=z)
    rho = random_state(3)
    ref = ivp_reference(scalar.scalar_lindblad(p), rho, 2.5)
    assert np.abs(ref - scalar.evolve_scalar_general(rho, p, 2.5)).max() <= 1e-10
    assert np.abs(integrate_master(scalar.scalar_lindblad(p), rho, 2.5) - ref).max() <= 1e-9


def test_degenerate_branch():
    p = ScalarParams(gamma=2.0, mass_freq=0.0, lam=2.0, z=0.8)
    assert p.degenerate
    t = 0.7
    a11, a12 = scalar.scalar_coefficients(p, t)
    assert a11 == pytest.approx(0.8 * t * np.exp(-2.0 * t))
    assert a12 == pytest.approx(np.exp(-2.0 * t))
    rho = random_state(5)
    ref = ivp_reference(scalar.scalar_lindblad(p), rho, t)
    assert np.abs(ref - scalar.evolve_scalar_general(rho, p, t)).max() <= 1e-10
    assert np.abs(apply_kraus(rho, scalar.scalar_kraus_general(p, t)) - ref).max() <= 1e-10


def test_superselected_kraus_pair():
    ks = scalar.scalar_kraus_superselected(3.0, 5.0, 0.4)
    assert len(ks) == 2
    assert completeness_residual(ks) <= 1e-15
    out = apply_kraus(0.5 * np.ones((2, 2)), ks)
    # particle-vacuum coherence decays at gamma/2 and rotates at the mass frequency
    assert out[0, 1] == pytest.approx(0.5 * np.exp(-0.4 * (1.5 + 5j)))
    assert scalar.scalar_kraus_general(ScalarParams(gamma=3.0, mass_freq=5.0), 0.4).operators[0] == pytest.approx(ks.operators[0])


def test_superselection_with_lambda_zero():
    p = ScalarParams(gamma=1.0, mass_freq=2.0)
    out = scalar.evolve_scalar_general(PARTICLE, p, 1.3)
    assert out[0, 1] == 0 and out[1, 0] == 0
    assert scalar.is_valid_state(out)


def test_too_large_z():
    p = ScalarParams(gamma=1.0, mass_freq=0.0, lam=0.5, z=3.0)
    assert not scalar.z_admissible(p)
    with pytest.raises(ValueError, match="z too large"):
        scalar.scalar_lindblad(p)
    assert min(min_eigenvalue(scalar.scalar_choi(p, t)) for t in np.linspace(0.05, 3, 30)) < -1e-6


@pytest.mark.parametrize("kwargs", [
    dict(gamma=0.0), dict(gamma=1.0, lam=-1.0), dict(gamma=1.0, mu=-0.1),
    dict(gamma=1.0, lam=0.0, z=0.1),
])
def test_parameter_validation(kwargs):
    with pytest.raises(ValueError):
        ScalarParams(**kwargs)


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        scalar.evolve_scalar_general(PARTICLE, ScalarParams(gamma=1.0), -1.0)


def test_trace_preserved_for_any_input():
    p = ScalarParams(gamma=1.3, mass_freq=0.4, lam=0.9, z=0.2 + 0.1j)
    x = np.array([[0.2 + 0.3j, 1.0], [-2.0j, 0.7]])
    assert np.trace(scalar.scalar_map(p, 1.1)(x)) == pytest.approx(np.trace(x))


def test_pure_states():
    assert np.array_equal(scalar.pure_state("pi0"), PARTICLE)
    assert np.array_equal(scalar.pure_state("vacuum"), VACUUM)
    with pytest.raises(ValueError):
        scalar.pure_state("K0")


def test_units():
    assert mev_to_rate(HBAR_MEV_S) == pytest.approx(1.0)
    assert rate_to_mev(mev_to_rate(134.9766)) == pytest.approx(134.9766)
    assert parse_rate("1.84e-12 MeV") == pytest.approx(1.84e-12 / 6.58211915e-22)
    assert parse_rate("1.84e-12MeV") == parse_rate("1.84e-12 mev")
    assert parse_rate("2.8e9") == 2.8e9
