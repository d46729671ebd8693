import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from disorder_rmt.ensembles import Dist, DysonString, FrischLloyd, KronigPenney, RandomStream
from disorder_rmt.errors import NonConvergence, ValidationError
from disorder_rmt.riccati import HistogramDensity, RiccatiOrbitConfig, stationary_histogram, symmetric_edges
from disorder_rmt.scattering import (chi2_phase_test, decay_rate, histogram_cdf, iterates, phase_bin_probabilities,
                                     phase_density_from_f, phase_of, reflexion_phase_histogram, rt_coefficients,
                                     transmission_from_product, wave_matching)
from disorder_rmt.spectral import Realization, sample_realization

DISORDERED = FrischLloyd(coupling=Dist.uniform(-2.0, 2.0), ell=1.0, E=1.0)

cells = st.lists(st.tuples(st.floats(0.05, 3.0), st.floats(-3.0, 3.0)), min_size=1, max_size=4)


def _real(c):
    return Realization(np.array([x[0] for x in c]), np.array([0.0] + [x[1] for x in c[1:]]))


# ---- single samples


def test_no_scatterers():
    r = rt_coefficients(Realization([7.3], [0.0]))
    assert abs(r.R) < 1e-15
    assert abs(r.T) ** 2 == pytest.approx(1.0, abs=1e-15)
    assert math.isnan(r.phase)


def test_single_impurity_frobenius_formula():
    # one kick v: |Pi|_F^2 = 2 + v^2, so v = 1.5 gives 4/(2 + 4.25)
    real = Realization([1.0, 1.0], [0.0, 1.5])
    assert transmission_from_product(real) == pytest.approx(0.64, rel=1e-14)
    assert abs(rt_coefficients(real).T) ** 2 == pytest.approx(0.64, rel=1e-12)


@settings(max_examples=200)
@given(st.integers(0, 2 ** 32), st.floats(10, 300), st.floats(0.3, 3))
def test_unitarity(seed, L, k):
    r = rt_coefficients(sample_realization(DISORDERED, seed, L=L), k)
    assert r.unitarity_defect <= 1e-10
    assert abs(r.T) ** 2 == pytest.approx(r.T2_product, rel=1e-9, abs=1e-300)


@given(st.integers(0, 2 ** 32), st.floats(1, 15))
def test_upper_half_plane(seed, L):
    # Im X shrinks like e^{-2 gamma L}, so strict positivity is only resolvable on short samples
    assert rt_coefficients(sample_realization(DISORDERED, seed, L=L)).min_im > 0


@given(cells, st.floats(0.3, 3))
def test_matches_wave_matching(c, k):
    real = _real(c)
    R, T = wave_matching(real, k)
    r = rt_coefficients(real, k)
    assert abs(T) ** 2 == pytest.approx(r.T2_product, abs=1e-10)
    assert abs(R) == pytest.approx(abs(r.R), abs=1e-10)


def test_strings_rejected():
    with pytest.raises(ValidationError):
        rt_coefficients(sample_realization(DysonString(), 0, L=5.0))
    with pytest.raises(ValidationError):
        rt_coefficients(Realization([1.0], [0.0]), k=0.0)


# ---- decay with length


def test_disordered_decay_matches_gamma():
    fit = decay_rate(DISORDERED, 1.0, [50, 100, 150, 200, 250, 300], 100, RandomStream(1), gamma_L=2e5)
    assert fit.slope == pytest.approx(-fit.gamma_ref, rel=0.05)
    assert fit.r2 >= 0.99
    assert set(json.loads(fit.to_json())) == {"slope", "intercept", "r2", "gamma_ref"}


def test_kronig_penney_band_flat():
    fit = decay_rate(KronigPenney(v=1.0, ell=1.0), 2.0, [50, 100, 150, 200], 4, RandomStream(2), gamma_L=1e5)
    assert abs(fit.slope) <= 1e-3


def test_free_transmission_total():
    fit = decay_rate(FrischLloyd(coupling=Dist.constant(0.0)), 1.0, [50, 100, 150], 3, RandomStream(3))
    assert abs(fit.slope) < 1e-14
    assert np.all(np.abs(fit.means) < 1e-14)


def test_decay_preconditions():
    with pytest.raises(ValidationError):
        decay_rate(DISORDERED, 1.0, [10, 20], 4, 0)
    with pytest.raises(ValidationError):
        decay_rate(DISORDERED, 1.0, [10, 20, 30], 1, 0)
    with pytest.raises(ValidationError):
        decay_rate(DysonString(), 1.0, [10, 20, 30], 4, 0)


# ---- reflexion phase


def test_free_phase_degenerate():
    assert reflexion_phase_histogram(FrischLloyd(coupling=Dist.constant(0.0)), 10, 0).degenerate


def test_phase_matches_stationary_density():
    hist = stationary_histogram(DISORDERED, RiccatiOrbitConfig(steps=4_000_000), symmetric_edges(1000.0, 2000),
                                RandomStream(4))
    ph = reflexion_phase_histogram(DISORDERED, 4000, RandomStream(5))
    assert not ph.degenerate
    _, pval, _, _ = chi2_phase_test(ph, hist, 24)
    assert pval >= 0.01


def test_phase_density_of_cauchy_is_uniform():
    th = np.linspace(-3.0, 3.0, 13)
    cauchy = lambda z: 1 / (math.pi * (1 + np.asarray(z) ** 2))
    np.testing.assert_allclose(phase_density_from_f(cauchy, th), 1 / (2 * math.pi), rtol=1e-12)


@pytest.mark.parametrize("loc,scale", [(0.0, 1.0), (0.7, 2.0), (-1.5, 0.3)])
def test_phase_density_normalized(loc, scale):
    f = stats.cauchy(loc=loc, scale=scale).pdf
    total = integrate.quad(lambda t: float(phase_density_from_f(f, t)), -math.pi, math.pi, limit=400,
                           epsabs=1e-12, epsrel=1e-12)[0]
    assert total == pytest.approx(1.0, abs=1e-6)


def test_phase_bin_probabilities_sum_to_one():
    z = np.random.default_rng(6).standard_cauchy(100_000) * 1.7 + 0.3
    hist = HistogramDensity.from_samples(z, symmetric_edges(50.0, 100))
    p = phase_bin_probabilities(hist, np.linspace(-math.pi, math.pi, 33))
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(p >= 0)
    assert histogram_cdf(hist, np.array([-np.inf, np.inf])).tolist() == [0.0, 1.0]


@given(st.floats(-1e6, 1e6))
def test_phase_of_is_arg_R(X):
    R = -(X - 1j) / (X + 1j)
    th = float(phase_of(X))
    assert -math.pi <= th < math.pi
    assert abs(np.exp(1j * th) - R) < 1e-9


def test_backward_converges_forward_wanders():
    real = sample_realization(DISORDERED, RandomStream(7), n=3000)
    back = iterates(real, direction="backward")
    fwd = iterates(real, direction="forward")
    # both orbits approach the boundary of the half-plane; Im stays positive down to rounding
    for z in (back, fwd):
        resolved = np.abs(z.imag) > 1e-12 * np.maximum(1.0, np.abs(z))
        assert np.all(z.imag[resolved] > 0) and resolved[:10].all()
    tail_b = back[-500:]
    assert np.max(np.abs(tail_b - tail_b[-1])) < 1e-8 * max(1.0, abs(tail_b[-1]))
    assert np.std(np.abs(fwd[-500:])) > 0.1


def test_band_interior_does_not_converge():
    with pytest.raises(NonConvergence):
        reflexion_phase_histogram(KronigPenney(v=1.0, ell=1.0, E=4.0), 1, 0, cap=5000)
