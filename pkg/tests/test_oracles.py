import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, optimize

from disorder_rmt import oracles as O
from disorder_rmt import specfun
from disorder_rmt.ensembles import Dist, FrischLloyd, RandomStream, cell_matrices, density_kummer
from disorder_rmt.errors import DomainError, PoleHit
from disorder_rmt.riccati import RiccatiOrbitConfig, ergodic_omega

# ---- free case


def test_free_case_examples():
    assert O.free_case(math.pi / 2, 4.0).N == pytest.approx(2 / math.pi, rel=1e-15)
    assert O.free_case(math.pi / 2, -1.0).w == pytest.approx(-1.0, rel=1e-15)
    assert O.free_case(0.0, 1.0).sigma_prime == pytest.approx(1 / math.pi, rel=1e-15)


@given(st.floats(0.05, 3.0), st.floats(0.01, 20))
def test_free_density_is_im_w(alpha, lam):
    fc = O.free_case(alpha, lam)
    assert fc.sigma_prime == pytest.approx(fc.w.imag / math.pi, rel=1e-10)


def test_free_case_pole():
    alpha = 2.0  # k = -tan(alpha) > 0 needs alpha in (pi/2, pi)
    with pytest.raises(PoleHit):
        O.free_case(alpha, -math.tan(alpha) ** 2)


# ---- Kronig-Penney


@given(st.floats(0.01, 10), st.floats(0.1, 3))
def test_kp_no_impurities_in_band(k, ell):
    assert O.kronig_penney_in_band(k, ell, 0.0) or abs(math.cos(k * ell)) == 1.0


def test_kp_low_energy_gap():
    assert not O.kronig_penney_in_band(0.1, 1.0, 1.0)
    assert math.cos(0.1) + 5 * math.sin(0.1) == pytest.approx(1.494, abs=1e-3)


def test_kp_band_edges_have_trace_two():
    f = lambda k: abs(math.cos(k) + math.sin(k) / (2 * k)) - 1.0
    edge = optimize.brentq(f, 0.1, 1.5, xtol=1e-15)
    a, b, c, d = cell_matrices(edge * edge, np.array([1.0]), np.array([1.0]))
    assert abs(a[0] + d[0]) == pytest.approx(2.0, abs=1e-12)
    assert O.kronig_penney_gamma(edge + 1e-3, 1.0, 1.0) == 0.0
    assert O.kronig_penney_gamma(edge - 1e-3, 1.0, 1.0) > 0.0


# ---- homogeneous string


def test_homogeneous_midband():
    for m, ell in [(1.0, 1.0), (2.0, 0.5), (0.3, 3.0)]:
        assert O.homogeneous_string(2 / (m * ell), m, ell).N == pytest.approx(1 / (2 * ell), rel=1e-14)


def test_homogeneous_negative_lambda():
    hs = O.homogeneous_string(-1.0, 1.0, 1.0)
    assert hs.Omega.real == pytest.approx(math.log((3 + math.sqrt(5)) / 2), rel=1e-14)
    assert hs.w.real == pytest.approx(-(1 - math.exp(-hs.Omega.real)), rel=1e-14)


def test_homogeneous_small_lambda_matches_kotani_form():
    lam, m, ell = 1e-4, 1.3, 0.7
    hs = O.homogeneous_string(lam, m, ell)
    assert hs.sigma_prime / O.kotani_N_asymptote(lam, m, ell) == pytest.approx(1.0, rel=1e-3)
    assert hs.N / O.kotani_N_asymptote(lam, m, ell) == pytest.approx(1.0, rel=1e-3)


def test_homogeneous_domain():
    with pytest.raises(DomainError):
        O.homogeneous_string(5.0, 1.0, 1.0)


# ---- white noise


def test_halperin_origin():
    ai, bi, _, _ = specfun.airy(0.0)
    assert O.halperin_N(0.0, 2.0) == pytest.approx(1 / (math.pi ** 2 * (ai * ai + bi * bi)), rel=1e-14)


@pytest.mark.parametrize("sigma", [0.5, 2.0, 8.0])
def test_halperin_two_formulas(sigma):
    for E in np.linspace(-10, 10, 41):
        assert O.halperin_N(E, sigma) == pytest.approx(O.halperin_N_integral(E, sigma), rel=1e-8)


@pytest.mark.parametrize("E,sigma", [(0.0, 2.0), (1.0, 1.0), (-1.0, 1.0)])
def test_halperin_density_tail(E, sigma):
    N = O.halperin_N(E, sigma)
    for z in (-50.0, 50.0):
        assert z * z * O.halperin_density(z, E, sigma) == pytest.approx(N, rel=0.01)


@pytest.mark.parametrize("E,sigma", [(0.0, 2.0), (-1.0, 1.0), (2.0, 0.5)])
def test_halperin_density_normalized(E, sigma):
    f = lambda z: O.halperin_density(z, E, sigma)
    N = O.halperin_N(E, sigma)
    mass = integrate.quad(f, -60, 60, limit=400, epsrel=1e-9)[0] + 2 * N / 60
    assert mass == pytest.approx(1.0, abs=1e-4)


def test_halperin_omega_imaginary_part():
    for E in (-2.0, 0.0, 3.0, -9.0):
        Om = O.halperin_omega(E, 1.0)
        assert -Om.imag / math.pi == pytest.approx(O.halperin_N(E, 1.0), rel=1e-10)
        assert Om.real > 0


def test_lifshitz_ratio():
    assert O.lifshitz_tail(-8.0, 1.0) / math.log(O.halperin_N(-8.0, 1.0)) == pytest.approx(1.0, abs=0.1)


# ---- strings


def test_kotani_value():
    j1, y1 = specfun.bessel_j1y1(2.0)
    assert O.kotani_N(1.0, 1.0, 1.0) == pytest.approx(1 / (math.pi ** 2 * (j1 * j1 + y1 * y1)), rel=1e-14)


def test_kotani_small_lambda():
    assert O.kotani_N(1e-4, 1.0, 1.0) / O.kotani_N_asymptote(1e-4, 1.0, 1.0) == pytest.approx(1.0, rel=0.02)


def test_kotani_positive_increasing():
    lam = np.linspace(1e-3, 10, 1000)
    N = np.array([O.kotani_N(x, 1.0, 1.0) for x in lam])
    assert np.all(N > 0) and np.all(np.diff(N) > 0)


def test_kotani_letac_value_and_dilution():
    assert O.kotani_letac_mean_w(-1.0, 1.0, 1.0) == pytest.approx(specfun.bessel_k(0, 2.0) / specfun.bessel_k(1, 2.0),
                                                                  rel=1e-14)
    # many light masses at short spacing: a uniform string of unit density
    assert O.kotani_letac_mean_w(-1.0, 0.01, 0.01) == pytest.approx(1.0, rel=0.05)


def test_nieuwenhuizen_weak_coupling_limit():
    assert O.nieuwenhuizen_omega_negative(-1.0, 1.0, 1e-2) == pytest.approx(1.0, rel=1e-2)
    assert O.nieuwenhuizen_omega_negative(-1.0, 1.0, 0.0) == 1.0


def test_nieuwenhuizen_above_free_value():
    for lam in np.linspace(-4.0, -0.25, 16):
        assert O.nieuwenhuizen_omega_negative(lam, 1.0, 1.0) > math.sqrt(-lam)


def test_nieuwenhuizen_against_ergodic_average():
    spec = FrischLloyd(coupling=Dist.exponential(1.0), ell=1.0, E=-1.0)
    est = ergodic_omega(spec, RiccatiOrbitConfig(steps=4_000_000), RandomStream(41))
    assert est.value == pytest.approx(O.nieuwenhuizen_omega_negative(-1.0, 1.0, 1.0), rel=0.01)


@pytest.mark.parametrize("p,q,lam", [(1.0, 1.0, -1.0), (2.5, 0.5, -0.3), (0.7, 2.0, -4.0)])
def test_type_i_mean_is_kummer_mean(p, q, lam):
    r = -lam / q
    mean = integrate.quad(lambda y: y * density_kummer(p, 0.0, r, y), 0, np.inf, epsabs=1e-13, epsrel=1e-12,
                          limit=200)[0]
    assert O.dyson_typeI(lam, p, q) / lam == pytest.approx(mean, rel=1e-6)
    assert O.kummer_mean(p, r) == pytest.approx(mean, rel=1e-6)


def test_type_i_asymptote_shape():
    lam = np.geomspace(1e-6, 1e-2, 20)
    a = np.array([O.dyson_typeI_asymptote(x, 1.0) for x in lam])
    np.testing.assert_allclose(a * np.log(lam) ** 2, 1.0, rtol=1e-12)
    assert np.all(np.diff(a) > 0)


# ---- products, tails and levels


def test_cohen_newman_rotation():
    assert abs(O.cohen_newman_gamma_quadrature(1.0, 0.0)) < 1e-15


@given(st.floats(0.2, 5), st.floats(-4, 4))
def test_cohen_newman_quadrature_closed_form(alpha, beta):
    assert O.cohen_newman_gamma_quadrature(alpha, beta) == pytest.approx(O.cohen_newman_gamma_closed(alpha, beta),
                                                                        abs=1e-10)


def test_tail_and_level_formulas():
    assert O.lifshitz_tail(-4.0, 1.0) == pytest.approx(-64 / 3, rel=1e-15)
    assert O.gumbel_cdf(0.0) == pytest.approx(1 - math.exp(-1), rel=1e-15)
    assert math.fsum(O.level_poisson_pmf(n, 3.0) for n in range(80)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        O.lifshitz_tail(1.0, 1.0)


GRID_SCANS = {
    "halperin_N": (lambda x: O.halperin_N(x, 1.0), (-10, 10)),
    "halperin_N_integral": (lambda x: O.halperin_N_integral(x, 1.0), (-10, 10)),
    "kotani_N": (lambda x: O.kotani_N(x, 1.0, 1.0), (1e-3, 10)),
    "kotani_letac_mean_w": (lambda x: O.kotani_letac_mean_w(x, 1.0, 1.0), (-10, -1e-3)),
    "nieuwenhuizen": (lambda x: O.nieuwenhuizen_omega_negative(x, 1.0, 1.0), (-10, -1e-2)),
    "dyson_typeI": (lambda x: O.dyson_typeI(x, 1.0, 1.0), (-10, -1e-2)),
    "homogeneous_N": (lambda x: O.homogeneous_string(x, 1.0, 1.0).N, (1e-3, 3.999)),
    "free_N": (lambda x: O.free_case(math.pi / 2, x).N, (-5, 5)),
}


@pytest.mark.parametrize("name", sorted(GRID_SCANS))
def test_oracle_finite_on_grid(name):
    fn, (lo, hi) = GRID_SCANS[name]
    n = 200 if name in ("nieuwenhuizen", "dyson_typeI", "halperin_N_integral") else 1000
    vals = np.array([fn(x) for x in np.linspace(lo, hi, n)])
    assert np.all(np.isfinite(vals))


def test_oracle_grid_csv(tmp_path):
    path = tmp_path / "g.csv"
    vals = O.oracle_grid(lambda x: O.free_case(math.pi / 2, x).N, [1.0, 4.0], path, header=("lam", "N"))
    assert vals == pytest.approx([1 / math.pi, 2 / math.pi])
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["lam", "N"] and float(rows[2][1]) == pytest.approx(2 / math.pi)
