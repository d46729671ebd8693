import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from disorder_rmt import oracles
from disorder_rmt.algebra import mobius_apply_array
from disorder_rmt.ensembles import (Dist, DysonString, DysonTypeI, FrischLloyd, RandomStream, gig_cdf, kummer_cdf,
                                    sample_matrices)
from disorder_rmt.errors import ValidationError
from disorder_rmt.riccati import (FirstPassage, HistogramDensity, RiccatiOrbitConfig, backward_limit, cell_map,
                                  dyson_schmidt_residual, ergodic_omega, first_passage_stats, forward_orbit,
                                  gig_fixed_point_samples, pv_gamma, rice_ids, sde_white_noise_run,
                                  stationary_histogram, symmetric_edges)

FREE = Dist.constant(0.0)


def _cauchy_hist(k, edges, n=10 ** 9):
    """Histogram holding the exact Cauchy bin masses (scaled to n samples)."""
    cdf = stats.cauchy(scale=k).cdf
    counts = np.round(np.diff(cdf(edges)) * n).astype(np.int64)
    below = int(round(cdf(edges[0]) * n))
    above = int(round(stats.cauchy(scale=k).sf(edges[-1]) * n))
    centers = 0.5 * (edges[1:] + edges[:-1])
    # odd symmetric first moments cancel in mirror pairs
    return HistogramDensity(edges, counts, int(counts.sum()) + below + above, below, above, counts * centers)


# ---- forward orbits


def test_free_negative_energy_converges_to_stable_point():
    k = 1.5
    cfg = RiccatiOrbitConfig(burnin=1000, steps=2000, z0=-0.3)
    zs = np.concatenate([z for z, _ in forward_orbit(FrischLloyd(coupling=FREE, E=-k * k), cfg, 1)])
    np.testing.assert_allclose(zs, k, rtol=1e-12)


def test_free_positive_energy_crossing_rate():
    k, ell, steps = 2.0, 1.0, 400_000
    cfg = RiccatiOrbitConfig(steps=steps)
    crossings = sum(c for _, c in forward_orbit(FrischLloyd(coupling=FREE, ell=ell, E=k * k), cfg, 2))
    assert crossings / (steps * ell) == pytest.approx(k / math.pi, rel=0.01)


@given(st.floats(-50, 50), st.floats(-10, 10), st.floats(-5, 5))
def test_pure_kick(z, v, E):
    assert float(cell_map(np.array([z]), 0.0, v, E)[0]) == pytest.approx(z + v, rel=1e-12, abs=1e-12)


def test_config_validation():
    with pytest.raises(ValidationError):
        RiccatiOrbitConfig(burnin=10)
    with pytest.raises(ValidationError):
        RiccatiOrbitConfig(zmax=5)


# ---- backward limits


def test_free_backward_limit_exact():
    k = 0.8
    z = backward_limit(FrischLloyd(coupling=FREE, E=-k * k), RiccatiOrbitConfig(), 3, size=50)
    np.testing.assert_allclose(z, k, rtol=1e-11)


def test_kotani_string_backward_mean():
    spec = DysonString(mass=Dist.exponential(1.0), spacing=Dist.exponential(1.0), lam=-1.0)
    z = backward_limit(spec, RiccatiOrbitConfig(), RandomStream(4), size=200_000)
    se = z.std(ddof=1) / math.sqrt(z.size)
    assert abs(z.mean() - oracles.kotani_letac_mean_w(-1.0, 1.0, 1.0)) <= 3 * se


def test_type_i_law_is_kummer():
    p, q, lam = 1.2, 0.8, -1.0
    y = backward_limit(DysonTypeI(p=p, q=q, lam=lam), RiccatiOrbitConfig(), RandomStream(5), size=5000) / -lam
    assert stats.kstest(y, lambda t: kummer_cdf(p, 0.0, -lam / q, t)).pvalue >= 0.01


def test_gig_fixed_point_law():
    p, a, b = 0.7, 1.0, 2.5
    x = gig_fixed_point_samples(p, a, b, 5000, RandomStream(6))
    assert stats.kstest(x, lambda t: gig_cdf(-p, a, b, t)).pvalue >= 0.01


def test_forward_and_backward_agree_in_law():
    spec = FrischLloyd(coupling=Dist.exponential(1.0), ell=1.0, E=-1.0)
    gen = RandomStream(7).generator
    z = np.zeros(5000)
    for _ in range(200):
        z = mobius_apply_array(*sample_matrices(spec, gen, z.size), z)
    zb = backward_limit(spec, RiccatiOrbitConfig(), RandomStream(8), size=5000)
    assert stats.ks_2samp(z, zb).pvalue >= 0.01


def test_omega_backward_equals_forward():
    spec = FrischLloyd(coupling=Dist.exponential(1.0), ell=1.0, E=-1.0)
    zb = backward_limit(spec, RiccatiOrbitConfig(), RandomStream(9), size=200_000)
    fwd = ergodic_omega(spec, RiccatiOrbitConfig(steps=2_000_000), RandomStream(10))
    se = math.hypot(zb.std(ddof=1) / math.sqrt(zb.size), fwd.stderr)
    assert abs(zb.mean() - fwd.value) <= 4 * se
    assert fwd.value == pytest.approx(oracles.nieuwenhuizen_omega_negative(-1.0, 1.0, 1.0), rel=0.02)


def test_type_i_has_no_forward_chain():
    with pytest.raises(ValidationError):
        next(forward_orbit(DysonTypeI(), RiccatiOrbitConfig(), 0))


# ---- histograms


def test_free_histogram_is_cauchy():
    k = 1.0
    edges = symmetric_edges(100.0, 64)
    h = stationary_histogram(FrischLloyd(coupling=FREE, E=k * k), RiccatiOrbitConfig(steps=400_000), edges, 11)
    cdf = stats.cauchy(scale=k).cdf
    p = np.concatenate([[cdf(edges[0])], np.diff(cdf(edges)), [1 - cdf(edges[-1])]])
    obs = np.concatenate([[h.below], h.counts, [h.above]])
    assert stats.chisquare(obs, p * h.n).pvalue >= 0.01


def test_dyson_schmidt_exact_cauchy():
    h = _cauchy_hist(1.0, symmetric_edges(100.0, 64))
    assert dyson_schmidt_residual(h, FrischLloyd(coupling=FREE, E=1.0), 12, n=2_000_000) <= 0.01


def test_dyson_schmidt_point_mass():
    k = 1.0
    edges = np.linspace(-5, 5, 201)
    counts = np.zeros(200, dtype=np.int64)
    counts[np.searchsorted(edges, k, side="right") - 1] = 1_000_000
    h = HistogramDensity(edges, counts, 1_000_000)
    # uniform spread over one bin contracts towards k, so nothing leaves it
    assert dyson_schmidt_residual(h, FrischLloyd(coupling=FREE, E=-k * k), 13, n=200_000) <= 0.05


def test_dyson_schmidt_negative_control():
    edges = symmetric_edges(100.0, 64)
    n = 1_000_000
    w = np.diff(edges)
    inside = np.abs(edges[:-1]) < 3
    counts = np.where(inside, w, 0.0)
    counts = np.round(counts / counts.sum() * n).astype(np.int64)
    h = HistogramDensity(edges, counts, int(counts.sum()))
    assert dyson_schmidt_residual(h, FrischLloyd(coupling=FREE, E=1.0), 14, n=500_000) > 0.2


def test_rice_and_pv_on_cauchy():
    h = _cauchy_hist(1.0, symmetric_edges(1000.0, 400))
    assert rice_ids(h) == pytest.approx(1 / math.pi, rel=0.05)
    assert abs(pv_gamma(h)) <= 0.05


def test_rice_and_pv_on_sampled_free_orbit():
    k = 2.0
    h = stationary_histogram(FrischLloyd(coupling=FREE, E=k * k), RiccatiOrbitConfig(steps=4_000_000),
                             symmetric_edges(1000.0, 200), 15)
    assert rice_ids(h) == pytest.approx(k / math.pi, rel=0.05)
    assert abs(pv_gamma(h)) <= 0.05 * k


def test_histogram_warns_on_tail_mass():
    with pytest.warns(RuntimeWarning):
        stationary_histogram(FrischLloyd(coupling=FREE, E=1.0), RiccatiOrbitConfig(steps=20_000),
                             np.linspace(-1, 1, 11), 16)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=200), st.integers(2, 40))
def test_histogram_normalization(z, half):
    h = HistogramDensity.from_samples(z, symmetric_edges(50.0, 2 * half))
    assert h.integral() == pytest.approx(1 - h.tail_mass, abs=1e-12)
    assert np.all(h.widths > 0)
    assert h.is_symmetric()


def test_histogram_csv_round_trip(tmp_path):
    h = HistogramDensity.from_samples(np.random.default_rng(1).standard_cauchy(1000), symmetric_edges(20.0, 16))
    h.to_csv(tmp_path / "h.csv")
    g = HistogramDensity.from_csv(tmp_path / "h.csv")
    np.testing.assert_array_equal(g.edges, h.edges)
    np.testing.assert_array_equal(g.counts, h.counts)
    assert (g.n, g.below, g.above) == (h.n, h.below, h.above)


# ---- white noise


def test_sde_weak_noise_free_current():
    res = sde_white_noise_run(1.0, 0.01, 2e3, rng=17)
    assert res.N.value == pytest.approx(1 / math.pi, rel=0.02)


def test_sde_reinjection_bias_small():
    a = sde_white_noise_run(1.0, 1.0, 2e4, cfg=RiccatiOrbitConfig(zmax=100), rng=18)
    b = sde_white_noise_run(1.0, 1.0, 2e4, cfg=RiccatiOrbitConfig(zmax=200), rng=18)
    assert abs(a.N.value / b.N.value - 1) < 0.005


def test_sde_matches_halperin_at_moderate_length():
    res = sde_white_noise_run(0.0, 2.0, 2e4, rng=19)
    assert res.N.zscore(oracles.halperin_N(0.0, 2.0)) <= 4


def test_sde_rejects_large_step():
    with pytest.raises(ValidationError):
        sde_white_noise_run(0.0, 1.0, 10.0, dt=0.01)
    with pytest.raises(ValidationError):
        sde_white_noise_run(0.0, 0.0, 10.0)


def test_deep_tail_oracle_slope():
    # the escape rate at E=-4, sigma=0.1 is ~e^{-213}: it is checked through the Airy oracle
    E, sigma = -4.0, 0.1
    assert math.log(oracles.halperin_N(E, sigma)) == pytest.approx(oracles.lifshitz_tail(E, sigma), rel=0.15)


def test_first_passage_exponential():
    E, sigma = -2.5, 2.0
    N = oracles.halperin_N(E, sigma)
    fp = first_passage_stats(E, sigma, 300, RandomStream(20))
    assert abs(fp.mean - 1 / N) <= 3 * fp.stderr
    assert stats.kstest(fp.taus, "expon", args=(0.0, 1 / N)).pvalue >= 0.01
    assert sum(fp.count_table().values()) == fp.counts.size
    assert fp.cdf(np.inf) == 1.0


def test_first_passage_csv(tmp_path):
    fp = FirstPassage(np.array([1.0, 2.5, 0.25]), 1.0, np.array([1, 0, 2]))
    fp.to_csv(tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text().splitlines() == ["tau", "1.0", "2.5", "0.25"]
