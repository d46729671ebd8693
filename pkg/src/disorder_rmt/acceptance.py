"""Acceptance checks: every estimator against its oracle at fixed seeds.

Each ``check_*`` function runs one criterion and returns a `CheckResult`.
Seeds are fixed here once and for all (``SEED`` and the criterion number);
they are never tuned to make a check pass.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import oracles
from .algebra import Matrix2, cosh_distance, frobenius_sq, mobius_apply
from .ensembles import (BougerolLacroix, CohenNewman, Dist, DysonString, DysonTypeI, Fibonacci, FrischLloyd,
                        IsingChain, KronigPenney, RandomFibonacci, RandomStream, gig_cdf, kummer_cdf, levy_exponent)
from .ising import brute_force_partition, partition_function, self_averaging_doubling, top_eigenvalue
from .lyapunov import gamma_norm_growth
from .riccati import (RiccatiOrbitConfig, backward_limit, ergodic_omega, first_passage_stats, gig_fixed_point_samples,
                      pv_gamma, rice_ids, sde_white_noise_run, stationary_histogram, symmetric_edges)
from .scattering import chi2_phase_test, decay_rate, reflexion_phase_histogram, rt_coefficients
from .spectral import (Realization, complex_lyapunov, ids_node_counting, sample_realization, stieltjes_inversion,
                       weyl_cf_truncated)

SEED = 20240601
RANDOM_FIBONACCI_INTERVAL = (0.1239755980, 0.1239755995)


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d}. {self.title}: {self.detail} ({self.seconds:.1f} s)"


def _stream(number: int) -> RandomStream:
    return RandomStream(SEED).child(number)


def _interval_distance(x, lo, hi):
    return 0.0 if lo <= x <= hi else min(abs(x - lo), abs(x - hi))


# ---------------------------------------------------------------------------
# products of random matrices


def check_random_fibonacci(n: int = 10_000_000):
    t0 = time.perf_counter()
    est = gamma_norm_growth(RandomFibonacci(), n, _stream(1))
    secs = time.perf_counter() - t0
    d = _interval_distance(est.value, *RANDOM_FIBONACCI_INTERVAL)
    ok = d <= 3 * est.stderr and secs < 60.0
    return ok, f"gamma={est.value:.10f}+-{est.stderr:.2e}, distance to interval {d / est.stderr:.2f} stderr, " \
               f"runtime {secs:.1f} s"


def check_fibonacci():
    est = gamma_norm_growth(Fibonacci(), 100_000, _stream(2))
    ref = math.log((1 + math.sqrt(5)) / 2)
    err = abs(est.value - ref)
    return err <= 1e-10, f"gamma={est.value:.15f}, |error|={err:.1e}"


def check_bougerol_lacroix(n: int = 10_000_000):
    est = gamma_norm_growth(BougerolLacroix(alpha=2.0, p=0.5), n, _stream(3))
    return abs(est.value) <= 3 * est.stderr, f"gamma={est.value:.3e}+-{est.stderr:.2e}"


def check_cohen_newman(n: int = 10_000_000):
    est = gamma_norm_growth(CohenNewman(alpha=2.0, beta=1.0), n, _stream(4))
    quad = oracles.cohen_newman_gamma_quadrature(2.0, 1.0)
    unhalved = 2.0 * oracles.cohen_newman_gamma_closed(2.0, 1.0)
    z = est.zscore(quad)
    return z <= 3, (f"MC {est.value:.6f}+-{est.stderr:.1e}, quadrature {quad:.6f} ({z:.2f} stderr); "
                    f"unhalved closed form {unhalved:.6f} is off by {abs(est.value - unhalved) / est.stderr:.0f} stderr")


# ---------------------------------------------------------------------------
# spectral estimators


def check_free_ids():
    spec = FrischLloyd(coupling=Dist.constant(0.0), E=4.0)
    est = ids_node_counting(spec, 4.0, L=1e4, rng=_stream(5))
    ref = 2 / math.pi
    rel = abs(est.value / ref - 1)
    return rel <= 0.01, f"N(4)={est.value:.5f}, 2/pi={ref:.5f}, rel. error {rel:.1e}"


def check_kronig_penney():
    spec = KronigPenney(v=1.0, ell=1.0)
    parts, ok = [], True
    for i, k in enumerate((1.5, 2.0, 2.5)):
        if not oracles.kronig_penney_in_band(k, 1.0, 1.0):
            return False, f"k={k} is not in a band"
        g = complex_lyapunov(spec, k * k, L=1e5, rng=_stream(6).child(i)).gamma.value
        ok &= g <= 1e-3
        parts.append(f"k={k}: {g:.1e}")
    g = complex_lyapunov(spec, 0.01, L=1e4, rng=_stream(6).child(9)).gamma.value
    ref = oracles.kronig_penney_gamma(0.1, 1.0, 1.0)
    ok &= g >= 0.05
    parts.append(f"gap k=0.1: {g:.4f} (band formula {ref:.4f})")
    return ok, "Re Omega " + ", ".join(parts)


def check_kotani():
    parts, ok = [], True
    for i, lam in enumerate((0.5, 1.0, 2.0, 4.0)):
        spec = DysonString(mass=Dist.exponential(1.0), spacing=Dist.exponential(1.0), lam=lam)
        est = ids_node_counting(spec, L=1e6, rng=_stream(7).child(i))
        ref = oracles.kotani_N(lam, 1.0, 1.0)
        rel = abs(est.value / ref - 1)
        ok &= rel <= 0.02
        parts.append(f"N({lam})={est.value:.5f} vs {ref:.5f}")
    spec = DysonString(mass=Dist.exponential(1.0), spacing=Dist.exponential(1.0), lam=-1.0)
    z = backward_limit(spec, RiccatiOrbitConfig(), _stream(7).child(9), size=1_000_000)
    mean, se = float(z.mean()), float(z.std(ddof=1) / math.sqrt(z.size))
    ref = oracles.kotani_letac_mean_w(-1.0, 1.0, 1.0)
    ok &= abs(mean - ref) <= 3 * se
    parts.append(f"E[-w(-1)]={mean:.5f}+-{se:.1e} vs {ref:.5f}")
    return ok, "; ".join(parts)


def check_nieuwenhuizen():
    spec = FrischLloyd(coupling=Dist.exponential(1.0), ell=1.0, E=-1.0)
    est = ergodic_omega(spec, RiccatiOrbitConfig(steps=10_000_000), _stream(8))
    ref = oracles.nieuwenhuizen_omega_negative(-1.0, 1.0, 1.0)
    rel = abs(est.value / ref - 1)
    return rel <= 0.01, f"Omega(-1)={est.value:.5f}+-{est.stderr:.1e}, Whittaker {ref:.5f}, rel. error {rel:.1e}"


def check_letac_laws(size: int = 20_000):
    p, a, b = 1.5, 2.0, 3.0
    x = gig_fixed_point_samples(p, a, b, size, _stream(9).child(0))
    ks1 = stats.kstest(x, lambda t: gig_cdf(-p, a, b, t))
    pk, qk, lam = 1.5, 0.5, -2.0
    spec = DysonTypeI(p=pk, q=qk, lam=lam)
    y = backward_limit(spec, RiccatiOrbitConfig(), _stream(9).child(1), size=size) / (-lam)
    ks2 = stats.kstest(y, lambda t: kummer_cdf(pk, 0.0, -lam / qk, t))
    ok = ks1.pvalue >= 0.01 and ks2.pvalue >= 0.01
    return ok, f"GIG fixed point KS p={ks1.pvalue:.3f}; Type-I Kummer law KS p={ks2.pvalue:.3f}"


def check_type_i_mean(size: int = 1_000_000):
    spec = DysonTypeI(p=1.0, q=1.0, lam=-1.0)
    s = backward_limit(spec, RiccatiOrbitConfig(), _stream(10), size=size)
    w = -s
    mean, se = float(w.mean()), float(w.std(ddof=1) / math.sqrt(w.size))
    ref = oracles.dyson_typeI(-1.0, 1.0, 1.0)
    return abs(mean - ref) <= 3 * se, f"E[w(-1)]={mean:.5f}+-{se:.1e}, oracle {ref:.5f}"


# ---------------------------------------------------------------------------
# white noise


def check_halperin():
    parts, ok = [], True
    worst = 0.0
    for E in np.linspace(-4.0, 4.0, 100):
        a = oracles.halperin_N(float(E), 1.0)
        b = oracles.halperin_N_integral(float(E), 1.0)
        worst = max(worst, abs(a / b - 1))
    ok &= worst <= 1e-8
    parts.append(f"Airy vs integral N max rel. diff {worst:.1e}")
    res = sde_white_noise_run(0.0, 2.0, 2e5, rng=_stream(11), bins=100)
    ref = oracles.halperin_N(0.0, 2.0)
    rel_n = abs(res.N.value / ref - 1)
    rice = rice_ids(res.hist)
    rel_r = abs(rice / ref - 1)
    ok &= rel_n <= 0.02 and rel_r <= 0.05
    parts.append(f"SDE N={res.N.value:.5f} ({rel_n:.1%}), Rice tail {rice:.5f} ({rel_r:.1%}) vs {ref:.5f}")
    sigma, E = 1.0, -8.0
    ratio = math.log(oracles.halperin_N(E, sigma)) / oracles.lifshitz_tail(E, sigma)
    ok &= abs(ratio - 1) <= 0.1
    parts.append(f"Lifshitz ratio {ratio:.4f}")
    return ok, "; ".join(parts)


def check_white_noise_limit():
    sigma, ell = 2.0, 0.01
    a = math.sqrt(2.0 / (sigma * ell))
    spec = FrischLloyd(coupling=Dist.laplace(a), ell=ell, E=1.0)
    est = ids_node_counting(spec, L=1e4, rng=_stream(12))
    ref = oracles.halperin_N(1.0, sigma)
    rel = abs(est.value / ref - 1)
    ok = rel <= 0.05
    worst = 0.0
    ell_small = 1e-4
    spec_small = FrischLloyd(coupling=Dist.laplace(math.sqrt(2.0 / (sigma * ell_small))), ell=ell_small)
    for th in (0.5, 1.0, 2.0):
        lam = levy_exponent(spec_small, th)
        worst = max(worst, abs(lam.real / (-sigma * th * th / 2) - 1) + abs(lam.imag))
    ok &= worst <= 0.01
    return ok, (f"N(1)={est.value:.5f} vs Halperin {ref:.5f} ({rel:.1%}); Levy exponent at ell={ell_small:g} "
                f"within {worst:.1e} of -sigma theta^2/2")


# ---------------------------------------------------------------------------
# scattering and hyperbolic geometry


SCATTER_SPEC = FrischLloyd(coupling=Dist.uniform(-2.0, 2.0), ell=1.0, E=1.0)


def check_scattering():
    parts, ok = [], True
    st = _stream(13)
    worst = 0.0
    for i in range(1000):
        r = rt_coefficients(sample_realization(SCATTER_SPEC, st.child(0).child(i), L=200.0))
        worst = max(worst, r.unitarity_defect)
    ok &= worst <= 1e-10
    parts.append(f"max ||R|^2+|T|^2-1| = {worst:.1e}")
    fit = decay_rate(SCATTER_SPEC, 1.0, [50, 100, 150, 200, 250, 300], 400, st.child(1), gamma_L=1e6)
    rel = abs(fit.slope / -fit.gamma_ref - 1)
    ok &= rel <= 0.05
    parts.append(f"slope {fit.slope:.4f} vs -gamma {-fit.gamma_ref:.4f} ({rel:.1%}, R^2={fit.r2:.4f})")
    hist = stationary_histogram(SCATTER_SPEC, RiccatiOrbitConfig(steps=10_000_000), symmetric_edges(1000.0, 4000),
                                st.child(2))
    ph = reflexion_phase_histogram(SCATTER_SPEC, 20_000, st.child(3))
    chi2, pval, _, _ = chi2_phase_test(ph, hist, 32)
    ok &= pval >= 0.01
    parts.append(f"phase chi2={chi2:.1f}, p={pval:.3f}")
    return ok, "; ".join(parts)


def _random_sl2(gen):
    while True:
        a, b, c = gen.normal(size=3) * 2.0
        if abs(a) > 1e-3:
            return Matrix2(a, b, c, (1.0 + b * c) / a)


def check_hyperbolic(count: int = 10_000):
    gen = _stream(14).generator
    w1 = w2 = 0.0
    for _ in range(count):
        A = _random_sl2(gen)
        lhs = 2 * cosh_distance(1j, mobius_apply(A, 1j))
        w1 = max(w1, abs(lhs / frobenius_sq(A) - 1))
        z0 = complex(gen.normal(), math.exp(gen.normal()))
        z1 = complex(gen.normal(), math.exp(gen.normal()))
        d0 = cosh_distance(z0, z1)
        d1 = cosh_distance(mobius_apply(A, z0), mobius_apply(A, z1))
        w2 = max(w2, abs(d1 / d0 - 1))
    return max(w1, w2) <= 1e-10, f"2ch rho(i,A i)=|A|^2 max rel. err {w1:.1e}; isometry max rel. err {w2:.1e}"


def check_weyl_free():
    gen = _stream(15).generator
    worst = 0.0
    for _ in range(200):
        n = int(gen.integers(1, 20))
        ell = gen.uniform(0.1, 2.0, n)
        real = Realization(ell, np.zeros(n))
        L = real.L
        lam = complex(gen.uniform(-4, 9), gen.uniform(0, 2))
        k = np.sqrt(lam)
        ref = -k / np.tan(k * L)
        w = weyl_cf_truncated(real, lam)
        worst = max(worst, abs(w - ref) / max(1.0, abs(ref)))
    long_free = Realization(np.full(2000, 1.0), np.zeros(2000))
    grid = np.linspace(0.5, 4.0, 15)
    res = stieltjes_inversion(lambda z: weyl_cf_truncated(long_free, z), grid, eps=2e-2)
    rel = float(np.max(np.abs(res.density / (np.sqrt(grid) / math.pi) - 1)))
    ok = worst <= 1e-10 and rel <= 0.02
    return ok, f"CF vs -k cot(kL) max err {worst:.1e}; Stieltjes density vs sqrt(lam)/pi max rel. err {rel:.1e}"


# ---------------------------------------------------------------------------
# ground state


GROUND_STATE = (-2.5, 2.0, 3000)


def check_ground_state():
    E, sigma, samples = GROUND_STATE
    N = oracles.halperin_N(E, sigma)
    fp = first_passage_stats(E, sigma, samples, _stream(16), window=3.0 / N)
    rel = abs(fp.mean * N - 1)
    ks = stats.kstest(fp.taus, "expon", args=(0.0, 1.0 / N))
    LN = fp.window * N
    obs = np.bincount(fp.counts)
    kmax = obs.size
    expected = np.array([oracles.level_poisson_pmf(j, LN) for j in range(kmax)]) * fp.counts.size
    expected[-1] += fp.counts.size - expected.sum()
    o, e = _pool(obs.astype(float), expected)
    chi2 = float(np.sum((o - e) ** 2 / e))
    pval = float(stats.chi2.sf(chi2, o.size - 1))
    ok = rel <= 0.05 and ks.pvalue >= 0.01 and pval >= 0.01
    return ok, (f"E={E}, sigma={sigma}: mean tau {fp.mean:.1f} vs 1/N {1 / N:.1f} ({rel:.1%}); "
                f"KS p={ks.pvalue:.3f}; level counts chi2 p={pval:.3f} over {fp.counts.size} windows")


def _pool(obs, exp, minimum=5.0):
    """Merge neighbouring cells until each expects at least `minimum` counts."""
    o, e = [], []
    ao = ae = 0.0
    for oi, ei in zip(obs, exp):
        ao += oi
        ae += ei
        if ae >= minimum:
            o.append(ao)
            e.append(ae)
            ao = ae = 0.0
    if ae > 0:
        o[-1] += ao
        e[-1] += ae
    return np.array(o), np.array(e)


# ---------------------------------------------------------------------------
# Ising chain


def check_ising():
    gen = _stream(17).generator
    worst = 0.0
    for n in range(1, 13):
        for bc in ("periodic", "open"):
            h = gen.normal(size=n)
            beta, J = gen.uniform(0.2, 2.0), gen.normal()
            z = partition_function(h, beta, J, boundary=bc)
            worst = max(worst, abs(math.exp(z.log - math.log(brute_force_partition(h, beta, J, boundary=bc))) - 1))
    w2 = 0.0
    for beta, J, h in ((1.0, 1.0, 0.0), (0.7, -0.5, 0.3), (2.0, 1.0, 1.0)):
        n = 10_000
        f = -partition_function(np.full(n, h), beta, J).log / (beta * n)
        fref = -math.log(top_eigenvalue(beta, J, h)) / beta
        w2 = max(w2, abs(f - fref))
    spec = IsingChain(beta=1.0, J=1.0, field=Dist.choice((-1.0, 1.0), (0.5, 0.5)))
    dbl = self_averaging_doubling(spec, 2000, 400, _stream(17).child(1))
    ok = worst <= 1e-10 and w2 <= 1e-8 and dbl.zscore <= 3
    return ok, (f"brute force max rel. err {worst:.1e}; uniform-field free energy err {w2:.1e}; "
                f"spread ratio n->2n {dbl.ratio:.3f}+-{dbl.ratio_stderr:.3f} vs 1/sqrt2")


# ---------------------------------------------------------------------------
# dual estimators


def check_dual_estimators():
    spec = FrischLloyd(coupling=Dist.uniform(-2.0, 2.0), ell=1.0, E=1.0)
    st = _stream(18)
    om = complex_lyapunov(spec, L=1e6, rng=st.child(0))
    hist = stationary_histogram(spec, RiccatiOrbitConfig(steps=40_000_000), 800, st.child(1))
    rice = rice_ids(hist)
    pv = pv_gamma(hist)
    rn = abs(rice / om.N.value - 1)
    rg = abs(pv / om.gamma.value - 1)
    ok = rn <= 0.02 and rg <= 0.05
    return ok, (f"N: nodes {om.N.value:.5f} vs Rice {rice:.5f} ({rn:.1%}); "
                f"gamma: norm growth {om.gamma.value:.5f} vs principal value {pv:.5f} ({rg:.1%})")


CHECKS = [
    (1, "random Fibonacci growth constant", check_random_fibonacci),
    (2, "deterministic Fibonacci", check_fibonacci),
    (3, "Bougerol-Lacroix product does not grow", check_bougerol_lacroix),
    (4, "Cohen-Newman quadrature", check_cohen_newman),
    (5, "free node-counting IDS", check_free_ids),
    (6, "Kronig-Penney bands and gap", check_kronig_penney),
    (7, "Kotani string IDS and mean Weyl coefficient", check_kotani),
    (8, "Nieuwenhuizen Omega for lam<0", check_nieuwenhuizen),
    (9, "GIG and Kummer fixed-point laws", check_letac_laws),
    (10, "Type-I string mean Weyl coefficient", check_type_i_mean),
    (11, "Halperin N, SDE and Lifshitz tail", check_halperin),
    (12, "white-noise limit", check_white_noise_limit),
    (13, "scattering", check_scattering),
    (14, "hyperbolic identities", check_hyperbolic),
    (15, "truncated Weyl coefficient and Stieltjes inversion", check_weyl_free),
    (16, "ground state first passage", check_ground_state),
    (17, "Ising chain", check_ising),
    (18, "dual estimators at E>0", check_dual_estimators),
]


def run_check(number: int) -> CheckResult:
    for num, title, fn in CHECKS:
        if num == number:
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # a crash is a failed criterion, reported as such
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            return CheckResult(num, title, bool(ok), detail, time.perf_counter() - t0)
    raise KeyError(number)


def run_all(numbers=None, echo=print) -> list[CheckResult]:
    out = []
    for num, _, _ in CHECKS:
        if numbers is None or num in numbers:
            r = run_check(num)
            if echo is not None:
                echo(r.line())
            out.append(r)
    return out
