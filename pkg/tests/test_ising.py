import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from disorder_rmt.ensembles import Dist, FrischLloyd, IsingChain, RandomStream, sample_matrices
from disorder_rmt.errors import ValidationError
from disorder_rmt.ising import (brute_force_partition, free_energy_density, partition_function, self_averaging_doubling,
                                top_eigenvalue, transfer_entries)
from disorder_rmt.lyapunov import gamma_norm_growth

PM = Dist.choice((-1.0, 1.0), (0.5, 0.5))


def test_single_spin_no_coupling():
    assert float(partition_function([0.0], 1.0, 0.0)) == pytest.approx(2.0, rel=1e-15)


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=40), st.floats(0.1, 3), st.sampled_from(["periodic", "open"]))
def test_no_coupling_product_of_cosh(h, beta, bc):
    ref = sum(math.log(2 * math.cosh(beta * x)) for x in h)
    assert partition_function(h, beta, 0.0, boundary=bc).log == pytest.approx(ref, rel=1e-12, abs=1e-12)


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=12), st.floats(0.1, 2), st.floats(-2, 2),
       st.sampled_from(["periodic", "open"]))
def test_brute_force(h, beta, J, bc):
    z = partition_function(h, beta, J, boundary=bc)
    assert math.exp(z.log - math.log(brute_force_partition(h, beta, J, boundary=bc))) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("beta,J,h", [(1.0, 1.0, 0.0), (0.7, -0.5, 0.3), (2.0, 1.0, 1.0), (0.3, 2.0, -0.8)])
def test_uniform_field_top_eigenvalue(beta, J, h):
    n = 10_000
    z = partition_function(np.full(n, h), beta, J)
    assert z.log / n == pytest.approx(math.log(top_eigenvalue(beta, J, h)), abs=1e-8)
    a, b, c, d = (x[0] for x in transfer_entries([h], beta, J))
    assert top_eigenvalue(beta, J, h) == pytest.approx(max(np.linalg.eigvals([[a, b], [c, d]]).real), rel=1e-12)


@pytest.mark.parametrize("beta,J", [(1.0, 1.0), (0.5, -1.2)])
def test_zero_field_cosh(beta, J):
    assert top_eigenvalue(beta, J, 0.0) == pytest.approx(2 * math.cosh(beta * J), rel=1e-14)
    f = -partition_function(np.zeros(10_000), beta, J).log / (beta * 10_000)
    assert f == pytest.approx(-math.log(2 * math.cosh(beta * J)) / beta, abs=1e-8)


def test_large_chain_does_not_overflow():
    z = partition_function(np.full(200_000, 1.0), 5.0, 1.0)
    assert math.isfinite(z.log) and z.log > 700
    assert z.mantissa > 0


def test_free_energy_matches_product_growth():
    spec = IsingChain(beta=1.0, J=1.0, field=PM)
    res = free_energy_density(spec, 20_000, 64, RandomStream(1))
    g = gamma_norm_growth(spec, 1_280_000, RandomStream(2))
    assert abs(res.free_energy_density + g.value / spec.beta) <= 4 * math.hypot(res.stderr, g.stderr / spec.beta)


def test_trace_and_norm_growth_agree():
    spec = IsingChain(beta=0.8, J=-0.6, field=Dist.normal(0.0, 1.0))
    h = spec.field.sample(RandomStream(3).generator, 50_000)
    per = partition_function(h, spec.beta, spec.J).log
    opn = partition_function(h, spec.beta, spec.J, boundary="open").log
    assert abs(per - opn) / h.size < 1e-3


def test_self_averaging():
    spec = IsingChain(beta=1.0, J=1.0, field=PM)
    dbl = self_averaging_doubling(spec, 2000, 300, RandomStream(4))
    assert dbl.zscore <= 3


def test_positive_entries():
    a, b, c, d = sample_matrices(IsingChain(beta=2.0, J=-3.0, field=Dist.normal(0, 3)), 5, 1000)
    assert np.all(a > 0) and np.all(b > 0) and np.all(c > 0) and np.all(d > 0)


def test_result_json_and_workers():
    spec = IsingChain(beta=1.0, J=0.5, field=PM)
    a = free_energy_density(spec, 1000, 6, 7, workers=1)
    b = free_energy_density(spec, 1000, 6, 7, workers=3)
    assert a.to_dict() == b.to_dict()
    assert json.loads(a.to_json())["n"] == 1000


def test_ising_validation():
    with pytest.raises(ValidationError):
        partition_function([], 1.0, 1.0)
    with pytest.raises(ValidationError):
        partition_function([1.0], 1.0, 1.0, boundary="twisted")
    with pytest.raises(ValidationError):
        free_energy_density(IsingChain(), 100, 4, 0)
    with pytest.raises(ValidationError):
        free_energy_density(FrischLloyd(), 1000, 4, 0)
