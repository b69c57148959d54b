"""Long Monte Carlo runs reproducing the published acceptance and convergence behaviour."""

import os

import numpy as np
import pytest
from scipy.special import ndtr

from core.diagnostics import burn_in_summary, ks_experiment, tail_slope
from core.rng_core import RngStream
from core.samplers import ProposalSpec, run_chain
from core.scaling import acceptance_atmcmc_closed_form, finite_dim_acceptance_rwmh
from core.targets import make_target

pytestmark = pytest.mark.slow

THREADS = os.cpu_count() or 1

# Published acceptance rates (%) per (d, l): (RWMH, ATMCMC). The d = 2, l = 6 row
# matches l = 4 rather than l = 6 and the d = 10, l = 10 ATMCMC entry disagrees with
# the exact rate 1 - 2 arctan(5) / pi, so neither is compared.
PUBLISHED = {
    (2, 2.4): (34.9, 44.6),
    (2, 10.0): (3.83, 12.36),
    (5, 2.4): (28.6, 44.12),
    (5, 6.0): (2.77, 20.20),
    (5, 10.0): (0.45, 12.44),
    (10, 2.4): (25.6, 44.18),
    (10, 6.0): (1.37, 20.34),
    (10, 10.0): (0.03, None),
    (100, 2.4): (23.3, 44.1),
    (100, 6.0): (0.32, 20.6),
    (200, 2.4): (23.4, 44.2),
    (200, 6.0): (0.33, 20.7),
}
N_ITER = 100_000


def _acceptance(kind, d, l, stream_id):
    model = make_target("gaussian", 1.0, d)
    x0 = model.component.sample(RngStream(2014, 2 ** 32 + stream_id), d)
    run = run_chain(model, ProposalSpec(kind, l, d), x0, N_ITER, RngStream(2014, stream_id), thin=N_ITER, coords=[0])
    return 100.0 * run.acceptance_rate


@pytest.mark.parametrize("cell", sorted(PUBLISHED))
def test_acceptance_table(cell):
    d, l = cell
    rwmh_pub, atmcmc_pub = PUBLISHED[cell]
    index = sorted(PUBLISHED).index(cell)

    rwmh = _acceptance("rwmh", d, l, 2 * index)
    atmcmc = _acceptance("atmcmc", d, l, 2 * index + 1)

    assert rwmh == pytest.approx(100.0 * finite_dim_acceptance_rwmh(l, d, 1.0), abs=1.0)
    assert atmcmc == pytest.approx(100.0 * acceptance_atmcmc_closed_form(l, 1.0), abs=1.0)
    assert rwmh == pytest.approx(rwmh_pub, abs=1.5)
    if atmcmc_pub is not None:
        assert atmcmc == pytest.approx(atmcmc_pub, abs=1.5)


def test_atmcmc_converges_faster_with_large_scale_in_high_dimension():
    model = make_target("gaussian", 1.0, 100)
    a, b = ks_experiment(model, ProposalSpec("atmcmc", 4.0, 100), ProposalSpec("rwmh", 4.0, 100),
                         np.full(100, 3.0), n_chains=500, horizon=2000, seed=20140104, threads=THREADS)
    assert a.mean_over(1, 2000) < b.mean_over(1, 2000)


def test_ks_curves_stabilize_at_the_optimal_scale():
    model = make_target("gaussian", 1.0, 30)
    series = ks_experiment(model, ProposalSpec("atmcmc", 2.4, 30), ProposalSpec("rwmh", 2.4, 30),
                           np.full(30, 3.0), n_chains=500, horizon=5000, seed=20140104, threads=THREADS)
    for s in series:
        assert s.ks_values[-1] < 0.1
        assert s.mean_over(4000, 5000) < 0.1
        assert abs(tail_slope(s)) < 1e-5


@pytest.mark.parametrize("kind", ["atmcmc", "rwmh"])
def test_long_run_marginals_match_the_target(kind):
    d = 10
    model = make_target("gaussian", 1.0, d)
    run = run_chain(model, ProposalSpec(kind, 2.4, d), np.zeros(d), 210_000, RngStream(20140102, 0), coords=[0])
    stats = burn_in_summary(run, 10_000, ndtr)
    assert stats.n_samples == 200_000
    assert -0.03 < stats.mean < 0.03
    assert 0.94 < stats.variance < 1.06
    assert stats.ks < 0.02
