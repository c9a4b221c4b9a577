"""
Tests for the Metropolis-within-Gibbs sampler.
"""

import numpy as np
import pytest
from scipy.stats import beta

from dta_prevalence_bias.lcbm import MetaDataset
from dta_prevalence_bias.priors import HyperPriors
from dta_prevalence_bias.sampler import (
    MONITORED_PARAMETERS,
    REPORTED_PARAMETERS,
    LcbmState,
    McmcConfig,
    MetropolisWithinGibbs,
    chain_stream,
    initial_state,
    run_chain,
)
from dta_prevalence_bias.tables import TwoByTwoTable

# Two studies with a perfect reference standard: (reference positives, total).
CONJUGATE_STUDIES = [(12, 40), (30, 50)]


def _conjugate_dataset():
    return MetaDataset(
        tables=(
            TwoByTwoTable(n_pp=10, n_pn=3, n_np=2, n_nn=25),
            TwoByTwoTable(n_pp=27, n_pn=2, n_np=3, n_nn=18),
        )
    )


def _conjugate_draws(n_iters, n_burnin):
    dataset = _conjugate_dataset()
    initial = LcbmState.from_probabilities([0.3, 0.6], 1.0, 1.0, 0.9, 0.9)
    config = McmcConfig(n_chains=1, n_iters=n_iters, n_burnin=n_burnin, thin=1, seed=17, blocks=("prev",))
    return run_chain(dataset, config, 0, initial=initial).prev


def _assert_beta_quantiles(draws, tolerance):
    for study, (d, n) in enumerate(CONJUGATE_STUDIES):
        expected = beta.ppf([0.025, 0.5, 0.975], 1 + d, 1 + n - d)
        observed = np.quantile(draws[:, study], [0.025, 0.5, 0.975])
        np.testing.assert_allclose(observed, expected, atol=tolerance)


class TestMcmcConfig:
    """Test class for McmcConfig."""

    def test_defaults(self):
        config = McmcConfig()
        assert (config.n_chains, config.n_iters, config.n_burnin) == (3, 50000, 25000)
        assert config.n_kept == 5000
        assert config.enforce_dv_gt_1
        assert config.hierarchical

    def test_kept_draws_round_up(self, quick_mcmc):
        assert quick_mcmc.n_kept == 100
        assert quick_mcmc.with_overrides(thin=3).n_kept == 67

    @pytest.mark.parametrize(
        "kwargs, message",
        [
            ({"n_iters": 100, "n_burnin": 100}, "n_burnin"),
            ({"thin": 0}, "thin"),
            ({"n_chains": 0}, "n_chains"),
            ({"blocks": ("prev", "lambda")}, "Unknown sampler block"),
            ({"target_accept": 1.0}, "target_accept"),
        ],
    )
    def test_invalid(self, kwargs, message):
        with pytest.raises(ValueError, match=message):
            McmcConfig(**kwargs)


class TestChainStream:
    """Test class for chain_stream."""

    def test_streams(self):
        np.testing.assert_array_equal(chain_stream(3, 1).random(4), chain_stream(3, 1).random(4))
        assert not np.array_equal(chain_stream(3, 0).random(4), chain_stream(3, 1).random(4))


class TestInitialState:
    """Test class for initial_state."""

    def test_near_naive_estimates(self, small_meta_dataset, quick_mcmc):
        state = initial_state(small_meta_dataset, HyperPriors.lcbm(), quick_mcmc, chain_stream(0, 0))
        estimates = small_meta_dataset.initial_estimates()
        np.testing.assert_allclose(state.prev, estimates["prev"], atol=0.1)
        assert np.all((state.sigma >= 0.1) & (state.sigma <= 1.5))
        assert np.all(state.rho == 0.0)
        assert np.all(state.mu[:, 0] + state.mu[:, 1] > 0)

    def test_non_finite_start_fails(self, tiny_tables, quick_mcmc):
        dataset = MetaDataset(tables=tiny_tables)
        perfect = LcbmState.from_probabilities([0.5, 0.5, 0.5], 1.0, 1.0, 1.0, 1.0)
        with pytest.raises(RuntimeError, match="Non-finite posterior at initialization"):
            MetropolisWithinGibbs(dataset, quick_mcmc, HyperPriors.lcbm(), chain_stream(0, 0), state=perfect)


class TestRunChain:
    """Test class for run_chain."""

    def setup_method(self):
        self.config = McmcConfig(n_chains=1, n_iters=300, n_burnin=150, thin=3, adapt_window=50, seed=5)

    def test_deterministic(self, small_meta_dataset):
        a = run_chain(small_meta_dataset, self.config, 0)
        b = run_chain(small_meta_dataset, self.config, 0)
        np.testing.assert_array_equal(a.prev, b.prev)
        np.testing.assert_array_equal(a.accuracy, b.accuracy)
        np.testing.assert_array_equal(a.mu, b.mu)
        assert a.acceptance == b.acceptance

    def test_chains_differ(self, small_meta_dataset):
        a = run_chain(small_meta_dataset, self.config, 0)
        b = run_chain(small_meta_dataset, self.config, 1)
        assert not np.array_equal(a.prev, b.prev)

    def test_draw_shapes_and_support(self, small_meta_dataset):
        samples = run_chain(small_meta_dataset, self.config, 0)
        assert len(samples) == 50
        assert samples.accuracy.shape == (50, 40, 2, 2)
        assert np.all((samples.prev > 0) & (samples.prev < 1))
        assert np.all(samples.sigma > 0)
        assert np.all(np.abs(samples.rho) < 1)
        assert np.all(samples.mu[:, :, 0] + samples.mu[:, :, 1] > 0)
        assert set(samples.acceptance) == {"prev", "accuracy", "sigma", "rho"}
        assert all(0.0 <= rate <= 1.0 for rate in samples.acceptance.values())

    def test_parameter_lookup(self, small_meta_dataset):
        samples = run_chain(small_meta_dataset, self.config, 0)
        for name in REPORTED_PARAMETERS:
            assert samples.parameter(name).shape == (50,)
        mean_se = samples.parameter("mean_se_index")
        assert np.all((mean_se > 0) & (mean_se < 1))
        with pytest.raises(KeyError, match="Unknown parameter"):
            samples.parameter("mean_npv_index")
        assert len(MONITORED_PARAMETERS) == 8

    def test_states(self, small_meta_dataset):
        samples = run_chain(small_meta_dataset, self.config, 0)
        states = list(samples.states())
        assert len(states) == 50
        np.testing.assert_allclose(states[-1].index_se, samples.accuracy[-1, :, 1, 0])

    def test_fixed_rho(self, small_meta_dataset):
        samples = run_chain(small_meta_dataset, self.config.with_overrides(fix_rho=True), 0)
        assert np.all(samples.rho == 0.0)
        assert "rho" not in samples.acceptance

    def test_uniform_sigma_prior_stays_bounded(self, small_meta_dataset):
        samples = run_chain(small_meta_dataset, self.config, 0, priors=HyperPriors.pvb())
        assert np.all(samples.sigma < 2.0)
        assert np.all(samples.mu[:, :, 1] > 0)

    def test_conjugate_prevalence_short_run(self):
        _assert_beta_quantiles(_conjugate_draws(n_iters=6000, n_burnin=1000), tolerance=0.03)


@pytest.mark.slow
class TestSamplerValidation:
    """Long-run check against the closed-form prevalence posterior."""

    def test_conjugate_prevalence(self):
        _assert_beta_quantiles(_conjugate_draws(n_iters=52000, n_burnin=2000), tolerance=0.01)
