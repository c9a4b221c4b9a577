"""
Pytest configuration and fixtures.
"""

import tempfile

import pytest

from dta_prevalence_bias.experiment import run_scenario
from dta_prevalence_bias.lcbm import MetaDataset
from dta_prevalence_bias.scenarios import BiasStructure, make_scenario_grid
from dta_prevalence_bias.sampler import McmcConfig
from dta_prevalence_bias.tables import TwoByTwoTable


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run full-scale acceptance tests"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-scale simulation or MCMC run")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rseb_setups():
    """The four reference standard error setups."""
    return make_scenario_grid(BiasStructure.REFERENCE_STANDARD_ERROR)


@pytest.fixture
def small_rseb_run(rseb_setups):
    """40 studies of 200 subjects from reference standard error Setup 1."""
    return run_scenario(rseb_setups[0], n_studies=40, n_subjects=200, master_seed=11)


@pytest.fixture
def small_meta_dataset(small_rseb_run):
    return MetaDataset.from_study_tables(small_rseb_run.tables, label="Setup 1")


@pytest.fixture
def tiny_tables():
    """Three hand-written two-by-two tables."""
    return (
        TwoByTwoTable(n_pp=40, n_pn=5, n_np=8, n_nn=47),
        TwoByTwoTable(n_pp=30, n_pn=7, n_np=6, n_nn=57),
        TwoByTwoTable(n_pp=55, n_pn=4, n_np=10, n_nn=31),
    )


@pytest.fixture
def quick_mcmc():
    """Short sampler settings for structural checks."""
    return McmcConfig(n_chains=2, n_iters=400, n_burnin=200, thin=2, adapt_window=50, seed=3)


@pytest.fixture
def temp_output_dir():
    """Create a temporary output directory."""
    with tempfile.TemporaryDirectory() as temp_dir:
        yield temp_dir
