"""
Tests for many-study scenario runs.
"""

import pytest

from dta_prevalence_bias.experiment import run_scenario, simulate_one
from dta_prevalence_bias.scenarios import BiasStructure, make_scenario_grid


class TestRunScenario:
    """Test class for run_scenario."""

    def test_ordered_by_study_id(self, small_rseb_run):
        assert len(small_rseb_run) == 40
        assert [e.study_id for e in small_rseb_run.estimates] == list(range(40))
        assert all(e.setup_label == "Setup 1" for e in small_rseb_run.estimates)
        assert all(t.overall.n == 200 for t in small_rseb_run.tables)

    def test_prefix_of_larger_run(self, rseb_setups, small_rseb_run):
        smaller = run_scenario(rseb_setups[0], n_studies=15, n_subjects=200, master_seed=11)
        assert smaller.estimates == small_rseb_run.head(15).estimates
        assert smaller.tables == small_rseb_run.head(15).tables

    def test_single_study_matches_run(self, rseb_setups, small_rseb_run):
        estimate, tables = simulate_one(rseb_setups[0], 7, 200, 11)
        assert estimate == small_rseb_run.estimates[7]
        assert tables == small_rseb_run.tables[7]

    def test_worker_count_does_not_change_output(self):
        setup = make_scenario_grid(BiasStructure.CONFOUNDING)[1]
        serial = run_scenario(setup, n_studies=1200, n_subjects=20, master_seed=4, n_jobs=1)
        parallel = run_scenario(setup, n_studies=1200, n_subjects=20, master_seed=4, n_jobs=2)
        assert serial.estimates == parallel.estimates

    def test_partial_verification_tables(self):
        setup = make_scenario_grid(BiasStructure.PARTIAL_VERIFICATION)[0]
        run = run_scenario(setup, n_studies=5, n_subjects=300, master_seed=2)
        for tables in run.tables:
            assert tables.verification is not None
            assert tables.verification.n_total == 300
            assert tables.overall.n == tables.verification.v1 + tables.verification.v0

    @pytest.mark.parametrize("n_studies, n_subjects", [(0, 10), (10, 0)])
    def test_rejects_empty_runs(self, rseb_setups, n_studies, n_subjects):
        with pytest.raises(ValueError, match="must be at least 1"):
            run_scenario(rseb_setups[0], n_studies=n_studies, n_subjects=n_subjects, master_seed=1)
