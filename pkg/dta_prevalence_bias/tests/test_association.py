"""
Tests for the accuracy-prevalence association and its analytic oracles.
"""

import itertools

import numpy as np
import pandas as pd
import pytest

from dta_prevalence_bias.association import (
    DegenerateInputError,
    analytic_naive_accuracy,
    correlation_report,
    enumerate_joint_outcomes,
    estimates_frame,
    expected_bias_curve,
    records_from_frame,
    scatter_export,
    spearman_rho,
)
from dta_prevalence_bias.experiment import run_scenario
from dta_prevalence_bias.scenarios import VERIFICATION_RATES, BiasStructure, make_scenario_grid
from dta_prevalence_bias.simulation import draw_study_params, study_stream
from dta_prevalence_bias.tables import EstimateRecord


def _record(study_id, label, prev, se, sp):
    return EstimateRecord(study_id, label, prev, se, sp, n_ref_pos=10, n_ref_neg=10)


class TestSpearmanRho:
    """Test class for spearman_rho."""

    def test_perfect_monotone(self):
        assert spearman_rho([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)
        assert spearman_rho([1, 2, 3], [30, 20, 10]) == pytest.approx(-1.0)

    def test_hand_evaluated_value(self):
        assert spearman_rho([1, 2, 3, 4, 5], [2, 1, 4, 3, 5]) == pytest.approx(0.8, abs=1e-12)

    def test_constant_ranks_are_missing(self):
        assert spearman_rho([1, 1, 1], [1, 2, 3]) is None

    def test_pairwise_deletion(self):
        assert spearman_rho([1, None, 2, 3, np.nan], [1, 5, 2, 3, 4]) == pytest.approx(1.0)
        assert spearman_rho([1, None], [None, 2]) is None

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="equal length"):
            spearman_rho([1, 2], [1, 2, 3])

    def test_matches_closed_form_without_ties(self):
        rng = np.random.default_rng(8)
        x = rng.permutation(30).astype(float)
        y = rng.permutation(30).astype(float)
        d2 = float(np.sum((x - y) ** 2))
        n = x.size
        assert spearman_rho(x, y) == pytest.approx(1 - 6 * d2 / (n * (n**2 - 1)), abs=1e-12)

    def test_invariances(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=50)
        y = x + rng.normal(size=50)
        rho = spearman_rho(x, y)
        assert spearman_rho(np.exp(x), y**3) == pytest.approx(rho, abs=1e-12)
        assert spearman_rho(y, x) == pytest.approx(rho, abs=1e-12)
        order = rng.permutation(50)
        assert spearman_rho(x[order], y[order]) == pytest.approx(rho, abs=1e-12)


class TestCorrelationReport:
    """Test class for correlation_report."""

    def test_groups_in_order_of_appearance(self):
        records = [
            _record(0, "Setup 2", 0.1, 0.5, 0.9),
            _record(1, "Setup 2", 0.2, 0.6, 0.8),
            _record(2, "Setup 2", 0.3, None, 0.7),
            _record(0, "Setup 1", 0.1, 0.9, 0.9),
            _record(1, "Setup 1", 0.2, 0.9, 0.9),
        ]
        reports = correlation_report(records)
        assert [r.setup_label for r in reports] == ["Setup 2", "Setup 1"]
        assert reports[0].rho_se_prev == pytest.approx(1.0)
        assert reports[0].rho_sp_prev == pytest.approx(-1.0)
        assert (reports[0].n_pairs_se, reports[0].n_pairs_sp) == (2, 3)
        assert reports[1].rho_se_prev is None

    def test_empty(self):
        assert correlation_report([]) == []


class TestAnalyticNaiveAccuracy:
    """Test class for analytic_naive_accuracy and the joint enumeration."""

    def test_worked_example(self):
        se_hat, sp_hat = analytic_naive_accuracy(0.5, 0.7, 0.95, 0.9, 0.9)
        assert se_hat == pytest.approx(0.846667, abs=1e-6)
        assert sp_hat == pytest.approx(0.708, abs=1e-12)

    @pytest.mark.parametrize("prev", [0.1, 0.5, 0.9])
    def test_perfect_reference_identity(self, prev):
        se_hat, sp_hat = analytic_naive_accuracy(prev, 1.0, 1.0, 0.83, 0.77)
        assert (se_hat, sp_hat) == pytest.approx((0.83, 0.77), abs=1e-12)

    def test_symmetric_parameters(self):
        se_hat, sp_hat = analytic_naive_accuracy(0.5, 0.9, 0.9, 0.9, 0.9)
        assert se_hat == pytest.approx(sp_hat, abs=1e-12)

    def test_agrees_with_enumeration(self):
        rng = np.random.default_rng(2024)
        grids = [rng.uniform(0.05, 0.95, size=5) for _ in range(5)]
        for prev, s1, c1, s2, c2 in itertools.product(*grids):
            joint = enumerate_joint_outcomes(prev, s1, c1, s2, c2)
            assert joint.sum() == pytest.approx(1.0, abs=1e-12)
            p_ref_pos = joint[:, 1, :].sum()
            p_ref_neg = joint[:, 0, :].sum()
            expected = (joint[:, 1, 1].sum() / p_ref_pos, joint[:, 0, 0].sum() / p_ref_neg)
            assert analytic_naive_accuracy(prev, s1, c1, s2, c2) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize(
        "ref_se, ref_sp, index_se, index_sp",
        [(0.7, 0.95, 0.9, 0.9), (0.9, 0.95, 0.9, 0.9), (0.8, 0.7, 0.75, 0.85), (0.95, 0.9, 0.6, 0.6)],
    )
    def test_bias_direction_on_prevalence_grid(self, ref_se, ref_sp, index_se, index_sp):
        grid = np.round(np.arange(0.1, 0.95, 0.1), 2)
        values = np.array([analytic_naive_accuracy(p, ref_se, ref_sp, index_se, index_sp) for p in grid])
        assert np.all(np.diff(values[:, 0]) > 0)
        assert np.all(np.diff(values[:, 1]) < 0)

    def test_degenerate_denominator(self):
        with pytest.raises(DegenerateInputError, match="undefined"):
            analytic_naive_accuracy(0.0, 0.9, 1.0, 0.9, 0.9)

    def test_out_of_range(self):
        with pytest.raises(ValueError, match="ref_se must be a probability"):
            analytic_naive_accuracy(0.5, 1.5, 0.9, 0.9, 0.9)


class TestExpectedBiasCurve:
    """Test class for expected_bias_curve."""

    def test_curve_columns(self, rseb_setups):
        curve = expected_bias_curve(rseb_setups[0], [0.1, 0.5, 0.9])
        assert list(curve.columns) == ["prev", "expected_prev_hat", "expected_se_hat", "expected_sp_hat"]
        assert curve["expected_se_hat"].iloc[1] == pytest.approx(0.846667, abs=1e-6)
        assert curve["expected_prev_hat"].iloc[1] == pytest.approx(0.375)
        # Sensitivity rises and specificity falls with prevalence.
        assert curve["expected_se_hat"].is_monotonic_increasing
        assert curve["expected_sp_hat"].is_monotonic_decreasing

    def test_stratified_setup_rejected(self):
        setup = make_scenario_grid(BiasStructure.SPECTRUM_EFFECT)[0]
        with pytest.raises(ValueError, match="stratified"):
            expected_bias_curve(setup, [0.5])


class TestEmpiricalAgreement:
    """Simulated naive estimates against their closed-form expectations."""

    def test_perfect_reference_is_unbiased(self, rseb_setups):
        run = run_scenario(rseb_setups[3], n_studies=2000, n_subjects=500, master_seed=5)
        frame = scatter_export(run.estimates)
        for column in ("se_hat", "sp_hat"):
            values = frame[column].dropna()
            mc_se = values.std(ddof=1) / np.sqrt(len(values))
            assert abs(values.mean() - 0.9) <= 3 * mc_se, column

    def test_binned_estimates_follow_the_curve(self, rseb_setups):
        setup = rseb_setups[0]
        seed = 23
        run = run_scenario(setup, n_studies=4000, n_subjects=500, master_seed=seed)
        frame = scatter_export(run.estimates)
        # run_scenario draws the study parameters first from the same stream.
        frame["prev"] = [draw_study_params(setup, study_stream(seed, i)).prevalence for i in frame["study_id"]]
        curve = expected_bias_curve(setup, frame["prev"])
        frame["se_gap"] = frame["se_hat"] - curve["expected_se_hat"].to_numpy()
        frame["sp_gap"] = frame["sp_hat"] - curve["expected_sp_hat"].to_numpy()
        frame["decile"] = pd.qcut(frame["prev"], 10, labels=False)
        for _, group in frame.groupby("decile"):
            for column in ("se_gap", "sp_gap"):
                gaps = group[column].dropna()
                mc_se = gaps.std(ddof=1) / np.sqrt(len(gaps))
                assert abs(gaps.mean()) <= 4 * mc_se, column


class TestScatterExport:
    """Test class for scatter_export and records_from_frame."""

    def test_rows_keep_order_and_missing_values(self):
        records = [_record(4, "Setup 1", 0.2, None, 0.9), _record(1, "Setup 1", 0.3, 0.8, 0.85)]
        frame = scatter_export(records)
        assert list(frame.columns) == ["study_id", "setup_label", "prev_hat", "se_hat", "sp_hat"]
        assert frame["study_id"].tolist() == [4, 1]
        assert pd.isna(frame["se_hat"].iloc[0])

    def test_records_from_frame(self):
        records = [_record(0, "Setup 3", 0.25, None, 0.5)]
        assert records_from_frame(estimates_frame(records)) == records


# Spearman correlations of the full-scale runs, per setup, as (se, sp).
FULL_SCALE_CORRELATIONS = {
    BiasStructure.REFERENCE_STANDARD_ERROR: [
        ((0.870, 0.02), (-0.975, 0.01)),
        ((0.864, 0.02), (-0.968, 0.01)),
        ((0.856, 0.02), (-0.936, 0.01)),
    ],
    BiasStructure.SPECTRUM_EFFECT: [
        ((0.645, 0.03), (-0.930, 0.02)),
        ((0.632, 0.03), (-0.893, 0.02)),
        ((0.600, 0.03), (-0.786, 0.02)),
    ],
    BiasStructure.CONFOUNDING: [
        ((0.461, 0.03), (-0.956, 0.03)),
        ((0.395, 0.03), (-0.947, 0.03)),
        ((0.335, 0.03), (-0.915, 0.03)),
        ((-0.599, 0.03), (-0.621, 0.03)),
    ],
    BiasStructure.PARTIAL_VERIFICATION: [
        ((0.821, 0.03), (-0.967, 0.02)),
        ((0.808, 0.03), (-0.955, 0.02)),
        ((0.806, 0.03), (-0.918, 0.02)),
    ],
    BiasStructure.CONDITIONAL_DEPENDENCE: [
        ((0.704, 0.03), (-0.928, 0.02)),
        ((0.697, 0.03), (-0.896, 0.02)),
        ((0.687, 0.03), (-0.811, 0.02)),
    ],
}


def _full_scale_report(setup):
    run = run_scenario(setup, n_studies=10000, n_subjects=500, master_seed=20240601, n_jobs=-1)
    return correlation_report(run.estimates)[0]


@pytest.mark.slow
class TestFullScaleCorrelations:
    """Correlations of 10,000-study runs against reference values."""

    @pytest.mark.parametrize(
        "structure, index",
        [(s, i) for s, values in FULL_SCALE_CORRELATIONS.items() for i in range(len(values))],
    )
    def test_setup_correlations(self, structure, index):
        setup = make_scenario_grid(structure)[index]
        report = _full_scale_report(setup)
        (se_value, se_tol), (sp_value, sp_tol) = FULL_SCALE_CORRELATIONS[structure][index]
        assert report.rho_se_prev == pytest.approx(se_value, abs=se_tol)
        assert report.rho_sp_prev == pytest.approx(sp_value, abs=sp_tol)

    @pytest.mark.parametrize(
        "structure, se_tol, sp_tol",
        [
            (BiasStructure.REFERENCE_STANDARD_ERROR, 0.05, 0.05),
            (BiasStructure.SPECTRUM_EFFECT, 0.05, 0.05),
            (BiasStructure.PARTIAL_VERIFICATION, 0.07, 0.08),
        ],
    )
    def test_perfect_reference_has_no_association(self, structure, se_tol, sp_tol):
        report = _full_scale_report(make_scenario_grid(structure)[3])
        assert abs(report.rho_se_prev) <= se_tol
        assert abs(report.rho_sp_prev) <= sp_tol

    @pytest.mark.parametrize(
        "rate, se_values, sp_values, se_tol, sp_tol",
        [
            ("high", [0.842, 0.841, 0.830, -0.017], [-0.973, -0.965, -0.930, -0.012], 0.03, 0.02),
            ("low", [0.744, 0.717, 0.716, 0.230], [-0.922, -0.898, -0.834, -0.260], 0.03, 0.03),
        ],
    )
    def test_verification_rate_variants(self, rate, se_values, sp_values, se_tol, sp_tol):
        setups = make_scenario_grid(BiasStructure.PARTIAL_VERIFICATION, VERIFICATION_RATES[rate])
        for setup, se_value, sp_value in zip(setups, se_values, sp_values):
            report = _full_scale_report(setup)
            assert report.rho_se_prev == pytest.approx(se_value, abs=se_tol), setup.label
            assert report.rho_sp_prev == pytest.approx(sp_value, abs=sp_tol), setup.label
