"""
Tests for count tables and naive estimates.
"""

import pytest

from dta_prevalence_bias.simulation import SubjectRecord
from dta_prevalence_bias.tables import (
    TwoByTwoTable,
    VerificationTable,
    naive_estimates,
    tabulate,
)


def _subject(d, t_ref, t_index, verified=1, r=None):
    return SubjectRecord(d=d, r=r, t_ref=t_ref if verified else None, t_index=t_index, verified=verified)


class TestTwoByTwoTable:
    """Test class for TwoByTwoTable."""

    def test_margins(self):
        table = TwoByTwoTable(n_pp=40, n_pn=5, n_np=8, n_nn=47)
        assert table.n == 100
        assert table.n_ref_pos == 48
        assert table.n_ref_neg == 52
        assert table.cell_counts().tolist() == [40.0, 8.0, 5.0, 47.0]

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError, match="n_np must be non-negative"):
            TwoByTwoTable(n_pp=1, n_pn=1, n_np=-1, n_nn=1)

    def test_stratum_values(self):
        with pytest.raises(ValueError, match="stratum"):
            TwoByTwoTable(1, 1, 1, 1, stratum=2)


class TestVerificationTable:
    """Test class for VerificationTable."""

    def test_from_fully_verified_table(self):
        table = TwoByTwoTable(n_pp=40, n_pn=5, n_np=8, n_nn=47)
        verification = VerificationTable.from_two_by_two(table)
        assert (verification.n_total, verification.n1) == (100, 45)
        assert (verification.v1, verification.v0) == (45, 55)
        assert (verification.x1, verification.x0) == (40, 8)

    def test_inconsistent_counts(self):
        with pytest.raises(ValueError, match="Inconsistent"):
            VerificationTable(n_total=10, n1=4, v1=5, v0=3, x1=2, x0=1)


class TestTabulate:
    """Test class for tabulate."""

    def test_counts_verified_subjects_only(self):
        subjects = [
            _subject(1, 1, 1),
            _subject(1, 0, 1),
            _subject(0, 0, 0),
            _subject(0, 1, 0),
            _subject(0, None, 0, verified=0),
            _subject(1, None, 0, verified=0),
        ]
        tables = tabulate(subjects)
        overall = tables.overall
        assert (overall.n_pp, overall.n_pn, overall.n_np, overall.n_nn) == (1, 1, 1, 1)
        verification = tables.verification
        assert verification.n_total == 6
        assert (verification.n1, verification.v1, verification.v0) == (2, 2, 2)
        assert (verification.x1, verification.x0) == (1, 1)

    def test_strata_tables(self):
        subjects = [
            _subject(1, 1, 1, r=1),
            _subject(0, 0, 0, r=1),
            _subject(0, 0, 1, r=0),
        ]
        tables = tabulate(subjects)
        assert tables.verification is None
        assert tables.strata[1].n == 2
        assert tables.strata[0].n_pn == 1
        assert tables.strata[0].stratum == 0
        assert tables.overall.n == 3


class TestNaiveEstimates:
    """Test class for naive_estimates."""

    def test_estimates(self):
        record = naive_estimates(TwoByTwoTable(n_pp=40, n_pn=5, n_np=8, n_nn=47), 3, "Setup 2")
        assert record.study_id == 3
        assert record.setup_label == "Setup 2"
        assert record.prev_hat == pytest.approx(0.48)
        assert record.se_hat == pytest.approx(40 / 48)
        assert record.sp_hat == pytest.approx(47 / 52)

    def test_zero_denominators_are_missing(self):
        record = naive_estimates(TwoByTwoTable(n_pp=0, n_pn=3, n_np=0, n_nn=7), 0, "Setup 1")
        assert record.prev_hat == 0.0
        assert record.se_hat is None
        assert record.sp_hat == pytest.approx(0.7)
        empty = naive_estimates(TwoByTwoTable(0, 0, 0, 0), 1, "Setup 1")
        assert empty.prev_hat is None and empty.se_hat is None and empty.sp_hat is None
