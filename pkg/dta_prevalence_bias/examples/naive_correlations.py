"""
Naive correlation example for dta-prevalence-bias package.

Simulates the reference standard error setups at a reduced scale and prints
the Spearman correlation of naive accuracy with naive prevalence.
"""

from dta_prevalence_bias import (
    BiasStructure,
    analytic_naive_accuracy,
    correlation_report,
    make_scenario_grid,
    run_scenario,
)


def main():
    """Naive correlation example."""
    print("🔬 Naive Correlation Example")
    print("=" * 50)

    setups = make_scenario_grid(BiasStructure.REFERENCE_STANDARD_ERROR)
    for setup in setups:
        run = run_scenario(setup, n_studies=1000, n_subjects=500, master_seed=20240601)
        report = correlation_report(run.estimates)[0]
        print(
            f"{setup.label}: reference (Se={setup.ref_se[0]}, Sp={setup.ref_sp[0]}) "
            f"rho(se, prev)={report.rho_se_prev:.3f} rho(sp, prev)={report.rho_sp_prev:.3f}"
        )

    # Expected naive index accuracy at prevalence 0.5 under Setup 1.
    se_hat, sp_hat = analytic_naive_accuracy(0.5, 0.7, 0.95, 0.9, 0.9)
    print(f"\nExpected naive accuracy at prevalence 0.5: Se={se_hat:.4f}, Sp={sp_hat:.4f}")


if __name__ == "__main__":
    main()
