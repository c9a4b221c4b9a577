"""
Error handling example for dta-prevalence-bias package.

This example shows which exceptions the package raises for bad input.
"""

from dta_prevalence_bias import (
    BiasStructure,
    ConfigError,
    DegenerateInputError,
    analytic_naive_accuracy,
    make_scenario_grid,
    parse_config,
)


def main():
    """Error handling example."""
    print("⚠️ Error Handling Example")
    print("=" * 50)

    test_cases = [
        ("Unknown bias structure", lambda: parse_config(overrides={"run": {"bias": "selection"}})),
        ("Missing config file", lambda: parse_config("nonexistent.toml")),
        ("Zero reference-negative probability", lambda: analytic_naive_accuracy(1.0, 1.0, 0.9, 0.9, 0.9)),
        (
            "Uninformative index test",
            lambda: make_scenario_grid(BiasStructure.REFERENCE_STANDARD_ERROR)[0].with_overrides(
                index_se=(0.4,), index_sp=(0.5,)
            ),
        ),
    ]

    for name, action in test_cases:
        print(f"\n{name}:")
        try:
            action()
            print("  ✅ no error")
        except ConfigError as e:
            print(f"  ❌ ConfigError: {e}")
        except DegenerateInputError as e:
            print(f"  ❌ DegenerateInputError: {e}")
        except FileNotFoundError as e:
            print(f"  ❌ FileNotFoundError: {e}")
        except ValueError as e:
            print(f"  ❌ ValueError: {e}")


if __name__ == "__main__":
    main()
