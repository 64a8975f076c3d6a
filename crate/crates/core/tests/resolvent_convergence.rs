//! Convergence checks for the resolvent solver on randomized exponential
//! kernels, where `R` has the closed form `a e^{-(b - a) t}` for
//! `F(t) = a e^{-b t}`, plus an explicit series-vs-direct comparison.

use marked_hawkes::grid::GridFunction;
use marked_hawkes::volterra::{direct_resolvent, resolvent};
use proptest::prelude::*;

fn exponential_grid(a: f64, b: f64, dt: f64, horizon: f64) -> GridFunction<f64> {
    GridFunction::sample(dt, horizon, |t| a * (-b * t).exp()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The series solution matches the closed form of the exponential
    /// resolvent at every grid node.
    #[test]
    fn series_matches_closed_form(mass in 0.1f64..0.8, b in 0.5f64..4.0) {
        let a = mass * b;
        let dt = 1e-3;
        let horizon = 8.0;
        let f = exponential_grid(a, b, dt, horizon);
        let res = resolvent(&f, 1e-8).unwrap();
        let mut max_err = 0.0f64;
        for (i, &r) in res.resolvent.values().iter().enumerate() {
            let t = dt * i as f64;
            let exact = a * (-(b - a) * t).exp();
            max_err = max_err.max((r - exact).abs());
        }
        prop_assert!(
            max_err <= 2e-3 * a.max(1e-3),
            "max node error {max_err} for a={a}, b={b}"
        );
        // The truncated norm cannot exceed the full-line norm by more than
        // the second-order quadrature bias (trapezoid overshoots convex
        // decaying integrands).
        let analytic_norm = mass / (1.0 - mass);
        let (lower, _) = res.l1_norm_bracket();
        prop_assert!(
            lower <= analytic_norm + 1e-5,
            "truncated norm {lower} above analytic {analytic_norm}"
        );
    }

    /// Forward substitution and the accelerated series agree far beyond
    /// the tolerance either of them is run at.
    #[test]
    fn series_and_direct_solutions_agree(mass in 0.1f64..0.8, b in 0.5f64..4.0) {
        let a = mass * b;
        let f = exponential_grid(a, b, 2e-3, 6.0);
        let series = resolvent(&f, 1e-9).unwrap();
        let direct = direct_resolvent(&f).unwrap();
        let dev = series.resolvent.max_abs_diff(&direct).unwrap();
        prop_assert!(dev <= 1e-7, "series and direct differ by {dev}");
    }

    /// The resolvent dominates its kernel and stays non-negative.
    #[test]
    fn resolvent_dominates_kernel(mass in 0.1f64..0.8, b in 0.5f64..4.0) {
        let a = mass * b;
        let f = exponential_grid(a, b, 2e-3, 6.0);
        let res = resolvent(&f, 1e-8).unwrap();
        for (&r, &k) in res.resolvent.values().iter().zip(f.values()) {
            prop_assert!(r >= k - 1e-12, "resolvent fell below kernel: {r} < {k}");
        }
        prop_assert!(res.first_moment <= res.first_moment_bound + 1e-12);
    }
}

/// Halving the step size shrinks the closed-form error by about the
/// expected second-order factor.
#[test]
fn node_error_decays_at_second_order() {
    let (a, b) = (1.0, 2.0);
    let closed_form_error = |dt: f64| -> f64 {
        let f = exponential_grid(a, b, dt, 8.0);
        let res = resolvent(&f, 1e-10).unwrap();
        res.resolvent
            .values()
            .iter()
            .enumerate()
            .map(|(i, &r)| (r - a * (-(b - a) * dt * i as f64).exp()).abs())
            .fold(0.0, f64::max)
    };
    let coarse = closed_form_error(4e-3);
    let fine = closed_form_error(1e-3);
    let ratio = coarse / fine;
    assert!(
        ratio > 8.0,
        "quartering dt should cut the error ~16x, got {ratio:.2} ({coarse:.3e} -> {fine:.3e})"
    );
}
