//! Property tests tying together independently computed model quantities
//! on randomized kernels: the mean total excitation must equal the kernel
//! mass however it is evaluated, grids must reproduce analytic integrals,
//! and the profitability threshold must agree across its two algebraic
//! forms.

use marked_hawkes::lln::{
    compound_limit, count_limit, mark_sum_limit, net_profit_condition, resolvent_norm,
};
use marked_hawkes::model::{
    DiscreteMarks, ExcitationFunction, KernelSpec, MarkDistribution, MarkFunction, MarkPoint,
    MarkSet,
};
use proptest::prelude::*;

/// Random finite mark space with 2-4 points, values in (0.1, 3), and
/// normalized weights.
fn discrete_marks() -> impl Strategy<Value = MarkDistribution<f64>> {
    (2usize..=4)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.1f64..3.0, n),
                prop::collection::vec(0.05f64..1.0, n),
            )
        })
        .prop_map(|(values, raw_weights)| {
            let total: f64 = raw_weights.iter().sum();
            let probs: Vec<f64> = raw_weights.iter().map(|w| w / total).collect();
            let points: Vec<MarkPoint<f64>> = values
                .iter()
                .enumerate()
                .map(|(i, &v)| MarkPoint {
                    label: format!("m{i}"),
                    value: v,
                })
                .collect();
            MarkDistribution::Discrete(DiscreteMarks::new(points, probs).unwrap())
        })
}

fn mark_weight() -> impl Strategy<Value = MarkFunction<f64>> {
    prop_oneof![
        (0.1f64..2.0).prop_map(MarkFunction::Constant),
        Just(MarkFunction::Value),
        Just(MarkFunction::Square),
    ]
}

proptest! {
    /// The average total excitation contributed by one event equals the
    /// integral of the marginal kernel, whichever of the two routes
    /// computes it.
    #[test]
    fn mean_total_excitation_equals_kernel_mass(
        alpha in 0.05f64..2.0,
        beta in 0.5f64..4.0,
        marks in discrete_marks(),
        g in mark_weight(),
    ) {
        let excitation = ExcitationFunction::Exponential { alpha, beta, g };
        let spec = KernelSpec::new_allow_unstable(1.0, excitation, marks).unwrap();
        let by_expectation = spec.mean_total_excitation();
        let by_mass = spec.branching_ratio();
        prop_assert!(
            (by_expectation - by_mass).abs() <= 1e-12 * (1.0 + by_mass.abs()),
            "expectation route {by_expectation} vs kernel-mass route {by_mass}"
        );
    }

    /// Integrating the marginal excitation on a grid reproduces the
    /// branching ratio up to quadrature error.
    #[test]
    fn grid_mass_matches_branching_ratio(
        alpha in 0.05f64..1.5,
        beta in 0.5f64..4.0,
        marks in discrete_marks(),
    ) {
        let spec = KernelSpec::new_allow_unstable(
            1.0,
            ExcitationFunction::Exponential { alpha, beta, g: MarkFunction::Value },
            marks,
        )
        .unwrap();
        let horizon = spec.default_horizon().unwrap();
        let grid = spec.marginal_excitation_grid(1e-3, horizon).unwrap();
        let mass = grid.integral();
        let analytic = spec.branching_ratio();
        prop_assert!(
            (mass - analytic).abs() <= 1e-5 * (1.0 + analytic),
            "grid mass {mass} vs analytic {analytic}"
        );
    }

    /// Stability is strict: unit or super-unit kernel mass is rejected by
    /// the checked constructor and flagged by the permissive one.
    #[test]
    fn stability_gate_is_strict(scale in 1.0f64..3.0, beta in 0.5f64..4.0) {
        let marks = MarkDistribution::two_point(("a", 1.0), ("b", 1.0)).unwrap();
        // alpha = scale * beta makes the kernel mass exactly `scale`.
        let excitation = ExcitationFunction::exponential(scale * beta, beta);
        let strict = KernelSpec::new(1.0, excitation.clone(), marks.clone());
        prop_assert!(strict.is_err(), "mass {scale} must be rejected");
        let permissive = KernelSpec::new_allow_unstable(1.0, excitation, marks).unwrap();
        prop_assert!(!permissive.is_stable());
        prop_assert!((permissive.branching_ratio() - scale).abs() <= 1e-12 * scale);
    }

    /// The profitability threshold written through the resolvent norm,
    /// `mu m (1 + ||R||)`, agrees with its closed form `mu m / (1 - E[H])`.
    #[test]
    fn profit_threshold_parameterizations_agree(
        mass in 0.05f64..0.95,
        m in 0.1f64..3.0,
        mu in 0.1f64..4.0,
    ) {
        let via_condition = net_profit_condition(0.0, m, mu, mass).unwrap().required_rate;
        let via_norm = mu * m * (1.0 + resolvent_norm(mass).unwrap());
        prop_assert!(
            (via_condition - via_norm).abs() <= 1e-12 * via_condition,
            "{via_condition} vs {via_norm}"
        );
    }

    /// Limit operators are mutually consistent: claims scale counts, and a
    /// unit mark weight reduces the weighted sum to the plain count.
    #[test]
    fn limit_operators_are_consistent(
        m in 0.1f64..3.0,
        q_a in 0.0f64..1.0,
        mass in 0.05f64..0.95,
        mu in 0.1f64..4.0,
        v in 0.0f64..3.0,
    ) {
        let norm_r = resolvent_norm(mass).unwrap();
        let n = count_limit(m, q_a, norm_r, v);
        let c = compound_limit(m, q_a, norm_r, mu, v);
        prop_assert!((c - n * mu).abs() <= 1e-12 * (1.0 + c.abs()));
        let d = mark_sum_limit(m, 1.0, norm_r, v);
        let n_all = count_limit(m, 1.0, norm_r, v);
        prop_assert!((d - n_all).abs() <= 1e-12 * (1.0 + d.abs()));
    }
}

#[test]
fn mark_set_probabilities_add_up() {
    let marks = MarkDistribution::<f64>::Discrete(
        DiscreteMarks::uniform_over(vec![
            MarkPoint::new("a", 1.0),
            MarkPoint::new("b", 2.0),
            MarkPoint::new("c", 3.0),
        ])
        .unwrap(),
    );
    let spec = KernelSpec::new(1.0, ExcitationFunction::exponential(1.0, 2.0), marks).unwrap();
    let all = spec.q_of(&MarkSet::All).unwrap();
    let parts: f64 = (0..3)
        .map(|i| spec.q_of(&MarkSet::Points(vec![i])).unwrap())
        .sum();
    assert!(
        (all - parts).abs() < 1e-15,
        "partition must sum to the whole: {all} vs {parts}"
    );
    assert!((all - 1.0).abs() < 1e-15);
}
