//! Gauss–Legendre quadrature.
//!
//! Used for expectations against continuous mark densities. Nodes and weights
//! are computed once per rule by Newton iteration on the Legendre polynomial
//! (the classic Golub-free construction); a rule with `n` nodes integrates
//! polynomials up to degree `2n - 1` exactly.

use crate::scalar::{real, Real};

/// A Gauss–Legendre rule on the reference interval `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Build an `n`-node rule. Panics if `n == 0`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "quadrature rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf: T = real(n as f64);
        // Nodes come in +/- pairs; solve for the non-negative half.
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess for the i-th root of P_n.
            let theta = real::<T>(std::f64::consts::PI) * (real::<T>(i as f64) + real(0.75))
                / (nf + real(0.5));
            let mut x = theta.cos();
            let mut dp;
            loop {
                // Evaluate P_n and P_{n-1} by the three-term recurrence.
                let mut p0 = T::one();
                let mut p1 = x;
                for k in 2..=n {
                    let kf: T = real(k as f64);
                    let p2 = ((real::<T>(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0)
                        / kf;
                    p0 = p1;
                    p1 = p2;
                }
                // P_n' via the derivative identity (x^2 - 1) P_n' = n (x P_n - P_{n-1}).
                dp = nf * (x * p1 - p0) / (x * x - T::one());
                let dx = p1 / dp;
                x = x - dx;
                if dx.abs() <= T::epsilon() * (x.abs() + T::one()) {
                    break;
                }
            }
            let w = real::<T>(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        // n odd: the middle node is exactly zero.
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` over `[lo, hi]` by mapping the reference nodes affinely.
    pub fn integrate(&self, lo: T, hi: T, mut f: impl FnMut(T) -> T) -> T {
        let half = (hi - lo) * real(0.5);
        let mid = (hi + lo) * real(0.5);
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn five_node_rule_matches_tabled_values() {
        // Abramowitz & Stegun 25.4.29, n = 5.
        let rule = GaussLegendre::<f64>::new(5);
        let expected_nodes = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        let expected_weights = [
            0.236_926_885_056_189,
            0.478_628_670_499_366,
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
        ];
        for i in 0..5 {
            assert_abs_diff_eq!(rule.nodes[i], expected_nodes[i], epsilon = 1e-14);
            assert_abs_diff_eq!(rule.weights[i], expected_weights[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn integrates_polynomials_of_degree_two_n_minus_one_exactly() {
        let rule = GaussLegendre::<f64>::new(8);
        // x^15 over [0, 1] = 1/16; degree 15 = 2*8 - 1 is the exactness edge.
        let got = rule.integrate(0.0, 1.0, |x| x.powi(15));
        assert_abs_diff_eq!(got, 1.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn large_rule_handles_smooth_integrands() {
        let rule = GaussLegendre::<f64>::new(1024);
        let got = rule.integrate(0.0, 30.0, |x| (-x).exp());
        assert_abs_diff_eq!(got, 1.0 - (-30.0f64).exp(), epsilon = 1e-13);
        let gauss = rule.integrate(-8.0, 8.0, |x| (-0.5 * x * x).exp());
        assert_abs_diff_eq!(gauss, (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1usize, 2, 3, 7, 64, 513] {
            let rule = GaussLegendre::<f64>::new(n);
            let total: f64 = rule.weights.iter().sum();
            assert_abs_diff_eq!(total, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn f32_rule_is_usable() {
        let rule = GaussLegendre::<f32>::new(16);
        let got = rule.integrate(0.0f32, 1.0, |x| x * x);
        assert!((got - 1.0 / 3.0).abs() < 1e-6, "got {got}");
    }
}
