//! Model description: baseline rate, separable excitation and mark law.
//!
//! A kernel specification fixes the conditional intensity
//! `lambda(t) = m + sum_{T_i < t} phi(t - T_i) g(X_i)` together with the mark
//! distribution `Q`. Everything the analytic layer needs — the marginal
//! excitation `F(t) = phi(t) E[g(X)]`, the branching ratio `||F||_{L1}`, the
//! total excitation `H(x)` of a mark — derives from here.

mod excitation;
mod marks;

pub use excitation::{ExcitationFunction, TimeProfile};
pub use marks::{
    ContinuousMarks, DiscreteMarks, Mark, MarkDistribution, MarkFunction, MarkPoint, MarkSet,
    DEFAULT_QUAD_NODES,
};

use sha2::{Digest, Sha256};

use crate::error::{HawkesError, Result};
use crate::grid::GridFunction;
use crate::scalar::Real;

/// Outcome of the stability check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityReport<T> {
    /// `||F||_{L1} = E[g(X)] int_0^inf phi(t) dt`, the mean number of direct
    /// offspring per event.
    pub branching_ratio: T,
    /// Strict criterion `branching_ratio < 1`.
    pub stable: bool,
}

/// A fully validated model: baseline rate `m`, excitation kernel and mark
/// distribution, plus the mark moments cached at construction.
#[derive(Clone, Debug)]
pub struct KernelSpec<T> {
    m: T,
    excitation: ExcitationFunction<T>,
    marks: MarkDistribution<T>,
    g_mean: T,
    g_sq_mean: T,
    allow_unstable: bool,
}

impl<T: Real> KernelSpec<T> {
    /// Build a model and enforce stability (`||F||_{L1} < 1`, strictly).
    pub fn new(m: T, excitation: ExcitationFunction<T>, marks: MarkDistribution<T>) -> Result<Self> {
        Self::build(m, excitation, marks, false)
    }

    /// Build a model without the stability gate.
    ///
    /// Only finite-horizon simulation is meaningful for an unstable kernel;
    /// the resolvent and every long-run limit will refuse it.
    pub fn new_allow_unstable(
        m: T,
        excitation: ExcitationFunction<T>,
        marks: MarkDistribution<T>,
    ) -> Result<Self> {
        Self::build(m, excitation, marks, true)
    }

    fn build(
        m: T,
        excitation: ExcitationFunction<T>,
        marks: MarkDistribution<T>,
        allow_unstable: bool,
    ) -> Result<Self> {
        if !m.is_finite() || m < T::zero() {
            return Err(HawkesError::InvalidModel(format!(
                "baseline rate must be non-negative and finite, got {}",
                m.to_f64_lossy()
            )));
        }
        marks.validate()?;
        excitation.validate(&marks)?;
        let (g_mean, g_sq_mean) = match excitation.mark_weight() {
            None => (T::zero(), T::zero()),
            Some(g) => {
                let mean = marks.expect_weight(g);
                let sq = match &marks {
                    MarkDistribution::Discrete(d) => d.expect(|i, _| {
                        let v = g.eval(&marks, Mark::Point(i));
                        v * v
                    }),
                    MarkDistribution::Continuous(c) => c.expect(DEFAULT_QUAD_NODES, |x| {
                        let v = g.eval(&marks, Mark::Scalar(x));
                        v * v
                    }),
                };
                (mean, sq)
            }
        };
        // Square-integrability of the total excitation in the mark:
        // int ||f(., x)||_{L1}^2 Q(dx) = ||phi||_{L1}^2 E[g^2]. Bounded g and
        // an integrable profile keep it finite, but evaluate rather than
        // assume — general profiles carry user-supplied norms.
        let l1 = excitation.profile_l1();
        if !(l1 * l1 * g_sq_mean).is_finite() {
            return Err(HawkesError::InvalidModel(
                "total excitation is not square-integrable over the mark space".into(),
            ));
        }
        let spec = KernelSpec {
            m,
            excitation,
            marks,
            g_mean,
            g_sq_mean,
            allow_unstable,
        };
        if !allow_unstable {
            let report = spec.check_stability();
            if !report.stable {
                return Err(HawkesError::Unstable {
                    norm: report.branching_ratio.to_f64_lossy(),
                });
            }
        }
        Ok(spec)
    }

    pub fn m(&self) -> T {
        self.m
    }

    pub fn excitation(&self) -> &ExcitationFunction<T> {
        &self.excitation
    }

    pub fn marks(&self) -> &MarkDistribution<T> {
        &self.marks
    }

    /// Cached `E[g(X)]`.
    pub fn g_mean(&self) -> T {
        self.g_mean
    }

    /// Cached `E[g(X)^2]`.
    pub fn g_sq_mean(&self) -> T {
        self.g_sq_mean
    }

    pub fn allows_unstable(&self) -> bool {
        self.allow_unstable
    }

    /// Marginal excitation `F(t) = phi(t) E[g(X)]`; errors for `t < 0`.
    pub fn marginal_excitation(&self, t: T) -> Result<T> {
        if t < T::zero() {
            return Err(HawkesError::Domain(format!(
                "marginal excitation is defined for t >= 0, got {}",
                t.to_f64_lossy()
            )));
        }
        Ok(self.excitation.profile_at(t) * self.g_mean)
    }

    /// `F` sampled on a uniform grid, ready for the resolvent calculus.
    pub fn marginal_excitation_grid(&self, dt: T, horizon: T) -> Result<GridFunction<T>> {
        let g_mean = self.g_mean;
        GridFunction::sample(dt, horizon, |t| self.excitation.profile_at(t) * g_mean)
    }

    /// `||F||_{L1}`, the expected number of direct offspring of one event.
    pub fn branching_ratio(&self) -> T {
        self.excitation.profile_l1() * self.g_mean
    }

    pub fn check_stability(&self) -> StabilityReport<T> {
        let br = self.branching_ratio();
        StabilityReport {
            branching_ratio: br,
            stable: br < T::one(),
        }
    }

    pub fn is_stable(&self) -> bool {
        self.check_stability().stable
    }

    /// Total excitation contributed by one event with mark `x`:
    /// `H(x) = g(x) int_0^inf phi(t) dt`.
    pub fn mark_total_excitation(&self, mark: Mark<T>) -> T {
        match self.excitation.mark_weight() {
            None => T::zero(),
            Some(g) => self.excitation.profile_l1() * g.eval(&self.marks, mark),
        }
    }

    /// `E[H(X)]` computed as an expectation of [`Self::mark_total_excitation`].
    ///
    /// Algebraically this equals [`Self::branching_ratio`]; evaluating it by
    /// the independent route keeps the identity testable.
    pub fn mean_total_excitation(&self) -> T {
        match &self.marks {
            MarkDistribution::Discrete(d) => {
                d.expect(|i, _| self.mark_total_excitation(Mark::Point(i)))
            }
            MarkDistribution::Continuous(c) => c.expect(DEFAULT_QUAD_NODES, |x| {
                self.mark_total_excitation(Mark::Scalar(x))
            }),
        }
    }

    /// `E[H(X)^2]`, the ingredient of the integrability diagnostic.
    pub fn mean_sq_total_excitation(&self) -> T {
        let l1 = self.excitation.profile_l1();
        l1 * l1 * self.g_sq_mean
    }

    /// `Q(A)` of a mark set.
    pub fn q_of(&self, set: &MarkSet<T>) -> Result<T> {
        self.marks.prob_of(set)
    }

    /// Expectation `phi_Q = E[phi(X)]` of a mark functional, with the default
    /// quadrature resolution for continuous laws.
    pub fn phi_q(&self, phi: &MarkFunction<T>) -> Result<T> {
        self.phi_q_with_nodes(phi, DEFAULT_QUAD_NODES)
    }

    /// As [`Self::phi_q`] with an explicit quadrature size.
    pub fn phi_q_with_nodes(&self, phi: &MarkFunction<T>, nodes: usize) -> Result<T> {
        phi.validate_for(&self.marks)?;
        Ok(self.marks.expect_weight_with_nodes(phi, nodes))
    }

    /// Grid horizon after which the excitation is negligible, when the
    /// kernel family defines one.
    pub fn default_horizon(&self) -> Option<T> {
        self.excitation.default_horizon()
    }

    /// Stable textual form of the whole model.
    pub fn describe(&self) -> String {
        format!(
            "m={};excitation={};marks={};allow_unstable={}",
            self.m,
            self.excitation.describe(),
            self.marks.describe(),
            self.allow_unstable
        )
    }

    /// SHA-256 digest of [`Self::describe`], pinning a model in reports.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.describe().as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in hash {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}
