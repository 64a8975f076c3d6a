//! Separable excitation kernels `f(t, x) = phi(t) g(x)`.
//!
//! The time factor `phi` is non-negative and integrable on `[0, inf)`; the
//! mark factor `g` is a non-negative bounded weight of the mark. Simulation
//! by thinning additionally needs a *non-increasing* envelope dominating
//! `phi`, so that the intensity after an event can be bounded from above on
//! the whole future.

use std::fmt;
use std::sync::Arc;

use crate::error::{HawkesError, Result};
use crate::model::marks::{MarkDistribution, MarkFunction};
use crate::scalar::{real, Real};

/// A time factor given by explicit callables plus the analytic facts the
/// calculus needs (its `L^1` norm and supremum cannot be recovered reliably
/// from samples alone).
#[derive(Clone)]
pub struct TimeProfile<T> {
    eval: Arc<dyn Fn(T) -> T + Send + Sync>,
    envelope: Arc<dyn Fn(T) -> T + Send + Sync>,
    l1_norm: T,
    sup: T,
    label: String,
}

impl<T: Real> TimeProfile<T> {
    /// Wrap a profile. `envelope` must be non-increasing with
    /// `envelope(t) >= eval(t)` for all `t >= 0`; `l1_norm` and `sup` are the
    /// exact integral and supremum of `eval` on `[0, inf)`.
    ///
    /// The label identifies the profile in digests and reports, so it should
    /// encode the parameters.
    pub fn new(
        label: impl Into<String>,
        l1_norm: T,
        sup: T,
        eval: impl Fn(T) -> T + Send + Sync + 'static,
        envelope: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        if !l1_norm.is_finite() || l1_norm < T::zero() {
            return Err(HawkesError::InvalidModel(format!(
                "profile L1 norm must be finite and non-negative, got {}",
                l1_norm.to_f64_lossy()
            )));
        }
        if !sup.is_finite() || sup < T::zero() {
            return Err(HawkesError::InvalidModel(format!(
                "profile supremum must be finite and non-negative, got {}",
                sup.to_f64_lossy()
            )));
        }
        Ok(TimeProfile {
            eval: Arc::new(eval),
            envelope: Arc::new(envelope),
            l1_norm,
            sup,
            label: label.into(),
        })
    }

    /// Polynomially decaying profile `a (1 + t/c)^{-p}`.
    ///
    /// Requires `p > 2` so that both the `L^1` norm and the first moment of
    /// the profile are finite — the moment calculus depends on the latter.
    /// The profile is its own (non-increasing) envelope.
    pub fn power_law(a: T, c: T, p: T) -> Result<Self> {
        if !a.is_finite() || a < T::zero() {
            return Err(HawkesError::InvalidModel(format!(
                "power-law amplitude must be non-negative, got {}",
                a.to_f64_lossy()
            )));
        }
        if !c.is_finite() || !(c > T::zero()) {
            return Err(HawkesError::InvalidModel(format!(
                "power-law scale must be positive, got {}",
                c.to_f64_lossy()
            )));
        }
        if !p.is_finite() || !(p > real(2.0)) {
            return Err(HawkesError::InvalidModel(format!(
                "power-law exponent must exceed 2 for a finite first moment, got {}",
                p.to_f64_lossy()
            )));
        }
        let l1 = a * c / (p - T::one());
        let label = format!("power_law(a={a},c={c},p={p})");
        let f = move |t: T| a * (T::one() + t / c).powf(-p);
        TimeProfile::new(label, l1, a, f, f)
    }

    pub fn eval(&self, t: T) -> T {
        (self.eval)(t)
    }

    pub fn envelope(&self, t: T) -> T {
        (self.envelope)(t)
    }

    pub fn l1_norm(&self) -> T {
        self.l1_norm
    }

    pub fn sup(&self) -> T {
        self.sup
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl<T: fmt::Debug> fmt::Debug for TimeProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeProfile")
            .field("label", &self.label)
            .field("l1_norm", &self.l1_norm)
            .field("sup", &self.sup)
            .finish()
    }
}

/// The excitation kernel of the process.
#[derive(Clone, Debug)]
pub enum ExcitationFunction<T> {
    /// No self-excitation: the process degenerates to a Poisson process with
    /// the baseline rate.
    Zero,
    /// `f(t, x) = alpha g(x) e^{-beta t}` — the exponential family, which
    /// admits O(1) intensity updates during simulation.
    Exponential {
        alpha: T,
        beta: T,
        g: MarkFunction<T>,
    },
    /// Arbitrary separable kernel `f(t, x) = phi(t) g(x)` described by a
    /// [`TimeProfile`].
    General {
        profile: TimeProfile<T>,
        g: MarkFunction<T>,
    },
}

impl<T: Real> ExcitationFunction<T> {
    /// Exponential kernel with unit mark weight (an unmarked Hawkes kernel).
    pub fn exponential(alpha: T, beta: T) -> Self {
        ExcitationFunction::Exponential {
            alpha,
            beta,
            g: MarkFunction::Constant(T::one()),
        }
    }

    /// Validate parameters and the mark weight against the mark space.
    ///
    /// Boundedness of `f` requires a finite `sup g`; square-integrability of
    /// the total excitation (needed for every second-moment argument) then
    /// follows automatically for finite `L^1` profiles, so it is enforced
    /// here once and for all.
    pub fn validate(&self, marks: &MarkDistribution<T>) -> Result<()> {
        match self {
            ExcitationFunction::Zero => Ok(()),
            ExcitationFunction::Exponential { alpha, beta, g } => {
                if !alpha.is_finite() || *alpha < T::zero() {
                    return Err(HawkesError::InvalidModel(format!(
                        "excitation amplitude must be non-negative, got {}",
                        alpha.to_f64_lossy()
                    )));
                }
                if !beta.is_finite() || !(*beta > T::zero()) {
                    return Err(HawkesError::InvalidModel(format!(
                        "excitation decay rate must be positive, got {}",
                        beta.to_f64_lossy()
                    )));
                }
                self.validate_mark_weight(g, marks)
            }
            ExcitationFunction::General { g, .. } => self.validate_mark_weight(g, marks),
        }
    }

    fn validate_mark_weight(&self, g: &MarkFunction<T>, marks: &MarkDistribution<T>) -> Result<()> {
        g.validate_for(marks)?;
        if !g.is_non_negative_on(marks) {
            return Err(HawkesError::InvalidModel(
                "mark weight of the excitation must be non-negative".into(),
            ));
        }
        if !g.sup(marks).is_finite() {
            return Err(HawkesError::InvalidModel(
                "mark weight of the excitation must be bounded on the mark support".into(),
            ));
        }
        Ok(())
    }

    /// Time factor `phi(t)` for `t >= 0`.
    pub fn profile_at(&self, t: T) -> T {
        match self {
            ExcitationFunction::Zero => T::zero(),
            ExcitationFunction::Exponential { alpha, beta, .. } => *alpha * (-*beta * t).exp(),
            ExcitationFunction::General { profile, .. } => profile.eval(t),
        }
    }

    /// Non-increasing envelope dominating `phi` on `[t, inf)`.
    pub fn envelope_at(&self, t: T) -> T {
        match self {
            ExcitationFunction::Zero => T::zero(),
            ExcitationFunction::Exponential { alpha, beta, .. } => *alpha * (-*beta * t).exp(),
            ExcitationFunction::General { profile, .. } => profile.envelope(t),
        }
    }

    /// `int_0^inf phi(t) dt`.
    pub fn profile_l1(&self) -> T {
        match self {
            ExcitationFunction::Zero => T::zero(),
            ExcitationFunction::Exponential { alpha, beta, .. } => *alpha / *beta,
            ExcitationFunction::General { profile, .. } => profile.l1_norm(),
        }
    }

    /// `sup_t phi(t)`.
    pub fn profile_sup(&self) -> T {
        match self {
            ExcitationFunction::Zero => T::zero(),
            ExcitationFunction::Exponential { alpha, .. } => *alpha,
            ExcitationFunction::General { profile, .. } => profile.sup(),
        }
    }

    pub fn mark_weight(&self) -> Option<&MarkFunction<T>> {
        match self {
            ExcitationFunction::Zero => None,
            ExcitationFunction::Exponential { g, .. } => Some(g),
            ExcitationFunction::General { g, .. } => Some(g),
        }
    }

    /// `(alpha, beta)` when the kernel is in the exponential family.
    pub fn exponential_params(&self) -> Option<(T, T)> {
        match self {
            ExcitationFunction::Exponential { alpha, beta, .. } => Some((*alpha, *beta)),
            _ => None,
        }
    }

    /// A horizon beyond which the profile is negligible, when one is known.
    /// Exponential kernels use `40 / beta` (a relative tail below 1e-17);
    /// general profiles do not get a default and callers must choose.
    pub fn default_horizon(&self) -> Option<T> {
        match self {
            ExcitationFunction::Zero => Some(T::one()),
            ExcitationFunction::Exponential { beta, .. } => Some(real::<T>(40.0) / *beta),
            ExcitationFunction::General { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ExcitationFunction::Zero => "zero".into(),
            ExcitationFunction::Exponential { alpha, beta, g } => {
                format!("exponential(alpha={alpha},beta={beta},g={})", g.describe())
            }
            ExcitationFunction::General { profile, g } => {
                format!("general({},g={})", profile.label(), g.describe())
            }
        }
    }
}
