//! Resolvent calculus for the renewal equation `R = F + F * R`.
//!
//! `F` is the marginal excitation of a stable kernel (`||F||_{L1} < 1`), and
//! the resolvent `R = sum_{n >= 1} F^{*n}` drives every first-moment formula:
//! the expected intensity is `m (1 + int_0^t R)` and the expected restricted
//! count is `Q(A) m (t + int_0^t (t - u) R(u) du)`.
//!
//! Two independent discretizations are computed on every call:
//!
//! * the Neumann series, with convolutions evaluated through a zero-padded
//!   FFT (`O(n log n)` per term) and truncated once the geometric tail bound
//!   falls below the requested tolerance;
//! * direct forward substitution on the implicitly discretized Volterra
//!   equation (`O(n^2)`, evaluated on a bounded prefix of large grids).
//!
//! The two must agree within `10 x` the tolerance or the call fails — a
//! disagreement means the grid is too coarse for the kernel, and silently
//! returning either answer would poison everything downstream.

use crate::error::{HawkesError, Result};
use crate::grid::{FftConvolver, GridFunction};
use crate::model::KernelSpec;
use crate::scalar::{real, Real};

/// Node cap for the `O(n^2)` cross-check; prefixes of a causal solution are
/// self-contained, so checking the head of a long grid is still a complete
/// equation solve on that sub-interval.
const DIRECT_CHECK_MAX_NODES: usize = 40_001;

/// Series-length cap; hit only for branching ratios pathologically close to
/// one, where the geometric tail effectively never closes.
const MAX_NEUMANN_TERMS: usize = 100_000;

/// Output of [`resolvent`]: the resolvent grid plus the norm and moment
/// summaries the limit theorems consume.
#[derive(Clone, Debug)]
pub struct ResolventResult<T> {
    /// `R` on the same grid as the input kernel.
    pub resolvent: GridFunction<T>,
    /// `int_0^horizon R(t) dt` of the computed (truncated) series.
    pub l1_norm_truncated: T,
    /// Geometric bound on the discarded series tail,
    /// `||F||^{N+1} / (1 - ||F||)`.
    pub l1_tail_bound: T,
    /// `int_0^horizon t R(t) dt`.
    pub first_moment: T,
    /// Analytic bound `int t F(t) dt / (1 - ||F||)^2` on the first moment.
    pub first_moment_bound: T,
    /// Number of series terms summed before the tail bound closed.
    pub neumann_terms_used: usize,
}

impl<T: Real> ResolventResult<T> {
    /// `(lower, upper)` bracket for `||R||_{L1}`: the truncated norm and the
    /// truncated norm plus the tail bound.
    pub fn l1_norm_bracket(&self) -> (T, T) {
        (
            self.l1_norm_truncated,
            self.l1_norm_truncated + self.l1_tail_bound,
        )
    }

    /// Expected intensity `E lambda(t) = m (1 + int_0^t R(u) du)`.
    pub fn expected_intensity(&self, m: T, t: T) -> Result<T> {
        check_baseline(m)?;
        Ok(m * (T::one() + self.resolvent.integral_to(t)?))
    }

    /// Expected restricted count
    /// `E N(t, A) = Q(A) m (t + int_0^t (t - u) R(u) du)`.
    pub fn expected_count(&self, m: T, q_a: T, t: T) -> Result<T> {
        check_baseline(m)?;
        if !q_a.is_finite() || q_a < T::zero() || q_a > T::one() {
            return Err(HawkesError::Domain(format!(
                "mark-set probability must lie in [0, 1], got {}",
                q_a.to_f64_lossy()
            )));
        }
        let weighted = self.resolvent.integral_to_weighted(t, |u| t - u)?;
        Ok(q_a * m * (t + weighted))
    }

    /// Integrability diagnostic `(1 + ||R||)^2 E[H(X)^2]` evaluated with the
    /// upper bracket of the computed norm.
    pub fn integrability_value(&self, spec: &KernelSpec<T>) -> T {
        check_integrability_condition(spec, self.l1_norm_bracket().1)
    }
}

fn check_baseline<T: Real>(m: T) -> Result<()> {
    if !m.is_finite() || m < T::zero() {
        return Err(HawkesError::Domain(format!(
            "baseline rate must be non-negative and finite, got {}",
            m.to_f64_lossy()
        )));
    }
    Ok(())
}

/// Solve `R = F + F * R` on the grid of `f`.
///
/// `tol` bounds the `L^1` mass of the discarded series tail (and its
/// node-wise supremum); it must be positive. Fails with
/// [`HawkesError::Unstable`] when the grid mass of `f` is `>= 1`, and with
/// [`HawkesError::ResolventCheck`] when the series and the direct solve
/// disagree by more than `10 * tol`.
pub fn resolvent<T: Real>(f: &GridFunction<T>, tol: T) -> Result<ResolventResult<T>> {
    if !(tol > T::zero()) || !tol.is_finite() {
        return Err(HawkesError::Domain(format!(
            "series tolerance must be positive, got {}",
            tol.to_f64_lossy()
        )));
    }
    if !f.is_non_negative() {
        return Err(HawkesError::Domain(
            "kernel grid must be non-negative".into(),
        ));
    }
    let norm_f = f.integral();
    if norm_f >= T::one() {
        return Err(HawkesError::Unstable {
            norm: norm_f.to_f64_lossy(),
        });
    }
    let sup_f = f.max_value();
    let one_minus = T::one() - norm_f;

    let convolver = FftConvolver::new(f);
    let mut term = f.values().to_vec();
    let mut sum = term.clone();
    let mut terms_used = 1usize;
    let mut power = norm_f; // ||F||^terms_used
    loop {
        let tail_l1 = power * norm_f / one_minus;
        let tail_sup = sup_f * power / one_minus;
        if tail_l1 < tol && tail_sup < tol {
            break;
        }
        if terms_used >= MAX_NEUMANN_TERMS {
            return Err(HawkesError::Domain(format!(
                "series needs more than {MAX_NEUMANN_TERMS} terms (||F|| = {}); \
                 the kernel is too close to critical for this tolerance",
                norm_f.to_f64_lossy()
            )));
        }
        term = convolver.convolve_with(&term);
        for (acc, &t) in sum.iter_mut().zip(&term) {
            *acc += t;
        }
        terms_used += 1;
        power *= norm_f;
    }
    let resolvent = GridFunction::from_values(f.dt(), sum)?;
    let l1_tail_bound = power * norm_f / one_minus;

    // Independent route: implicit forward substitution. On long grids the
    // check runs on a prefix to keep the quadratic cost bounded.
    let check_len = f.len().min(DIRECT_CHECK_MAX_NODES);
    let direct = direct_resolvent(&f.truncated(check_len))?;
    let deviation = direct.max_abs_diff(&resolvent.truncated(check_len))?;
    let allowed = tol * real(10.0);
    if deviation > allowed {
        return Err(HawkesError::ResolventCheck {
            deviation: deviation.to_f64_lossy(),
            allowed: allowed.to_f64_lossy(),
        });
    }

    let l1_norm_truncated = resolvent.integral();
    let first_moment = resolvent.integral_weighted(|t| t);
    let tf = f.integral_weighted(|t| t);
    let first_moment_bound = tf / (one_minus * one_minus);
    Ok(ResolventResult {
        resolvent,
        l1_norm_truncated,
        l1_tail_bound,
        first_moment,
        first_moment_bound,
        neumann_terms_used: terms_used,
    })
}

/// Solve the discretized equation directly by forward substitution.
///
/// The trapezoid discretization puts `(dt / 2) F(0) R(t_i)` on the diagonal,
/// so each step divides by `1 - F(0) dt / 2`; the grid must satisfy
/// `F(0) dt < 1` for the scheme to be well posed.
pub fn direct_resolvent<T: Real>(f: &GridFunction<T>) -> Result<GridFunction<T>> {
    if !f.is_non_negative() {
        return Err(HawkesError::Domain(
            "kernel grid must be non-negative".into(),
        ));
    }
    let dt = f.dt();
    let fv = f.values();
    let half_dt = dt * real::<T>(0.5);
    if fv[0] * dt >= T::one() {
        return Err(HawkesError::Domain(format!(
            "grid too coarse: F(0) dt = {} must be < 1",
            (fv[0] * dt).to_f64_lossy()
        )));
    }
    let denom = T::one() - fv[0] * half_dt;
    let n = f.len();
    let mut r = vec![T::zero(); n];
    r[0] = fv[0];
    for i in 1..n {
        // Trapezoid sum over [0, t_i] with the unknown R(t_i) moved left.
        let mut acc = fv[i] * r[0] * real(0.5);
        for j in 1..i {
            acc += fv[i - j] * r[j];
        }
        r[i] = (fv[i] + dt * acc) / denom;
    }
    GridFunction::from_values(dt, r)
}

/// `(1 + ||R||)^2 E[H(X)^2]` — finiteness of this quantity is the
/// square-integrability condition under which the mark-averaged limit
/// theorems apply. Callers pass whichever estimate of `||R||` they trust.
pub fn check_integrability_condition<T: Real>(spec: &KernelSpec<T>, norm_r: T) -> T {
    let one_plus = T::one() + norm_r;
    one_plus * one_plus * spec.mean_sq_total_excitation()
}
