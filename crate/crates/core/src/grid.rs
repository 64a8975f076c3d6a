//! Uniform-grid calculus: sampled functions on `[0, horizon]`, trapezoid
//! integration and causal convolution.
//!
//! All kernels live on the non-negative half-line, so a function is stored as
//! its values at `t = 0, dt, 2 dt, ..., horizon`. Convolution uses the
//! trapezoid rule with endpoint halving, which keeps the composite error at
//! `O(dt^2)` and — importantly for cross-checking — agrees exactly with the
//! implicit discretization used by the direct Volterra solver.

use std::io::Write;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{HawkesError, Result};
use crate::scalar::{real, Real};

/// A function sampled on the uniform grid `0, dt, ..., (len - 1) * dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    dt: T,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    /// Wrap explicit samples. Requires `dt > 0`, at least two nodes and
    /// finite values.
    pub fn from_values(dt: T, values: Vec<T>) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(HawkesError::Domain(format!(
                "grid step must be positive and finite, got {}",
                dt.to_f64_lossy()
            )));
        }
        if values.len() < 2 {
            return Err(HawkesError::Domain(
                "grid needs at least two nodes (horizon > 0)".into(),
            ));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(HawkesError::Domain(format!(
                "grid value at node {bad} is not finite"
            )));
        }
        Ok(GridFunction { dt, values })
    }

    /// Sample `f` on the grid covering `[0, horizon]`. The horizon is rounded
    /// to the nearest multiple of `dt`.
    pub fn sample(dt: T, horizon: T, mut f: impl FnMut(T) -> T) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(HawkesError::Domain(format!(
                "grid step must be positive and finite, got {}",
                dt.to_f64_lossy()
            )));
        }
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(HawkesError::Domain(format!(
                "horizon must be positive and finite, got {}",
                horizon.to_f64_lossy()
            )));
        }
        let n = (horizon / dt).round().to_f64_lossy() as usize;
        if n < 1 {
            return Err(HawkesError::Domain(
                "horizon shorter than one grid step".into(),
            ));
        }
        let values: Vec<T> = (0..=n).map(|i| f(dt * real(i as f64))).collect();
        GridFunction::from_values(dt, values)
    }

    /// The zero function on the same grid as `self`.
    pub fn zeros_like(&self) -> Self {
        GridFunction {
            dt: self.dt,
            values: vec![T::zero(); self.values.len()],
        }
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction enforces >= 2 nodes
    }

    /// Last grid node, `(len - 1) * dt`.
    pub fn horizon(&self) -> T {
        self.dt * real((self.values.len() - 1) as f64)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Linear interpolation at `t in [0, horizon]`.
    pub fn value_at(&self, t: T) -> Result<T> {
        let (k, frac) = self.locate(t)?;
        if k + 1 == self.values.len() {
            return Ok(self.values[k]);
        }
        Ok(self.values[k] + (self.values[k + 1] - self.values[k]) * frac)
    }

    /// True if every node is `>= -tol` for a tiny rounding allowance.
    pub fn is_non_negative(&self) -> bool {
        let tol = -T::epsilon();
        self.values.iter().all(|&v| v >= tol)
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |a, &b| a.max(b))
    }

    /// Trapezoid integral over the full grid.
    pub fn integral(&self) -> T {
        self.integral_weighted(|_| T::one())
    }

    /// Trapezoid integral of `w(t) f(t)` over the full grid.
    pub fn integral_weighted(&self, mut w: impl FnMut(T) -> T) -> T {
        let mut acc = T::zero();
        let mut prev = w(T::zero()) * self.values[0];
        for (i, &v) in self.values.iter().enumerate().skip(1) {
            let cur = w(self.dt * real(i as f64)) * v;
            acc += prev + cur;
            prev = cur;
        }
        acc * self.dt * real(0.5)
    }

    /// Trapezoid integral over `[0, t]`, with the last (partial) cell handled
    /// by linear interpolation.
    pub fn integral_to(&self, t: T) -> Result<T> {
        self.integral_to_weighted(t, |_| T::one())
    }

    /// Trapezoid integral of `w(u) f(u)` over `[0, t]`.
    pub fn integral_to_weighted(&self, t: T, mut w: impl FnMut(T) -> T) -> Result<T> {
        let (k, frac) = self.locate(t)?;
        let mut acc = T::zero();
        let mut prev = w(T::zero()) * self.values[0];
        for i in 1..=k {
            let cur = w(self.dt * real(i as f64)) * self.values[i];
            acc += prev + cur;
            prev = cur;
        }
        acc *= self.dt * real(0.5);
        if frac > T::zero() && k + 1 < self.values.len() {
            let v_t = self.values[k] + (self.values[k + 1] - self.values[k]) * frac;
            let h_t = w(t) * v_t;
            acc += (t - self.dt * real(k as f64)) * (prev + h_t) * real(0.5);
        }
        Ok(acc)
    }

    /// Keep only the first `len` nodes.
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.clamp(2, self.values.len());
        GridFunction {
            dt: self.dt,
            values: self.values[..len].to_vec(),
        }
    }

    /// Largest node-wise absolute difference; grids must match.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs())))
    }

    /// Two-column CSV (`t,value`), one row per node.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "t,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", self.dt * real(i as f64), v)?;
        }
        Ok(())
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.dt != other.dt || self.values.len() != other.values.len() {
            return Err(HawkesError::GridMismatch(format!(
                "dt {} x {} nodes vs dt {} x {} nodes",
                self.dt.to_f64_lossy(),
                self.values.len(),
                other.dt.to_f64_lossy(),
                other.values.len()
            )));
        }
        Ok(())
    }

    /// Map `t` to `(node index, fractional offset into the next cell)`.
    fn locate(&self, t: T) -> Result<(usize, T)> {
        let horizon = self.horizon();
        // Tolerate the usual last-ulp noise at the right endpoint.
        let slack = horizon * T::epsilon() * real(8.0);
        if !(t >= T::zero()) || t > horizon + slack {
            return Err(HawkesError::Domain(format!(
                "t = {} outside grid support [0, {}]",
                t.to_f64_lossy(),
                horizon.to_f64_lossy()
            )));
        }
        let t = t.min(horizon);
        let pos = (t / self.dt).to_f64_lossy();
        let mut k = pos.floor() as usize;
        if k >= self.values.len() - 1 {
            k = self.values.len() - 1;
        }
        let frac = (t - self.dt * real(k as f64)) / self.dt;
        Ok((k, frac.max(T::zero())))
    }
}

/// Causal trapezoid convolution `(f * g)(t) = \int_0^t f(t - s) g(s) ds` on a
/// shared grid. Node 0 is exactly zero; the result lives on the same grid.
///
/// Direct `O(n^2)` evaluation — exact (up to rounding) as a trapezoid rule,
/// which makes it the reference the FFT path is checked against.
pub fn convolve<T: Real>(f: &GridFunction<T>, g: &GridFunction<T>) -> Result<GridFunction<T>> {
    f.check_same_grid(g)?;
    let n = f.len();
    let fv = f.values();
    let gv = g.values();
    let half = real::<T>(0.5);
    let mut out = vec![T::zero(); n];
    for i in 1..n {
        let mut acc = T::zero();
        for j in 0..=i {
            acc += fv[j] * gv[i - j];
        }
        acc -= half * (fv[0] * gv[i] + fv[i] * gv[0]);
        out[i] = acc * f.dt();
    }
    GridFunction::from_values(f.dt(), out)
}

/// FFT-backed convolver against a fixed base function.
///
/// Computes the same trapezoid sums as [`convolve`] in `O(n log n)`: the
/// linear convolution is done in the frequency domain on a zero-padded
/// buffer (so there is no circular wrap-around) and the two endpoint
/// corrections are applied in the time domain. Used by the resolvent series,
/// where dozens of convolutions against the same kernel are needed.
pub(crate) struct FftConvolver<T> {
    n: usize,
    padded: usize,
    dt: T,
    base: Vec<T>,
    base_hat: Vec<Complex<T>>,
    fft: Arc<dyn Fft<T>>,
    ifft: Arc<dyn Fft<T>>,
}

impl<T: Real> FftConvolver<T> {
    pub fn new(f: &GridFunction<T>) -> Self {
        let n = f.len();
        let padded = (2 * n - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(padded);
        let ifft = planner.plan_fft_inverse(padded);
        let mut base_hat = vec![Complex::new(T::zero(), T::zero()); padded];
        for (slot, &v) in base_hat.iter_mut().zip(f.values()) {
            slot.re = v;
        }
        fft.process(&mut base_hat);
        FftConvolver {
            n,
            padded,
            dt: f.dt(),
            base: f.values().to_vec(),
            base_hat,
            fft,
            ifft,
        }
    }

    /// Trapezoid convolution of the base function with `g` (same grid).
    pub fn convolve_with(&self, g: &[T]) -> Vec<T> {
        assert_eq!(g.len(), self.n, "convolver grid length mismatch");
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.padded];
        for (slot, &v) in buf.iter_mut().zip(g) {
            slot.re = v;
        }
        self.fft.process(&mut buf);
        for (b, &fh) in buf.iter_mut().zip(&self.base_hat) {
            *b = *b * fh;
        }
        self.ifft.process(&mut buf);
        let scale = self.dt / real::<T>(self.padded as f64);
        let half_dt = self.dt * real::<T>(0.5);
        let mut out = vec![T::zero(); self.n];
        for i in 1..self.n {
            out[i] = buf[i].re * scale - half_dt * (self.base[0] * g[i] + self.base[i] * g[0]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;

    fn expo_grid(rate: f64, scale: f64, dt: f64, horizon: f64) -> GridFunction<f64> {
        GridFunction::sample(dt, horizon, |t| scale * (-rate * t).exp()).unwrap()
    }

    #[test]
    fn trapezoid_is_exact_for_linear_functions() {
        let g = GridFunction::sample(0.1, 1.0, |t| 3.0 * t + 1.0).unwrap();
        assert_abs_diff_eq!(g.integral(), 2.5, epsilon = 1e-14);
        // Prefix integral hits a partial cell: int_0^0.55 (3t + 1) dt.
        let want = 1.5 * 0.55f64.powi(2) + 0.55;
        assert_abs_diff_eq!(g.integral_to(0.55).unwrap(), want, epsilon = 1e-14);
    }

    #[test]
    fn integral_to_at_grid_edges() {
        let g = GridFunction::sample(0.25, 2.0, |t| t * t).unwrap();
        assert_eq!(g.integral_to(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            g.integral_to(2.0).unwrap(),
            g.integral(),
            epsilon = 1e-14
        );
        assert!(g.integral_to(-0.1).is_err());
        assert!(g.integral_to(2.1).is_err());
    }

    #[test]
    fn convolution_of_constants_is_exact() {
        // Trapezoid convolution of 1 with 1 is exactly t at every node.
        let one = GridFunction::sample(0.125, 4.0, |_| 1.0).unwrap();
        let conv = convolve(&one, &one).unwrap();
        for (i, &v) in conv.values().iter().enumerate() {
            assert_abs_diff_eq!(v, 0.125 * i as f64, epsilon = 1e-13);
        }
    }

    #[test]
    fn convolution_matches_exponential_closed_form() {
        // (e^{-2t} * e^{-2t})(t) = t e^{-2t}.
        let f = expo_grid(2.0, 1.0, 1e-3, 2.0);
        let conv = convolve(&f, &f).unwrap();
        let got = conv.value_at(1.0).unwrap();
        assert_abs_diff_eq!(got, (-2.0f64).exp(), epsilon = 1e-6);
    }

    #[test]
    fn convolution_node_zero_is_zero_and_grids_must_match() {
        let f = expo_grid(1.0, 1.0, 0.01, 1.0);
        let conv = convolve(&f, &f).unwrap();
        assert_eq!(conv.values()[0], 0.0);
        let other = expo_grid(1.0, 1.0, 0.02, 1.0);
        assert!(matches!(
            convolve(&f, &other),
            Err(HawkesError::GridMismatch(_))
        ));
    }

    #[test]
    fn fft_convolver_agrees_with_direct_convolution() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        for n in [64usize, 257, 1000] {
            let dt = 0.01;
            let f = GridFunction::from_values(
                dt,
                (0..n).map(|_| rng.random::<f64>()).collect(),
            )
            .unwrap();
            let g = GridFunction::from_values(
                dt,
                (0..n).map(|_| rng.random::<f64>()).collect(),
            )
            .unwrap();
            let direct = convolve(&f, &g).unwrap();
            let fast = FftConvolver::new(&f).convolve_with(g.values());
            for (a, b) in direct.values().iter().zip(&fast) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn value_at_interpolates_linearly() {
        let g = GridFunction::sample(0.5, 2.0, |t| 2.0 * t).unwrap();
        assert_abs_diff_eq!(g.value_at(0.75).unwrap(), 1.5, epsilon = 1e-14);
        assert!(g.value_at(2.000001).is_err());
    }

    #[test]
    fn csv_output_is_stable() {
        let g = GridFunction::from_values(0.5, vec![1.0, 0.25, 0.0625]).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "t,value\n0,1\n0.5,0.25\n1,0.0625\n");
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridFunction::from_values(0.0, vec![1.0, 2.0]).is_err());
        assert!(GridFunction::from_values(0.1, vec![1.0]).is_err());
        assert!(GridFunction::from_values(0.1, vec![1.0, f64::NAN]).is_err());
        assert!(GridFunction::sample(0.1, -1.0, |_| 0.0).is_err());
    }
}
