//! Exact path simulation by thinning, plus the path functionals the limit
//! theorems are about.
//!
//! Thinning proposes candidate times from a piecewise-constant upper bound of
//! the intensity and accepts each with probability `lambda(t) / bound`. The
//! intensity used for acceptance is the *left limit*: an event never excites
//! itself. Exponential kernels keep the excited part of the intensity as a
//! single exponentially-decaying accumulator (O(1) per candidate); general
//! profiles fall back to a scan over past events under their non-increasing
//! envelope.
//!
//! Randomness is consumed from three substreams of the caller's
//! [`RngStream`] — times, marks, claims — so the same seed yields the same
//! path regardless of which functionals are evaluated afterwards.

use std::io::Write;

use crate::error::{HawkesError, Result};
use crate::model::{
    ExcitationFunction, KernelSpec, Mark, MarkDistribution, MarkFunction, MarkSet, TimeProfile,
};
use crate::rng::{stream_purpose, RngStream};
use crate::scalar::{real, Real};

/// One simulated event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event<T> {
    pub time: T,
    pub mark: Mark<T>,
}

/// A realized path: strictly increasing event times in `(0, horizon]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EventStream<T> {
    events: Vec<Event<T>>,
    horizon: T,
}

/// Simulation limits.
#[derive(Clone, Copy, Debug)]
pub struct SimulationOptions {
    /// Abort with [`HawkesError::EventCapExceeded`] when a path would exceed
    /// this many events. Guards against near-critical or unstable kernels
    /// filling memory.
    pub max_events: usize,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions {
            max_events: 10_000_000,
        }
    }
}

impl<T: Real> EventStream<T> {
    /// Wrap events, enforcing the ordering contract.
    pub fn new(events: Vec<Event<T>>, horizon: T) -> Result<Self> {
        if !horizon.is_finite() || !(horizon > T::zero()) {
            return Err(HawkesError::Domain(format!(
                "horizon must be positive and finite, got {}",
                horizon.to_f64_lossy()
            )));
        }
        let mut prev = T::zero();
        for (i, e) in events.iter().enumerate() {
            if !e.time.is_finite() || e.time <= prev {
                return Err(HawkesError::Domain(format!(
                    "event {i} at t = {} breaks strict ordering in (0, horizon]",
                    e.time.to_f64_lossy()
                )));
            }
            prev = e.time;
        }
        if prev > horizon {
            return Err(HawkesError::Domain(format!(
                "last event at t = {} lies beyond the horizon {}",
                prev.to_f64_lossy(),
                horizon.to_f64_lossy()
            )));
        }
        Ok(EventStream { events, horizon })
    }

    pub fn events(&self) -> &[Event<T>] {
        &self.events
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// `N(t, A)`: events with time `<= t` and mark in `set`.
    pub fn count(&self, dist: &MarkDistribution<T>, set: &MarkSet<T>, t: T) -> usize {
        self.events
            .iter()
            .take_while(|e| e.time <= t)
            .filter(|e| set.contains(dist, e.mark))
            .count()
    }

    /// CSV with columns `time,mark`; discrete marks are written by label.
    pub fn write_csv<W: Write>(&self, dist: &MarkDistribution<T>, out: &mut W) -> Result<()> {
        writeln!(out, "time,mark")?;
        for e in &self.events {
            match (e.mark, dist.as_discrete()) {
                (Mark::Point(i), Some(d)) => writeln!(out, "{},{}", e.time, d.label(i))?,
                (Mark::Scalar(x), _) => writeln!(out, "{},{}", e.time, x)?,
                (Mark::Point(_), None) => {
                    return Err(HawkesError::Domain(
                        "point mark paired with a continuous distribution".into(),
                    ))
                }
            }
        }
        Ok(())
    }

    /// Binary codec, little-endian: `u64` event count, then per event one
    /// `f64` time and one `u32` mark index. Only defined for finite mark
    /// spaces (continuous marks have no stable index).
    pub fn to_binary(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::with_capacity(8 + self.events.len() * 12);
        buf.extend_from_slice(&(self.events.len() as u64).to_le_bytes());
        for e in &self.events {
            let idx = match e.mark {
                Mark::Point(i) => i,
                Mark::Scalar(_) => {
                    return Err(HawkesError::Domain(
                        "binary event encoding requires a finite mark space".into(),
                    ))
                }
            };
            buf.extend_from_slice(&e.time.to_f64_lossy().to_le_bytes());
            buf.extend_from_slice(&idx.to_le_bytes());
        }
        Ok(buf)
    }

    /// Inverse of [`Self::to_binary`]; the horizon travels out of band.
    pub fn from_binary(bytes: &[u8], horizon: T) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(HawkesError::Decode("missing event count header".into()));
        }
        let n = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
        let body = &bytes[8..];
        if body.len() != n * 12 {
            return Err(HawkesError::Decode(format!(
                "expected {} payload bytes for {n} events, found {}",
                n * 12,
                body.len()
            )));
        }
        let mut events = Vec::with_capacity(n);
        for rec in body.chunks_exact(12) {
            let time = f64::from_le_bytes(rec[..8].try_into().unwrap());
            let idx = u32::from_le_bytes(rec[8..].try_into().unwrap());
            events.push(Event {
                time: real(time),
                mark: Mark::Point(idx),
            });
        }
        EventStream::new(events, horizon)
    }
}

/// Simulate one path of the process on `(0, horizon]` with default limits.
pub fn simulate_path<T: Real>(
    spec: &KernelSpec<T>,
    horizon: T,
    stream: RngStream,
) -> Result<EventStream<T>> {
    simulate_path_with(spec, horizon, stream, &SimulationOptions::default())
}

/// Simulate one path with explicit limits.
pub fn simulate_path_with<T: Real>(
    spec: &KernelSpec<T>,
    horizon: T,
    stream: RngStream,
    options: &SimulationOptions,
) -> Result<EventStream<T>> {
    if !horizon.is_finite() || !(horizon > T::zero()) {
        return Err(HawkesError::Domain(format!(
            "simulation horizon must be positive and finite, got {}",
            horizon.to_f64_lossy()
        )));
    }
    if options.max_events == 0 {
        return Err(HawkesError::Domain("event cap must be positive".into()));
    }
    let times_rng = stream.substream(stream_purpose::TIMES).rng();
    let marks_rng = stream.substream(stream_purpose::MARKS).rng();
    match spec.excitation() {
        ExcitationFunction::Zero => thin_exponential(
            spec,
            T::zero(),
            T::one(),
            None,
            horizon,
            options,
            times_rng,
            marks_rng,
        ),
        ExcitationFunction::Exponential { alpha, beta, g } => thin_exponential(
            spec,
            *alpha,
            *beta,
            Some(g),
            horizon,
            options,
            times_rng,
            marks_rng,
        ),
        ExcitationFunction::General { profile, g } => {
            thin_general(spec, profile, g, horizon, options, times_rng, marks_rng)
        }
    }
}

/// Thinning for `phi(t) = alpha e^{-beta t}` (and the Poisson case
/// `alpha = 0`): the excited intensity is one decaying accumulator.
#[allow(clippy::too_many_arguments)]
fn thin_exponential<T: Real>(
    spec: &KernelSpec<T>,
    alpha: T,
    beta: T,
    g: Option<&MarkFunction<T>>,
    horizon: T,
    options: &SimulationOptions,
    mut times_rng: rand_chacha::ChaCha12Rng,
    mut marks_rng: rand_chacha::ChaCha12Rng,
) -> Result<EventStream<T>> {
    let m = spec.m();
    let dist = spec.marks();
    let mut events: Vec<Event<T>> = Vec::new();
    let mut t = T::zero();
    let mut excited = T::zero(); // sum_i alpha g(X_i) e^{-beta (t - T_i)}
    loop {
        let bound = m + excited; // valid on all of [t, inf): excitation only decays
        if !(bound > T::zero()) {
            break;
        }
        let wait = T::sample_exp1(&mut times_rng) / bound;
        if !(wait > T::zero()) {
            continue; // zero-width exponential draw; resample
        }
        let candidate = t + wait;
        if candidate > horizon {
            break;
        }
        let decay = (-beta * wait).exp();
        let lambda = m + excited * decay; // left limit at the candidate
        let u = T::sample_unit(&mut times_rng);
        t = candidate;
        excited *= decay;
        if u * bound < lambda {
            if events.len() >= options.max_events {
                return Err(HawkesError::EventCapExceeded {
                    cap: options.max_events,
                    time_reached: t.to_f64_lossy(),
                    horizon: horizon.to_f64_lossy(),
                });
            }
            let mark = dist.sample(&mut marks_rng);
            if let Some(g) = g {
                excited += alpha * g.eval(dist, mark);
            }
            events.push(Event { time: t, mark });
        }
    }
    EventStream::new(events, horizon)
}

/// Thinning for a general separable kernel: the bound at time `t` is
/// `m + sum_i envelope(t - T_i) g(X_i)`, which dominates the intensity on all
/// of `[t, inf)` because the envelope is non-increasing.
fn thin_general<T: Real>(
    spec: &KernelSpec<T>,
    profile: &TimeProfile<T>,
    g: &MarkFunction<T>,
    horizon: T,
    options: &SimulationOptions,
    mut times_rng: rand_chacha::ChaCha12Rng,
    mut marks_rng: rand_chacha::ChaCha12Rng,
) -> Result<EventStream<T>> {
    let m = spec.m();
    let dist = spec.marks();
    let mut events: Vec<Event<T>> = Vec::new();
    let mut weights: Vec<T> = Vec::new();
    let mut t = T::zero();
    loop {
        let mut bound = m;
        for (e, &w) in events.iter().zip(&weights) {
            bound += profile.envelope(t - e.time) * w;
        }
        if !(bound > T::zero()) {
            break;
        }
        let wait = T::sample_exp1(&mut times_rng) / bound;
        if !(wait > T::zero()) {
            continue;
        }
        let candidate = t + wait;
        if candidate > horizon {
            break;
        }
        let mut lambda = m;
        for (e, &w) in events.iter().zip(&weights) {
            lambda += profile.eval(candidate - e.time) * w;
        }
        let u = T::sample_unit(&mut times_rng);
        t = candidate;
        if u * bound < lambda {
            if events.len() >= options.max_events {
                return Err(HawkesError::EventCapExceeded {
                    cap: options.max_events,
                    time_reached: t.to_f64_lossy(),
                    horizon: horizon.to_f64_lossy(),
                });
            }
            let mark = dist.sample(&mut marks_rng);
            weights.push(g.eval(dist, mark));
            events.push(Event { time: t, mark });
        }
    }
    EventStream::new(events, horizon)
}

/// Conditional intensity `lambda(t) = m + sum_{T_i < t} phi(t - T_i) g(X_i)`
/// reconstructed from a realized path. Strictly-past events only: at an
/// event time the value is the left limit.
pub fn intensity_at<T: Real>(spec: &KernelSpec<T>, stream: &EventStream<T>, t: T) -> T {
    let mut lambda = spec.m();
    let excitation = spec.excitation();
    let Some(g) = excitation.mark_weight() else {
        return lambda;
    };
    let dist = spec.marks();
    for e in stream.events() {
        if e.time >= t {
            break;
        }
        lambda += excitation.profile_at(t - e.time) * g.eval(dist, e.mark);
    }
    lambda
}

/// Claim-size distributions attached to events.
#[derive(Clone, Debug, PartialEq)]
pub enum ClaimLaw<T> {
    /// Deterministic size; consumes no randomness.
    Constant(T),
    Exponential { mean: T },
    LogNormal { mu: T, sigma: T },
}

impl<T: Real> ClaimLaw<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ClaimLaw::Constant(c) => {
                if !c.is_finite() || c < T::zero() {
                    return Err(HawkesError::InvalidModel(format!(
                        "constant claim size must be non-negative, got {}",
                        c.to_f64_lossy()
                    )));
                }
            }
            ClaimLaw::Exponential { mean } => {
                if !mean.is_finite() || !(mean > T::zero()) {
                    return Err(HawkesError::InvalidModel(format!(
                        "exponential claim mean must be positive, got {}",
                        mean.to_f64_lossy()
                    )));
                }
            }
            ClaimLaw::LogNormal { mu, sigma } => {
                if !mu.is_finite() || !sigma.is_finite() || !(sigma > T::zero()) {
                    return Err(HawkesError::InvalidModel(format!(
                        "log-normal claim parameters must be finite with sigma > 0, got mu = {}, sigma = {}",
                        mu.to_f64_lossy(),
                        sigma.to_f64_lossy()
                    )));
                }
            }
        }
        Ok(())
    }

    /// `E[Z]`.
    pub fn mean(&self) -> T {
        match *self {
            ClaimLaw::Constant(c) => c,
            ClaimLaw::Exponential { mean } => mean,
            ClaimLaw::LogNormal { mu, sigma } => (mu + sigma * sigma * real(0.5)).exp(),
        }
    }

    /// Draw one claim size.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> T {
        match *self {
            ClaimLaw::Constant(c) => c,
            ClaimLaw::Exponential { mean } => mean * T::sample_exp1(rng),
            ClaimLaw::LogNormal { mu, sigma } => (mu + sigma * T::sample_std_normal(rng)).exp(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ClaimLaw::Constant(c) => format!("constant({c})"),
            ClaimLaw::Exponential { mean } => format!("exponential(mean={mean})"),
            ClaimLaw::LogNormal { mu, sigma } => format!("lognormal(mu={mu},sigma={sigma})"),
        }
    }
}

/// Claim law assignment: one law for every event, or one per mark point.
#[derive(Clone, Debug, PartialEq)]
pub enum ClaimLaws<T> {
    Global(ClaimLaw<T>),
    PerMark(Vec<ClaimLaw<T>>),
}

impl<T: Real> ClaimLaws<T> {
    pub fn validate_for(&self, dist: &MarkDistribution<T>) -> Result<()> {
        match self {
            ClaimLaws::Global(law) => law.validate(),
            ClaimLaws::PerMark(laws) => {
                let d = dist.as_discrete().ok_or_else(|| {
                    HawkesError::InvalidModel(
                        "per-mark claim laws require a finite mark space".into(),
                    )
                })?;
                if laws.len() != d.len() {
                    return Err(HawkesError::InvalidModel(format!(
                        "{} claim laws for {} mark points",
                        laws.len(),
                        d.len()
                    )));
                }
                laws.iter().try_for_each(|l| l.validate())
            }
        }
    }

    fn law_for(&self, mark: Mark<T>) -> &ClaimLaw<T> {
        match (self, mark) {
            (ClaimLaws::Global(law), _) => law,
            (ClaimLaws::PerMark(laws), Mark::Point(i)) => &laws[i as usize],
            (ClaimLaws::PerMark(_), Mark::Scalar(_)) => {
                panic!("per-mark claim laws used with continuous marks")
            }
        }
    }
}

/// Aggregate claims `C_A(t) = sum_{T_i <= t, X_i in A} Z_i`, with claim sizes
/// drawn i.i.d. from `law` on the dedicated claims substream of `stream`.
///
/// Draws are attached to matching events in order, so evaluating at a larger
/// `t` extends — never reshuffles — the claim sequence of a smaller `t`.
pub fn aggregate_claims<T: Real>(
    path: &EventStream<T>,
    dist: &MarkDistribution<T>,
    set: &MarkSet<T>,
    law: &ClaimLaw<T>,
    stream: RngStream,
    t: T,
) -> Result<T> {
    set.validate_for(dist)?;
    law.validate()?;
    let mut rng = stream.substream(stream_purpose::CLAIMS).rng();
    let mut total = T::zero();
    for e in path.events() {
        if e.time > t {
            break;
        }
        if set.contains(dist, e.mark) {
            total += law.sample(&mut rng);
        }
    }
    Ok(total)
}

/// Mark-functional sum `D^phi(t) = sum_{T_i <= t} phi(X_i)`.
pub fn weighted_mark_sum<T: Real>(
    path: &EventStream<T>,
    dist: &MarkDistribution<T>,
    phi: &MarkFunction<T>,
    t: T,
) -> Result<T> {
    phi.validate_for(dist)?;
    let mut total = T::zero();
    for e in path.events() {
        if e.time > t {
            break;
        }
        total += phi.eval(dist, e.mark);
    }
    Ok(total)
}

/// Risk surplus trajectory `r + c t - sum_{T_i <= t} Z_i` evaluated at the
/// requested times.
#[derive(Clone, Debug, PartialEq)]
pub struct RuinPath<T> {
    /// Query times, echoed in input order.
    pub times: Vec<T>,
    /// Surplus at each query time.
    pub surplus: Vec<T>,
    /// First event time at which the surplus went strictly negative, if any.
    pub ruin_time: Option<T>,
}

/// Evaluate the surplus process of initial reserve `r` and premium rate `c`,
/// with per-event claims drawn from `laws` on the claims substream.
pub fn ruin_path<T: Real>(
    path: &EventStream<T>,
    dist: &MarkDistribution<T>,
    r: T,
    c: T,
    laws: &ClaimLaws<T>,
    stream: RngStream,
    times: &[T],
) -> Result<RuinPath<T>> {
    if !r.is_finite() || r < T::zero() {
        return Err(HawkesError::Domain(format!(
            "initial reserve must be non-negative, got {}",
            r.to_f64_lossy()
        )));
    }
    if !c.is_finite() || c < T::zero() {
        return Err(HawkesError::Domain(format!(
            "premium rate must be non-negative, got {}",
            c.to_f64_lossy()
        )));
    }
    laws.validate_for(dist)?;
    for &t in times {
        if !t.is_finite() || t < T::zero() || t > path.horizon() {
            return Err(HawkesError::Domain(format!(
                "query time {} outside [0, horizon]",
                t.to_f64_lossy()
            )));
        }
    }
    let mut rng = stream.substream(stream_purpose::CLAIMS).rng();
    // Cumulative claims after each event, and the ruin time if the surplus
    // dips below zero at a claim instant (between claims it only grows).
    let mut cumulative = Vec::with_capacity(path.len());
    let mut acc = T::zero();
    let mut ruin_time = None;
    for e in path.events() {
        acc += laws.law_for(e.mark).sample(&mut rng);
        cumulative.push(acc);
        if ruin_time.is_none() && r + c * e.time - acc < T::zero() {
            ruin_time = Some(e.time);
        }
    }
    let surplus = times
        .iter()
        .map(|&t| {
            let paid = match path.events().partition_point(|e| e.time <= t) {
                0 => T::zero(),
                k => cumulative[k - 1],
            };
            r + c * t - paid
        })
        .collect();
    Ok(RuinPath {
        times: times.to_vec(),
        surplus,
        ruin_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ContinuousMarks, DiscreteMarks, MarkPoint};
    use approx::assert_abs_diff_eq;

    fn reference_kernel() -> KernelSpec<f64> {
        KernelSpec::new(
            1.0,
            ExcitationFunction::exponential(1.0, 2.0),
            MarkDistribution::two_point(("small", 1.0), ("large", 2.0)).unwrap(),
        )
        .unwrap()
    }

    fn poisson_kernel(m: f64) -> KernelSpec<f64> {
        KernelSpec::new(
            m,
            ExcitationFunction::Zero,
            MarkDistribution::two_point(("small", 1.0), ("large", 2.0)).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn same_stream_reproduces_the_same_path() {
        let spec = reference_kernel();
        let stream = RngStream::new(17).substream(3);
        let a = simulate_path(&spec, 50.0, stream).unwrap();
        let b = simulate_path(&spec, 50.0, stream).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty(), "50 time units at rate ~2 must produce events");
        let c = simulate_path(&spec, 50.0, RngStream::new(18).substream(3)).unwrap();
        assert_ne!(a, c, "different seeds should differ");
    }

    #[test]
    fn paths_respect_ordering_and_horizon() {
        let spec = reference_kernel();
        let path = simulate_path(&spec, 25.0, RngStream::new(2)).unwrap();
        let mut prev = 0.0;
        for e in path.events() {
            assert!(e.time > prev, "times must be strictly increasing");
            assert!(e.time <= 25.0, "event beyond the horizon");
            prev = e.time;
        }
    }

    #[test]
    fn intensity_uses_the_left_limit() {
        let spec = reference_kernel();
        let path = EventStream::new(
            vec![Event {
                time: 1.0,
                mark: Mark::Point(0),
            }],
            10.0,
        )
        .unwrap();
        // At the event time itself the event does not yet contribute.
        assert_abs_diff_eq!(intensity_at(&spec, &path, 1.0), 1.0);
        // Just after, it contributes alpha g e^{-beta dt} ~ alpha g.
        let just_after = intensity_at(&spec, &path, 1.0 + 1e-9);
        assert_abs_diff_eq!(just_after, 2.0, epsilon = 1e-6);
        // Far in the past contributes nothing; before the event, baseline.
        assert_abs_diff_eq!(intensity_at(&spec, &path, 0.5), 1.0);
        assert_abs_diff_eq!(intensity_at(&spec, &path, 9.0), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn poisson_interarrivals_pass_ks() {
        let spec = poisson_kernel(2.0);
        let path = simulate_path(&spec, 1500.0, RngStream::new(42)).unwrap();
        let times: Vec<f64> = path.events().iter().map(|e| e.time).collect();
        assert!(times.len() > 2000, "expected ~3000 events, got {}", times.len());
        let gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        let res = crate::stats::ks_test(&gaps, |x| 1.0 - (-2.0 * x).exp());
        assert!(res.p_value > 1e-3, "KS p = {}", res.p_value);
    }

    #[test]
    fn event_cap_aborts_supercritical_paths() {
        let spec = KernelSpec::new_allow_unstable(
            1.0,
            ExcitationFunction::exponential(3.0, 2.0), // branching ratio 1.5
            MarkDistribution::two_point(("a", 1.0), ("b", 2.0)).unwrap(),
        )
        .unwrap();
        let options = SimulationOptions { max_events: 500 };
        let err =
            simulate_path_with(&spec, 1e6, RngStream::new(7), &options).unwrap_err();
        assert!(matches!(err, HawkesError::EventCapExceeded { cap: 500, .. }), "{err}");
    }

    #[test]
    fn counts_are_additive_over_disjoint_mark_sets() {
        let spec = reference_kernel();
        let path = simulate_path(&spec, 100.0, RngStream::new(11)).unwrap();
        let dist = spec.marks();
        let small = MarkSet::Points(vec![0]);
        let large = MarkSet::Points(vec![1]);
        for t in [1.0, 10.0, 55.5, 100.0] {
            let total = path.count(dist, &MarkSet::All, t);
            let split = path.count(dist, &small, t) + path.count(dist, &large, t);
            assert_eq!(total, split, "additivity broken at t = {t}");
        }
        assert_eq!(path.count(dist, &MarkSet::All, 100.0), path.len());
    }

    #[test]
    fn binary_codec_round_trips() {
        let spec = reference_kernel();
        let path = simulate_path(&spec, 30.0, RngStream::new(5)).unwrap();
        let bytes = path.to_binary().unwrap();
        assert_eq!(bytes.len(), 8 + 12 * path.len());
        let back = EventStream::<f64>::from_binary(&bytes, 30.0).unwrap();
        assert_eq!(path, back);
        // Truncated payload must fail loudly.
        assert!(EventStream::<f64>::from_binary(&bytes[..bytes.len() - 1], 30.0).is_err());
        assert!(EventStream::<f64>::from_binary(&[1, 2, 3], 30.0).is_err());
    }

    #[test]
    fn binary_codec_rejects_continuous_marks() {
        let path = EventStream::new(
            vec![Event {
                time: 0.5,
                mark: Mark::Scalar(1.25f64),
            }],
            1.0,
        )
        .unwrap();
        assert!(path.to_binary().is_err());
    }

    #[test]
    fn csv_output_uses_labels() {
        let path = EventStream::new(
            vec![
                Event {
                    time: 0.5,
                    mark: Mark::Point(1),
                },
                Event {
                    time: 1.25,
                    mark: Mark::Point(0),
                },
            ],
            2.0,
        )
        .unwrap();
        let dist = MarkDistribution::two_point(("small", 1.0), ("large", 2.0)).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&dist, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "time,mark\n0.5,large\n1.25,small\n"
        );
    }

    #[test]
    fn stream_construction_rejects_disorder() {
        let mk = |t: f64| Event {
            time: t,
            mark: Mark::<f64>::Point(0),
        };
        assert!(EventStream::new(vec![mk(1.0), mk(1.0)], 2.0).is_err());
        assert!(EventStream::new(vec![mk(2.0), mk(1.0)], 3.0).is_err());
        assert!(EventStream::new(vec![mk(0.0)], 1.0).is_err());
        assert!(EventStream::new(vec![mk(1.5)], 1.0).is_err());
        assert!(EventStream::new(Vec::<Event<f64>>::new(), 0.0).is_err());
    }

    #[test]
    fn aggregate_claims_with_constant_law_counts_events() {
        let spec = reference_kernel();
        let path = simulate_path(&spec, 40.0, RngStream::new(9)).unwrap();
        let dist = spec.marks();
        let set = MarkSet::Points(vec![1]);
        let got = aggregate_claims(
            &path,
            dist,
            &set,
            &ClaimLaw::Constant(2.5),
            RngStream::new(9),
            40.0,
        )
        .unwrap();
        let want = 2.5 * path.count(dist, &set, 40.0) as f64;
        assert_abs_diff_eq!(got, want, epsilon = 1e-12);
    }

    #[test]
    fn aggregate_claims_is_consistent_across_time_cuts() {
        // Claims attach to events in order, so C(t1) + (claims in (t1, t2])
        // equals C(t2) when evaluated from the same stream.
        let spec = reference_kernel();
        let path = simulate_path(&spec, 60.0, RngStream::new(21)).unwrap();
        let dist = spec.marks();
        let law = ClaimLaw::Exponential { mean: 2.0 };
        let stream = RngStream::new(77);
        let at_30 =
            aggregate_claims(&path, dist, &MarkSet::All, &law, stream, 30.0).unwrap();
        let at_60 =
            aggregate_claims(&path, dist, &MarkSet::All, &law, stream, 60.0).unwrap();
        assert!(at_60 >= at_30, "claims must accumulate");
    }

    #[test]
    fn weighted_mark_sum_matches_manual_fold() {
        let spec = reference_kernel();
        let path = simulate_path(&spec, 50.0, RngStream::new(3)).unwrap();
        let dist = spec.marks();
        let got = weighted_mark_sum(&path, dist, &MarkFunction::Value, 50.0).unwrap();
        let want: f64 = path
            .events()
            .iter()
            .map(|e| dist.value_of(e.mark))
            .sum();
        assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        // Unit weight degenerates to the plain count.
        let ones = weighted_mark_sum(&path, dist, &MarkFunction::Constant(1.0), 50.0).unwrap();
        assert_abs_diff_eq!(ones, path.len() as f64, epsilon = 1e-12);
    }

    #[test]
    fn ruin_path_on_a_hand_built_stream() {
        let dist = MarkDistribution::two_point(("small", 1.0), ("large", 2.0)).unwrap();
        let path = EventStream::new(
            vec![
                Event {
                    time: 1.0,
                    mark: Mark::Point(0),
                },
                Event {
                    time: 3.0,
                    mark: Mark::Point(1),
                },
            ],
            5.0,
        )
        .unwrap();
        let laws = ClaimLaws::Global(ClaimLaw::Constant(2.0));
        let out = ruin_path(
            &path,
            &dist,
            0.5,
            1.0,
            &laws,
            RngStream::new(0),
            &[0.5, 1.0, 2.0, 5.0],
        )
        .unwrap();
        // surplus(t) = 0.5 + t - 2 N(t)
        assert_abs_diff_eq!(out.surplus[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.surplus[1], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(out.surplus[2], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(out.surplus[3], 1.5, epsilon = 1e-12);
        assert_eq!(out.ruin_time, Some(1.0));

        // A comfortable reserve never ruins on this path.
        let safe = ruin_path(
            &path,
            &dist,
            10.0,
            1.0,
            &laws,
            RngStream::new(0),
            &[5.0],
        )
        .unwrap();
        assert_eq!(safe.ruin_time, None);
        // Query times outside the horizon are refused.
        assert!(ruin_path(&path, &dist, 1.0, 1.0, &laws, RngStream::new(0), &[6.0]).is_err());
    }

    #[test]
    fn per_mark_claim_laws_validate_against_the_space() {
        let dist = MarkDistribution::two_point(("a", 1.0), ("b", 2.0)).unwrap();
        let ok = ClaimLaws::PerMark(vec![
            ClaimLaw::Constant(1.0),
            ClaimLaw::Exponential { mean: 0.5 },
        ]);
        assert!(ok.validate_for(&dist).is_ok());
        let wrong_len = ClaimLaws::PerMark(vec![ClaimLaw::Constant(1.0)]);
        assert!(wrong_len.validate_for(&dist).is_err());
        let continuous =
            MarkDistribution::Continuous(ContinuousMarks::Exponential { rate: 1.0 });
        assert!(ok.validate_for(&continuous).is_err());
        assert!(ClaimLaw::Exponential { mean: -1.0f64 }.validate().is_err());
        assert!(ClaimLaw::LogNormal { mu: 0.0f64, sigma: 0.0 }.validate().is_err());
    }

    #[test]
    fn general_profile_simulation_is_deterministic_and_ordered() {
        let profile = TimeProfile::power_law(0.5f64, 1.0, 3.0).unwrap();
        let spec = KernelSpec::new(
            1.0,
            ExcitationFunction::General {
                profile,
                g: MarkFunction::Value,
            },
            MarkDistribution::Discrete(
                DiscreteMarks::new(
                    vec![MarkPoint::new("x", 0.5), MarkPoint::new("y", 1.5)],
                    vec![0.5, 0.5],
                )
                .unwrap(),
            ),
        )
        .unwrap();
        let a = simulate_path(&spec, 20.0, RngStream::new(31)).unwrap();
        let b = simulate_path(&spec, 20.0, RngStream::new(31)).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty());
        let mut prev = 0.0;
        for e in a.events() {
            assert!(e.time > prev && e.time <= 20.0);
            prev = e.time;
        }
    }

    #[test]
    fn lognormal_claim_mean_matches_formula() {
        let law = ClaimLaw::LogNormal {
            mu: 0.2f64,
            sigma: 0.7,
        };
        let mut rng = RngStream::new(55).rng();
        let n = 200_000;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += law.sample(&mut rng);
        }
        let sample_mean = acc / n as f64;
        assert_abs_diff_eq!(sample_mean, law.mean(), epsilon = 0.02);
    }
}
