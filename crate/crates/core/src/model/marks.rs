//! Mark spaces: the i.i.d. mark distribution attached to event times, weight
//! functions of the mark, and the measurable sets counts are restricted to.

use crate::error::{HawkesError, Result};
use crate::quad::GaussLegendre;
use crate::scalar::{real, Real};
use rand::Rng;

/// Quadrature resolution for expectations against continuous mark densities.
pub const DEFAULT_QUAD_NODES: usize = 1024;

/// Effective support cut for unbounded densities: expectations integrate
/// between the cut and `1 - cut` quantiles, leaving tail mass far below
/// the accuracy of the quadrature itself.
const QUANTILE_CUT: f64 = 1e-12;

/// A single realized mark: either an index into a finite mark space or a
/// value drawn from a continuous distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mark<T> {
    Point(u32),
    Scalar(T),
}

/// One atom of a finite mark space.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkPoint<T> {
    pub label: String,
    pub value: T,
}

impl<T> MarkPoint<T> {
    pub fn new(label: impl Into<String>, value: T) -> Self {
        MarkPoint {
            label: label.into(),
            value,
        }
    }
}

/// Finite mark space `{x_1, ..., x_k}` with probabilities `q_1, ..., q_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMarks<T> {
    points: Vec<MarkPoint<T>>,
    probs: Vec<T>,
    cumulative: Vec<T>,
}

impl<T: Real> DiscreteMarks<T> {
    /// Validates that labels are distinct, values finite and probabilities
    /// non-negative with total mass 1 (within `1e-12`, scaled up for `f32`).
    pub fn new(points: Vec<MarkPoint<T>>, probs: Vec<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(HawkesError::InvalidModel(
                "discrete mark space needs at least one point".into(),
            ));
        }
        if points.len() != probs.len() {
            return Err(HawkesError::InvalidModel(format!(
                "{} mark points but {} probabilities",
                points.len(),
                probs.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if p.label.is_empty() {
                return Err(HawkesError::InvalidModel(format!(
                    "mark point {i} has an empty label"
                )));
            }
            if !p.value.is_finite() {
                return Err(HawkesError::InvalidModel(format!(
                    "mark point '{}' has a non-finite value",
                    p.label
                )));
            }
            if points[..i].iter().any(|q| q.label == p.label) {
                return Err(HawkesError::InvalidModel(format!(
                    "duplicate mark label '{}'",
                    p.label
                )));
            }
        }
        let mut total = T::zero();
        for (i, &q) in probs.iter().enumerate() {
            if !q.is_finite() || q < T::zero() || q > T::one() {
                return Err(HawkesError::InvalidModel(format!(
                    "probability of mark point {i} must lie in [0, 1], got {}",
                    q.to_f64_lossy()
                )));
            }
            total += q;
        }
        let tol = real::<T>(1e-12).max(T::epsilon() * real(16.0 * points.len() as f64));
        if (total - T::one()).abs() > tol {
            return Err(HawkesError::InvalidModel(format!(
                "mark probabilities sum to {}, not 1",
                total.to_f64_lossy()
            )));
        }
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = T::zero();
        for &q in &probs {
            acc += q;
            cumulative.push(acc);
        }
        Ok(DiscreteMarks {
            points,
            probs,
            cumulative,
        })
    }

    /// Uniform distribution over the given labelled values.
    pub fn uniform_over(points: Vec<MarkPoint<T>>) -> Result<Self> {
        let k = points.len().max(1);
        let p = T::one() / real(k as f64);
        let mut probs = vec![p; points.len()];
        // Absorb the rounding residue into the last atom so the mass check
        // is exact regardless of k.
        if let Some(last) = probs.last_mut() {
            *last = T::one() - p * real((points.len() - 1) as f64);
        }
        DiscreteMarks::new(points, probs)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[MarkPoint<T>] {
        &self.points
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn value(&self, index: u32) -> T {
        self.points[index as usize].value
    }

    pub fn label(&self, index: u32) -> &str {
        &self.points[index as usize].label
    }

    pub fn index_of(&self, label: &str) -> Option<u32> {
        self.points
            .iter()
            .position(|p| p.label == label)
            .map(|i| i as u32)
    }

    /// Inverse-CDF draw; consumes exactly one uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u = T::sample_unit(rng);
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.points.len() - 1) as u32
    }

    /// `sum_i q_i f(i, x_i)`.
    pub fn expect(&self, mut f: impl FnMut(u32, T) -> T) -> T {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &q)| q * f(i as u32, self.points[i].value))
            .sum()
    }
}

/// Continuous mark distributions with closed-form CDF and quantile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ContinuousMarks<T> {
    Uniform { lo: T, hi: T },
    Exponential { rate: T },
}

impl<T: Real> ContinuousMarks<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ContinuousMarks::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
                    return Err(HawkesError::InvalidModel(format!(
                        "uniform mark bounds must satisfy lo < hi, got [{}, {}]",
                        lo.to_f64_lossy(),
                        hi.to_f64_lossy()
                    )));
                }
            }
            ContinuousMarks::Exponential { rate } => {
                if !rate.is_finite() || !(rate > T::zero()) {
                    return Err(HawkesError::InvalidModel(format!(
                        "exponential mark rate must be positive, got {}",
                        rate.to_f64_lossy()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn cdf(&self, x: T) -> T {
        match *self {
            ContinuousMarks::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(T::zero(), T::one()),
            ContinuousMarks::Exponential { rate } => {
                if x <= T::zero() {
                    T::zero()
                } else {
                    T::one() - (-rate * x).exp()
                }
            }
        }
    }

    pub fn pdf(&self, x: T) -> T {
        match *self {
            ContinuousMarks::Uniform { lo, hi } => {
                if x >= lo && x <= hi {
                    T::one() / (hi - lo)
                } else {
                    T::zero()
                }
            }
            ContinuousMarks::Exponential { rate } => {
                if x < T::zero() {
                    T::zero()
                } else {
                    rate * (-rate * x).exp()
                }
            }
        }
    }

    pub fn quantile(&self, p: T) -> T {
        match *self {
            ContinuousMarks::Uniform { lo, hi } => lo + (hi - lo) * p,
            ContinuousMarks::Exponential { rate } => -(T::one() - p).ln() / rate,
        }
    }

    /// Supremum of the support (`+inf` for the exponential).
    pub fn support_sup(&self) -> T {
        match *self {
            ContinuousMarks::Uniform { hi, .. } => hi,
            ContinuousMarks::Exponential { .. } => T::infinity(),
        }
    }

    /// Inverse-CDF draw; consumes exactly one uniform from `(0, 1)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.quantile(T::sample_open01(rng))
    }

    /// `E[f(X)]` by Gauss–Legendre quadrature on the effective support.
    pub fn expect(&self, nodes: usize, mut f: impl FnMut(T) -> T) -> T {
        let rule = GaussLegendre::new(nodes);
        let (lo, hi) = match *self {
            ContinuousMarks::Uniform { lo, hi } => (lo, hi),
            ContinuousMarks::Exponential { .. } => (
                self.quantile(real(QUANTILE_CUT)),
                self.quantile(T::one() - real(QUANTILE_CUT)),
            ),
        };
        rule.integrate(lo, hi, |x| self.pdf(x) * f(x))
    }
}

/// The mark distribution `Q`: marks are drawn i.i.d. from it, independently
/// of the event times.
#[derive(Clone, Debug, PartialEq)]
pub enum MarkDistribution<T> {
    Discrete(DiscreteMarks<T>),
    Continuous(ContinuousMarks<T>),
}

impl<T: Real> MarkDistribution<T> {
    /// Shorthand for a uniform two-point space used throughout the tests.
    pub fn two_point(a: (impl Into<String>, T), b: (impl Into<String>, T)) -> Result<Self> {
        let points = vec![MarkPoint::new(a.0, a.1), MarkPoint::new(b.0, b.1)];
        Ok(MarkDistribution::Discrete(DiscreteMarks::uniform_over(
            points,
        )?))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MarkDistribution::Discrete(_) => Ok(()), // validated at construction
            MarkDistribution::Continuous(c) => c.validate(),
        }
    }

    pub fn as_discrete(&self) -> Option<&DiscreteMarks<T>> {
        match self {
            MarkDistribution::Discrete(d) => Some(d),
            MarkDistribution::Continuous(_) => None,
        }
    }

    /// Draw one mark; consumes exactly one uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Mark<T> {
        match self {
            MarkDistribution::Discrete(d) => Mark::Point(d.sample(rng)),
            MarkDistribution::Continuous(c) => Mark::Scalar(c.sample(rng)),
        }
    }

    /// Numeric value carried by a mark.
    ///
    /// Panics if a point index is out of range or a scalar mark is paired
    /// with a discrete space — both indicate a mark produced by a different
    /// distribution, which is a programming error.
    pub fn value_of(&self, mark: Mark<T>) -> T {
        match (self, mark) {
            (MarkDistribution::Discrete(d), Mark::Point(i)) => d.value(i),
            (MarkDistribution::Continuous(_), Mark::Scalar(x)) => x,
            _ => panic!("mark does not belong to this distribution"),
        }
    }

    /// `E[w(X)]` with the default quadrature resolution.
    pub fn expect_weight(&self, w: &MarkFunction<T>) -> T {
        self.expect_weight_with_nodes(w, DEFAULT_QUAD_NODES)
    }

    /// `E[w(X)]`; `nodes` controls the quadrature rule for continuous laws
    /// (discrete expectations are exact sums).
    pub fn expect_weight_with_nodes(&self, w: &MarkFunction<T>, nodes: usize) -> T {
        match self {
            MarkDistribution::Discrete(d) => d.expect(|i, x| w.eval_point(i, x)),
            MarkDistribution::Continuous(c) => c.expect(nodes, |x| w.eval_scalar(x)),
        }
    }

    /// `Q(A)` for a mark set.
    pub fn prob_of(&self, set: &MarkSet<T>) -> Result<T> {
        set.validate_for(self)?;
        Ok(match (self, set) {
            (_, MarkSet::All) => T::one(),
            (MarkDistribution::Discrete(d), MarkSet::Points(idx)) => {
                idx.iter().map(|&i| d.probs()[i as usize]).sum()
            }
            (MarkDistribution::Discrete(d), MarkSet::Interval { lo, hi }) => d.expect(|_, x| {
                if x >= *lo && x <= *hi {
                    T::one()
                } else {
                    T::zero()
                }
            }),
            (MarkDistribution::Continuous(c), MarkSet::Interval { lo, hi }) => {
                c.cdf(*hi) - c.cdf(*lo)
            }
            (MarkDistribution::Continuous(_), MarkSet::Points(_)) => unreachable!(),
        })
    }

    /// Stable textual form, used for digests and reports.
    pub fn describe(&self) -> String {
        match self {
            MarkDistribution::Discrete(d) => {
                let atoms: Vec<String> = d
                    .points()
                    .iter()
                    .zip(d.probs())
                    .map(|(p, q)| format!("{}:{}@{}", p.label, p.value, q))
                    .collect();
                format!("discrete{{{}}}", atoms.join(","))
            }
            MarkDistribution::Continuous(ContinuousMarks::Uniform { lo, hi }) => {
                format!("uniform[{lo},{hi}]")
            }
            MarkDistribution::Continuous(ContinuousMarks::Exponential { rate }) => {
                format!("exponential({rate})")
            }
        }
    }
}

/// A deterministic weight of the mark, `w(x)`; used both as the mark factor
/// of separable kernels and as the functional in mark-averaged statistics.
#[derive(Clone, Debug, PartialEq)]
pub enum MarkFunction<T> {
    /// `w(x) = c`.
    Constant(T),
    /// `w(x) = x`.
    Value,
    /// `w(x) = x^2`.
    Square,
    /// Per-point weights for a finite mark space, indexed like its points.
    Table(Vec<T>),
}

impl<T: Real> MarkFunction<T> {
    pub fn eval(&self, dist: &MarkDistribution<T>, mark: Mark<T>) -> T {
        match mark {
            Mark::Point(i) => self.eval_point(i, dist.value_of(mark)),
            Mark::Scalar(x) => self.eval_scalar(x),
        }
    }

    fn eval_point(&self, index: u32, value: T) -> T {
        match self {
            MarkFunction::Constant(c) => *c,
            MarkFunction::Value => value,
            MarkFunction::Square => value * value,
            MarkFunction::Table(t) => t[index as usize],
        }
    }

    fn eval_scalar(&self, x: T) -> T {
        match self {
            MarkFunction::Constant(c) => *c,
            MarkFunction::Value => x,
            MarkFunction::Square => x * x,
            MarkFunction::Table(_) => {
                panic!("table weights are only defined on a finite mark space")
            }
        }
    }

    /// Structural compatibility with a mark distribution.
    pub fn validate_for(&self, dist: &MarkDistribution<T>) -> Result<()> {
        match (self, dist) {
            (MarkFunction::Constant(c), _) => {
                if !c.is_finite() {
                    return Err(HawkesError::InvalidModel(
                        "constant mark weight must be finite".into(),
                    ));
                }
            }
            (MarkFunction::Table(t), MarkDistribution::Discrete(d)) => {
                if t.len() != d.len() {
                    return Err(HawkesError::InvalidModel(format!(
                        "weight table has {} entries for {} mark points",
                        t.len(),
                        d.len()
                    )));
                }
                if t.iter().any(|v| !v.is_finite()) {
                    return Err(HawkesError::InvalidModel(
                        "weight table contains a non-finite entry".into(),
                    ));
                }
            }
            (MarkFunction::Table(_), MarkDistribution::Continuous(_)) => {
                return Err(HawkesError::InvalidModel(
                    "table weights require a finite mark space".into(),
                ));
            }
            (MarkFunction::Value | MarkFunction::Square, _) => {}
        }
        Ok(())
    }

    /// Supremum of `w` over the support of `dist` (may be `+inf`).
    pub fn sup(&self, dist: &MarkDistribution<T>) -> T {
        let sup_abs_value = match dist {
            MarkDistribution::Discrete(d) => d
                .points()
                .iter()
                .fold(T::zero(), |a, p| a.max(p.value.abs())),
            MarkDistribution::Continuous(c) => c.support_sup().abs(),
        };
        match self {
            MarkFunction::Constant(c) => c.abs(),
            MarkFunction::Value => sup_abs_value,
            MarkFunction::Square => sup_abs_value * sup_abs_value,
            MarkFunction::Table(t) => t.iter().fold(T::zero(), |a, &v| a.max(v.abs())),
        }
    }

    /// True if `w >= 0` on the support of `dist`.
    pub fn is_non_negative_on(&self, dist: &MarkDistribution<T>) -> bool {
        match self {
            MarkFunction::Constant(c) => *c >= T::zero(),
            MarkFunction::Square => true,
            MarkFunction::Table(t) => t.iter().all(|&v| v >= T::zero()),
            MarkFunction::Value => match dist {
                MarkDistribution::Discrete(d) => d.points().iter().all(|p| p.value >= T::zero()),
                MarkDistribution::Continuous(ContinuousMarks::Uniform { lo, .. }) => {
                    *lo >= T::zero()
                }
                MarkDistribution::Continuous(ContinuousMarks::Exponential { .. }) => true,
            },
        }
    }

    pub fn describe(&self) -> String {
        match self {
            MarkFunction::Constant(c) => format!("const({c})"),
            MarkFunction::Value => "value".into(),
            MarkFunction::Square => "square".into(),
            MarkFunction::Table(t) => {
                let entries: Vec<String> = t.iter().map(|v| format!("{v}")).collect();
                format!("table[{}]", entries.join(","))
            }
        }
    }
}

/// A measurable set of marks, for restricted counts `N(t, A)`.
#[derive(Clone, Debug, PartialEq)]
pub enum MarkSet<T> {
    /// The whole mark space.
    All,
    /// A subset of a finite mark space, by point index.
    Points(Vec<u32>),
    /// The closed interval `[lo, hi]` of mark values.
    Interval { lo: T, hi: T },
}

impl<T: Real> MarkSet<T> {
    /// Resolve labels into a `Points` set against a discrete space.
    pub fn from_labels(dist: &MarkDistribution<T>, labels: &[String]) -> Result<Self> {
        let d = dist.as_discrete().ok_or_else(|| {
            HawkesError::InvalidModel("label sets require a finite mark space".into())
        })?;
        let mut indices = Vec::with_capacity(labels.len());
        for label in labels {
            let idx = d.index_of(label).ok_or_else(|| {
                HawkesError::InvalidModel(format!("unknown mark label '{label}'"))
            })?;
            if indices.contains(&idx) {
                return Err(HawkesError::InvalidModel(format!(
                    "mark label '{label}' listed twice"
                )));
            }
            indices.push(idx);
        }
        Ok(MarkSet::Points(indices))
    }

    pub fn validate_for(&self, dist: &MarkDistribution<T>) -> Result<()> {
        match (self, dist) {
            (MarkSet::All, _) => Ok(()),
            (MarkSet::Points(idx), MarkDistribution::Discrete(d)) => {
                for &i in idx {
                    if i as usize >= d.len() {
                        return Err(HawkesError::InvalidModel(format!(
                            "mark index {i} out of range for {} points",
                            d.len()
                        )));
                    }
                }
                Ok(())
            }
            (MarkSet::Points(_), MarkDistribution::Continuous(_)) => Err(
                HawkesError::InvalidModel("point sets require a finite mark space".into()),
            ),
            (MarkSet::Interval { lo, hi }, _) => {
                if !lo.is_finite() || !hi.is_finite() || lo > hi {
                    return Err(HawkesError::InvalidModel(format!(
                        "mark interval [{}, {}] is empty or unbounded",
                        lo.to_f64_lossy(),
                        hi.to_f64_lossy()
                    )));
                }
                Ok(())
            }
        }
    }

    /// Membership test for a realized mark.
    pub fn contains(&self, dist: &MarkDistribution<T>, mark: Mark<T>) -> bool {
        match self {
            MarkSet::All => true,
            MarkSet::Points(idx) => match mark {
                Mark::Point(i) => idx.contains(&i),
                Mark::Scalar(_) => false,
            },
            MarkSet::Interval { lo, hi } => {
                let x = dist.value_of(mark);
                x >= *lo && x <= *hi
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            MarkSet::All => "all".into(),
            MarkSet::Points(idx) => {
                let ids: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                format!("points[{}]", ids.join(","))
            }
            MarkSet::Interval { lo, hi } => format!("interval[{lo},{hi}]"),
        }
    }
}
