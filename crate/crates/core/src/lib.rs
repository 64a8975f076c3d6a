//! Linear marked Hawkes processes with i.i.d. marks.
//!
//! The crate covers the full pipeline from model description to statistical
//! verification:
//!
//! * [`model`] — mark distributions, separable excitation kernels and the
//!   stability / integrability diagnostics derived from them;
//! * [`volterra`] — grid calculus for the resolvent equation `R = F + F * R`
//!   and the first-moment formulas built on top of it;
//! * [`simulate`] — exact thinning simulation of event streams together with
//!   compound functionals (aggregate claims, mark averages, risk paths);
//! * [`lln`] — long-run averages: analytic limits of `N(Tv)/T`-type
//!   statistics and Monte-Carlo convergence reports against them;
//! * [`rng`] / [`stats`] — deterministic splittable random streams and the
//!   small statistics toolbox used by the verification code.
//!
//! All numeric code is generic over the scalar type through [`Real`], which
//! is implemented for `f32` and `f64`; the `*64` aliases at the crate root
//! pick the double-precision instantiation used by the command line tools.

pub mod error;
pub mod grid;
pub mod lln;
pub mod model;
pub mod quad;
pub mod rng;
pub mod scalar;
pub mod simulate;
pub mod stats;
pub mod volterra;

pub use error::{HawkesError, Result};
pub use scalar::{real, Real};

pub use grid::GridFunction;
pub use lln::{ConvergenceMode, ConvergenceReport, LlnConfig, ReportRow};
pub use model::{
    ContinuousMarks, DiscreteMarks, ExcitationFunction, KernelSpec, Mark, MarkDistribution,
    MarkFunction, MarkPoint, MarkSet, TimeProfile,
};
pub use rng::RngStream;
pub use simulate::{ClaimLaw, ClaimLaws, Event, EventStream, RuinPath, SimulationOptions};
pub use volterra::ResolventResult;

/// Double-precision instantiations of the main types.
pub type GridFunction64 = GridFunction<f64>;
pub type KernelSpec64 = KernelSpec<f64>;
pub type MarkDistribution64 = MarkDistribution<f64>;
pub type ExcitationFunction64 = ExcitationFunction<f64>;
pub type MarkFunction64 = MarkFunction<f64>;
pub type MarkSet64 = MarkSet<f64>;
pub type ResolventResult64 = ResolventResult<f64>;
pub type EventStream64 = EventStream<f64>;
pub type ClaimLaw64 = ClaimLaw<f64>;
pub type ClaimLaws64 = ClaimLaws<f64>;
pub type LlnConfig64 = LlnConfig<f64>;
pub type ConvergenceReport64 = ConvergenceReport<f64>;

/// Single-precision instantiations, for workloads where memory bandwidth
/// matters more than the last six digits.
pub type GridFunction32 = GridFunction<f32>;
pub type KernelSpec32 = KernelSpec<f32>;
pub type MarkDistribution32 = MarkDistribution<f32>;
pub type ExcitationFunction32 = ExcitationFunction<f32>;
pub type EventStream32 = EventStream<f32>;
