//! Long-run averages of path functionals: analytic limits of the rescaled
//! statistics `N(Tv)/T`, `C_A(Tv)/T`, `D^phi(Tv)/T`, `R(Tv)/T`, and
//! Monte-Carlo convergence reports against them.
//!
//! For a stable kernel (`||F||_{L1} < 1`) the limits only involve the
//! baseline rate, the mark law and `||R||_{L1} = ||F|| / (1 - ||F||)`:
//!
//! * counts: `N(Tv, A)/T -> v m Q(A) (||R|| + 1)` (in mean square),
//! * compound sums: `C_A(Tv)/T -> E[Z] v m Q(A) (||R|| + 1)` (in probability),
//! * mark averages: `D^phi(Tv)/T -> E[phi(X)] v m (||R|| + 1)`,
//! * risk surplus: `R(Tv)/T -> v (c - m (||R|| + 1) sum_k mu_k q_k)`.
//!
//! A verification run simulates replicate paths on a deterministic stream
//! tree, evaluates the rescaled statistic at each `T` of a growing grid, and
//! reports means, mean-square errors and exceedance frequencies together
//! with pass/fail flags at pinned tolerances.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HawkesError, Result};
use crate::model::{KernelSpec, MarkFunction, MarkSet};
use crate::rng::RngStream;
use crate::scalar::{real, Real};
use crate::simulate::{
    aggregate_claims, ruin_path, simulate_path_with, weighted_mark_sum, ClaimLaw, ClaimLaws,
    EventStream, SimulationOptions,
};
use crate::stats::{mean, standard_error};
use crate::volterra::resolvent;

/// `||R||_{L1} = b / (1 - b)` for branching ratio `b`; errors when `b >= 1`.
pub fn resolvent_norm<T: Real>(branching_ratio: T) -> Result<T> {
    if !branching_ratio.is_finite() || branching_ratio < T::zero() {
        return Err(HawkesError::Domain(format!(
            "branching ratio must be non-negative and finite, got {}",
            branching_ratio.to_f64_lossy()
        )));
    }
    if branching_ratio >= T::one() {
        return Err(HawkesError::Unstable {
            norm: branching_ratio.to_f64_lossy(),
        });
    }
    Ok(branching_ratio / (T::one() - branching_ratio))
}

/// Limit of `N(Tv, A)/T`: `v m Q(A) (||R|| + 1)`.
pub fn count_limit<T: Real>(m: T, q_a: T, norm_r: T, v: T) -> T {
    v * m * q_a * (norm_r + T::one())
}

/// Limit of `C_A(Tv)/T`: the count limit scaled by the mean claim size.
pub fn compound_limit<T: Real>(m: T, q_a: T, norm_r: T, mean_claim: T, v: T) -> T {
    count_limit(m, q_a, norm_r, v) * mean_claim
}

/// Limit of `D^phi(Tv)/T`: `E[phi(X)] v m (||R|| + 1)`.
pub fn mark_sum_limit<T: Real>(m: T, phi_q: T, norm_r: T, v: T) -> T {
    phi_q * v * m * (norm_r + T::one())
}

/// Long-run drift of the risk surplus per unit time:
/// `c - m (||R|| + 1) sum_k mu_k q_k`, with `(mu_k, q_k)` the per-mark mean
/// claim sizes and probabilities.
pub fn ruin_drift<T: Real>(c: T, m: T, norm_r: T, mark_claim_means: &[(T, T)]) -> T {
    let weighted: T = mark_claim_means.iter().map(|&(mu, q)| mu * q).sum();
    c - m * (norm_r + T::one()) * weighted
}

/// Outcome of the net-profit check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NetProfit<T> {
    /// Premium rate under test.
    pub premium_rate: T,
    /// Critical rate `E[Z] m / (1 - E[H(X)])`; profitability requires the
    /// premium to exceed it strictly.
    pub required_rate: T,
    pub holds: bool,
}

/// Net-profit condition `c > E[Z] m / (1 - E[H(X)])`.
///
/// `mean_total_excitation >= 1` means the process is unstable and no premium
/// rate is sufficient; that is an error, not a `false`.
pub fn net_profit_condition<T: Real>(
    c: T,
    m: T,
    mean_claim: T,
    mean_total_excitation: T,
) -> Result<NetProfit<T>> {
    if !c.is_finite() || c < T::zero() {
        return Err(HawkesError::Domain(format!(
            "premium rate must be non-negative, got {}",
            c.to_f64_lossy()
        )));
    }
    if !mean_claim.is_finite() || mean_claim < T::zero() {
        return Err(HawkesError::Domain(format!(
            "mean claim size must be non-negative, got {}",
            mean_claim.to_f64_lossy()
        )));
    }
    if !m.is_finite() || m < T::zero() {
        return Err(HawkesError::Domain(format!(
            "baseline rate must be non-negative, got {}",
            m.to_f64_lossy()
        )));
    }
    if mean_total_excitation >= T::one() {
        return Err(HawkesError::Unstable {
            norm: mean_total_excitation.to_f64_lossy(),
        });
    }
    let required_rate = mean_claim * m / (T::one() - mean_total_excitation);
    Ok(NetProfit {
        premium_rate: c,
        required_rate,
        holds: c > required_rate,
    })
}

/// Configuration of a verification run.
#[derive(Clone, Debug)]
pub struct LlnConfig<T> {
    /// Time dilation of the statistic (`N(Tv)/T`); `v >= 0`.
    pub v: T,
    /// Strictly increasing grid of `T` values.
    pub t_grid: Vec<T>,
    /// Independent replicates per grid point (at least 2).
    pub replications: usize,
    /// Pass band for the final mean, relative to the limit (absolute when
    /// the limit is zero).
    pub rel_tolerance: T,
    /// Exceedance threshold for probability-mode statistics; `None` selects
    /// `0.05 |limit|`, falling back to an absolute `0.05` at limit zero.
    pub epsilon: Option<T>,
    /// Pass gate on the exceedance frequency at the largest `T`.
    pub max_exceedance: T,
    /// Per-path event cap.
    pub max_events: usize,
    /// Grid step for resolvent-based diagnostics.
    pub dt: T,
    /// Series tolerance for resolvent-based diagnostics.
    pub series_tol: T,
    /// Grid horizon for diagnostics; kernels without a default (general
    /// profiles) require it.
    pub horizon_override: Option<T>,
}

impl<T: Real> LlnConfig<T> {
    pub fn new(v: T, t_grid: Vec<T>, replications: usize) -> Self {
        LlnConfig {
            v,
            t_grid,
            replications,
            rel_tolerance: real(0.05),
            epsilon: None,
            max_exceedance: real(0.10),
            max_events: SimulationOptions::default().max_events,
            dt: real(1e-3),
            series_tol: real(1e-8),
            horizon_override: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.v.is_finite() || self.v < T::zero() {
            return Err(HawkesError::Domain(format!(
                "time dilation v must be non-negative, got {}",
                self.v.to_f64_lossy()
            )));
        }
        if self.t_grid.is_empty() {
            return Err(HawkesError::Domain("empty T grid".into()));
        }
        let mut prev = T::zero();
        for &t in &self.t_grid {
            if !t.is_finite() || t <= prev {
                return Err(HawkesError::Domain(
                    "T grid must be strictly increasing and positive".into(),
                ));
            }
            prev = t;
        }
        if self.replications < 2 {
            return Err(HawkesError::Domain(format!(
                "at least 2 replications required, got {}",
                self.replications
            )));
        }
        if !self.rel_tolerance.is_finite() || !(self.rel_tolerance > T::zero()) {
            return Err(HawkesError::Domain(
                "relative tolerance must be positive".into(),
            ));
        }
        if let Some(eps) = self.epsilon {
            if !eps.is_finite() || !(eps > T::zero()) {
                return Err(HawkesError::Domain(
                    "exceedance threshold must be positive".into(),
                ));
            }
        }
        if !self.max_exceedance.is_finite()
            || self.max_exceedance < T::zero()
            || self.max_exceedance > T::one()
        {
            return Err(HawkesError::Domain(
                "max exceedance must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    fn resolved_epsilon(&self, limit: T) -> T {
        self.epsilon.unwrap_or_else(|| {
            let scaled = limit.abs() * real(0.05);
            if scaled > T::zero() {
                scaled
            } else {
                real(0.05)
            }
        })
    }
}

/// Convergence notion the report is judged against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceMode {
    /// `L^2` convergence: the MSE itself must decay along the grid.
    MeanSquare,
    /// Convergence in probability: the exceedance frequency is gated.
    Probability,
}

/// Monte-Carlo summary at one grid point `T`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow<T> {
    pub t: T,
    /// Mean of the rescaled statistic over the replicates.
    pub mean: T,
    /// Empirical mean-square error against the analytic limit.
    pub mse: T,
    /// Standard error of `mean`.
    pub se_mean: T,
    /// Standard error of `mse`.
    pub se_mse: T,
    /// Fraction of replicates with `|statistic - limit| > epsilon`.
    pub exceedance: T,
    pub replications: usize,
}

/// Full verification report for one statistic.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport<T> {
    /// Statistic name (`count`, `compound`, `mark_sum`, `ruin`).
    pub statistic: String,
    pub mode: ConvergenceMode,
    pub v: T,
    /// Analytic limit of the rescaled statistic.
    pub limit: T,
    /// Exceedance threshold in force.
    pub epsilon: T,
    pub rel_tolerance: T,
    pub max_exceedance: T,
    /// One row per grid point, in increasing `T`.
    pub rows: Vec<ReportRow<T>>,
    /// MSE non-increasing along the grid, with a two-standard-error slack.
    pub mse_non_increasing: bool,
    /// Mean at the largest `T` within the configured band around the limit.
    pub mean_within_tolerance: bool,
    /// Exceedance at the largest `T` within the configured bound.
    pub exceedance_within_bound: bool,
    /// Overall verdict: mean band plus MSE decay (mean-square mode) or mean
    /// band plus exceedance bound (probability mode).
    pub pass: bool,
    /// Root seed of the random stream tree.
    pub seed: u64,
    /// Digest of the model the run was generated from.
    pub model_digest: String,
    /// Integrability diagnostic `(1 + ||R||)^2 E[H^2]` where the statistic
    /// requires it (mark-average runs).
    pub integrability: Option<T>,
}

impl<T: Real + Serialize> ConvergenceReport<T> {
    /// Deterministic one-line JSON rendering.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }

    /// CSV rendering of the rows.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "t,mean,mse,se_mean,se_mse,exceedance,replications")?;
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.t, row.mean, row.mse, row.se_mean, row.se_mse, row.exceedance, row.replications
            )?;
        }
        Ok(())
    }
}

/// Verify the count limit `N(Tv, A)/T -> v m Q(A) (||R|| + 1)` in mean
/// square.
pub fn verify_count_lln<T: Real>(
    spec: &KernelSpec<T>,
    set: &MarkSet<T>,
    cfg: &LlnConfig<T>,
    stream: RngStream,
) -> Result<ConvergenceReport<T>> {
    let norm_r = resolvent_norm(spec.branching_ratio())?;
    let q_a = spec.q_of(set)?;
    let limit = count_limit(spec.m(), q_a, norm_r, cfg.v);
    let dist = spec.marks();
    run_verification(
        spec,
        cfg,
        stream,
        "count",
        ConvergenceMode::MeanSquare,
        limit,
        None,
        &|path, _, tv| Ok(real(path.count(dist, set, tv) as f64)),
        &|_| T::zero(),
    )
}

/// Verify the compound limit `C_A(Tv)/T -> E[Z] v m Q(A) (||R|| + 1)` in
/// probability.
pub fn verify_compound_lln<T: Real>(
    spec: &KernelSpec<T>,
    set: &MarkSet<T>,
    law: &ClaimLaw<T>,
    cfg: &LlnConfig<T>,
    stream: RngStream,
) -> Result<ConvergenceReport<T>> {
    law.validate()?;
    let norm_r = resolvent_norm(spec.branching_ratio())?;
    let q_a = spec.q_of(set)?;
    let limit = compound_limit(spec.m(), q_a, norm_r, law.mean(), cfg.v);
    let dist = spec.marks();
    run_verification(
        spec,
        cfg,
        stream,
        "compound",
        ConvergenceMode::Probability,
        limit,
        None,
        &|path, rep_stream, tv| aggregate_claims(path, dist, set, law, rep_stream, tv),
        &|_| T::zero(),
    )
}

/// Verify the mark-average limit `D^phi(Tv)/T -> E[phi(X)] v m (||R|| + 1)`
/// in probability; also evaluates the integrability diagnostic on the
/// resolvent grid.
pub fn verify_mark_sum_lln<T: Real>(
    spec: &KernelSpec<T>,
    phi: &MarkFunction<T>,
    cfg: &LlnConfig<T>,
    stream: RngStream,
) -> Result<ConvergenceReport<T>> {
    let norm_r = resolvent_norm(spec.branching_ratio())?;
    let phi_q = spec.phi_q(phi)?;
    let limit = mark_sum_limit(spec.m(), phi_q, norm_r, cfg.v);
    let integrability = Some(grid_integrability(spec, cfg)?);
    let dist = spec.marks();
    run_verification(
        spec,
        cfg,
        stream,
        "mark_sum",
        ConvergenceMode::Probability,
        limit,
        integrability,
        &|path, _, tv| weighted_mark_sum(path, dist, phi, tv),
        &|_| T::zero(),
    )
}

/// Verify the risk-surplus limit `R(Tv)/T -> v (c - m (||R|| + 1) E[Z Q])`
/// in probability.
pub fn verify_ruin_lln<T: Real>(
    spec: &KernelSpec<T>,
    reserve: T,
    premium_rate: T,
    laws: &ClaimLaws<T>,
    cfg: &LlnConfig<T>,
    stream: RngStream,
) -> Result<ConvergenceReport<T>> {
    laws.validate_for(spec.marks())?;
    let norm_r = resolvent_norm(spec.branching_ratio())?;
    let pairs = per_mark_claim_means(spec, laws)?;
    let limit = cfg.v * ruin_drift(premium_rate, spec.m(), norm_r, &pairs);
    let dist = spec.marks();
    run_verification(
        spec,
        cfg,
        stream,
        "ruin",
        ConvergenceMode::Probability,
        limit,
        None,
        &|path, rep_stream, tv| {
            let out = ruin_path(path, dist, reserve, premium_rate, laws, rep_stream, &[tv])?;
            Ok(out.surplus[0])
        },
        &|t| reserve / t,
    )
}

/// `(mu_k, q_k)` pairs feeding the drift formula.
fn per_mark_claim_means<T: Real>(
    spec: &KernelSpec<T>,
    laws: &ClaimLaws<T>,
) -> Result<Vec<(T, T)>> {
    match laws {
        ClaimLaws::Global(law) => Ok(vec![(law.mean(), T::one())]),
        ClaimLaws::PerMark(per) => {
            let d = spec.marks().as_discrete().ok_or_else(|| {
                HawkesError::InvalidModel("per-mark claim laws require a finite mark space".into())
            })?;
            Ok(per
                .iter()
                .zip(d.probs())
                .map(|(law, &q)| (law.mean(), q))
                .collect())
        }
    }
}

fn grid_integrability<T: Real>(spec: &KernelSpec<T>, cfg: &LlnConfig<T>) -> Result<T> {
    let horizon = cfg
        .horizon_override
        .or_else(|| spec.default_horizon())
        .ok_or_else(|| {
            HawkesError::Domain(
                "kernel family has no default grid horizon; set one explicitly".into(),
            )
        })?;
    let f = spec.marginal_excitation_grid(cfg.dt, horizon)?;
    let res = resolvent(&f, cfg.series_tol)?;
    Ok(res.integrability_value(spec))
}

/// Shared engine: simulate replicates over the `T` grid, reduce to rows,
/// apply the pass rules.
#[allow(clippy::too_many_arguments)]
fn run_verification<T: Real>(
    spec: &KernelSpec<T>,
    cfg: &LlnConfig<T>,
    stream: RngStream,
    statistic: &str,
    mode: ConvergenceMode,
    limit: T,
    integrability: Option<T>,
    stat: &(dyn Fn(&EventStream<T>, RngStream, T) -> Result<T> + Sync),
    stat_at_zero_dilation: &(dyn Fn(T) -> T + Sync),
) -> Result<ConvergenceReport<T>> {
    cfg.validate()?;
    let epsilon = cfg.resolved_epsilon(limit);
    let options = SimulationOptions {
        max_events: cfg.max_events,
    };
    let mut rows = Vec::with_capacity(cfg.t_grid.len());
    for (t_index, &t) in cfg.t_grid.iter().enumerate() {
        let stats: Vec<T> = if cfg.v == T::zero() {
            // Nothing happens in zero time; the statistic is deterministic.
            vec![stat_at_zero_dilation(t); cfg.replications]
        } else {
            let horizon = t * cfg.v;
            let t_stream = stream.substream(t_index as u64);
            (0..cfg.replications)
                .into_par_iter()
                .map(|rep| {
                    let rep_stream = t_stream.substream(rep as u64);
                    let path = simulate_path_with(spec, horizon, rep_stream, &options)?;
                    Ok(stat(&path, rep_stream, horizon)? / t)
                })
                .collect::<Result<Vec<T>>>()?
        };
        let row_mean = mean(&stats);
        let se_mean = standard_error(&stats);
        let sq_errors: Vec<T> = stats
            .iter()
            .map(|&s| (s - limit) * (s - limit))
            .collect();
        let mse = mean(&sq_errors);
        let se_mse = standard_error(&sq_errors);
        let exceeding = stats
            .iter()
            .filter(|&&s| (s - limit).abs() > epsilon)
            .count();
        rows.push(ReportRow {
            t,
            mean: row_mean,
            mse,
            se_mean,
            se_mse,
            exceedance: real::<T>(exceeding as f64) / real(cfg.replications as f64),
            replications: cfg.replications,
        });
    }

    let mse_non_increasing = rows.windows(2).all(|w| {
        let slack = real::<T>(2.0)
            * (w[0].se_mse * w[0].se_mse + w[1].se_mse * w[1].se_mse).sqrt();
        w[1].mse <= w[0].mse + slack
    });
    let last = rows.last().expect("grid validated non-empty");
    let band = if limit == T::zero() {
        cfg.rel_tolerance
    } else {
        cfg.rel_tolerance * limit.abs()
    };
    let mean_within_tolerance = (last.mean - limit).abs() <= band;
    let exceedance_within_bound = last.exceedance <= cfg.max_exceedance;
    let pass = match mode {
        ConvergenceMode::MeanSquare => mean_within_tolerance && mse_non_increasing,
        ConvergenceMode::Probability => mean_within_tolerance && exceedance_within_bound,
    };
    Ok(ConvergenceReport {
        statistic: statistic.to_string(),
        mode,
        v: cfg.v,
        limit,
        epsilon,
        rel_tolerance: cfg.rel_tolerance,
        max_exceedance: cfg.max_exceedance,
        rows,
        mse_non_increasing,
        mean_within_tolerance,
        exceedance_within_bound,
        pass,
        seed: stream.seed(),
        model_digest: spec.digest(),
        integrability,
    })
}
