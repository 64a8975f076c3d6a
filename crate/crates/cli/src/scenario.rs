//! Scenario files: a strict, versioned JSON schema describing the kernel,
//! the experiment, numerics, randomness and output layout of one batch run.
//!
//! Parsing distinguishes three failure classes so callers can report them
//! precisely: missing file, malformed JSON, and schema violations. Semantic
//! validation collects *all* problems, not just the first.

use std::fmt;
use std::path::Path;

use marked_hawkes::model::{
    DiscreteMarks, ExcitationFunction, KernelSpec, MarkDistribution, MarkFunction, MarkPoint,
    MarkSet, TimeProfile,
};
use marked_hawkes::{ClaimLaw64, ClaimLaws64, ContinuousMarks, LlnConfig64};
use serde::{Deserialize, Serialize};

/// Subcommands a scenario can drive; used to select which experiment
/// fields are required.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Simulate,
    Resolvent,
    Moments,
    LlnCount,
    LlnCompound,
    LlnDphi,
    Ruin,
    Netprofit,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Simulate => "simulate",
            CommandKind::Resolvent => "resolvent",
            CommandKind::Moments => "moments",
            CommandKind::LlnCount => "lln-count",
            CommandKind::LlnCompound => "lln-compound",
            CommandKind::LlnDphi => "lln-dphi",
            CommandKind::Ruin => "ruin",
            CommandKind::Netprofit => "netprofit",
        }
    }
}

/// Errors from loading a scenario, one variant per failure class.
#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("scenario file not found: {0}")]
    MissingFile(String),
    #[error("scenario file is not readable: {0}")]
    Unreadable(String),
    #[error("scenario syntax error: {0}")]
    Syntax(String),
    #[error("scenario schema violations:{0}")]
    Schema(SchemaViolations),
}

/// The full list of semantic problems found in one pass.
#[derive(Debug)]
pub struct SchemaViolations(pub Vec<String>);

impl fmt::Display for SchemaViolations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.0 {
            write!(f, "\n  - {item}")?;
        }
        Ok(())
    }
}

/// Top-level scenario document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Schema version; currently always 1.
    pub version: u32,
    pub kernel: KernelBlock,
    #[serde(default)]
    pub experiment: ExperimentBlock,
    #[serde(default)]
    pub numerics: NumericsBlock,
    pub rng: RngBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    /// Baseline event rate.
    pub m: f64,
    pub excitation: ExcitationCfg,
    pub marks: MarksCfg,
    /// Permit branching ratios >= 1 (honored only by `simulate`).
    #[serde(default)]
    pub allow_unstable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExcitationCfg {
    /// No self-excitation: a plain Poisson stream.
    Zero,
    /// `alpha e^{-beta t} g(x)`.
    Exponential {
        alpha: f64,
        beta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g: Option<WeightCfg>,
    },
    /// `a (1 + t/c)^{-p} g(x)` with `p > 2`.
    PowerLaw {
        a: f64,
        c: f64,
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g: Option<WeightCfg>,
    },
}

/// Mark-weight functions shared by excitation (`g`) and the mark-sum
/// statistic (`phi`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightCfg {
    Constant { value: f64 },
    Value,
    Square,
    Table { values: Vec<f64> },
}

impl WeightCfg {
    pub fn to_function(&self) -> MarkFunction<f64> {
        match self {
            WeightCfg::Constant { value } => MarkFunction::Constant(*value),
            WeightCfg::Value => MarkFunction::Value,
            WeightCfg::Square => MarkFunction::Square,
            WeightCfg::Table { values } => MarkFunction::Table(values.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarksCfg {
    /// Finite mark space; omitting `probs` means uniform weights.
    Discrete {
        labels: Vec<String>,
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probs: Option<Vec<f64>>,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    Exponential {
        rate: f64,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    /// Simulation horizon (`simulate`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Evaluation times (`moments`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    /// Growing grid of `T` values (`lln-*`, `ruin`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    /// Time dilation of the rescaled statistic; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    /// Replicates per grid point; defaults to 200.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    /// Target mark set `A`; defaults to the whole space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetCfg>,
    /// Claim size law(s) (`lln-compound`, `ruin`, `netprofit`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claims: Option<ClaimsCfg>,
    /// Mark weight for the mark-sum statistic (`lln-dphi`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<WeightCfg>,
    /// Premium income rate `c` (`ruin`, `netprofit`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premium_rate: Option<f64>,
    /// Initial capital `r` (`ruin`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_capital: Option<f64>,
    /// Exceedance threshold override for probability-mode statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Relative pass band for the final mean; defaults to 0.05.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tolerance: Option<f64>,
    /// Pass gate on the exceedance frequency; defaults to 0.10.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_exceedance: Option<f64>,
    /// Per-path event cap; defaults to ten million.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_events: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetCfg {
    All,
    Labels { labels: Vec<String> },
    Interval { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SingleClaimCfg {
    Constant { value: f64 },
    Exponential { mean: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

impl SingleClaimCfg {
    fn to_law(&self) -> ClaimLaw64 {
        match self {
            SingleClaimCfg::Constant { value } => ClaimLaw64::Constant(*value),
            SingleClaimCfg::Exponential { mean } => ClaimLaw64::Exponential { mean: *mean },
            SingleClaimCfg::LogNormal { mu, sigma } => ClaimLaw64::LogNormal {
                mu: *mu,
                sigma: *sigma,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClaimsCfg {
    Constant { value: f64 },
    Exponential { mean: f64 },
    LogNormal { mu: f64, sigma: f64 },
    /// One law per mark point, in label order; discrete marks only.
    PerMark { laws: Vec<SingleClaimCfg> },
}

impl ClaimsCfg {
    pub fn to_laws(&self) -> ClaimLaws64 {
        match self {
            ClaimsCfg::Constant { value } => ClaimLaws64::Global(ClaimLaw64::Constant(*value)),
            ClaimsCfg::Exponential { mean } => {
                ClaimLaws64::Global(ClaimLaw64::Exponential { mean: *mean })
            }
            ClaimsCfg::LogNormal { mu, sigma } => ClaimLaws64::Global(ClaimLaw64::LogNormal {
                mu: *mu,
                sigma: *sigma,
            }),
            ClaimsCfg::PerMark { laws } => {
                ClaimLaws64::PerMark(laws.iter().map(SingleClaimCfg::to_law).collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsBlock {
    /// Grid step for resolvent computations.
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Series truncation tolerance.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Scales the kernel's default grid horizon.
    #[serde(default = "default_multiplier")]
    pub horizon_multiplier: f64,
    /// Absolute grid horizon; overrides the multiplier and is required for
    /// kernel families without a default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_horizon: Option<f64>,
}

fn default_dt() -> f64 {
    1e-3
}
fn default_tol() -> f64 {
    1e-8
}
fn default_multiplier() -> f64 {
    1.0
}

impl Default for NumericsBlock {
    fn default() -> Self {
        NumericsBlock {
            dt: default_dt(),
            tol: default_tol(),
            horizon_multiplier: default_multiplier(),
            grid_horizon: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RngBlock {
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<FormatCfg>,
}

fn default_directory() -> String {
    "out".to_string()
}
fn default_formats() -> Vec<FormatCfg> {
    vec![FormatCfg::Csv, FormatCfg::Json]
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            directory: default_directory(),
            formats: default_formats(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatCfg {
    Csv,
    Json,
    Svg,
}

impl Scenario {
    /// Load and syntax-check a scenario file; semantic validation is a
    /// separate, subcommand-aware step.
    pub fn load(path: &Path) -> Result<(Scenario, Vec<u8>), ScenarioError> {
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(ScenarioError::MissingFile(path.display().to_string()))
            }
            Err(e) => {
                return Err(ScenarioError::Unreadable(format!(
                    "{}: {e}",
                    path.display()
                )))
            }
        };
        // Separate pure-JSON errors from schema mismatches: parse into a
        // generic value first.
        let value: serde_json::Value = serde_json::from_slice(&bytes)
            .map_err(|e| ScenarioError::Syntax(e.to_string()))?;
        let scenario: Scenario = serde_json::from_value(value)
            .map_err(|e| ScenarioError::Schema(SchemaViolations(vec![e.to_string()])))?;
        Ok((scenario, bytes))
    }

    /// Collect every semantic problem relevant to `command`.
    pub fn validate(&self, command: CommandKind) -> Result<(), ScenarioError> {
        let mut errors = Vec::new();
        if self.version != 1 {
            errors.push(format!("unsupported schema version {}", self.version));
        }
        self.validate_kernel(&mut errors);
        self.validate_numerics(&mut errors);
        self.validate_experiment(command, &mut errors);
        if self.output.formats.is_empty() {
            errors.push("output.formats must not be empty".into());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Schema(SchemaViolations(errors)))
        }
    }

    fn validate_kernel(&self, errors: &mut Vec<String>) {
        let k = &self.kernel;
        if !k.m.is_finite() || k.m < 0.0 {
            errors.push(format!("kernel.m must be non-negative, got {}", k.m));
        }
        match &k.excitation {
            ExcitationCfg::Zero => {}
            ExcitationCfg::Exponential { alpha, beta, g } => {
                if !alpha.is_finite() || *alpha < 0.0 {
                    errors.push(format!("excitation.alpha must be non-negative, got {alpha}"));
                }
                if !beta.is_finite() || *beta <= 0.0 {
                    errors.push(format!("excitation.beta must be positive, got {beta}"));
                }
                self.validate_weight(g.as_ref(), "excitation.g", errors);
            }
            ExcitationCfg::PowerLaw { a, c, p, g } => {
                if !a.is_finite() || *a < 0.0 {
                    errors.push(format!("excitation.a must be non-negative, got {a}"));
                }
                if !c.is_finite() || *c <= 0.0 {
                    errors.push(format!("excitation.c must be positive, got {c}"));
                }
                if !p.is_finite() || *p <= 2.0 {
                    errors.push(format!(
                        "excitation.p must exceed 2 for an integrable first moment, got {p}"
                    ));
                }
                self.validate_weight(g.as_ref(), "excitation.g", errors);
            }
        }
        match &k.marks {
            MarksCfg::Discrete {
                labels,
                values,
                probs,
            } => {
                if labels.is_empty() {
                    errors.push("marks.labels must not be empty".into());
                }
                if labels.len() != values.len() {
                    errors.push(format!(
                        "marks.labels ({}) and marks.values ({}) differ in length",
                        labels.len(),
                        values.len()
                    ));
                }
                let mut seen = std::collections::BTreeSet::new();
                for l in labels {
                    if !seen.insert(l) {
                        errors.push(format!("duplicate mark label {l:?}"));
                    }
                }
                if let Some(p) = probs {
                    if p.len() != labels.len() {
                        errors.push(format!(
                            "marks.probs ({}) and marks.labels ({}) differ in length",
                            p.len(),
                            labels.len()
                        ));
                    }
                    let total: f64 = p.iter().sum();
                    if p.iter().any(|&x| !x.is_finite() || !(0.0..=1.0).contains(&x))
                        || (total - 1.0).abs() > 1e-9
                    {
                        errors.push(format!(
                            "marks.probs must lie in [0,1] and sum to 1, sum = {total}"
                        ));
                    }
                }
            }
            MarksCfg::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    errors.push(format!("marks.uniform needs lo < hi, got [{lo}, {hi}]"));
                }
            }
            MarksCfg::Exponential { rate } => {
                if !rate.is_finite() || *rate <= 0.0 {
                    errors.push(format!("marks.rate must be positive, got {rate}"));
                }
            }
        }
    }

    fn validate_weight(&self, w: Option<&WeightCfg>, what: &str, errors: &mut Vec<String>) {
        let Some(w) = w else { return };
        match w {
            WeightCfg::Constant { value } => {
                if !value.is_finite() || *value < 0.0 {
                    errors.push(format!("{what}.value must be non-negative, got {value}"));
                }
            }
            WeightCfg::Value | WeightCfg::Square => {}
            WeightCfg::Table { values } => {
                let n = self.mark_count();
                if let Some(n) = n {
                    if values.len() != n {
                        errors.push(format!(
                            "{what}.values has {} entries but the mark space has {n}",
                            values.len()
                        ));
                    }
                } else {
                    errors.push(format!("{what} of type table requires discrete marks"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    errors.push(format!("{what}.values must all be finite"));
                }
            }
        }
    }

    fn validate_numerics(&self, errors: &mut Vec<String>) {
        let n = &self.numerics;
        if !n.dt.is_finite() || n.dt <= 0.0 {
            errors.push(format!("numerics.dt must be positive, got {}", n.dt));
        }
        if !n.tol.is_finite() || n.tol <= 0.0 {
            errors.push(format!("numerics.tol must be positive, got {}", n.tol));
        }
        if !n.horizon_multiplier.is_finite() || n.horizon_multiplier <= 0.0 {
            errors.push(format!(
                "numerics.horizon_multiplier must be positive, got {}",
                n.horizon_multiplier
            ));
        }
        if let Some(h) = n.grid_horizon {
            if !h.is_finite() || h <= 0.0 {
                errors.push(format!("numerics.grid_horizon must be positive, got {h}"));
            }
        }
    }

    fn validate_experiment(&self, command: CommandKind, errors: &mut Vec<String>) {
        let e = &self.experiment;
        // Shared field checks, applied whenever present.
        if let Some(h) = e.horizon {
            if !h.is_finite() || h <= 0.0 {
                errors.push(format!("experiment.horizon must be positive, got {h}"));
            }
        }
        if let Some(ts) = &e.times {
            if ts.is_empty() || ts.iter().any(|t| !t.is_finite() || *t < 0.0) {
                errors.push("experiment.times must be non-empty and non-negative".into());
            }
        }
        if let Some(grid) = &e.t_grid {
            let increasing = grid.windows(2).all(|w| w[0] < w[1]);
            if grid.is_empty()
                || !increasing
                || grid.iter().any(|t| !t.is_finite() || *t <= 0.0)
            {
                errors.push("experiment.t_grid must be positive and strictly increasing".into());
            }
        }
        if let Some(v) = e.v {
            if !v.is_finite() || v < 0.0 {
                errors.push(format!("experiment.v must be non-negative, got {v}"));
            }
        }
        if let Some(r) = e.replications {
            if r < 2 {
                errors.push(format!("experiment.replications must be at least 2, got {r}"));
            }
        }
        if let Some(set) = &e.set {
            self.validate_set(set, errors);
        }
        if let Some(claims) = &e.claims {
            self.validate_claims(claims, errors);
        }
        if let Some(phi) = &e.phi {
            self.validate_weight(Some(phi), "experiment.phi", errors);
        }
        if let Some(c) = e.premium_rate {
            if !c.is_finite() || c < 0.0 {
                errors.push(format!(
                    "experiment.premium_rate must be non-negative, got {c}"
                ));
            }
        }
        if let Some(r) = e.initial_capital {
            if !r.is_finite() || r < 0.0 {
                errors.push(format!(
                    "experiment.initial_capital must be non-negative, got {r}"
                ));
            }
        }
        for (value, name) in [
            (e.epsilon, "epsilon"),
            (e.rel_tolerance, "rel_tolerance"),
        ] {
            if let Some(x) = value {
                if !x.is_finite() || x <= 0.0 {
                    errors.push(format!("experiment.{name} must be positive, got {x}"));
                }
            }
        }
        if let Some(x) = e.max_exceedance {
            if !x.is_finite() || !(0.0..=1.0).contains(&x) {
                errors.push(format!(
                    "experiment.max_exceedance must lie in [0, 1], got {x}"
                ));
            }
        }

        // Per-command required fields.
        let required: Vec<(bool, &str)> = match command {
            CommandKind::Simulate => vec![(e.horizon.is_some(), "horizon")],
            CommandKind::Resolvent => vec![],
            CommandKind::Moments => vec![(e.times.is_some(), "times")],
            CommandKind::LlnCount => vec![(e.t_grid.is_some(), "t_grid")],
            CommandKind::LlnCompound => vec![
                (e.t_grid.is_some(), "t_grid"),
                (e.claims.is_some(), "claims"),
            ],
            CommandKind::LlnDphi => vec![
                (e.t_grid.is_some(), "t_grid"),
                (e.phi.is_some(), "phi"),
            ],
            CommandKind::Ruin => vec![
                (e.t_grid.is_some(), "t_grid"),
                (e.claims.is_some(), "claims"),
                (e.premium_rate.is_some(), "premium_rate"),
                (e.initial_capital.is_some(), "initial_capital"),
            ],
            CommandKind::Netprofit => vec![
                (e.claims.is_some(), "claims"),
                (e.premium_rate.is_some(), "premium_rate"),
            ],
        };
        for (present, name) in required {
            if !present {
                errors.push(format!(
                    "experiment.{name} is required for `{}`",
                    command.name()
                ));
            }
        }
        if command == CommandKind::LlnCompound
            && matches!(e.claims, Some(ClaimsCfg::PerMark { .. }))
        {
            errors.push(
                "`lln-compound` draws i.i.d. claims from one law; use `ruin` for per-mark laws"
                    .into(),
            );
        }
        // Instability is tolerated only where it is meaningful to watch a
        // supercritical path run away.
        if self.kernel.allow_unstable && command != CommandKind::Simulate {
            errors.push(format!(
                "kernel.allow_unstable is only honored by `simulate`, not `{}`",
                command.name()
            ));
        }
    }

    fn validate_set(&self, set: &SetCfg, errors: &mut Vec<String>) {
        match set {
            SetCfg::All => {}
            SetCfg::Labels { labels } => {
                if labels.is_empty() {
                    errors.push("experiment.set.labels must not be empty".into());
                }
                if let MarksCfg::Discrete {
                    labels: known_labels,
                    ..
                } = &self.kernel.marks
                {
                    for l in labels {
                        if !known_labels.contains(l) {
                            errors.push(format!(
                                "experiment.set references unknown mark label {l:?}"
                            ));
                        }
                    }
                } else {
                    errors.push("label sets require discrete marks".into());
                }
            }
            SetCfg::Interval { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    errors.push(format!(
                        "experiment.set interval needs lo <= hi, got [{lo}, {hi}]"
                    ));
                }
                if matches!(self.kernel.marks, MarksCfg::Discrete { .. }) {
                    errors.push("interval sets require continuous marks".into());
                }
            }
        }
    }

    fn validate_claims(&self, claims: &ClaimsCfg, errors: &mut Vec<String>) {
        let check_single = |law: &SingleClaimCfg, errors: &mut Vec<String>| match law {
            SingleClaimCfg::Constant { value } => {
                if !value.is_finite() || *value < 0.0 {
                    errors.push(format!("claim value must be non-negative, got {value}"));
                }
            }
            SingleClaimCfg::Exponential { mean } => {
                if !mean.is_finite() || *mean <= 0.0 {
                    errors.push(format!("claim mean must be positive, got {mean}"));
                }
            }
            SingleClaimCfg::LogNormal { mu, sigma } => {
                if !mu.is_finite() || !sigma.is_finite() || *sigma < 0.0 {
                    errors.push(format!(
                        "lognormal claim parameters invalid: mu={mu}, sigma={sigma}"
                    ));
                }
            }
        };
        match claims {
            ClaimsCfg::Constant { value } => {
                check_single(&SingleClaimCfg::Constant { value: *value }, errors)
            }
            ClaimsCfg::Exponential { mean } => {
                check_single(&SingleClaimCfg::Exponential { mean: *mean }, errors)
            }
            ClaimsCfg::LogNormal { mu, sigma } => check_single(
                &SingleClaimCfg::LogNormal {
                    mu: *mu,
                    sigma: *sigma,
                },
                errors,
            ),
            ClaimsCfg::PerMark { laws } => {
                match self.mark_count() {
                    Some(n) if n == laws.len() => {}
                    Some(n) => errors.push(format!(
                        "per-mark claims list {} laws but the mark space has {n}",
                        laws.len()
                    )),
                    None => errors.push("per-mark claims require discrete marks".into()),
                }
                for law in laws {
                    check_single(law, errors);
                }
            }
        }
    }

    fn mark_count(&self) -> Option<usize> {
        match &self.kernel.marks {
            MarksCfg::Discrete { labels, .. } => Some(labels.len()),
            _ => None,
        }
    }

    /// Build the in-memory kernel; instability passes only when the caller
    /// opts in (the `simulate` path).
    pub fn build_kernel(&self, command: CommandKind) -> marked_hawkes::Result<KernelSpec<f64>> {
        let marks = match &self.kernel.marks {
            MarksCfg::Discrete {
                labels,
                values,
                probs,
            } => {
                let points: Vec<MarkPoint<f64>> = labels
                    .iter()
                    .zip(values)
                    .map(|(l, &v)| MarkPoint::new(l.clone(), v))
                    .collect();
                let d = match probs {
                    Some(p) => DiscreteMarks::new(points, p.clone())?,
                    None => DiscreteMarks::uniform_over(points)?,
                };
                MarkDistribution::Discrete(d)
            }
            MarksCfg::Uniform { lo, hi } => {
                MarkDistribution::Continuous(ContinuousMarks::Uniform { lo: *lo, hi: *hi })
            }
            MarksCfg::Exponential { rate } => {
                MarkDistribution::Continuous(ContinuousMarks::Exponential { rate: *rate })
            }
        };
        let default_g = MarkFunction::Constant(1.0);
        let excitation = match &self.kernel.excitation {
            ExcitationCfg::Zero => ExcitationFunction::Zero,
            ExcitationCfg::Exponential { alpha, beta, g } => ExcitationFunction::Exponential {
                alpha: *alpha,
                beta: *beta,
                g: g.as_ref().map_or(default_g.clone(), WeightCfg::to_function),
            },
            ExcitationCfg::PowerLaw { a, c, p, g } => ExcitationFunction::General {
                profile: TimeProfile::power_law(*a, *c, *p)?,
                g: g.as_ref().map_or(default_g, WeightCfg::to_function),
            },
        };
        if self.kernel.allow_unstable && command == CommandKind::Simulate {
            KernelSpec::new_allow_unstable(self.kernel.m, excitation, marks)
        } else {
            KernelSpec::new(self.kernel.m, excitation, marks)
        }
    }

    /// Resolve the experiment's target mark set against the built kernel.
    pub fn build_set(&self, spec: &KernelSpec<f64>) -> marked_hawkes::Result<MarkSet<f64>> {
        match self.experiment.set.as_ref() {
            None | Some(SetCfg::All) => Ok(MarkSet::All),
            Some(SetCfg::Labels { labels }) => MarkSet::from_labels(spec.marks(), labels),
            Some(SetCfg::Interval { lo, hi }) => Ok(MarkSet::Interval { lo: *lo, hi: *hi }),
        }
    }

    /// Assemble the verification config shared by the `lln-*` and `ruin`
    /// subcommands.
    pub fn build_lln_config(&self) -> LlnConfig64 {
        let e = &self.experiment;
        let mut cfg = LlnConfig64::new(
            e.v.unwrap_or(1.0),
            e.t_grid.clone().unwrap_or_default(),
            e.replications.unwrap_or(200),
        );
        if let Some(tol) = e.rel_tolerance {
            cfg.rel_tolerance = tol;
        }
        cfg.epsilon = e.epsilon;
        if let Some(x) = e.max_exceedance {
            cfg.max_exceedance = x;
        }
        if let Some(n) = e.max_events {
            cfg.max_events = n;
        }
        cfg.dt = self.numerics.dt;
        cfg.series_tol = self.numerics.tol;
        cfg.horizon_override = self.grid_horizon_hint();
        cfg
    }

    /// Absolute grid horizon when one is pinned by the scenario.
    pub fn grid_horizon_hint(&self) -> Option<f64> {
        self.numerics.grid_horizon
    }

    /// Grid horizon for resolvent work: explicit override, else the
    /// kernel's default scaled by the multiplier, extended to `needed`.
    pub fn resolve_grid_horizon(
        &self,
        spec: &KernelSpec<f64>,
        needed: Option<f64>,
    ) -> Result<f64, ScenarioError> {
        let base = match self.numerics.grid_horizon {
            Some(h) => h,
            None => match spec.default_horizon() {
                Some(h) => h * self.numerics.horizon_multiplier,
                None => {
                    return Err(ScenarioError::Schema(SchemaViolations(vec![
                        "this kernel family has no default grid horizon; set numerics.grid_horizon"
                            .into(),
                    ])))
                }
            },
        };
        Ok(match needed {
            Some(n) => base.max(n),
            None => base,
        })
    }

    /// Mean claim size per event for the net-profit check: the global mean,
    /// or the probability-weighted mean across per-mark laws.
    pub fn mean_claim(&self, spec: &KernelSpec<f64>) -> Option<f64> {
        let claims = self.experiment.claims.as_ref()?;
        match claims.to_laws() {
            ClaimLaws64::Global(law) => Some(law.mean()),
            ClaimLaws64::PerMark(laws) => {
                let d = spec.marks().as_discrete()?;
                Some(
                    laws.iter()
                        .zip(d.probs())
                        .map(|(law, &q)| law.mean() * q)
                        .sum(),
                )
            }
        }
    }
}
