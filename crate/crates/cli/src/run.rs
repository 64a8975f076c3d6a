//! Subcommand execution: build the model from a validated scenario, run
//! the requested computation, write artifacts atomically, and assemble the
//! one-line JSON summary printed to standard output.

use std::path::{Path, PathBuf};

use marked_hawkes::lln::net_profit_condition;
use marked_hawkes::simulate::{simulate_path_with, SimulationOptions};
use marked_hawkes::volterra::resolvent;
use marked_hawkes::{ClaimLaws64, ConvergenceReport64, KernelSpec64, RngStream};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::output::write_atomic;
use crate::scenario::{CommandKind, FormatCfg, Scenario, ScenarioError};
use crate::svg::emit_plot;

/// One resolved command-line invocation.
pub struct Invocation<'a> {
    pub command: CommandKind,
    pub scenario_path: &'a Path,
    /// Overrides the scenario's output directory.
    pub out_dir: Option<&'a Path>,
    /// Overrides the scenario's master seed.
    pub seed: Option<u64>,
}

/// What the process should report and how it should exit.
pub struct RunOutcome {
    pub exit_code: u8,
    pub summary: serde_json::Value,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("model: {0}")]
    Model(#[from] marked_hawkes::HawkesError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub fn execute(inv: &Invocation) -> Result<RunOutcome, CliError> {
    let (scenario, raw_bytes) = Scenario::load(inv.scenario_path)?;
    scenario.validate(inv.command)?;
    let spec = scenario.build_kernel(inv.command)?;
    let ctx = RunContext {
        scenario: &scenario,
        spec: &spec,
        seed: inv.seed.unwrap_or(scenario.rng.master_seed),
        config_digest: hex_digest(&raw_bytes),
        out_dir: inv
            .out_dir
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(&scenario.output.directory)),
        command: inv.command,
    };
    match inv.command {
        CommandKind::Simulate => run_simulate(&ctx),
        CommandKind::Resolvent => run_resolvent(&ctx),
        CommandKind::Moments => run_moments(&ctx),
        CommandKind::LlnCount
        | CommandKind::LlnCompound
        | CommandKind::LlnDphi
        | CommandKind::Ruin => run_verification(&ctx),
        CommandKind::Netprofit => run_netprofit(&ctx),
    }
}

struct RunContext<'a> {
    scenario: &'a Scenario,
    spec: &'a KernelSpec64,
    seed: u64,
    config_digest: String,
    out_dir: PathBuf,
    command: CommandKind,
}

impl RunContext<'_> {
    fn wants(&self, format: FormatCfg) -> bool {
        self.scenario.output.formats.contains(&format)
    }

    /// Write one artifact and return its path for the summary.
    fn emit(&self, name: &str, payload: &[u8]) -> Result<String, CliError> {
        let path = self.out_dir.join(name);
        write_atomic(&path, |w| w.write_all(payload))?;
        Ok(path.display().to_string())
    }

    fn summary(
        &self,
        pass: Option<bool>,
        artifacts: Vec<String>,
        details: serde_json::Value,
    ) -> serde_json::Value {
        let mut value = json!({
            "command": self.command.name(),
            "seed": self.seed,
            "config_digest": self.config_digest,
            "artifacts": artifacts,
            "details": details,
        });
        if let Some(pass) = pass {
            value["pass"] = json!(pass);
        }
        value
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

fn run_simulate(ctx: &RunContext) -> Result<RunOutcome, CliError> {
    let horizon = ctx
        .scenario
        .experiment
        .horizon
        .expect("validated: simulate requires a horizon");
    let options = SimulationOptions {
        max_events: ctx
            .scenario
            .experiment
            .max_events
            .unwrap_or(SimulationOptions::default().max_events),
    };
    let path = simulate_path_with(ctx.spec, horizon, RngStream::new(ctx.seed), &options)?;

    let mut artifacts = Vec::new();
    if ctx.wants(FormatCfg::Csv) {
        let mut buf = Vec::new();
        path.write_csv(ctx.spec.marks(), &mut buf)?;
        artifacts.push(ctx.emit("events.csv", &buf)?);
    }
    if ctx.wants(FormatCfg::Json) {
        let payload = json!({
            "horizon": horizon,
            "events": path.events().len(),
            "branching_ratio": ctx.spec.branching_ratio(),
            "model_digest": ctx.spec.digest(),
        });
        artifacts.push(ctx.emit("simulate.json", &pretty(&payload))?);
    }
    let details = json!({
        "events": path.events().len(),
        "horizon": horizon,
    });
    Ok(RunOutcome {
        exit_code: 0,
        summary: ctx.summary(None, artifacts, details),
    })
}

fn run_resolvent(ctx: &RunContext) -> Result<RunOutcome, CliError> {
    let horizon = ctx.scenario.resolve_grid_horizon(ctx.spec, None)?;
    let dt = ctx.scenario.numerics.dt;
    let f = ctx.spec.marginal_excitation_grid(dt, horizon)?;
    let res = resolvent(&f, ctx.scenario.numerics.tol)?;
    let (_, l1_upper) = res.l1_norm_bracket();

    let mut artifacts = Vec::new();
    if ctx.wants(FormatCfg::Csv) {
        let mut buf = Vec::new();
        res.resolvent.write_csv(&mut buf)?;
        artifacts.push(ctx.emit("resolvent.csv", &buf)?);
    }
    let payload = json!({
        "branching_ratio": ctx.spec.branching_ratio(),
        "dt": dt,
        "horizon": horizon,
        "l1_norm": res.l1_norm_truncated,
        "l1_tail_bound": res.l1_tail_bound,
        "l1_upper": l1_upper,
        "first_moment": res.first_moment,
        "first_moment_bound": res.first_moment_bound,
        "neumann_terms": res.neumann_terms_used,
        "model_digest": ctx.spec.digest(),
    });
    if ctx.wants(FormatCfg::Json) {
        artifacts.push(ctx.emit("resolvent.json", &pretty(&payload))?);
    }
    Ok(RunOutcome {
        exit_code: 0,
        summary: ctx.summary(None, artifacts, payload),
    })
}

fn run_moments(ctx: &RunContext) -> Result<RunOutcome, CliError> {
    let times = ctx
        .scenario
        .experiment
        .times
        .clone()
        .expect("validated: moments requires times");
    let needed = times.iter().copied().fold(0.0f64, f64::max);
    let horizon = ctx.scenario.resolve_grid_horizon(ctx.spec, Some(needed))?;
    let f = ctx
        .spec
        .marginal_excitation_grid(ctx.scenario.numerics.dt, horizon)?;
    let res = resolvent(&f, ctx.scenario.numerics.tol)?;
    let set = ctx.scenario.build_set(ctx.spec)?;
    let q_a = ctx.spec.q_of(&set)?;

    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        rows.push((
            t,
            res.expected_intensity(ctx.spec.m(), t)?,
            res.expected_count(ctx.spec.m(), q_a, t)?,
        ));
    }

    let mut artifacts = Vec::new();
    if ctx.wants(FormatCfg::Csv) {
        let mut buf = String::from("t,expected_intensity,expected_count\n");
        for (t, intensity, count) in &rows {
            buf.push_str(&format!("{t},{intensity},{count}\n"));
        }
        artifacts.push(ctx.emit("moments.csv", buf.as_bytes())?);
    }
    let json_rows: Vec<serde_json::Value> = rows
        .iter()
        .map(|(t, intensity, count)| {
            json!({"t": t, "expected_intensity": intensity, "expected_count": count})
        })
        .collect();
    let payload = json!({
        "q_a": q_a,
        "rows": json_rows,
        "model_digest": ctx.spec.digest(),
    });
    if ctx.wants(FormatCfg::Json) {
        artifacts.push(ctx.emit("moments.json", &pretty(&payload))?);
    }
    let (t_last, intensity_last, count_last) = *rows.last().expect("times validated non-empty");
    let details = json!({
        "t": t_last,
        "expected_intensity": intensity_last,
        "expected_count": count_last,
    });
    Ok(RunOutcome {
        exit_code: 0,
        summary: ctx.summary(None, artifacts, details),
    })
}

fn run_verification(ctx: &RunContext) -> Result<RunOutcome, CliError> {
    let cfg = ctx.scenario.build_lln_config();
    let stream = RngStream::new(ctx.seed);
    let experiment = &ctx.scenario.experiment;
    let (stem, report): (&str, ConvergenceReport64) = match ctx.command {
        CommandKind::LlnCount => {
            let set = ctx.scenario.build_set(ctx.spec)?;
            (
                "lln_count",
                marked_hawkes::lln::verify_count_lln(ctx.spec, &set, &cfg, stream)?,
            )
        }
        CommandKind::LlnCompound => {
            let set = ctx.scenario.build_set(ctx.spec)?;
            let law = match experiment
                .claims
                .as_ref()
                .expect("validated: lln-compound requires claims")
                .to_laws()
            {
                ClaimLaws64::Global(law) => law,
                ClaimLaws64::PerMark(_) => unreachable!("validated: global law only"),
            };
            (
                "lln_compound",
                marked_hawkes::lln::verify_compound_lln(ctx.spec, &set, &law, &cfg, stream)?,
            )
        }
        CommandKind::LlnDphi => {
            let phi = experiment
                .phi
                .as_ref()
                .expect("validated: lln-dphi requires phi")
                .to_function();
            (
                "lln_dphi",
                marked_hawkes::lln::verify_mark_sum_lln(ctx.spec, &phi, &cfg, stream)?,
            )
        }
        CommandKind::Ruin => {
            let laws = experiment
                .claims
                .as_ref()
                .expect("validated: ruin requires claims")
                .to_laws();
            let reserve = experiment
                .initial_capital
                .expect("validated: ruin requires initial_capital");
            let premium = experiment
                .premium_rate
                .expect("validated: ruin requires premium_rate");
            (
                "ruin",
                marked_hawkes::lln::verify_ruin_lln(
                    ctx.spec, reserve, premium, &laws, &cfg, stream,
                )?,
            )
        }
        _ => unreachable!("run_verification only handles report commands"),
    };

    let mut artifacts = Vec::new();
    if ctx.wants(FormatCfg::Csv) {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        artifacts.push(ctx.emit(&format!("{stem}.csv"), &buf)?);
    }
    if ctx.wants(FormatCfg::Json) {
        let mut text = report.to_json_string();
        text.push('\n');
        artifacts.push(ctx.emit(&format!("{stem}.json"), text.as_bytes())?);
    }
    if ctx.wants(FormatCfg::Svg) {
        let mut buf = Vec::new();
        emit_plot(&report, &mut buf)?;
        artifacts.push(ctx.emit(&format!("{stem}.svg"), &buf)?);
    }

    let last = report.rows.last().expect("reports carry at least one row");
    let details = json!({
        "statistic": report.statistic,
        "limit": report.limit,
        "final_t": last.t,
        "final_mean": last.mean,
        "final_mse": last.mse,
        "final_exceedance": last.exceedance,
        "epsilon": report.epsilon,
        "mse_non_increasing": report.mse_non_increasing,
        "mean_within_tolerance": report.mean_within_tolerance,
        "exceedance_within_bound": report.exceedance_within_bound,
        "integrability": report.integrability,
    });
    Ok(RunOutcome {
        exit_code: u8::from(!report.pass),
        summary: ctx.summary(Some(report.pass), artifacts, details),
    })
}

fn run_netprofit(ctx: &RunContext) -> Result<RunOutcome, CliError> {
    let premium = ctx
        .scenario
        .experiment
        .premium_rate
        .expect("validated: netprofit requires premium_rate");
    let mean_claim = ctx.scenario.mean_claim(ctx.spec).ok_or_else(|| {
        ScenarioError::Schema(crate::scenario::SchemaViolations(vec![
            "netprofit needs a claim law with a defined mean".into(),
        ]))
    })?;
    let outcome = net_profit_condition(
        premium,
        ctx.spec.m(),
        mean_claim,
        ctx.spec.mean_total_excitation(),
    )?;

    let payload = json!({
        "premium_rate": outcome.premium_rate,
        "threshold": outcome.required_rate,
        "holds": outcome.holds,
        "mean_claim": mean_claim,
        "baseline_rate": ctx.spec.m(),
        "mean_total_excitation": ctx.spec.mean_total_excitation(),
        "model_digest": ctx.spec.digest(),
    });
    let mut artifacts = Vec::new();
    if ctx.wants(FormatCfg::Json) {
        artifacts.push(ctx.emit("netprofit.json", &pretty(&payload))?);
    }
    Ok(RunOutcome {
        exit_code: u8::from(!outcome.holds),
        summary: ctx.summary(Some(outcome.holds), artifacts, payload),
    })
}

/// Pretty-printed JSON with a trailing newline, stable across runs.
fn pretty(value: &serde_json::Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("static JSON cannot fail");
    bytes.push(b'\n');
    bytes
}
