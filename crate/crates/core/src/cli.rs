//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 feasibility failure, 2 configuration error,
//! 3 design error, 4 simulation failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, QSpec};
use crate::design::{self, feasibility_check};
use crate::error::{Error, Result};
use crate::report::{self, fmt_num, DesignReport, TOOL_VERSION};
use crate::scheduler::precompute;
use crate::sim::{self, ExecutionLog, VerificationReport, VerifyOptions};
use crate::svg::{line_chart, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const THREADS_ENV: &str = "SELFTRIG_THREADS";

#[derive(Debug, Parser)]
#[command(name = "selftrig", version, about = "Self-triggered state-feedback design and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the certificate, minimum inter-execution time, trigger tables and gains.
    Design(DesignArgs),
    /// Simulate the self-triggered loop and verify it against the gains.
    Simulate(RunArgs),
    /// Compare execution counts against periodic sampling at tau*_min.
    Compare(RunArgs),
    /// Design and simulate over a grid of (delta, tau_max).
    Sweep(SweepArgs),
    /// Check whether a platform with instruction time tau_c can run the trigger.
    Feasibility(FeasibilityArgs),
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Report path (default: <outputs.directory>/design.json).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Design report (default: <outputs.directory>/design.json).
    #[arg(long)]
    pub design: Option<PathBuf>,
    /// Output directory (default: outputs.directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub delta_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub tau_max_list: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct FeasibilityArgs {
    #[arg(long)]
    pub design: PathBuf,
    #[arg(long)]
    pub tau_c: f64,
    /// Accepted for symmetry with the other subcommands; unused.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Design(a) => cmd_design(&a.config, a.out.as_deref()).map(|_| EXIT_OK),
        Command::Simulate(a) => cmd_simulate(&a.config, a.design.as_deref(), a.out.as_deref()).map(|_| EXIT_OK),
        Command::Compare(a) => cmd_compare(&a.config, a.design.as_deref(), a.out.as_deref()).map(|_| EXIT_OK),
        Command::Sweep(a) => cmd_sweep(&a.config, a.out.as_deref(), &a.delta_list, &a.tau_max_list),
        Command::Feasibility(a) => cmd_feasibility(&a.design, a.tau_c),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("selftrig: {e}");
            e.exit_code()
        }
    }
}

fn default_dir(cfg: &ExperimentConfig) -> PathBuf {
    PathBuf::from(&cfg.outputs.directory)
}

/// Builds the design report for a validated configuration.
pub fn design_report(cfg: &ExperimentConfig) -> Result<DesignReport> {
    let sys = cfg.system_unchecked()?;
    let sys = design::LinearSystem::new(sys.a().clone(), sys.b().clone(), sys.k().clone())?;
    let d = design::design(&sys, &cfg.design_params())?;
    let tables = precompute(&d.system, &d.cert, &d.trigger)?;
    let q_source = match cfg.lyapunov.q {
        QSpec::Named(_) => "identity",
        QSpec::Explicit(_) => "explicit",
    };
    DesignReport::new(&d, tables, cfg.design_hash(), q_source, cfg.lyapunov.lambda_ratio)
}

pub fn cmd_design(config: &Path, out: Option<&Path>) -> Result<DesignReport> {
    let cfg = ExperimentConfig::from_path(config)?;
    let rep = design_report(&cfg)?;
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| default_dir(&cfg).join("design.json"));
    report::write_file(&path, &report::to_json(&rep)?)?;
    println!(
        "tau_star={} tau_min={} tau_max={} N_min={} N_max={} sigma={} gamma_total_coeff={}",
        fmt_num(rep.tau_star),
        fmt_num(rep.trigger.tau_min),
        fmt_num(rep.trigger.tau_max),
        rep.trigger.n_min,
        rep.trigger.n_max,
        fmt_num(rep.gains.sigma),
        fmt_num(rep.gains.gamma_total_coeff),
    );
    Ok(rep)
}

fn load_pair(config: &Path, design: Option<&Path>) -> Result<(ExperimentConfig, DesignReport)> {
    let cfg = ExperimentConfig::from_path(config)?;
    let path = design.map(Path::to_path_buf).unwrap_or_else(|| default_dir(&cfg).join("design.json"));
    let rep = DesignReport::from_path(&path)?;
    if rep.config_hash != cfg.design_hash() {
        return Err(Error::Config(format!(
            "design {} was produced from a different configuration; rerun design",
            path.display()
        )));
    }
    Ok((cfg, rep))
}

/// verify.json contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyDocument {
    pub tool_version: String,
    pub config_hash: String,
    pub executions: usize,
    pub eiss_violations: usize,
    pub lemma2_violations: usize,
    pub decay_violations: usize,
    #[serde(flatten)]
    pub report: VerificationReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationSummary {
    pub log: ExecutionLog,
    pub verify: VerifyDocument,
}

/// Simulates the self-triggered loop described by `cfg` with the design
/// `rep` and writes traces, verification and (optionally) plots to `out`.
pub fn simulate_into(cfg: &ExperimentConfig, rep: &DesignReport, out: &Path) -> Result<SimulationSummary> {
    let simcfg = cfg.simulation()?;
    let cert = rep.cert();
    let (traj, log) = sim::run_self_triggered(
        &rep.system,
        &cert,
        &rep.tables,
        &simcfg.disturbance,
        &simcfg.x0,
        simcfg.t_end,
        simcfg.integrator_divisor,
    )?;
    let vr = sim::verify(&rep.system, &traj, &log, &rep.gains, &cert, &simcfg.disturbance, &VerifyOptions::default())?;

    report::write_file(&out.join("trajectory.csv"), &report::trajectory_csv(&traj, &vr.bound_curve))?;
    report::write_file(&out.join("events.csv"), &report::events_csv(&log))?;
    let doc = VerifyDocument {
        tool_version: TOOL_VERSION.into(),
        config_hash: rep.config_hash.clone(),
        executions: log.total_executions,
        eiss_violations: vr.eiss.violations,
        lemma2_violations: vr.lemma2.violations,
        decay_violations: vr.decay.map(|d| d.violations).unwrap_or(0),
        report: vr,
    };
    report::write_file(&out.join("verify.json"), &report::to_json(&doc)?)?;

    if cfg.outputs.emit_plots {
        let norms = report::state_norms(&traj);
        let svg = line_chart(
            "state norm and EISS bound",
            "t",
            "|x|",
            &[
                Series { label: "|x(t)|", color: "#1f77b4", xs: &traj.times, ys: &norms },
                Series { label: "bound", color: "#d62728", xs: &traj.times, ys: &doc.report.bound_curve },
            ],
        );
        report::write_file(&out.join("plots").join("state_norm.svg"), &svg)?;
        let ks: Vec<f64> = log.events.iter().map(|e| e.k as f64).collect();
        let taus: Vec<f64> = log.events.iter().map(|e| e.tau_k).collect();
        let svg = line_chart(
            "inter-execution times",
            "k",
            "tau_k",
            &[Series { label: "tau_k", color: "#2ca02c", xs: &ks, ys: &taus }],
        );
        report::write_file(&out.join("plots").join("tau.svg"), &svg)?;
    }
    Ok(SimulationSummary { log, verify: doc })
}

pub fn cmd_simulate(config: &Path, design: Option<&Path>, out: Option<&Path>) -> Result<SimulationSummary> {
    let (cfg, rep) = load_pair(config, design)?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| default_dir(&cfg));
    let s = simulate_into(&cfg, &rep, &dir)?;
    println!(
        "executions={} mean_tau={} eiss_violations={} lemma2_violations={} decay_violations={}",
        s.log.total_executions,
        fmt_num(s.log.mean_tau),
        s.verify.eiss_violations,
        s.verify.lemma2_violations,
        s.verify.decay_violations
    );
    Ok(s)
}

/// compare.json contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub tool_version: String,
    pub config_hash: String,
    pub t_end: f64,
    pub periodic_tau: f64,
    pub executions_self_triggered: usize,
    pub executions_periodic: usize,
    pub mean_tau_self_triggered: f64,
    pub mean_tau_periodic: f64,
    pub dominance: bool,
}

/// Self-triggered vs periodic sampling at τ*_min on identical x0 and δ.
pub fn compare(cfg: &ExperimentConfig, rep: &DesignReport) -> Result<CompareReport> {
    let simcfg = cfg.simulation()?;
    let cert = rep.cert();
    let (_, st) = sim::run_self_triggered(
        &rep.system,
        &cert,
        &rep.tables,
        &simcfg.disturbance,
        &simcfg.x0,
        simcfg.t_end,
        simcfg.integrator_divisor,
    )?;
    let period = if rep.tau_star_no_root {
        rep.tau_star.min(rep.trigger.tau_max)
    } else {
        rep.tau_star
    };
    let max_step = rep.trigger.delta / simcfg.integrator_divisor as f64;
    let (_, per) = sim::run_periodic(
        &rep.system,
        &cert,
        &simcfg.disturbance,
        &simcfg.x0,
        period,
        simcfg.t_end,
        max_step,
    )?;
    Ok(CompareReport {
        tool_version: TOOL_VERSION.into(),
        config_hash: rep.config_hash.clone(),
        t_end: simcfg.t_end,
        periodic_tau: period,
        executions_self_triggered: st.total_executions,
        executions_periodic: per.total_executions,
        mean_tau_self_triggered: st.mean_tau,
        mean_tau_periodic: per.mean_tau,
        dominance: st.total_executions <= per.total_executions,
    })
}

pub fn cmd_compare(config: &Path, design: Option<&Path>, out: Option<&Path>) -> Result<CompareReport> {
    let (cfg, rep) = load_pair(config, design)?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| default_dir(&cfg));
    let c = compare(&cfg, &rep)?;
    report::write_file(&dir.join("compare.json"), &report::to_json(&c)?)?;
    println!(
        "executions_self_triggered={} executions_periodic={} dominance={}",
        c.executions_self_triggered, c.executions_periodic, c.dominance
    );
    Ok(c)
}

/// One row of sweep.csv.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub tau_max: f64,
    pub directory: String,
    pub outcome: std::result::Result<SweepCell, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub n_max: usize,
    pub sigma: f64,
    pub gamma_total_coeff: f64,
    pub mean_tau: Option<f64>,
    pub executions: Option<usize>,
    /// gamma_total_coeff ≥ the value at the next smaller τ_max with the same Δ.
    pub gamma_monotone: bool,
}

fn sweep_cell(base: &ExperimentConfig, delta: f64, tau_max: f64, dir: &Path) -> Result<SweepCell> {
    let mut cfg = base.clone();
    cfg.trigger.delta = delta;
    cfg.trigger.tau_max = tau_max;
    cfg.validate()?;
    let rep = design_report(&cfg)?;
    report::write_file(&dir.join("design.json"), &report::to_json(&rep)?)?;
    let (mean_tau, executions) = if cfg.simulation.is_some() {
        let s = simulate_into(&cfg, &rep, dir)?;
        (Some(s.log.mean_tau), Some(s.log.total_executions))
    } else {
        (None, None)
    };
    Ok(SweepCell {
        n_max: rep.trigger.n_max,
        sigma: rep.gains.sigma,
        gamma_total_coeff: rep.gains.gamma_total_coeff,
        mean_tau,
        executions,
        gamma_monotone: true,
    })
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs every (Δ, τ_max) cell, each in its own subdirectory of `out`.
pub fn sweep(cfg: &ExperimentConfig, out: &Path, deltas: &[f64], tau_maxes: &[f64]) -> Result<Vec<SweepRow>> {
    if deltas.is_empty() || tau_maxes.is_empty() {
        return Err(Error::Config("sweep lists must be nonempty".into()));
    }
    let cells: Vec<(usize, f64, f64)> = deltas
        .iter()
        .flat_map(|&d| tau_maxes.iter().map(move |&t| (d, t)))
        .enumerate()
        .map(|(i, (d, t))| (i, d, t))
        .collect();
    let work = |&(i, delta, tau_max): &(usize, f64, f64)| {
        let name = format!("cell_{i:03}");
        let outcome = sweep_cell(cfg, delta, tau_max, &out.join(&name)).map_err(|e| e.to_string());
        SweepRow { delta, tau_max, directory: name, outcome }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start sweep workers: {e}")))?;
    let mut rows: Vec<SweepRow> = pool.install(|| cells.par_iter().map(work).collect());

    // monotonicity in τ_max at fixed Δ, in ascending τ_max order
    for i in 0..rows.len() {
        let Ok(cur) = &rows[i].outcome else { continue };
        let (d, t, g) = (rows[i].delta, rows[i].tau_max, cur.gamma_total_coeff);
        let prev = rows
            .iter()
            .filter(|r| r.delta == d && r.tau_max < t)
            .filter_map(|r| r.outcome.as_ref().ok().map(|c| (r.tau_max, c.gamma_total_coeff)))
            .max_by(|a, b| a.0.total_cmp(&b.0));
        let ok = prev.map_or(true, |(_, pg)| g >= pg);
        if let Ok(c) = &mut rows[i].outcome {
            c.gamma_monotone = ok;
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out =
        String::from("delta,tau_max,N_max,sigma,gamma_total_coeff,mean_tau_k,executions,gamma_monotone,status,directory\n");
    for r in rows {
        let _ = write!(out, "{},{},", fmt_num(r.delta), fmt_num(r.tau_max));
        match &r.outcome {
            Ok(c) => {
                let _ = write!(
                    out,
                    "{},{},{},{},{},{},ok",
                    c.n_max,
                    fmt_num(c.sigma),
                    fmt_num(c.gamma_total_coeff),
                    c.mean_tau.map(fmt_num).unwrap_or_default(),
                    c.executions.map(|n| n.to_string()).unwrap_or_default(),
                    c.gamma_monotone,
                );
            }
            Err(msg) => {
                let msg = msg.replace(['"', '\n'], " ");
                let _ = write!(out, ",,,,,,\"failed: {msg}\"");
            }
        }
        let _ = writeln!(out, ",{}", r.directory);
    }
    out
}

/// Exit 0 when at least one cell succeeded.
pub fn cmd_sweep(config: &Path, out: Option<&Path>, deltas: &[f64], tau_maxes: &[f64]) -> Result<i32> {
    let cfg = ExperimentConfig::from_path(config)?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| default_dir(&cfg));
    let rows = sweep(&cfg, &dir, deltas, tau_maxes)?;
    report::write_file(&dir.join("sweep.csv"), &sweep_csv(&rows))?;
    let ok = rows.iter().filter(|r| r.outcome.is_ok()).count();
    for r in rows.iter().filter(|r| r.outcome.is_err()) {
        if let Err(msg) = &r.outcome {
            eprintln!("selftrig: cell {} (delta={}, tau_max={}) failed: {msg}", r.directory, r.delta, r.tau_max);
        }
    }
    println!("cells={} succeeded={}", rows.len(), ok);
    if ok == 0 {
        return Err(Error::Design("every sweep cell failed".into()));
    }
    Ok(EXIT_OK)
}

pub fn cmd_feasibility(design: &Path, tau_c: f64) -> Result<i32> {
    let rep = DesignReport::from_path(design)?;
    let f = feasibility_check(rep.m, tau_c, &rep.trigger)?;
    println!(
        "execution: 1.5*(m^2+m)*tau_c = {} <= tau_min = {} : {}",
        fmt_num(f.execution_time),
        fmt_num(f.tau_min),
        if f.execution_ok { "ok" } else { "violated" }
    );
    println!(
        "sampling:  (m^2+m)*tau_c = {} <= delta = {} : {}",
        fmt_num(f.step_time),
        fmt_num(f.delta),
        if f.step_ok { "ok" } else { "violated" }
    );
    println!("{}", if f.feasible { "PASS" } else { "FAIL" });
    Ok(if f.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}
