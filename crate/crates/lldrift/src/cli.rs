//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when an acceptance-labelled check of an
//! experiment fails, 2 on usage, configuration or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use lldrift_core::{drift_curve, simulate_path, ObservedPath, PathConfig, SdeModel};

use crate::config::RunConfig;
use crate::experiments::{self, ExperimentKind, ExperimentReport, Setup};
use crate::io;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "lldrift",
    version,
    about = "Local linear drift estimation under alpha-stable noise"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one path and write `path.csv`.
    Simulate(CommonArgs),
    /// Estimate the drift on a grid and write `drift_curve.csv`.
    Estimate(CommonArgs),
    /// Run an experiment and write its report files.
    Experiment(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, 0 for machine parallelism (overrides `workers`).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Experiment kind: consistency, bias, clt, lln, schedule (overrides `experiment.kind`).
    #[arg(long)]
    pub kind: Option<String>,
    /// Override any configuration field, e.g. `--set noise.alpha=1.8`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl CommonArgs {
    fn load(&self) -> Result<RunConfig, Error> {
        let (text, origin) = match &self.config {
            Some(p) => (
                fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
                p.display().to_string(),
            ),
            None => (String::new(), "command line".to_string()),
        };
        let mut overrides = Vec::new();
        for o in &self.overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{o}`")))?;
            overrides.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut cfg = RunConfig::load(&text, &origin, &overrides)?;
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = Some(d.display().to_string());
        }
        if let Some(k) = &self.kind {
            cfg.experiment.get_or_insert_with(Default::default).kind = Some(k.clone());
        }
        Ok(cfg)
    }
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Error> {
    let dir = PathBuf::from(cfg.out_dir.as_deref().unwrap_or("."));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

/// Parse `args` (including the program name), run, and return the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => a.load().and_then(|c| cmd_simulate(&c, out)),
        Command::Estimate(a) => a.load().and_then(|c| cmd_estimate(&c, out)),
        Command::Experiment(a) => a.load().and_then(|c| cmd_experiment(&c, out)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn simulate_from(cfg: &RunConfig) -> Result<ObservedPath, Error> {
    let model = cfg.model()?;
    let noise = cfg.noise()?;
    let (n, delta) = cfg.path_length()?;
    let pc = PathConfig {
        x0: cfg.x0(),
        n,
        delta,
        seed: cfg.seed(),
        burn_in: cfg.burn_in(),
    };
    Ok(simulate_path(&model, &noise, &pc)?)
}

pub fn cmd_simulate(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, Error> {
    let model = cfg.model()?;
    let path = simulate_from(cfg)?;
    let dir = out_dir(cfg)?;
    let file = dir.join("path.csv");
    io::write_path(&file, &path)?;

    let (lo, hi) = path
        .x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let alpha = path.noise.alpha();
    let jump = 10.0 * model.sigma_bounds().1 * path.delta.powf(1.0 / alpha);
    let incs: Vec<f64> = path.x.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let max_inc = incs.iter().copied().fold(0.0, f64::max);
    let jumps = incs.iter().filter(|&&d| d > jump).count();
    let _ = writeln!(out, "model     {model}");
    let _ = writeln!(out, "noise     alpha={} beta={}", alpha, path.noise.beta());
    let _ = writeln!(out, "n         {}", path.n());
    let _ = writeln!(out, "delta     {}", path.delta);
    let _ = writeln!(out, "seed      {}", path.seed);
    let _ = writeln!(out, "min/max   {lo} / {hi}");
    let _ = writeln!(out, "max |dX|  {max_inc}");
    let _ = writeln!(
        out,
        "jumps     {jumps} increments above 10*sigma_max*delta^(1/alpha) = {jump}"
    );
    let _ = writeln!(out, "wrote     {}", file.display());
    Ok(EXIT_OK)
}

fn load_observations(cfg: &RunConfig) -> Result<ObservedPath, Error> {
    let e = cfg.estimate_section()?;
    match &e.path_file {
        Some(f) => {
            let noise = cfg.noise()?;
            let name = cfg
                .model
                .as_ref()
                .and_then(|m| m.name.clone())
                .unwrap_or_else(|| "observed".to_string());
            io::read_path(Path::new(f), noise, &name)
        }
        None => simulate_from(cfg),
    }
}

pub fn cmd_estimate(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, Error> {
    let e = cfg.estimate_section()?;
    if e.grid.is_empty() {
        return Err(Error::Config("missing required key `estimate.grid`".into()));
    }
    let h =
        e.h.ok_or_else(|| Error::Config("missing required key `estimate.h`".into()))?;
    let kernel = cfg.kernel()?;
    let methods = cfg.methods()?;
    let path = load_observations(cfg)?;
    let mut rows = Vec::new();
    for m in &methods {
        rows.extend(drift_curve(&path, &e.grid, h, &kernel, *m)?);
    }
    let dir = out_dir(cfg)?;
    let file = dir.join("drift_curve.csv");
    io::write_curve(&file, &rows)?;
    let degenerate = rows.iter().filter(|r| r.degenerate).count();
    let _ = writeln!(
        out,
        "{} rows ({} methods x {} points), {} degenerate; n = {}, h = {}, kernel {}",
        rows.len(),
        methods.len(),
        e.grid.len(),
        degenerate,
        path.n(),
        h,
        kernel.name()
    );
    let _ = writeln!(out, "wrote {}", file.display());
    Ok(EXIT_OK)
}

/// Build and run the experiment described by `cfg` without writing files.
pub fn build_experiment(cfg: &RunConfig) -> Result<ExperimentReport, Error> {
    let kind = cfg.kind()?;
    let schedules = cfg.schedules()?;
    if kind == ExperimentKind::Schedule {
        return experiments::run_schedule_report(&schedules);
    }
    let setup = Setup {
        model: cfg.model()?,
        noise: cfg.noise()?,
        kernel: cfg.kernel()?,
        x0: cfg.x0(),
        burn_in: cfg.burn_in(),
        master_seed: cfg.seed(),
        workers: cfg.workers.unwrap_or(0),
        density_path: cfg.density_path(),
    };
    let replicates = cfg.replicates()?;
    let x_points = cfg.x_points();
    match kind {
        ExperimentKind::Consistency => experiments::run_consistency(&setup, &schedules, &x_points, replicates),
        ExperimentKind::Bias => experiments::run_bias_comparison(&setup, &schedules[0], &x_points, replicates),
        ExperimentKind::Clt => experiments::run_clt(
            &setup,
            &schedules[0],
            x_points[0],
            replicates,
            cfg.reference_sample_size(),
        ),
        ExperimentKind::Lln => {
            experiments::run_lln_check(&setup, &schedules[0], x_points[0], &cfg.k_values(), replicates)
        }
        ExperimentKind::Schedule => unreachable!("handled above"),
    }
}

pub fn cmd_experiment(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, Error> {
    let report = build_experiment(cfg)?;
    let dir = out_dir(cfg)?;
    report.write(&dir, &cfg.snapshot()?)?;
    report.verify_integrity()?;
    report.verify_files(&dir)?;

    if report.kind == ExperimentKind::Schedule {
        let _ = writeln!(
            out,
            "{:>3} {:>9} {:>10} {:>8} {:>12} {:>10} {:>10} {:>10} {:>16}  class",
            "#", "n", "delta", "h", "n*delta*h", "rate*h", "rate*h^2", "rate", "rate*delta^1/k"
        );
        for (i, d) in report.diagnostics.iter().enumerate() {
            let s = d.schedule;
            let _ = writeln!(
                out,
                "{i:>3} {:>9} {:>10.4e} {:>8.4} {:>12.4} {:>10.4} {:>10.4} {:>10.4} {:>16.4}  {}",
                s.n,
                s.delta,
                s.h,
                d.n_delta_h,
                d.rate_h,
                d.rate_h2,
                d.rate,
                d.rate_delta_kappa,
                d.class.name()
            );
        }
        let _ = writeln!(
            out,
            "\"O(1)\" is a reporting heuristic: quantities <= {} count as bounded",
            experiments::O1_PROXY
        );
    }
    for n in &report.notes {
        let _ = writeln!(out, "note: {n}");
    }
    for c in &report.checks {
        let _ = writeln!(
            out,
            "{} {}{}: {} (threshold {}) {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            if c.acceptance { "" } else { " [info]" },
            c.value,
            c.threshold,
            c.detail
        );
    }
    let _ = writeln!(out, "report written to {}", dir.display());
    Ok(if report.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
}
