//! Monte Carlo drivers for the estimator's asymptotic claims, and the
//! bandwidth-schedule validator.
//!
//! Every run follows the same shape: replicates execute in parallel, each
//! with its own derived seed and path; records are collected in replicate
//! order; summaries and checks are then a pure function of the records
//! (plus constants fixed before the run), so they can be recomputed from the
//! persisted CSV files.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use lldrift_core::math::normal_cdf;
use lldrift_core::{
    asymptotic_constants, derive_replicate_seed, fit_pairs, kernel_moment_sum, nw_asymptotic_constants,
    one_sample_critical_value, one_sample_ks, simulate_path, stationary_density_oracle, stream,
    symmetry_critical_value, two_sample_critical_value, two_sample_ks, BuiltinModel, DensityMethod, Kernel, Method,
    ObservedPath, PathConfig, SdeModel, StableParams, StableSampler, StationaryDensity,
};
use rayon::prelude::*;

use crate::report::{self, Check, ReplicateRecord, SummaryRow};
use crate::stats;
use crate::Error;

/// Reporting heuristic: a finite-sample quantity counts as "O(1)" when it
/// is at most this large.
pub const O1_PROXY: f64 = 10.0;

/// Significance level of every KS comparison.
pub const KS_LEVEL: f64 = 0.01;

/// Allowed ratio of the KS distance to its critical value when comparing
/// standardized errors with direct stable draws (finite-n scale mismatch).
pub const KS_SLACK: f64 = 1.5;

/// Maximal fraction of degenerate estimates before a run counts as misconfigured.
pub const MAX_DEGENERATE_FRACTION: f64 = 0.01;

/// Tail-slope window `[α - 0.3, α + 0.4]`.
pub const TAIL_WINDOW: (f64, f64) = (0.3, 0.4);

/// Seed-derivation index of the reference stable sample.
pub const REFERENCE_STREAM: u64 = u64::MAX;
/// Seed-derivation index of the long path behind a plug-in stationary density.
pub const DENSITY_STREAM: u64 = u64::MAX - 1;

/// Default length of the path behind a plug-in stationary density.
pub const DEFAULT_DENSITY_PATH: usize = 1_000_000;

/// One bandwidth schedule `(n, Δ, h)` for noise index α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub n: usize,
    pub delta: f64,
    pub h: f64,
    pub alpha: f64,
    /// The κ > α of the discretization condition.
    pub kappa: f64,
}

impl Schedule {
    pub fn new(n: usize, delta: f64, h: f64, alpha: f64, kappa: f64) -> Result<Self, Error> {
        if n < 1 {
            return Err(Error::Config("schedule needs n >= 1".into()));
        }
        for (name, v) in [("delta", delta), ("h", h)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("schedule {name} must be positive, got {v}")));
            }
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::Config(format!("schedule alpha must lie in (0, 2], got {alpha}")));
        }
        if kappa.partial_cmp(&alpha) != Some(std::cmp::Ordering::Greater) || !kappa.is_finite() {
            return Err(Error::Config(format!("kappa must exceed alpha = {alpha}, got {kappa}")));
        }
        Ok(Schedule {
            n,
            delta,
            h,
            alpha,
            kappa,
        })
    }

    /// `(nΔh)^{1-1/α}`.
    pub fn rate(&self) -> f64 {
        (self.n as f64 * self.delta * self.h).powf(1.0 - 1.0 / self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeClass {
    SchemeI,
    SchemeII,
    Both,
    Neither,
}

impl SchemeClass {
    pub fn name(self) -> &'static str {
        match self {
            SchemeClass::SchemeI => "scheme_i",
            SchemeClass::SchemeII => "scheme_ii",
            SchemeClass::Both => "both",
            SchemeClass::Neither => "neither",
        }
    }

    pub fn includes_scheme_ii(self) -> bool {
        matches!(self, SchemeClass::SchemeII | SchemeClass::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleDiagnostics {
    pub schedule: Schedule,
    pub n_delta_h: f64,
    pub rate: f64,
    pub rate_h: f64,
    pub rate_h2: f64,
    pub rate_delta_kappa: f64,
    pub class: SchemeClass,
    pub warnings: Vec<String>,
}

impl ScheduleDiagnostics {
    pub fn flag_scheme_i(&self) -> bool {
        self.rate_h > O1_PROXY
    }

    pub fn flag_scheme_ii(&self) -> bool {
        self.rate_h2 > O1_PROXY
    }

    pub fn flag_discretization(&self) -> bool {
        self.rate_delta_kappa > O1_PROXY
    }
}

/// Rate-condition diagnostics for one schedule. Never fails: a single finite
/// tuple cannot violate an asymptotic condition, so problems become warnings.
///
/// Scheme (i) needs `(nΔh)^{1-1/α} h` and scheme (ii) `(nΔh)^{1-1/α} h²`
/// to be O(1), both together with `(nΔh)^{1-1/α} Δ^{1/κ}`; "O(1)" is proxied
/// by `<= 10`.
pub fn validate_schedule(s: &Schedule) -> ScheduleDiagnostics {
    let n_delta_h = s.n as f64 * s.delta * s.h;
    let rate = s.rate();
    let d = ScheduleDiagnostics {
        schedule: *s,
        n_delta_h,
        rate,
        rate_h: rate * s.h,
        rate_h2: rate * s.h * s.h,
        rate_delta_kappa: rate * s.delta.powf(1.0 / s.kappa),
        class: SchemeClass::Neither,
        warnings: Vec::new(),
    };
    let ok_i = !d.flag_scheme_i() && !d.flag_discretization();
    let ok_ii = !d.flag_scheme_ii() && !d.flag_discretization();
    let class = match (ok_i, ok_ii) {
        (true, true) => SchemeClass::Both,
        (true, false) => SchemeClass::SchemeI,
        (false, true) => SchemeClass::SchemeII,
        (false, false) => SchemeClass::Neither,
    };
    let mut warnings = Vec::new();
    if n_delta_h < O1_PROXY {
        warnings.push(format!(
            "n*delta*h = {n_delta_h:.4} is not large (needs n*delta*h >> 1)"
        ));
    }
    if d.flag_scheme_i() {
        warnings.push(format!(
            "scheme (i) flag: rate*h = {:.4} > {O1_PROXY} (O(1) proxy)",
            d.rate_h
        ));
    }
    if d.flag_scheme_ii() {
        warnings.push(format!(
            "scheme (ii) flag: rate*h^2 = {:.4} > {O1_PROXY} (O(1) proxy)",
            d.rate_h2
        ));
    }
    if d.flag_discretization() {
        warnings.push(format!(
            "discretization flag: rate*delta^(1/kappa) = {:.4} > {O1_PROXY} (O(1) proxy)",
            d.rate_delta_kappa
        ));
    }
    if s.alpha == 1.0 {
        warnings.push("alpha = 1: rate exponent 1 - 1/alpha is 0 and μ̂(x) is inconsistent with μ(x)".into());
    } else if s.alpha < 1.0 {
        warnings.push("alpha < 1: outside the estimation theory".into());
    }
    ScheduleDiagnostics { class, warnings, ..d }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Consistency,
    Bias,
    Clt,
    Lln,
    Schedule,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Consistency,
        ExperimentKind::Bias,
        ExperimentKind::Clt,
        ExperimentKind::Lln,
        ExperimentKind::Schedule,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Consistency => "consistency",
            ExperimentKind::Bias => "bias",
            ExperimentKind::Clt => "clt",
            ExperimentKind::Lln => "lln",
            ExperimentKind::Schedule => "schedule",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        ExperimentKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown experiment kind `{s}` (expected consistency, bias, clt, lln or schedule)"
            ))
        })
    }
}

/// Everything a run needs besides its schedule(s).
#[derive(Debug, Clone)]
pub struct Setup {
    pub model: BuiltinModel,
    pub noise: StableParams,
    pub kernel: Kernel,
    pub x0: f64,
    pub burn_in: usize,
    pub master_seed: u64,
    /// Worker threads; 0 means machine parallelism. Never affects results.
    pub workers: usize,
    /// Length of the simulated path behind a plug-in density, when the model
    /// has no closed-form stationary law.
    pub density_path: usize,
}

/// A target of the law-of-large-numbers check.
#[derive(Debug, Clone, PartialEq)]
pub struct LlnTarget {
    pub method: String,
    pub target: f64,
    /// Compare absolute instead of relative error.
    pub absolute: bool,
    pub tolerance: f64,
}

/// Constants fixed before a run; together with the records they determine
/// every summary.
#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    Schedule,
    Consistency {
        x_points: Vec<f64>,
        linear: bool,
    },
    Bias {
        x_points: Vec<f64>,
        /// Kernel `K₁`; the NW dominance check applies only when nonzero.
        k1: f64,
        ll_theory: Vec<f64>,
        nw_literal: Vec<f64>,
        nw_slope: Vec<f64>,
        nw_scheme_ii: Vec<f64>,
    },
    Clt {
        x: f64,
        noise: StableParams,
        master_seed: u64,
        reference_sample_size: usize,
    },
    Lln {
        x: f64,
        targets: Vec<LlnTarget>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub schedules: Vec<Schedule>,
    pub diagnostics: Vec<ScheduleDiagnostics>,
    pub plan: Plan,
    pub replicates: usize,
    pub records: Vec<ReplicateRecord>,
    pub summaries: Vec<SummaryRow>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    fn assemble(
        kind: ExperimentKind,
        schedules: Vec<Schedule>,
        plan: Plan,
        replicates: usize,
        records: Vec<ReplicateRecord>,
        mut notes: Vec<String>,
    ) -> Result<Self, Error> {
        let diagnostics: Vec<_> = schedules.iter().map(validate_schedule).collect();
        for (i, d) in diagnostics.iter().enumerate() {
            notes.extend(d.warnings.iter().map(|w| format!("schedule {i}: {w}")));
        }
        let (summaries, checks) = summarize(&plan, &diagnostics, replicates, &records)?;
        Ok(ExperimentReport {
            kind,
            schedules,
            diagnostics,
            plan,
            replicates,
            records,
            summaries,
            checks,
            notes,
        })
    }

    /// True when every acceptance-labelled check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.acceptance).all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary(&self, schedule: Option<usize>, x: Option<f64>, method: &str, statistic: &str) -> Option<f64> {
        self.summaries
            .iter()
            .find(|s| s.schedule == schedule && s.x == x && s.method == method && s.statistic == statistic)
            .map(|s| s.value)
    }

    /// Records for one schedule, point and method, in replicate order.
    pub fn records_for<'a>(
        &'a self,
        schedule: usize,
        x: f64,
        method: &'a str,
    ) -> impl Iterator<Item = &'a ReplicateRecord> + 'a {
        self.records
            .iter()
            .filter(move |r| r.schedule == schedule && r.x == x && r.method == method)
    }

    /// Recompute summaries and checks from the in-memory records.
    pub fn verify_integrity(&self) -> Result<(), Error> {
        let (summaries, checks) = summarize(&self.plan, &self.diagnostics, self.replicates, &self.records)?;
        compare_summaries(&summaries, &self.summaries)?;
        let same = checks.len() == self.checks.len()
            && checks.iter().zip(&self.checks).all(|(a, b)| {
                a.name == b.name
                    && a.acceptance == b.acceptance
                    && a.passed == b.passed
                    && same_value(a.value, b.value)
                    && same_value(a.threshold, b.threshold)
                    && a.detail == b.detail
            });
        if !same {
            return Err(Error::Integrity("checks differ from their recomputation".into()));
        }
        Ok(())
    }

    /// Write the report files into `dir`; `config_text` is archived in the manifest.
    pub fn write(&self, dir: &Path, config_text: &str) -> Result<Vec<std::path::PathBuf>, Error> {
        report::write_report_files(
            dir,
            self.kind.name(),
            config_text,
            self.schedules.len(),
            &self.records,
            &self.summaries,
            &self.checks,
            &self.notes,
        )
    }

    /// Re-read the persisted per-replicate records from `dir`, recompute all
    /// summaries and compare them with the persisted summary file.
    pub fn verify_files(&self, dir: &Path) -> Result<(), Error> {
        let mut records = Vec::new();
        if !self.records.is_empty() {
            for s in 0..self.schedules.len() {
                records.extend(report::read_replicates(&dir.join(report::replicate_file_name(s)), s)?);
            }
        }
        if records.len() != self.records.len() {
            return Err(Error::Integrity(format!(
                "{} replicate records on disk, {} in memory",
                records.len(),
                self.records.len()
            )));
        }
        if let Some((a, _)) = records.iter().zip(&self.records).find(|(a, b)| !same_record(a, b)) {
            return Err(Error::Integrity(format!("persisted record {a:?} differs from the run")));
        }
        let (summaries, _) = summarize(&self.plan, &self.diagnostics, self.replicates, &records)?;
        let persisted = report::read_summary(&dir.join("summary.csv"))?;
        compare_summaries(&summaries, &persisted)
    }
}

fn same_value(a: f64, b: f64) -> bool {
    a == b || (a.is_nan() && b.is_nan())
}

fn same_opt(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(u), Some(v)) => same_value(u, v),
        (None, None) => true,
        _ => false,
    }
}

fn same_record(a: &ReplicateRecord, b: &ReplicateRecord) -> bool {
    a.schedule == b.schedule
        && a.replicate == b.replicate
        && a.seed == b.seed
        && same_value(a.x, b.x)
        && a.method == b.method
        && same_opt(a.estimate, b.estimate)
        && same_opt(a.error, b.error)
        && same_opt(a.std_error, b.std_error)
        && a.degenerate == b.degenerate
}

fn compare_summaries(recomputed: &[SummaryRow], reported: &[SummaryRow]) -> Result<(), Error> {
    if recomputed.len() != reported.len() {
        return Err(Error::Integrity(format!(
            "{} summary rows recomputed, {} reported",
            recomputed.len(),
            reported.len()
        )));
    }
    for (a, b) in recomputed.iter().zip(reported) {
        let key_matches = a.schedule == b.schedule
            && a.method == b.method
            && a.statistic == b.statistic
            && match (a.x, b.x) {
                (Some(u), Some(v)) => same_value(u, v),
                (None, None) => true,
                _ => false,
            };
        if !key_matches || !same_value(a.value, b.value) {
            return Err(Error::Integrity(format!(
                "summary row {a:?} does not match reported {b:?}"
            )));
        }
    }
    Ok(())
}

fn replicate_seed(master: u64, schedule: usize, replicate: usize) -> u64 {
    derive_replicate_seed(master, ((schedule as u64) << 32) | replicate as u64)
}

/// Map `0..count` in parallel, keeping index order in the output.
fn par_indexed<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>, Error>
where
    T: Send,
    F: Fn(usize) -> Result<T, Error> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(f).collect())
}

fn simulate(setup: &Setup, s: &Schedule, seed: u64) -> Result<ObservedPath, Error> {
    let cfg = PathConfig {
        x0: setup.x0,
        n: s.n,
        delta: s.delta,
        seed,
        burn_in: setup.burn_in,
    };
    Ok(simulate_path(&setup.model, &setup.noise, &cfg)?)
}

/// The closed-form stationary law when there is one, otherwise a plug-in
/// estimate from one long path at step `delta`.
pub fn stationary_density(setup: &Setup, delta: f64) -> Result<(StationaryDensity, String), Error> {
    if let Ok(d) = stationary_density_oracle(&setup.model, &setup.noise, DensityMethod::Oracle) {
        return Ok((d, "stationary density: closed form".into()));
    }
    let path = PathConfig {
        x0: setup.x0,
        n: setup.density_path,
        delta,
        seed: derive_replicate_seed(setup.master_seed, DENSITY_STREAM),
        burn_in: setup.burn_in,
    };
    let d = stationary_density_oracle(
        &setup.model,
        &setup.noise,
        DensityMethod::Simulation { path, bandwidth: None },
    )?;
    let note = format!(
        "stationary density: kernel plug-in from one path of {} steps, bandwidth {}",
        setup.density_path,
        report::format_opt(d.bandwidth())
    );
    Ok((d, note))
}

#[allow(clippy::too_many_arguments)]
fn record(
    schedule: usize,
    replicate: usize,
    seed: u64,
    x: f64,
    method: &str,
    estimate: Option<f64>,
    truth: f64,
    std_error: Option<f64>,
) -> ReplicateRecord {
    ReplicateRecord {
        schedule,
        replicate,
        seed,
        x,
        method: method.to_string(),
        estimate,
        error: estimate.map(|e| e - truth),
        std_error,
        degenerate: estimate.is_none(),
    }
}

fn check_points(x_points: &[f64]) -> Result<(), Error> {
    if x_points.is_empty() {
        return Err(Error::Config("need at least one evaluation point".into()));
    }
    if x_points.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config("evaluation points must be finite".into()));
    }
    Ok(())
}

fn check_replicates(replicates: usize) -> Result<(), Error> {
    if replicates == 0 {
        Err(Error::Config("replicates must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn check_estimation_alpha(setup: &Setup, upper_inclusive: bool) -> Result<(), Error> {
    let a = setup.noise.alpha();
    let ok = a > 1.0 && (a < 2.0 || (upper_inclusive && a == 2.0));
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "alpha = {a} outside the estimation range {}",
            if upper_inclusive { "(1, 2]" } else { "(1, 2)" }
        )))
    }
}

/// Schedule diagnostics only, no simulation.
pub fn run_schedule_report(schedules: &[Schedule]) -> Result<ExperimentReport, Error> {
    if schedules.is_empty() {
        return Err(Error::Config("need at least one schedule".into()));
    }
    ExperimentReport::assemble(
        ExperimentKind::Schedule,
        schedules.to_vec(),
        Plan::Schedule,
        0,
        Vec::new(),
        Vec::new(),
    )
}

/// Error of the local linear estimate across schedules of increasing `n`.
///
/// The acceptance metric is `sqrt(median(error²))`: under α < 2 the error
/// has infinite variance, so the plain RMSE (also reported) is dominated by
/// a few replicates. α = 2 is accepted as the Gaussian sanity case.
pub fn run_consistency(
    setup: &Setup,
    schedules: &[Schedule],
    x_points: &[f64],
    replicates: usize,
) -> Result<ExperimentReport, Error> {
    check_estimation_alpha(setup, true)?;
    check_points(x_points)?;
    check_replicates(replicates)?;
    if schedules.is_empty() {
        return Err(Error::Config("need at least one schedule".into()));
    }
    let mut notes = Vec::new();
    for w in schedules.windows(2) {
        if !(w[1].n > w[0].n && w[1].delta <= w[0].delta && w[1].h <= w[0].h) {
            notes.push("schedules are not ordered by increasing n with non-increasing delta and h".to_string());
            break;
        }
    }
    // Standardization needs the stationary density; only the closed form is used here.
    let oracle = stationary_density_oracle(&setup.model, &setup.noise, DensityMethod::Oracle).ok();
    let mut records = Vec::new();
    for (si, s) in schedules.iter().enumerate() {
        let scales: Vec<Option<(f64, f64)>> = x_points
            .iter()
            .map(|&x| {
                oracle.as_ref().and_then(|d| {
                    asymptotic_constants(&setup.model, d, &setup.noise, &setup.kernel, x, s.n, s.delta, s.h)
                        .ok()
                        .map(|c| (c.rate * c.lambda_x, c.bias_term))
                })
            })
            .collect();
        let per_rep = par_indexed(setup.workers, replicates, |r| {
            let seed = replicate_seed(setup.master_seed, si, r);
            let path = simulate(setup, s, seed)?;
            let mut out = Vec::with_capacity(x_points.len());
            for (&x, scale) in x_points.iter().zip(&scales) {
                let est = fit_pairs(path.pairs(), x, s.h, &setup.kernel, Method::LocalLinear)?;
                let truth = setup.model.mu(x);
                let std = match (est.estimate, scale) {
                    (Some(e), Some((k, bias))) => Some(k * (e - truth - bias)),
                    _ => None,
                };
                out.push(record(
                    si,
                    r,
                    seed,
                    x,
                    Method::LocalLinear.name(),
                    est.estimate,
                    truth,
                    std,
                ));
            }
            Ok(out)
        })?;
        records.extend(per_rep.into_iter().flatten());
    }
    let plan = Plan::Consistency {
        x_points: x_points.to_vec(),
        linear: setup.model.is_linear(),
    };
    ExperimentReport::assemble(
        ExperimentKind::Consistency,
        schedules.to_vec(),
        plan,
        replicates,
        records,
        notes,
    )
}

/// Local linear vs Nadaraya–Watson bias at each point, with the theoretical
/// bias terms alongside.
pub fn run_bias_comparison(
    setup: &Setup,
    schedule: &Schedule,
    x_points: &[f64],
    replicates: usize,
) -> Result<ExperimentReport, Error> {
    check_estimation_alpha(setup, true)?;
    check_points(x_points)?;
    check_replicates(replicates)?;
    let s = schedule;
    let (density, density_note) = stationary_density(setup, s.delta)?;
    let mut ll_theory = Vec::new();
    let mut nw_literal = Vec::new();
    let mut nw_slope = Vec::new();
    let mut nw_scheme_ii = Vec::new();
    for &x in x_points {
        let ll = asymptotic_constants(
            &setup.model,
            &density,
            &setup.noise,
            &setup.kernel,
            x,
            s.n,
            s.delta,
            s.h,
        )?;
        let nw = nw_asymptotic_constants(
            &setup.model,
            &density,
            &setup.noise,
            &setup.kernel,
            x,
            s.n,
            s.delta,
            s.h,
        )?;
        ll_theory.push(ll.bias_term);
        nw_literal.push(nw.bias_literal);
        nw_slope.push(nw.bias_slope);
        nw_scheme_ii.push(nw.bias_term);
    }
    let per_rep = par_indexed(setup.workers, replicates, |r| {
        let seed = replicate_seed(setup.master_seed, 0, r);
        let path = simulate(setup, s, seed)?;
        let mut out = Vec::with_capacity(2 * x_points.len());
        for &x in x_points {
            let truth = setup.model.mu(x);
            for method in [Method::LocalLinear, Method::NadarayaWatson] {
                let est = fit_pairs(path.pairs(), x, s.h, &setup.kernel, method)?;
                out.push(record(0, r, seed, x, method.name(), est.estimate, truth, None));
            }
        }
        Ok(out)
    })?;
    let plan = Plan::Bias {
        x_points: x_points.to_vec(),
        k1: setup.kernel.k1(),
        ll_theory,
        nw_literal,
        nw_slope,
        nw_scheme_ii,
    };
    let records = per_rep.into_iter().flatten().collect();
    ExperimentReport::assemble(
        ExperimentKind::Bias,
        vec![*s],
        plan,
        replicates,
        records,
        vec![density_note],
    )
}

pub const CLT_ORACLE: &str = "local_linear";
pub const CLT_PLUG_IN: &str = "local_linear_plugin";

/// Standardized local linear errors `rate·Λ(x)·(μ̂(x) - μ(x) - h²Γ_μ(x))`
/// against the stable limit law.
///
/// Two standardizations are recorded per replicate: with the population
/// `f(x)` (`local_linear`) and with the path's own kernel density estimate
/// `f̂(x) = S_{n,0}/n` (`local_linear_plugin`). Since `Λ ∝ f^{1-1/α}`, the
/// plug-in scale is `Λ·(f̂/f)^{1-1/α}`.
pub fn run_clt(
    setup: &Setup,
    schedule: &Schedule,
    x: f64,
    replicates: usize,
    reference_sample_size: usize,
) -> Result<ExperimentReport, Error> {
    check_estimation_alpha(setup, true)?;
    check_points(&[x])?;
    check_replicates(replicates)?;
    if reference_sample_size == 0 {
        return Err(Error::Config("reference_sample_size must be at least 1".into()));
    }
    let s = schedule;
    let alpha = setup.noise.alpha();
    let (density, density_note) = stationary_density(setup, s.delta)?;
    let c = asymptotic_constants(
        &setup.model,
        &density,
        &setup.noise,
        &setup.kernel,
        x,
        s.n,
        s.delta,
        s.h,
    )?;
    let mut notes = vec![
        density_note,
        format!(
            "Lambda(x) = {}, Gamma_mu(x) = {}, rate = {}, f(x) = {}",
            report::format_real(c.lambda_x),
            report::format_real(c.gamma_mu_x),
            report::format_real(c.rate),
            report::format_real(c.f_x)
        ),
    ];
    if c.sign_flag {
        notes.push("K2 - u K1 changes sign on the kernel support; |.|^alpha used in the fractional integral".into());
    }
    let d = validate_schedule(s);
    if !d.class.includes_scheme_ii() {
        notes.push(format!(
            "schedule is not in scheme (ii) ({}); run proceeds",
            d.class.name()
        ));
    }
    let scale = c.rate * c.lambda_x;
    let truth = setup.model.mu(x);
    let per_rep = par_indexed(setup.workers, replicates, |r| {
        let seed = replicate_seed(setup.master_seed, 0, r);
        let path = simulate(setup, s, seed)?;
        let est = fit_pairs(path.pairs(), x, s.h, &setup.kernel, Method::LocalLinear)?;
        let f_hat = kernel_moment_sum(&path, x, s.h, &setup.kernel, 0)?;
        let oracle_std = est.estimate.map(|e| scale * (e - truth - c.bias_term));
        let plug_std = match est.estimate {
            Some(e) if f_hat > 0.0 => Some(scale * (f_hat / c.f_x).powf(1.0 - 1.0 / alpha) * (e - truth - c.bias_term)),
            _ => None,
        };
        Ok([
            record(0, r, seed, x, CLT_ORACLE, est.estimate, truth, oracle_std),
            record(0, r, seed, x, CLT_PLUG_IN, est.estimate, truth, plug_std),
        ])
    })?;
    let plan = Plan::Clt {
        x,
        noise: setup.noise,
        master_seed: setup.master_seed,
        reference_sample_size,
    };
    let records = per_rep.into_iter().flatten().collect();
    ExperimentReport::assemble(ExperimentKind::Clt, vec![*s], plan, replicates, records, notes)
}

/// Name of the record stream holding `(1/n) Σ K_h(X_i - x)((X_i - x)/h)^k`.
pub fn moment_method(k: u32) -> String {
    format!("moment_k{k}")
}

pub const H_HAT: &str = "h_hat";

/// Kernel moment sums against `f(x) K_k`, plus the local linear
/// denominator against `K₂f² - (K₁f)²`. The per-replicate value is the
/// estimate; acceptance compares the median over replicates.
pub fn run_lln_check(
    setup: &Setup,
    schedule: &Schedule,
    x: f64,
    k_values: &[u32],
    replicates: usize,
) -> Result<ExperimentReport, Error> {
    check_estimation_alpha(setup, true)?;
    check_points(&[x])?;
    check_replicates(replicates)?;
    if k_values.is_empty() || k_values.iter().any(|&k| k > 3) {
        return Err(Error::Config(
            "k_values must be a non-empty subset of {0, 1, 2, 3}".into(),
        ));
    }
    let s = schedule;
    let (density, density_note) = stationary_density(setup, s.delta)?;
    let f = density.f(x)?;
    let kernel = &setup.kernel;
    let mut targets: Vec<LlnTarget> = k_values
        .iter()
        .map(|&k| {
            let target = f * kernel.moment(k as usize);
            let absolute = k % 2 == 1 && kernel.is_symmetric();
            LlnTarget {
                method: moment_method(k),
                target,
                absolute,
                tolerance: if absolute { 0.02 } else { 0.05 },
            }
        })
        .collect();
    targets.push(LlnTarget {
        method: H_HAT.to_string(),
        target: kernel.k2() * f * f - (kernel.k1() * f) * (kernel.k1() * f),
        absolute: false,
        tolerance: 0.10,
    });
    let per_rep = par_indexed(setup.workers, replicates, |r| {
        let seed = replicate_seed(setup.master_seed, 0, r);
        let path = simulate(setup, s, seed)?;
        let mut out = Vec::with_capacity(targets.len());
        for (i, &k) in k_values.iter().enumerate() {
            let m = kernel_moment_sum(&path, x, s.h, kernel, k)?;
            out.push(record(
                0,
                r,
                seed,
                x,
                &targets[i].method,
                Some(m),
                targets[i].target,
                None,
            ));
        }
        let ll = fit_pairs(path.pairs(), x, s.h, kernel, Method::LocalLinear)?;
        let t = targets.last().map_or(0.0, |t| t.target);
        out.push(record(0, r, seed, x, H_HAT, Some(ll.denominator), t, None));
        Ok(out)
    })?;
    let records = per_rep.into_iter().flatten().collect();
    let plan = Plan::Lln { x, targets };
    ExperimentReport::assemble(
        ExperimentKind::Lln,
        vec![*s],
        plan,
        replicates,
        records,
        vec![density_note],
    )
}

struct Group<'a> {
    schedule: usize,
    x: f64,
    method: &'a str,
    values: Vec<f64>,
    errors: Vec<f64>,
    std_errors: Vec<f64>,
    total: usize,
    degenerate: usize,
}

impl<'a> Group<'a> {
    fn collect(records: &'a [ReplicateRecord], schedule: usize, x: f64, method: &'a str) -> Self {
        let mut g = Group {
            schedule,
            x,
            method,
            values: Vec::new(),
            errors: Vec::new(),
            std_errors: Vec::new(),
            total: 0,
            degenerate: 0,
        };
        for r in records
            .iter()
            .filter(|r| r.schedule == schedule && r.x == x && r.method == method)
        {
            g.total += 1;
            if r.degenerate {
                g.degenerate += 1;
            }
            g.values.extend(r.estimate);
            g.errors.extend(r.error);
            g.std_errors.extend(r.std_error);
        }
        g
    }

    fn degenerate_fraction(&self) -> f64 {
        if self.total == 0 {
            f64::NAN
        } else {
            self.degenerate as f64 / self.total as f64
        }
    }

    fn row(&self, statistic: &str, value: Option<f64>) -> SummaryRow {
        SummaryRow {
            schedule: Some(self.schedule),
            x: Some(self.x),
            method: self.method.to_string(),
            statistic: statistic.to_string(),
            value: value.unwrap_or(f64::NAN),
        }
    }

    fn basic_rows(&self, out: &mut Vec<SummaryRow>) {
        out.push(self.row("replicates", Some(self.total as f64)));
        out.push(self.row("degenerate_fraction", Some(self.degenerate_fraction())));
        out.push(self.row("mean_error", stats::mean(&self.errors)));
        out.push(self.row("median_error", stats::median(&self.errors)));
        out.push(self.row("median_error_se", stats::median_standard_error(&self.errors)));
    }

    fn degenerate_check(&self) -> Check {
        Check::at_most(
            format!("degenerate_fraction[s{} x={} {}]", self.schedule, self.x, self.method),
            true,
            self.degenerate_fraction(),
            MAX_DEGENERATE_FRACTION,
            format!("{} of {} estimates degenerate", self.degenerate, self.total),
        )
    }
}

fn nan_to(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Summaries and checks as a function of the records.
fn summarize(
    plan: &Plan,
    diagnostics: &[ScheduleDiagnostics],
    replicates: usize,
    records: &[ReplicateRecord],
) -> Result<(Vec<SummaryRow>, Vec<Check>), Error> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (i, d) in diagnostics.iter().enumerate() {
        let row = |statistic: &str, value: f64| SummaryRow {
            schedule: Some(i),
            x: None,
            method: String::new(),
            statistic: statistic.to_string(),
            value,
        };
        rows.push(row("n", d.schedule.n as f64));
        rows.push(row("delta", d.schedule.delta));
        rows.push(row("h", d.schedule.h));
        rows.push(row("alpha", d.schedule.alpha));
        rows.push(row("kappa", d.schedule.kappa));
        rows.push(row("n_delta_h", d.n_delta_h));
        rows.push(row("rate", d.rate));
        rows.push(row("rate_h", d.rate_h));
        rows.push(row("rate_h2", d.rate_h2));
        rows.push(row("rate_delta_kappa", d.rate_delta_kappa));
        rows.push(row(
            "scheme_i",
            f64::from(matches!(d.class, SchemeClass::SchemeI | SchemeClass::Both)),
        ));
        rows.push(row("scheme_ii", f64::from(d.class.includes_scheme_ii())));
    }
    let expected = replicates * records_per_replicate(plan) * diagnostics.len();
    if records.len() != expected {
        return Err(Error::Integrity(format!(
            "{} records, expected {expected}",
            records.len()
        )));
    }

    match plan {
        Plan::Schedule => {}
        Plan::Consistency { x_points, linear } => {
            let method = Method::LocalLinear.name();
            for &x in x_points {
                let mut robust = Vec::new();
                let mut plain = Vec::new();
                for si in 0..diagnostics.len() {
                    let g = Group::collect(records, si, x, method);
                    g.basic_rows(&mut rows);
                    let r = nan_to(stats::root_median_square(&g.errors));
                    let p = nan_to(stats::rmse(&g.errors));
                    rows.push(g.row("rmse", Some(p)));
                    rows.push(g.row("root_median_sq_error", Some(r)));
                    rows.push(g.row(
                        "median_abs_error",
                        stats::median(&g.errors.iter().map(|e| e.abs()).collect::<Vec<_>>()),
                    ));
                    if !g.std_errors.is_empty() {
                        rows.push(g.row("std_error_iqr", stats::iqr(&g.std_errors)));
                    }
                    checks.push(g.degenerate_check());
                    if *linear {
                        let med = nan_to(stats::median(&g.errors));
                        let se = nan_to(stats::median_standard_error(&g.errors));
                        checks.push(Check::at_most(
                            format!("ll_bias_zero[s{si} x={x}]"),
                            false,
                            (med / se).abs(),
                            3.0,
                            "linear drift: |median error| / SE",
                        ));
                    }
                    robust.push(r);
                    plain.push(p);
                }
                if robust.len() >= 2 {
                    let worst = robust.windows(2).map(|w| w[1] / w[0]).fold(f64::NEG_INFINITY, f64::max);
                    checks.push(Check {
                        name: format!("error_decreasing[x={x}]"),
                        acceptance: true,
                        passed: worst < 1.0,
                        value: worst,
                        threshold: 1.0,
                        detail: "largest ratio of consecutive sqrt(median squared error); must be < 1".into(),
                    });
                    let ratio = robust[robust.len() - 1] / robust[0];
                    checks.push(Check {
                        name: format!("error_halved[x={x}]"),
                        acceptance: true,
                        passed: ratio < 0.5,
                        value: ratio,
                        threshold: 0.5,
                        detail: "last / first sqrt(median squared error); must be < 0.5".into(),
                    });
                    let worst_plain = plain.windows(2).map(|w| w[1] / w[0]).fold(f64::NEG_INFINITY, f64::max);
                    checks.push(Check {
                        name: format!("plain_rmse_decreasing[x={x}]"),
                        acceptance: false,
                        passed: worst_plain < 1.0,
                        value: worst_plain,
                        threshold: 1.0,
                        detail: "plain RMSE, heavy-tail sensitive, informational".into(),
                    });
                }
            }
        }
        Plan::Bias {
            x_points,
            k1,
            ll_theory,
            nw_literal,
            nw_slope,
            nw_scheme_ii,
        } => {
            let mut ll_abs = Vec::new();
            let mut nw_abs = Vec::new();
            for (i, &x) in x_points.iter().enumerate() {
                let ll = Group::collect(records, 0, x, Method::LocalLinear.name());
                let nw = Group::collect(records, 0, x, Method::NadarayaWatson.name());
                ll.basic_rows(&mut rows);
                rows.push(ll.row("theory_bias", Some(ll_theory[i])));
                nw.basic_rows(&mut rows);
                rows.push(nw.row("theory_bias_literal", Some(nw_literal[i])));
                rows.push(nw.row("theory_bias_slope", Some(nw_slope[i])));
                rows.push(nw.row("theory_bias_scheme_ii", Some(nw_scheme_ii[i])));
                checks.push(ll.degenerate_check());
                checks.push(nw.degenerate_check());

                let ll_bias = nan_to(stats::median(&ll.errors));
                let nw_bias = nan_to(stats::median(&nw.errors));
                let ll_se = nan_to(stats::median_standard_error(&ll.errors));
                ll_abs.push(ll_bias.abs());
                nw_abs.push(nw_bias.abs());
                checks.push(Check::at_most(
                    format!("ll_bias_matches_theory[x={x}]"),
                    true,
                    (ll_bias - ll_theory[i]).abs() / ll_se,
                    3.0,
                    format!(
                        "|median LL error - h^2 Gamma_mu| / SE with median error {}, theory {}, SE {}",
                        report::format_real(ll_bias),
                        report::format_real(ll_theory[i]),
                        report::format_real(ll_se)
                    ),
                ));
                if *k1 != 0.0 {
                    checks.push(Check::at_least(
                        format!("nw_bias_dominates[x={x}]"),
                        true,
                        nw_bias.abs() / ll_bias.abs(),
                        2.0,
                        "|median NW error| / |median LL error|",
                    ));
                }
            }
            let ll_med = nan_to(stats::median(&ll_abs));
            let nw_med = nan_to(stats::median(&nw_abs));
            rows.push(SummaryRow {
                schedule: Some(0),
                x: None,
                method: Method::LocalLinear.name().into(),
                statistic: "median_abs_bias_over_x".into(),
                value: ll_med,
            });
            rows.push(SummaryRow {
                schedule: Some(0),
                x: None,
                method: Method::NadarayaWatson.name().into(),
                statistic: "median_abs_bias_over_x".into(),
                value: nw_med,
            });
        }
        Plan::Clt {
            x,
            noise,
            master_seed,
            reference_sample_size,
        } => {
            let alpha = noise.alpha();
            let reference = if noise.is_gaussian() {
                Vec::new()
            } else {
                let mut v = vec![0.0; *reference_sample_size];
                StableSampler::new(*noise).fill(
                    &mut stream(derive_replicate_seed(*master_seed, REFERENCE_STREAM)),
                    &mut v,
                );
                v
            };
            for (method, acceptance) in [(CLT_ORACLE, true), (CLT_PLUG_IN, false)] {
                let g = Group::collect(records, 0, *x, method);
                g.basic_rows(&mut rows);
                checks.push(Check {
                    acceptance,
                    ..g.degenerate_check()
                });
                let z = &g.std_errors;
                if z.is_empty() {
                    continue;
                }
                let n = z.len();
                let (ks, crit, slack, reference_iqr) = if noise.is_gaussian() {
                    let ks = one_sample_ks(z, |v| normal_cdf(v, 2.0))?;
                    // IQR of N(0, 2).
                    (
                        ks,
                        one_sample_critical_value(n, KS_LEVEL),
                        1.0,
                        2.0 * 0.674_489_750_196_081_7 * 2f64.sqrt(),
                    )
                } else {
                    let ks = two_sample_ks(z, &reference)?;
                    (
                        ks,
                        two_sample_critical_value(n, reference.len(), KS_LEVEL),
                        KS_SLACK,
                        nan_to(stats::iqr(&reference)),
                    )
                };
                let negated: Vec<f64> = z.iter().map(|v| -v).collect();
                let ks_sym = two_sample_ks(z, &negated)?;
                let crit_sym = symmetry_critical_value(n, KS_LEVEL)?;
                let tail = stats::tail_slope(z);
                let ratio = nan_to(stats::iqr(z)) / reference_iqr;
                rows.push(g.row("ks_reference", Some(ks)));
                rows.push(g.row("ks_reference_critical", Some(crit)));
                rows.push(g.row("ks_symmetry", Some(ks_sym)));
                rows.push(g.row("ks_symmetry_critical", Some(crit_sym)));
                rows.push(g.row("tail_slope", tail));
                rows.push(g.row("scale_ratio", Some(ratio)));
                checks.push(Check::at_most(
                    format!("ks_reference[{method}]"),
                    acceptance,
                    ks / crit,
                    slack,
                    if noise.is_gaussian() {
                        "one-sample KS vs Normal(0, 2) / 1% critical value".to_string()
                    } else {
                        format!("two-sample KS vs {} direct draws / 1% critical value", reference.len())
                    },
                ));
                if noise.beta() == 0.0 {
                    checks.push(Check::at_most(
                        format!("ks_symmetry[{method}]"),
                        acceptance,
                        ks_sym / crit_sym,
                        1.0,
                        "KS of sample vs negated sample / exact 1% critical value of that statistic",
                    ));
                }
                if !noise.is_gaussian() {
                    let t = nan_to(tail);
                    checks.push(Check::at_least(
                        format!("tail_slope_lower[{method}]"),
                        acceptance,
                        t,
                        alpha - TAIL_WINDOW.0,
                        "log-log survival slope of |standardized error|",
                    ));
                    checks.push(Check::at_most(
                        format!("tail_slope_upper[{method}]"),
                        acceptance,
                        t,
                        alpha + TAIL_WINDOW.1,
                        "log-log survival slope of |standardized error|",
                    ));
                }
            }
        }
        Plan::Lln { x, targets } => {
            for t in targets {
                let g = Group::collect(records, 0, *x, &t.method);
                let med = nan_to(stats::median(&g.values));
                let abs = (med - t.target).abs();
                let rel = abs / t.target.abs();
                rows.push(g.row("replicates", Some(g.total as f64)));
                rows.push(g.row("median_estimate", Some(med)));
                rows.push(g.row("target", Some(t.target)));
                rows.push(g.row("abs_error", Some(abs)));
                rows.push(g.row("rel_error", Some(rel)));
                checks.push(Check::at_most(
                    format!("lln[{}]", t.method),
                    true,
                    if t.absolute { abs } else { rel },
                    t.tolerance,
                    if t.absolute {
                        "absolute error of the median over replicates"
                    } else {
                        "relative error of the median over replicates"
                    },
                ));
            }
        }
    }
    Ok((rows, checks))
}

fn records_per_replicate(plan: &Plan) -> usize {
    match plan {
        Plan::Schedule => 0,
        Plan::Consistency { x_points, .. } => x_points.len(),
        Plan::Bias { x_points, .. } => 2 * x_points.len(),
        Plan::Clt { .. } => 2,
        Plan::Lln { targets, .. } => targets.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_ignores_other_keys() {
        let rec = |x: f64, method: &str, e: Option<f64>| ReplicateRecord {
            schedule: 0,
            replicate: 0,
            seed: 1,
            x,
            method: method.into(),
            estimate: e,
            error: e,
            std_error: None,
            degenerate: e.is_none(),
        };
        let records = vec![
            rec(0.0, "a", Some(1.0)),
            rec(0.0, "a", None),
            rec(1.0, "a", Some(5.0)),
            rec(0.0, "b", Some(7.0)),
        ];
        let g = Group::collect(&records, 0, 0.0, "a");
        assert_eq!(g.total, 2);
        assert_eq!(g.errors, vec![1.0]);
        assert_eq!(g.degenerate_fraction(), 0.5);
    }
}
