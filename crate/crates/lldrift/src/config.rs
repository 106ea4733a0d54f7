//! TOML run configuration.
//!
//! ```toml
//! seed = 7
//! kernel = "epanechnikov"
//!
//! [model]
//! name = "ou_linear"
//! params = { lambda = 1.0, sigma = 1.0 }
//!
//! [noise]
//! alpha = 1.5
//! beta = 0.0
//!
//! [simulate]
//! n = 1000
//! delta = 0.01
//!
//! [experiment]
//! kind = "lln"
//! replicates = 20
//! schedules = [{ n = 100000, delta = 0.01, h = 0.3 }]
//! ```
//!
//! Any field can be overridden from the command line with
//! `--set <dotted.key>=<toml value>`, e.g. `--set noise.alpha=1.8`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use lldrift_core::simulate::DEFAULT_BURN_IN;
use lldrift_core::{builtin_model, BuiltinModel, Kernel, Method, StableParams};

use crate::experiments::{ExperimentKind, Schedule, DEFAULT_DENSITY_PATH};
use crate::Error;

pub const DEFAULT_KERNEL: &str = "epanechnikov";
/// `κ = α + DEFAULT_KAPPA_MARGIN` unless `experiment.kappa` is given.
pub const DEFAULT_KAPPA_MARGIN: f64 = 0.5;
pub const DEFAULT_REFERENCE_SAMPLE: usize = 100_000;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    /// Read observations from this `i,t,x` file instead of simulating.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path_file: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Defaults to both methods.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub methods: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub n: usize,
    pub delta: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x_points: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedules: Vec<ScheduleConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k_values: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_sample_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_path: Option<usize>,
}

fn missing(key: &str) -> Error {
    Error::Config(format!("missing required key `{key}`"))
}

fn parse_table(text: &str, origin: &str) -> Result<toml::Table, Error> {
    // Typed parse first: its errors carry line, column and field names.
    toml::from_str::<RunConfig>(text).map_err(|e| Error::Config(format!("{origin}: {e}")))?;
    text.parse::<toml::Table>()
        .map_err(|e| Error::Config(format!("{origin}: {e}")))
}

/// Set `dotted.key` in `table` to `raw`, parsed as a TOML value (bare words
/// that are not valid TOML become strings).
pub fn apply_override(table: &mut toml::Table, key: &str, raw: &str) -> Result<(), Error> {
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("invalid override key `{key}`")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{p}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        Self::load(text, "config", &[])
    }

    /// Parse `text` and apply `key=value` overrides in order.
    pub fn load(text: &str, origin: &str, overrides: &[(String, String)]) -> Result<Self, Error> {
        let mut table = parse_table(text, origin)?;
        for (k, v) in overrides {
            apply_override(&mut table, k, v)?;
        }
        RunConfig::deserialize(toml::Value::Table(table)).map_err(|e| Error::Config(format!("after overrides: {e}")))
    }

    pub fn to_toml(&self) -> Result<String, Error> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize configuration: {e}")))
    }

    /// The configuration with execution-only settings (`workers`, `out_dir`)
    /// removed: these never change results and are kept out of manifests.
    pub fn snapshot(&self) -> Result<String, Error> {
        let mut c = self.clone();
        c.workers = None;
        c.out_dir = None;
        c.to_toml()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn model(&self) -> Result<BuiltinModel, Error> {
        let m = self.model.as_ref().ok_or_else(|| missing("model.name"))?;
        let name = m.name.as_deref().ok_or_else(|| missing("model.name"))?;
        Ok(builtin_model(name, m.params.iter().map(|(k, v)| (k.as_str(), *v)))?)
    }

    pub fn noise(&self) -> Result<StableParams, Error> {
        let n = self.noise.as_ref().ok_or_else(|| missing("noise.alpha"))?;
        let alpha = n.alpha.ok_or_else(|| missing("noise.alpha"))?;
        StableParams::new(alpha, n.beta.unwrap_or(0.0)).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn kernel(&self) -> Result<Kernel, Error> {
        Ok(Kernel::builtin(self.kernel.as_deref().unwrap_or(DEFAULT_KERNEL))?)
    }

    fn simulate_section(&self) -> SimulateConfig {
        self.simulate.clone().unwrap_or_default()
    }

    pub fn x0(&self) -> f64 {
        self.simulate_section().x0.unwrap_or(0.0)
    }

    pub fn burn_in(&self) -> usize {
        self.simulate_section().burn_in.unwrap_or(DEFAULT_BURN_IN)
    }

    pub fn path_length(&self) -> Result<(usize, f64), Error> {
        let s = self.simulate_section();
        Ok((
            s.n.ok_or_else(|| missing("simulate.n"))?,
            s.delta.ok_or_else(|| missing("simulate.delta"))?,
        ))
    }

    pub fn estimate_section(&self) -> Result<&EstimateConfig, Error> {
        self.estimate.as_ref().ok_or_else(|| missing("estimate"))
    }

    pub fn methods(&self) -> Result<Vec<Method>, Error> {
        let e = self.estimate_section()?;
        if e.methods.is_empty() {
            return Ok(vec![Method::LocalLinear, Method::NadarayaWatson]);
        }
        e.methods.iter().map(|m| m.parse().map_err(Error::from)).collect()
    }

    fn experiment_section(&self) -> Result<&ExperimentConfig, Error> {
        self.experiment.as_ref().ok_or_else(|| missing("experiment.kind"))
    }

    pub fn kind(&self) -> Result<ExperimentKind, Error> {
        self.experiment_section()?
            .kind
            .as_deref()
            .ok_or_else(|| missing("experiment.kind"))?
            .parse()
    }

    pub fn replicates(&self) -> Result<usize, Error> {
        self.experiment_section()?
            .replicates
            .ok_or_else(|| missing("experiment.replicates"))
    }

    pub fn x_points(&self) -> Vec<f64> {
        match self.experiment.as_ref() {
            Some(e) if !e.x_points.is_empty() => e.x_points.clone(),
            _ => vec![0.0],
        }
    }

    pub fn k_values(&self) -> Vec<u32> {
        match self.experiment.as_ref() {
            Some(e) if !e.k_values.is_empty() => e.k_values.clone(),
            _ => vec![0, 1, 2],
        }
    }

    pub fn reference_sample_size(&self) -> usize {
        self.experiment
            .as_ref()
            .and_then(|e| e.reference_sample_size)
            .unwrap_or(DEFAULT_REFERENCE_SAMPLE)
    }

    pub fn density_path(&self) -> usize {
        self.experiment
            .as_ref()
            .and_then(|e| e.density_path)
            .unwrap_or(DEFAULT_DENSITY_PATH)
    }

    /// Schedules with α from `noise.alpha` and κ from `experiment.kappa`
    /// (default α + 0.5).
    pub fn schedules(&self) -> Result<Vec<Schedule>, Error> {
        let e = self.experiment_section()?;
        if e.schedules.is_empty() {
            return Err(missing("experiment.schedules"));
        }
        let alpha = self.noise()?.alpha();
        let kappa = e.kappa.unwrap_or(alpha + DEFAULT_KAPPA_MARGIN);
        e.schedules
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Schedule::new(s.n, s.delta, s.h, alpha, kappa)
                    .map_err(|err| Error::Config(format!("experiment.schedules[{i}]: {err}")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 11
kernel = "triangular"

[model]
name = "tanh_drift"
params = { a = 2.0 }

[noise]
alpha = 1.7
beta = 0.25

[experiment]
kind = "bias"
replicates = 3
x_points = [-0.5, 0.125]
schedules = [{ n = 100, delta = 0.1, h = 0.5 }]
"#;

    #[test]
    fn round_trips_through_toml() {
        let c = RunConfig::from_toml(SAMPLE).unwrap();
        let again = RunConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.kind().unwrap(), ExperimentKind::Bias);
        assert_eq!(c.noise().unwrap().beta(), 0.25);
    }

    #[test]
    fn overrides_replace_and_create_fields() {
        let o = vec![
            ("noise.alpha".to_string(), "1.9".to_string()),
            ("simulate.n".to_string(), "50".to_string()),
            ("model.name".to_string(), "ou_linear".to_string()),
            ("model.params".to_string(), "{}".to_string()),
        ];
        let c = RunConfig::load(SAMPLE, "sample", &o).unwrap();
        assert_eq!(c.noise().unwrap().alpha(), 1.9);
        assert_eq!(c.simulate.unwrap().n, Some(50));
        assert_eq!(c.model.unwrap().name.as_deref(), Some("ou_linear"));
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let err = RunConfig::from_toml("[model]\nparams = { lambda = 1.0 }\n")
            .unwrap()
            .model()
            .unwrap_err();
        assert!(err.to_string().contains("model.name"), "{err}");
        let err = RunConfig::from_toml("seed = 1\n[noise]\nalpha = \n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = RunConfig::from_toml("[noise]\nalfa = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("alfa"), "{err}");
    }
}
