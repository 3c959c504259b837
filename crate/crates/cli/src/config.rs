use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use levystab::levy::{LevyModel, QuadratureConfig};
use levystab::measure_change::MeasureSelector;
use levystab::pricing::{CosConfig, PayoffSpec, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Calibrate,
    Bound,
    Price,
    StabilityPair,
    ParametricBound,
    Convergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorKind {
    Esscher,
    Memm,
    Fq,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectorConfig {
    pub kind: SelectorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceMethodChoice {
    Cf,
    Mc,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriceSettings {
    pub method: PriceMethodChoice,
}

impl Default for PriceSettings {
    fn default() -> Self {
        Self { method: PriceMethodChoice::Both }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySettings {
    /// Relative perturbations applied to each parameter in turn.
    pub deltas: Vec<f64>,
    /// Parameter names to sweep; all of the family's parameters if empty.
    pub params: Vec<String>,
}

impl Default for StabilitySettings {
    fn default() -> Self {
        Self {
            deltas: vec![0.0, 0.01, 0.02, 0.05, 0.10],
            params: vec![],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorChoice {
    Cumulant,
    /// Returns the true parameters; a harness check.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimationSettings {
    pub estimator: EstimatorChoice,
    pub sizes: Vec<usize>,
    pub batches: usize,
    pub dt: f64,
    /// `ε` is this quantile of the max-norm estimation error unless `eps` is set.
    pub coverage: f64,
    pub eps: Option<f64>,
}

impl Default for EstimationSettings {
    fn default() -> Self {
        Self {
            estimator: EstimatorChoice::Cumulant,
            sizes: vec![500, 2000, 8000],
            batches: 50,
            dt: 1.0 / 252.0,
            coverage: 0.95,
            eps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self { path: None, format: Format::Json }
    }
}

/// One experiment run, fully resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: LevyModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_tilde: Option<LevyModel>,
    pub selector: SelectorConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoff: Option<PayoffSpec>,
    #[serde(default = "one")]
    pub maturity: f64,
    #[serde(default)]
    pub rate: f64,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub cos: CosConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub price: PriceSettings,
    #[serde(default)]
    pub stability: StabilitySettings,
    #[serde(default)]
    pub estimation: EstimationSettings,
    #[serde(default)]
    pub output: OutputSettings,
}

fn one() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn selector(&self) -> Result<MeasureSelector, String> {
        let r = self.rate;
        match (self.selector.kind, self.selector.q) {
            (SelectorKind::Esscher, None) => Ok(MeasureSelector::esscher(r)),
            (SelectorKind::Memm, None) => Ok(MeasureSelector::memm(r)),
            (SelectorKind::Fq, Some(q)) => MeasureSelector::fq(q, r).map_err(|e| e.to_string()),
            (SelectorKind::Fq, None) => Err("selector.q is required for kind fq".into()),
            (_, Some(_)) => Err("selector.q is only allowed for kind fq".into()),
        }
    }

    pub fn model_tilde(&self) -> Result<LevyModel, String> {
        self.model_tilde
            .ok_or_else(|| format!("{:?} needs model_tilde", self.experiment))
    }

    pub fn payoff(&self) -> Result<PayoffSpec, String> {
        self.payoff
            .ok_or_else(|| format!("{:?} needs payoff", self.experiment))
    }

    /// Checks the fields each experiment requires.
    pub fn validate(&self) -> Result<(), String> {
        self.selector()?;
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(format!("maturity must be > 0, got {}", self.maturity));
        }
        if !self.rate.is_finite() {
            return Err("rate must be finite".into());
        }
        self.sim.validate().map_err(|e| e.to_string())?;
        self.quadrature.validate().map_err(|e| e.to_string())?;
        match self.experiment {
            Experiment::Bound => {
                self.model_tilde()?;
            }
            Experiment::Price | Experiment::StabilityPair => {
                self.payoff()?;
            }
            Experiment::ParametricBound | Experiment::Convergence => {
                self.payoff()?;
                let e = &self.estimation;
                if e.sizes.is_empty() || e.sizes.iter().any(|&n| n < 8) {
                    return Err("estimation.sizes must be nonempty with every n >= 8".into());
                }
                if e.batches < 2 {
                    return Err("estimation.batches must be >= 2".into());
                }
                if e.dt.is_nan() || e.dt <= 0.0 || !(0.0..=1.0).contains(&e.coverage) || e.coverage == 0.0 {
                    return Err("estimation.dt must be > 0 and coverage in (0, 1]".into());
                }
            }
            Experiment::Calibrate => {}
        }
        if self.experiment == Experiment::StabilityPair && self.stability.deltas.iter().any(|d| !d.is_finite()) {
            return Err("stability.deltas must be finite".into());
        }
        Ok(())
    }
}

/// Applies `key.path=value` to a JSON tree; `value` is parsed as JSON and
/// falls back to a plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), String> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("--set expects key=value, got '{assignment}'"))?;
    if path.is_empty() {
        return Err("--set key is empty".into());
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        if !node.is_object() {
            return Err(format!("--set {path}: '{}' is not an object", keys[..i].join(".")));
        }
        let map = node.as_object_mut().expect("checked above");
        if i + 1 == keys.len() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split always yields at least one key")
}
