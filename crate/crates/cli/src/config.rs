//! Run configuration: file defaults, then command-line overrides.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use collatz_transfer::collatz::{DEFAULT_ORBIT_BUDGET, DEFAULT_TREE_BUDGET};
use collatz_transfer::ergodic::HcBudget;
use collatz_transfer::exact_norm::DEFAULT_N_MAX;
use collatz_transfer::{Error, Result, WeightDescriptor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(default)]
pub struct Budgets {
    pub tree_nodes: usize,
    pub orbit_steps: usize,
    pub n_max: usize,
    pub max_shift: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            tree_nodes: DEFAULT_TREE_BUDGET,
            orbit_steps: DEFAULT_ORBIT_BUDGET,
            n_max: DEFAULT_N_MAX,
            max_shift: HcBudget::default().max_shift,
        }
    }
}

impl Budgets {
    /// Every budget times `k`, never below 1.
    pub fn scaled(self, k: f64) -> Self {
        let s = |x: usize| ((x as f64 * k).floor() as usize).max(1);
        Budgets {
            tree_nodes: s(self.tree_nodes),
            orbit_steps: s(self.orbit_steps),
            n_max: s(self.n_max),
            max_shift: s(self.max_shift as usize) as u64,
        }
    }

    pub fn hc(&self) -> HcBudget {
        HcBudget {
            max_shift: self.max_shift,
            orbit_steps: self.orbit_steps,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub weight: WeightDescriptor,
    pub budgets: Budgets,
    pub format: Format,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            weight: WeightDescriptor::classic(),
            budgets: Budgets::default(),
            format: Format::Json,
            seed: 1000,
        }
    }
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    weight: Option<Value>,
    budgets: Option<Budgets>,
    format: Option<Format>,
    seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let Some(path) = path else {
            return Ok(cfg);
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))?;
        let file: ConfigFile =
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))?;
        if let Some(w) = file.weight {
            cfg.weight = match &w {
                Value::String(s) => parse_weight(s)?,
                other => WeightDescriptor::from_json(other)?,
            };
        }
        if let Some(b) = file.budgets {
            cfg.budgets = b;
        }
        if let Some(f) = file.format {
            cfg.format = f;
        }
        if let Some(s) = file.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

/// A preset name (`bergman`), inline JSON, or a path to a JSON file.
pub fn parse_weight(s: &str) -> Result<WeightDescriptor> {
    let t = s.trim();
    match t {
        "bergman" | "classic" | "classic_bergman" => return Ok(WeightDescriptor::classic()),
        _ => {}
    }
    let text = if t.starts_with('{') {
        t.to_string()
    } else {
        std::fs::read_to_string(t).map_err(|_| {
            Error::InvalidInput(format!("weight {t:?} is not a preset, JSON object or readable file"))
        })?
    };
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("weight: {e}")))?;
    WeightDescriptor::from_json(&v)
}
