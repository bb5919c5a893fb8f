use std::path::{Path, PathBuf};

use randcover::cantor::Mode;
use randcover::{s0_analytic, s0_numeric, ShapeSequence};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, CliError};

/// Bisection tolerance used whenever a policy needs the exponent numerically.
pub const S0_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKindSpec {
    PowerLaw,
    Explicit,
    Matrices,
}

/// Shape section of a config. `values` holds per-index edge rows for explicit
/// lists and row-major `d x d` matrices for matrix sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSpec {
    pub kind: ShapeKindSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Vec<f64>>>,
}

impl ShapeSpec {
    pub fn power_law(scales: Vec<f64>, exponents: Vec<f64>) -> Self {
        Self {
            kind: ShapeKindSpec::PowerLaw,
            scales: Some(scales),
            exponents: Some(exponents),
            values: None,
        }
    }

    pub fn matrices(values: Vec<Vec<f64>>) -> Self {
        Self {
            kind: ShapeKindSpec::Matrices,
            scales: None,
            exponents: None,
            values: Some(values),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSpec {
    Strict,
    #[default]
    Relaxed,
}

impl From<ModeSpec> for Mode {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::Strict => Mode::Strict,
            ModeSpec::Relaxed => Mode::Relaxed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    /// Grid resolution index: cells of side `2^-grid_j`.
    #[serde(default = "default_grid_j")]
    pub grid_j: u32,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: u64,
    /// Number of consecutive seeds, starting at the config seed.
    #[serde(default = "default_seeds")]
    pub seeds: u64,
}

fn default_grid_j() -> u32 {
    10
}

fn default_mc_samples() -> u64 {
    100_000
}

fn default_seeds() -> u64 {
    1
}

fn default_levels() -> usize {
    1
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            grid_j: default_grid_j(),
            mc_samples: default_mc_samples(),
            seeds: default_seeds(),
        }
    }
}

/// One experiment. `seed` has no default so every run is reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub d: usize,
    pub shape: ShapeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// `"<k>*s0"`, `"s0+<c>"` or `"s0-<c>"`; used when `s` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_policy: Option<String>,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default)]
    pub mode: ModeSpec,
    pub seed: u64,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Cover index window `[N_a, N_b]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[u64; 2]>,
    /// Ascending checkpoints `N` (cover rows) or partial-sum lengths (Shepp rows).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<u64>>,
    /// Number of evenly spaced sample points for covering numbers (one-dimensional).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Energy exponents, each a number or a policy string; defaults to `0.8*s0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_s: Option<Vec<SValue>>,
}

/// A fixed exponent or a policy relative to the convergence exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SValue {
    Fixed(f64),
    Policy(String),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        // Manifests embed the config under `config`; accept both forms.
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| invalid(format!("config is not JSON: {e}")))?;
        let inner = match value.get("config") {
            Some(c) if value.get("config_hash").is_some() => c.clone(),
            _ => value,
        };
        serde_json::from_value(inner).map_err(|e| invalid(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON encoding, as lowercase hex.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn shape_sequence(&self) -> Result<ShapeSequence, CliError> {
        let spec = &self.shape;
        let seq = match spec.kind {
            ShapeKindSpec::PowerLaw => {
                let exponents = spec
                    .exponents
                    .clone()
                    .ok_or_else(|| invalid("power-law shape needs `exponents`"))?;
                let scales = spec
                    .scales
                    .clone()
                    .unwrap_or_else(|| vec![1.0; exponents.len()]);
                ShapeSequence::power_law(scales, exponents)?
            }
            ShapeKindSpec::Explicit => {
                let values = spec
                    .values
                    .clone()
                    .ok_or_else(|| invalid("explicit shape needs `values`"))?;
                ShapeSequence::explicit(self.d, values, false)?
            }
            ShapeKindSpec::Matrices => {
                let values = spec
                    .values
                    .as_ref()
                    .ok_or_else(|| invalid("matrix shape needs `values`"))?;
                ShapeSequence::from_matrices(self.d, values, false)?
            }
        };
        if seq.dim() != self.d {
            return Err(invalid(format!(
                "shape has dimension {} but d = {}",
                seq.dim(),
                self.d
            )));
        }
        Ok(seq)
    }

    /// Convergence exponent of the shape: closed form for power laws, bisection otherwise.
    pub fn s0(&self) -> Result<f64, CliError> {
        let seq = self.shape_sequence()?;
        let report = if seq.is_power_law() {
            s0_analytic(&seq)?
        } else {
            s0_numeric(&seq, S0_TOL, None)?
        };
        Ok(report.s0)
    }

    /// `s` if given, else the policy evaluated at the convergence exponent.
    pub fn resolve_s(&self) -> Result<f64, CliError> {
        match (self.s, &self.s_policy) {
            (Some(s), _) => Ok(s),
            (None, Some(p)) => apply_policy(p, self.s0()?),
            (None, None) => Err(invalid("config needs `s` or `s_policy`")),
        }
    }

    pub fn resolve_energy_s(&self) -> Result<Vec<f64>, CliError> {
        let values = self
            .energy_s
            .clone()
            .unwrap_or_else(|| vec![SValue::Policy("0.8*s0".into())]);
        let mut s0 = None;
        values
            .iter()
            .map(|v| match v {
                SValue::Fixed(x) => Ok(*x),
                SValue::Policy(p) => {
                    let s0 = match s0 {
                        Some(x) => x,
                        None => *s0.insert(self.s0()?),
                    };
                    apply_policy(p, s0)
                }
            })
            .collect()
    }

    pub fn window(&self) -> Result<(u64, u64), CliError> {
        let [a, b] = self.window.ok_or_else(|| invalid("config needs `window`"))?;
        if a == 0 || b < a {
            return Err(invalid(format!("window [{a}, {b}] is empty or starts at 0")));
        }
        Ok((a, b))
    }
}

/// Evaluates `"<k>*s0"`, `"s0+<c>"`, `"s0-<c>"` or `"s0"`.
pub fn apply_policy(policy: &str, s0: f64) -> Result<f64, CliError> {
    let p: String = policy.chars().filter(|c| !c.is_whitespace()).collect();
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| invalid(format!("bad s policy `{policy}`")))
    };
    if p == "s0" {
        Ok(s0)
    } else if let Some(k) = p.strip_suffix("*s0") {
        Ok(num(k)? * s0)
    } else if let Some(c) = p.strip_prefix("s0+") {
        Ok(s0 + num(c)?)
    } else if let Some(c) = p.strip_prefix("s0-") {
        Ok(s0 - num(c)?)
    } else {
        Err(invalid(format!("bad s policy `{policy}`")))
    }
}
