use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, TAU};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::representations::{BruteForceLimits, PlateauSpec, VacuumProfile, DEFAULT_MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    Infinity,
    Berezin,
    ReducibleBrute,
    ReducibleLimit,
    SingleMode,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 5] = [
        ScenarioName::Infinity,
        ScenarioName::Berezin,
        ScenarioName::ReducibleBrute,
        ScenarioName::ReducibleLimit,
        ScenarioName::SingleMode,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::Infinity => "infinity",
            ScenarioName::Berezin => "berezin",
            ScenarioName::ReducibleBrute => "reducible-brute",
            ScenarioName::ReducibleLimit => "reducible-limit",
            ScenarioName::SingleMode => "single-mode",
        }
    }

    /// Oscillator counts used when the config does not set `N`.
    fn default_oscillators(&self) -> Vec<u64> {
        match self {
            ScenarioName::ReducibleBrute => vec![1, 2, 3],
            ScenarioName::ReducibleLimit => vec![100, 1_000, 10_000],
            ScenarioName::SingleMode => vec![1, 2, 3, 4],
            ScenarioName::Infinity | ScenarioName::Berezin => vec![],
        }
    }
}

impl FromStr for ScenarioName {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = Self::ALL.iter().map(|n| n.as_str()).collect();
                LabError::Config(format!("unknown scenario '{s}' (known: {})", known.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(u64),
    Many(Vec<u64>),
}

impl OneOrMany {
    pub fn to_vec(&self) -> Vec<u64> {
        match self {
            OneOrMany::One(n) => vec![*n],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileSpec {
    Uniform {
        #[serde(default = "default_label_count")]
        count: usize,
    },
    Plateau {
        count: usize,
        plateau_start: usize,
        plateau_end: usize,
        rolloff: f64,
    },
}

fn default_label_count() -> usize {
    2
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec::Uniform { count: 2 }
    }
}

impl ProfileSpec {
    pub fn build(&self) -> Result<VacuumProfile> {
        match *self {
            ProfileSpec::Uniform { count } => VacuumProfile::uniform(count),
            ProfileSpec::Plateau {
                count,
                plateau_start,
                plateau_end,
                rolloff,
            } => VacuumProfile::plateau(&PlateauSpec {
                count,
                plateau_start,
                plateau_end,
                rolloff,
            }),
        }
    }
}

/// Named tolerances and thresholds with their defaults. Config files may
/// override any of these by name.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("ccr", 1e-12),
    ("coherence", 1e-10),
    ("commutator", 1e-12),
    ("concurrence_bell", 1e-10),
    ("concurrence_curve", 1e-8),
    ("conservation", 1e-10),
    ("entangled_min", 0.1),
    ("entropy", 1e-12),
    ("limit_distance", 0.02),
    ("limit_identity", 1e-12),
    ("locality", 1e-10),
    ("nonproduct_min", 1e-3),
    ("norm", 1e-10),
    ("reducible_distance", 1e-8),
    ("rho_distance", 1e-10),
    ("schmidt", 1e-12),
    ("spectral", 1e-10),
    ("weights", 1e-12),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub oscillators: Option<OneOrMany>,
    #[serde(default)]
    pub profile: ProfileSpec,
    /// Profile labels coupled to atoms 1 and 2; defaults to the first two.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<String>>,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_n_max() -> usize {
    1
}
fn default_d() -> usize {
    2
}
fn default_cutoff() -> usize {
    1
}
fn default_max_dim() -> usize {
    DEFAULT_MAX_DIM
}

pub fn default_times() -> Vec<f64> {
    vec![0.0, FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8, FRAC_PI_2]
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            n_max: default_n_max(),
            d: default_d(),
            cutoff: default_cutoff(),
            oscillators: None,
            profile: ProfileSpec::default(),
            modes: None,
            times: default_times(),
            tolerances: BTreeMap::new(),
            seed: 0,
            max_dim: default_max_dim(),
            output_dir: None,
        }
    }
}

impl ScenarioConfig {
    pub fn for_scenario(name: ScenarioName) -> Self {
        Self {
            scenario: Some(name.as_str().to_string()),
            ..Self::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.is_empty() {
            return Err(LabError::Config("time grid is empty".into()));
        }
        if let Some(t) = self.times.iter().find(|t| !(0.0..=TAU).contains(*t)) {
            return Err(LabError::Config(format!("time {t} outside [0, 2π]")));
        }
        for (name, value) in &self.tolerances {
            if !DEFAULT_TOLERANCES.iter().any(|(n, _)| n == name) {
                return Err(LabError::Config(format!("unknown tolerance '{name}'")));
            }
            if !(value.is_finite() && *value > 0.0) {
                return Err(LabError::Config(format!("tolerance '{name}' = {value} must be positive")));
            }
        }
        if let Some(n) = self.oscillators.as_ref().map(OneOrMany::to_vec) {
            if n.is_empty() || n.contains(&0) {
                return Err(LabError::Config("N values must be a nonempty list of positive integers".into()));
            }
        }
        if let Some(name) = &self.scenario {
            ScenarioName::from_str(name)?;
        }
        Ok(())
    }

    pub fn scenario_name(&self) -> Result<ScenarioName> {
        match &self.scenario {
            Some(s) => s.parse(),
            None => Err(LabError::Config("no scenario named in config".into())),
        }
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            DEFAULT_TOLERANCES
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| *v)
                .unwrap_or_else(|| panic!("no default for tolerance '{name}'"))
        })
    }

    pub fn oscillator_counts(&self, scenario: ScenarioName) -> Vec<u64> {
        self.oscillators
            .as_ref()
            .map(OneOrMany::to_vec)
            .unwrap_or_else(|| scenario.default_oscillators())
    }

    pub fn limits(&self) -> BruteForceLimits {
        BruteForceLimits {
            max_dim: self.max_dim,
        }
    }

    /// Selected profile labels, defaulting to the first `count` labels.
    pub fn selected_modes(&self, profile: &VacuumProfile, count: usize) -> Result<Vec<String>> {
        let modes: Vec<String> = match &self.modes {
            Some(m) => m.clone(),
            None => profile.labels().iter().take(count).cloned().collect(),
        };
        if modes.len() < count {
            return Err(LabError::Config(format!(
                "need {count} modes, profile/config provides {}",
                modes.len()
            )));
        }
        for m in &modes {
            profile.index_of(m)?;
        }
        Ok(modes)
    }
}
