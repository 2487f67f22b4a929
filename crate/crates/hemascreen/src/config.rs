//! Run configuration: a JSON file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hemascreen_core::models::ModelSpec;
use hemascreen_core::Location;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CohortChoice {
    Community,
    RegularWard,
    /// Community and regular ward together.
    AllModeled,
}

impl CohortChoice {
    pub const ALL: [CohortChoice; 3] = [CohortChoice::Community, CohortChoice::RegularWard, CohortChoice::AllModeled];

    pub fn name(self) -> &'static str {
        match self {
            CohortChoice::Community => "community",
            CohortChoice::RegularWard => "regular-ward",
            CohortChoice::AllModeled => "all-modeled",
        }
    }

    pub fn locations(self) -> &'static [Location] {
        match self {
            CohortChoice::Community => &[Location::Community],
            CohortChoice::RegularWard => &[Location::RegularWard],
            CohortChoice::AllModeled => &[Location::Community, Location::RegularWard],
        }
    }
}

impl fmt::Display for CohortChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CohortChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        CohortChoice::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown cohort {s:?} (expected community, regular-ward or all-modeled)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    /// Column mapping JSON; detected from the header when unset.
    pub mapping: Option<PathBuf>,
    pub cohort: Option<CohortChoice>,
    /// Short model names; empty means the command's default set.
    pub models: Vec<String>,
    /// Overrides per family name (`ann`, `rf`, `glmnet`), merged into the defaults.
    pub hyperparameters: BTreeMap<String, Value>,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub smote: bool,
    pub out: PathBuf,
    pub plots: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: None,
            mapping: None,
            cohort: None,
            models: Vec::new(),
            hyperparameters: BTreeMap::new(),
            folds: 10,
            repeats: 1,
            seed: 42,
            smote: false,
            out: PathBuf::from("hemascreen-out"),
            plots: true,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.repeats < 1 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        for m in &self.models {
            if !ModelSpec::names().contains(&m.as_str()) {
                return Err(Error::Config(format!(
                    "unknown model {m:?} (expected one of {})",
                    ModelSpec::names().join(", ")
                )));
            }
        }
        for k in self.hyperparameters.keys() {
            if !["ann", "rf", "glmnet"].contains(&k.as_str()) {
                return Err(Error::Config(format!("hyperparameters for unknown family {k:?}")));
            }
        }
        Ok(())
    }

    pub fn data_path(&self) -> Result<&Path> {
        self.data
            .as_deref()
            .ok_or_else(|| Error::Config("no data file given (use --data or HEMASCREEN_DATA)".into()))
    }

    /// Model names to run, or `default` when none were requested.
    pub fn model_names<'a>(&'a self, default: &[&'a str]) -> Vec<&'a str> {
        if self.models.is_empty() {
            default.to_vec()
        } else {
            self.models.iter().map(String::as_str).collect()
        }
    }

    /// Parses a short model name and applies any overrides for its family.
    pub fn model_spec(&self, name: &str) -> Result<ModelSpec> {
        let spec: ModelSpec = name.parse().map_err(|_| Error::Config(format!("unknown model {name:?}")))?;
        let Some(overrides) = self.hyperparameters.get(name) else { return Ok(spec) };
        let bad = |e: serde_json::Error| Error::Config(format!("hyperparameters for {name}: {e}"));
        Ok(match spec {
            ModelSpec::Ann(_) => ModelSpec::Ann(serde_json::from_value(overrides.clone()).map_err(bad)?),
            ModelSpec::RandomForest(_) => ModelSpec::RandomForest(serde_json::from_value(overrides.clone()).map_err(bad)?),
            ModelSpec::ElasticNet(_) => ModelSpec::ElasticNet(serde_json::from_value(overrides.clone()).map_err(bad)?),
            s @ ModelSpec::DerivedScore { .. } => s,
        })
    }
}
