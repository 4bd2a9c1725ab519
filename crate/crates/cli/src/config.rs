//! Experiment configuration.
//!
//! Values come from a JSON file (see `config.schema.json`), then command-line
//! flags override individual fields. Sweeps are written as lists in the file
//! so every point of a sweep shares the master seed and hence its demand draws.

use std::fs;
use std::path::{Path, PathBuf};

use dchoice::allocation::{build_allocation, AllocationKind};
use dchoice::metrics::SigmaRule;
use dchoice::Allocation;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_KS_THRESHOLD: f64 = 0.02;

/// A single value or a list of values to sweep over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    // lists first: an internally tagged rule would also accept a sequence
    Many(Vec<T>),
    One(T),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// A bare number is an absolute `Σ`; an object selects a rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaSpec {
    Absolute(f64),
    Rule(SigmaRule),
}

impl SigmaSpec {
    pub fn resolve(&self, n: usize) -> dchoice::Result<f64> {
        match *self {
            SigmaSpec::Absolute(value) => SigmaRule::Absolute { value }.resolve(n),
            SigmaSpec::Rule(rule) => rule.resolve(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Where a report goes; no path means stdout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

/// One explicitly sized design, for comparisons where `n` differs per design.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    pub kind: AllocationKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub d: usize,
    #[serde(default = "one")]
    pub r: usize,
}

impl DesignSpec {
    pub fn k(&self) -> usize {
        self.k.unwrap_or(self.n)
    }

    pub fn build(&self) -> dchoice::Result<Allocation> {
        build_allocation(self.kind, self.n, self.k(), self.d, self.r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSection {
    pub k: usize,
    pub d: usize,
    #[serde(default = "default_ks")]
    pub ks_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<OneOrMany<AllocationKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<OneOrMany<usize>>,
    #[serde(default = "one")]
    pub r: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub designs: Vec<DesignSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<OneOrMany<SigmaSpec>>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<OutputSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_checks: Option<LimitSection>,
}

fn one() -> usize {
    1
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_ks() -> f64 {
    DEFAULT_KS_THRESHOLD
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: None,
            n: None,
            k: None,
            d: None,
            r: 1,
            designs: Vec::new(),
            sigma: None,
            trials: DEFAULT_TRIALS,
            master_seed: 0,
            outputs: Vec::new(),
            limit_checks: None,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// A resolved simulation point.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub design: DesignSpec,
    pub sigma: f64,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> CliResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(path, e.into_inner())
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_json_str(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.master_seed = seed;
        }
        if let Some(trials) = o.trials {
            self.trials = trials;
        }
        match (&o.out, o.format) {
            (Some(path), format) => {
                let format = format.unwrap_or_else(|| format_from_extension(path));
                self.outputs = vec![OutputSpec { format, path: Some(path.clone()) }];
            }
            (None, Some(format)) => self.outputs = vec![OutputSpec { format, path: None }],
            (None, None) => {}
        }
    }

    /// Outputs to write, defaulting to `default` on stdout.
    pub fn outputs_or(&self, default: Format) -> Vec<OutputSpec> {
        if self.outputs.is_empty() {
            vec![OutputSpec { format: default, path: None }]
        } else {
            self.outputs.clone()
        }
    }

    pub fn validate_trials(&self) -> CliResult<()> {
        if self.trials == 0 {
            return Err(CliError::config("trials", "must be at least 1"));
        }
        Ok(())
    }

    /// Designs in sweep order: explicit `designs` first, else `kind × d`.
    pub fn designs(&self) -> CliResult<Vec<DesignSpec>> {
        let swept = self.kind.is_some() || self.d.is_some() || self.n.is_some();
        if !self.designs.is_empty() {
            if swept {
                return Err(CliError::config(
                    "designs",
                    "give either `designs` or `kind`/`n`/`d`, not both",
                ));
            }
            return Ok(self.designs.clone());
        }
        let kinds = self.kind.as_ref().ok_or_else(|| CliError::config("kind", "missing"))?.to_vec();
        let n = self.n.ok_or_else(|| CliError::config("n", "missing"))?;
        let ds = self.d.as_ref().ok_or_else(|| CliError::config("d", "missing"))?.to_vec();
        if kinds.is_empty() {
            return Err(CliError::config("kind", "empty list"));
        }
        if ds.is_empty() {
            return Err(CliError::config("d", "empty list"));
        }
        let mut out = Vec::with_capacity(kinds.len() * ds.len());
        for &kind in &kinds {
            for &d in &ds {
                out.push(DesignSpec { kind, n, k: self.k, d, r: self.r });
            }
        }
        Ok(out)
    }

    pub fn sigmas(&self) -> CliResult<Vec<SigmaSpec>> {
        let s = self.sigma.as_ref().ok_or_else(|| CliError::config("sigma", "missing"))?.to_vec();
        if s.is_empty() {
            return Err(CliError::config("sigma", "empty list"));
        }
        Ok(s)
    }

    /// Cross product of designs and loads, with every `Σ` resolved.
    pub fn points(&self) -> CliResult<Vec<Point>> {
        let designs = self.designs()?;
        let sigmas = self.sigmas()?;
        let mut out = Vec::new();
        for design in designs {
            for (i, spec) in sigmas.iter().enumerate() {
                let sigma = spec.resolve(design.n).map_err(|e| {
                    let path = if matches!(self.sigma, Some(OneOrMany::Many(_))) {
                        format!("sigma[{i}]")
                    } else {
                        "sigma".to_string()
                    };
                    CliError::config(path, e)
                })?;
                out.push(Point { design: design.clone(), sigma });
            }
        }
        Ok(out)
    }
}

fn format_from_extension(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    }
}
