//! Run configuration: a JSON document whose keys mirror the command-line
//! flags. Flags override the file, and unset keys fall back to defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rydfrag_core::basis::{BasisState, ChainParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Which Hamiltonian drives the dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Full Rydberg Hamiltonian with van der Waals tails.
    Rydberg,
    /// Constrained PXP Hamiltonian.
    Dpxp,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Rydberg => "rydberg",
            Model::Dpxp => "dpxp",
        })
    }
}

/// Initial density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialState {
    Basis(BasisState),
    /// `𝕀 / 2^L`.
    Mixed,
}

impl InitialState {
    pub fn label(&self) -> String {
        match self {
            InitialState::Basis(s) => s.to_string(),
            InitialState::Mixed => "mixed".into(),
        }
    }
}

impl FromStr for InitialState {
    type Err = rydfrag_core::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "mixed" {
            Ok(InitialState::Mixed)
        } else {
            s.parse().map(InitialState::Basis)
        }
    }
}

/// Every key is optional so that a file and the flags can be layered.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<Model>,
    pub length: Option<usize>,
    pub omega: Option<f64>,
    pub v: Option<f64>,
    pub gamma: Option<f64>,
    pub range: Option<usize>,
    pub initial: Option<String>,
    pub t_max: Option<f64>,
    pub points: Option<usize>,
    pub dt: Option<f64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::ConfigParse {
            path: origin.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    /// Keys set in `overrides` win.
    pub fn merged(self, overrides: ConfigFile) -> ConfigFile {
        ConfigFile {
            model: overrides.model.or(self.model),
            length: overrides.length.or(self.length),
            omega: overrides.omega.or(self.omega),
            v: overrides.v.or(self.v),
            gamma: overrides.gamma.or(self.gamma),
            range: overrides.range.or(self.range),
            initial: overrides.initial.or(self.initial),
            t_max: overrides.t_max.or(self.t_max),
            points: overrides.points.or(self.points),
            dt: overrides.dt.or(self.dt),
            jobs: overrides.jobs.or(self.jobs),
            out: overrides.out.or(self.out),
        }
    }

    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let defaults = ChainParams::default();
        let chain = ChainParams {
            length: self.length.unwrap_or(defaults.length),
            omega: self.omega.unwrap_or(defaults.omega),
            v: self.v.unwrap_or(defaults.v),
            gamma: self.gamma.unwrap_or(defaults.gamma),
            range: self.range.unwrap_or(defaults.range),
        };
        chain.validate().map_err(|e| match e {
            rydfrag_core::Error::InvalidParameter { field, reason } => CliError::Field { field, reason },
            other => CliError::Core(other),
        })?;
        let initial = match &self.initial {
            None => InitialState::Basis(BasisState::new(0, chain.length)?),
            Some(text) => text
                .parse::<InitialState>()
                .map_err(|e| CliError::Field { field: "initial", reason: e.to_string() })?,
        };
        if let InitialState::Basis(s) = initial {
            if s.len() != chain.length {
                return Err(CliError::Field {
                    field: "initial",
                    reason: format!("{} has {} sites but length is {}", s, s.len(), chain.length),
                });
            }
        }
        let t_max = self.t_max.unwrap_or(50.0);
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(CliError::Field { field: "t_max", reason: format!("must be positive, got {t_max}") });
        }
        let points = self.points.unwrap_or(101);
        if points < 2 {
            return Err(CliError::Field { field: "points", reason: format!("must be at least 2, got {points}") });
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(CliError::Field { field: "dt", reason: format!("must be positive, got {dt}") });
            }
        }
        let jobs = self.jobs.unwrap_or(1);
        if jobs == 0 {
            return Err(CliError::Field { field: "jobs", reason: "must be at least 1".into() });
        }
        Ok(RunConfig {
            model: self.model.unwrap_or(Model::Rydberg),
            chain,
            initial,
            t_max,
            points,
            dt: self.dt,
            jobs,
            out: self.out.unwrap_or_else(|| PathBuf::from(".")),
        })
    }
}

/// Validated settings of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub chain: ChainParams,
    pub initial: InitialState,
    pub t_max: f64,
    pub points: usize,
    pub dt: Option<f64>,
    pub jobs: usize,
    pub out: PathBuf,
}
