use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use starkskin_core::spectrum::Branch;
use starkskin_core::transfer::ConvergenceCase;
use starkskin_core::Spec;

use crate::registry;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config at {field}: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Machine-readable form printed on stderr.
    pub fn to_json(&self) -> serde_json::Value {
        let (kind, field) = match self {
            Self::Io { .. } => ("io", None),
            Self::Parse(_) => ("parse", None),
            Self::Invalid { field, .. } => ("invalid", Some(field.clone())),
        };
        serde_json::json!({ "error": kind, "field": field, "message": self.to_string() })
    }
}

/// Inclusive scan grid: an explicit list or `start..=stop` in steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::Values(v) => v.clone(),
            Self::Range { start, stop, step } => {
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|k| start + step * k as f64).collect()
            }
        }
    }

    fn validate(&self, field: &str) -> Result<(), ConfigError> {
        match self {
            Self::Values(v) if v.is_empty() => Err(ConfigError::invalid(field, "grid is empty")),
            Self::Values(v) if v.iter().any(|x| !x.is_finite()) => Err(ConfigError::invalid(field, "non-finite grid value")),
            Self::Range { start, stop, step } if !(step.is_finite() && *step > 0.0 && start <= stop) => {
                Err(ConfigError::invalid(field, "range needs start <= stop and step > 0"))
            }
            _ => Ok(()),
        }
    }
}

/// Which eigenstates a `modes` experiment analyses. Indices refer to the
/// canonical eigenvalue order (ascending Re E, then descending Im E), from 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "by", rename_all = "kebab-case")]
pub enum ModeSelection {
    Indices { indices: Vec<usize> },
    /// Seeded random draw without replacement.
    Sample {
        count: usize,
        #[serde(default)]
        branch: Option<Branch>,
    },
    /// The eigenvalue closest to `energy = [re, im]`.
    Nearest { energy: [f64; 2] },
    /// Minus-branch modes with the smallest `|λ₁⁻/λ₀⁻|`.
    Cleanest { count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum {
        /// Diagonalise the decoupled Hamiltonian instead.
        #[serde(default)]
        decoupled: bool,
        /// Also emit the ring spectrum.
        #[serde(default)]
        with_pbc: bool,
    },
    Modes {
        select: ModeSelection,
    },
    TransferFlow {
        energy: [f64; 2],
        /// Replace `energy` by the nearest eigenvalue of the lattice.
        #[serde(default)]
        snap: bool,
    },
    DeltaEScan {
        lengths: Vec<usize>,
    },
    Lambda0Scan {
        lengths: Vec<usize>,
    },
    GmScan {
        #[serde(flatten)]
        case: ConvergenceCase<f64>,
        t1: Grid,
        /// Points of the `|λ₁/λ₀|`-versus-κ curve per `t1`; 0 disables it.
        #[serde(default)]
        kappa_points: usize,
    },
    IsseCheck {
        energy: [f64; 2],
        #[serde(default)]
        snap: bool,
    },
    Figure {
        id: String,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Spectrum { .. } => "spectrum",
            Self::Modes { .. } => "modes",
            Self::TransferFlow { .. } => "transfer-flow",
            Self::DeltaEScan { .. } => "delta-e-scan",
            Self::Lambda0Scan { .. } => "lambda0-scan",
            Self::GmScan { .. } => "gm-scan",
            Self::IsseCheck { .. } => "isse-check",
            Self::Figure { .. } => "figure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Required for everything except `figure`, whose preset carries its own lattices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<Spec>,
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

/// One unit of work after figure expansion. `label` prefixes the emitted files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub label: String,
    pub spec: Spec,
    pub experiment: Experiment,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match &self.experiment {
            Experiment::Figure { id } => {
                let fig = registry::lookup(id)
                    .ok_or_else(|| ConfigError::invalid("experiment.id", format!("unknown figure id {id:?}")))?;
                for job in &fig.jobs {
                    validate_job(job)?;
                }
                Ok(())
            }
            other => {
                let spec = self
                    .spec
                    .clone()
                    .ok_or_else(|| ConfigError::invalid("spec", "required for this experiment"))?;
                validate_job(&Job {
                    label: String::new(),
                    spec,
                    experiment: other.clone(),
                })
            }
        }
    }

    /// Flattens the config into concrete jobs; figures expand through the registry.
    pub fn jobs(&self) -> Result<Vec<Job>, ConfigError> {
        self.validate()?;
        Ok(match &self.experiment {
            Experiment::Figure { id } => registry::lookup(id).expect("validated").jobs,
            other => vec![Job {
                label: other.name().to_string(),
                spec: self.spec.clone().expect("validated"),
                experiment: other.clone(),
            }],
        })
    }
}

fn validate_job(job: &Job) -> Result<(), ConfigError> {
    job.spec
        .validate()
        .map_err(|e| ConfigError::invalid("spec", e.to_string()))?;
    let finite = |e: &[f64; 2]| e.iter().all(|x| x.is_finite());
    match &job.experiment {
        Experiment::Spectrum { .. } => Ok(()),
        Experiment::Modes { select } => match select {
            ModeSelection::Indices { indices } if indices.is_empty() => {
                Err(ConfigError::invalid("experiment.select.indices", "no indices"))
            }
            ModeSelection::Indices { indices } => match indices.iter().find(|&&i| i >= job.spec.dim()) {
                Some(i) => Err(ConfigError::invalid(
                    "experiment.select.indices",
                    format!("index {i} exceeds dimension {}", job.spec.dim()),
                )),
                None => Ok(()),
            },
            ModeSelection::Sample { count, .. } | ModeSelection::Cleanest { count } if *count == 0 => {
                Err(ConfigError::invalid("experiment.select.count", "must be positive"))
            }
            ModeSelection::Cleanest { .. } if ConvergenceCase::of_profile(&job.spec.profile).is_none() => {
                Err(ConfigError::invalid("experiment.select", "cleanest needs a profile with a convergence case"))
            }
            ModeSelection::Nearest { energy } if !finite(energy) => {
                Err(ConfigError::invalid("experiment.select.energy", "non-finite"))
            }
            _ => Ok(()),
        },
        Experiment::TransferFlow { energy, .. } | Experiment::IsseCheck { energy, .. } => {
            if !finite(energy) {
                Err(ConfigError::invalid("experiment.energy", "non-finite"))
            } else if job.spec.length < 2 {
                Err(ConfigError::invalid("spec.L", "transfer matrices need L >= 2"))
            } else {
                Ok(())
            }
        }
        Experiment::DeltaEScan { lengths } | Experiment::Lambda0Scan { lengths } => {
            if lengths.is_empty() || lengths.contains(&0) {
                Err(ConfigError::invalid("experiment.lengths", "need a non-empty list of positive lengths"))
            } else {
                Ok(())
            }
        }
        Experiment::GmScan { t1, .. } => t1.validate("experiment.t1"),
        Experiment::Figure { .. } => Err(ConfigError::invalid("experiment", "figures cannot nest")),
    }
}
