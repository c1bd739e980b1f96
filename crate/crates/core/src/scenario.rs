//! Scenario and experiment configuration.
//!
//! The six builtin scenarios cross three AMR moving distances {15, 30, 45}
//! with two machine-2 print-time distributions {U(30,70), U(40,80)};
//! machine 1 always prints in U(20,40) and assembly takes U(10,20).
//! Experiments can also be described in a JSON config file (see
//! [`load_config`]).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::plant::ApproachKind;
use crate::simkernel::{SimTime, UniformDist};

pub const DEFAULT_HORIZON: f64 = 1440.0; // one simulated day, in minutes
pub const DEFAULT_WARMUP: f64 = 180.0; // three hours
pub const DEFAULT_REPLICATIONS: u32 = 20;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_AMR_SPEED: f64 = 1.0; // unit distance per unit time

/// One manufacturing scenario: the site spacing plus the per-machine
/// print-time and assembly-time distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub id: u32,
    /// Pairwise distance between the three sites, in unit distance.
    pub distance: f64,
    pub print_time_1: UniformDist,
    pub print_time_2: UniformDist,
    pub assembly_time: UniformDist,
}

impl Scenario {
    pub fn new(id: u32, distance: f64, print_time_2: UniformDist) -> Self {
        Scenario {
            id,
            distance,
            print_time_1: default_print_time_1(),
            print_time_2,
            assembly_time: default_assembly_time(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.id == 0 {
            return Err(ConfigError::invalid("scenarios.id", "ids start at 1"));
        }
        if !(self.distance.is_finite() && self.distance > 0.0) {
            return Err(ConfigError::invalid(
                "scenarios.distance",
                format!(
                    "distance must be positive and finite, got {}",
                    self.distance
                ),
            ));
        }
        Ok(())
    }
}

fn default_print_time_1() -> UniformDist {
    UniformDist::new(20.0, 40.0).unwrap()
}

fn default_assembly_time() -> UniformDist {
    UniformDist::new(10.0, 20.0).unwrap()
}

/// The six builtin scenarios, ids matching the benchmark table exactly.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let pt2 = [
        UniformDist::new(30.0, 70.0).unwrap(),
        UniformDist::new(40.0, 80.0).unwrap(),
    ];
    full_factorial(&[15.0, 30.0, 45.0], &pt2).expect("builtin inputs are non-empty")
}

/// Cross product of moving distances and machine-2 print-time
/// distributions, distance-major, ids assigned 1..n.
pub fn full_factorial(
    distances: &[f64],
    machine2_print_times: &[UniformDist],
) -> Result<Vec<Scenario>, ConfigError> {
    if distances.is_empty() {
        return Err(ConfigError::invalid(
            "distances",
            "at least one distance required",
        ));
    }
    if machine2_print_times.is_empty() {
        return Err(ConfigError::invalid(
            "pt2",
            "at least one machine-2 print-time distribution required",
        ));
    }
    let mut out = Vec::with_capacity(distances.len() * machine2_print_times.len());
    let mut id = 1;
    for &d in distances {
        for &pt2 in machine2_print_times {
            let scenario = Scenario::new(id, d, pt2);
            scenario.validate()?;
            out.push(scenario);
            id += 1;
        }
    }
    Ok(out)
}

/// Run-protocol parameters shared by every scenario in an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub horizon: SimTime,
    pub warmup: SimTime,
    pub replications: u32,
    pub master_seed: u64,
    /// Common random numbers: share the per-replication streams across the
    /// compared approaches so the comparison is paired.
    pub crn: bool,
    pub approaches: Vec<ApproachKind>,
    pub amr_speed: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            horizon: SimTime::new(DEFAULT_HORIZON),
            warmup: SimTime::new(DEFAULT_WARMUP),
            replications: DEFAULT_REPLICATIONS,
            master_seed: DEFAULT_SEED,
            crn: true,
            approaches: vec![ApproachKind::Existing, ApproachKind::Proposed],
            amr_speed: DEFAULT_AMR_SPEED,
        }
    }
}

impl ExperimentConfig {
    /// The measurement window `(warmup, horizon]`, in unit time.
    pub fn window(&self) -> f64 {
        self.horizon.value() - self.warmup.value()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.horizon.value() <= 0.0 {
            return Err(ConfigError::invalid(
                "horizon",
                format!("horizon must be positive, got {}", self.horizon),
            ));
        }
        if self.warmup > self.horizon {
            return Err(ConfigError::invalid(
                "warmup",
                format!(
                    "warm-up ({}) must not exceed the horizon ({})",
                    self.warmup, self.horizon
                ),
            ));
        }
        if self.replications == 0 {
            return Err(ConfigError::invalid(
                "replications",
                "at least one replication required",
            ));
        }
        if self.approaches.is_empty() {
            return Err(ConfigError::invalid(
                "approaches",
                "at least one approach required",
            ));
        }
        if !(self.amr_speed.is_finite() && self.amr_speed > 0.0) {
            return Err(ConfigError::invalid(
                "speed",
                format!(
                    "AMR speed must be positive and finite, got {}",
                    self.amr_speed
                ),
            ));
        }
        Ok(())
    }
}

/// Configuration errors, each naming the offending file or field.
#[derive(Debug)]
pub enum ConfigError {
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    Invalid {
        field: String,
        reason: String,
    },
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => {
                write!(f, "cannot read config {}: {source}", path.display())
            }
            ConfigError::Parse { path, source } => {
                write!(f, "cannot parse config {}: {source}", path.display())
            }
            ConfigError::Invalid { field, reason } => {
                write!(f, "invalid config field `{field}`: {reason}")
            }
        }
    }
}

impl std::error::Error for ConfigError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ConfigError::Io { source, .. } => Some(source),
            ConfigError::Parse { source, .. } => Some(source),
            ConfigError::Invalid { .. } => None,
        }
    }
}

/// On-disk config document. All keys are optional; omitted keys take the
/// defaults above, and an omitted `scenarios` list means the six builtins.
#[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    warmup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    replications: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    crn: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    approaches: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    speed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scenarios: Option<Vec<ScenarioEntry>>,
}

/// One scenario row in the config file. An entry whose id matches a
/// builtin inherits the builtin's values for any omitted field; new ids
/// must spell out at least `distance` and `pt2`.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct ScenarioEntry {
    id: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pt1: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pt2: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    at: Option<[f64; 2]>,
}

fn parse_dist(field: &str, bounds: [f64; 2]) -> Result<UniformDist, ConfigError> {
    UniformDist::new(bounds[0], bounds[1]).map_err(|e| ConfigError::invalid(field, e.to_string()))
}

fn parse_approach(name: &str) -> Result<ApproachKind, ConfigError> {
    match name {
        "existing" => Ok(ApproachKind::Existing),
        "proposed" => Ok(ApproachKind::Proposed),
        other => Err(ConfigError::invalid(
            "approaches",
            format!("unknown approach `{other}` (expected `existing` or `proposed`)"),
        )),
    }
}

/// Loads and validates a JSON experiment description.
pub fn load_config(path: &Path) -> Result<(Vec<Scenario>, ExperimentConfig), ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: ConfigFile = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    resolve_config(file)
}

fn resolve_config(file: ConfigFile) -> Result<(Vec<Scenario>, ExperimentConfig), ConfigError> {
    let defaults = ExperimentConfig::default();
    let approaches = match file.approaches {
        None => defaults.approaches.clone(),
        Some(names) => {
            let mut kinds = Vec::with_capacity(names.len());
            for name in &names {
                let kind = parse_approach(name)?;
                if !kinds.contains(&kind) {
                    kinds.push(kind);
                }
            }
            kinds
        }
    };
    let horizon = file.horizon.unwrap_or(DEFAULT_HORIZON);
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(ConfigError::invalid(
            "horizon",
            format!("must be non-negative, got {horizon}"),
        ));
    }
    let warmup = file.warmup.unwrap_or(DEFAULT_WARMUP);
    if !(warmup.is_finite() && warmup >= 0.0) {
        return Err(ConfigError::invalid(
            "warmup",
            format!("must be non-negative, got {warmup}"),
        ));
    }
    let config = ExperimentConfig {
        horizon: SimTime::new(horizon),
        warmup: SimTime::new(warmup),
        replications: file.replications.unwrap_or(DEFAULT_REPLICATIONS),
        master_seed: file.seed.unwrap_or(DEFAULT_SEED),
        crn: file.crn.unwrap_or(true),
        approaches,
        amr_speed: file.speed.unwrap_or(DEFAULT_AMR_SPEED),
    };
    config.validate()?;

    let scenarios = match file.scenarios {
        None => builtin_scenarios(),
        Some(entries) => {
            if entries.is_empty() {
                return Err(ConfigError::invalid(
                    "scenarios",
                    "scenario list must not be empty",
                ));
            }
            let builtins = builtin_scenarios();
            let mut out = Vec::with_capacity(entries.len());
            for (i, entry) in entries.iter().enumerate() {
                let base = builtins.iter().find(|s| s.id == entry.id).copied();
                let field = |name: &str| format!("scenarios[{i}].{name}");
                let distance = match (entry.distance, base) {
                    (Some(d), _) => d,
                    (None, Some(b)) => b.distance,
                    (None, None) => {
                        return Err(ConfigError::invalid(
                            field("distance"),
                            format!("required for non-builtin scenario id {}", entry.id),
                        ))
                    }
                };
                let print_time_2 = match (entry.pt2, base) {
                    (Some(bounds), _) => parse_dist(&field("pt2"), bounds)?,
                    (None, Some(b)) => b.print_time_2,
                    (None, None) => {
                        return Err(ConfigError::invalid(
                            field("pt2"),
                            format!("required for non-builtin scenario id {}", entry.id),
                        ))
                    }
                };
                let print_time_1 = match entry.pt1 {
                    Some(bounds) => parse_dist(&field("pt1"), bounds)?,
                    None => base.map_or_else(default_print_time_1, |b| b.print_time_1),
                };
                let assembly_time = match entry.at {
                    Some(bounds) => parse_dist(&field("at"), bounds)?,
                    None => base.map_or_else(default_assembly_time, |b| b.assembly_time),
                };
                let scenario = Scenario {
                    id: entry.id,
                    distance,
                    print_time_1,
                    print_time_2,
                    assembly_time,
                };
                scenario.validate()?;
                if out.iter().any(|s: &Scenario| s.id == entry.id) {
                    return Err(ConfigError::invalid(
                        field("id"),
                        format!("duplicate scenario id {}", entry.id),
                    ));
                }
                out.push(scenario);
            }
            out
        }
    };
    Ok((scenarios, config))
}

/// Serializes a scenario set and configuration back to the config-file
/// format, so that saving and reloading round-trips.
pub fn render_config(scenarios: &[Scenario], config: &ExperimentConfig) -> String {
    let file = ConfigFile {
        horizon: Some(config.horizon.value()),
        warmup: Some(config.warmup.value()),
        replications: Some(config.replications),
        seed: Some(config.master_seed),
        crn: Some(config.crn),
        approaches: Some(
            config
                .approaches
                .iter()
                .map(|a| a.name().to_string())
                .collect(),
        ),
        speed: Some(config.amr_speed),
        scenarios: Some(
            scenarios
                .iter()
                .map(|s| ScenarioEntry {
                    id: s.id,
                    distance: Some(s.distance),
                    pt1: Some([s.print_time_1.low(), s.print_time_1.high()]),
                    pt2: Some([s.print_time_2.low(), s.print_time_2.high()]),
                    at: Some([s.assembly_time.low(), s.assembly_time.high()]),
                })
                .collect(),
        ),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("config serializes");
    text.push('\n');
    text
}
