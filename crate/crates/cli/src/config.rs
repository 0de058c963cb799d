//! Experiment configuration: flag/file merging and validation.
//!
//! A config file is a flat `key = value` text file whose keys mirror the
//! long flag names (`family`, `n`, `dim`, `degree`, `protocol`, `model`,
//! `c`, `trials`, `seed`, `tau-multiplier`, `workers`, `out`,
//! `trials-out`, `dump-topology`, `dump-trace`). Values given on the
//! command line override values from the file.

use std::collections::HashMap;
use std::path::PathBuf;

use electionsim::engine::{Model, ModelConfig};
use electionsim::topology::Topology;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Complete,
    Hypercube,
    Cycle,
    RandomRegular,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "complete" => Ok(Family::Complete),
            "hypercube" => Ok(Family::Hypercube),
            "cycle" => Ok(Family::Cycle),
            "random-regular" => Ok(Family::RandomRegular),
            other => Err(CliError::config(format!(
                "family: expected complete|hypercube|cycle|random-regular, got '{other}'"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Complete => "complete",
            Family::Hypercube => "hypercube",
            Family::Cycle => "cycle",
            Family::RandomRegular => "random-regular",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolKind {
    Alg1,
    Alg2,
    Naive,
}

impl ProtocolKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "alg1" => Ok(ProtocolKind::Alg1),
            "alg2" => Ok(ProtocolKind::Alg2),
            "naive" => Ok(ProtocolKind::Naive),
            other => Err(CliError::config(format!(
                "protocol: expected alg1|alg2|naive, got '{other}'"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Alg1 => "alg1",
            ProtocolKind::Alg2 => "alg2",
            ProtocolKind::Naive => "naive",
        }
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub family: Family,
    pub n: usize,
    pub dim: u32,
    pub degree: usize,
    pub protocol: ProtocolKind,
    pub model: Model,
    pub c: u64,
    pub trials: u64,
    pub seed: u64,
    pub tau_multiplier: f64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub trials_out: Option<PathBuf>,
    pub dump_topology: Option<PathBuf>,
    pub dump_trace: Option<PathBuf>,
}

/// Raw option bag prior to merging; every field optional.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub family: Option<String>,
    pub n: Option<usize>,
    pub dim: Option<u32>,
    pub degree: Option<usize>,
    pub protocol: Option<String>,
    pub model: Option<String>,
    pub c: Option<u64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub tau_multiplier: Option<f64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub trials_out: Option<PathBuf>,
    pub dump_topology: Option<PathBuf>,
    pub dump_trace: Option<PathBuf>,
}

impl RawConfig {
    /// Fill any unset field from `fallback` (file values under flags).
    pub fn or(self, fallback: RawConfig) -> RawConfig {
        RawConfig {
            family: self.family.or(fallback.family),
            n: self.n.or(fallback.n),
            dim: self.dim.or(fallback.dim),
            degree: self.degree.or(fallback.degree),
            protocol: self.protocol.or(fallback.protocol),
            model: self.model.or(fallback.model),
            c: self.c.or(fallback.c),
            trials: self.trials.or(fallback.trials),
            seed: self.seed.or(fallback.seed),
            tau_multiplier: self.tau_multiplier.or(fallback.tau_multiplier),
            workers: self.workers.or(fallback.workers),
            out: self.out.or(fallback.out),
            trials_out: self.trials_out.or(fallback.trials_out),
            dump_topology: self.dump_topology.or(fallback.dump_topology),
            dump_trace: self.dump_trace.or(fallback.dump_trace),
        }
    }

    pub fn from_file(text: &str) -> Result<RawConfig, CliError> {
        let mut map: HashMap<String, String> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(format!("config line {}: expected 'key = value'", i + 1))
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        let mut raw = RawConfig::default();
        let parse_num = |map: &HashMap<String, String>, key: &str| -> Result<Option<u64>, CliError> {
            map.get(key)
                .map(|v| v.parse::<u64>().map_err(|_| CliError::config(format!("{key}: not a number: '{v}'"))))
                .transpose()
        };
        raw.family = map.get("family").cloned();
        raw.protocol = map.get("protocol").cloned();
        raw.model = map.get("model").cloned();
        raw.n = parse_num(&map, "n")?.map(|v| v as usize);
        raw.dim = parse_num(&map, "dim")?.map(|v| v as u32);
        raw.degree = parse_num(&map, "degree")?.map(|v| v as usize);
        raw.c = parse_num(&map, "c")?;
        raw.trials = parse_num(&map, "trials")?;
        raw.seed = parse_num(&map, "seed")?;
        raw.workers = parse_num(&map, "workers")?.map(|v| v as usize);
        raw.tau_multiplier = map
            .get("tau-multiplier")
            .map(|v| v.parse::<f64>().map_err(|_| CliError::config(format!("tau-multiplier: not a number: '{v}'"))))
            .transpose()?;
        raw.out = map.get("out").map(PathBuf::from);
        raw.trials_out = map.get("trials-out").map(PathBuf::from);
        raw.dump_topology = map.get("dump-topology").map(PathBuf::from);
        raw.dump_trace = map.get("dump-trace").map(PathBuf::from);

        const KNOWN: [&str; 15] = [
            "family", "n", "dim", "degree", "protocol", "model", "c", "trials", "seed",
            "tau-multiplier", "workers", "out", "trials-out", "dump-topology", "dump-trace",
        ];
        for key in map.keys() {
            if !KNOWN.contains(&key.as_str()) {
                return Err(CliError::config(format!("unknown config key '{key}'")));
            }
        }
        Ok(raw)
    }

    pub fn resolve(self) -> Result<ExperimentConfig, CliError> {
        let family = Family::parse(
            self.family.as_deref().ok_or_else(|| CliError::config("family: missing"))?,
        )?;
        let protocol = ProtocolKind::parse(
            self.protocol.as_deref().ok_or_else(|| CliError::config("protocol: missing"))?,
        )?;
        let model = match self.model.as_deref().unwrap_or("congest") {
            "congest" => Model::Congest,
            "local" => Model::Local,
            other => {
                return Err(CliError::config(format!("model: expected congest|local, got '{other}'")))
            }
        };
        let config = ExperimentConfig {
            family,
            n: self.n.unwrap_or(0),
            dim: self.dim.unwrap_or(0),
            degree: self.degree.unwrap_or(0),
            protocol,
            model,
            c: self.c.unwrap_or(8),
            trials: self.trials.ok_or_else(|| CliError::config("trials: missing"))?,
            seed: self.seed.ok_or_else(|| CliError::config("seed: missing"))?,
            tau_multiplier: self.tau_multiplier.unwrap_or(1.0),
            workers: self.workers.unwrap_or(1),
            out: self.out,
            trials_out: self.trials_out,
            dump_topology: self.dump_topology,
            dump_trace: self.dump_trace,
        };
        config.validate()?;
        Ok(config)
    }
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), CliError> {
        match self.family {
            Family::Complete | Family::Cycle => {
                if self.n == 0 {
                    return Err(CliError::config(format!(
                        "n: required and positive for family {}",
                        self.family.name()
                    )));
                }
            }
            Family::Hypercube => {
                if self.dim == 0 {
                    return Err(CliError::config("dim: required and positive for family hypercube"));
                }
            }
            Family::RandomRegular => {
                if self.n == 0 || self.degree == 0 {
                    return Err(CliError::config(
                        "n, degree: required and positive for family random-regular",
                    ));
                }
            }
        }
        if self.protocol == ProtocolKind::Alg1 && self.family != Family::Complete {
            return Err(CliError::config(format!(
                "protocol: alg1 requires family=complete, got family={}",
                self.family.name()
            )));
        }
        if self.trials == 0 {
            return Err(CliError::config("trials: must be positive"));
        }
        if self.c == 0 {
            return Err(CliError::config("c: must be positive"));
        }
        if self.workers == 0 {
            return Err(CliError::config("workers: must be positive"));
        }
        if self.tau_multiplier.is_nan() || self.tau_multiplier <= 0.0 {
            return Err(CliError::config("tau-multiplier: must be positive"));
        }
        Ok(())
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            model: self.model,
            bit_budget_factor: self.c,
            max_rounds: ModelConfig::default().max_rounds,
        }
    }

    /// Construct the topology (ports randomized from the master seed).
    pub fn build_topology(&self) -> Result<Topology, CliError> {
        let t = match self.family {
            Family::Complete => Topology::complete(self.n),
            Family::Hypercube => Topology::hypercube(self.dim),
            Family::Cycle => Topology::cycle(self.n),
            Family::RandomRegular => Topology::random_regular(self.n, self.degree, self.seed),
        }
        .map_err(|e| CliError::config(format!("family: {e}")))?;
        Ok(t.assign_random_ports(self.seed))
    }
}
