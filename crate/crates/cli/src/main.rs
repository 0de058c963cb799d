//! Batch experiment runner for the election simulator.
//!
//! Subcommands:
//! * `run`    - build a topology, run seeded election trials, write a report.
//! * `mix`    - compute and verify the mixing time of a graph family.
//! * `oracle` - exact and Monte-Carlo referee-collision probabilities.
//!
//! Exit codes: 0 success, 2 configuration error, 3 model violation,
//! 4 protocol-invariant violation.

mod config;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use electionsim::analysis::{
    collision_mc, no_common_referee_exact, run_trials, trials_to_csv, AnalysisError,
    ExperimentReport,
};
use electionsim::engine::{run, EngineError};
use electionsim::protocols::{Alg1, Alg2, Naive, Params};
use electionsim::rng;
use electionsim::topology::walk::{mixing_time, verify_mixing, WalkError};
use electionsim::topology::Topology;

use config::{ExperimentConfig, Family, ProtocolKind, RawConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("model violation: {0}")]
    Model(String),
    #[error("protocol invariant violation: {0}")]
    Invariant(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(_) => 3,
            CliError::Invariant(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    fn from_engine(e: EngineError) -> Self {
        match e {
            EngineError::ModelViolation { .. } | EngineError::Runaway { .. } => {
                CliError::Model(e.to_string())
            }
            EngineError::ProtocolViolation { .. } | EngineError::Undecided { .. } => {
                CliError::Invariant(e.to_string())
            }
            EngineError::Precondition(_) => CliError::Config(e.to_string()),
        }
    }

    fn from_analysis(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Trial { trial, source } => {
                let mapped = CliError::from_engine(source);
                match mapped {
                    CliError::Model(m) => CliError::Model(format!("trial {trial}: {m}")),
                    CliError::Invariant(m) => CliError::Invariant(format!("trial {trial}: {m}")),
                    other => other,
                }
            }
            other => CliError::Config(other.to_string()),
        }
    }

    fn from_walk(e: WalkError) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "electionsim", version, about = "Randomized leader election simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of seeded election trials and report statistics.
    Run(RunArgs),
    /// Compute the mixing time of a graph family and verify it.
    Mix(MixArgs),
    /// Referee-collision oracles (exact and Monte-Carlo).
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Config file with `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Graph family: complete|hypercube|cycle|random-regular.
    #[arg(long)]
    family: Option<String>,
    /// Node count (complete, cycle, random-regular).
    #[arg(long)]
    n: Option<usize>,
    /// Hypercube dimension.
    #[arg(long)]
    dim: Option<u32>,
    /// Degree (random-regular).
    #[arg(long)]
    degree: Option<usize>,
    /// Protocol: alg1|alg2|naive.
    #[arg(long)]
    protocol: Option<String>,
    /// Communication model: congest|local.
    #[arg(long)]
    model: Option<String>,
    /// CONGEST bit-budget factor.
    #[arg(long)]
    c: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed; fixes the ports, per-trial seeds, and the report.
    #[arg(long)]
    seed: Option<u64>,
    /// Slack factor applied to the computed mixing time (alg2).
    #[arg(long = "tau-multiplier")]
    tau_multiplier: Option<f64>,
    /// Worker threads for the trial loop.
    #[arg(long)]
    workers: Option<usize>,
    /// Report destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-trial CSV destination.
    #[arg(long = "trials-out")]
    trials_out: Option<PathBuf>,
    /// Write the canonical topology serialization here.
    #[arg(long = "dump-topology")]
    dump_topology: Option<PathBuf>,
    /// Write trial 0's canonical trace here.
    #[arg(long = "dump-trace")]
    dump_trace: Option<PathBuf>,
}

#[derive(Args)]
struct MixArgs {
    /// Graph family: complete|hypercube|cycle|random-regular.
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dim: Option<u32>,
    #[arg(long)]
    degree: Option<usize>,
    /// Seed (random-regular generation).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Force the lazy-walk flag off (bipartite graphs then fail to mix).
    #[arg(long = "no-lazy")]
    no_lazy: bool,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Exact probability that two uniform s-subsets of an n-set are disjoint.
    Exact {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        s: u64,
    },
    /// Monte-Carlo no-collision frequency for two rho-ball throws.
    Mc {
        /// Number of bins.
        #[arg(long)]
        bins: usize,
        /// Bin distribution: uniform|point|skew.
        #[arg(long, default_value = "uniform")]
        dist: String,
        /// Mass on the first bin for dist=skew.
        #[arg(long = "skew-mass", default_value_t = 0.5)]
        skew_mass: f64,
        #[arg(long)]
        rho: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare uniform vs skewed no-collision frequencies.
    Compare {
        #[arg(long)]
        bins: usize,
        #[arg(long = "skew-mass", default_value_t = 0.5)]
        skew_mass: f64,
        #[arg(long)]
        rho: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn write_output(path: &std::path::Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn build_alg2(topology: &Topology, config: &ExperimentConfig) -> Result<(Alg2, u64), CliError> {
    let tau = mixing_time::<f64>(topology).map_err(CliError::from_walk)?.mixing_time;
    let params = Params::for_network(topology.n())
        .map_err(|e| CliError::config(e.to_string()))?
        .with_tau(tau)
        .with_tau_multiplier(config.tau_multiplier);
    let alg = Alg2::new(params).map_err(|e| CliError::config(e.to_string()))?;
    Ok((alg, tau))
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let from_file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
            RawConfig::from_file(&text)?
        }
        None => RawConfig::default(),
    };
    let flags = RawConfig {
        family: args.family,
        n: args.n,
        dim: args.dim,
        degree: args.degree,
        protocol: args.protocol,
        model: args.model,
        c: args.c,
        trials: args.trials,
        seed: args.seed,
        tau_multiplier: args.tau_multiplier,
        workers: args.workers,
        out: args.out,
        trials_out: args.trials_out,
        dump_topology: args.dump_topology,
        dump_trace: args.dump_trace,
    };
    let config = flags.or(from_file).resolve()?;

    let topology = config.build_topology()?;
    let n = topology.n();
    let model_config = config.model_config();

    let mut header = String::new();
    writeln!(header, "protocol {}", config.protocol.name()).unwrap();
    writeln!(header, "family {}", config.family.name()).unwrap();
    writeln!(header, "n {n}").unwrap();
    writeln!(
        header,
        "model {}",
        if config.model == electionsim::Model::Congest { "congest" } else { "local" }
    )
    .unwrap();
    writeln!(header, "c {}", config.c).unwrap();
    writeln!(header, "trials {}", config.trials).unwrap();
    writeln!(header, "seed {}", config.seed).unwrap();

    let records = match config.protocol {
        ProtocolKind::Naive => run_trials(
            &topology,
            &Naive::new(n),
            &model_config,
            config.trials,
            config.seed,
            config.workers,
        )
        .map_err(CliError::from_analysis)?,
        ProtocolKind::Alg1 => {
            let alg = Alg1::for_network(n).map_err(|e| CliError::config(e.to_string()))?;
            run_trials(&topology, &alg, &model_config, config.trials, config.seed, config.workers)
                .map_err(CliError::from_analysis)?
        }
        ProtocolKind::Alg2 => {
            let (alg, tau) = build_alg2(&topology, &config)?;
            writeln!(header, "tau {tau}").unwrap();
            writeln!(header, "tau_effective {}", alg.tau()).unwrap();
            run_trials(&topology, &alg, &model_config, config.trials, config.seed, config.workers)
                .map_err(CliError::from_analysis)?
        }
    };

    let report = ExperimentReport::from_records(&records);
    let report_text = format!("{header}{}", report.to_canonical_text());
    match &config.out {
        Some(path) => write_output(path, &report_text)?,
        None => print!("{report_text}"),
    }
    if let Some(path) = &config.trials_out {
        write_output(path, &trials_to_csv(&records))?;
    }
    if let Some(path) = &config.dump_topology {
        write_output(path, &topology.to_canonical_text())?;
    }
    if let Some(path) = &config.dump_trace {
        let seed0 = rng::derive(config.seed, rng::STREAM_TRIAL, 0);
        let trace = match config.protocol {
            ProtocolKind::Naive => run(&topology, &Naive::new(n), &model_config, seed0),
            ProtocolKind::Alg1 => {
                let alg = Alg1::for_network(n).map_err(|e| CliError::config(e.to_string()))?;
                run(&topology, &alg, &model_config, seed0)
            }
            ProtocolKind::Alg2 => {
                let (alg, _) = build_alg2(&topology, &config)?;
                run(&topology, &alg, &model_config, seed0)
            }
        }
        .map_err(CliError::from_engine)?;
        write_output(path, &trace.to_canonical_text())?;
    }
    Ok(())
}

fn cmd_mix(args: MixArgs) -> Result<(), CliError> {
    let family = Family::parse(&args.family)?;
    let mut topology = match family {
        Family::Complete => Topology::complete(args.n.ok_or_else(|| CliError::config("n: missing"))?),
        Family::Cycle => Topology::cycle(args.n.ok_or_else(|| CliError::config("n: missing"))?),
        Family::Hypercube => {
            Topology::hypercube(args.dim.ok_or_else(|| CliError::config("dim: missing"))?)
        }
        Family::RandomRegular => Topology::random_regular(
            args.n.ok_or_else(|| CliError::config("n: missing"))?,
            args.degree.ok_or_else(|| CliError::config("degree: missing"))?,
            args.seed,
        ),
    }
    .map_err(|e| CliError::config(format!("family: {e}")))?;
    if args.no_lazy {
        topology.set_lazy(false);
    }

    println!("family {}", family.name());
    println!("n {}", topology.n());
    println!("lazy {}", topology.lazy());
    let profile = mixing_time::<f64>(&topology).map_err(CliError::from_walk)?;
    let tau = profile.mixing_time;
    println!("tau {tau}");
    let at_tau = verify_mixing::<f64>(&topology, tau).map_err(CliError::from_walk)?;
    println!("verify_mixing(tau) {at_tau}");
    if tau >= 1 {
        let below = verify_mixing::<f64>(&topology, tau - 1).map_err(CliError::from_walk)?;
        println!("verify_mixing(tau-1) {below}");
        if below {
            return Err(CliError::Invariant("mixing time is not minimal".into()));
        }
    }
    if !at_tau {
        return Err(CliError::Invariant("computed mixing time fails verification".into()));
    }
    Ok(())
}

fn cmd_oracle(which: OracleCommand) -> Result<(), CliError> {
    let make_dist = |bins: usize, dist: &str, skew_mass: f64| -> Result<Vec<f64>, CliError> {
        if bins == 0 {
            return Err(CliError::config("bins: must be positive"));
        }
        match dist {
            "uniform" => Ok(vec![1.0 / bins as f64; bins]),
            "point" => {
                let mut v = vec![0.0; bins];
                v[0] = 1.0;
                Ok(v)
            }
            "skew" => {
                if bins < 2 || !(0.0..=1.0).contains(&skew_mass) {
                    return Err(CliError::config(
                        "skew distribution needs bins >= 2 and skew-mass in [0, 1]",
                    ));
                }
                let mut v = vec![(1.0 - skew_mass) / (bins - 1) as f64; bins];
                v[0] = skew_mass;
                Ok(v)
            }
            other => {
                Err(CliError::config(format!("dist: expected uniform|point|skew, got '{other}'")))
            }
        }
    };
    match which {
        OracleCommand::Exact { n, s } => {
            let exact = no_common_referee_exact(n, s).map_err(|e| CliError::config(e.to_string()))?;
            let approx = electionsim::no_common_referee_f64(n, s).unwrap();
            println!("n {n}");
            println!("s {s}");
            println!("no_common_referee {exact}");
            println!("decimal {approx:.9}");
        }
        OracleCommand::Mc { bins, dist, skew_mass, rho, trials, seed } => {
            let d = make_dist(bins, &dist, skew_mass)?;
            let freq =
                collision_mc(&d, rho, trials, seed).map_err(|e| CliError::config(e.to_string()))?;
            println!("bins {bins}");
            println!("dist {dist}");
            println!("rho {rho}");
            println!("trials {trials}");
            println!("no_collision_freq {freq:.6}");
        }
        OracleCommand::Compare { bins, skew_mass, rho, trials, seed } => {
            let uniform = make_dist(bins, "uniform", 0.0)?;
            let skew = make_dist(bins, "skew", skew_mass)?;
            let fu = collision_mc(&uniform, rho, trials, seed)
                .map_err(|e| CliError::config(e.to_string()))?;
            let fs = collision_mc(&skew, rho, trials, seed.wrapping_add(1))
                .map_err(|e| CliError::config(e.to_string()))?;
            let se = ((fu * (1.0 - fu) + fs * (1.0 - fs)) / trials as f64).sqrt();
            println!("uniform_no_collision {fu:.6}");
            println!("skew_no_collision {fs:.6}");
            println!("margin {:.6}", fu - fs);
            println!("std_err {se:.6}");
            println!("dominance {}", if fu >= fs { "uniform>=skew" } else { "skew>uniform" });
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Mix(args) => cmd_mix(args),
        Command::Oracle { which } => cmd_oracle(which),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
