//! Multi-trial experiments and their statistical reports.

mod clouds;
mod collision;
mod conservation;
mod stats;

pub use clouds::{influence_clouds, InfluenceCloud, InfluenceCloudSet};
pub use collision::{collision_mc, no_common_referee_exact, no_common_referee_f64, sum_squares};
pub use conservation::{check_walk_conservation, ConservationReport};
pub use stats::{quantile_sorted, wilson_halfwidth};

use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::{message_count, run, EngineError, ModelConfig, Protocol, Trace};
use crate::rng;
use crate::topology::Topology;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("probability vector sums to {sum}, expected 1")]
    InvalidDistribution { sum: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: u64,
        #[source]
        source: EngineError,
    },
}

/// Outcome of one seeded run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub leaders: u32,
    pub messages: u64,
    pub rounds: u64,
}

impl TrialRecord {
    fn from_trace(trial: u64, seed: u64, trace: &Trace) -> Self {
        Self {
            trial,
            seed,
            leaders: trace.leader_ids.len() as u32,
            messages: message_count(trace),
            rounds: trace.rounds,
        }
    }
}

/// Aggregate over many seeded trials.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub trials: u64,
    pub unique_leader_freq: f64,
    pub zero_leader_freq: f64,
    pub multi_leader_freq: f64,
    /// `(p50, p90, p99, max)` of per-trial message counts.
    pub msg_quantiles: (u64, u64, u64, u64),
    pub round_max: u64,
    /// 95% Wilson half-width for `unique_leader_freq`.
    pub ci_95: f64,
}

impl ExperimentReport {
    pub fn from_records(records: &[TrialRecord]) -> Self {
        assert!(!records.is_empty());
        let trials = records.len() as u64;
        let unique = records.iter().filter(|r| r.leaders == 1).count() as u64;
        let zero = records.iter().filter(|r| r.leaders == 0).count() as u64;
        let multi = trials - unique - zero;
        let mut messages: Vec<u64> = records.iter().map(|r| r.messages).collect();
        messages.sort_unstable();
        Self {
            trials,
            unique_leader_freq: unique as f64 / trials as f64,
            zero_leader_freq: zero as f64 / trials as f64,
            multi_leader_freq: multi as f64 / trials as f64,
            msg_quantiles: (
                quantile_sorted(&messages, 0.50),
                quantile_sorted(&messages, 0.90),
                quantile_sorted(&messages, 0.99),
                *messages.last().unwrap(),
            ),
            round_max: records.iter().map(|r| r.rounds).max().unwrap(),
            ci_95: wilson_halfwidth(unique, trials),
        }
    }

    /// Stable key-value text record, byte-identical across reruns.
    pub fn to_canonical_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "report v1").unwrap();
        writeln!(out, "trials {}", self.trials).unwrap();
        writeln!(out, "unique_leader_freq {:.6}", self.unique_leader_freq).unwrap();
        writeln!(out, "zero_leader_freq {:.6}", self.zero_leader_freq).unwrap();
        writeln!(out, "multi_leader_freq {:.6}", self.multi_leader_freq).unwrap();
        writeln!(out, "ci95_halfwidth {:.6}", self.ci_95).unwrap();
        writeln!(out, "msg_p50 {}", self.msg_quantiles.0).unwrap();
        writeln!(out, "msg_p90 {}", self.msg_quantiles.1).unwrap();
        writeln!(out, "msg_p99 {}", self.msg_quantiles.2).unwrap();
        writeln!(out, "msg_max {}", self.msg_quantiles.3).unwrap();
        writeln!(out, "round_max {}", self.round_max).unwrap();
        out
    }
}

/// Flat per-trial table for external plotting.
pub fn trials_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("trial,seed,leaders,messages,rounds\n");
    for r in records {
        writeln!(out, "{},{},{},{},{}", r.trial, r.seed, r.leaders, r.messages, r.rounds).unwrap();
    }
    out
}

fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    rng::derive(master_seed, rng::STREAM_TRIAL, trial)
}

/// Run `trials` independent seeded executions and collect their records.
///
/// Per-trial seeds are fixed by `(master_seed, trial index)`, so results
/// are identical no matter how the work is divided: `workers > 1` farms
/// contiguous chunks across threads.
pub fn run_trials<P>(
    topology: &Topology,
    protocol: &P,
    config: &ModelConfig,
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<TrialRecord>, AnalysisError>
where
    P: Protocol + Sync,
{
    if trials == 0 {
        return Err(AnalysisError::InvalidArgument("trials must be >= 1".into()));
    }
    let one = |trial: u64| -> Result<TrialRecord, AnalysisError> {
        let seed = trial_seed(master_seed, trial);
        let trace =
            run(topology, protocol, config, seed).map_err(|source| AnalysisError::Trial { trial, source })?;
        Ok(TrialRecord::from_trace(trial, seed, &trace))
    };

    if workers <= 1 {
        return (0..trials).map(one).collect();
    }

    let workers = workers.min(trials as usize);
    let chunk = trials.div_ceil(workers as u64);
    let results: Vec<Result<Vec<TrialRecord>, AnalysisError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers as u64)
            .map(|w| {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(trials);
                scope.spawn(move || (lo..hi).map(one).collect())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("trial worker panicked")).collect()
    });
    let mut records = Vec::with_capacity(trials as usize);
    for r in results {
        records.extend(r?);
    }
    Ok(records)
}

/// Sequential trial runner that hands each finished trace to `inspect`
/// before discarding it.
pub fn run_trials_inspect<P, F>(
    topology: &Topology,
    protocol: &P,
    config: &ModelConfig,
    trials: u64,
    master_seed: u64,
    mut inspect: F,
) -> Result<Vec<TrialRecord>, AnalysisError>
where
    P: Protocol,
    F: FnMut(u64, &Trace),
{
    if trials == 0 {
        return Err(AnalysisError::InvalidArgument("trials must be >= 1".into()));
    }
    let mut records = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let seed = trial_seed(master_seed, trial);
        let trace =
            run(topology, protocol, config, seed).map_err(|source| AnalysisError::Trial { trial, source })?;
        inspect(trial, &trace);
        records.push(TrialRecord::from_trace(trial, seed, &trace));
    }
    Ok(records)
}

/// Estimate election success over many seeded trials.
pub fn estimate_success<P>(
    topology: &Topology,
    protocol: &P,
    config: &ModelConfig,
    trials: u64,
    master_seed: u64,
) -> Result<ExperimentReport, AnalysisError>
where
    P: Protocol + Sync,
{
    let records = run_trials(topology, protocol, config, trials, master_seed, 1)?;
    Ok(ExperimentReport::from_records(&records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::Naive;
    use crate::topology::Topology;

    #[test]
    fn single_trial_frequencies_are_zero_or_one() {
        let t = Topology::complete(8).unwrap();
        let report = estimate_success(&t, &Naive::new(8), &ModelConfig::default(), 1, 7).unwrap();
        let freqs = [report.unique_leader_freq, report.zero_leader_freq, report.multi_leader_freq];
        assert!(freqs.iter().all(|f| *f == 0.0 || *f == 1.0));
        let sum: f64 = freqs.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reports_are_deterministic_and_worker_independent() {
        let t = Topology::complete(16).unwrap().assign_random_ports(3);
        let config = ModelConfig::default();
        let a = run_trials(&t, &Naive::new(16), &config, 200, 42, 1).unwrap();
        let b = run_trials(&t, &Naive::new(16), &config, 200, 42, 4).unwrap();
        assert_eq!(a, b);
        let ra = ExperimentReport::from_records(&a);
        let rb = ExperimentReport::from_records(&b);
        assert_eq!(ra.to_canonical_text(), rb.to_canonical_text());
        assert_eq!(trials_to_csv(&a), trials_to_csv(&b));
    }

    #[test]
    fn frequency_fields_partition_the_trials() {
        let t = Topology::complete(4).unwrap();
        let report = estimate_success(&t, &Naive::new(4), &ModelConfig::default(), 500, 1).unwrap();
        let sum = report.unique_leader_freq + report.zero_leader_freq + report.multi_leader_freq;
        assert!((sum - 1.0).abs() < 1e-12);
        let (p50, p90, p99, max) = report.msg_quantiles;
        assert!(p50 <= p90 && p90 <= p99 && p99 <= max);
        assert_eq!(max, 0); // the baseline never sends
    }

    #[test]
    fn naive_unique_leader_frequency_matches_closed_form() {
        // n * (1/n) * (1 - 1/n)^(n-1) at n = 64.
        let n = 64;
        let t = Topology::complete(n).unwrap();
        let report =
            estimate_success(&t, &Naive::new(n), &ModelConfig::default(), 20_000, 11).unwrap();
        let closed_form = (1.0 - 1.0 / n as f64).powi(n as i32 - 1);
        assert!(
            (report.unique_leader_freq - closed_form).abs() < 0.02,
            "got {}, closed form {closed_form}",
            report.unique_leader_freq
        );
    }
}
