//! Random-walk quantities on a topology.
//!
//! The transition step moves probability mass `pi[i] / d_i` across every
//! edge `(i, j)`; the lazy variant keeps half the mass in place. The mixing
//! time is the smallest `k` such that, started from any basis distribution
//! and advanced `k` steps, one further transition lands within `1/(2n)` of
//! the stationary vector in the max norm. Basis starts suffice: the
//! deviation is linear in the start distribution, so the max over the
//! extreme points dominates every convex combination.

use thiserror::Error;

use super::Topology;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("walk on a bipartite graph does not converge without the lazy flag")]
    BipartiteNonLazy,
    #[error("mixing time did not converge within {cap} iterations")]
    IterationCap { cap: u64 },
    #[error("dense walk computation capped at n = {max}, got n = {n}")]
    TooLarge { n: usize, max: usize },
}

/// Dense mixing computations keep an n-by-n state; cap the size.
pub const MAX_DENSE_N: usize = 4096;

/// Stationary vector plus the computed mixing time.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkProfile<F = f64> {
    /// Entries `d_i / (2|E|)`.
    pub stationary: Vec<F>,
    /// Minimal round count satisfying the mixing predicate.
    pub mixing_time: u64,
    /// Whether the lazy transform was applied.
    pub lazy_applied: bool,
}

/// The stationary distribution `d_i / (2|E|)`; unaffected by the lazy flag.
pub fn stationary_distribution<F: Scalar>(topology: &Topology) -> Vec<F> {
    let two_m = F::from_count(2 * topology.edge_count());
    (0..topology.n())
        .map(|v| F::from_count(topology.degree(v)) / two_m)
        .collect()
}

/// One transition step of the (plain or lazy) walk: `out[j] = sum over
/// neighbors i of pi[i]/d_i`, halved and mixed with `pi` when lazy.
fn step<F: Scalar>(topology: &Topology, lazy: bool, pi: &[F], out: &mut [F]) {
    let half = F::from_f64(0.5).unwrap();
    for x in out.iter_mut() {
        *x = F::zero();
    }
    for (i, &mass) in pi.iter().enumerate() {
        let share = mass / F::from_count(topology.degree(i));
        for &j in topology.neighbors(i) {
            out[j as usize] += share;
        }
    }
    if lazy {
        for (x, &p) in out.iter_mut().zip(pi) {
            *x = half * *x + half * p;
        }
    }
}

fn check_size(topology: &Topology) -> Result<(), WalkError> {
    if topology.n() > MAX_DENSE_N {
        return Err(WalkError::TooLarge { n: topology.n(), max: MAX_DENSE_N });
    }
    Ok(())
}

fn check_laziness(topology: &Topology) -> Result<bool, WalkError> {
    if topology.is_bipartite() && !topology.lazy() {
        return Err(WalkError::BipartiteNonLazy);
    }
    Ok(topology.lazy())
}

/// The `1/(2n)` threshold with a few ulps of slack: the complete graph on
/// three nodes lands exactly on the predicate boundary, where rounding
/// breaks the tie the wrong way.
fn slack_threshold<F: Scalar>(n: usize) -> F {
    let threshold = F::one() / F::from_count(2 * n);
    threshold * (F::one() + F::from_f64(8.0).unwrap() * F::epsilon())
}

/// Compute the mixing time by advancing all `n` basis starts in lockstep.
///
/// At candidate value `k` the columns hold the `k`-step distributions; one
/// extra transition is applied before measuring the max-norm deviation.
/// Gives up after `64 * n` iterations.
pub fn mixing_time<F: Scalar>(topology: &Topology) -> Result<WalkProfile<F>, WalkError> {
    check_size(topology)?;
    let lazy = check_laziness(topology)?;
    let n = topology.n();
    let stationary = stationary_distribution::<F>(topology);
    let threshold = slack_threshold::<F>(n);
    let cap = 64 * n as u64;

    // columns[s] = current distribution of the walk started at node s.
    let mut columns: Vec<Vec<F>> = (0..n)
        .map(|s| {
            let mut e = vec![F::zero(); n];
            e[s] = F::one();
            e
        })
        .collect();
    let mut scratch = vec![F::zero(); n];

    for k in 0..=cap {
        let mut worst = F::zero();
        for col in &columns {
            step(topology, lazy, col, &mut scratch);
            for (x, s) in scratch.iter().zip(&stationary) {
                let dev = (*x - *s).abs();
                if dev > worst {
                    worst = dev;
                }
            }
        }
        if worst <= threshold {
            return Ok(WalkProfile { stationary, mixing_time: k, lazy_applied: lazy });
        }
        for col in columns.iter_mut() {
            step(topology, lazy, col, &mut scratch);
            std::mem::swap(col, &mut scratch);
        }
    }
    Err(WalkError::IterationCap { cap })
}

/// Independent re-check that `k` satisfies the mixing predicate.
///
/// Recomputes every basis walk from scratch - `k` plain steps, then one
/// more transition before measuring - without sharing state with
/// [`mixing_time`]'s incremental search.
pub fn verify_mixing<F: Scalar>(topology: &Topology, k: u64) -> Result<bool, WalkError> {
    check_size(topology)?;
    let lazy = check_laziness(topology)?;
    let n = topology.n();
    let two_m = F::from_count(2 * topology.edge_count());
    let threshold = slack_threshold::<F>(n);
    let mut pi = vec![F::zero(); n];
    let mut next = vec![F::zero(); n];
    for start in 0..n {
        for x in pi.iter_mut() {
            *x = F::zero();
        }
        pi[start] = F::one();
        for _ in 0..=k {
            step(topology, lazy, &pi, &mut next);
            std::mem::swap(&mut pi, &mut next);
        }
        for (v, &mass) in pi.iter().enumerate() {
            let target = F::from_count(topology.degree(v)) / two_m;
            if (mass - target).abs() > threshold {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Apply one (plain or lazy, per the flag) transition to `pi`.
///
/// Exposed for fixed-point checks; not used by the mixing search.
pub fn transition_step<F: Scalar>(topology: &Topology, lazy: bool, pi: &[F]) -> Vec<F> {
    let mut out = vec![F::zero(); pi.len()];
    step(topology, lazy, pi, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Topology;
    use proptest::prelude::*;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn stationary_matches_degree_over_two_m() {
        let k4 = Topology::complete(4).unwrap();
        assert_eq!(stationary_distribution::<f64>(&k4), vec![0.25; 4]);

        // Star: center 0 with three leaves; |E| = 3.
        let star = Topology::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let pi = stationary_distribution::<f64>(&star);
        assert!((pi[0] - 0.5).abs() < 1e-15);
        for leaf in 1..4 {
            assert!((pi[leaf] - 1.0 / 6.0).abs() < 1e-15);
        }

        let c5 = Topology::cycle(5).unwrap();
        let pi = stationary_distribution::<f64>(&c5);
        assert!(pi.iter().all(|&p| (p - 0.2).abs() < 1e-15));
    }

    #[test]
    fn stationary_sums_to_one_and_is_a_fixed_point() {
        for t in [
            Topology::complete(7).unwrap(),
            Topology::hypercube(4).unwrap(),
            Topology::cycle(9).unwrap(),
            Topology::random_regular(12, 3, 3).unwrap(),
        ] {
            let pi = stationary_distribution::<f64>(&t);
            let sum: f64 = pi.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12);
            // Fixed point under both the plain and the lazy transition.
            for lazy in [false, true] {
                let stepped = transition_step(&t, lazy, &pi);
                assert!(max_abs_diff(&stepped, &pi) <= 1e-10, "lazy={lazy}");
            }
        }
    }

    #[test]
    fn lazy_step_halves_motion() {
        let t = Topology::cycle(5).unwrap();
        let mut e0 = vec![0.0; 5];
        e0[0] = 1.0;
        let plain: Vec<f64> = transition_step(&t, false, &e0);
        let lazy: Vec<f64> = transition_step(&t, true, &e0);
        assert!((lazy[0] - 0.5).abs() < 1e-15);
        for v in 1..5 {
            assert!((lazy[v] - plain[v] / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn complete_graphs_mix_in_one_round() {
        for n in [3usize, 8, 64] {
            let t = Topology::complete(n).unwrap();
            let profile = mixing_time::<f64>(&t).unwrap();
            assert_eq!(profile.mixing_time, 1, "K_{n}");
            assert!(!profile.lazy_applied);
        }
    }

    #[test]
    fn verify_mixing_brackets_the_mixing_time() {
        let t = Topology::complete(8).unwrap();
        assert!(verify_mixing::<f64>(&t, 1).unwrap());
        assert!(!verify_mixing::<f64>(&t, 0).unwrap());
    }

    #[test]
    fn bipartite_without_lazy_is_detected_eagerly() {
        let mut c4 = Topology::cycle(4).unwrap();
        c4.set_lazy(false);
        assert!(matches!(mixing_time::<f64>(&c4), Err(WalkError::BipartiteNonLazy)));
        assert!(matches!(verify_mixing::<f64>(&c4, 5), Err(WalkError::BipartiteNonLazy)));
    }

    #[test]
    fn lazy_hypercube_dim4_regression_value() {
        // Frozen output of the dense power-iteration oracle below.
        let t = Topology::hypercube(4).unwrap();
        let profile = mixing_time::<f64>(&t).unwrap();
        assert!(profile.lazy_applied);
        assert_eq!(profile.mixing_time, 7);
        assert!(verify_mixing::<f64>(&t, profile.mixing_time).unwrap());
        assert!(!verify_mixing::<f64>(&t, profile.mixing_time - 1).unwrap());
    }

    #[test]
    fn f32_agrees_with_f64_at_small_scale() {
        let t = Topology::complete(8).unwrap();
        assert_eq!(mixing_time::<f32>(&t).unwrap().mixing_time, 1);
        let c8 = Topology::cycle(8).unwrap();
        assert_eq!(
            mixing_time::<f32>(&c8).unwrap().mixing_time,
            mixing_time::<f64>(&c8).unwrap().mixing_time
        );
    }

    #[test]
    fn dense_cap_is_enforced() {
        // Construct a sparse graph just over the cap without paying for a
        // complete one: a cycle.
        let t = Topology::cycle(MAX_DENSE_N + 1).unwrap();
        assert!(matches!(mixing_time::<f64>(&t), Err(WalkError::TooLarge { .. })));
    }

    #[test]
    fn slow_mixers_hit_the_iteration_cap() {
        // A long lazy path needs ~0.56 n^2 rounds to mix, past the 64n cap.
        let n = 141;
        let edges: Vec<(u32, u32)> = (0..n - 1).map(|v| (v as u32, v as u32 + 1)).collect();
        let t = Topology::from_edges(n, &edges).unwrap();
        assert!(t.lazy());
        match mixing_time::<f64>(&t) {
            Err(WalkError::IterationCap { cap }) => assert_eq!(cap, 64 * n as u64),
            other => panic!("expected iteration-cap error, got {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn mixing_time_is_minimal(n in 3usize..12, lazy_override in proptest::bool::ANY) {
            let mut t = Topology::cycle(2 * n + 1).unwrap(); // odd cycle: non-bipartite
            if lazy_override {
                t.set_lazy(true);
            }
            let profile = mixing_time::<f64>(&t).unwrap();
            prop_assert!(verify_mixing::<f64>(&t, profile.mixing_time).unwrap());
            if profile.mixing_time >= 1 {
                prop_assert!(!verify_mixing::<f64>(&t, profile.mixing_time - 1).unwrap());
            }
        }
    }
}
