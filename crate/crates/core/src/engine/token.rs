//! Wire messages and their canonical bit layout.
//!
//! The layout is fixed so that bit accounting is stable across
//! implementations: a 3-bit type tag, ranks in a `4*ceil(log2 n)`-bit
//! field (rank domain `{1..n^4}`), and walk/win counts in a field sized
//! for the quorum `2*ceil(sqrt(n*log2 n))`.

/// A message payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Token {
    /// Rank announcement sent by a candidate to a referee (complete-network
    /// election).
    Candidate { rank: u64 },
    /// Referee's reply to the highest-ranked candidate that contacted it.
    Notify,
    /// Batched random-walk token: `count` walk units of one rank.
    Walk { rank: u64, count: u64 },
    /// Batched winner notification retracing a walk, carrying an
    /// accumulated count.
    Win { rank: u64, count: u64 },
}

impl Token {
    pub fn type_name(&self) -> &'static str {
        match self {
            Token::Candidate { .. } => "CANDIDATE",
            Token::Notify => "NOTIFY",
            Token::Walk { .. } => "WALK",
            Token::Win { .. } => "WIN",
        }
    }

    pub fn rank(&self) -> Option<u64> {
        match self {
            Token::Candidate { rank } | Token::Walk { rank, .. } | Token::Win { rank, .. } => {
                Some(*rank)
            }
            Token::Notify => None,
        }
    }

    pub fn count(&self) -> Option<u64> {
        match self {
            Token::Walk { count, .. } | Token::Win { count, .. } => Some(*count),
            _ => None,
        }
    }
}

/// `ceil(log2 n)` for `n >= 1`; 0 for `n = 1`.
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n >= 1);
    64 - (n - 1).leading_zeros().min(64)
}

/// Width of the rank field for an `n`-node network: ranks live in
/// `{1..n^4}`.
pub fn rank_bits(n: usize) -> u64 {
    4 * ceil_log2(n as u64) as u64
}

/// Quorum size `2 * ceil(sqrt(n * log2 n))`.
pub fn quorum(n: usize) -> u64 {
    let nf = n as f64;
    2 * (nf * nf.log2()).sqrt().ceil() as u64
}

/// Width of the count field: counts range over `0..=quorum(n)`.
pub fn count_bits(n: usize) -> u64 {
    ceil_log2(quorum(n) + 1) as u64
}

const TAG_BITS: u64 = 3;

/// Canonical encoded size of a token in bits, for a given network size.
pub fn bit_size(token: &Token, n: usize) -> u64 {
    match token {
        Token::Notify => TAG_BITS,
        Token::Candidate { .. } => TAG_BITS + rank_bits(n),
        Token::Walk { .. } | Token::Win { .. } => TAG_BITS + rank_bits(n) + count_bits(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(ceil_log2(1025), 11);
    }

    #[test]
    fn quorum_values() {
        assert_eq!(quorum(16), 16); // 2*ceil(sqrt(64))
        assert_eq!(quorum(256), 92); // 2*ceil(sqrt(2048))
        assert_eq!(quorum(1024), 204);
        assert_eq!(quorum(4096), 444);
    }

    #[test]
    fn bit_sizes_follow_the_layout() {
        let n = 1024;
        assert_eq!(bit_size(&Token::Notify, n), 3);
        assert_eq!(bit_size(&Token::Candidate { rank: 1 }, n), 3 + 40);
        // count field: quorum 204 -> values 0..=204 -> 8 bits
        assert_eq!(bit_size(&Token::Walk { rank: 1, count: 5 }, n), 3 + 40 + 8);
        assert_eq!(
            bit_size(&Token::Win { rank: 1, count: 5 }, n),
            bit_size(&Token::Walk { rank: 1, count: 5 }, n)
        );
    }

    #[test]
    fn rank_token_fits_budget_factor_eight() {
        for n in [64usize, 256, 1024, 4096] {
            let budget = 8 * ceil_log2(n as u64) as u64;
            assert!(bit_size(&Token::Walk { rank: 1, count: 1 }, n) <= budget);
            assert!(bit_size(&Token::Candidate { rank: 1 }, n) <= budget);
        }
    }
}
