//! Per-case ranking of competing submissions, paired permutation tests and
//! the significance-grouped leaderboard.

mod leaderboard;
pub mod permutation;
mod ranks;

use serde::{Deserialize, Serialize};

pub use leaderboard::{build_leaderboard, Leaderboard, LeaderboardEntry, DEFAULT_ALPHA};
pub use permutation::{
    exhaustive_test, monte_carlo_test, pair_seed, permutation_test, PermTestResult, PermutationMode,
};
pub use ranks::{average_ranks_desc, per_case_ranks, RankTable, ScoreMatrix};

use crate::error::Result;
use crate::parallel;

pub const DEFAULT_PERMUTATIONS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTest {
    pub team_a: String,
    pub team_b: String,
    #[serde(flatten)]
    pub test: PermTestResult,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTests {
    pub tests: Vec<PairwiseTest>,
}

impl PairwiseTests {
    pub fn get(&self, a: &str, b: &str) -> Option<&PairwiseTest> {
        self.tests
            .iter()
            .find(|t| (t.team_a == a && t.team_b == b) || (t.team_a == b && t.team_b == a))
    }

    pub fn p_value(&self, a: &str, b: &str) -> Option<f64> {
        self.get(a, b).map(|t| t.test.p_value)
    }
}

/// Tests every unordered team pair of the table. Each pair draws from its
/// own seed, derived from `seed` and the two team names.
pub fn pairwise_tests(
    table: &RankTable,
    mode: PermutationMode,
    n_perms: u64,
    seed: u64,
) -> Result<PairwiseTests> {
    let t = table.teams.len();
    let pairs: Vec<(usize, usize)> = (0..t)
        .flat_map(|i| (i + 1..t).map(move |j| (i, j)))
        .collect();
    let tests = parallel::map_slice(&pairs, |&(i, j)| {
        let (a, b) = (&table.teams[i], &table.teams[j]);
        let s = pair_seed(seed, a, b);
        permutation::run(&table.crs[i], &table.crs[j], mode, n_perms, s).map(|test| PairwiseTest {
            team_a: a.clone(),
            team_b: b.clone(),
            test,
        })
    });
    Ok(PairwiseTests {
        tests: tests.into_iter().collect::<Result<_>>()?,
    })
}

/// Ranks, pairwise tests and leaderboard for one score matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub table: RankTable,
    pub pairwise: PairwiseTests,
    pub leaderboard: Leaderboard,
}

pub fn rank_submissions(
    matrix: &ScoreMatrix,
    mode: PermutationMode,
    n_perms: u64,
    seed: u64,
    alpha: f64,
) -> Result<RankingReport> {
    let table = per_case_ranks(matrix)?;
    let pairwise = pairwise_tests(&table, mode, n_perms, seed)?;
    let frs: Vec<(String, f64)> = table
        .teams
        .iter()
        .cloned()
        .zip(table.frs.iter().copied())
        .collect();
    let leaderboard = build_leaderboard(&frs, &pairwise, alpha)?;
    Ok(RankingReport {
        table,
        pairwise,
        leaderboard,
    })
}
