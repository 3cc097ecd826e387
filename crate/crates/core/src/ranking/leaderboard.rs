use serde::{Deserialize, Serialize};

use super::PairwiseTests;
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub team: String,
    pub frs: f64,
    /// Dense displayed rank; teams in one significance group share it.
    pub rank: usize,
    /// p-value against the best team of the group (1.0 for the anchor itself).
    pub p_vs_anchor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub alpha: f64,
    pub entries: Vec<LeaderboardEntry>,
}

/// Sorts teams by FRS (lower is better) and groups them: a team joins the
/// current group when its test against the group's first member is not
/// significant, otherwise it opens the next group.
pub fn build_leaderboard(
    frs: &[(String, f64)],
    tests: &PairwiseTests,
    alpha: f64,
) -> Result<Leaderboard> {
    let mut order: Vec<&(String, f64)> = frs.iter().collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));

    let mut entries: Vec<LeaderboardEntry> = Vec::with_capacity(order.len());
    let mut anchor: Option<&str> = None;
    let mut rank = 0;
    for (team, value) in order {
        let p = match anchor {
            None => None,
            Some(a) => Some(
                tests
                    .p_value(a, team)
                    .ok_or_else(|| Error::MissingPair(a.to_string(), team.clone()))?,
            ),
        };
        let p_vs_anchor = match p {
            Some(p) if p >= alpha => p,
            _ => {
                rank += 1;
                anchor = Some(team);
                1.0
            }
        };
        entries.push(LeaderboardEntry {
            team: team.clone(),
            frs: *value,
            rank,
            p_vs_anchor,
        });
    }
    Ok(Leaderboard { alpha, entries })
}
