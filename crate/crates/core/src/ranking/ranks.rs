use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::CaseResult;

/// Entity scores of every team on every case.
///
/// `scores[team][case]` holds the WT, TC and ET scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub teams: Vec<String>,
    pub cases: Vec<String>,
    pub scores: Vec<Vec<[f64; 3]>>,
}

impl ScoreMatrix {
    pub fn new(teams: Vec<String>, cases: Vec<String>, scores: Vec<Vec<[f64; 3]>>) -> Result<Self> {
        if teams.len() < 2 {
            return Err(Error::TooFewTeams(teams.len()));
        }
        for (t, row) in teams.iter().zip(&scores) {
            if row.len() != cases.len() {
                let case = cases.get(row.len()).cloned().unwrap_or_default();
                return Err(Error::IncompleteMatrix {
                    team: t.clone(),
                    case,
                });
            }
        }
        if scores.len() != teams.len() {
            return Err(Error::IncompleteMatrix {
                team: teams[scores.len().min(teams.len() - 1)].clone(),
                case: cases.first().cloned().unwrap_or_default(),
            });
        }
        Ok(Self {
            teams,
            cases,
            scores,
        })
    }

    /// Assembles a matrix from per-team case results. Every team must cover
    /// exactly the same case IDs; cases are sorted lexicographically.
    pub fn from_results(teams: &[(String, Vec<CaseResult>)]) -> Result<Self> {
        if teams.len() < 2 {
            return Err(Error::TooFewTeams(teams.len()));
        }
        let mut by_team: Vec<BTreeMap<&str, [f64; 3]>> = Vec::with_capacity(teams.len());
        for (_, results) in teams {
            by_team.push(
                results
                    .iter()
                    .map(|r| (r.case_id.as_str(), r.entities.map(|e| e.score)))
                    .collect(),
            );
        }
        let reference: BTreeSet<&str> = by_team[0].keys().copied().collect();
        for (i, cases) in by_team.iter().enumerate().skip(1) {
            let these: BTreeSet<&str> = cases.keys().copied().collect();
            if these != reference {
                return Err(Error::CaseSetMismatch {
                    a: teams[0].0.clone(),
                    b: teams[i].0.clone(),
                });
            }
        }
        let cases: Vec<String> = reference.iter().map(|c| c.to_string()).collect();
        let scores = by_team
            .iter()
            .map(|m| reference.iter().map(|c| m[c]).collect())
            .collect();
        Self::new(
            teams.iter().map(|(t, _)| t.clone()).collect(),
            cases,
            scores,
        )
    }

    pub fn n_teams(&self) -> usize {
        self.teams.len()
    }

    pub fn n_cases(&self) -> usize {
        self.cases.len()
    }
}

/// Per-case ranks and the cumulative, normalized and final ranking scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub teams: Vec<String>,
    pub cases: Vec<String>,
    /// `ranks[team][case][entity]`, 1 = best, ties averaged.
    pub ranks: Vec<Vec<[f64; 3]>>,
    /// `crs[team][case]`: sum of the three entity ranks.
    pub crs: Vec<Vec<f64>>,
    /// `nrs[team][case]`: CRS divided by teams × entities.
    pub nrs: Vec<Vec<f64>>,
    /// Mean CRS over cases.
    pub frs: Vec<f64>,
}

/// Average ranks with the highest value ranked 1.
pub fn average_ranks_desc(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j share ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

#[allow(clippy::needless_range_loop)]
pub fn per_case_ranks(matrix: &ScoreMatrix) -> Result<RankTable> {
    let t = matrix.n_teams();
    if t < 2 {
        return Err(Error::TooFewTeams(t));
    }
    for (team, row) in matrix.teams.iter().zip(&matrix.scores) {
        if row.len() != matrix.n_cases() {
            return Err(Error::IncompleteMatrix {
                team: team.clone(),
                case: matrix.cases.get(row.len()).cloned().unwrap_or_default(),
            });
        }
    }
    let n_cases = matrix.n_cases();
    let mut ranks = vec![vec![[0.0; 3]; n_cases]; t];
    let mut column = vec![0.0; t];
    for c in 0..n_cases {
        for e in 0..3 {
            for (team, col) in column.iter_mut().enumerate() {
                *col = matrix.scores[team][c][e];
            }
            for (team, r) in average_ranks_desc(&column).into_iter().enumerate() {
                ranks[team][c][e] = r;
            }
        }
    }
    let crs: Vec<Vec<f64>> = ranks
        .iter()
        .map(|cases| cases.iter().map(|r| r.iter().sum()).collect())
        .collect();
    let norm = (t * 3) as f64;
    let nrs = crs
        .iter()
        .map(|row| row.iter().map(|c| c / norm).collect())
        .collect();
    let frs = crs
        .iter()
        .map(|row: &Vec<f64>| {
            if row.is_empty() {
                0.0
            } else {
                row.iter().sum::<f64>() / row.len() as f64
            }
        })
        .collect();
    Ok(RankTable {
        teams: matrix.teams.clone(),
        cases: matrix.cases.clone(),
        ranks,
        crs,
        nrs,
        frs,
    })
}
