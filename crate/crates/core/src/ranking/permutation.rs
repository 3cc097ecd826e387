//! Paired sign-swap permutation test on per-case cumulative ranks.
//!
//! Under the null hypothesis the two teams' CRS values on a case are
//! exchangeable, so each permutation swaps the pair on every case with
//! probability one half and recomputes the FRS difference.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;

/// Largest case count for which `Auto` enumerates every assignment.
pub const EXHAUSTIVE_AUTO_LIMIT: usize = 20;
/// Hard cap for an explicit exhaustive request.
pub const EXHAUSTIVE_MAX: usize = 30;

const MC_CHUNK: u64 = 4096;
const EXHAUSTIVE_CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PermutationMode {
    /// Exhaustive up to [`EXHAUSTIVE_AUTO_LIMIT`] cases, Monte Carlo beyond.
    #[default]
    Auto,
    MonteCarlo,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermTestResult {
    /// FRS of the worse team minus FRS of the better one (never negative).
    pub observed_delta: f64,
    pub p_value: f64,
    /// Permutations drawn, or `2^n` assignments when exhaustive.
    pub n_permutations: u64,
    pub seed: u64,
    pub exhaustive: bool,
}

/// Per-case differences oriented so their sum is nonnegative.
fn oriented_differences(crs_a: &[f64], crs_b: &[f64]) -> Result<Vec<f64>> {
    if crs_a.len() != crs_b.len() {
        return Err(Error::LengthMismatch(crs_a.len(), crs_b.len()));
    }
    if crs_a.is_empty() {
        return Err(Error::EmptyPermutation);
    }
    let mut d: Vec<f64> = crs_a.iter().zip(crs_b).map(|(a, b)| b - a).collect();
    if d.iter().sum::<f64>() < 0.0 {
        d.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(d)
}

/// Sum threshold a permuted statistic must reach; absorbs rounding so that
/// assignments equal to the observed one always count.
fn target(d: &[f64]) -> f64 {
    let observed: f64 = d.iter().sum();
    let scale: f64 = d.iter().map(|x| x.abs()).sum();
    observed - 1e-9 * scale.max(1.0)
}

/// Paired test with the mode picked by case count.
pub fn permutation_test(
    crs_a: &[f64],
    crs_b: &[f64],
    n_perms: u64,
    seed: u64,
) -> Result<PermTestResult> {
    run(crs_a, crs_b, PermutationMode::Auto, n_perms, seed)
}

pub fn run(
    crs_a: &[f64],
    crs_b: &[f64],
    mode: PermutationMode,
    n_perms: u64,
    seed: u64,
) -> Result<PermTestResult> {
    let n = crs_a.len();
    match mode {
        PermutationMode::Exhaustive => exhaustive_test(crs_a, crs_b),
        PermutationMode::Auto if n <= EXHAUSTIVE_AUTO_LIMIT => exhaustive_test(crs_a, crs_b),
        _ => monte_carlo_test(crs_a, crs_b, n_perms, seed),
    }
}

/// Exact p-value over all `2^n` swap assignments.
pub fn exhaustive_test(crs_a: &[f64], crs_b: &[f64]) -> Result<PermTestResult> {
    let d = oriented_differences(crs_a, crs_b)?;
    let n = d.len();
    if n > EXHAUSTIVE_MAX {
        return Err(Error::TooManyCases(n, EXHAUSTIVE_MAX));
    }
    let total = 1u64 << n;
    let goal = target(&d);
    let chunks = total.div_ceil(EXHAUSTIVE_CHUNK) as usize;
    let hits: u64 = parallel::map_range(chunks, |c| {
        let start = c as u64 * EXHAUSTIVE_CHUNK;
        let end = (start + EXHAUSTIVE_CHUNK).min(total);
        (start..end)
            .filter(|&mask| {
                // bit i set = swap case i
                let s: f64 = d
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| if mask >> i & 1 == 1 { -x } else { x })
                    .sum();
                s >= goal
            })
            .count() as u64
    })
    .into_iter()
    .sum();
    Ok(PermTestResult {
        observed_delta: d.iter().sum::<f64>() / n as f64,
        p_value: hits as f64 / total as f64,
        n_permutations: total,
        seed: 0,
        exhaustive: true,
    })
}

/// Monte Carlo p-value `(hits + 1) / (n_perms + 1)`.
///
/// Permutations are drawn in fixed-size chunks, each from its own ChaCha
/// stream, so the result does not depend on how chunks are scheduled.
pub fn monte_carlo_test(
    crs_a: &[f64],
    crs_b: &[f64],
    n_perms: u64,
    seed: u64,
) -> Result<PermTestResult> {
    let d = oriented_differences(crs_a, crs_b)?;
    if n_perms == 0 {
        return Err(Error::EmptyPermutation);
    }
    let goal = target(&d);
    let chunks = n_perms.div_ceil(MC_CHUNK) as usize;
    let hits: u64 = parallel::map_range(chunks, |c| {
        let start = c as u64 * MC_CHUNK;
        let count = MC_CHUNK.min(n_perms - start);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let mut hits = 0u64;
        for _ in 0..count {
            let mut s = 0.0;
            let mut bits = 0u64;
            for (i, &x) in d.iter().enumerate() {
                if i % 64 == 0 {
                    bits = rng.next_u64();
                }
                s += if bits & 1 == 1 { -x } else { x };
                bits >>= 1;
            }
            if s >= goal {
                hits += 1;
            }
        }
        hits
    })
    .into_iter()
    .sum();
    Ok(PermTestResult {
        observed_delta: d.iter().sum::<f64>() / d.len() as f64,
        p_value: (hits + 1) as f64 / (n_perms + 1) as f64,
        n_permutations: n_perms,
        seed,
        exhaustive: false,
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one team pair; symmetric in the two names.
pub fn pair_seed(master: u64, team_a: &str, team_b: &str) -> u64 {
    let (lo, hi) = if team_a <= team_b {
        (team_a, team_b)
    } else {
        (team_b, team_a)
    };
    // FNV-1a over "lo\0hi"
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &byte in lo.as_bytes().iter().chain(&[0u8]).chain(hi.as_bytes()) {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(master ^ splitmix64(h))
}
