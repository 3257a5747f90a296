//! Monte Carlo estimators and shuffle uniformity tests.
//!
//! Every trial reads its own counter-addressed keystream
//! `(seed, domain, trial)`, so results depend only on the seed and the trial
//! count, never on how the trials are split across threads.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::closed_form::fixes_prefix;
use crate::error::{QppError, Result};
use crate::exec::Exec;
use crate::keystream::{Keystream, Seed, DOMAIN_PAD_TRIAL, DOMAIN_SHUFFLE, DOMAIN_TRIAL};
use crate::permutation::{factorial_usize, Permutation, ShuffleMode};

const BLOCK: usize = 4096;

/// An observed Bernoulli rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    pub hits: u64,
    pub trials: u64,
    pub rate: f64,
    /// `sqrt(rate (1 - rate) / trials)`.
    pub stderr: f64,
}

impl RateEstimate {
    pub fn new(hits: u64, trials: u64) -> Self {
        let rate = hits as f64 / trials as f64;
        RateEstimate {
            hits,
            trials,
            rate,
            stderr: (rate * (1.0 - rate) / trials as f64).sqrt(),
        }
    }

    /// Distance from `expected` in units of the binomial standard error at
    /// `expected`.
    pub fn sigmas_from(&self, expected: f64) -> f64 {
        let sd = (expected * (1.0 - expected) / self.trials as f64).sqrt();
        if sd == 0.0 {
            return if self.rate == expected {
                0.0
            } else {
                f64::INFINITY
            };
        }
        (self.rate - expected).abs() / sd
    }
}

fn count_blocks<F>(trials: u64, exec: Exec, trial: F) -> u64
where
    F: Fn(u64) -> bool + Sync + Send,
{
    let blocks = trials.div_ceil(BLOCK as u64) as usize;
    exec.sum_range(blocks, |b| {
        let start = (b * BLOCK) as u64;
        let end = (start + BLOCK as u64).min(trials);
        (start..end).filter(|&t| trial(t)).count() as u64
    })
}

/// Per-chunk collision rate. Each trial draws a fresh pad of `m` unbiased
/// permutations and a random chunk of popcount `p`, applies the scheduled pad
/// member and records whether the chunk came back unchanged. The expected
/// rate is `1/C(n,p)`.
pub fn monte_carlo_collision_rate(
    n: usize,
    p: usize,
    m: usize,
    trials: u64,
    seed: &Seed,
) -> Result<RateEstimate> {
    monte_carlo_collision_rate_with(n, p, m, trials, seed, Exec::default())
}

pub fn monte_carlo_collision_rate_with(
    n: usize,
    p: usize,
    m: usize,
    trials: u64,
    seed: &Seed,
    exec: Exec,
) -> Result<RateEstimate> {
    if n == 0 || p > n || m == 0 || trials == 0 {
        return Err(QppError::InvalidParameter(format!(
            "need n >= 1, p <= n, m >= 1, trials >= 1; got n={n}, p={p}, m={m}, trials={trials}"
        )));
    }
    let hits = count_blocks(trials, exec, |t| {
        let mut stream = Keystream::new(seed, DOMAIN_TRIAL, t);
        // Random support of size p: the first p slots of a partial shuffle.
        let mut positions: Vec<u32> = (0..n as u32).collect();
        for i in 0..p {
            let j = i + stream.below((n - i) as u64) as usize;
            positions.swap(i, j);
        }
        let mut ones = vec![false; n];
        for &pos in &positions[..p] {
            ones[pos as usize] = true;
        }
        // Only the scheduled member of the fresh pad is ever applied, so only
        // it is materialised; member j has its own substream.
        let member = stream.below(m as u64);
        let mut member_stream = Keystream::derive(seed, DOMAIN_TRIAL, t, member);
        let perm = Permutation::generate(n, ShuffleMode::UnbiasedMode, &mut member_stream);
        perm.map()
            .iter()
            .enumerate()
            .all(|(j, &s)| ones[j] == ones[s as usize])
    });
    Ok(RateEstimate::new(hits, trials))
}

/// Fraction of pads, each a uniform `m`-subset of distinct permutations, in
/// which every member fixes the reference chunk `1^p 0^(n-p)`.
pub fn worst_case_pad_rate(
    n: usize,
    p: usize,
    m: usize,
    pad_trials: u64,
    seed: &Seed,
) -> Result<RateEstimate> {
    worst_case_pad_rate_with(n, p, m, pad_trials, seed, Exec::default())
}

pub fn worst_case_pad_rate_with(
    n: usize,
    p: usize,
    m: usize,
    pad_trials: u64,
    seed: &Seed,
    exec: Exec,
) -> Result<RateEstimate> {
    if n == 0 || p > n || m == 0 || pad_trials == 0 {
        return Err(QppError::InvalidParameter(format!(
            "need n >= 1, p <= n, m >= 1, trials >= 1; got n={n}, p={p}, m={m}"
        )));
    }
    if n <= 20 && m > factorial_usize(n) {
        return Err(QppError::InvalidParameter(format!(
            "cannot choose {m} distinct permutations out of {n}!"
        )));
    }
    let hits = count_blocks(pad_trials, exec, |t| {
        let mut stream = Keystream::new(seed, DOMAIN_PAD_TRIAL, t);
        let mut members: Vec<Permutation> = Vec::with_capacity(m);
        // Members are drawn without replacement; the trial fails at the first
        // one that moves the chunk, which leaves the all-fix probability
        // unchanged.
        while members.len() < m {
            let perm = Permutation::generate(n, ShuffleMode::UnbiasedMode, &mut stream);
            if members.contains(&perm) {
                continue;
            }
            if !fixes_prefix(&perm, p) {
                return false;
            }
            members.push(perm);
        }
        true
    });
    Ok(RateEstimate::new(hits, pad_trials))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UniformityMethod {
    /// Visit every admissible keystream `K` once.
    Exhaustive,
    Sampled {
        samples: u64,
        seed: Seed,
    },
}

/// Largest `n` for exhaustive uniformity runs (`6^6 = 46656` paper-mode keys).
pub const UNIFORMITY_EXHAUSTIVE_MAX_N: usize = 6;
/// Largest `n` for sampled runs (`8! = 40320` buckets).
pub const UNIFORMITY_SAMPLED_MAX_N: usize = 8;
/// Sampled runs pass when the chi-square p-value exceeds this.
pub const UNIFORMITY_P_THRESHOLD: f64 = 0.001;

#[derive(Clone, Debug, PartialEq)]
pub struct UniformityReport {
    pub n: usize,
    pub mode: ShuffleMode,
    /// Count per permutation, indexed by lexicographic rank.
    pub counts: Vec<u64>,
    pub total: u64,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Exhaustive: every count equal. Sampled: `p_value` above threshold.
    pub uniform: bool,
}

pub fn shuffle_uniformity_test(
    n: usize,
    mode: ShuffleMode,
    method: UniformityMethod,
) -> Result<UniformityReport> {
    if n < 2 {
        return Err(QppError::InvalidParameter(format!(
            "n must be at least 2, got {n}"
        )));
    }
    let buckets = factorial_usize(n.min(UNIFORMITY_SAMPLED_MAX_N));
    let mut counts;
    match method {
        UniformityMethod::Exhaustive => {
            if n > UNIFORMITY_EXHAUSTIVE_MAX_N {
                return Err(QppError::Infeasible {
                    what: format!("exhaustive shuffle enumeration at n={n}"),
                    guidance: format!(
                        "exhaustive mode supports n <= {UNIFORMITY_EXHAUSTIVE_MAX_N}; use sampled mode"
                    ),
                });
            }
            counts = vec![0u64; buckets];
            let ranges: Vec<(u64, u64)> = (1..=n).map(|i| mode.k_range(n, i)).collect();
            let mut k: Vec<u64> = ranges.iter().map(|r| r.0).collect();
            loop {
                let perm = Permutation::generate_from_keystream(n, &k, mode)?;
                counts[perm.lexicographic_rank()] += 1;
                // Odometer over the admissible K sequences.
                let mut pos = 0;
                loop {
                    if pos == n {
                        return Ok(finish(n, mode, counts, true));
                    }
                    if k[pos] < ranges[pos].1 {
                        k[pos] += 1;
                        break;
                    }
                    k[pos] = ranges[pos].0;
                    pos += 1;
                }
            }
        }
        UniformityMethod::Sampled { samples, seed } => {
            if n > UNIFORMITY_SAMPLED_MAX_N || samples == 0 {
                return Err(QppError::Infeasible {
                    what: format!("sampled shuffle test at n={n} with {samples} samples"),
                    guidance: format!(
                        "sampled mode supports n <= {UNIFORMITY_SAMPLED_MAX_N} and samples >= 1"
                    ),
                });
            }
            counts = vec![0u64; buckets];
            for s in 0..samples {
                let mut stream = Keystream::new(&seed, DOMAIN_SHUFFLE, s);
                let perm = Permutation::generate(n, mode, &mut stream);
                counts[perm.lexicographic_rank()] += 1;
            }
            Ok(finish(n, mode, counts, false))
        }
    }
}

fn finish(n: usize, mode: ShuffleMode, counts: Vec<u64>, exhaustive: bool) -> UniformityReport {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let chi_square: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dof = counts.len() - 1;
    let p_value = ChiSquared::new(dof as f64)
        .map(|d| d.sf(chi_square))
        .unwrap_or(f64::NAN);
    let uniform = if exhaustive {
        counts.iter().all(|&c| c == counts[0])
    } else {
        p_value > UNIFORMITY_P_THRESHOLD
    };
    UniformityReport {
        n,
        mode,
        counts,
        total,
        chi_square,
        dof,
        p_value,
        uniform,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_popcount_always_collides() {
        let r = monte_carlo_collision_rate(8, 0, 16, 1000, &Seed::from_u64(1)).unwrap();
        assert_eq!(r.rate, 1.0);
        let r = monte_carlo_collision_rate(8, 8, 16, 1000, &Seed::from_u64(1)).unwrap();
        assert_eq!(r.rate, 1.0);
    }

    #[test]
    fn monte_carlo_is_partition_independent() {
        let seed = Seed::from_u64(5);
        let a = monte_carlo_collision_rate_with(8, 2, 4, 20_000, &seed, Exec::Sequential).unwrap();
        let b = monte_carlo_collision_rate_with(8, 2, 4, 20_000, &seed, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn worst_case_examples() {
        let seed = Seed::from_u64(9);
        let r = worst_case_pad_rate(4, 1, 7, 20_000, &seed).unwrap();
        assert_eq!(r.hits, 0);
        let r = worst_case_pad_rate(2, 1, 1, 100_000, &seed).unwrap();
        assert!(r.sigmas_from(0.5) < 5.0, "{r:?}");
        assert!(worst_case_pad_rate(3, 1, 7, 10, &seed).is_err());
    }

    #[test]
    fn n3_exhaustive() {
        let u = shuffle_uniformity_test(3, ShuffleMode::UnbiasedMode, UniformityMethod::Exhaustive)
            .unwrap();
        assert_eq!(u.counts, vec![1; 6]);
        assert!(u.uniform);
        let p = shuffle_uniformity_test(3, ShuffleMode::PaperMode, UniformityMethod::Exhaustive)
            .unwrap();
        assert_eq!(p.total, 27);
        assert!(!p.uniform);
        assert!(
            shuffle_uniformity_test(7, ShuffleMode::PaperMode, UniformityMethod::Exhaustive)
                .is_err()
        );
    }

    #[test]
    fn sigmas() {
        let r = RateEstimate::new(50, 100);
        assert_eq!(r.sigmas_from(0.5), 0.0);
        assert!((r.stderr - 0.05).abs() < 1e-12);
        assert_eq!(RateEstimate::new(10, 10).sigmas_from(1.0), 0.0);
    }
}
