//! Analytic collision probabilities and the enumeration oracles that check them.

use std::f64::consts::LN_10;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use super::combinatorics::{binomial, binomial_big, factorial, ln_binomial, ln_fact};
use super::probability::Probability;
use crate::error::{QppError, Result};
use crate::permutation::{all_permutations, BitChunk, Permutation};

/// Largest `n` for which `C(n, p)` is carried exactly.
pub const EXACT_BINOMIAL_MAX_N: usize = 64;
/// Largest `n` for which `n!`-scale quantities are carried exactly.
pub const EXACT_FACTORIAL_MAX_N: usize = 8;
/// Largest pad size for the exact `C(A, m) / C(n!, m)` rational.
pub const EXACT_PAD_MAX_M: usize = 4096;
/// Largest `n` the fixing-permutation enumeration accepts (10! = 3,628,800).
pub const ENUMERATION_MAX_N: usize = 10;
/// Largest number of pads the exhaustive pad enumeration will visit.
pub const EXHAUSTIVE_PAD_LIMIT: u64 = 5_000_000;

/// Probability that a permutation drawn uniformly from all `n!` fixes a chunk
/// of popcount `p`: `p!(n-p)!/n! = 1/C(n,p)`, or one when `p` is 0 or `n`.
pub fn collision_prob_complete(n: usize, p: usize) -> Result<Probability> {
    if n < 2 {
        return Err(QppError::InvalidParameter(format!(
            "n must be at least 2, got {n}"
        )));
    }
    if p > n {
        return Err(QppError::InvalidParameter(format!(
            "popcount p={p} exceeds n={n}"
        )));
    }
    if p == 0 || p == n {
        return Ok(Probability::degenerate_one());
    }
    let log10 = -ln_binomial(n as u64, p as u64) / LN_10;
    if n <= EXACT_BINOMIAL_MAX_N {
        let exact = BigRational::new(BigInt::one(), BigInt::from(binomial(n as u64, p as u64)));
        Ok(Probability::exact_with_log10(exact, log10))
    } else {
        Ok(Probability::from_log10(log10))
    }
}

/// The `1/n` ceiling on [`collision_prob_complete`] for `1 <= p <= n-1`.
pub fn bound_one_over_n(n: usize) -> Probability {
    Probability::exact_with_log10(
        BigRational::new(BigInt::one(), BigInt::from(n)),
        -(n as f64).log10(),
    )
}

/// Outcome of checking `1/C(n,p) <= 1/n` exactly over every `1 <= p <= n-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub n: usize,
    pub holds_for_all_p: bool,
    /// Popcounts where `C(n,p) == n`, i.e. the bound is attained.
    pub equality_at: Vec<usize>,
    /// Largest collision probability over the range, in log10.
    pub max_log10: f64,
}

/// Walks the binomial row `C(n,1), ..., C(n,n-1)` with exact integers.
pub fn complete_bound_check(n: usize) -> Result<BoundCheck> {
    if n < 2 {
        return Err(QppError::InvalidParameter(format!(
            "n must be at least 2, got {n}"
        )));
    }
    let bound = BigUint::from(n);
    let mut c = BigUint::one();
    let mut holds = true;
    let mut equality_at = Vec::new();
    let mut min_binom: Option<BigUint> = None;
    for p in 1..n {
        c = c * (n - p + 1) / p;
        if c < bound {
            holds = false;
        }
        if c == bound {
            equality_at.push(p);
        }
        if min_binom.as_ref().is_none_or(|m| c < *m) {
            min_binom = Some(c.clone());
        }
    }
    let max_log10 = min_binom.map_or(0.0, |m| -super::combinatorics::log10_biguint(&m));
    Ok(BoundCheck {
        n,
        holds_for_all_p: holds,
        equality_at,
        max_log10,
    })
}

/// `p!(n-p)!`, the number of permutations fixing a chunk of popcount `p`.
pub fn fixing_permutation_count(n: usize, p: usize) -> Result<BigUint> {
    if p > n {
        return Err(QppError::InvalidParameter(format!(
            "popcount p={p} exceeds n={n}"
        )));
    }
    Ok(factorial(p as u64) * factorial((n - p) as u64))
}

/// Counts permutations fixing `chunk` by visiting all `n!` of them.
pub fn count_fixing_permutations(chunk: &BitChunk) -> Result<BigUint> {
    let n = chunk.len();
    if n == 0 || n > ENUMERATION_MAX_N {
        return Err(QppError::Infeasible {
            what: format!("enumerating {n}! permutations"),
            guidance: format!(
                "enumeration supports 1 <= n <= {ENUMERATION_MAX_N}; use fixing_permutation_count for larger n"
            ),
        });
    }
    let count = all_permutations(n)
        .filter(|perm| perm.fixes(chunk).expect("dimensions match"))
        .count();
    Ok(BigUint::from(count))
}

/// Probability that all `m` members of a pad drawn as a uniform `m`-subset of
/// the `n!` permutations fix a chunk of popcount `p`:
/// `C(p!(n-p)!, m) / C(n!, m)`.
///
/// Computed as `sum_i ln((A - i) / (B - i))` with `A = p!(n-p)!`, `B = n!`
/// and each term expanded as `ln A - ln B + ln1p(-i/A) - ln1p(-i/B)`, so it
/// stays finite for `n` in the thousands. The exact rational is attached for
/// `n <= 8`.
pub fn pad_all_fix_prob(n: usize, p: usize, m: usize) -> Result<Probability> {
    if n < 2 || p == 0 || p >= n {
        return Err(QppError::InvalidParameter(format!(
            "need n >= 2 and 1 <= p <= n-1, got n={n}, p={p}"
        )));
    }
    if m == 0 {
        return Err(QppError::InvalidParameter(
            "pad size m must be at least 1".into(),
        ));
    }
    // A = p!(n-p)! is astronomically larger than any u64 once n > 40.
    if n <= 40 {
        let a = fixing_permutation_count(n, p)?;
        if BigUint::from(m) > a {
            return Ok(Probability::zero());
        }
    }

    let ln_a = ln_fact(p as u64) + ln_fact((n - p) as u64);
    let ln_b = ln_fact(n as u64);
    let log10 =
        log_ratio_of_falling(ln_a, ln_b, -ln_binomial(n as u64, p as u64), m as u64) / LN_10;

    if n <= EXACT_FACTORIAL_MAX_N && m <= EXACT_PAD_MAX_M {
        let a = fixing_permutation_count(n, p)?;
        let b = factorial(n as u64);
        let exact = BigRational::new(
            BigInt::from(binomial_big(&a, m as u64)),
            BigInt::from(binomial_big(&b, m as u64)),
        );
        return Ok(Probability::exact_with_log10(exact, log10));
    }
    Ok(Probability::from_log10(log10))
}

/// `ln( prod_{i<m} (A-i)/(B-i) )` given `ln A`, `ln B` and `ln(A/B)`,
/// with `A <= B` and `m <= A`.
fn log_ratio_of_falling(ln_a: f64, ln_b: f64, ln_ratio: f64, m: u64) -> f64 {
    let base = m as f64 * ln_ratio;
    // Below e^-100 the i/A corrections sum to less than m^2 e^-100.
    if ln_a > 100.0 {
        return base;
    }
    let inv_a = (-ln_a).exp();
    let inv_b = (-ln_b).exp();
    if m <= 10_000_000 {
        let corr: f64 = (0..m)
            .map(|i| {
                let i = i as f64;
                (-i * inv_a).ln_1p() - (-i * inv_b).ln_1p()
            })
            .sum();
        return base + corr;
    }
    // ln C(A,m) - ln C(B,m) through log-gamma for very large pads.
    use statrs::function::gamma::ln_gamma;
    let a = ln_a.exp().round();
    let b = ln_b.exp().round();
    let m = m as f64;
    (ln_gamma(a + 1.0) - ln_gamma(a - m + 1.0)) - (ln_gamma(b + 1.0) - ln_gamma(b - m + 1.0))
}

/// `1/n^m`, the approximation that drops `i` against `(n-1)!` and `n!`.
pub fn approx_bound_incomplete(n: usize, m: usize) -> Result<Probability> {
    if n < 2 || m == 0 {
        return Err(QppError::InvalidParameter(format!(
            "need n >= 2 and m >= 1, got n={n}, m={m}"
        )));
    }
    let log10 = -(m as f64) * (n as f64).log10();
    // Attach the exact rational while n^m stays under a few thousand bits.
    if (m as f64) * (n as f64).log2() <= 4096.0 {
        let den = BigUint::from(n).pow(m as u32);
        return Ok(Probability::exact_with_log10(
            BigRational::new(BigInt::one(), BigInt::from(den)),
            log10,
        ));
    }
    Ok(Probability::from_log10(log10))
}

/// Counts every `m`-subset of the `n!` permutations and returns the fraction
/// whose members all fix the chunk `1^p 0^(n-p)`.
pub fn exhaustive_pad_all_fix(n: usize, p: usize, m: usize) -> Result<Probability> {
    if n < 2 || p > n || m == 0 {
        return Err(QppError::InvalidParameter(format!(
            "need n >= 2, p <= n, m >= 1; got n={n}, p={p}, m={m}"
        )));
    }
    let infeasible = || QppError::Infeasible {
        what: format!("enumerating all C({n}!, {m}) pads"),
        guidance: format!(
            "exhaustive enumeration is limited to {EXHAUSTIVE_PAD_LIMIT} pads; \
             drop --exhaustive to use the closed form, or sample with --trials"
        ),
    };
    if n > ENUMERATION_MAX_N {
        return Err(infeasible());
    }
    let total = binomial_big(&factorial(n as u64), m as u64);
    if total.to_u64().is_none_or(|t| t > EXHAUSTIVE_PAD_LIMIT) {
        return Err(infeasible());
    }
    let chunk = reference_chunk(n, p);
    let fixing: Vec<bool> = all_permutations(n)
        .map(|perm| perm.fixes(&chunk).expect("dimensions match"))
        .collect();
    let universe = fixing.len();
    if m > universe {
        return Ok(Probability::zero());
    }

    let mut favourable = 0u64;
    let mut visited = 0u64;
    let mut combo: Vec<usize> = (0..m).collect();
    loop {
        visited += 1;
        if combo.iter().all(|&i| fixing[i]) {
            favourable += 1;
        }
        // Advance to the next m-subset in lexicographic order.
        let Some(pos) = (0..m).rev().find(|&k| combo[k] < universe - m + k) else {
            break;
        };
        combo[pos] += 1;
        for k in pos + 1..m {
            combo[k] = combo[k - 1] + 1;
        }
    }
    debug_assert_eq!(BigUint::from(visited), total);
    Ok(Probability::ratio(favourable, visited))
}

/// The chunk `1^p 0^(n-p)` used as the fixed reference in pad experiments.
pub fn reference_chunk(n: usize, p: usize) -> BitChunk {
    let bits: Vec<bool> = (0..n).map(|i| i < p).collect();
    BitChunk::from_bits(&bits)
}

/// True when `perm` maps the reference chunk `1^p 0^(n-p)` to itself.
pub(crate) fn fixes_prefix(perm: &Permutation, p: usize) -> bool {
    perm.map()
        .iter()
        .enumerate()
        .all(|(j, &s)| (j < p) == ((s as usize) < p))
}
