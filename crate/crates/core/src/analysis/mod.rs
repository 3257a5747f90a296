//! Collision analysis: closed forms, exhaustive oracles and Monte Carlo
//! estimates for chunks that encrypt to themselves.
//!
//! Two quantities are kept apart on purpose:
//!
//! * the per-chunk collision rate when one permutation is applied, `1/C(n,p)`
//!   for a uniformly random permutation ([`collision_prob_complete`]);
//! * the probability that *every* member of a randomly drawn pad of `m`
//!   permutations fixes a given chunk ([`pad_all_fix_prob`]), which is close
//!   to `1/n^m` for `p = 1`.

mod closed_form;
pub mod combinatorics;
mod probability;
mod simulation;

use std::fmt::Write as _;

pub use closed_form::{
    approx_bound_incomplete, bound_one_over_n, collision_prob_complete, complete_bound_check,
    count_fixing_permutations, exhaustive_pad_all_fix, fixing_permutation_count, pad_all_fix_prob,
    reference_chunk, BoundCheck, ENUMERATION_MAX_N, EXACT_BINOMIAL_MAX_N, EXACT_FACTORIAL_MAX_N,
    EXHAUSTIVE_PAD_LIMIT,
};
pub use probability::Probability;
pub use simulation::{
    monte_carlo_collision_rate, monte_carlo_collision_rate_with, shuffle_uniformity_test,
    worst_case_pad_rate, worst_case_pad_rate_with, RateEstimate, UniformityMethod,
    UniformityReport, UNIFORMITY_P_THRESHOLD,
};

use crate::error::Result;

/// Collision probability quoted for 4096-bit chunks: 0.025 %.
pub const PERCENT_0_025: f64 = 2.5e-4;

/// Column schema of the tabular report.
pub const REPORT_COLUMNS: [&str; 8] = [
    "n",
    "p",
    "m",
    "exact_log10",
    "approx_log10",
    "observed_rate",
    "trials",
    "stderr",
];

#[derive(Clone, Debug, PartialEq)]
pub struct CollisionReport {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    /// One permutation drawn from all `n!`.
    pub complete_group_prob: Probability,
    pub bound_1_over_n: Probability,
    /// Every member of a random `m`-pad fixes the chunk.
    pub pad_all_fix_prob: Probability,
    /// Same event counted by visiting every pad, when requested.
    pub enumerated_pad_all_fix: Option<Probability>,
    pub approx_1_over_n_pow_m: Probability,
    pub observed: Option<RateEstimate>,
}

impl CollisionReport {
    pub fn new(n: usize, p: usize, m: usize) -> Result<Self> {
        let complete_group_prob = collision_prob_complete(n, p)?;
        let pad = if p == 0 || p == n {
            Probability::degenerate_one()
        } else {
            pad_all_fix_prob(n, p, m)?
        };
        Ok(CollisionReport {
            n,
            p,
            m,
            complete_group_prob,
            bound_1_over_n: bound_one_over_n(n),
            pad_all_fix_prob: pad,
            enumerated_pad_all_fix: None,
            approx_1_over_n_pow_m: approx_bound_incomplete(n, m)?,
            observed: None,
        })
    }

    /// Adds the exhaustive pad count (small `n` only).
    pub fn with_enumeration(mut self) -> Result<Self> {
        self.enumerated_pad_all_fix = Some(exhaustive_pad_all_fix(self.n, self.p, self.m)?);
        Ok(self)
    }

    /// Adds a Monte Carlo estimate of the per-chunk collision rate.
    pub fn with_monte_carlo(mut self, trials: u64, seed: &crate::keystream::Seed) -> Result<Self> {
        self.observed = Some(monte_carlo_collision_rate(
            self.n, self.p, self.m, trials, seed,
        )?);
        Ok(self)
    }

    /// True when the single-permutation collision probability is below 0.025 %.
    pub fn below_0_025_percent(&self) -> bool {
        self.complete_group_prob.to_f64() < PERCENT_0_025
    }

    pub fn csv_row(&self) -> String {
        let mut fields = vec![
            self.n.to_string(),
            self.p.to_string(),
            self.m.to_string(),
            fmt_log(self.pad_all_fix_prob.log10()),
            fmt_log(self.approx_1_over_n_pow_m.log10()),
        ];
        match &self.observed {
            Some(o) => {
                fields.push(format!("{:.9}", o.rate));
                fields.push(o.trials.to_string());
                fields.push(format!("{:.9}", o.stderr));
            }
            None => fields.extend([String::new(), String::new(), String::new()]),
        }
        fields.join(",")
    }

    /// Line-oriented `key: value` text block.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n={} p={} m={}", self.n, self.p, self.m);
        let _ = writeln!(s, "  complete_group_prob: {}", self.complete_group_prob);
        let _ = writeln!(s, "  bound_1_over_n: {}", self.bound_1_over_n);
        let _ = writeln!(
            s,
            "  below_0.025_percent: {}",
            if self.below_0_025_percent() {
                "yes"
            } else {
                "no"
            }
        );
        let _ = writeln!(s, "  pad_all_fix_prob: {}", self.pad_all_fix_prob);
        if let Some(e) = &self.enumerated_pad_all_fix {
            let _ = writeln!(s, "  pad_all_fix_enumerated: {e}");
        }
        let _ = writeln!(s, "  approx_1_over_n_pow_m: {}", self.approx_1_over_n_pow_m);
        if let Some(o) = &self.observed {
            let _ = writeln!(
                s,
                "  observed_rate: {:.9} (trials {}, stderr {:.3e})",
                o.rate, o.trials, o.stderr
            );
        }
        s
    }
}

pub fn csv_header() -> String {
    REPORT_COLUMNS.join(",")
}

pub(crate) fn fmt_log(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v:.12}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_for_4096() {
        let r = CollisionReport::new(4096, 1, 1).unwrap();
        assert!(r.below_0_025_percent());
        assert!(r.to_text().contains("below_0.025_percent: yes"));
        let row = r.csv_row();
        assert!(row.starts_with("4096,1,1,-3.612359947968"), "{row}");
        assert_eq!(row.split(',').count(), REPORT_COLUMNS.len());
    }

    #[test]
    fn report_with_enumeration() {
        let r = CollisionReport::new(4, 1, 2)
            .unwrap()
            .with_enumeration()
            .unwrap();
        assert_eq!(r.enumerated_pad_all_fix, Some(Probability::ratio(5, 92)));
        assert!(r.to_text().contains("5/92"));
    }

    #[test]
    fn degenerate_report() {
        let r = CollisionReport::new(8, 0, 4).unwrap();
        assert!(r.complete_group_prob.is_degenerate());
        assert_eq!(r.pad_all_fix_prob.log10(), 0.0);
    }
}
