use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::combinatorics::log10_rational;

/// A probability carried in log10 space, with the exact rational when it is
/// cheap to compute.
#[derive(Clone, Debug, PartialEq)]
pub struct Probability {
    exact: Option<BigRational>,
    log10: f64,
    degenerate: bool,
}

impl Probability {
    /// Exact value; log10 is derived from the rational itself.
    pub fn exact(value: BigRational) -> Self {
        assert!(
            !value.is_negative() && value <= BigRational::one(),
            "not a probability: {value}"
        );
        let log10 = log10_rational(&value);
        Probability {
            exact: Some(value),
            log10,
            degenerate: false,
        }
    }

    /// Exact value with a log10 computed by an independent route.
    pub fn exact_with_log10(value: BigRational, log10: f64) -> Self {
        Probability {
            exact: Some(value),
            log10: log10.min(0.0),
            degenerate: false,
        }
    }

    pub fn from_log10(log10: f64) -> Self {
        Probability {
            exact: None,
            log10: log10.min(0.0),
            degenerate: false,
        }
    }

    pub fn ratio(num: u64, den: u64) -> Self {
        Self::exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        Probability {
            exact: Some(BigRational::zero()),
            log10: f64::NEG_INFINITY,
            degenerate: false,
        }
    }

    /// Probability one for an all-zero or all-one chunk.
    pub fn degenerate_one() -> Self {
        Probability {
            exact: Some(BigRational::one()),
            log10: 0.0,
            degenerate: true,
        }
    }

    pub fn exact_value(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn log10(&self) -> f64 {
        self.log10
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn is_zero(&self) -> bool {
        self.log10 == f64::NEG_INFINITY
    }

    /// Value as a double; underflows to zero below ~1e-308.
    pub fn to_f64(&self) -> f64 {
        match &self.exact {
            Some(r) => r.to_f64().unwrap_or_else(|| 10f64.powf(self.log10)),
            None => 10f64.powf(self.log10),
        }
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        if let Some(r) = &self.exact {
            let (num, den) = (r.numer().to_string(), r.denom().to_string());
            if num.len() + den.len() <= 48 {
                if r.is_one() {
                    f.write_str("1")?;
                } else {
                    write!(f, "{num}/{den}")?;
                }
                if self.degenerate {
                    f.write_str(" [degenerate]")?;
                }
                return write!(f, " (log10 {:.6})", self.log10);
            }
        }
        if self.log10 > -300.0 {
            write!(
                f,
                "{:.6e} (log10 {:.6})",
                10f64.powf(self.log10),
                self.log10
            )
        } else {
            write!(f, "10^{:.6}", self.log10)
        }
    }
}
