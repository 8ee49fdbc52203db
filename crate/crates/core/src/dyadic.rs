//! Exact dyadic rationals `num / 2^exp`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

/// Largest exponent a [`Dyadic`] may carry; keeps alignment shifts inside
/// `i128` for every comparison.
pub const MAX_EXP: u32 = 62;

/// `num / 2^exp`, normalized so that `num` is odd unless `exp == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: i64,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    /// # Panics
    /// If `exp > MAX_EXP`.
    pub fn new(num: i64, exp: u32) -> Self {
        assert!(exp <= MAX_EXP, "dyadic exponent {exp} exceeds {MAX_EXP}");
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic { num: n, exp: 0 }
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Dyadic::new(1, k)
    }

    fn normalize(&mut self) {
        if self.num == 0 {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().min(self.exp);
        self.num >>= tz;
        self.exp -= tz;
    }

    pub fn numerator(self) -> i64 {
        self.num
    }

    pub fn exponent(self) -> u32 {
        self.exp
    }

    /// Numerator over `2^exp` for a coarser-or-equal `self.exp`, or `None`
    /// if `self` is not a multiple of `2^-exp` or the result overflows.
    pub fn numerator_at(self, exp: u32) -> Option<i64> {
        let shift = exp.checked_sub(self.exp)?;
        let scaled = (self.num as i128) << shift;
        i64::try_from(scaled).ok()
    }

    pub fn half(self) -> Self {
        Dyadic::new(self.num, self.exp + 1)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 * 2f64.powi(-(self.exp as i32))
    }

    pub fn to_ratio(self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::one() << self.exp as usize)
    }

    fn aligned(self, other: Dyadic) -> (i128, i128, u32) {
        let exp = self.exp.max(other.exp);
        (
            (self.num as i128) << (exp - self.exp),
            (other.num as i128) << (exp - other.exp),
            exp,
        )
    }

    fn from_wide(num: i128, exp: u32) -> Self {
        let tz = if num == 0 {
            0
        } else {
            num.trailing_zeros().min(exp)
        };
        let num = num >> tz;
        let num = i64::try_from(num).expect("dyadic numerator overflow");
        Dyadic::new(num, exp - tz)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        let (a, b, exp) = self.aligned(rhs);
        Dyadic::from_wide(a + b, exp)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: Dyadic) -> Dyadic {
        self + (-rhs)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        Dyadic {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(*other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

/// Exact sum of powers of two `2^-k`, kept as a count per exponent.
#[derive(Debug, Default, Clone)]
pub struct Pow2Tally {
    counts: Vec<u64>,
}

impl Pow2Tally {
    pub fn add(&mut self, k: u32, times: u64) {
        let k = k as usize;
        if self.counts.len() <= k {
            self.counts.resize(k + 1, 0);
        }
        self.counts[k] += times;
    }

    pub fn total(&self) -> BigRational {
        let top = self.counts.len().saturating_sub(1);
        let num = self
            .counts
            .iter()
            .enumerate()
            .fold(BigInt::from(0), |acc, (k, &c)| {
                acc + (BigInt::from(c) << (top - k))
            });
        BigRational::new(num, BigInt::one() << top)
    }
}
