//! Error-free transformations used by the index formulas.
//!
//! Ratios such as `2·min(d, e) / (d + e)` or `(a − (e − d)) / a` lose many
//! ulps to cancellation when evaluated naively. The helpers here keep the
//! rounding error of sums as an explicit term and fold it back in with one
//! FMA-based correction of the quotient, so results are within about one
//! ulp of the exact value for any finite inputs.

/// Knuth's two-sum: `s + err == a + b` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Compensated sum of a sequence, returned as a head plus a tail correction.
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct CompensatedSum {
    head: f64,
    tail: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, err) = two_sum(self.head, x);
        self.head = s;
        self.tail += err;
    }

    pub fn head(&self) -> f64 {
        self.head
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// Best single-double approximation of the sum.
    pub fn value(&self) -> f64 {
        self.head + self.tail
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `(num_hi + num_lo) / (den_hi + den_lo)` with one Newton correction step.
///
/// `num_lo` and `den_lo` are small tails (rounding errors) of the numerator
/// and denominator. `den_hi` must be non-zero.
#[inline]
pub fn corrected_div(num_hi: f64, num_lo: f64, den_hi: f64, den_lo: f64) -> f64 {
    let q = num_hi / den_hi;
    if !q.is_finite() {
        return q;
    }
    // residual of q against the full numerator/denominator pair
    let r = (-q).mul_add(den_hi, num_hi) + num_lo - q * den_lo;
    q + r / den_hi
}

/// `num / (a + b)` using the exact rounding error of `a + b`.
#[inline]
pub fn div_by_sum(num: f64, a: f64, b: f64) -> f64 {
    let (s, err) = two_sum(a, b);
    corrected_div(num, 0.0, s, err)
}
