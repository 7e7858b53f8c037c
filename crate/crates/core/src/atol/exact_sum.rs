//! Order-independent exact accumulation of nonnegative f64 summands.
//!
//! Every f64 is an integer multiple of 2^-1074, so the running sum is kept
//! as an exact big integer in units of 2^-1074 and rounded to the nearest
//! f64 (ties to even) only when read. This makes the result a pure function
//! of the summand multiset: reordering cannot change a single bit, and
//! doubling every summand exactly doubles the result.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    acc: BigUint,
}

impl ExactSum {
    pub fn new() -> Self {
        ExactSum { acc: BigUint::zero() }
    }

    /// Adds a finite, nonnegative summand.
    pub fn add(&mut self, v: f64) {
        debug_assert!(v.is_finite() && v >= 0.0);
        if v == 0.0 {
            return;
        }
        let bits = v.to_bits();
        let exp_field = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exp) = if exp_field == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), exp_field - 1075)
        };
        let shift = (exp + 1074) as u64;
        self.acc += BigUint::from(mantissa) << shift;
    }

    /// The correctly rounded f64 value of the exact sum.
    pub fn value(&self) -> f64 {
        if self.acc.is_zero() {
            return 0.0;
        }
        let nbits = self.acc.bits();
        if nbits <= 53 {
            let m = self.acc.to_u64().expect("<= 53 bits");
            return compose(m, -1074);
        }
        let shift_out = nbits - 53;
        let mut head = (&self.acc >> shift_out).to_u64().expect("53 bits");
        let rem = &self.acc - (BigUint::from(head) << shift_out);
        let half = BigUint::from(1u64) << (shift_out - 1);
        match rem.cmp(&half) {
            std::cmp::Ordering::Greater => head += 1,
            std::cmp::Ordering::Equal => head += head & 1,
            std::cmp::Ordering::Less => {}
        }
        let mut exp = shift_out as i64 - 1074;
        if head == 1u64 << 53 {
            head >>= 1;
            exp += 1;
        }
        compose(head, exp)
    }
}

/// Builds `m * 2^exp` for `m` of at most 53 bits, assuming the result is in
/// range (callers keep it between subnormals and 2^63).
fn compose(m: u64, exp: i64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let nb = 64 - m.leading_zeros() as i64;
    let msb_exp = exp + nb - 1;
    if msb_exp < -1022 {
        // Subnormal range: by construction the value is exact here.
        debug_assert!(exp >= -1074);
        return f64::from_bits(m << (exp + 1074));
    }
    let m53 = m << (53 - nb);
    let frac = m53 & ((1u64 << 52) - 1);
    let biased = (msb_exp + 1023) as u64;
    f64::from_bits((biased << 52) | frac)
}
