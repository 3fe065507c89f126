//! Order-independent floating-point summation.
//!
//! [`ExactSum`] keeps the running sum as a fixed-point integer wide enough to
//! hold any finite `f64` without rounding, so the result does not depend on
//! the order in which samples were added or partial sums merged.

use std::fmt;

const LIMB_BITS: u32 = 32;
const LIMBS: usize = 68;
/// Limb 0 carries weight `2^-OFFSET`; smallest subnormal is `2^-1074`.
const OFFSET: i32 = 1088;
const RENORMALIZE_EVERY: u32 = 1 << 30;

#[derive(Clone)]
pub struct ExactSum {
    limbs: [i64; LIMBS],
    pending: u32,
}

impl Default for ExactSum {
    fn default() -> Self {
        ExactSum {
            limbs: [0; LIMBS],
            pending: 0,
        }
    }
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        assert!(x.is_finite(), "cannot accumulate {x}");
        if x == 0.0 {
            return;
        }
        let bits = x.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let pos = (exp + OFFSET) as u32;
        let limb = (pos / LIMB_BITS) as usize;
        let wide = u128::from(mantissa) << (pos % LIMB_BITS);
        let sign = if x < 0.0 { -1 } else { 1 };
        for i in 0..3 {
            let chunk = ((wide >> (LIMB_BITS * i as u32)) & 0xffff_ffff) as i64;
            self.limbs[limb + i] += sign * chunk;
        }
        self.pending += 1;
        if self.pending >= RENORMALIZE_EVERY {
            self.normalize();
        }
    }

    /// Adds another accumulator; exact, hence associative and commutative.
    pub fn merge(&mut self, other: &ExactSum) {
        self.normalize();
        let mut other = other.clone();
        other.normalize();
        for (a, b) in self.limbs.iter_mut().zip(other.limbs.iter()) {
            *a += *b;
        }
        self.normalize();
    }

    fn normalize(&mut self) {
        for k in 0..LIMBS - 1 {
            let carry = self.limbs[k] >> LIMB_BITS;
            self.limbs[k] -= carry << LIMB_BITS;
            self.limbs[k + 1] += carry;
        }
        self.pending = 0;
    }

    fn canonical(&self) -> [i64; LIMBS] {
        let mut c = self.clone();
        c.normalize();
        c.limbs
    }

    /// The sum rounded to `f64`.
    pub fn value(&self) -> f64 {
        let mut limbs = self.canonical();
        // two's complement: a negative sum shows as a negative top limb
        let negative = limbs[LIMBS - 1] < 0;
        if negative {
            let mut m = ExactSum { limbs: limbs.map(|l| -l), pending: 0 };
            m.normalize();
            limbs = m.limbs;
        }
        let magnitude = limbs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &l)| l != 0)
            .fold(0.0, |acc, (k, &l)| {
                let e = LIMB_BITS as i32 * k as i32 - OFFSET;
                // 2^e alone underflows for the lowest limbs
                let term = if e < -1000 {
                    l as f64 * 2f64.powi(e + 128) * 2f64.powi(-128)
                } else {
                    l as f64 * 2f64.powi(e)
                };
                acc + term
            });
        if negative { -magnitude } else { magnitude }
    }
}

impl PartialEq for ExactSum {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl fmt::Debug for ExactSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactSum({:e})", self.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cancellation_is_exact() {
        let mut s = ExactSum::new();
        s.add(1e300);
        s.add(1.0);
        s.add(-1e300);
        assert_eq!(s.value(), 1.0);

        let mut t = ExactSum::new();
        t.add(0.1);
        t.add(0.2);
        t.add(-0.3);
        // 0.1 + 0.2 - 0.3 in exact binary arithmetic
        assert_eq!(t.value(), 2.0f64.powi(-55));
    }

    #[test]
    fn subnormals_and_extremes() {
        let mut s = ExactSum::new();
        s.add(f64::MIN_POSITIVE / 4.0);
        s.add(f64::MIN_POSITIVE / 4.0);
        assert_eq!(s.value(), f64::MIN_POSITIVE / 2.0);
        let mut big = ExactSum::new();
        big.add(f64::MAX / 2.0);
        assert_eq!(big.value(), f64::MAX / 2.0);
    }

    proptest! {
        #[test]
        fn order_independent(xs in prop::collection::vec(-1e6f64..1e6, 0..60), split in 0usize..60) {
            let split = split.min(xs.len());
            let mut whole = ExactSum::new();
            xs.iter().for_each(|&x| whole.add(x));
            let mut rev = ExactSum::new();
            xs.iter().rev().for_each(|&x| rev.add(x));
            let (mut left, mut right) = (ExactSum::new(), ExactSum::new());
            xs[..split].iter().for_each(|&x| left.add(x));
            xs[split..].iter().for_each(|&x| right.add(x));
            let mut lr = left.clone();
            lr.merge(&right);
            let mut rl = right;
            rl.merge(&left);
            prop_assert_eq!(&whole, &rev);
            prop_assert_eq!(&whole, &lr);
            prop_assert_eq!(&lr, &rl);
            prop_assert_eq!(whole.value().to_bits(), lr.value().to_bits());
            let naive: f64 = xs.iter().sum();
            prop_assert!((whole.value() - naive).abs() <= 1e-9 * xs.iter().map(|x| x.abs()).sum::<f64>().max(1.0));
        }
    }
}
