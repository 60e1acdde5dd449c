//! Test-only oracles, independent of the library code paths.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

const FRAC_BITS: u32 = 400;

/// Splits a finite f64 into `mantissa · 2^exp` exactly.
fn decompose(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, exp) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    (BigInt::from(mant) * sign, exp)
}

fn shift(v: BigInt, by: i64) -> BigInt {
    if by >= 0 {
        v << by as usize
    } else {
        v >> (-by) as usize
    }
}

/// `J_n(x)` from the ascending series in 400-bit fixed-point integer
/// arithmetic, with `x` taken at its exact binary value. Each term carries a
/// truncation error below 2^-400; summation runs until terms fall below
/// 2^-200 past the peak term.
pub fn bessel_exact(n: u32, x: f64) -> f64 {
    let (m, e) = decompose(x);
    // x²/4 = m² · 2^(2e − 2)
    let m2 = &m * &m;
    let q_shift = 2 * e - 2;
    // (x/2)^n / n!
    let mut term = BigInt::from(1) << FRAC_BITS as usize;
    for k in 1..=n {
        term = shift(term * &m, e - 1) / BigInt::from(k);
    }
    let mut sum = term.clone();
    let tiny = BigInt::from(1) << (FRAC_BITS as usize - 200);
    let peak = (x.abs() / 2.0).ceil() as u64 + 2;
    let mut k: u64 = 1;
    loop {
        term = -shift(&term * &m2, q_shift) / BigInt::from(k * (k + n as u64));
        sum += &term;
        if k > peak && term.abs() < tiny {
            break;
        }
        k += 1;
    }
    // scale back: sum / 2^400, via the top bits
    let shift_out = FRAC_BITS as i64 - 60;
    let top = shift(sum, -shift_out).to_f64().unwrap();
    top * 2f64.powi(-60)
}
