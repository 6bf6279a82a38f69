//! Best rational approximation by continued fractions.

use num_bigint::BigInt;
use num_integer::Integer;

use crate::linalg::{primitive_part, IntegerVector};

/// The fraction `p/q` with `1 <= q <= max_den` closest to `x`.
///
/// Walks the convergents of `x` and, once the next convergent would exceed
/// the bound, compares the last convergent with the best semiconvergent.
pub fn best_rational(x: f64, max_den: u64) -> (i64, u64) {
    assert!(max_den >= 1, "denominator bound must be positive");
    assert!(x.is_finite(), "cannot rationalize {x}");
    let max_den = max_den as i128;
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    loop {
        let a = r.floor();
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den {
            let t = (max_den - k0) / k1;
            let (hs, ks) = (t * h1 + h0, t * k1 + k0);
            let err_conv = (x - h1 as f64 / k1 as f64).abs();
            let err_semi = (x - hs as f64 / ks as f64).abs();
            return if ks > 0 && err_semi < err_conv { (hs as i64, ks as u64) } else { (h1 as i64, k1 as u64) };
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac <= 1e-12 || (x - h1 as f64 / k1 as f64).abs() <= f64::EPSILON * x.abs().max(1.0) {
            return (h1 as i64, k1 as u64);
        }
        r = 1.0 / frac;
    }
}

/// Primitive integer vector parallel to `v`: each component is rationalized
/// against the largest-magnitude one with denominators at most `max_den`.
/// `None` when the common denominator exceeds the bound.
pub fn rationalize_direction(v: &[f64], max_den: u64) -> Option<IntegerVector> {
    let (lead, &lead_value) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap_or(std::cmp::Ordering::Equal))?;
    if lead_value == 0.0 || !lead_value.is_finite() {
        return None;
    }
    let ratios: Vec<(i64, u64)> = v
        .iter()
        .enumerate()
        .map(|(i, &x)| if i == lead { (1, 1) } else { best_rational(x / lead_value, max_den) })
        .collect();
    let lcm = ratios.iter().fold(1u64, |acc, &(_, q)| acc.lcm(&q));
    if lcm > max_den {
        return None;
    }
    let sign = if lead_value < 0.0 { -1 } else { 1 };
    let w = IntegerVector(
        ratios.iter().map(|&(p, q)| BigInt::from(sign * p * (lcm / q) as i64)).collect(),
    );
    primitive_part(&w).ok()
}
