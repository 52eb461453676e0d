//! Smooth Littlewood-Paley cutoffs.
//!
//! `bump(s)` equals 1 for `|s| <= 1`, vanishes for `|s| >= 2` and uses the
//! `exp(-1/x)` gluing in between. The dyadic pieces
//! `psi_lambda(r) = bump(r/lambda) - bump(2r/lambda)` (with
//! `psi_1 = bump`) sum telescopically to `bump(r/Lambda)`.

use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

fn glue(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Even smooth cutoff supported in `[-2, 2]`, equal to one on `[-1, 1]`.
pub fn bump(s: f64) -> f64 {
    let s = s.abs();
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let a = glue(2.0 - s);
        a / (a + glue(s - 1.0))
    }
}

/// Whether `x` is a power of two `>= 1`.
pub fn is_dyadic(x: f64) -> bool {
    if !(x.is_finite() && x >= 1.0) {
        return false;
    }
    let k = x.log2().round();
    k < 1023.0 && (2.0f64).powi(k as i32) == x
}

pub fn check_dyadic(x: f64) -> Result<()> {
    if is_dyadic(x) {
        Ok(())
    } else {
        Err(Error::Argument(format!("{x} is not a dyadic number >= 1")))
    }
}

/// Dyadic multiplier `psi_lambda` evaluated at radius `r = |xi|`.
pub fn dyadic_multiplier(lambda: f64, r: f64) -> f64 {
    if lambda <= 1.0 {
        bump(r)
    } else {
        bump(r / lambda) - bump(2.0 * r / lambda)
    }
}

/// Squared `H^s` weight `sum_lambda lambda^{2s} psi_lambda(r)^2`.
///
/// At most two dyadic blocks are active at any radius.
pub fn sobolev_weight_sq(s: f64, r: f64) -> f64 {
    let top = if r <= 1.0 { 0 } else { r.log2().ceil() as i32 + 1 };
    let lo = (top - 2).max(0);
    (lo..=top)
        .map(|k| {
            let lambda = (2.0f64).powi(k);
            let p = dyadic_multiplier(lambda, r);
            lambda.powf(2.0 * s) * p * p
        })
        .sum()
}

/// Dyadic numbers `1, 2, 4, ...` up to and including `max`.
pub fn dyadics_up_to(max: f64) -> impl Iterator<Item = f64> {
    (0..64).map(|k| (2.0f64).powi(k)).take_while(move |&l| l <= max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 1.0);
        assert_eq!(bump(-1.0), 1.0);
        assert_eq!(bump(2.0), 0.0);
        assert_eq!(bump(2.5), 0.0);
        let mid = bump(1.5);
        assert!((mid - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = bump(1.0 + i as f64 / 100.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn dyadic_detection() {
        assert!(is_dyadic(1.0));
        assert!(is_dyadic(32.0));
        assert!(!is_dyadic(3.0));
        assert!(!is_dyadic(0.5));
        assert!(!is_dyadic(f64::NAN));
    }

    #[test]
    fn partition_of_unity_telescopes() {
        for i in 0..400 {
            let r = i as f64 * 0.1;
            let total: f64 = dyadics_up_to(64.0).map(|l| dyadic_multiplier(l, r)).sum();
            assert!((total - bump(r / 64.0)).abs() < 1e-14);
            if r <= 64.0 {
                assert!((total - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sobolev_weight_on_block_centers() {
        // |xi| = 2 sits entirely in the lambda = 2 block.
        assert!((sobolev_weight_sq(1.0, 2.0) - 4.0).abs() < 1e-14);
        assert!((sobolev_weight_sq(0.0, 0.3) - 1.0).abs() < 1e-14);
    }
}
