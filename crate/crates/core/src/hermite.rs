//! Incomplete two-dimensional Hermite polynomials and the small combinatorial
//! helpers they need.
//!
//! `h_{n,m}(x, y | ε) = Σ_{i=0}^{min(n,m)} C(n,i) C(m,i) i! ε^i x^{n-i} y^{m-i}`
//! shows up in the Fock-basis phase-space kernels; indices are capped at 30 so
//! every coefficient stays exactly representable.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest index for which `incomplete_hermite_2d` is evaluated.
pub const MAX_HERMITE_INDEX: usize = 30;

const LOG_SPACE_THRESHOLD: usize = 20;

/// Exact factorial for n ≤ 33 (largest that fits u128 comfortably below 2^128).
fn factorial_u128(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// n! as f64; exact integer arithmetic below the log-space threshold,
/// exp(lgamma) above it.
pub fn factorial(n: usize) -> f64 {
    if n <= LOG_SPACE_THRESHOLD {
        factorial_u128(n) as f64
    } else {
        ln_factorial(n).exp()
    }
}

/// ln(n!) via the Stirling series (accurate to ~1e-12 for n ≥ 10).
pub fn ln_factorial(n: usize) -> f64 {
    if n <= LOG_SPACE_THRESHOLD {
        (factorial_u128(n) as f64).ln()
    } else {
        let x = n as f64 + 1.0;
        // Stirling expansion of lgamma(x).
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
            + inv / 12.0 - inv * inv2 / 360.0 + inv * inv2 * inv2 / 1260.0
    }
}

/// Binomial coefficient C(n, k) as f64 (exact for n ≤ 30).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= LOG_SPACE_THRESHOLD {
        (factorial_u128(n) / (factorial_u128(k) * factorial_u128(n - k))) as f64
    } else if n <= 33 {
        // Still exact in u128.
        (factorial_u128(n) / (factorial_u128(k) * factorial_u128(n - k))) as f64
    } else {
        (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp()
    }
}

/// Incomplete 2D Hermite polynomial `h_{n,m}(x, y | ε)`.
///
/// Rejects n or m above [`MAX_HERMITE_INDEX`] rather than silently losing
/// precision in the binomial coefficients.
pub fn incomplete_hermite_2d(
    n: usize,
    m: usize,
    x: Complex64,
    y: Complex64,
    eps: Complex64,
) -> Result<Complex64> {
    if n > MAX_HERMITE_INDEX || m > MAX_HERMITE_INDEX {
        return Err(Error::IndexError(format!(
            "incomplete_hermite_2d supports indices up to {MAX_HERMITE_INDEX}, got ({n}, {m})"
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let kmax = n.min(m);
    for i in 0..=kmax {
        let coeff = binomial(n, i) * binomial(m, i) * factorial(i);
        acc += coeff * eps.powu(i as u32) * x.powu((n - i) as u32) * y.powu((m - i) as u32);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn h00_is_one() {
        let h = incomplete_hermite_2d(0, 0, c(1.3, 0.2), c(-0.4, 1.0), c(0.7, 0.0)).unwrap();
        assert_eq!(h, c(1.0, 0.0));
    }

    #[test]
    fn h11_is_xy_plus_eps() {
        let x = c(0.5, -1.2);
        let y = c(2.0, 0.3);
        let e = c(-0.25, 0.0);
        let h = incomplete_hermite_2d(1, 1, x, y, e).unwrap();
        let expected = x * y + e;
        assert!((h - expected).norm() < 1e-14);
    }

    #[test]
    fn h21_by_hand() {
        // h_{2,1} = x^2 y + 2 ε x
        let x = c(1.1, 0.4);
        let y = c(-0.7, 0.9);
        let e = c(0.3, -0.1);
        let h = incomplete_hermite_2d(2, 1, x, y, e).unwrap();
        let expected = x * x * y + 2.0 * e * x;
        assert!((h - expected).norm() < 1e-13);
    }

    #[test]
    fn symbolic_table_up_to_five() {
        // Spot-check against hand expansions for all n,m <= 5 by comparing with
        // a second, index-swapped evaluation: h_{n,m}(x,y|e) = h_{m,n}(y,x|e).
        let x = c(0.9, -0.3);
        let y = c(-1.4, 0.8);
        let e = c(0.21, 0.05);
        for n in 0..=5usize {
            for m in 0..=5usize {
                let a = incomplete_hermite_2d(n, m, x, y, e).unwrap();
                let b = incomplete_hermite_2d(m, n, y, x, e).unwrap();
                assert!((a - b).norm() < 1e-11 * (1.0 + a.norm()));
            }
        }
        // And a couple of fully written-out cases.
        let h22 = incomplete_hermite_2d(2, 2, x, y, e).unwrap();
        let expected = x * x * y * y + 4.0 * e * x * y + 2.0 * e * e;
        assert!((h22 - expected).norm() < 1e-12);
        let h32 = incomplete_hermite_2d(3, 2, x, y, e).unwrap();
        let expected = x.powu(3) * y * y + 6.0 * e * x * x * y + 6.0 * e * e * x;
        assert!((h32 - expected).norm() < 1e-12);
    }

    #[test]
    fn rejects_large_indices() {
        assert!(incomplete_hermite_2d(31, 0, c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn factorial_agrees_with_log_space() {
        for n in 15..=30 {
            let exact = factorial_u128(n) as f64;
            let approx = ln_factorial(n).exp();
            assert!((exact - approx).abs() / exact < 1e-10, "n = {n}");
        }
    }
}
