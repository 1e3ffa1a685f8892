//! Pseudo-Hermite polynomials.
//!
//! `P_n(x) = i^{-n} H_n(ix)` is the real-coefficient face of a Hermite
//! polynomial evaluated on the imaginary axis. The family obeys
//!
//! ```text
//! P_0 = 1,  P_1 = 2x,  P_{n+1} = 2x P_n + 2n P_{n-1},  P_n' = 2n P_{n-1}
//! ```
//!
//! so every occupied coefficient is strictly positive. That sign structure is
//! what makes the polynomial ratios appearing in the superpotential catalog
//! pole-free: `P_{2k}` never vanishes on the real line and `P_{2k+1}` has its
//! single zero at the origin.

use crate::error::{Error, Result};

/// Default cap on the polynomial degree.
pub const MAX_DEGREE: usize = 64;

/// A pseudo-Hermite polynomial stored in the monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoHermite {
    degree: usize,
    coeffs: Vec<f64>,
}

impl PseudoHermite {
    /// Build `P_n` by the three-term recurrence, capped at [`MAX_DEGREE`].
    pub fn new(degree: usize) -> Result<Self> {
        Self::with_max(degree, MAX_DEGREE)
    }

    /// Build `P_n` with an explicit degree cap.
    pub fn with_max(degree: usize, max: usize) -> Result<Self> {
        if degree > max {
            return Err(Error::DegreeTooLarge {
                requested: degree,
                max,
            });
        }
        let mut prev = vec![1.0];
        if degree == 0 {
            return Ok(Self {
                degree,
                coeffs: prev,
            });
        }
        let mut cur = vec![0.0, 2.0];
        for n in 1..degree {
            // P_{n+1} = 2x P_n + 2n P_{n-1}
            let mut next = vec![0.0; n + 2];
            for (j, &c) in cur.iter().enumerate() {
                next[j + 1] += 2.0 * c;
            }
            for (j, &c) in prev.iter().enumerate() {
                next[j] += 2.0 * n as f64 * c;
            }
            prev = cur;
            cur = next;
        }
        Ok(Self {
            degree,
            coeffs: cur,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Monomial coefficients, lowest order first; entries of the parity
    /// opposite to `degree` are exactly zero.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Evaluate by Horner's scheme. All occupied coefficients share a sign
    /// at any fixed x, so the sum is free of cancellation.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn base_cases() {
        assert_eq!(PseudoHermite::new(0).unwrap().coeffs(), &[1.0]);
        assert_eq!(PseudoHermite::new(1).unwrap().coeffs(), &[0.0, 2.0]);
    }

    #[test]
    fn low_degree_coefficients_match_recurrence() {
        // P_2 = 4x^2 + 2, P_3 = 8x^3 + 12x, P_4 = 16x^4 + 48x^2 + 12
        assert_eq!(PseudoHermite::new(2).unwrap().coeffs(), &[2.0, 0.0, 4.0]);
        assert_eq!(
            PseudoHermite::new(3).unwrap().coeffs(),
            &[0.0, 12.0, 0.0, 8.0]
        );
        assert_eq!(
            PseudoHermite::new(4).unwrap().coeffs(),
            &[12.0, 0.0, 48.0, 0.0, 16.0]
        );
    }

    #[test]
    fn degree_cap_is_enforced() {
        let err = PseudoHermite::new(MAX_DEGREE + 1).unwrap_err();
        match err {
            Error::DegreeTooLarge { requested, max } => {
                assert_eq!(requested, MAX_DEGREE + 1);
                assert_eq!(max, MAX_DEGREE);
            }
            other => panic!("unexpected error: {other}"),
        }
        assert!(PseudoHermite::with_max(10, 8).is_err());
    }

    #[test]
    fn occupied_coefficients_are_positive() {
        for n in 0..=20 {
            let p = PseudoHermite::new(n).unwrap();
            for (j, &c) in p.coeffs().iter().enumerate() {
                if j % 2 == n % 2 {
                    assert!(c > 0.0, "P_{n} coefficient of x^{j} is {c}");
                } else {
                    assert_eq!(c, 0.0, "P_{n} coefficient of x^{j} should vanish");
                }
            }
        }
    }

    #[test]
    fn derivative_identity() {
        // d/dx P_n = 2n P_{n-1}, checked coefficient-wise.
        for n in 1..=16 {
            let p = PseudoHermite::new(n).unwrap();
            let q = PseudoHermite::new(n - 1).unwrap();
            for j in 1..=n {
                let deriv_coeff = p.coeffs()[j] * j as f64;
                let expect = 2.0 * n as f64 * q.coeffs().get(j - 1).copied().unwrap_or(0.0);
                assert_eq!(deriv_coeff, expect, "n = {n}, power {j}");
            }
        }
    }

    /// Independent oracle: H_n(ix) by the complex three-term recurrence,
    /// scaled back to the real axis by i^{-n}.
    fn pseudo_hermite_via_complex(n: usize, x: f64) -> Complex64 {
        let z = Complex64::new(0.0, x);
        let mut prev = Complex64::new(1.0, 0.0);
        if n == 0 {
            return prev;
        }
        let mut cur = 2.0 * z;
        for j in 1..n {
            let next = 2.0 * z * cur - 2.0 * j as f64 * prev;
            prev = cur;
            cur = next;
        }
        let i_neg_n = match n % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
        i_neg_n * cur
    }

    #[test]
    fn matches_complex_hermite_evaluation() {
        for n in 0..=12 {
            let p = PseudoHermite::new(n).unwrap();
            for i in 0..64 {
                let x = -4.0 + 8.0 * i as f64 / 63.0;
                let real = p.eval(x);
                let complex = pseudo_hermite_via_complex(n, x);
                let scale = real.abs().max(1.0);
                assert!(
                    (real - complex.re).abs() / scale < 1e-12,
                    "n={n} x={x}: P={real:e} vs re(i^-n H)={:e}",
                    complex.re
                );
                assert!(
                    complex.im.abs() / scale < 1e-12,
                    "n={n} x={x}: imaginary leak {:e}",
                    complex.im
                );
            }
        }
    }

    #[test]
    fn odd_degree_single_zero_even_degree_positive() {
        let p5 = PseudoHermite::new(5).unwrap();
        let p6 = PseudoHermite::new(6).unwrap();
        let mut sign_changes = 0;
        let mut prev = f64::NAN;
        for i in 0..=400 {
            let x = -10.0 + 20.0 * i as f64 / 400.0;
            assert!(p6.eval(x) > 0.0, "P_6({x}) should be positive");
            let v = p5.eval(x);
            if v.abs() > 1e-12 {
                if !prev.is_nan() && v.signum() != prev.signum() {
                    sign_changes += 1;
                }
                prev = v;
            }
        }
        assert_eq!(sign_changes, 1, "P_5 must have exactly one real zero");
    }
}
