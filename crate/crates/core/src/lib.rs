//! Closed-form construction of quasi- and conditionally-exactly solvable
//! one-dimensional Schrödinger potentials by supersymmetric factorization,
//! together with an independent finite-difference oracle that verifies every
//! construction.
//!
//! The pipeline: pick a generator function φ from the [`genfunc`] catalog
//! (odd, monotone, single node), pick a gap ε > 0, and [`susy`] produces the
//! superpotential pair (W, W₁), the partner potentials V±, and the two
//! closed-form eigenstates at energies 0 and ε. For special gaps the
//! [`ces`] module upgrades the construction to a fully solvable potential
//! with a known spectrum. Everything is cross-checked by [`oracle`], a
//! Sturm-bisection tridiagonal eigensolver that shares no code with the
//! closed forms it verifies.
//!
//! ```
//! use susyqm::genfunc::GeneratorFunction;
//! use susyqm::susy::{eigenpair_from_phi, partner_potentials, superpotentials_from_phi};
//!
//! let g = GeneratorFunction::hermite_odd(1)?; // φ = 8x³ + 12x
//! let (w, _w1) = superpotentials_from_phi(&g, 3.0)?; // solvable gap ε = 2k+1
//! let v = partner_potentials(&w);
//! assert!((v.v_minus(0.0)? + 2.5).abs() < 1e-12);
//! let pair = eigenpair_from_phi(&g, 3.0)?;
//! assert_eq!(pair.excited_energy(), 3.0);
//! # Ok::<(), susyqm::Error>(())
//! ```

pub mod ces;
pub mod error;
pub mod genfunc;
pub mod hermite;
pub mod oracle;
pub mod quad;
pub mod susy;

pub use error::{Error, Result};

/// `n` evenly spaced samples covering `[a, b]` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let xs = linspace(-2.0, 2.0, 5);
        assert_eq!(xs, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    }
}
