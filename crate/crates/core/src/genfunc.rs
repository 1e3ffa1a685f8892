//! Generator function catalog.
//!
//! A generator function φ is the ratio of the two closed-form eigenstates of
//! a two-level construction: odd, strictly increasing, φ' > 0 everywhere,
//! with its single node at the origin. Every family here carries exact
//! closed-form derivatives up to third order — the potential needs φ''' and
//! finite differences would wreck the Riccati residuals.

use crate::error::{Error, Result};
use crate::hermite::PseudoHermite;
use crate::susy::node_count;

/// Default evaluation window; wide enough for every oracle grid in use.
pub const DEFAULT_DOMAIN: (f64, f64) = (-12.0, 12.0);

/// Largest argument of `exp` that stays finite in f64.
const EXP_OVERFLOW: f64 = 709.0;

/// Which odd solution of the dual problem a hyperbolic generator came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinhIndex {
    One,
    Three,
    Five,
}

impl SinhIndex {
    pub fn from_k(k: usize) -> Option<Self> {
        match k {
            1 => Some(Self::One),
            3 => Some(Self::Three),
            5 => Some(Self::Five),
            _ => None,
        }
    }

    pub fn as_k(self) -> usize {
        match self {
            Self::One => 1,
            Self::Three => 3,
            Self::Five => 5,
        }
    }
}

/// The catalog of generator families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// φ = x.
    Monomial,
    /// φ = P_{2k+1}(x), the odd pseudo-Hermite polynomial.
    HermiteOdd { k: usize },
    /// φ = P_{2k+1}(x) / P_{2m}(x), k ≥ m ≥ 1.
    HermiteRatio { k: usize, m: usize },
    /// φ = [c0 + c2 cosh 2x + c4 cosh 4x] sinh x, the odd solutions of the
    /// dual Rosen-Morse problem.
    Sinh { index: SinhIndex, alpha: f64 },
}

/// φ with its first three derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phi4 {
    pub phi: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// Pseudo-Hermite polynomial together with enough of its recurrence chain to
/// read off three derivatives: d^i/dx^i P_n = 2n·2(n-1)···2(n-i+1) P_{n-i}.
#[derive(Debug, Clone)]
struct PolyChain {
    polys: Vec<PseudoHermite>,
    factors: [f64; 4],
}

impl PolyChain {
    fn new(n: usize) -> Result<Self> {
        let depth = n.min(3);
        let polys = (0..=depth)
            .map(|i| PseudoHermite::new(n - i))
            .collect::<Result<Vec<_>>>()?;
        let mut factors = [1.0, 0.0, 0.0, 0.0];
        let mut f = 1.0;
        for (i, slot) in factors.iter_mut().enumerate().skip(1) {
            f *= if n + 1 > i {
                2.0 * (n + 1 - i) as f64
            } else {
                0.0
            };
            *slot = f;
        }
        Ok(Self { polys, factors })
    }

    fn eval4(&self, x: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, slot) in out.iter_mut().enumerate() {
            if self.factors[i] != 0.0 {
                *slot = self.factors[i] * self.polys[i].eval(x);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Monomial,
    Odd(PolyChain),
    Ratio { num: PolyChain, den: PolyChain },
    Sinh { c0: f64, c2: f64, c4: f64 },
}

/// A member of the generator catalog; immutable, cheap to clone, and pure to
/// evaluate from any thread.
#[derive(Debug, Clone)]
pub struct GeneratorFunction {
    family: Family,
    beta: f64,
    repr: Repr,
}

/// Bracket coefficients (c0, c2, c4) of the hyperbolic generators,
/// φ = [c0 + c2 cosh 2x + c4 cosh 4x] sinh x.
fn sinh_bracket(index: SinhIndex, alpha: f64) -> (f64, f64, f64) {
    match index {
        SinhIndex::One => (1.0, 0.0, 0.0),
        SinhIndex::Three => (1.0 - alpha, 2.0 + alpha, 0.0),
        SinhIndex::Five => (
            6.0 + alpha + 3.0 * alpha * alpha,
            -4.0 * (alpha * alpha + 2.0 * alpha - 3.0),
            alpha * alpha + 7.0 * alpha + 12.0,
        ),
    }
}

impl GeneratorFunction {
    /// φ = x.
    pub fn monomial() -> Self {
        Self {
            family: Family::Monomial,
            beta: 1.0,
            repr: Repr::Monomial,
        }
    }

    /// φ = P_{2k+1}(x).
    pub fn hermite_odd(k: usize) -> Result<Self> {
        let chain = PolyChain::new(2 * k + 1)?;
        Ok(Self {
            family: Family::HermiteOdd { k },
            beta: 1.0,
            repr: Repr::Odd(chain),
        })
    }

    /// φ = P_{2k+1}(x) / P_{2m}(x) with k ≥ m ≥ 1.
    pub fn hermite_ratio(k: usize, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "hermite-ratio needs m >= 1 (use hermite-odd for m = 0)".into(),
            ));
        }
        if k < m {
            return Err(Error::InvalidParameter(format!(
                "hermite-ratio needs k >= m, got k = {k}, m = {m}"
            )));
        }
        Ok(Self {
            family: Family::HermiteRatio { k, m },
            beta: 1.0,
            repr: Repr::Ratio {
                num: PolyChain::new(2 * k + 1)?,
                den: PolyChain::new(2 * m)?,
            },
        })
    }

    /// Hyperbolic generator of the given odd index, α > 0.
    pub fn sinh_family(index: usize, alpha: f64) -> Result<Self> {
        let index = SinhIndex::from_k(index).ok_or(Error::UnsupportedIndex {
            k: index,
            base: "sinh family (odd indices 1, 3, 5)".into(),
        })?;
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sinh family needs alpha > 0, got {alpha}"
            )));
        }
        let (c0, c2, c4) = sinh_bracket(index, alpha);
        Ok(Self {
            family: Family::Sinh { index, alpha },
            beta: 1.0,
            repr: Repr::Sinh { c0, c2, c4 },
        })
    }

    /// Record an overall scale. Every downstream construction is invariant
    /// under it; it exists so that invariance can be tested.
    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta must be a positive finite number, got {beta}"
            )));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn domain(&self) -> (f64, f64) {
        DEFAULT_DOMAIN
    }

    /// |x| beyond which evaluation is certain to overflow (approximate,
    /// reported with range errors).
    pub fn overflow_threshold(&self) -> f64 {
        match &self.family {
            Family::Monomial => f64::INFINITY,
            Family::HermiteOdd { k } => poly_threshold(2 * k + 1),
            Family::HermiteRatio { k, .. } => poly_threshold(2 * k + 1),
            Family::Sinh { index, .. } => EXP_OVERFLOW / index.as_k() as f64,
        }
    }

    /// φ, φ', φ'', φ''' in exact closed form (scaled by β).
    pub fn eval_with_derivs(&self, x: f64) -> Result<Phi4> {
        let b = self.beta;
        let raw = match &self.repr {
            Repr::Monomial => Phi4 {
                phi: x,
                d1: 1.0,
                d2: 0.0,
                d3: 0.0,
            },
            Repr::Odd(chain) => {
                let u = chain.eval4(x);
                Phi4 {
                    phi: u[0],
                    d1: u[1],
                    d2: u[2],
                    d3: u[3],
                }
            }
            Repr::Ratio { num, den } => {
                let u = num.eval4(x);
                let v = den.eval4(x);
                // derivatives of q = u/v via u = q v (v = P_{2m} > 0 always)
                let q = u[0] / v[0];
                let q1 = (u[1] - q * v[1]) / v[0];
                let q2 = (u[2] - 2.0 * q1 * v[1] - q * v[2]) / v[0];
                let q3 = (u[3] - 3.0 * q2 * v[1] - 3.0 * q1 * v[2] - q * v[3]) / v[0];
                Phi4 {
                    phi: q,
                    d1: q1,
                    d2: q2,
                    d3: q3,
                }
            }
            Repr::Sinh { c0, c2, c4 } => {
                let (s, c) = (x.sinh(), x.cosh());
                let (s2, c2x) = ((2.0 * x).sinh(), (2.0 * x).cosh());
                let (s4, c4x) = ((4.0 * x).sinh(), (4.0 * x).cosh());
                let g = c0 + c2 * c2x + c4 * c4x;
                let g1 = 2.0 * c2 * s2 + 4.0 * c4 * s4;
                let g2 = 4.0 * c2 * c2x + 16.0 * c4 * c4x;
                let g3 = 8.0 * c2 * s2 + 64.0 * c4 * s4;
                Phi4 {
                    phi: g * s,
                    d1: g1 * s + g * c,
                    d2: g2 * s + 2.0 * g1 * c + g * s,
                    d3: g3 * s + 3.0 * g2 * c + 3.0 * g1 * s + g * c,
                }
            }
        };
        let out = Phi4 {
            phi: b * raw.phi,
            d1: b * raw.d1,
            d2: b * raw.d2,
            d3: b * raw.d3,
        };
        if out.phi.is_finite() && out.d1.is_finite() && out.d2.is_finite() && out.d3.is_finite() {
            Ok(out)
        } else {
            Err(Error::Range {
                x,
                threshold: self.overflow_threshold(),
            })
        }
    }

    /// φ alone.
    pub fn phi(&self, x: f64) -> Result<f64> {
        Ok(self.eval_with_derivs(x)?.phi)
    }

    /// Short human-readable tag used in reports.
    pub fn describe(&self) -> String {
        match &self.family {
            Family::Monomial => "monomial".into(),
            Family::HermiteOdd { k } => format!("hermite-odd(k={k})"),
            Family::HermiteRatio { k, m } => format!("hermite-ratio(k={k}, m={m})"),
            Family::Sinh { index, alpha } => {
                format!("sinh(index={}, alpha={alpha})", index.as_k())
            }
        }
    }
}

fn poly_threshold(degree: usize) -> f64 {
    let log10_cap = 308.0 / degree as f64;
    if log10_cap > 300.0 {
        f64::INFINITY
    } else {
        0.5 * 10f64.powf(log10_cap)
    }
}

/// Outcome of sampling a generator for the monotone/single-node conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    /// Smallest sampled φ'.
    pub min_phi_prime: f64,
    /// Sign changes of φ across the samples.
    pub node_count: usize,
    /// φ strictly increasing across consecutive samples.
    pub monotone: bool,
    /// φ' > 0 everywhere sampled and exactly one node.
    pub passes: bool,
}

impl AdmissibilityReport {
    /// The first violated condition, for error messages.
    pub fn violation(&self) -> Option<String> {
        if self.min_phi_prime.is_nan() || self.min_phi_prime <= 0.0 {
            return Some(format!(
                "phi' must stay positive (sampled minimum {:.6e})",
                self.min_phi_prime
            ));
        }
        if self.node_count != 1 {
            return Some(format!(
                "phi must have exactly one node, found {}",
                self.node_count
            ));
        }
        None
    }
}

/// Build a report from already tabulated φ and φ' samples.
pub fn admissibility_from_samples(phi: &[f64], phi_prime: &[f64]) -> AdmissibilityReport {
    let min_phi_prime = phi_prime.iter().copied().fold(f64::INFINITY, f64::min);
    let nodes = node_count(phi);
    let monotone = phi.windows(2).all(|w| w[1] > w[0]);
    AdmissibilityReport {
        min_phi_prime,
        node_count: nodes,
        monotone,
        passes: min_phi_prime > 0.0 && nodes == 1,
    }
}

/// Sample a generator over `domain` and check the conditions it must satisfy
/// for the construction to be singularity-free: φ' > 0 and a single node.
/// Failures are report fields, not errors.
pub fn check_admissible(
    g: &GeneratorFunction,
    domain: (f64, f64),
    samples: usize,
) -> Result<AdmissibilityReport> {
    if samples < 3 {
        return Err(Error::InvalidParameter(format!(
            "admissibility check needs at least 3 samples, got {samples}"
        )));
    }
    if !domain.0.is_finite() || !domain.1.is_finite() || domain.0 >= domain.1 {
        return Err(Error::InvalidParameter(format!(
            "invalid domain [{}, {}]",
            domain.0, domain.1
        )));
    }
    let mut phi = Vec::with_capacity(samples);
    let mut dphi = Vec::with_capacity(samples);
    for i in 0..samples {
        let x = domain.0 + (domain.1 - domain.0) * i as f64 / (samples - 1) as f64;
        let p = g.eval_with_derivs(x)?;
        phi.push(p.phi);
        dphi.push(p.d1);
    }
    Ok(admissibility_from_samples(&phi, &dphi))
}
