//! The central two-level construction.
//!
//! From an admissible generator φ and a gap ε > 0, build the superpotential
//! pair
//!
//! ```text
//! W  = (ε φ + φ''/2) / φ',      W₁ = (ε φ - φ''/2) / φ',
//! ```
//!
//! whose partner potentials V± = (W² ± W')/2 carry two closed-form
//! eigenstates: a nodeless zero mode ψ₀⁻ and a one-node first excited state
//! ψ₁⁻ = φ ψ₀⁻ at energy ε. The pair is tied together by the Riccati
//! identity W² + W' = W₁² - W₁' + 2ε, which doubles as the acceptance check
//! for every construction.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::genfunc::{check_admissible, Family, GeneratorFunction};
use crate::hermite::PseudoHermite;
use crate::oracle::Grid;
use crate::quad;

/// Samples used when validating a generator before construction.
const ADMISSIBILITY_SAMPLES: usize = 241;

/// Relative floor below which a grid sample counts as a zero for node
/// counting.
const NODE_FLOOR: f64 = 1e-12;

type WEval = Arc<dyn Fn(f64) -> Result<(f64, f64)> + Send + Sync>;

/// A superpotential with its exact derivative, W(x) and W'(x).
#[derive(Clone)]
pub struct Superpotential {
    eval: WEval,
}

impl std::fmt::Debug for Superpotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Superpotential").finish_non_exhaustive()
    }
}

impl Superpotential {
    pub fn new<F>(eval: F) -> Self
    where
        F: Fn(f64) -> Result<(f64, f64)> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
        }
    }

    /// Build from independent value/derivative closures that never fail.
    pub fn from_smooth<F, G>(w: F, w_prime: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(move |x| Ok((w(x), w_prime(x))))
    }

    /// (W, W') at a point.
    pub fn eval(&self, x: f64) -> Result<(f64, f64)> {
        (self.eval)(x)
    }

    pub fn w(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?.0)
    }

    pub fn w_prime(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?.1)
    }
}

fn validated(g: &GeneratorFunction, epsilon: f64) -> Result<()> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    let report = check_admissible(g, g.domain(), ADMISSIBILITY_SAMPLES)?;
    if let Some(reason) = report.violation() {
        return Err(Error::Inadmissible { reason });
    }
    Ok(())
}

fn superpotential_component(g: GeneratorFunction, epsilon: f64, sign: f64) -> Superpotential {
    Superpotential::new(move |x| {
        let p = g.eval_with_derivs(x)?;
        let num = epsilon * p.phi + sign * 0.5 * p.d2;
        let num_prime = epsilon * p.d1 + sign * 0.5 * p.d3;
        let w = num / p.d1;
        let w_prime = num_prime / p.d1 - num * p.d2 / (p.d1 * p.d1);
        Ok((w, w_prime))
    })
}

/// The superpotential pair (W, W₁) generated by (φ, ε).
pub fn superpotentials_from_phi(
    g: &GeneratorFunction,
    epsilon: f64,
) -> Result<(Superpotential, Superpotential)> {
    validated(g, epsilon)?;
    Ok((
        superpotential_component(g.clone(), epsilon, 1.0),
        superpotential_component(g.clone(), epsilon, -1.0),
    ))
}

/// Partner potentials V± = (W² ± W')/2 of a superpotential, with the shift
/// bookkeeping of a pair construction when one is attached.
#[derive(Debug, Clone)]
pub struct PartnerPotentials {
    w: Superpotential,
    shift: Option<PartnerShift>,
}

/// Records V₊ = V₋⁽¹⁾ + ε for pairs built from (W, W₁, ε).
#[derive(Debug, Clone)]
pub struct PartnerShift {
    pub w1: Superpotential,
    pub epsilon: f64,
}

impl PartnerPotentials {
    pub fn v_minus(&self, x: f64) -> Result<f64> {
        let (w, wp) = self.w.eval(x)?;
        Ok(0.5 * (w * w - wp))
    }

    pub fn v_plus(&self, x: f64) -> Result<f64> {
        let (w, wp) = self.w.eval(x)?;
        Ok(0.5 * (w * w + wp))
    }

    pub fn superpotential(&self) -> &Superpotential {
        &self.w
    }

    pub fn shift(&self) -> Option<&PartnerShift> {
        self.shift.as_ref()
    }

    /// Max over samples of |V₊(x) - V₋⁽¹⁾(x) - ε| when shift data exists.
    pub fn shift_residual(&self, samples: &[f64]) -> Option<Result<f64>> {
        let shift = self.shift.as_ref()?;
        let run = || -> Result<f64> {
            let mut worst = 0.0f64;
            for &x in samples {
                let vp = self.v_plus(x)?;
                let (w1, w1p) = shift.w1.eval(x)?;
                let v1_minus = 0.5 * (w1 * w1 - w1p);
                worst = worst.max((vp - v1_minus - shift.epsilon).abs());
            }
            Ok(worst)
        };
        Some(run())
    }
}

/// Partner potentials of a lone superpotential.
pub fn partner_potentials(w: &Superpotential) -> PartnerPotentials {
    PartnerPotentials {
        w: w.clone(),
        shift: None,
    }
}

/// Partner potentials carrying the V₊ = V₋⁽¹⁾ + ε relation of the pair.
pub fn partner_potentials_with_shift(
    w: &Superpotential,
    w1: &Superpotential,
    epsilon: f64,
) -> PartnerPotentials {
    PartnerPotentials {
        w: w.clone(),
        shift: Some(PartnerShift {
            w1: w1.clone(),
            epsilon,
        }),
    }
}

/// How the exponent integral I(x) = ∫₀ˣ φ/φ' dt is evaluated.
#[derive(Debug, Clone)]
enum ExponentIntegral {
    /// φ = βx: I = x²/2.
    Monomial,
    /// φ = β P_{2k+1}: I = [x²/2 + ln(P_{2k}(x)/P_{2k}(0))/2] / (2k+1).
    HermiteOdd {
        k: usize,
        p2k: PseudoHermite,
        ln_p2k_origin: f64,
    },
    /// φ = β sinh x: I = ln cosh x.
    Sinh,
    /// Adaptive quadrature anchored at the node x = 0.
    Quadrature,
}

/// The two closed-form eigenstates of a construction: the zero mode ψ₀⁻ at
/// energy 0 and ψ₁⁻ = φ ψ₀⁻ at energy ε, both unnormalized.
#[derive(Debug, Clone)]
pub struct EigenPair {
    epsilon: f64,
    g: GeneratorFunction,
    integral: ExponentIntegral,
}

/// Absolute tolerance of the quadrature fallback for I(x).
const EXPONENT_QUAD_TOL: f64 = 1e-10;

/// Closed-form eigenstates for (φ, ε). Uses logarithm-space closed forms
/// where the catalog provides them and adaptive Simpson elsewhere.
pub fn eigenpair_from_phi(g: &GeneratorFunction, epsilon: f64) -> Result<EigenPair> {
    validated(g, epsilon)?;
    let integral = match g.family() {
        Family::Monomial => ExponentIntegral::Monomial,
        Family::HermiteOdd { k } => {
            let p2k = PseudoHermite::new(2 * k)?;
            let ln_p2k_origin = p2k.eval(0.0).ln();
            ExponentIntegral::HermiteOdd {
                k: *k,
                p2k,
                ln_p2k_origin,
            }
        }
        Family::Sinh { index, .. } if index.as_k() == 1 => ExponentIntegral::Sinh,
        _ => ExponentIntegral::Quadrature,
    };
    Ok(EigenPair {
        epsilon,
        g: g.clone(),
        integral,
    })
}

impl EigenPair {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn ground_energy(&self) -> f64 {
        0.0
    }

    pub fn excited_energy(&self) -> f64 {
        self.epsilon
    }

    pub fn generator(&self) -> &GeneratorFunction {
        &self.g
    }

    /// I(x) = ∫₀ˣ φ/φ' dt; even in x because φ is odd.
    pub fn exponent_integral(&self, x: f64) -> Result<f64> {
        let ax = x.abs();
        match &self.integral {
            ExponentIntegral::Monomial => Ok(0.5 * x * x),
            ExponentIntegral::HermiteOdd {
                k,
                p2k,
                ln_p2k_origin,
            } => {
                let ln_ratio = p2k.eval(ax).ln() - ln_p2k_origin;
                Ok((0.5 * x * x + 0.5 * ln_ratio) / (2 * k + 1) as f64)
            }
            ExponentIntegral::Sinh => Ok(ax.cosh().ln()),
            ExponentIntegral::Quadrature => self.exponent_integral_quadrature(x),
        }
    }

    /// I(x) by adaptive Simpson regardless of available closed forms; the
    /// cross-validation path.
    pub fn exponent_integral_quadrature(&self, x: f64) -> Result<f64> {
        let g = self.g.clone();
        let integrand = move |t: f64| match g.eval_with_derivs(t) {
            Ok(p) => p.phi / p.d1,
            Err(_) => f64::NAN,
        };
        quad::integral_from_zero(&integrand, x.abs(), EXPONENT_QUAD_TOL)
    }

    fn ln_psi0_from_integral(&self, x: f64, integral: f64) -> Result<f64> {
        let p = self.g.eval_with_derivs(x)?;
        Ok(-0.5 * p.d1.ln() - self.epsilon * integral)
    }

    /// Unnormalized ψ₀⁻(x) = (φ')^{-1/2} exp(-ε I(x)).
    pub fn psi0(&self, x: f64) -> Result<f64> {
        let i = self.exponent_integral(x)?;
        Ok(self.ln_psi0_from_integral(x, i)?.exp())
    }

    /// ψ₀⁻ evaluated through the quadrature route only.
    pub fn psi0_via_quadrature(&self, x: f64) -> Result<f64> {
        let i = self.exponent_integral_quadrature(x)?;
        Ok(self.ln_psi0_from_integral(x, i)?.exp())
    }

    /// Unnormalized ψ₁⁻(x) = φ(x) ψ₀⁻(x), identically.
    pub fn psi1(&self, x: f64) -> Result<f64> {
        Ok(self.g.phi(x)? * self.psi0(x)?)
    }

    /// Sample (ψ₀⁻, ψ₁⁻) on an ascending sequence of points. For quadrature
    /// families the exponent integral is accumulated cell by cell instead of
    /// being recomputed from the origin at every node.
    pub fn sample(&self, xs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let integrals: Vec<f64> = match &self.integral {
            ExponentIntegral::Quadrature => {
                let g = self.g.clone();
                let integrand = move |t: f64| match g.eval_with_derivs(t) {
                    Ok(p) => p.phi / p.d1,
                    Err(_) => f64::NAN,
                };
                quad::cumulative_from_zero(&integrand, xs, 1e-12)?
            }
            _ => xs
                .iter()
                .map(|&x| self.exponent_integral(x))
                .collect::<Result<_>>()?,
        };
        let mut psi0 = Vec::with_capacity(xs.len());
        let mut psi1 = Vec::with_capacity(xs.len());
        for (&x, &i) in xs.iter().zip(&integrals) {
            let v0 = self.ln_psi0_from_integral(x, i)?.exp();
            psi0.push(v0);
            psi1.push(self.g.phi(x)? * v0);
        }
        Ok((psi0, psi1))
    }

    /// L² norms of (ψ₀⁻, ψ₁⁻) over [-half_width, half_width] by composite
    /// Gauss-Legendre. All quadrature nodes are sampled in one ascending
    /// sweep so the exponent integral is accumulated, not recomputed.
    pub fn norms(&self, half_width: f64) -> Result<(f64, f64)> {
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "norm interval half-width must be positive, got {half_width}"
            )));
        }
        let cells = ((2.0 * half_width).ceil() as usize * 2).max(16);
        let order = 16;
        let (nodes, weights) = quad::gauss_legendre(order);
        let width = 2.0 * half_width / cells as f64;
        let mut xs = Vec::with_capacity(cells * order);
        let mut ws = Vec::with_capacity(cells * order);
        for c in 0..cells {
            let mid = -half_width + (c as f64 + 0.5) * width;
            for (t, w) in nodes.iter().zip(&weights) {
                xs.push(mid + 0.5 * width * t);
                ws.push(0.5 * width * w);
            }
        }
        let (psi0, psi1) = self.sample(&xs)?;
        let n0: f64 = psi0.iter().zip(&ws).map(|(p, w)| w * p * p).sum();
        let n1: f64 = psi1.iter().zip(&ws).map(|(p, w)| w * p * p).sum();
        Ok((n0.sqrt(), n1.sqrt()))
    }
}

/// Max over samples of |W² + W' - W₁² + W₁' - 2ε|; a pair is accepted when
/// this stays below 1e-9.
pub fn riccati_residual(
    w: &Superpotential,
    w1: &Superpotential,
    epsilon: f64,
    samples: &[f64],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &x in samples {
        let (a, ap) = w.eval(x)?;
        let (b, bp) = w1.eval(x)?;
        worst = worst.max((a * a + ap - b * b + bp - 2.0 * epsilon).abs());
    }
    Ok(worst)
}

/// W₊ reconstructed from W₋ by quadrature:
/// W₊(x) = e^{A(x)} [2ε ∫₀ˣ e^{-A(t)} dt + λ], A(x) = ∫₀ˣ W₋.
///
/// The production path computes W₊ = W + W₁ directly from φ; this quadrature
/// route exists to cross-validate it.
pub struct WplusViaQuadrature<F: Fn(f64) -> f64> {
    w_minus: F,
    epsilon: f64,
    lambda: f64,
    tol: f64,
}

/// Build the quadrature route for a given W₋ and integration constant λ.
pub fn wplus_from_wminus<F: Fn(f64) -> f64>(
    w_minus: F,
    epsilon: f64,
    lambda: f64,
    tol: f64,
) -> WplusViaQuadrature<F> {
    WplusViaQuadrature {
        w_minus,
        epsilon,
        lambda,
        tol,
    }
}

impl<F: Fn(f64) -> f64> WplusViaQuadrature<F> {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let inner_tol = (self.tol * 1e-2).max(1e-13);
        let a_of = |t: f64| quad::integral_from_zero(&self.w_minus, t, inner_tol);
        let a_x = a_of(x)?;
        let integrand = |t: f64| match a_of(t) {
            Ok(a) => (-a).exp(),
            Err(_) => f64::NAN,
        };
        let accumulated = quad::integral_from_zero(&integrand, x, self.tol)?;
        Ok(a_x.exp() * (2.0 * self.epsilon * accumulated + self.lambda))
    }
}

/// Signs of W at the two probes and the unbroken-SUSY verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignCheck {
    pub sign_minus: i8,
    pub sign_plus: i8,
    pub pass: bool,
}

/// Unbroken SUSY requires sign(W(±∞)) = ±1; probed at finite ±probe.
pub fn unbroken_susy_check(w: &Superpotential, probe: f64) -> Result<SignCheck> {
    if !probe.is_finite() || probe <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "probe must be positive, got {probe}"
        )));
    }
    let to_sign = |v: f64| {
        if v > 0.0 {
            1i8
        } else if v < 0.0 {
            -1i8
        } else {
            0i8
        }
    };
    let lo = w.w(-probe)?;
    let hi = w.w(probe)?;
    let sign_minus = to_sign(lo);
    let sign_plus = to_sign(hi);
    Ok(SignCheck {
        sign_minus,
        sign_plus,
        pass: sign_minus == -1 && sign_plus == 1 && lo.is_finite() && hi.is_finite(),
    })
}

/// Ladder operator direction: B± = (∓ d/dx + W)/√2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BDirection {
    Plus,
    Minus,
}

/// Apply B± to a grid-sampled wavefunction. The derivative uses fourth-order
/// central differences in the interior and third-order one-sided stencils on
/// the two rows at each wall, so the result is more accurate than the
/// second-order oracle it is compared against.
pub fn apply_b(
    direction: BDirection,
    w: &Superpotential,
    psi: &[f64],
    grid: &Grid,
) -> Result<Vec<f64>> {
    let n = grid.len();
    if psi.len() != n {
        return Err(Error::InvalidParameter(format!(
            "wavefunction has {} samples for a {n}-point grid",
            psi.len()
        )));
    }
    if n < 5 {
        return Err(Error::GridTooCoarse(n));
    }
    let h = grid.spacing();
    let mut deriv = vec![0.0; n];
    deriv[0] = (-11.0 * psi[0] + 18.0 * psi[1] - 9.0 * psi[2] + 2.0 * psi[3]) / (6.0 * h);
    deriv[1] = (-2.0 * psi[0] - 3.0 * psi[1] + 6.0 * psi[2] - psi[3]) / (6.0 * h);
    for i in 2..n - 2 {
        deriv[i] = (psi[i - 2] - 8.0 * psi[i - 1] + 8.0 * psi[i + 1] - psi[i + 2]) / (12.0 * h);
    }
    deriv[n - 2] =
        (2.0 * psi[n - 1] + 3.0 * psi[n - 2] - 6.0 * psi[n - 3] + psi[n - 4]) / (6.0 * h);
    deriv[n - 1] =
        (11.0 * psi[n - 1] - 18.0 * psi[n - 2] + 9.0 * psi[n - 3] - 2.0 * psi[n - 4]) / (6.0 * h);

    let sqrt2 = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let wv = w.w(grid.node(i))?;
        let d = match direction {
            BDirection::Plus => -deriv[i],
            BDirection::Minus => deriv[i],
        };
        out.push((d + wv * psi[i]) / sqrt2);
    }
    Ok(out)
}

/// Strict sign changes of a sampled function, ignoring entries below
/// 1e-12 of the largest magnitude.
pub fn node_count(values: &[f64]) -> usize {
    let max = values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if max == 0.0 {
        return 0;
    }
    let floor = NODE_FLOOR * max;
    let mut count = 0;
    let mut prev = 0.0f64;
    for &v in values {
        if v.abs() < floor {
            continue;
        }
        if prev != 0.0 && v.signum() != prev.signum() {
            count += 1;
        }
        prev = v;
    }
    count
}

/// The zero mode exp(-∫₀ˣ W) of B⁻, sampled on ascending nodes.
pub fn zero_mode(w: &Superpotential, xs: &[f64], tol: f64) -> Result<Vec<f64>> {
    let w = w.clone();
    let integrand = move |t: f64| w.w(t).unwrap_or(f64::NAN);
    let integrals = quad::cumulative_from_zero(&integrand, xs, tol)?;
    Ok(integrals.iter().map(|&a| (-a).exp()).collect())
}
