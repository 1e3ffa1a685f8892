//! Quadrature kernels: adaptive Simpson with a hard depth cap, plus
//! composite Gauss-Legendre for norm integrals.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

fn sample<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteIntegrand { x })
    }
}

/// Adaptive Simpson integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "quadrature tolerance must be positive, got {tol}"
        )));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let m = 0.5 * (lo + hi);
    let flo = sample(f, lo)?;
    let fhi = sample(f, hi)?;
    let fm = sample(f, m)?;
    let whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
    let v = simpson_step(f, lo, flo, m, fm, hi, fhi, whole, tol, MAX_DEPTH)?;
    Ok(sign * v)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = sample(f, lm)?;
    let frm = sample(f, rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureNoConvergence {
            achieved: delta.abs() / 15.0,
            requested: tol,
        });
    }
    let half = 0.5 * tol;
    Ok(
        simpson_step(f, a, fa, lm, flm, m, fm, left, half, depth - 1)?
            + simpson_step(f, m, fm, rm, frm, b, fb, right, half, depth - 1)?,
    )
}

/// `∫_0^x f(t) dt`, signed.
pub fn integral_from_zero<F: Fn(f64) -> f64>(f: &F, x: f64, tol: f64) -> Result<f64> {
    adaptive_simpson(f, 0.0, x, tol)
}

/// Antiderivative anchored at zero, evaluated at every node of an ascending
/// sequence. Each cell is integrated adaptively and summed outward from the
/// origin, so a full grid costs one sweep instead of one integral per node.
pub fn cumulative_from_zero<F: Fn(f64) -> f64>(f: &F, xs: &[f64], tol: f64) -> Result<Vec<f64>> {
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "cumulative integration nodes must be strictly ascending".into(),
        ));
    }
    let n = xs.len();
    let mut out = vec![0.0; n];
    let split = xs.partition_point(|&t| t < 0.0);
    // nodes at or right of the origin
    let mut acc = 0.0;
    let mut prev = 0.0;
    for i in split..n {
        acc += adaptive_simpson(f, prev, xs[i], tol)?;
        prev = xs[i];
        out[i] = acc;
    }
    // nodes left of the origin
    acc = 0.0;
    prev = 0.0;
    for i in (0..split).rev() {
        acc += adaptive_simpson(f, prev, xs[i], tol)?;
        prev = xs[i];
        out[i] = acc;
    }
    Ok(out)
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be at least 1");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and P_{n-1}(x) by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre integral over `[a, b]` with `cells` equal cells.
pub fn composite_gauss_legendre<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    cells: usize,
    order: usize,
) -> Result<f64> {
    if cells == 0 {
        return Err(Error::InvalidParameter("need at least one cell".into()));
    }
    let (nodes, weights) = gauss_legendre(order);
    let width = (b - a) / cells as f64;
    let mut total = 0.0;
    for c in 0..cells {
        let lo = a + c as f64 * width;
        let mid = lo + 0.5 * width;
        for (t, w) in nodes.iter().zip(&weights) {
            let x = mid + 0.5 * width * t;
            total += w * 0.5 * width * sample(f, x)?;
        }
    }
    Ok(total)
}
