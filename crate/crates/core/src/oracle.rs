//! Finite-difference spectral oracle for H = -1/2 d²/dx² + V(x) on a
//! truncated line with Dirichlet walls.
//!
//! The discretized Hamiltonian is symmetric tridiagonal; eigenvalues come
//! from Sturm-sequence bisection (guaranteed brackets), eigenvectors from
//! inverse iteration with partial pivoting. This solver is the independent
//! check run against every closed-form construction in the crate, so it
//! deliberately shares no code with them.

use crate::error::{Error, Result};

/// Uniform symmetric grid on [-L, L].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    n: usize,
}

impl Grid {
    /// `n` must be odd (so the origin is a node) and at least 5.
    /// Production oracle runs want n ≥ 101; small grids are allowed for
    /// operator-level arithmetic checks.
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "grid half-width must be positive and finite, got {half_width}"
            )));
        }
        if n < 5 {
            return Err(Error::GridTooCoarse(n));
        }
        if n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "grid point count must be odd, got {n}"
            )));
        }
        Ok(Self { half_width, n })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + self.spacing() * i as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Grid with the same extent and halved spacing (2n - 1 points).
    pub fn refined(&self) -> Grid {
        Grid {
            half_width: self.half_width,
            n: 2 * self.n - 1,
        }
    }
}

/// Symmetric tridiagonal discretization of the Hamiltonian over the interior
/// nodes; Dirichlet boundaries are implied by dropping the boundary rows.
#[derive(Debug, Clone)]
pub struct TridiagonalOperator {
    diag: Vec<f64>,
    off: f64,
    h: f64,
}

impl TridiagonalOperator {
    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> f64 {
        self.off
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        let r = 2.0 * self.off.abs();
        for &d in &self.diag {
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo - 1.0, hi + 1.0)
    }
}

/// Discretize `-1/2 d²/dx² + V` on the interior of `grid`:
/// diagonal `1/h² + V(x_i)`, off-diagonal `-1/(2h²)`.
pub fn discretize<V: Fn(f64) -> f64>(v: V, grid: &Grid) -> Result<TridiagonalOperator> {
    let h = grid.spacing();
    let kinetic = 1.0 / (h * h);
    let mut diag = Vec::with_capacity(grid.len() - 2);
    for i in 1..grid.len() - 1 {
        let x = grid.node(i);
        let vi = v(x);
        if !vi.is_finite() {
            return Err(Error::NonFinitePotential { index: i, x });
        }
        diag.push(kinetic + vi);
    }
    Ok(TridiagonalOperator {
        diag,
        off: -0.5 * kinetic,
        h,
    })
}

/// Number of eigenvalues strictly below `lambda`, by counting negative
/// pivots of the LDLᵀ factorization of (T - λI).
pub fn sturm_count(op: &TridiagonalOperator, lambda: f64) -> usize {
    let pivmin = f64::MIN_POSITIVE * (op.off * op.off).max(1.0);
    let mut count = 0;
    let mut q = op.diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    let e2 = op.off * op.off;
    for &d in &op.diag[1..] {
        let q_safe = if q.abs() < pivmin {
            if q < 0.0 {
                -pivmin
            } else {
                pivmin
            }
        } else {
            q
        };
        q = (d - lambda) - e2 / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Oracle output: the lowest eigenvalues with h-weighted-normalized
/// eigenvectors on the full grid (boundary zeros included), plus the
/// eigenvalue shifts observed when the grid is refined, when available.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub convergence: Vec<f64>,
}

/// Bisect the k-th eigenvalue (0-based) to a bracket of width ≤ tol.
fn bisect_eigenvalue(op: &TridiagonalOperator, k: usize, tol: f64) -> f64 {
    let (mut a, mut b) = op.gershgorin();
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if sturm_count(op, mid) <= k {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// LU factorization of (T - shift·I) with partial pivoting; tridiagonal with
/// one fill-in band, in the style of the reference banded solvers.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(op: &TridiagonalOperator, shift: f64) -> Self {
        let n = op.dim();
        let mut d: Vec<f64> = op.diag.iter().map(|&v| v - shift).collect();
        let mut dl = vec![op.off; n.saturating_sub(1)];
        let mut du = vec![op.off; n.saturating_sub(1)];
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let tiny = f64::MIN_POSITIVE / f64::EPSILON;
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i].abs() < tiny {
                    d[i] = if d[i] < 0.0 { -tiny } else { tiny };
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                d[i + 1] = temp - fact * du[i];
                swapped[i] = true;
            }
        }
        if let Some(last) = d.last_mut() {
            if last.abs() < tiny {
                *last = if *last < 0.0 { -tiny } else { tiny };
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|&x| x * x).sum::<f64>().sqrt()
}

/// Deterministic start vector; a fixed linear-congruential stream keeps runs
/// reproducible without pulling in an RNG.
fn seed_vector(n: usize, index: usize) -> Vec<f64> {
    let mut state = 0x9e37_79b9_7f4a_7c15u64 ^ (index as u64).wrapping_mul(0x2545_f491_4f6c_dd1d);
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        v.push((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5);
    }
    v
}

fn inverse_iteration(
    op: &TridiagonalOperator,
    shift: f64,
    prior: &[Vec<f64>],
    index: usize,
) -> Result<Vec<f64>> {
    let n = op.dim();
    let lu = ShiftedLu::factor(op, shift);
    let mut v = seed_vector(n, index);
    let norm = l2_norm(&v);
    for x in v.iter_mut() {
        *x /= norm;
    }
    for _ in 0..50 {
        let mut w = v.clone();
        lu.solve_in_place(&mut w);
        // project out already-found eigenvectors; keeps clusters orthogonal
        for p in prior {
            let dot: f64 = w.iter().zip(p).map(|(a, b)| a * b).sum();
            for (wi, pi) in w.iter_mut().zip(p) {
                *wi -= dot * pi;
            }
        }
        let norm = l2_norm(&w);
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InverseIterationStagnation { index });
        }
        for x in w.iter_mut() {
            *x /= norm;
        }
        let dot: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        if dot < 0.0 {
            for x in w.iter_mut() {
                *x = -*x;
            }
        }
        let diff = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = w;
        if diff < 1e-10 {
            return Ok(v);
        }
    }
    Err(Error::InverseIterationStagnation { index })
}

/// The `m` lowest eigenpairs of the operator. Eigenvalues are bracketed to
/// width ≤ `tol`; eigenvectors are returned on the full grid with the
/// h-weighted norm set to one. `convergence` is left empty here; see
/// [`solve_potential`] for the two-resolution variant.
pub fn lowest_eigenpairs(op: &TridiagonalOperator, m: usize, tol: f64) -> Result<SpectralResult> {
    if m == 0 || m > 12 {
        return Err(Error::InvalidParameter(format!(
            "eigenpair count must be in 1..=12, got {m}"
        )));
    }
    if m > op.dim() {
        return Err(Error::InvalidParameter(format!(
            "requested {m} eigenpairs from a {}-dimensional operator",
            op.dim()
        )));
    }
    if tol < 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "bisection tolerance must be at least 1e-12, got {tol:e}"
        )));
    }
    let eigenvalues: Vec<f64> = (0..m).map(|k| bisect_eigenvalue(op, k, tol)).collect();
    let mut interior_vectors: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (k, &ev) in eigenvalues.iter().enumerate() {
        let v = inverse_iteration(op, ev, &interior_vectors, k)?;
        interior_vectors.push(v);
    }
    let h = op.h;
    let scale = 1.0 / h.sqrt();
    let eigenvectors = interior_vectors
        .into_iter()
        .map(|v| {
            // pad boundary zeros and convert to the h-weighted norm
            let mut full = Vec::with_capacity(v.len() + 2);
            full.push(0.0);
            full.extend(v.iter().map(|&x| x * scale));
            full.push(0.0);
            fix_sign(&mut full);
            full
        })
        .collect();
    Ok(SpectralResult {
        eigenvalues,
        eigenvectors,
        convergence: Vec::new(),
    })
}

/// Deterministic sign convention: the largest-magnitude entry is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut best_abs = 0.0f64;
    for &x in v.iter() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = x;
        }
    }
    if best < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Only the `m` lowest eigenvalues (no vectors).
pub fn lowest_eigenvalues(op: &TridiagonalOperator, m: usize, tol: f64) -> Result<Vec<f64>> {
    if m == 0 || m > op.dim() {
        return Err(Error::InvalidParameter(format!(
            "requested {m} eigenvalues from a {}-dimensional operator",
            op.dim()
        )));
    }
    Ok((0..m).map(|k| bisect_eigenvalue(op, k, tol)).collect())
}

/// Discretize a potential, solve at the given grid and once more at halved
/// spacing, and report the eigenvalue shifts as convergence metadata.
pub fn solve_potential<V: Fn(f64) -> f64>(
    v: V,
    grid: &Grid,
    m: usize,
    tol: f64,
) -> Result<SpectralResult> {
    let op = discretize(&v, grid)?;
    let mut result = lowest_eigenpairs(&op, m, tol)?;
    let fine = grid.refined();
    let op_fine = discretize(&v, &fine)?;
    let fine_values = lowest_eigenvalues(&op_fine, m, tol)?;
    result.convergence = result
        .eigenvalues
        .iter()
        .zip(&fine_values)
        .map(|(coarse, fine)| coarse - fine)
        .collect();
    Ok(result)
}

/// |h-weighted inner product| between a closed-form wavefunction (sampled and
/// normalized on the grid) and an already normalized oracle eigenvector.
pub fn overlap<F: Fn(f64) -> f64>(psi: F, eigvec: &[f64], grid: &Grid) -> Result<f64> {
    if eigvec.len() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "eigenvector length {} does not match grid size {}",
            eigvec.len(),
            grid.len()
        )));
    }
    let h = grid.spacing();
    let mut dot = 0.0;
    let mut norm_s = 0.0;
    let mut norm_v = 0.0;
    for (i, &v) in eigvec.iter().enumerate() {
        let s = psi(grid.node(i));
        if !s.is_finite() {
            return Err(Error::NonFiniteIntegrand { x: grid.node(i) });
        }
        dot += h * s * v;
        norm_s += h * s * s;
        norm_v += h * v * v;
    }
    if norm_s <= 0.0 || norm_v <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot.abs() / (norm_s.sqrt() * norm_v.sqrt())).min(1.0))
}
