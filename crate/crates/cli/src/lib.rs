//! Job configuration, result documents, and the command runners behind the
//! `susyqm` binary.
//!
//! Every command produces a [`ResultDocument`]: a self-contained JSON tree
//! that echoes its own configuration, carries each measured value next to
//! the tolerance it was held to, and can be re-executed from the echo alone.

use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use susyqm::ces::{
    ces_potential, dual_involution_residual, dual_superpotential, epsilon_k, phi_from_dual,
    phi_ode_residual, rosen_morse_vn, shape_invariance_residual, CesModel, SolvableBase,
};
use susyqm::genfunc::{check_admissible, AdmissibilityReport, GeneratorFunction};
use susyqm::linspace;
use susyqm::oracle::{overlap, solve_potential, Grid};
use susyqm::susy::{
    eigenpair_from_phi, node_count, partner_potentials_with_shift, riccati_residual,
    superpotentials_from_phi, unbroken_susy_check, EigenPair, Superpotential,
};

/// Probe distance for the asymptotic sign condition.
const SIGN_PROBE: f64 = 8.0;
/// Sample window for residual scans.
const SCAN_RANGE: (f64, f64) = (-8.0, 8.0);
const SCAN_POINTS: usize = 1001;
/// Gate for the generator's defining equation over a base.
const PHI_ODE_TOL: f64 = 1e-8;
/// Gate for route cross-checks of the solvable potentials.
const TWO_ROUTE_TOL: f64 = 1e-9;
const DUALITY_TOL: f64 = 1e-12;
const SHAPE_TOL: f64 = 1e-10;
const W1_CONSISTENCY_TOL: f64 = 1e-10;
/// Bisection width for the oracle.
const ORACLE_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// configuration

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Construct,
    Validate,
    Spectrum,
    Ces,
    ExportGrid,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Monomial,
    HermiteOdd,
    HermiteRatio,
    Sinh,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BaseKind {
    Harmonic,
    RosenMorse,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Json,
    Csv,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

/// One fully specified job; the `config` echo inside every document.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct JobConfig {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<BaseKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub levels: usize,
    pub tol_riccati: f64,
    pub tol_spectrum: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub format: ExportFormat,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub perturb_w1: f64,
}

impl JobConfig {
    pub fn defaults(command: CommandKind) -> Self {
        Self {
            command,
            family: None,
            base: None,
            k: None,
            m: None,
            alpha: None,
            epsilon: None,
            half_width: 12.0,
            points: 4001,
            levels: 6,
            tol_riccati: 1e-9,
            tol_spectrum: 1e-3,
            out: None,
            format: ExportFormat::Csv,
            perturb_w1: 0.0,
        }
    }

    fn validate(&self) -> Result<(), String> {
        if self.family.is_some() && self.base.is_some() {
            return Err("--family and --base are mutually exclusive".into());
        }
        if self.family.is_none() && self.base.is_none() {
            return Err("one of --family or --base is required".into());
        }
        if !self.half_width.is_finite() || self.half_width <= 0.0 {
            return Err(format!(
                "--L must be positive and finite, got {}",
                self.half_width
            ));
        }
        if self.points < 101 || self.points.is_multiple_of(2) {
            return Err(format!(
                "--N must be an odd integer >= 101, got {}",
                self.points
            ));
        }
        if self.levels == 0 || self.levels > 12 {
            return Err(format!("--levels must be in 1..=12, got {}", self.levels));
        }
        if self.tol_riccati.is_nan()
            || self.tol_riccati <= 0.0
            || self.tol_spectrum.is_nan()
            || self.tol_spectrum <= 0.0
        {
            return Err("tolerances must be positive".into());
        }
        Ok(())
    }

    fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.half_width, self.points).map_err(CliError::from)
    }
}

// ---------------------------------------------------------------------------
// errors

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Usage,
    Validation,
    Numerical,
}

/// A failure with its exit class and an optional admissibility report for
/// rejected generators.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    pub admissibility: Option<AdmissibilityBlock>,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Usage,
            message: message.into(),
            admissibility: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Usage => 2,
            ErrorKind::Validation => 1,
            ErrorKind::Numerical => 3,
        }
    }

    /// Machine-readable error object, the stderr payload.
    pub fn to_json(&self) -> serde_json::Value {
        let mut error = serde_json::json!({
            "kind": self.kind,
            "message": self.message,
        });
        if let Some(adm) = &self.admissibility {
            error["admissibility"] = serde_json::to_value(adm).unwrap();
        }
        serde_json::json!({ "error": error })
    }
}

impl From<susyqm::Error> for CliError {
    fn from(err: susyqm::Error) -> Self {
        use susyqm::Error as E;
        let kind = match &err {
            E::DegreeTooLarge { .. }
            | E::NonPositiveEpsilon(_)
            | E::InvalidParameter(_)
            | E::UnsupportedIndex { .. }
            | E::GridTooCoarse(_)
            | E::ZeroNorm => ErrorKind::Usage,
            E::Inadmissible { .. } => ErrorKind::Validation,
            E::Range { .. }
            | E::NonFiniteIntegrand { .. }
            | E::QuadratureNoConvergence { .. }
            | E::NonFinitePotential { .. }
            | E::DualSingularity { .. }
            | E::InverseIterationStagnation { .. } => ErrorKind::Numerical,
        };
        Self {
            kind,
            message: err.to_string(),
            admissibility: None,
        }
    }
}

// ---------------------------------------------------------------------------
// result document

/// A measured value next to the tolerance it was tested against.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Measured {
    fn below(value: f64, tolerance: f64) -> Self {
        Self {
            value,
            tolerance,
            pass: value < tolerance,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ConstructionBlock {
    pub family: String,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// The gap sits at a value that makes the whole spectrum solvable.
    pub exactly_solvable: bool,
    /// Half-width of the interval the norms below were integrated over.
    pub norm_half_width: f64,
    pub norm_psi0: f64,
    pub norm_psi1: f64,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct SignBlock {
    pub probe: f64,
    pub sign_minus: i8,
    pub sign_plus: i8,
    pub pass: bool,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct NodeBlock {
    pub psi0_nodes: usize,
    pub psi1_nodes: usize,
    pub pass: bool,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct AdmissibilityBlock {
    pub min_phi_prime: f64,
    pub node_count: usize,
    pub monotone: bool,
    pub pass: bool,
}

impl From<&AdmissibilityReport> for AdmissibilityBlock {
    fn from(r: &AdmissibilityReport) -> Self {
        Self {
            min_phi_prime: r.min_phi_prime,
            node_count: r.node_count,
            monotone: r.monotone,
            pass: r.passes,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ValidationBlock {
    pub riccati: Measured,
    pub sign_condition: SignBlock,
    pub partner_sign_condition: SignBlock,
    pub node_counts: NodeBlock,
    pub admissibility: AdmissibilityBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_ode: Option<Measured>,
    pub pass: bool,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct LevelRow {
    pub index: usize,
    pub oracle_energy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap: Option<f64>,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct OracleBlock {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub levels: Vec<LevelRow>,
    /// Eigenvalue shifts between the working grid and half the spacing.
    pub convergence: Vec<f64>,
    /// Levels past the first excited state were derived by iterating the
    /// partner relation and are gated on this very oracle comparison.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub chain_derived_tail: bool,
    pub pass: bool,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CesBlock {
    pub base: String,
    pub k: usize,
    pub epsilon_k: f64,
    pub two_route_residual: Measured,
    pub dual_involution: Measured,
    pub shape_invariance_base: Measured,
    pub shape_invariance_dual: Measured,
    pub w1_consistency: Measured,
    pub admissibility: AdmissibilityBlock,
    pub pass: bool,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ResultDocument {
    pub config: JobConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ces: Option<CesBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_export: Option<String>,
    pub all_passed: bool,
}

// ---------------------------------------------------------------------------
// model resolution

/// A job's generator with its gap and whatever solvable structure it has.
struct ResolvedModel {
    generator: GeneratorFunction,
    epsilon: f64,
    gamma: Option<f64>,
    ces: Option<CesModel>,
    base: Option<SolvableBase>,
}

fn require<T: Copy>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::usage(format!("{flag} is required for this model")))
}

impl ResolvedModel {
    fn from_config(config: &JobConfig) -> Result<Self, CliError> {
        if let Some(base_kind) = config.base {
            if config.epsilon.is_some() {
                return Err(CliError::usage(
                    "--epsilon is fixed by the base model; use --family sinh for arbitrary gaps",
                ));
            }
            let k = require(config.k, "--k")?;
            let base = match base_kind {
                BaseKind::Harmonic => SolvableBase::Harmonic,
                BaseKind::RosenMorse => {
                    SolvableBase::rosen_morse(require(config.alpha, "--alpha")?)?
                }
            };
            let generator = phi_from_dual(&base, k)?;
            let epsilon = epsilon_k(&base, k)?;
            let ces = match base {
                SolvableBase::Harmonic => Some(CesModel::HermiteOdd { k }),
                SolvableBase::RosenMorse { alpha } => Some(CesModel::RosenMorse { alpha, k }),
            };
            return Ok(Self {
                generator,
                epsilon,
                gamma: matches!(base, SolvableBase::Harmonic).then_some(1.0),
                ces,
                base: Some(base),
            });
        }

        let family = config.family.expect("validated: family or base present");
        match family {
            FamilyKind::Monomial => {
                let epsilon = require(config.epsilon, "--epsilon")?;
                Ok(Self {
                    generator: GeneratorFunction::monomial(),
                    epsilon,
                    gamma: None,
                    ces: None,
                    base: None,
                })
            }
            FamilyKind::HermiteOdd => {
                let k = require(config.k, "--k")?;
                let special = (2 * k + 1) as f64;
                let epsilon = config.epsilon.unwrap_or(special);
                let solvable = (epsilon - special).abs() < 1e-9;
                Ok(Self {
                    generator: GeneratorFunction::hermite_odd(k)?,
                    epsilon,
                    gamma: Some(epsilon / special),
                    ces: solvable.then_some(CesModel::HermiteOdd { k }),
                    base: solvable.then_some(SolvableBase::Harmonic),
                })
            }
            FamilyKind::HermiteRatio => {
                let k = require(config.k, "--k")?;
                let m = require(config.m, "--m")?;
                let generator = GeneratorFunction::hermite_ratio(k, m)?;
                let special = (2 * k - 2 * m + 1) as f64;
                let epsilon = config.epsilon.unwrap_or(special);
                let solvable = (epsilon - special).abs() < 1e-9;
                Ok(Self {
                    generator,
                    epsilon,
                    gamma: None,
                    ces: solvable.then_some(CesModel::HermiteRatio { k, m }),
                    base: None,
                })
            }
            FamilyKind::Sinh => {
                let k = require(config.k, "--k")?;
                let alpha = require(config.alpha, "--alpha")?;
                let generator = GeneratorFunction::sinh_family(k, alpha)?;
                let base = (alpha > 1.0)
                    .then(|| SolvableBase::rosen_morse(alpha))
                    .transpose()?;
                let special = base.as_ref().map(|b| epsilon_k(b, k)).transpose()?;
                let epsilon = match (config.epsilon, special) {
                    (Some(e), _) => e,
                    (None, Some(e)) => e,
                    (None, None) => {
                        return Err(CliError::usage(
                            "--epsilon is required for sinh generators with alpha <= 1",
                        ))
                    }
                };
                let solvable = special.is_some_and(|s| (epsilon - s).abs() < 1e-9);
                Ok(Self {
                    generator,
                    epsilon,
                    gamma: None,
                    ces: solvable.then_some(CesModel::RosenMorse { alpha, k }),
                    base: solvable.then_some(SolvableBase::RosenMorse { alpha }),
                })
            }
        }
    }

    fn admissibility(&self) -> Result<AdmissibilityBlock, CliError> {
        let g = &self.generator;
        let report = check_admissible(g, g.domain(), 481)?;
        let block = AdmissibilityBlock::from(&report);
        if let Some(reason) = report.violation() {
            return Err(CliError {
                kind: ErrorKind::Validation,
                message: format!("generator function inadmissible: {reason}"),
                admissibility: Some(block),
            });
        }
        Ok(block)
    }

    fn superpotentials(&self) -> Result<(Superpotential, Superpotential), CliError> {
        Ok(superpotentials_from_phi(&self.generator, self.epsilon)?)
    }

    fn eigenpair(&self) -> Result<EigenPair, CliError> {
        Ok(eigenpair_from_phi(&self.generator, self.epsilon)?)
    }

    /// Expected energies per oracle level, where the model pins them.
    fn expected_levels(&self, count: usize) -> Result<(Vec<Option<f64>>, bool), CliError> {
        let mut expected = vec![None; count];
        let mut chain_tail = false;
        if let Some(ces) = &self.ces {
            let spectrum = ces.exact_spectrum(count.saturating_sub(1))?;
            chain_tail = spectrum.susy_chain_tail;
            for (i, &e) in spectrum.levels.iter().enumerate().take(count) {
                expected[i] = Some(e);
            }
        } else {
            if count > 0 {
                expected[0] = Some(0.0);
            }
            if count > 1 {
                expected[1] = Some(self.epsilon);
            }
        }
        Ok((expected, chain_tail))
    }
}

// ---------------------------------------------------------------------------
// shared pieces

fn v_minus_closure(w: Superpotential) -> impl Fn(f64) -> f64 {
    move |x| match w.eval(x) {
        Ok((v, vp)) => 0.5 * (v * v - vp),
        Err(_) => f64::NAN,
    }
}

fn validation_block(
    config: &JobConfig,
    model: &ResolvedModel,
    admissibility: AdmissibilityBlock,
) -> Result<ValidationBlock, CliError> {
    let (w, w1) = model.superpotentials()?;
    let w1_checked = if config.perturb_w1 != 0.0 {
        let offset = config.perturb_w1;
        let inner = w1.clone();
        Superpotential::new(move |x| {
            let (v, vp) = inner.eval(x)?;
            Ok((v + offset, vp))
        })
    } else {
        w1.clone()
    };

    let xs = linspace(SCAN_RANGE.0, SCAN_RANGE.1, SCAN_POINTS);
    let riccati = Measured::below(
        riccati_residual(&w, &w1_checked, model.epsilon, &xs)?,
        config.tol_riccati,
    );

    let sign = unbroken_susy_check(&w, SIGN_PROBE)?;
    let sign_condition = SignBlock {
        probe: SIGN_PROBE,
        sign_minus: sign.sign_minus,
        sign_plus: sign.sign_plus,
        pass: sign.pass,
    };
    let partner_sign = unbroken_susy_check(&w1_checked, SIGN_PROBE)?;
    let partner_sign_condition = SignBlock {
        probe: SIGN_PROBE,
        sign_minus: partner_sign.sign_minus,
        sign_plus: partner_sign.sign_plus,
        pass: partner_sign.pass,
    };

    let grid = config.grid()?;
    let pair = model.eigenpair()?;
    let (psi0, psi1) = pair.sample(&grid.nodes())?;
    let nodes = NodeBlock {
        psi0_nodes: node_count(&psi0),
        psi1_nodes: node_count(&psi1),
        pass: node_count(&psi0) == 0 && node_count(&psi1) == 1,
    };

    let phi_ode = match &model.base {
        Some(base) => {
            let k = config.k.expect("base models carry k");
            let samples = linspace(-5.0, 5.0, 501);
            Some(Measured::below(
                phi_ode_residual(base, k, &samples)?,
                PHI_ODE_TOL,
            ))
        }
        None => None,
    };

    let pass = riccati.pass
        && sign_condition.pass
        && partner_sign_condition.pass
        && nodes.pass
        && admissibility.pass
        && phi_ode.is_none_or(|m| m.pass);
    Ok(ValidationBlock {
        riccati,
        sign_condition,
        partner_sign_condition,
        node_counts: nodes,
        admissibility,
        phi_ode,
        pass,
    })
}

fn construction_block(
    config: &JobConfig,
    model: &ResolvedModel,
) -> Result<ConstructionBlock, CliError> {
    let pair = model.eigenpair()?;
    // norms stay on the evaluation domain even when the grid reaches further
    let norm_half_width = config.half_width.min(model.generator.domain().1);
    let (norm_psi0, norm_psi1) = pair.norms(norm_half_width)?;
    Ok(ConstructionBlock {
        family: model.generator.describe(),
        epsilon: model.epsilon,
        gamma: model.gamma,
        exactly_solvable: model.ces.is_some(),
        norm_half_width,
        norm_psi0,
        norm_psi1,
    })
}

fn oracle_block(config: &JobConfig, model: &ResolvedModel) -> Result<OracleBlock, CliError> {
    let grid = config.grid()?;
    let (w, _) = model.superpotentials()?;
    let v = v_minus_closure(w);
    let result = solve_potential(&v, &grid, config.levels, ORACLE_TOL)?;
    let (expected, chain_tail) = model.expected_levels(config.levels)?;

    let pair = model.eigenpair()?;
    let (psi0, psi1) = pair.sample(&grid.nodes())?;

    let mut rows = Vec::with_capacity(config.levels);
    let mut pass = true;
    for (i, &energy) in result.eigenvalues.iter().enumerate() {
        let expected_energy = expected[i];
        let abs_deviation = expected_energy.map(|e| (energy - e).abs());
        let row_pass = abs_deviation.map(|d| d < config.tol_spectrum);
        if let Some(p) = row_pass {
            pass &= p;
        }
        let overlap_value = match i {
            0 => Some(overlap(
                |x| sample_at(&grid, &psi0, x),
                &result.eigenvectors[0],
                &grid,
            )?),
            1 => Some(overlap(
                |x| sample_at(&grid, &psi1, x),
                &result.eigenvectors[1],
                &grid,
            )?),
            _ => None,
        };
        rows.push(LevelRow {
            index: i,
            oracle_energy: energy,
            expected_energy,
            abs_deviation,
            overlap: overlap_value,
            tolerance: config.tol_spectrum,
            pass: row_pass,
        });
    }
    Ok(OracleBlock {
        half_width: config.half_width,
        points: config.points,
        levels: rows,
        convergence: result.convergence,
        chain_derived_tail: chain_tail,
        pass,
    })
}

/// Look a pre-sampled grid function back up by node position.
fn sample_at(grid: &Grid, samples: &[f64], x: f64) -> f64 {
    let h = grid.spacing();
    let idx = ((x + grid.half_width()) / h).round() as usize;
    samples[idx.min(samples.len() - 1)]
}

// ---------------------------------------------------------------------------
// grid export

struct GridColumns {
    xs: Vec<f64>,
    v_minus: Vec<f64>,
    v_plus: Vec<f64>,
    w: Vec<f64>,
    w1: Vec<f64>,
    psi0: Vec<f64>,
    psi1: Vec<f64>,
}

const GRID_HEADER: [&str; 7] = ["x", "V_minus", "V_plus", "W", "W1", "psi0", "psi1"];

fn sample_columns(config: &JobConfig, model: &ResolvedModel) -> Result<GridColumns, CliError> {
    let grid = config.grid()?;
    let xs = grid.nodes();
    let (w, w1) = model.superpotentials()?;
    let pp = partner_potentials_with_shift(&w, &w1, model.epsilon);
    let pair = model.eigenpair()?;
    let (psi0, psi1) = pair.sample(&xs)?;
    let mut v_minus = Vec::with_capacity(xs.len());
    let mut v_plus = Vec::with_capacity(xs.len());
    let mut w_col = Vec::with_capacity(xs.len());
    let mut w1_col = Vec::with_capacity(xs.len());
    for &x in &xs {
        v_minus.push(pp.v_minus(x)?);
        v_plus.push(pp.v_plus(x)?);
        w_col.push(w.w(x)?);
        w1_col.push(w1.w(x)?);
    }
    Ok(GridColumns {
        xs,
        v_minus,
        v_plus,
        w: w_col,
        w1: w1_col,
        psi0,
        psi1,
    })
}

fn render_grid(columns: &GridColumns, format: ExportFormat) -> String {
    match format {
        ExportFormat::Csv => {
            let mut out = String::new();
            out.push_str(&GRID_HEADER.join(","));
            out.push('\n');
            for i in 0..columns.xs.len() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    columns.xs[i],
                    columns.v_minus[i],
                    columns.v_plus[i],
                    columns.w[i],
                    columns.w1[i],
                    columns.psi0[i],
                    columns.psi1[i],
                );
            }
            out
        }
        ExportFormat::Json => {
            let rows: Vec<[f64; 7]> = (0..columns.xs.len())
                .map(|i| {
                    [
                        columns.xs[i],
                        columns.v_minus[i],
                        columns.v_plus[i],
                        columns.w[i],
                        columns.w1[i],
                        columns.psi0[i],
                        columns.psi1[i],
                    ]
                })
                .collect();
            serde_json::to_string_pretty(&serde_json::json!({
                "columns": GRID_HEADER,
                "rows": rows,
            }))
            .expect("grid serialization cannot fail")
        }
    }
}

fn write_grid_export(
    config: &JobConfig,
    model: &ResolvedModel,
) -> Result<Option<String>, CliError> {
    let Some(path) = &config.out else {
        return Ok(None);
    };
    let columns = sample_columns(config, model)?;
    let payload = render_grid(&columns, config.format);
    std::fs::write(Path::new(path), payload).map_err(|e| CliError {
        kind: ErrorKind::Numerical,
        message: format!("failed to write grid export {path}: {e}"),
        admissibility: None,
    })?;
    Ok(Some(path.clone()))
}

// ---------------------------------------------------------------------------
// command runners

fn run_construct(config: &JobConfig, model: &ResolvedModel) -> Result<ResultDocument, CliError> {
    let admissibility = model.admissibility()?;
    let construction = construction_block(config, model)?;
    let validation = validation_block(config, model, admissibility)?;
    let grid_export = write_grid_export(config, model)?;
    let all_passed = validation.pass;
    Ok(ResultDocument {
        config: config.clone(),
        construction: Some(construction),
        validation: Some(validation),
        oracle: None,
        ces: None,
        grid_export,
        all_passed,
    })
}

fn run_validate(config: &JobConfig, model: &ResolvedModel) -> Result<ResultDocument, CliError> {
    let admissibility = model.admissibility()?;
    let validation = validation_block(config, model, admissibility)?;
    let all_passed = validation.pass;
    Ok(ResultDocument {
        config: config.clone(),
        construction: Some(construction_block(config, model)?),
        validation: Some(validation),
        oracle: None,
        ces: None,
        grid_export: None,
        all_passed,
    })
}

fn run_spectrum(config: &JobConfig, model: &ResolvedModel) -> Result<ResultDocument, CliError> {
    let admissibility = model.admissibility()?;
    let oracle = oracle_block(config, model)?;
    let all_passed = oracle.pass && admissibility.pass;
    Ok(ResultDocument {
        config: config.clone(),
        construction: Some(construction_block(config, model)?),
        validation: None,
        oracle: Some(oracle),
        ces: None,
        grid_export: None,
        all_passed,
    })
}

fn run_ces(config: &JobConfig, model: &ResolvedModel) -> Result<ResultDocument, CliError> {
    let Some(base) = &model.base else {
        return Err(CliError::usage(
            "the ces command needs --base harmonic|rosen-morse (or an exactly solvable sinh model)",
        ));
    };
    let k = require(config.k, "--k")?;
    let admissibility = model.admissibility()?;
    let potential = ces_potential(base, k)?;
    let eps = potential.epsilon();

    // route cross-check: base-plus-generator expression against an
    // independent closed form (Rosen-Morse) or the direct pair route
    let xs = linspace(SCAN_RANGE.0, SCAN_RANGE.1, SCAN_POINTS);
    let mut two_route = 0.0f64;
    match base {
        SolvableBase::RosenMorse { alpha } => {
            for &x in &xs {
                let a = potential.eval(x)?;
                let b = rosen_morse_vn(*alpha, k, x)?;
                two_route = two_route.max((a - b).abs() / a.abs().max(1.0));
            }
        }
        SolvableBase::Harmonic => {
            let (w, _) = model.superpotentials()?;
            for &x in &xs {
                let a = potential.eval(x)?;
                let (wv, wp) = w.eval(x)?;
                let b = 0.5 * (wv * wv - wp);
                two_route = two_route.max((a - b).abs() / a.abs().max(1.0));
            }
        }
    }
    let two_route_residual = Measured::below(two_route, TWO_ROUTE_TOL);

    let involution_samples = linspace(-1.4, 1.4, 101);
    let (inv_base, inv_dual) = dual_involution_residual(base, &involution_samples)?;
    let dual_involution = Measured::below(inv_base.max(inv_dual), DUALITY_TOL);

    let step = base.shape_step();
    let shape_base = shape_invariance_residual(
        |x, a| base.w1_with_strength(x, a),
        step.alpha,
        step.alpha1,
        step.remainder,
        &linspace(-6.0, 6.0, 201),
    );
    let dual = dual_superpotential(base);
    let dstep = base.dual_shape_step();
    let mut shape_dual = 0.0f64;
    for &xi in &linspace(-1.2, 1.2, 201) {
        let (w_a, wp_a) = dual.eval_with_strength(xi, dstep.alpha)?;
        let (w_b, wp_b) = dual.eval_with_strength(xi, dstep.alpha1)?;
        shape_dual =
            shape_dual.max((w_a * w_a + wp_a - w_b * w_b + wp_b - 2.0 * dstep.remainder).abs());
    }
    let shape_invariance_base = Measured::below(shape_base, SHAPE_TOL);
    let shape_invariance_dual = Measured::below(shape_dual, SHAPE_TOL);

    // the pair construction at the special gap must hand back the base W₁
    let (_, w1) = model.superpotentials()?;
    let mut w1_dev = 0.0f64;
    for &x in &xs {
        let (expect, _) = base.w1(x);
        w1_dev = w1_dev.max((w1.w(x)? - expect).abs());
    }
    let w1_consistency = Measured::below(w1_dev, W1_CONSISTENCY_TOL);

    let oracle = oracle_block(config, model)?;
    let grid_export = write_grid_export(config, model)?;

    let pass = two_route_residual.pass
        && dual_involution.pass
        && shape_invariance_base.pass
        && shape_invariance_dual.pass
        && w1_consistency.pass
        && admissibility.pass;
    let all_passed = pass && oracle.pass;
    Ok(ResultDocument {
        config: config.clone(),
        construction: Some(construction_block(config, model)?),
        validation: None,
        oracle: Some(oracle),
        ces: Some(CesBlock {
            base: base.name().into(),
            k,
            epsilon_k: eps,
            two_route_residual,
            dual_involution,
            shape_invariance_base,
            shape_invariance_dual,
            w1_consistency,
            admissibility,
            pass,
        }),
        grid_export,
        all_passed,
    })
}

fn run_export(config: &JobConfig, model: &ResolvedModel) -> Result<ResultDocument, CliError> {
    model.admissibility()?;
    let grid_export = match &config.out {
        Some(_) => write_grid_export(config, model)?,
        None => {
            let columns = sample_columns(config, model)?;
            print!("{}", render_grid(&columns, config.format));
            None
        }
    };
    Ok(ResultDocument {
        config: config.clone(),
        construction: None,
        validation: None,
        oracle: None,
        ces: None,
        grid_export,
        all_passed: true,
    })
}

/// Execute one job end to end.
pub fn run_job(config: &JobConfig) -> Result<ResultDocument, CliError> {
    config.validate().map_err(CliError::usage)?;
    let model = ResolvedModel::from_config(config)?;
    match config.command {
        CommandKind::Construct => run_construct(config, &model),
        CommandKind::Validate => run_validate(config, &model),
        CommandKind::Spectrum => run_spectrum(config, &model),
        CommandKind::Ces => run_ces(config, &model),
        CommandKind::ExportGrid => run_export(config, &model),
    }
}

/// Compare two documents field by field; numbers must agree to `tol`.
/// Used by the reproducibility contract: re-running a document's config echo
/// must reproduce every reported number.
pub fn documents_agree(a: &ResultDocument, b: &ResultDocument, tol: f64) -> Result<(), String> {
    let va = serde_json::to_value(a).map_err(|e| e.to_string())?;
    let vb = serde_json::to_value(b).map_err(|e| e.to_string())?;
    values_agree(&va, &vb, tol, "$")
}

fn values_agree(
    a: &serde_json::Value,
    b: &serde_json::Value,
    tol: f64,
    path: &str,
) -> Result<(), String> {
    use serde_json::Value;
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= tol * x.abs().max(1.0) {
                Ok(())
            } else {
                Err(format!("{path}: {x} vs {y}"))
            }
        }
        (Value::Array(xs), Value::Array(ys)) => {
            if xs.len() != ys.len() {
                return Err(format!(
                    "{path}: array lengths {} vs {}",
                    xs.len(),
                    ys.len()
                ));
            }
            for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
                values_agree(x, y, tol, &format!("{path}[{i}]"))?;
            }
            Ok(())
        }
        (Value::Object(xs), Value::Object(ys)) => {
            if xs.len() != ys.len() {
                return Err(format!("{path}: object sizes differ"));
            }
            for (key, x) in xs {
                let y = ys
                    .get(key)
                    .ok_or_else(|| format!("{path}.{key}: missing on one side"))?;
                values_agree(x, y, tol, &format!("{path}.{key}"))?;
            }
            Ok(())
        }
        _ => {
            if a == b {
                Ok(())
            } else {
                Err(format!("{path}: {a} vs {b}"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config(command: CommandKind) -> JobConfig {
        let mut c = JobConfig::defaults(command);
        c.half_width = 10.0;
        c.points = 1001;
        c.levels = 4;
        c
    }

    #[test]
    fn config_validation_catches_bad_grids() {
        let mut c = JobConfig::defaults(CommandKind::Construct);
        c.family = Some(FamilyKind::Monomial);
        c.epsilon = Some(1.0);
        c.points = 100;
        assert!(c.validate().is_err());
        c.points = 99;
        assert!(c.validate().is_err());
        c.points = 101;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn construct_monomial_document() {
        let mut c = quick_config(CommandKind::Construct);
        c.family = Some(FamilyKind::Monomial);
        c.epsilon = Some(2.0);
        let doc = run_job(&c).unwrap();
        assert!(doc.all_passed);
        let v = doc.validation.unwrap();
        assert!(v.riccati.pass && v.riccati.value < 1e-12);
        assert_eq!(v.node_counts.psi0_nodes, 0);
        assert_eq!(v.node_counts.psi1_nodes, 1);
        let cons = doc.construction.unwrap();
        assert!(!cons.exactly_solvable);
        assert!(cons.gamma.is_none());
    }

    #[test]
    fn construct_flags_solvable_gap() {
        let mut c = quick_config(CommandKind::Construct);
        c.family = Some(FamilyKind::HermiteOdd);
        c.k = Some(1);
        c.epsilon = Some(3.0);
        let doc = run_job(&c).unwrap();
        let cons = doc.construction.unwrap();
        assert!(cons.exactly_solvable);
        assert_eq!(cons.gamma, Some(1.0));
    }

    #[test]
    fn ratio_with_k_below_m_is_usage_error() {
        let mut c = quick_config(CommandKind::Construct);
        c.family = Some(FamilyKind::HermiteRatio);
        c.k = Some(1);
        c.m = Some(2);
        let err = run_job(&c).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Usage);
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_json()["error"]["kind"] == "usage");
    }

    #[test]
    fn base_with_epsilon_is_usage_error() {
        let mut c = quick_config(CommandKind::Ces);
        c.base = Some(BaseKind::Harmonic);
        c.k = Some(1);
        c.epsilon = Some(2.0);
        assert_eq!(run_job(&c).unwrap_err().kind, ErrorKind::Usage);
    }

    #[test]
    fn even_dual_index_is_rejected() {
        let mut c = quick_config(CommandKind::Ces);
        c.base = Some(BaseKind::RosenMorse);
        c.alpha = Some(2.5);
        c.k = Some(2);
        let err = run_job(&c).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Usage);
    }

    #[test]
    fn validate_perturbation_hook_fails_riccati() {
        let mut c = quick_config(CommandKind::Validate);
        c.family = Some(FamilyKind::HermiteOdd);
        c.k = Some(1);
        c.epsilon = Some(2.0);
        c.perturb_w1 = 1e-3;
        let doc = run_job(&c).unwrap();
        assert!(!doc.all_passed);
        let v = doc.validation.unwrap();
        assert!(!v.riccati.pass);
        assert!(v.riccati.value > 1e-3);
    }

    #[test]
    fn spectrum_qes_expected_only_first_two() {
        let mut c = quick_config(CommandKind::Spectrum);
        c.family = Some(FamilyKind::HermiteOdd);
        c.k = Some(1);
        c.epsilon = Some(2.0);
        let doc = run_job(&c).unwrap();
        assert!(doc.all_passed);
        let oracle = doc.oracle.unwrap();
        assert!(oracle.levels[0].expected_energy == Some(0.0));
        assert!(oracle.levels[1].expected_energy == Some(2.0));
        assert!(oracle.levels[2].expected_energy.is_none());
        assert!(oracle.levels[3].expected_energy.is_none());
        assert!(oracle.levels[0].overlap.unwrap() > 0.999);
        assert!(oracle.levels[1].overlap.unwrap() > 0.999);
    }

    #[test]
    fn spectrum_example_two_matches_closed_levels() {
        let mut c = quick_config(CommandKind::Spectrum);
        c.points = 2001;
        c.half_width = 12.0;
        c.levels = 5;
        c.family = Some(FamilyKind::HermiteRatio);
        c.k = Some(2);
        c.m = Some(1);
        let doc = run_job(&c).unwrap();
        assert!(doc.all_passed, "{doc:?}");
        let oracle = doc.oracle.unwrap();
        let expected: Vec<f64> = oracle
            .levels
            .iter()
            .map(|r| r.expected_energy.unwrap())
            .collect();
        assert_eq!(expected, vec![0.0, 3.0, 6.0, 7.0, 8.0]);
        // the quadrature-sampled eigenstates line up with the oracle vectors
        assert!(oracle.levels[0].overlap.unwrap() > 0.999);
        assert!(oracle.levels[1].overlap.unwrap() > 0.999);
    }

    #[test]
    fn ces_harmonic_reproduces_tower() {
        let mut c = quick_config(CommandKind::Ces);
        c.base = Some(BaseKind::Harmonic);
        c.k = Some(1);
        let doc = run_job(&c).unwrap();
        assert!(doc.all_passed, "{doc:?}");
        let ces = doc.ces.clone().unwrap();
        assert_eq!(ces.epsilon_k, 3.0);
        assert!(ces.two_route_residual.pass);
        assert!(ces.w1_consistency.pass);
        let oracle = doc.oracle.clone().unwrap();
        let expected: Vec<f64> = oracle
            .levels
            .iter()
            .map(|r| r.expected_energy.unwrap())
            .collect();
        assert_eq!(expected, vec![0.0, 3.0, 4.0, 5.0]);
        // re-execution from the echo reproduces the whole document
        let again = run_job(&doc.config).unwrap();
        documents_agree(&doc, &again, 1e-12).unwrap();
    }

    #[test]
    fn validate_over_base_reports_generator_equation() {
        let mut c = quick_config(CommandKind::Validate);
        c.base = Some(BaseKind::RosenMorse);
        c.alpha = Some(2.5);
        c.k = Some(3);
        let doc = run_job(&c).unwrap();
        assert!(doc.all_passed, "{doc:?}");
        let phi_ode = doc.validation.unwrap().phi_ode.expect("phi-ODE block");
        assert!(phi_ode.pass);
        assert!(phi_ode.value < 1e-10, "residual {}", phi_ode.value);
    }

    #[test]
    fn document_roundtrip_is_reproducible() {
        let mut c = quick_config(CommandKind::Spectrum);
        c.family = Some(FamilyKind::HermiteOdd);
        c.k = Some(1);
        c.epsilon = Some(3.0);
        let doc1 = run_job(&c).unwrap();
        let doc2 = run_job(&doc1.config).unwrap();
        documents_agree(&doc1, &doc2, 1e-12).unwrap();
    }

    #[test]
    fn grid_render_formats() {
        let mut c = quick_config(CommandKind::ExportGrid);
        c.points = 101;
        c.half_width = 4.0;
        c.family = Some(FamilyKind::Monomial);
        c.epsilon = Some(2.0);
        let model = ResolvedModel::from_config(&c).unwrap();
        let cols = sample_columns(&c, &model).unwrap();
        let csv = render_grid(&cols, ExportFormat::Csv);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "x,V_minus,V_plus,W,W1,psi0,psi1");
        assert_eq!(csv.lines().count(), 102);
        let json = render_grid(&cols, ExportFormat::Json);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 101);
    }
}
