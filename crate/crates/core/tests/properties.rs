//! Property tests for the invariants that must hold across the whole
//! catalog, plus the deterministic stability checks of the oracle.

use proptest::prelude::*;

use susyqm::ces::{
    ces_potential, dual_superpotential, phi_from_dual, shape_invariance_residual, CesModel,
    SolvableBase,
};
use susyqm::genfunc::GeneratorFunction;
use susyqm::linspace;
use susyqm::oracle::{discretize, lowest_eigenpairs, lowest_eigenvalues, sturm_count, Grid};
use susyqm::susy::{
    riccati_residual, superpotentials_from_phi, unbroken_susy_check, Superpotential,
};

fn generator_strategy() -> impl Strategy<Value = GeneratorFunction> {
    prop_oneof![
        Just(GeneratorFunction::monomial()),
        (0usize..6).prop_map(|k| GeneratorFunction::hermite_odd(k).unwrap()),
        (1usize..5, 1usize..5).prop_map(|(a, b)| {
            let (k, m) = if a >= b { (a, b) } else { (b, a) };
            GeneratorFunction::hermite_ratio(k, m).unwrap()
        }),
        (prop_oneof![Just(1usize), Just(3), Just(5)], 1.05..6.0f64)
            .prop_map(|(i, alpha)| GeneratorFunction::sinh_family(i, alpha).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn generator_is_odd(g in generator_strategy(), x in 0.01..7.0f64) {
        let plus = g.phi(x).unwrap();
        let minus = g.phi(-x).unwrap();
        let scale = plus.abs().max(1.0);
        prop_assert!(
            (plus + minus).abs() / scale < 1e-13,
            "{}: phi({x}) = {plus}, phi(-{x}) = {minus}",
            g.describe()
        );
    }

    #[test]
    fn superpotential_ignores_beta(
        g in generator_strategy(),
        beta in 0.25..8.0f64,
        epsilon in 0.3..6.0f64,
        x in -6.0..6.0f64,
    ) {
        let (w_unit, _) = superpotentials_from_phi(&g, epsilon).unwrap();
        let scaled = g.clone().with_beta(beta).unwrap();
        let (w_beta, _) = superpotentials_from_phi(&scaled, epsilon).unwrap();
        let a = w_unit.w(x).unwrap();
        let b = w_beta.w(x).unwrap();
        prop_assert!(
            (a - b).abs() <= 1e-14 * a.abs().max(1.0),
            "{} at x={x}: {a} vs {b}",
            g.describe()
        );
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences(
        g in generator_strategy(),
        x in -4.0..4.0f64,
    ) {
        let h = 1e-5;
        let p = g.eval_with_derivs(x).unwrap();
        let pp = g.eval_with_derivs(x + h).unwrap();
        let pm = g.eval_with_derivs(x - h).unwrap();
        let fd1 = (pp.phi - pm.phi) / (2.0 * h);
        let fd2 = (pp.phi - 2.0 * p.phi + pm.phi) / (h * h);
        prop_assert!(
            (fd1 - p.d1).abs() / p.d1.abs().max(1.0) < 1e-6,
            "{} phi' at x={x}: {fd1} vs {}",
            g.describe(),
            p.d1
        );
        prop_assert!(
            (fd2 - p.d2).abs() / p.d2.abs().max(1.0) < 1e-4,
            "{} phi'' at x={x}: {fd2} vs {}",
            g.describe(),
            p.d2
        );
    }

    #[test]
    fn sturm_count_is_monotone(mut lambdas in prop::collection::vec(-5.0..80.0f64, 2..40)) {
        let grid = Grid::new(8.0, 501).unwrap();
        let op = discretize(|x| 0.5 * x * x, &grid).unwrap();
        lambdas.sort_by(f64::total_cmp);
        let counts: Vec<usize> = lambdas.iter().map(|&l| sturm_count(&op, l)).collect();
        prop_assert!(
            counts.windows(2).all(|w| w[0] <= w[1]),
            "counts not monotone: {counts:?} at {lambdas:?}"
        );
    }

    #[test]
    fn riccati_flags_additive_perturbations(
        amplitude in 1e-3..0.1f64,
        epsilon in 0.5..4.0f64,
    ) {
        let g = GeneratorFunction::hermite_odd(1).unwrap();
        let (w, w1) = superpotentials_from_phi(&g, epsilon).unwrap();
        let broken = Superpotential::new(move |x| {
            let (v, vp) = w1.eval(x)?;
            Ok((v + amplitude, vp))
        });
        let xs = linspace(-5.0, 5.0, 101);
        let clean = riccati_residual(&w, &broken, epsilon, &xs).unwrap();
        prop_assert!(
            clean > 0.5 * amplitude,
            "perturbation {amplitude} produced residual {clean}"
        );
    }

    #[test]
    fn ratio_of_eigenstates_recovers_generator(
        g in generator_strategy(),
        epsilon in 0.4..5.0f64,
        x in -3.0..3.0f64,
    ) {
        let pair = susyqm::susy::eigenpair_from_phi(&g, epsilon).unwrap();
        let phi = g.phi(x).unwrap();
        let psi0 = pair.psi0(x).unwrap();
        let psi1 = pair.psi1(x).unwrap();
        let scale = (phi * psi0).abs().max(psi0.abs() * 1e-6).max(f64::MIN_POSITIVE);
        prop_assert!(
            (psi1 - phi * psi0).abs() / scale < 1e-13,
            "{} at x={x}",
            g.describe()
        );
    }
}

/// Truncating the line further out must not move bound levels: the gate
/// potentials are solved at L and L + 2 with matched spacing.
#[test]
fn domain_truncation_stability_for_gate_potentials() {
    struct Case {
        name: &'static str,
        v: Box<dyn Fn(f64) -> f64>,
        levels: usize,
    }
    let mut cases: Vec<Case> = Vec::new();
    for k in [1usize, 2] {
        let model = CesModel::HermiteOdd { k };
        let g = GeneratorFunction::hermite_odd(k).unwrap();
        let (w, _) = superpotentials_from_phi(&g, model.epsilon().unwrap()).unwrap();
        cases.push(Case {
            name: if k == 1 {
                "odd tower k=1"
            } else {
                "odd tower k=2"
            },
            v: Box::new(move |x| {
                let (wv, wp) = w.eval(x).unwrap();
                0.5 * (wv * wv - wp)
            }),
            levels: 6,
        });
    }
    {
        let g = GeneratorFunction::hermite_ratio(2, 1).unwrap();
        let (w, _) = superpotentials_from_phi(&g, 3.0).unwrap();
        cases.push(Case {
            name: "ratio tower (2,1)",
            v: Box::new(move |x| {
                let (wv, wp) = w.eval(x).unwrap();
                0.5 * (wv * wv - wp)
            }),
            levels: 5,
        });
    }
    {
        let base = SolvableBase::rosen_morse(2.5).unwrap();
        let ces1 = ces_potential(&base, 1).unwrap();
        cases.push(Case {
            name: "rosen-morse k=1",
            v: Box::new(move |x| ces1.eval(x).unwrap()),
            levels: 3, // highest kept level sits 1.125 below the continuum
        });
        let ces3 = ces_potential(&base, 3).unwrap();
        cases.push(Case {
            name: "rosen-morse k=3",
            v: Box::new(move |x| ces3.eval(x).unwrap()),
            levels: 2,
        });
    }

    for case in &cases {
        let a = lowest_eigenvalues(
            &discretize(&case.v, &Grid::new(12.0, 4001).unwrap()).unwrap(),
            case.levels,
            1e-11,
        )
        .unwrap();
        // same h = 0.006: 2*14/0.006 = 4666.7 -> 4669 points gives h within 0.03 %
        let b = lowest_eigenvalues(
            &discretize(&case.v, &Grid::new(14.0, 4669).unwrap()).unwrap(),
            case.levels,
            1e-11,
        )
        .unwrap();
        for (i, (x, y)) in a.iter().zip(&b).enumerate() {
            assert!(
                (x - y).abs() < 1e-6,
                "{}: level {i} moved {:.2e} when the wall moved out",
                case.name,
                (x - y).abs()
            );
        }
    }
}

/// Both superpotentials of every catalog configuration point the right way
/// at the probes, so the zero mode stays normalizable.
#[test]
fn sign_condition_across_the_catalog() {
    let mut configs: Vec<(GeneratorFunction, f64)> = vec![
        (GeneratorFunction::monomial(), 1.7),
        (GeneratorFunction::hermite_ratio(2, 1).unwrap(), 3.0),
        (GeneratorFunction::hermite_ratio(4, 2).unwrap(), 1.1),
    ];
    for k in [1usize, 2, 3] {
        for eps in [1.3, 2.0, 3.7] {
            configs.push((GeneratorFunction::hermite_odd(k).unwrap(), eps));
        }
    }
    for alpha in [2.0, 2.5, 3.3] {
        let base = SolvableBase::rosen_morse(alpha).unwrap();
        for k in [1usize, 3, 5] {
            configs.push((
                phi_from_dual(&base, k).unwrap(),
                susyqm::ces::epsilon_k(&base, k).unwrap(),
            ));
        }
    }
    for (g, eps) in configs {
        let (w, w1) = superpotentials_from_phi(&g, eps).unwrap();
        assert!(
            unbroken_susy_check(&w, 8.0).unwrap().pass,
            "{} eps={eps}: W fails the sign condition",
            g.describe()
        );
        assert!(
            unbroken_susy_check(&w1, 8.0).unwrap().pass,
            "{} eps={eps}: W1 fails the sign condition",
            g.describe()
        );
    }
}

/// Duality runs the shape-invariance step in reverse with the same
/// remainder: if the base steps alpha -> alpha1 with R, the dual steps
/// alpha1 -> alpha with the identical R.
#[test]
fn duality_swaps_shape_parameters() {
    let xi = linspace(-1.2, 1.2, 201);
    for alpha in [2.0, 2.5, 3.3] {
        let base = SolvableBase::rosen_morse(alpha).unwrap();
        let step = base.shape_step();
        let dual = dual_superpotential(&base);
        let r = shape_invariance_residual(
            |x, a| dual.eval_with_strength(x, a).unwrap(),
            step.alpha1,
            step.alpha,
            step.remainder,
            &xi,
        );
        assert!(r < 1e-10, "alpha={alpha}: swapped-step residual {r}");
    }
}

/// The chain-derived tail of the Rosen-Morse spectrum is only trusted after
/// the oracle confirms it; this is that confirmation.
#[test]
fn oracle_confirms_rosen_morse_chain_levels() {
    let model = CesModel::RosenMorse { alpha: 2.5, k: 1 };
    let spectrum = model.exact_spectrum(3).unwrap();
    assert!(spectrum.susy_chain_tail);
    assert_eq!(spectrum.levels, vec![0.0, 3.0, 5.0, 6.0]);
    let base = SolvableBase::rosen_morse(2.5).unwrap();
    let potential = ces_potential(&base, 1).unwrap();
    let grid = Grid::new(12.0, 4001).unwrap();
    let op = discretize(|x| potential.eval(x).unwrap(), &grid).unwrap();
    let oracle = lowest_eigenpairs(&op, 4, 1e-10).unwrap();
    for (i, (o, e)) in oracle.eigenvalues.iter().zip(&spectrum.levels).enumerate() {
        assert!(
            (o - e).abs() < 1e-3,
            "chain level {i}: oracle {o} vs derived {e}"
        );
    }
}

/// The k-th generator of the harmonic base solves the defining equation with
/// gap 2k + 1 for every k in the polynomial range.
#[test]
fn harmonic_dual_solutions_solve_their_equation() {
    let xs = linspace(-6.0, 6.0, 301);
    for k in 0..=8 {
        let r = susyqm::ces::phi_ode_residual(&SolvableBase::Harmonic, k, &xs).unwrap();
        assert!(r < 1e-10, "k = {k}: residual {r}");
    }
    let g = phi_from_dual(&SolvableBase::Harmonic, 3).unwrap();
    assert_eq!(g.describe(), "hermite-odd(k=3)");
}
