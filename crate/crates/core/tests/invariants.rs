use backflow::distinguishability::{blp_integral, trajectory};
use backflow::divisibility::{scan_cp_divisibility, ScanOptions, StepStatus};
use backflow::dynamics::models::{
    amplitude_damping, eternal_pauli, model_amplitude_damping_lorentzian, model_pauli, pauli_generator,
};
use backflow::dynamics::{DynamicalFamily, ModelSpec, Rate, TimeGrid};
use backflow::witness::{construct_witness, construct_witness_with_ancilla, verify_witness};
use backflow::Tolerances;

#[test]
fn analytic_and_generator_routes_agree() {
    let grid = TimeGrid::new(0.1, 3.0, 59).unwrap();
    let opts = ScanOptions::default();
    for spec in [
        ModelSpec::EternalPauli,
        ModelSpec::Depolarizing { gamma: 0.5 },
        ModelSpec::AmplitudeDamping { gamma0: 1.0 },
    ] {
        let analytic = scan_cp_divisibility(&spec.analytic_family().unwrap(), &grid, &opts);
        let generated = DynamicalFamily::from_generator(spec.generator().unwrap(), 1e-3).unwrap();
        let numeric = scan_cp_divisibility(&generated, &grid, &opts);
        for (a, b) in analytic.steps.iter().zip(&numeric.steps) {
            assert_eq!(a.cp, b.cp, "{}: verdicts differ at s={}", spec.describe(), a.s);
            let gap = (a.min_choi_eig.unwrap() - b.min_choi_eig.unwrap()).abs();
            assert!(gap < 1e-7, "{}: min eig gap {gap:e} at s={}", spec.describe(), a.s);
        }
    }
}

fn zoo() -> Vec<DynamicalFamily> {
    vec![
        eternal_pauli(),
        model_pauli([Rate::Constant(1.0), Rate::Constant(1.0), Rate::custom(|t| -0.5 * t.tanh())]),
        model_pauli([Rate::Constant(0.3), Rate::custom(|t| 0.3 + (2.0 * t).sin()), Rate::Constant(0.3)]),
        amplitude_damping(0.7),
        model_amplitude_damping_lorentzian(1.0, 5.0).unwrap(),
        DynamicalFamily::from_generator(
            pauli_generator([Rate::Constant(0.0), Rate::Constant(0.0), Rate::custom(|t| t.cos())]),
            1e-3,
        )
        .unwrap(),
    ]
}

#[test]
fn soundness_and_completeness_over_the_zoo() {
    let tol = Tolerances::default();
    let grid = TimeGrid::new(0.05, 3.0, 60).unwrap();
    let opts = ScanOptions::new(&tol, 3);
    for f in zoo() {
        let report = scan_cp_divisibility(&f, &grid, &opts);
        let mut checked = 0;
        for step in report.steps.iter().filter(|s| s.status == StepStatus::Classified) {
            let min = step.min_choi_eig.unwrap();
            let Ok(pair) = construct_witness(&f, step.s, 0.9, &tol) else { continue };
            let cert = verify_witness(&f, &pair, step.t, &tol).unwrap();
            if min < -10.0 * tol.cp {
                assert!(cert.gain > 1e-9, "{}: gain {:e} at non-CP s={}", f.label(), cert.gain, step.s);
            } else if min >= -tol.cp {
                assert!(cert.gain <= 1e-9, "{}: gain {:e} at CP s={}", f.label(), cert.gain, step.s);
            }
            checked += 1;
        }
        assert!(checked > 0, "{}: nothing checked", f.label());
    }
}

#[test]
fn larger_ancilla_gives_the_same_verdicts() {
    let tol = Tolerances::default();
    let f = eternal_pauli();
    for s in [0.2, 1.0, 2.0] {
        let a = verify_witness(&f, &construct_witness(&f, s, 0.9, &tol).unwrap(), s + 0.1, &tol).unwrap();
        let pair = construct_witness_with_ancilla(&f, s, 0.9, 5, &tol).unwrap();
        let b = verify_witness(&f, &pair, s + 0.1, &tol).unwrap();
        assert!(a.witnessed && b.witnessed);
        let rel = (b.gain - pair.p * (b.choi_excess.unwrap() + b.flag_excess.unwrap())).abs();
        assert!(rel < 1e-9);
    }
}

#[test]
fn blp_integral_is_stable_under_refinement() {
    let tol = Tolerances::default();
    let f = eternal_pauli();
    let pair = construct_witness(&f, 0.5, 0.9, &tol).unwrap();
    let coarse = TimeGrid::new(0.5, 3.0, 251).unwrap();
    let fine = TimeGrid::new(0.5, 3.0, 501).unwrap();
    let a = blp_integral(&trajectory(&f, &pair.rho1_initial, &pair.rho2_initial, &coarse, Some(pair.ancilla_dim)).unwrap())
        .unwrap();
    let b = blp_integral(&trajectory(&f, &pair.rho1_initial, &pair.rho2_initial, &fine, Some(pair.ancilla_dim)).unwrap())
        .unwrap();
    assert!(a > 0.0);
    assert!((a - b).abs() / b < 0.05, "coarse {a} fine {b}");
}
