//! Acceptance suite. Runs as a plain binary so that every criterion prints
//! one PASS/FAIL line; exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use backflow::channel::QuantumChannel;
use backflow::distinguishability::trajectory;
use backflow::divisibility::{scan_cp_divisibility, ScanOptions};
use backflow::dynamics::models::{
    amplitude_damping, eternal_pauli, lorentzian_zero, model_amplitude_damping_lorentzian, pauli_dephasing,
    pauli_depolarizing,
};
use backflow::dynamics::{integrate_to, rank_profile, DynamicalFamily, GeneratorSpec, Rate, TimeGrid};
use backflow::operator::{pauli_matrices, ComplexMatrix, HermitianOperator};
use backflow::random;
use backflow::scenario::{run_pipeline, ScenarioConfig};
use backflow::witness::{
    construct_witness, helstrom_rescale, kernel_witness, separable_witness, verify_witness, SeparabilityMethod,
};
use backflow::Tolerances;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn eternal_grid() -> TimeGrid {
    TimeGrid::new(0.1, 3.0, 291).unwrap()
}

/// Closed-form minimum Choi eigenvalue of the eternal-model step `(s, t)`.
fn eternal_min_choi(s: f64, t: f64) -> f64 {
    let (x, y) = ((-2.0 * s).exp(), (-2.0 * t).exp());
    (x - 1.0) * (x - y) / (4.0 * x * (1.0 + x))
}

fn soundness() -> Outcome {
    let fam = eternal_pauli();
    let grid = eternal_grid();
    let tol = Tolerances::default();
    let report = scan_cp_divisibility(&fam, &grid, &ScanOptions::default());
    let mut min_gain = f64::INFINITY;
    let mut worst_identity = 0.0f64;
    for step in &report.steps {
        let min = step.min_choi_eig.ok_or_else(|| format!("step {} unclassified", step.s))?;
        let oracle = eternal_min_choi(step.s, step.t);
        ensure!(oracle < -1e-4, "oracle min eig {oracle:e} at s={}", step.s);
        ensure!((min - oracle).abs() < 1e-12, "min eig {min:e} vs oracle {oracle:e} at s={}", step.s);
        ensure!(step.cp == Some(false), "step at s={} classified CP", step.s);
        let pair = construct_witness(&fam, step.s, 0.9, &tol).map_err(|e| e.to_string())?;
        let cert = verify_witness(&fam, &pair, step.t, &tol).map_err(|e| e.to_string())?;
        ensure!(cert.gain > 0.0, "gain {:e} at s={}", cert.gain, step.s);
        let predicted = pair.p * cert.choi_excess.unwrap();
        worst_identity = worst_identity.max((cert.gain - predicted).abs());
        min_gain = min_gain.min(cert.gain);
    }
    ensure!(worst_identity <= 1e-7, "gain identity residual {worst_identity:e}");
    Ok(format!(
        "{} non-CP steps, min gain {min_gain:.3e}, max |gain - p*choi_excess| {worst_identity:.1e}",
        report.steps.len()
    ))
}

fn completeness() -> Outcome {
    let grid = TimeGrid::new(0.0, 3.0, 301).unwrap();
    let tol = Tolerances::default();
    let mut worst_eig = f64::INFINITY;
    let mut worst_gain = 0.0f64;
    for fam in [pauli_depolarizing(0.5), pauli_dephasing(1.0), amplitude_damping(1.0)] {
        let report = scan_cp_divisibility(&fam, &grid, &ScanOptions::default());
        for step in &report.steps {
            let min = step.min_choi_eig.ok_or_else(|| format!("{}: step {} unclassified", fam.label(), step.s))?;
            ensure!(min >= -1e-9, "{}: min eig {min:e} at s={}", fam.label(), step.s);
            worst_eig = worst_eig.min(min);
            let pair = construct_witness(&fam, step.s, 0.9, &tol).map_err(|e| e.to_string())?;
            let cert = verify_witness(&fam, &pair, step.t, &tol).map_err(|e| e.to_string())?;
            ensure!(cert.gain.abs() <= 1e-8, "{}: gain {:e} at s={}", fam.label(), cert.gain, step.s);
            worst_gain = worst_gain.max(cert.gain.abs());
        }
    }
    Ok(format!(
        "3 semigroups x 300 steps, min Choi eig {worst_eig:.1e}, max |gain| {worst_gain:.1e}"
    ))
}

fn ancilla_necessity() -> Outcome {
    let fam = eternal_pauli();
    let grid = eternal_grid();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_rise = f64::NEG_INFINITY;
    for i in 0..200 {
        let (a, b) = if i % 2 == 0 {
            (random::pure_state(&mut rng, 2), random::pure_state(&mut rng, 2))
        } else {
            (random::density(&mut rng, 2), random::density(&mut rng, 2))
        };
        let traj = trajectory(&fam, &a, &b, &grid, None).map_err(|e| e.to_string())?;
        worst_rise = worst_rise.max(traj.max_increase());
    }
    ensure!(worst_rise <= 1e-9, "system-only trajectory rises by {worst_rise:e}");
    let pair = construct_witness(&fam, 0.5, 0.9, &tol).map_err(|e| e.to_string())?;
    let gain = verify_witness(&fam, &pair, 0.51, &tol).map_err(|e| e.to_string())?.gain;
    ensure!(gain > 0.0, "extended-space gain {gain:e}");
    Ok(format!(
        "200 system-only pairs: max step increase {worst_rise:.1e}; extended witness gain {gain:.3e}"
    ))
}

fn separability() -> Outcome {
    let fam = eternal_pauli();
    let tol = Tolerances::default();
    let mut worst_scaling = 0.0f64;
    let mut min_gain = f64::INFINITY;
    for (s, t) in [(0.1, 0.11), (0.5, 1.0), (1.0, 1.01), (2.5, 3.0)] {
        let pair = construct_witness(&fam, s, 0.9, &tol).map_err(|e| e.to_string())?;
        let gain = verify_witness(&fam, &pair, t, &tol).map_err(|e| e.to_string())?.gain;
        let sep = separable_witness(&pair).map_err(|e| e.to_string())?;
        let cert = sep.separable.unwrap();
        ensure!(cert.method == SeparabilityMethod::Ppt, "certification used {:?}", cert.method);
        for r in [&sep.rho1_initial, &sep.rho2_initial] {
            let pt = r.matrix().partial_transpose_b(3, 2).unwrap();
            let min = HermitianOperator::new(pt).unwrap().min_eigenvalue();
            ensure!(min >= -1e-12, "partial transpose eigenvalue {min:e}");
        }
        let g2 = verify_witness(&fam, &sep, t, &tol).map_err(|e| e.to_string())?.gain;
        ensure!(g2 > 1e-9, "separable gain {g2:e} at s={s}");
        worst_scaling = worst_scaling.max((g2 - cert.q * gain).abs());
        min_gain = min_gain.min(g2);
    }
    ensure!(worst_scaling <= 1e-9, "gain scaling residual {worst_scaling:e}");
    Ok(format!(
        "PPT-certified on C3 x C2, min separable gain {min_gain:.3e}, max |gain' - q*gain| {worst_scaling:.1e}"
    ))
}

fn contraction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..500 {
        let d = rng.random_range(2..=3);
        let n_kraus = rng.random_range(1..=d * d);
        let ch = random::cptp_channel(&mut rng, d, n_kraus);
        for _ in 0..20 {
            let k = rng.random_range(1..=3);
            let p: f64 = rng.random_range(0.0..1.0);
            let (r1, r2) = (random::density(&mut rng, k * d), random::density(&mut rng, k * d));
            let delta = r1.as_hermitian().combine(p, r2.as_hermitian(), -(1.0 - p));
            let before = delta.trace_norm();
            let after = ch
                .apply_extended_hermitian(k, &delta)
                .map_err(|e| e.to_string())?
                .trace_norm();
            worst = worst.max(after - before);
        }
    }
    ensure!(worst <= 1e-9, "trace norm grew by {worst:e}");
    Ok(format!("10000 Helstrom matrices, max ||E(D)|| - ||D|| = {worst:.1e}"))
}

fn helstrom_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = rng.random_range(2..=4);
        let p: f64 = rng.random_range(0.001..0.999);
        let r: f64 = rng.random_range(0.001..=1.0);
        let (r1, r2, sg) = (
            random::density(&mut rng, d),
            random::density(&mut rng, d),
            random::density(&mut rng, d),
        );
        let h = helstrom_rescale(&r1, &r2, p, &sg, r).map_err(|e| e.to_string())?;
        let x = r * (1.0 - p) / (p + r - 2.0 * r * p);
        let y = p / (2.0 * p + r - 2.0 * r * p);
        ensure!(h.x == x && h.y == y, "weights differ from the quoted formulas");
        // rebuild the rescaled states from the formulas alone
        let rho1p = sg.as_hermitian().combine(1.0 - r, r1.as_hermitian(), r);
        let rho2p = sg.as_hermitian().combine(1.0 - x, r2.as_hermitian(), x);
        let lhs = rho1p.combine(y, &rho2p, -(1.0 - y));
        let delta = r1.as_hermitian().combine(p, r2.as_hermitian(), -(1.0 - p));
        let rhs = delta.scale(r / (2.0 * p + r - 2.0 * r * p));
        worst = worst.max(lhs.matrix().max_abs_diff(rhs.matrix()));
        let lib = h.rho1p.as_hermitian().combine(h.y, h.rho2p.as_hermitian(), -(1.0 - h.y));
        worst = worst.max(lib.matrix().max_abs_diff(rhs.matrix()));
    }
    ensure!(worst <= 1e-12, "identity residual {worst:e}");
    Ok(format!("1000 tuples, max entrywise residual {worst:.1e}"))
}

fn non_bijective() -> Outcome {
    let (lambda, gamma0) = (1.0, 5.0);
    let tz = lorentzian_zero(lambda, gamma0, 0).unwrap();
    let fam = model_amplitude_damping_lorentzian(lambda, gamma0).map_err(|e| e.to_string())?;
    let grid = TimeGrid::new(0.0, 2.0 * tz, 253).unwrap();
    let zero = grid.index_of(tz).ok_or("first zero is not a grid point")?;
    let ranks = rank_profile(&fam, &grid, 1e-10).map_err(|e| e.to_string())?;
    ensure!(ranks[zero] < 4, "rank {} at the zero", ranks[zero]);
    ensure!(ranks[..zero].iter().all(|&r| r == 4), "rank dips before the zero");
    ensure!(ranks[zero + 1..].iter().all(|&r| r == 4), "rank does not recover after the zero");
    let later = grid.point(zero + 10);
    let kw = kernel_witness(&fam, tz, later, 0.9, &Tolerances::default()).map_err(|e| e.to_string())?;
    ensure!(kw.norm_at_s <= 1e-12, "states distinguishable at the zero: {:e}", kw.norm_at_s);
    ensure!(kw.norm_at_t > 1e-6, "kernel witness norm {:e} at t={later}", kw.norm_at_t);
    let report = scan_cp_divisibility(&fam, &grid, &ScanOptions::default());
    let (s, t) = report.divisibility_obstruction.ok_or("scan did not flag an obstruction")?;
    ensure!(grid.index_of(s) == Some(zero), "obstruction flagged at s={s}, zero at {tz}");
    Ok(format!(
        "rank {} at t*={tz:.6}, 4 elsewhere; kernel pair norm {:.1e} -> {:.3e}; obstruction over [{s:.6}, {t:.6}]",
        ranks[zero], kw.norm_at_s, kw.norm_at_t
    ))
}

fn numerics() -> Outcome {
    // Choi round trips
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_rt = 0.0f64;
    for _ in 0..300 {
        let d = rng.random_range(2..=4);
        let n_kraus = rng.random_range(1..=d * d);
        let ch = random::cptp_channel(&mut rng, d, n_kraus);
        let back = QuantumChannel::from_choi(&ch.to_choi()).map_err(|e| e.to_string())?;
        worst_rt = worst_rt.max(back.max_abs_diff(&ch));
    }
    ensure!(worst_rt <= 1e-11, "Choi round trip error {worst_rt:e}");

    // fourth order on the dephasing closed form, time-dependent rate
    let rate = Rate::custom(|t| 1.0 + t.sin());
    let spec = GeneratorSpec::new(2)
        .with_jump(pauli_matrices()[3].clone(), rate.clone())
        .map_err(|e| e.to_string())?;
    let plus = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
    let exact = 0.5 * (-2.0 * rate.integral(1.0)).exp();
    let err = |n: usize| -> Result<f64, String> {
        let ch = integrate_to(&spec, 1.0 / n as f64, n).map_err(|e| e.to_string())?;
        Ok((ch.apply_matrix(&plus).map_err(|e| e.to_string())?[(0, 1)].re - exact).abs())
    };
    let (e10, e20, e40) = (err(10)?, err(20)?, err(40)?);
    let (q1, q2) = (e10 / e20, e20 / e40);
    ensure!(q1 >= 8.0 && q2 >= 8.0, "step-halving ratios {q1:.2}, {q2:.2}");

    // closed-form Pauli dephasing against its generator
    let gen = DynamicalFamily::from_generator(
        backflow::dynamics::models::pauli_generator([Rate::Constant(0.0), Rate::Constant(0.0), Rate::Constant(1.0)]),
        1e-3,
    )
    .map_err(|e| e.to_string())?;
    let diff = gen
        .evaluate(1.0)
        .map_err(|e| e.to_string())?
        .max_abs_diff(&*pauli_dephasing(1.0).evaluate(1.0).map_err(|e| e.to_string())?);
    ensure!(diff < 1e-7, "generator vs closed form differ by {diff:e}");

    // identical seeds give identical reports, regardless of thread count
    let cfg = ScenarioConfig::from_json(
        r#"{"model": {"id": "lorentzian_amplitude_damping", "lambda": 1.0, "gamma0": 5.0},
            "grid": {"t_start": 0.0, "t_end": 2.523395841588718, "n_points": 61},
            "pipeline": {"separable": true}, "seed": 42}"#,
    )
    .map_err(|e| e.to_string())?;
    let run_with = |threads: usize| -> Result<String, String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        pool.install(|| run_pipeline(&cfg))
            .map_err(|e| e.to_string())?
            .to_json()
            .map_err(|e| e.to_string())
    };
    let (a, b, c) = (run_with(1)?, run_with(4)?, run_with(4)?);
    ensure!(a == b && b == c, "reports differ between runs");
    Ok(format!(
        "Choi round trip {worst_rt:.1e}; RK4 halving ratios {q1:.1}, {q2:.1}; reports byte-identical ({} bytes)",
        a.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 soundness (eternal model, every step witnessed)", soundness),
        ("2 completeness (semigroups, zero gain)", completeness),
        ("3 ancilla necessity", ancilla_necessity),
        ("4 separable witness", separability),
        ("5 trace-norm contraction under CPTP maps", contraction),
        ("6 Helstrom rescaling identity", helstrom_identity),
        ("7 non-bijective detection", non_bijective),
        ("8 numerics and determinism", numerics),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
