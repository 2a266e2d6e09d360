//! Backflow witnesses: pairs of initial states on `C^k ⊗ C^d` (`k ≥ d+1`)
//! whose trace distance grows across any step where `V_{t,s}` is not
//! completely positive.
//!
//! With `E = I_k ⊗ Λ_s` and the maximally mixed anchor `ω`, the initial
//! states are `ρ_i = (1−p)ω + p E⁻¹(τ_i)` where `τ₁ = φ⁺` lives on the first
//! `d` ancilla levels and `τ₂ = |d⟩⟨d| ⊗ I/d` on level `d`. At time `s` the
//! evolved difference is `p(τ₁ − τ₂)`, of trace norm `2p`; at `t` it is
//! `p[(I⊗V)(φ⁺) − |d⟩⟨d| ⊗ V(I/d)]`, whose two terms keep orthogonal
//! ancilla supports.

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::divisibility::{choi_excess, intermediate_map};
use crate::dynamics::DynamicalFamily;
use crate::operator::{DensityOperator, HermitianOperator};
use crate::{Error, Result, Tolerances, C64};

/// Bisection resolution for mixing weights.
const WEIGHT_RESOLUTION: f64 = 1e-6;
const MIN_WEIGHT: f64 = 1e-6;
/// Round-off allowance when testing the pencil for positivity.
const PENCIL_SLACK: f64 = 1e-13;
pub const DEFAULT_ETA: f64 = 0.9;

/// `φ⁺` on the first `d` ancilla levels and the flag state `|d⟩⟨d| ⊗ I/d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceStates {
    pub d: usize,
    pub ancilla_dim: usize,
    pub phi_plus: DensityOperator,
    pub flag_state: DensityOperator,
}

pub fn reference_states(d: usize) -> Result<ReferenceStates> {
    reference_states_with_ancilla(d, d + 1)
}

pub fn reference_states_with_ancilla(d: usize, k: usize) -> Result<ReferenceStates> {
    if d < 2 {
        return Err(Error::Domain(format!("system dimension {d} must be >= 2")));
    }
    if k < d + 1 {
        return Err(Error::Domain(format!("ancilla dimension {k} must be >= d+1 = {}", d + 1)));
    }
    let mut v = vec![C64::new(0.0, 0.0); k * d];
    for i in 0..d {
        v[i * d + i] = C64::new(1.0, 0.0);
    }
    let phi_plus = DensityOperator::pure(&v)?;
    let flag_state = DensityOperator::basis(k, d).tensor(&DensityOperator::maximally_mixed(d));
    Ok(ReferenceStates {
        d,
        ancilla_dim: k,
        phi_plus,
        flag_state,
    })
}

/// Largest `p ∈ [0, 1]` (to 1e-6) with `(1−p)·anchor + p·x ⪰ 0`.
///
/// The minimum eigenvalue of the pencil is concave in `p`, so the feasible
/// set is an interval starting at zero.
pub fn max_mixing_weight(x: &HermitianOperator, anchor: &DensityOperator) -> f64 {
    let a = anchor.as_hermitian();
    let feasible = |p: f64| a.combine(1.0 - p, x, p).min_eigenvalue() >= -PENCIL_SLACK;
    if feasible(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > WEIGHT_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparabilityMethod {
    /// Positive partial transpose, exact for `C³ ⊗ C²`.
    Ppt,
    /// Frobenius ball of radius `1/√(D(D−1))` around `I/D`.
    FrobeniusBall,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityCertificate {
    pub method: SeparabilityMethod,
    /// Weight of the original pair in `(1−q)ω + qρ_i`.
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessPair {
    pub s: f64,
    pub d: usize,
    pub ancilla_dim: usize,
    pub p: f64,
    /// `(I ⊗ Λ_s)(ω)`.
    pub sigma: DensityOperator,
    pub rho1_initial: DensityOperator,
    pub rho2_initial: DensityOperator,
    pub separable: Option<SeparabilityCertificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    pub s: f64,
    pub t: f64,
    pub p: f64,
    pub norm_at_s: f64,
    pub norm_at_t: f64,
    pub gain: f64,
    /// `‖(I⊗V_{t,s})(φ⁺)‖₁ − 1`.
    pub choi_excess: Option<f64>,
    /// `‖V_{t,s}(I/d)‖₁ − 1`; zero when `V` is positive.
    pub flag_excess: Option<f64>,
    /// `p·(choi_excess + flag_excess)`.
    pub predicted_gain: Option<f64>,
    pub witnessed: bool,
}

fn anchor(dim: usize) -> DensityOperator {
    DensityOperator::maximally_mixed(dim)
}

pub fn construct_witness(f: &DynamicalFamily, s: f64, eta: f64, tol: &Tolerances) -> Result<WitnessPair> {
    construct_witness_with_ancilla(f, s, eta, f.dim() + 1, tol)
}

pub fn construct_witness_with_ancilla(
    f: &DynamicalFamily,
    s: f64,
    eta: f64,
    k: usize,
    tol: &Tolerances,
) -> Result<WitnessPair> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("safety factor eta = {eta} must lie in (0, 1)")));
    }
    let d = f.dim();
    let refs = reference_states_with_ancilla(d, k)?;
    let ls = f.evaluate(s)?;
    let inv = ls.inverse(tol.cond_limit)?;
    let omega = anchor(k * d);

    let preimage = |tau: &DensityOperator| -> Result<HermitianOperator> {
        let y = inv.apply_extended(k, tau.matrix())?;
        let y = HermitianOperator::with_tolerance(y, tol.hermitian.max(1e-9))?;
        let tr = y.trace();
        Ok(y.scale(1.0 / tr))
    };
    let y1 = preimage(&refs.phi_plus)?;
    let y2 = preimage(&refs.flag_state)?;

    let p = eta * max_mixing_weight(&y1, &omega).min(max_mixing_weight(&y2, &omega));
    if p < MIN_WEIGHT {
        return Err(Error::DegenerateWeight(p));
    }
    let mix = |y: &HermitianOperator| {
        DensityOperator::from_hermitian_with(omega.as_hermitian().combine(1.0 - p, y, p), tol)
    };
    let sigma = ls.apply_extended(k, omega.matrix())?;
    let sigma = DensityOperator::from_hermitian_with(HermitianOperator::with_tolerance(sigma, 1e-9)?, tol)?;
    Ok(WitnessPair {
        s,
        d,
        ancilla_dim: k,
        p,
        sigma,
        rho1_initial: mix(&y1)?,
        rho2_initial: mix(&y2)?,
        separable: None,
    })
}

/// `‖(I_k ⊗ Λ)(ρ₁ − ρ₂)‖₁`.
pub fn evolved_norm(ch: &QuantumChannel, k: usize, rho1: &DensityOperator, rho2: &DensityOperator) -> Result<f64> {
    let diff = rho1.matrix() - rho2.matrix();
    Ok(ch.apply_extended_hermitian(k, &HermitianOperator::with_tolerance(diff, 1e-9)?)?
        .trace_norm())
}

/// Evolves the stored initial states directly with `I⊗Λ_s` and `I⊗Λ_t`.
pub fn verify_witness(f: &DynamicalFamily, pair: &WitnessPair, t: f64, tol: &Tolerances) -> Result<WitnessCertificate> {
    if !(t >= pair.s) {
        return Err(Error::Domain(format!("verification time {t} precedes anchor {}", pair.s)));
    }
    let k = pair.ancilla_dim;
    let norm_at_s = evolved_norm(&*f.evaluate(pair.s)?, k, &pair.rho1_initial, &pair.rho2_initial)?;
    let norm_at_t = evolved_norm(&*f.evaluate(t)?, k, &pair.rho1_initial, &pair.rho2_initial)?;
    let gain = norm_at_t - norm_at_s;

    let (choi, flag) = match intermediate_map(f, pair.s, t, tol.cond_limit) {
        Ok(v) => {
            let mixed = HermitianOperator::identity(pair.d).scale(1.0 / pair.d as f64);
            let flag = v.channel.apply(&mixed)?.trace_norm() - 1.0;
            (Some(choi_excess(&v.channel)), Some(flag))
        }
        Err(_) => (None, None),
    };
    Ok(WitnessCertificate {
        s: pair.s,
        t,
        p: pair.p,
        norm_at_s,
        norm_at_t,
        gain,
        choi_excess: choi,
        flag_excess: flag,
        predicted_gain: choi.zip(flag).map(|(c, g)| pair.p * (c + g)),
        witnessed: gain > tol.gain,
    })
}

/// Radius of the separable Frobenius ball around `I/D`.
pub fn separable_ball_radius(dim: usize) -> f64 {
    let n = dim as f64;
    1.0 / (n * (n - 1.0)).sqrt()
}

/// Largest `q` with `(1−q)ω + qρ` certified separable.
fn separable_weight(rho: &DensityOperator, k: usize, d: usize, method: SeparabilityMethod) -> Result<f64> {
    let dim = k * d;
    let omega = anchor(dim);
    match method {
        SeparabilityMethod::Ppt => {
            let pt = rho.matrix().partial_transpose_b(k, d)?;
            Ok(max_mixing_weight(&HermitianOperator::with_tolerance(pt, 1e-9)?, &omega))
        }
        SeparabilityMethod::FrobeniusBall => {
            let dist = (rho.matrix() - omega.matrix()).frobenius_norm();
            Ok(if dist == 0.0 {
                1.0
            } else {
                (separable_ball_radius(dim) / dist).min(1.0)
            })
        }
    }
}

/// Mixes both initial states towards `ω` until they are certified
/// separable. Since `ω` is common, the new pair is again a witness pair for
/// the same `σ` with weight `q·p`, and every gain scales by `q`.
pub fn separable_witness(pair: &WitnessPair) -> Result<WitnessPair> {
    let (k, d) = (pair.ancilla_dim, pair.d);
    let method = if k * d == 6 {
        SeparabilityMethod::Ppt
    } else {
        SeparabilityMethod::FrobeniusBall
    };
    let q = separable_weight(&pair.rho1_initial, k, d, method)?
        .min(separable_weight(&pair.rho2_initial, k, d, method)?);
    if q < MIN_WEIGHT {
        return Err(Error::CertificationFailed(q));
    }
    let omega = anchor(k * d);
    Ok(WitnessPair {
        s: pair.s,
        d,
        ancilla_dim: k,
        p: q * pair.p,
        sigma: pair.sigma.clone(),
        rho1_initial: omega.mix(&pair.rho1_initial, q),
        rho2_initial: omega.mix(&pair.rho2_initial, q),
        separable: Some(SeparabilityCertificate { method, q }),
    })
}

/// PPT test on `C^k ⊗ C^d`.
pub fn is_ppt(rho: &DensityOperator, k: usize, d: usize, tol: f64) -> Result<bool> {
    let pt = rho.matrix().partial_transpose_b(k, d)?;
    Ok(HermitianOperator::with_tolerance(pt, 1e-9)?.min_eigenvalue() >= -tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelstromRescale {
    pub x: f64,
    pub y: f64,
    /// `r/(2p + r − 2rp)`.
    pub factor: f64,
    pub rho1p: DensityOperator,
    pub rho2p: DensityOperator,
}

/// Rescales a Helstrom matrix `Δ_p = pρ₁ − (1−p)ρ₂` into an equal-weight
/// problem closer to `σ`: `ρ₁′ = (1−r)σ + rρ₁`, `ρ₂′ = (1−x)σ + xρ₂` with
/// `x = r(1−p)/(p+r−2rp)`, and `y = p/(2p+r−2rp)` satisfies
/// `yρ₁′ − (1−y)ρ₂′ = r/(2p+r−2rp)·Δ_p`.
pub fn helstrom_rescale(
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    p: f64,
    sigma: &DensityOperator,
    r: f64,
) -> Result<HelstromRescale> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("r = {r} must lie in (0, 1]")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} must lie in (0, 1)")));
    }
    if rho1.dim() != rho2.dim() || rho1.dim() != sigma.dim() {
        return Err(Error::Shape("Helstrom rescaling needs equal dimensions".into()));
    }
    let x = r * (1.0 - p) / (p + r - 2.0 * r * p);
    let y = p / (2.0 * p + r - 2.0 * r * p);
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Domain(format!("weight x = {x} outside (0, 1]")));
    }
    Ok(HelstromRescale {
        x,
        y,
        factor: r / (2.0 * p + r - 2.0 * r * p),
        rho1p: sigma.mix(rho1, r),
        rho2p: sigma.mix(rho2, x),
    })
}

/// Pair of system states that coincide under `Λ_s` but not under `Λ_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelWitness {
    pub s: f64,
    pub t: f64,
    pub kernel_direction: HermitianOperator,
    pub epsilon: f64,
    pub rho1: DensityOperator,
    pub rho2: DensityOperator,
    /// `‖Λ_s(ρ₁ − ρ₂)‖₁`.
    pub norm_at_s: f64,
    pub norm_at_t: f64,
}

/// `ρ_{1,2} = I/d ± εK` for the kernel direction `K` of `Λ_s` that `Λ_t`
/// separates most, with `ε = ε_safety/(d·‖K‖_∞)`.
pub fn kernel_witness(f: &DynamicalFamily, s: f64, t: f64, eps_safety: f64, tol: &Tolerances) -> Result<KernelWitness> {
    if !(eps_safety > 0.0 && eps_safety <= 1.0) {
        return Err(Error::Domain(format!("eps_safety = {eps_safety} must lie in (0, 1]")));
    }
    if !(t >= s) {
        return Err(Error::Domain(format!("kernel witness needs s <= t (got s={s}, t={t})")));
    }
    let d = f.dim();
    let lt = f.evaluate(t)?;
    let basis = crate::divisibility::kernel_basis(f, s, tol.rank)?;
    let mut best: Option<(f64, HermitianOperator)> = None;
    for k in basis {
        let n = lt.apply(&k)?.trace_norm();
        if best.as_ref().is_none_or(|(b, _)| n > *b) {
            best = Some((n, k));
        }
    }
    let Some((n_t, k)) = best.filter(|(n, _)| *n > tol.gain) else {
        return Err(Error::NoObstruction);
    };
    let eig = k.eigenvalues();
    let radius = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let epsilon = eps_safety / (d as f64 * radius);
    let mixed = HermitianOperator::identity(d).scale(1.0 / d as f64);
    let rho1 = DensityOperator::from_hermitian(mixed.combine(1.0, &k, epsilon))?;
    let rho2 = DensityOperator::from_hermitian(mixed.combine(1.0, &k, -epsilon))?;
    let norm_at_s = evolved_norm(&*f.evaluate(s)?, 1, &rho1, &rho2)?;
    Ok(KernelWitness {
        s,
        t,
        kernel_direction: k,
        epsilon,
        rho1,
        rho2,
        norm_at_s,
        norm_at_t: 2.0 * epsilon * n_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::models::*;
    use crate::operator::{ComplexMatrix, Keep};
    use crate::random;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn reference_states_are_orthogonal() {
        let r = reference_states(2).unwrap();
        assert_eq!(r.phi_plus.dim(), 6);
        assert!((r.phi_plus.matrix() * r.flag_state.matrix()).trace().norm() < 1e-15);
        let diff = r.phi_plus.as_hermitian().combine(1.0, r.flag_state.as_hermitian(), -1.0);
        assert!((diff.trace_norm() - 2.0).abs() < 1e-12);
        let reduced = r.phi_plus.matrix().partial_trace(3, 2, Keep::B).unwrap();
        assert!(reduced.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
        assert!(reference_states(1).is_err());
        assert!(reference_states_with_ancilla(2, 2).is_err());
    }

    #[test]
    fn mixing_weight_examples() {
        let omega = DensityOperator::maximally_mixed(4);
        assert_eq!(max_mixing_weight(omega.as_hermitian(), &omega), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random::pure_state(&mut rng, 4);
        assert_eq!(max_mixing_weight(rho.as_hermitian(), &omega), 1.0);
        // x = ω + 2(ρ − ω) has eigenvalues 2 − 1/4 and −1/4; pencil ω + 2p(ρ − ω)
        // has minimum eigenvalue 1/4 − p/2, zero at p = 1/2
        let x = omega.as_hermitian().combine(-1.0, rho.as_hermitian(), 2.0);
        assert!((max_mixing_weight(&x, &omega) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn mixing_weight_matches_dense_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let omega = DensityOperator::maximally_mixed(3);
        for _ in 0..5 {
            let x = random::hermitian(&mut rng, 3);
            let x = x.combine(1.0, &HermitianOperator::identity(3), (1.0 - x.trace()) / 3.0);
            let p = max_mixing_weight(&x, &omega);
            let sweep = (0..=100_000)
                .map(|k| k as f64 * 1e-5)
                .take_while(|&q| omega.as_hermitian().combine(1.0 - q, &x, q).min_eigenvalue() >= 0.0)
                .last()
                .unwrap();
            assert!((p - sweep).abs() < 2e-5, "{p} vs {sweep}");
        }
    }

    #[test]
    fn identity_family_gives_eta_and_no_gain() {
        let fam = identity_family(2);
        let pair = construct_witness(&fam, 0.3, 0.5, &tol()).unwrap();
        assert!((pair.p - 0.5).abs() < 1e-12);
        let cert = verify_witness(&fam, &pair, 1.0, &tol()).unwrap();
        assert!(cert.gain.abs() < 1e-12);
    }

    #[test]
    fn pair_invariants() {
        let fam = eternal_pauli();
        let pair = construct_witness(&fam, 0.5, 0.5, &tol()).unwrap();
        let refs = reference_states(2).unwrap();
        let ls = fam.evaluate(0.5).unwrap();
        let img1 = ls.apply_extended(3, pair.rho1_initial.matrix()).unwrap();
        let img2 = ls.apply_extended(3, pair.rho2_initial.matrix()).unwrap();
        let want1 = pair.sigma.mix(&refs.phi_plus, pair.p);
        let want2 = pair.sigma.mix(&refs.flag_state, pair.p);
        assert!(img1.max_abs_diff(want1.matrix()) < 1e-8);
        assert!(img2.max_abs_diff(want2.matrix()) < 1e-8);
        for r in [&pair.rho1_initial, &pair.rho2_initial] {
            assert!(r.as_hermitian().min_eigenvalue() >= -1e-10);
            assert!((r.as_hermitian().trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eternal_pipeline_oracle() {
        let fam = eternal_pauli();
        let pair = construct_witness(&fam, 0.5, 0.5, &tol()).unwrap();
        // Y₁ = (I⊗Λ_s⁻¹)(φ⁺) has minimum eigenvalue (1 − 1/b)/4, b = e^{-1};
        // the binding constraint is (1−p)/6 + p·min = 0
        let b = (-1.0f64).exp();
        let m = (1.0 - 1.0 / b) / 4.0;
        let pmax = (1.0 / 6.0) / (1.0 / 6.0 - m);
        assert!((pair.p - 0.5 * pmax).abs() < 1e-6);
        let cert = verify_witness(&fam, &pair, 1.0, &tol()).unwrap();
        assert!((cert.norm_at_s - 2.0 * pair.p).abs() < 1e-8);
        let (x, y) = (b, (-2.0f64).exp());
        let p3 = (x - 1.0) * (x - y) / (4.0 * x * (1.0 + x));
        assert!((cert.choi_excess.unwrap() - 2.0 * p3.abs()).abs() < 1e-10);
        assert!(cert.flag_excess.unwrap().abs() < 1e-12);
        assert!((cert.gain - cert.predicted_gain.unwrap()).abs() < 1e-7);
        assert!((cert.gain - 0.5 * pmax * 2.0 * p3.abs()).abs() < 1e-6);
        assert!(cert.witnessed);
    }

    #[test]
    fn semigroup_gain_vanishes() {
        let fam = pauli_depolarizing(0.7);
        let pair = construct_witness(&fam, 0.4, 0.9, &tol()).unwrap();
        for t in [0.4, 0.6, 1.5] {
            assert!(verify_witness(&fam, &pair, t, &tol()).unwrap().gain.abs() <= 1e-8);
        }
    }

    #[test]
    fn gain_identity_with_non_unital_step() {
        // the backward step of amplitude damping grows the flag term too
        let fam = model_amplitude_damping_lorentzian(1.0, 5.0).unwrap();
        let tz = lorentzian_zero(1.0, 5.0, 0).unwrap();
        let s = tz + 0.3;
        let pair = construct_witness(&fam, s, 0.9, &tol()).unwrap();
        let cert = verify_witness(&fam, &pair, s + 0.2, &tol()).unwrap();
        assert!((cert.gain - cert.predicted_gain.unwrap()).abs() < 1e-7);
    }

    #[test]
    fn singular_anchor_is_reported() {
        let fam = completely_depolarizing(2);
        assert!(matches!(
            construct_witness(&fam, 1.0, 0.9, &tol()),
            Err(Error::SingularMap { .. })
        ));
        assert!(construct_witness(&fam, 1.0, 1.5, &tol()).is_err());
    }

    #[test]
    fn separable_variant_scales_gain() {
        let fam = eternal_pauli();
        let pair = construct_witness(&fam, 0.5, 0.9, &tol()).unwrap();
        let sep = separable_witness(&pair).unwrap();
        let cert = sep.separable.unwrap();
        assert_eq!(cert.method, SeparabilityMethod::Ppt);
        for r in [&sep.rho1_initial, &sep.rho2_initial] {
            assert!(is_ppt(r, 3, 2, 0.0).unwrap());
        }
        let g = verify_witness(&fam, &pair, 1.0, &tol()).unwrap().gain;
        let g2 = verify_witness(&fam, &sep, 1.0, &tol()).unwrap().gain;
        assert!(g2 > 1e-9);
        assert!((g2 - cert.q * g).abs() < 1e-9);
    }

    #[test]
    fn frobenius_ball_for_larger_ancilla() {
        let fam = eternal_pauli();
        let pair = construct_witness_with_ancilla(&fam, 0.5, 0.9, 4, &tol()).unwrap();
        let sep = separable_witness(&pair).unwrap();
        let cert = sep.separable.unwrap();
        assert_eq!(cert.method, SeparabilityMethod::FrobeniusBall);
        let omega = DensityOperator::maximally_mixed(8);
        for r in [&sep.rho1_initial, &sep.rho2_initial] {
            assert!((r.matrix() - omega.matrix()).frobenius_norm() <= separable_ball_radius(8) + 1e-12);
        }
        assert!(verify_witness(&fam, &sep, 1.0, &tol()).unwrap().gain > 0.0);
    }

    #[test]
    fn helstrom_special_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (r1, r2, sg) = (
            random::density(&mut rng, 3),
            random::density(&mut rng, 3),
            random::density(&mut rng, 3),
        );
        let h = helstrom_rescale(&r1, &r2, 0.3, &sg, 1.0).unwrap();
        assert!((h.y - 0.3).abs() < 1e-15 && (h.x - 1.0).abs() < 1e-15);
        assert!(h.rho1p.matrix().max_abs_diff(r1.matrix()) < 1e-15);
        let h = helstrom_rescale(&r1, &r2, 0.5, &sg, 0.4).unwrap();
        assert!((h.x - 0.4).abs() < 1e-15 && (h.y - 0.5).abs() < 1e-15);
        assert!(helstrom_rescale(&r1, &r2, 1.0, &sg, 0.4).is_err());
        assert!(helstrom_rescale(&r1, &r2, 0.5, &sg, 0.0).is_err());
    }

    #[test]
    fn helstrom_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let p: f64 = rng.random_range(0.01..0.99);
            let r: f64 = rng.random_range(0.01..=1.0);
            let (r1, r2, sg) = (
                random::density(&mut rng, 4),
                random::density(&mut rng, 4),
                random::density(&mut rng, 4),
            );
            let h = helstrom_rescale(&r1, &r2, p, &sg, r).unwrap();
            let lhs = h.rho1p.as_hermitian().combine(h.y, h.rho2p.as_hermitian(), -(1.0 - h.y));
            let delta = r1.as_hermitian().combine(p, r2.as_hermitian(), -(1.0 - p));
            assert!(lhs.matrix().max_abs_diff(delta.scale(h.factor).matrix()) < 1e-12);
        }
    }

    #[test]
    fn kernel_witness_across_zero() {
        let fam = model_amplitude_damping_lorentzian(1.0, 5.0).unwrap();
        let tz = lorentzian_zero(1.0, 5.0, 0).unwrap();
        let kw = kernel_witness(&fam, tz, tz + 0.3, 0.9, &tol()).unwrap();
        assert!(kw.norm_at_s < 1e-12);
        assert!(kw.norm_at_t > 1e-6);
        let direct = evolved_norm(&fam.evaluate(tz + 0.3).unwrap(), 1, &kw.rho1, &kw.rho2).unwrap();
        assert!((direct - kw.norm_at_t).abs() < 1e-12);
        assert!(matches!(
            kernel_witness(&eternal_pauli(), 0.5, 1.0, 0.9, &tol()),
            Err(Error::NoObstruction)
        ));
    }

    #[test]
    fn kernel_witness_epsilon_is_maximal() {
        let fam = model_amplitude_damping_lorentzian(1.0, 5.0).unwrap();
        let tz = lorentzian_zero(1.0, 5.0, 0).unwrap();
        let kw = kernel_witness(&fam, tz, tz + 0.3, 1.0, &tol()).unwrap();
        let m = kw.rho1.as_hermitian().min_eigenvalue().min(kw.rho2.as_hermitian().min_eigenvalue());
        assert!(m.abs() < 1e-12);
    }
}
