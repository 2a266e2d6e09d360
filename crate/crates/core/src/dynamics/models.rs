//! Model zoo: closed-form dynamical families and their generators.

use serde::{Deserialize, Serialize};

use super::generator::{GeneratorSpec, Rate};
use super::DynamicalFamily;
use crate::channel::QuantumChannel;
use crate::operator::{pauli_matrices, ComplexMatrix};
use crate::{Error, Result};

/// Bloch-axis eigenvalues of the Pauli family with integrated rates
/// `Γ_k(t)`: `λ_i = exp(-Σ_{k≠i} Γ_k)`.
pub fn pauli_eigenvalues(rates: &[Rate; 3], t: f64) -> [f64; 3] {
    let g = [rates[0].integral(t), rates[1].integral(t), rates[2].integral(t)];
    [
        (-(g[1] + g[2])).exp(),
        (-(g[0] + g[2])).exp(),
        (-(g[0] + g[1])).exp(),
    ]
}

/// Qubit Pauli family generated by `Σ_k γ_k(t)/2 (σ_k ρ σ_k − ρ)`.
pub fn model_pauli(rates: [Rate; 3]) -> DynamicalFamily {
    let label = format!("pauli{:?}", rates);
    DynamicalFamily::analytic(2, label, move |t| {
        QuantumChannel::pauli_diagonal(pauli_eigenvalues(&rates, t))
    })
}

/// Rates `(1, 1, -tanh t)`: P-divisible at all times, never CP-divisible
/// after `t = 0`.
pub fn eternal_pauli() -> DynamicalFamily {
    model_pauli([Rate::Constant(1.0), Rate::Constant(1.0), Rate::NegTanh])
}

pub fn pauli_dephasing(gamma: f64) -> DynamicalFamily {
    model_pauli([Rate::Constant(0.0), Rate::Constant(0.0), Rate::Constant(gamma)])
}

pub fn pauli_depolarizing(gamma: f64) -> DynamicalFamily {
    model_pauli([gamma; 3].map(Rate::Constant))
}

/// Generator of [`model_pauli`] with jump operators `σ_k/√2`.
pub fn pauli_generator(rates: [Rate; 3]) -> GeneratorSpec {
    let p = pauli_matrices();
    let mut spec = GeneratorSpec::new(2);
    for (k, rate) in rates.into_iter().enumerate() {
        spec = spec
            .with_jump(p[k + 1].scale_real(std::f64::consts::FRAC_1_SQRT_2), rate)
            .expect("qubit jump operator");
    }
    spec
}

/// Kraus pair `K₀ = diag(1, G)`, `K₁ = √(1 − G²) |0⟩⟨1|` for a real
/// amplitude `|G| ≤ 1`.
pub fn amplitude_damping_channel(g: f64) -> QuantumChannel {
    let k0 = ComplexMatrix::real_diag(&[1.0, g]);
    let k1 = ComplexMatrix::from_real_rows(&[&[0.0, (1.0 - g * g).max(0.0).sqrt()], &[0.0, 0.0]]);
    QuantumChannel::from_kraus(2, &[k0, k1]).expect("qubit Kraus operators")
}

/// Markovian amplitude damping, `G(t) = e^{-γ₀ t/2}`.
pub fn amplitude_damping(gamma0: f64) -> DynamicalFamily {
    DynamicalFamily::analytic(2, format!("amplitude_damping(gamma0={gamma0})"), move |t| {
        amplitude_damping_channel((-0.5 * gamma0 * t).exp())
    })
}

pub fn amplitude_damping_generator(gamma0: f64) -> GeneratorSpec {
    GeneratorSpec::new(2)
        .with_jump(
            ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]),
            Rate::Constant(gamma0),
        )
        .expect("qubit jump operator")
}

/// On-resonance amplitude of a two-level atom coupled to a Lorentzian
/// reservoir of width `lambda` and strength `gamma0`:
///
/// `G(t) = e^{-λt/2} [cosh(dt/2) + (λ/d) sinh(dt/2)]`, `d = √(λ² − 2γ₀λ)`.
///
/// For `2γ₀ > λ` the hyperbolic functions turn trigonometric and `G` has
/// isolated zeros. Near `d = 0` both branches are replaced by their common
/// power series in `(dt/2)²`.
pub fn lorentzian_amplitude(lambda: f64, gamma0: f64, t: f64) -> f64 {
    let z = (lambda * lambda - 2.0 * gamma0 * lambda) * t * t / 4.0;
    let (c, s) = if z.abs() < 1e-4 {
        (
            1.0 + z / 2.0 + z * z / 24.0 + z * z * z / 720.0,
            1.0 + z / 6.0 + z * z / 120.0 + z * z * z / 5040.0,
        )
    } else if z > 0.0 {
        let x = z.sqrt();
        (x.cosh(), x.sinh() / x)
    } else {
        let x = (-z).sqrt();
        (x.cos(), x.sin() / x)
    };
    (-0.5 * lambda * t).exp() * (c + 0.5 * lambda * t * s)
}

/// Zeros of [`lorentzian_amplitude`] in strong coupling, `t_n` for
/// `n = 0, 1, …`; `None` in weak coupling.
pub fn lorentzian_zero(lambda: f64, gamma0: f64, n: usize) -> Option<f64> {
    let d2 = 2.0 * gamma0 * lambda - lambda * lambda;
    if d2 <= 0.0 {
        return None;
    }
    let dp = d2.sqrt();
    let y = std::f64::consts::PI - (dp / lambda).atan() + n as f64 * std::f64::consts::PI;
    Some(2.0 * y / dp)
}

pub fn model_amplitude_damping_lorentzian(lambda: f64, gamma0: f64) -> Result<DynamicalFamily> {
    if !(lambda > 0.0 && gamma0 > 0.0) || !lambda.is_finite() || !gamma0.is_finite() {
        return Err(Error::Domain(format!(
            "Lorentzian model needs lambda, gamma0 > 0 (got {lambda}, {gamma0})"
        )));
    }
    Ok(DynamicalFamily::analytic(
        2,
        format!("lorentzian_amplitude_damping(lambda={lambda}, gamma0={gamma0})"),
        move |t| amplitude_damping_channel(lorentzian_amplitude(lambda, gamma0, t)),
    ))
}

/// Identity at `t = 0`, the completely depolarizing map for every `t > 0`.
pub fn completely_depolarizing(dim: usize) -> DynamicalFamily {
    DynamicalFamily::analytic(dim, format!("completely_depolarizing(dim={dim})"), move |t| {
        if t == 0.0 {
            QuantumChannel::identity(dim)
        } else {
            QuantumChannel::completely_depolarizing(dim)
        }
    })
}

pub fn identity_family(dim: usize) -> DynamicalFamily {
    DynamicalFamily::analytic(dim, format!("identity(dim={dim})"), move |_| QuantumChannel::identity(dim))
}

/// Serializable model selection, as used in scenario files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Identity { dim: usize },
    EternalPauli,
    PauliConstant { rates: [f64; 3] },
    Dephasing { gamma: f64 },
    Depolarizing { gamma: f64 },
    AmplitudeDamping { gamma0: f64 },
    LorentzianAmplitudeDamping { lambda: f64, gamma0: f64 },
    CompletelyDepolarizing { dim: usize },
}

/// Catalogue entry printed by `backflow models`.
#[derive(Clone, Debug, Serialize)]
pub struct ModelInfo {
    pub id: &'static str,
    pub params: &'static [(&'static str, &'static str)],
    pub generator: bool,
    pub description: &'static str,
}

impl ModelSpec {
    pub fn catalog() -> Vec<ModelInfo> {
        vec![
            ModelInfo {
                id: "identity",
                params: &[("dim", "integer >= 1")],
                generator: true,
                description: "trivial dynamics, Λ_t = identity",
            },
            ModelInfo {
                id: "eternal_pauli",
                params: &[],
                generator: true,
                description: "qubit Pauli rates (1, 1, -tanh t); P- but not CP-divisible",
            },
            ModelInfo {
                id: "pauli_constant",
                params: &[("rates", "[g1, g2, g3], non-negative")],
                generator: true,
                description: "qubit Pauli semigroup with constant rates",
            },
            ModelInfo {
                id: "dephasing",
                params: &[("gamma", "rate >= 0")],
                generator: true,
                description: "qubit Pauli-Z dephasing semigroup",
            },
            ModelInfo {
                id: "depolarizing",
                params: &[("gamma", "rate >= 0")],
                generator: true,
                description: "qubit depolarizing semigroup (equal Pauli rates)",
            },
            ModelInfo {
                id: "amplitude_damping",
                params: &[("gamma0", "rate >= 0")],
                generator: true,
                description: "qubit amplitude damping semigroup, G(t) = exp(-gamma0 t / 2)",
            },
            ModelInfo {
                id: "lorentzian_amplitude_damping",
                params: &[("lambda", "reservoir width > 0"), ("gamma0", "coupling > 0")],
                generator: false,
                description: "exact on-resonance damping with a Lorentzian reservoir; zeros of G for 2 gamma0 > lambda",
            },
            ModelInfo {
                id: "completely_depolarizing",
                params: &[("dim", "integer >= 1")],
                generator: false,
                description: "rank-one map Tr(ρ) I/d for every t > 0",
            },
        ]
    }

    pub fn id(&self) -> &'static str {
        match self {
            ModelSpec::Identity { .. } => "identity",
            ModelSpec::EternalPauli => "eternal_pauli",
            ModelSpec::PauliConstant { .. } => "pauli_constant",
            ModelSpec::Dephasing { .. } => "dephasing",
            ModelSpec::Depolarizing { .. } => "depolarizing",
            ModelSpec::AmplitudeDamping { .. } => "amplitude_damping",
            ModelSpec::LorentzianAmplitudeDamping { .. } => "lorentzian_amplitude_damping",
            ModelSpec::CompletelyDepolarizing { .. } => "completely_depolarizing",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{}: {name} must be finite and >= 0, got {v}", self.id())))
            }
        };
        match self {
            ModelSpec::Identity { dim } | ModelSpec::CompletelyDepolarizing { dim } => {
                if *dim == 0 {
                    return Err(Error::Config(format!("{}: dim must be >= 1", self.id())));
                }
                Ok(())
            }
            ModelSpec::EternalPauli => Ok(()),
            ModelSpec::PauliConstant { rates } => rates.iter().try_for_each(|&r| nonneg("rates", r)),
            ModelSpec::Dephasing { gamma } | ModelSpec::Depolarizing { gamma } => nonneg("gamma", *gamma),
            ModelSpec::AmplitudeDamping { gamma0 } => nonneg("gamma0", *gamma0),
            ModelSpec::LorentzianAmplitudeDamping { lambda, gamma0 } => {
                if lambda.is_finite() && gamma0.is_finite() && *lambda > 0.0 && *gamma0 > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config(
                        "lorentzian_amplitude_damping: lambda and gamma0 must be > 0".into(),
                    ))
                }
            }
        }
    }

    fn pauli_rates(&self) -> Option<[Rate; 3]> {
        match *self {
            ModelSpec::EternalPauli => Some([Rate::Constant(1.0), Rate::Constant(1.0), Rate::NegTanh]),
            ModelSpec::PauliConstant { rates } => Some(rates.map(Rate::Constant)),
            ModelSpec::Dephasing { gamma } => {
                Some([Rate::Constant(0.0), Rate::Constant(0.0), Rate::Constant(gamma)])
            }
            ModelSpec::Depolarizing { gamma } => Some([gamma; 3].map(Rate::Constant)),
            _ => None,
        }
    }

    /// `id` followed by the parameters, e.g. `depolarizing(gamma=0.5)`.
    pub fn describe(&self) -> String {
        let value = serde_json::to_value(self).expect("serializable");
        let params: Vec<String> = value
            .as_object()
            .into_iter()
            .flatten()
            .filter(|(k, _)| k.as_str() != "id")
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        if params.is_empty() {
            self.id().to_string()
        } else {
            format!("{}({})", self.id(), params.join(", "))
        }
    }

    /// Closed-form family.
    pub fn analytic_family(&self) -> Result<DynamicalFamily> {
        self.validate()?;
        let fam = self.analytic_family_unlabelled()?;
        Ok(fam.with_label(self.describe()))
    }

    fn analytic_family_unlabelled(&self) -> Result<DynamicalFamily> {
        if let Some(rates) = self.pauli_rates() {
            return Ok(model_pauli(rates));
        }
        match *self {
            ModelSpec::Identity { dim } => Ok(identity_family(dim)),
            ModelSpec::AmplitudeDamping { gamma0 } => Ok(amplitude_damping(gamma0)),
            ModelSpec::LorentzianAmplitudeDamping { lambda, gamma0 } => {
                model_amplitude_damping_lorentzian(lambda, gamma0)
            }
            ModelSpec::CompletelyDepolarizing { dim } => Ok(completely_depolarizing(dim)),
            _ => unreachable!("Pauli models handled above"),
        }
    }

    /// Time-local generator, for models that have a regular one.
    pub fn generator(&self) -> Option<GeneratorSpec> {
        if let Some(rates) = self.pauli_rates() {
            return Some(pauli_generator(rates));
        }
        match *self {
            ModelSpec::Identity { dim } => Some(GeneratorSpec::new(dim)),
            ModelSpec::AmplitudeDamping { gamma0 } => Some(amplitude_damping_generator(gamma0)),
            _ => None,
        }
    }
}
