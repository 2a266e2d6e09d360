use std::fmt;
use std::sync::Arc;

use crate::channel::QuantumChannel;
use crate::operator::ComplexMatrix;
use crate::{Error, Result, C64};

/// Real rate function `γ(t)` with its running integral `∫₀ᵗ γ`.
#[derive(Clone)]
pub enum Rate {
    Constant(f64),
    /// `γ(t) = -tanh t`, integral `-ln cosh t`.
    NegTanh,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Rate {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Rate::Custom(Arc::new(f))
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Rate::Constant(c) => *c,
            Rate::NegTanh => -t.tanh(),
            Rate::Custom(f) => f(t),
        }
    }

    pub fn integral(&self, t: f64) -> f64 {
        match self {
            Rate::Constant(c) => c * t,
            Rate::NegTanh => -ln_cosh(t),
            Rate::Custom(f) => simpson(f.as_ref(), t),
        }
    }
}

impl fmt::Debug for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Constant(c) => write!(f, "Constant({c})"),
            Rate::NegTanh => write!(f, "NegTanh"),
            Rate::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

fn ln_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Composite Simpson rule on `[0, t]` with panel width at most 1e-3.
fn simpson(f: &(dyn Fn(f64) -> f64 + Send + Sync), t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let mut n = ((t.abs() / 1e-3).ceil() as usize).max(64);
    if n % 2 == 1 {
        n += 1;
    }
    let h = t / n as f64;
    let mut acc = f(0.0) + f(t);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(k as f64 * h);
    }
    acc * h / 3.0
}

pub type HamiltonianFn = Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>;

#[derive(Clone, Debug)]
pub struct JumpTerm {
    pub op: ComplexMatrix,
    pub rate: Rate,
}

/// Time-local generator
/// `L_t(ρ) = -i[H(t), ρ] + Σ_k γ_k(t) (L_k ρ L_k† − ½{L_k† L_k, ρ})`.
#[derive(Clone)]
pub struct GeneratorSpec {
    dim: usize,
    jumps: Vec<JumpTerm>,
    hamiltonian: Option<HamiltonianFn>,
}

impl fmt::Debug for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorSpec")
            .field("dim", &self.dim)
            .field("jumps", &self.jumps)
            .field("hamiltonian", &self.hamiltonian.as_ref().map(|_| ".."))
            .finish()
    }
}

impl GeneratorSpec {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            jumps: Vec::new(),
            hamiltonian: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn with_jump(mut self, op: ComplexMatrix, rate: Rate) -> Result<Self> {
        if op.rows() != self.dim || op.cols() != self.dim {
            return Err(Error::Shape(format!(
                "jump operator is {}x{}, expected {d}x{d}",
                op.rows(),
                op.cols(),
                d = self.dim
            )));
        }
        self.jumps.push(JumpTerm { op, rate });
        Ok(self)
    }

    pub fn with_hamiltonian(mut self, h: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static) -> Self {
        self.hamiltonian = Some(Arc::new(h));
        self
    }

    pub fn with_constant_hamiltonian(self, h: ComplexMatrix) -> Self {
        self.with_hamiltonian(move |_| h.clone())
    }

    /// Superoperator of `L_t` in the column-stacking convention.
    pub fn superop_at(&self, t: f64) -> Result<ComplexMatrix> {
        let d = self.dim;
        let id = ComplexMatrix::identity(d);
        let mut s = ComplexMatrix::zeros(d * d, d * d);
        if let Some(hf) = &self.hamiltonian {
            let h = hf(t);
            if h.rows() != d || h.cols() != d {
                return Err(Error::Shape(format!("Hamiltonian at t={t} has wrong shape")));
            }
            let defect = h.hermiticity_defect();
            if defect > 1e-9 * h.max_abs().max(1.0) {
                return Err(Error::NotHermitian(defect));
            }
            // -i(I ⊗ H) + i(Hᵀ ⊗ I)
            s += &id.kron(&h).scale(C64::new(0.0, -1.0));
            s += &h.transpose().kron(&id).scale(C64::new(0.0, 1.0));
        }
        for term in &self.jumps {
            let g = term.rate.value(t);
            if !g.is_finite() {
                return Err(Error::IntegrationFailure(format!("rate is {g} at t={t}")));
            }
            if g == 0.0 {
                continue;
            }
            let l = &term.op;
            let ldl = &l.adjoint() * l;
            let mut d_k = l.conj().kron(l);
            d_k = &d_k - &id.kron(&ldl).scale_real(0.5);
            d_k = &d_k - &ldl.transpose().kron(&id).scale_real(0.5);
            s += &d_k.scale_real(g);
        }
        Ok(s)
    }
}

/// One classic fourth-order Runge-Kutta step of `dΛ/dt = L_t Λ`.
pub(crate) fn rk4_step(spec: &GeneratorSpec, lambda: &ComplexMatrix, t: f64, h: f64) -> Result<ComplexMatrix> {
    let l0 = spec.superop_at(t)?;
    let lm = spec.superop_at(t + 0.5 * h)?;
    let l1 = spec.superop_at(t + h)?;
    let k1 = &l0 * lambda;
    let k2 = &lm * &(lambda + &k1.scale_real(0.5 * h));
    let k3 = &lm * &(lambda + &k2.scale_real(0.5 * h));
    let k4 = &l1 * &(lambda + &k3.scale_real(h));
    let mut incr = k1;
    incr += &k2.scale_real(2.0);
    incr += &k3.scale_real(2.0);
    incr += &k4;
    Ok(lambda + &incr.scale_real(h / 6.0))
}

/// Integrates from the identity at `t = 0` for `n_steps` steps of size `h`
/// and returns the final map; used by tests and convergence studies.
pub fn integrate_to(spec: &GeneratorSpec, h: f64, n_steps: usize) -> Result<QuantumChannel> {
    let d = spec.dim();
    let mut lambda = ComplexMatrix::identity(d * d);
    for n in 0..n_steps {
        lambda = rk4_step(spec, &lambda, n as f64 * h, h)?;
    }
    Ok(QuantumChannel::from_superop_unchecked(d, lambda))
}
