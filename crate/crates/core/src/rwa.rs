//! Exact RWA dynamics of the single-excitation sector: closed-form
//! amplitudes, reduced density matrix assembly, and an independent
//! integrodifferential oracle for cross-validation.
//!
//! Everything here lives in the frame rotating at ω₀, where the memory
//! kernel is f(τ) = λ e^{−γτ} and the amplitude equations carry no free
//! phase. Populations and intra-sector coherences pick up only a global
//! phase, so every implemented measure is frame-independent.

use crate::error::{Error, Result};
use crate::heom::BathSpec;
use crate::linop::steps_for;
use crate::qstate::{CMatrix, DensityMatrix, C64, ZERO};

/// Collective coupling α_T = (Σ α_j²)^{1/2} and relative strengths
/// r_j = α_j / α_T (so Σ r_j² = 1). Rejects all-zero couplings.
pub fn relative_couplings(alphas: &[f64]) -> Result<(f64, Vec<f64>)> {
    let alpha_t = alphas.iter().map(|a| a * a).sum::<f64>().sqrt();
    if alpha_t == 0.0 {
        return Err(Error::invalid(
            "relative couplings are undefined for all-zero alphas",
        ));
    }
    Ok((alpha_t, alphas.iter().map(|a| a / alpha_t).collect()))
}

/// Rotating-frame memory kernel f(τ) = λ e^{−γτ}, the Fourier transform of
/// the Lorentzian spectral density taken across the full real line.
#[derive(Debug, Clone, Copy)]
pub struct MemoryKernel {
    pub lambda: f64,
    pub gamma: f64,
}

impl MemoryKernel {
    pub fn eval(&self, tau: f64) -> f64 {
        self.lambda * (-self.gamma * tau).exp()
    }
}

pub fn memory_kernel(bath: &BathSpec) -> MemoryKernel {
    MemoryKernel {
        lambda: bath.lambda,
        gamma: bath.gamma,
    }
}

/// Survival amplitude of the coupled collective state,
///
/// E(t) = e^{−γt/2} [cosh(Ωt/2) + (γ/Ω) sinh(Ωt/2)],  Ω = √(γ² − 4 α_T² λ).
///
/// For γ² < 4 α_T² λ the root is imaginary and the hyperbolic pair
/// continues analytically to the trigonometric one; the Ω → 0 point is
/// evaluated by its series limit e^{−γt/2}(1 + γt/2).
#[derive(Debug, Clone, Copy)]
pub struct DecayEnvelope {
    pub gamma: f64,
    pub lambda: f64,
    pub alpha_t: f64,
}

impl DecayEnvelope {
    pub fn new(bath: &BathSpec, alpha_t: f64) -> Self {
        DecayEnvelope {
            gamma: bath.gamma,
            lambda: bath.lambda,
            alpha_t,
        }
    }

    fn omega(&self) -> C64 {
        let disc = self.gamma * self.gamma - 4.0 * self.alpha_t * self.alpha_t * self.lambda;
        C64::new(disc, 0.0).sqrt()
    }

    pub fn eval(&self, t: f64) -> C64 {
        let damp = (-0.5 * self.gamma * t).exp();
        let omega = self.omega();
        if (omega * t).norm() < 1e-6 {
            // removable singularity of sinh(Ωt/2)/Ω
            return C64::new(damp * (1.0 + 0.5 * self.gamma * t), 0.0);
        }
        let half = omega * (0.5 * t);
        let value = half.cosh() + (self.gamma / omega) * half.sinh();
        value * damp
    }
}

/// Convenience wrapper matching the operation signature.
pub fn decay_envelope(t: f64, bath: &BathSpec, alpha_t: f64) -> C64 {
    DecayEnvelope {
        gamma: bath.gamma,
        lambda: bath.lambda,
        alpha_t,
    }
    .eval(t)
}

/// Single-excitation amplitudes (c₁, c₂, c₃); the bath holds the rest of
/// the weight, 1 − Σ|c_j|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeState {
    pub c: [C64; 3],
}

impl AmplitudeState {
    pub fn new(c: [C64; 3]) -> Self {
        AmplitudeState { c }
    }

    pub fn qubit_weight(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn bath_weight(&self) -> f64 {
        1.0 - self.qubit_weight()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bath_weight() < -1e-10 {
            return Err(Error::invalid(format!(
                "amplitudes exceed unit norm by {:.3e}",
                -self.bath_weight()
            )));
        }
        Ok(())
    }
}

/// Closed-form propagation of the amplitudes,
/// c_j(t) = c_j(0) − r_j [1 − E(t)] Σ_k r_k c_k(0).
pub fn amplitudes_closed(t: f64, c0: &AmplitudeState, bath: &BathSpec) -> Result<AmplitudeState> {
    let mut alphas = bath.alphas.clone();
    alphas.resize(3, 0.0);
    let (alpha_t, r) = relative_couplings(&alphas)?;
    let envelope = decay_envelope(t, bath, alpha_t);
    let collective: C64 = (0..3).map(|j| c0.c[j] * r[j]).sum();
    let shrink = (C64::new(1.0, 0.0) - envelope) * collective;
    let mut c = [ZERO; 3];
    for j in 0..3 {
        c[j] = c0.c[j] - shrink * r[j];
    }
    Ok(AmplitudeState { c })
}

/// Assemble the reduced three-qubit density matrix of the single-excitation
/// sector: the 3×3 block |c_j⟩⟨c_k| on {|egg⟩, |geg⟩, |gge⟩} plus the bath
/// weight on |ggg⟩⟨ggg|.
pub fn density_matrix_from_amplitudes(amps: &AmplitudeState) -> Result<DensityMatrix> {
    amps.validate()?;
    // |egg⟩, |geg⟩, |gge⟩ at zero-based indices 3, 5, 6
    const SLOTS: [usize; 3] = [3, 5, 6];
    let mut m = CMatrix::zeros(8, 8);
    for (j, &rj) in SLOTS.iter().enumerate() {
        for (k, &ck) in SLOTS.iter().enumerate() {
            m[(rj, ck)] = amps.c[j] * amps.c[k].conj();
        }
    }
    m[(7, 7)] = C64::new(amps.bath_weight().max(0.0), 0.0);
    DensityMatrix::new(m)
}

/// Independent oracle: integrate the amplitude integrodifferential
/// equations directly. The exponential kernel folds the memory integral
/// into one auxiliary variable z(t) = λ∫₀ᵗ e^{−γ(t−s)} B(s) ds with
/// B = Σ_k α_k c_k, giving the linear system ċ_j = −α_j z, ż = λB − γz
/// solved with RK4 on the sample grid.
pub fn amplitudes_oracle(
    c0: &AmplitudeState,
    bath: &BathSpec,
    t_grid: &[f64],
    dt: f64,
) -> Result<Vec<AmplitudeState>> {
    if t_grid.is_empty() || t_grid[0] != 0.0 {
        return Err(Error::invalid("oracle grid must start at t = 0"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("oracle grid must be strictly ascending"));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("oracle step must be positive"));
    }
    let mut alphas = bath.alphas.clone();
    alphas.resize(3, 0.0);
    let (lambda, gamma) = (bath.lambda, bath.gamma);

    let rhs = |y: &[C64; 4]| -> [C64; 4] {
        let b: C64 = (0..3).map(|j| y[j] * alphas[j]).sum();
        [
            -y[3] * alphas[0],
            -y[3] * alphas[1],
            -y[3] * alphas[2],
            b * lambda - y[3] * gamma,
        ]
    };

    let mut y = [c0.c[0], c0.c[1], c0.c[2], ZERO];
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(*c0);
    for w in t_grid.windows(2) {
        let (steps, h) = steps_for(w[1] - w[0], dt);
        for _ in 0..steps {
            let k1 = rhs(&y);
            let mut y2 = y;
            for i in 0..4 {
                y2[i] += k1[i] * (h * 0.5);
            }
            let k2 = rhs(&y2);
            let mut y3 = y;
            for i in 0..4 {
                y3[i] += k2[i] * (h * 0.5);
            }
            let k3 = rhs(&y3);
            let mut y4 = y;
            for i in 0..4 {
                y4[i] += k3[i] * h;
            }
            let k4 = rhs(&y4);
            for i in 0..4 {
                y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
            }
        }
        let state = AmplitudeState::new([y[0], y[1], y[2]]);
        state.validate().map_err(|e| {
            Error::solver(format!("oracle left the physical sector at t = {}: {e}", w[1]))
        })?;
        out.push(state);
    }
    Ok(out)
}
