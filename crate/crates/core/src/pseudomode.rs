//! Independent validation oracle for the non-RWA dynamics: at zero
//! temperature the Lorentzian bath is exactly one damped harmonic mode with
//! coupling g = √λ and decay κ = 2γ (the mode's vacuum two-time correlation
//! then reproduces C(t) = λ e^{−γt} e^{−iω₀t}). Qubits plus the truncated
//! mode evolve under a Lindblad master equation with the full
//! counter-rotating coupling; tracing out the mode gives reduced dynamics
//! to compare against the HEOM.

use crate::error::{Error, Result};
use crate::heom::{build_coupling_operator, build_system_hamiltonian, BathSpec};
use crate::linop::{rk4_step, steps_for, SparseOp};
use crate::qstate::{
    self, identity, kron, partial_trace, CMatrix, DensityMatrix, StateSeries, C64, ONE, ZERO,
};

/// One lossy mode standing in for the whole bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudomodeSpec {
    pub fock_dim: usize,
    /// Mode coupling g = √λ.
    pub g: f64,
    /// Mode decay κ = 2γ.
    pub kappa: f64,
    pub omega0: f64,
}

impl PseudomodeSpec {
    pub fn from_bath(bath: &BathSpec, fock_dim: usize) -> Result<Self> {
        if fock_dim < 2 {
            return Err(Error::invalid("mode truncation needs at least 2 levels"));
        }
        Ok(PseudomodeSpec {
            fock_dim,
            g: bath.lambda.sqrt(),
            kappa: 2.0 * bath.gamma,
            omega0: bath.omega0,
        })
    }

    /// Vacuum two-time correlation of the coupling operator g(a + a†):
    /// g² e^{−iω₀ t − κt/2}.
    pub fn correlation(&self, t: f64) -> C64 {
        C64::from_polar(
            self.g * self.g * (-0.5 * self.kappa * t).exp(),
            -self.omega0 * t,
        )
    }
}

/// Truncated annihilation operator on `fock_dim` levels.
pub fn annihilation(fock_dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(fock_dim, fock_dim);
    for n in 1..fock_dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Total Hamiltonian on qubits ⊗ mode:
/// H = H_s ⊗ I + ω₀ I ⊗ a†a + g V ⊗ (a + a†),
/// with the counter-rotating products σx ⊗ a and σx ⊗ a† retained.
pub fn build_total_hamiltonian(spec: &PseudomodeSpec, alphas: &[f64]) -> Result<CMatrix> {
    let hs = build_system_hamiltonian(spec.omega0, alphas.len())?;
    let v = build_coupling_operator(alphas)?;
    let f = spec.fock_dim;
    let a = annihilation(f);
    let x = &a + a.adjoint();
    let number = a.adjoint() * &a;
    let dim_q = hs.nrows();
    let mut h = kron(&hs, &identity(f));
    h += kron(&identity(dim_q), &number).scale(spec.omega0);
    h += kron(&v, &x).scale(spec.g);
    Ok(h)
}

/// Parity (−1)^{Σσ₊σ₋ + a†a}: diagonal ±1, conserved by the Hamiltonian
/// alone (the coupling changes total excitation number by 0 or ±2).
pub fn parity_operator(n_qubits: usize, fock_dim: usize) -> CMatrix {
    let dim_q = 1 << n_qubits;
    let dim = dim_q * fock_dim;
    let mut p = CMatrix::zeros(dim, dim);
    for s in 0..dim_q {
        let excited = n_qubits - (s as u32).count_ones() as usize;
        for n in 0..fock_dim {
            let sign = if (excited + n) % 2 == 0 { 1.0 } else { -1.0 };
            p[(s * fock_dim + n, s * fock_dim + n)] = C64::new(sign, 0.0);
        }
    }
    p
}

#[derive(Debug, Clone, Copy)]
pub struct PseudomodeConfig {
    pub dt: f64,
    pub t_final: f64,
    pub n_samples: usize,
}

impl Default for PseudomodeConfig {
    fn default() -> Self {
        PseudomodeConfig {
            dt: 0.005,
            t_final: 50.0,
            n_samples: 1000,
        }
    }
}

/// Output of a pseudomode run: reduced qubit states on the sample grid plus
/// the truncation diagnostic.
#[derive(Debug, Clone)]
pub struct PseudomodeRun {
    pub series: StateSeries,
    /// Largest population seen in the top Fock level.
    pub top_level_peak: f64,
    /// Set when the peak exceeds 1e-4: rerun with a larger `fock_dim`.
    pub leakage_flagged: bool,
}

struct Generator {
    dim: usize,
    fock_dim: usize,
    h: SparseOp,
    a: SparseOp,
    a_dag: SparseOp,
    kappa: f64,
    scratch: Vec<C64>,
}

impl Generator {
    fn new(spec: &PseudomodeSpec, alphas: &[f64]) -> Result<Self> {
        let h = build_total_hamiltonian(spec, alphas)?;
        let dim = h.nrows();
        let a_q = kron(&identity(1 << alphas.len()), &annihilation(spec.fock_dim));
        let a = SparseOp::from_dense(&a_q, 1e-14);
        Ok(Generator {
            dim,
            fock_dim: spec.fock_dim,
            h: SparseOp::from_dense(&h, 1e-14),
            a_dag: a.transpose(),
            a,
            kappa: spec.kappa,
            scratch: vec![ZERO; dim * dim],
        })
    }

    /// dρ/dt = −i[H, ρ] + κ(a ρ a† − ½{a†a, ρ}), with the number operator
    /// part applied elementwise (a†a is diagonal).
    fn rhs(&mut self, y: &[C64], out: &mut [C64]) {
        let d = self.dim;
        let im = C64::new(0.0, 1.0);
        let half_kappa = 0.5 * self.kappa;
        for r in 0..d {
            let nr = (r % self.fock_dim) as f64;
            for c in 0..d {
                let nc = (c % self.fock_dim) as f64;
                out[r * d + c] = y[r * d + c] * (-half_kappa * (nr + nc));
            }
        }
        self.h.acc_left(y, out, -im);
        self.h.acc_right(y, out, im);
        if self.kappa != 0.0 {
            self.scratch.fill(ZERO);
            self.a
                .acc_left(y, &mut self.scratch, C64::new(self.kappa, 0.0));
            self.a_dag.acc_right(&self.scratch, out, ONE);
        }
    }
}

/// Propagate a total (qubits ⊗ mode) state and return the reduced qubit
/// trajectory. See [`propagate_from_vacuum`] for the usual entry point.
pub fn lindblad_propagate(
    rho0_total: &DensityMatrix,
    spec: &PseudomodeSpec,
    alphas: &[f64],
    cfg: &PseudomodeConfig,
) -> Result<PseudomodeRun> {
    let dim_q = 1 << alphas.len();
    let dim = dim_q * spec.fock_dim;
    if rho0_total.dim() != dim {
        return Err(Error::dimension(format!(
            "total state must be {dim}-dimensional ({} qubits x {} levels), got {}",
            alphas.len(),
            spec.fock_dim,
            rho0_total.dim()
        )));
    }
    if !(cfg.dt > 0.0) || !(cfg.t_final > 0.0) || cfg.n_samples < 2 {
        return Err(Error::invalid(
            "need dt > 0, t_final > 0 and at least 2 samples",
        ));
    }
    let mut gen = Generator::new(spec, alphas)?;
    let mut y: Vec<C64> = Vec::with_capacity(dim * dim);
    for r in 0..dim {
        for c in 0..dim {
            y.push(rho0_total.mat()[(r, c)]);
        }
    }
    let mut k = [
        vec![ZERO; dim * dim],
        vec![ZERO; dim * dim],
        vec![ZERO; dim * dim],
        vec![ZERO; dim * dim],
    ];
    let mut stage = vec![ZERO; dim * dim];

    let interval = cfg.t_final / (cfg.n_samples - 1) as f64;
    let (steps, dt) = steps_for(interval, cfg.dt);

    let f = spec.fock_dim;
    let dims = [dim_q, f];
    let mut times = Vec::with_capacity(cfg.n_samples);
    let mut states = Vec::with_capacity(cfg.n_samples);
    let mut top_peak: f64 = 0.0;

    let mut record = |y: &[C64], t: f64, top_peak: &mut f64| -> Result<()> {
        let total = CMatrix::from_fn(dim, dim, |r, c| y[r * dim + c]);
        let tr = total.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::solver(format!(
                "pseudomode trace drifted to {tr} at t = {t}"
            )));
        }
        let mut top = 0.0;
        for s in 0..dim_q {
            top += total[(s * f + f - 1, s * f + f - 1)].re;
        }
        *top_peak = top_peak.max(top);
        let reduced = partial_trace(&total, &[0], &dims)?;
        times.push(t);
        states.push(
            DensityMatrix::new(reduced)
                .map_err(|e| Error::solver(format!("unphysical reduced state at t = {t}: {e}")))?,
        );
        Ok(())
    };

    record(&y, 0.0, &mut top_peak)?;
    for sample in 1..cfg.n_samples {
        for _ in 0..steps {
            rk4_step(&mut |y, out| gen.rhs(y, out), &mut y, dt, &mut k, &mut stage);
        }
        record(&y, interval * sample as f64, &mut top_peak)?;
    }

    let leakage_flagged = top_peak > 1e-4;
    if leakage_flagged {
        log::warn!(
            "pseudomode top Fock level reached population {top_peak:.2e}; \
             rerun with fock_dim > {f}"
        );
    }
    Ok(PseudomodeRun {
        series: StateSeries { times, states },
        top_level_peak: top_peak,
        leakage_flagged,
    })
}

/// Tensor a qubit-register state with the mode vacuum and propagate.
pub fn propagate_from_vacuum(
    rho0: &DensityMatrix,
    spec: &PseudomodeSpec,
    alphas: &[f64],
    cfg: &PseudomodeConfig,
) -> Result<PseudomodeRun> {
    let dim_q = 1 << alphas.len();
    if rho0.dim() != dim_q {
        return Err(Error::dimension(format!(
            "register state must be {dim_q}-dimensional, got {}",
            rho0.dim()
        )));
    }
    let mut vac = CMatrix::zeros(spec.fock_dim, spec.fock_dim);
    vac[(0, 0)] = ONE;
    let total = DensityMatrix::new(kron(rho0.mat(), &vac))?;
    lindblad_propagate(&total, spec, alphas, cfg)
}

/// Fock-truncation ladder: max-over-time trace distance of the reduced
/// qubit states between consecutive truncations.
#[derive(Debug, Clone)]
pub struct FockReport {
    pub dims: Vec<usize>,
    pub distances: Vec<f64>,
    pub tolerance: f64,
    pub converged: bool,
}

pub fn fock_convergence(
    rho0: &DensityMatrix,
    bath: &BathSpec,
    cfg: &PseudomodeConfig,
    dims: &[usize],
    tolerance: f64,
) -> Result<FockReport> {
    if dims.len() < 2 || dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("truncation ladder must be strictly ascending"));
    }
    let runs: Vec<StateSeries> = dims
        .iter()
        .map(|&fock_dim| {
            let spec = PseudomodeSpec::from_bath(bath, fock_dim)?;
            Ok(propagate_from_vacuum(rho0, &spec, &bath.alphas, cfg)?.series)
        })
        .collect::<Result<_>>()?;
    let distances: Vec<f64> = runs
        .windows(2)
        .map(|pair| {
            pair[0]
                .states
                .iter()
                .zip(&pair[1].states)
                .map(|(x, y)| qstate::trace_distance(x.mat(), y.mat()))
                .fold(0.0, f64::max)
        })
        .collect();
    let converged = *distances.last().unwrap() < tolerance;
    Ok(FockReport {
        dims: dims.to_vec(),
        distances,
        tolerance,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{build_state, PureState, StateKind};
    use approx::assert_abs_diff_eq;

    fn strong_bath() -> BathSpec {
        BathSpec::new(0.1, 0.05, 1.0, vec![1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn spec_reproduces_bath_correlation() {
        let bath = strong_bath();
        let spec = PseudomodeSpec::from_bath(&bath, 8).unwrap();
        assert_abs_diff_eq!(spec.g, bath.lambda.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(spec.kappa, 2.0 * bath.gamma, epsilon = 1e-15);
        for &t in &[0.0, 0.5, 3.0, 11.0] {
            let c_mode = spec.correlation(t);
            let c_bath = bath.correlation(t);
            assert_abs_diff_eq!(c_mode.re, c_bath.re, epsilon = 1e-14);
            assert_abs_diff_eq!(c_mode.im, c_bath.im, epsilon = 1e-14);
        }
    }

    #[test]
    fn hamiltonian_matrix_elements() {
        let bath = strong_bath();
        let spec = PseudomodeSpec::from_bath(&bath, 4).unwrap();
        let h = build_total_hamiltonian(&spec, &bath.alphas).unwrap();
        assert!(qstate::hermiticity_defect(&h) < 1e-12);

        // ⟨ggg,0|H|ggg,1⟩ = 0 (V flips a qubit), ⟨W,0|H|ggg,1⟩ = √3 g
        let f = spec.fock_dim;
        let ggg0 = 7 * f;
        let ggg1 = 7 * f + 1;
        assert_eq!(h[(ggg0, ggg1)], ZERO);
        let w = build_state(StateKind::W).unwrap();
        let mut overlap = ZERO;
        for (idx, amp) in w.amplitudes().iter().enumerate() {
            if amp.norm() > 0.0 {
                overlap += amp.conj() * h[(idx * f, ggg1)];
            }
        }
        assert_abs_diff_eq!(overlap.re, 3f64.sqrt() * spec.g, epsilon = 1e-12);

        // g = 0 decouples: H_s and a†a are both diagonal here
        let free = PseudomodeSpec {
            g: 0.0,
            ..spec
        };
        let h0 = build_total_hamiltonian(&free, &bath.alphas).unwrap();
        for r in 0..8 * f {
            for c in 0..8 * f {
                if r != c {
                    assert_eq!(h0[(r, c)], ZERO);
                }
            }
        }
    }

    #[test]
    fn hamiltonian_commutes_with_parity_only() {
        let bath = strong_bath();
        let spec = PseudomodeSpec::from_bath(&bath, 4).unwrap();
        let h = build_total_hamiltonian(&spec, &bath.alphas).unwrap();
        let p = parity_operator(3, 4);
        let comm = &h * &p - &p * &h;
        assert!(comm.iter().all(|z| z.norm() < 1e-12));
        // but not with the bare excitation number (counter-rotating terms)
        let mut number = CMatrix::zeros(32, 32);
        for s in 0..8usize {
            let excited = 3 - (s as u32).count_ones() as usize;
            for n in 0..4 {
                number[(s * 4 + n, s * 4 + n)] = C64::new((excited + n) as f64, 0.0);
            }
        }
        let comm = &h * &number - &number * &h;
        assert!(comm.iter().any(|z| z.norm() > 1e-6));
    }

    #[test]
    fn uncoupled_run_is_static_in_populations() {
        let bath = BathSpec::new(0.1, 0.05, 1.0, vec![0.0, 0.0, 0.0]).unwrap();
        let spec = PseudomodeSpec {
            g: 0.0,
            ..PseudomodeSpec::from_bath(&bath, 3).unwrap()
        };
        let w = build_state(StateKind::W).unwrap().density();
        let cfg = PseudomodeConfig {
            dt: 0.01,
            t_final: 4.0,
            n_samples: 9,
        };
        let run = propagate_from_vacuum(&w, &spec, &bath.alphas, &cfg).unwrap();
        assert!(!run.leakage_flagged);
        for state in &run.series.states {
            let d = (state.mat() - w.mat())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            // populations and intra-sector coherences of W are degenerate in
            // energy, so the reduced state is static
            assert!(d < 1e-10);
        }
    }

    #[test]
    fn parity_expectation_conserved_without_decay() {
        let bath = strong_bath();
        let spec = PseudomodeSpec {
            kappa: 0.0,
            ..PseudomodeSpec::from_bath(&bath, 6).unwrap()
        };
        let w = build_state(StateKind::W).unwrap().density();
        let mut vac = CMatrix::zeros(6, 6);
        vac[(0, 0)] = ONE;
        let total0 = DensityMatrix::new(kron(w.mat(), &vac)).unwrap();
        let p = parity_operator(3, 6);
        let expect0 = (&p * total0.mat()).trace().re;

        // evolve the total state; reuse the generator through a short run
        // and recompute parity from the unreduced state via a fresh
        // propagation of half the time twice
        let mut gen = Generator::new(&spec, &bath.alphas).unwrap();
        let dim = 48;
        let mut y: Vec<C64> = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                y.push(total0.mat()[(r, c)]);
            }
        }
        let mut k = [
            vec![ZERO; dim * dim],
            vec![ZERO; dim * dim],
            vec![ZERO; dim * dim],
            vec![ZERO; dim * dim],
        ];
        let mut stage = vec![ZERO; dim * dim];
        for _ in 0..500 {
            rk4_step(
                &mut |y: &[C64], out: &mut [C64]| gen.rhs(y, out),
                &mut y,
                0.01,
                &mut k,
                &mut stage,
            );
        }
        let total = CMatrix::from_fn(dim, dim, |r, c| y[r * dim + c]);
        let expect = (&p * &total).trace().re;
        assert_abs_diff_eq!(expect, expect0, epsilon = 1e-9);
    }

    #[test]
    fn large_kappa_gives_monotone_markovian_decay() {
        // κ = 50 g with one qubit: golden-rule regime, no revivals
        let spec = PseudomodeSpec {
            fock_dim: 4,
            g: 0.1,
            kappa: 5.0,
            omega0: 1.0,
        };
        let e = PureState::new(vec![ONE, ZERO]).unwrap().density();
        let cfg = PseudomodeConfig {
            dt: 0.002,
            t_final: 40.0,
            n_samples: 41,
        };
        let run = propagate_from_vacuum(&e, &spec, &[1.0], &cfg).unwrap();
        let pops: Vec<f64> = run.series.states.iter().map(|s| s.population(0)).collect();
        // counter-rotating dressing causes tiny 2ω₀ wiggles; no revivals
        // means no sample-to-sample gain beyond that scale
        for w in pops.windows(2) {
            assert!(w[1] <= w[0] + 2e-3, "revival in Markovian limit: {pops:?}");
        }
        assert!(pops[pops.len() - 1] < 0.8);
    }

    #[test]
    fn fock_ladder_converges_for_single_excitation() {
        let bath = strong_bath();
        let w = build_state(StateKind::W).unwrap().density();
        let cfg = PseudomodeConfig {
            dt: 0.01,
            t_final: 10.0,
            n_samples: 21,
        };
        let report = fock_convergence(&w, &bath, &cfg, &[2, 3, 4, 5], 1e-4).unwrap();
        assert!(
            report.converged,
            "distances {:?} not below {}",
            report.distances, report.tolerance
        );
        // g = 0 agrees exactly at every truncation
        let free = BathSpec::new(0.0, 0.05, 1.0, vec![1.0, 1.0, 1.0]).unwrap();
        let report = fock_convergence(&w, &free, &cfg, &[2, 3, 4], 1e-12).unwrap();
        for d in &report.distances {
            assert!(*d < 1e-10);
        }
    }
}
