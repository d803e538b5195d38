//! Non-RWA reduced dynamics of the qubit register via the hierarchical
//! equations of motion (HEOM), specialized to a common Lorentzian bath at
//! zero temperature.
//!
//! The bath correlation function λ e^{−γt} e^{−iω₀t} decomposes into two
//! exponentials with rates ν_k = γ ± iω₀, so each auxiliary density
//! operator (ADO) carries a two-component index (l₁, l₂); the hierarchy is
//! truncated by dropping every ADO with l₁ + l₂ > L and propagated with
//! classic fourth-order Runge–Kutta.

use crate::error::{Error, Result};
use crate::linop::{rk4_step, steps_for, SparseOp};
use crate::qstate::{
    self, hermitize, identity, kron, pauli_x, CMatrix, DensityMatrix, StateSeries, C64, ONE, ZERO,
};

/// Lorentzian bath parameters and per-qubit coupling weights.
///
/// The spectral density is J(ω) = (1/π) λγ / ((ω−ω₀)² + γ²); λ sets the
/// squared effective coupling (so C(0) = λ), γ is the half-width and 1/γ
/// the mode lifetime.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    pub lambda: f64,
    pub gamma: f64,
    pub omega0: f64,
    pub alphas: Vec<f64>,
}

impl BathSpec {
    pub fn new(lambda: f64, gamma: f64, omega0: f64, alphas: Vec<f64>) -> Result<Self> {
        if !(lambda >= 0.0) || !(gamma >= 0.0) {
            return Err(Error::invalid("bath requires lambda >= 0 and gamma >= 0"));
        }
        if !(omega0 > 0.0) {
            return Err(Error::invalid("bath requires omega0 > 0"));
        }
        if alphas.is_empty() || alphas.len() > 3 {
            return Err(Error::invalid(format!(
                "couplings for 1 to 3 qubits expected, got {}",
                alphas.len()
            )));
        }
        Ok(BathSpec {
            lambda,
            gamma,
            omega0,
            alphas,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.alphas.len()
    }

    /// Collective coupling α_T = (Σ α_i²)^{1/2}.
    pub fn alpha_t(&self) -> f64 {
        self.alphas.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Markovianity ratio R = α_T √λ / γ; infinite in the undamped limit.
    /// Diagnostic only: R ≫ 1 signals strongly non-Markovian dynamics.
    pub fn markov_ratio(&self) -> f64 {
        if self.gamma == 0.0 {
            f64::INFINITY
        } else {
            self.alpha_t() * self.lambda.sqrt() / self.gamma
        }
    }

    pub fn spectral_density(&self, omega: f64) -> f64 {
        let d = omega - self.omega0;
        self.lambda * self.gamma / (std::f64::consts::PI * (d * d + self.gamma * self.gamma))
    }

    /// Zero-temperature bath correlation C(t) = λ e^{−γt} e^{−iω₀t}, t ≥ 0.
    pub fn correlation(&self, t: f64) -> C64 {
        C64::from_polar(self.lambda * (-self.gamma * t).exp(), -self.omega0 * t)
    }
}

/// Exponential decomposition of the bath correlation function:
/// C^R(τ) = Σ_k w_k e^{−ν_k τ} and C^I(τ) = Σ_k s_k e^{−ν_k τ} / i, with
/// ν_k = γ + (−1)^k iω₀, w_k = λ/2 and s_k = (−1)^k λ/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationDecomposition {
    pub nu: [C64; 2],
    pub coef_real: [f64; 2],
    pub coef_imag: [f64; 2],
}

impl CorrelationDecomposition {
    pub fn c_real(&self, tau: f64) -> f64 {
        let mut acc = ZERO;
        for k in 0..2 {
            acc += self.coef_real[k] * (-self.nu[k] * tau).exp();
        }
        debug_assert!(acc.im.abs() < 1e-12);
        acc.re
    }

    pub fn c_imag(&self, tau: f64) -> f64 {
        let mut acc = ZERO;
        for k in 0..2 {
            acc += self.coef_imag[k] * (-self.nu[k] * tau).exp();
        }
        // the 1/i turns the anti-symmetric combination real
        let v = acc / C64::new(0.0, 1.0);
        debug_assert!(v.im.abs() < 1e-12);
        v.re
    }

    /// C(τ) = C^R(τ) + i C^I(τ).
    pub fn reconstruct(&self, tau: f64) -> C64 {
        C64::new(self.c_real(tau), self.c_imag(tau))
    }
}

pub fn correlation_decomposition(bath: &BathSpec) -> CorrelationDecomposition {
    let g = bath.gamma;
    let w0 = bath.omega0;
    CorrelationDecomposition {
        nu: [C64::new(g, -w0), C64::new(g, w0)],
        coef_real: [bath.lambda / 2.0, bath.lambda / 2.0],
        coef_imag: [-bath.lambda / 2.0, bath.lambda / 2.0],
    }
}

/// System Hamiltonian ω₀ Σ σ₊σ₋: diagonal, counting excited qubits.
pub fn build_system_hamiltonian(omega0: f64, n_qubits: usize) -> Result<CMatrix> {
    if !(1..=3).contains(&n_qubits) {
        return Err(Error::invalid(format!(
            "supported register sizes are 1..=3 qubits, got {n_qubits}"
        )));
    }
    let dim = 1 << n_qubits;
    let mut h = CMatrix::zeros(dim, dim);
    for idx in 0..dim {
        // bit 0 (in the label) means excited; idx counts g's as ones
        let excited = n_qubits - (idx as u32).count_ones() as usize;
        h[(idx, idx)] = C64::new(omega0 * excited as f64, 0.0);
    }
    Ok(h)
}

/// Collective coupling operator V = Σ α_i σ_x^{(i)}; real symmetric and
/// containing the counter-rotating products.
pub fn build_coupling_operator(alphas: &[f64]) -> Result<CMatrix> {
    if alphas.is_empty() || alphas.len() > 3 {
        return Err(Error::invalid(format!(
            "couplings for 1 to 3 qubits expected, got {}",
            alphas.len()
        )));
    }
    let n = alphas.len();
    let dim = 1 << n;
    let mut v = CMatrix::zeros(dim, dim);
    let sx = pauli_x();
    for (i, &alpha) in alphas.iter().enumerate() {
        let mut factors: Vec<CMatrix> = Vec::with_capacity(n);
        for k in 0..n {
            factors.push(if k == i { sx.clone() } else { identity(2) });
        }
        let mut term = factors[0].clone();
        for f in &factors[1..] {
            term = kron(&term, f);
        }
        v += term.scale(alpha);
    }
    Ok(v)
}

/// Two-component hierarchy index (exponent counts of the two correlation
/// decay modes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HierarchyIndex {
    pub l1: u32,
    pub l2: u32,
}

impl HierarchyIndex {
    pub fn level(&self) -> u32 {
        self.l1 + self.l2
    }
}

/// Flat layout of all indices with l₁ + l₂ ≤ L, with precomputed neighbor
/// slots (the RHS is evaluated millions of times; map lookups would
/// dominate otherwise).
#[derive(Debug, Clone)]
struct HierarchyTable {
    indices: Vec<HierarchyIndex>,
    up: Vec<[i32; 2]>,
    down: Vec<[i32; 2]>,
}

impl HierarchyTable {
    fn new(depth: u32) -> Self {
        let mut indices = Vec::new();
        for l1 in 0..=depth {
            for l2 in 0..=(depth - l1) {
                indices.push(HierarchyIndex { l1, l2 });
            }
        }
        let pos = |l1: i64, l2: i64| -> i32 {
            let depth = depth as i64;
            if l1 < 0 || l2 < 0 || l1 + l2 > depth {
                -1
            } else {
                (l1 * (depth + 1) - l1 * (l1 - 1) / 2 + l2) as i32
            }
        };
        let mut up = Vec::with_capacity(indices.len());
        let mut down = Vec::with_capacity(indices.len());
        for idx in &indices {
            let (l1, l2) = (idx.l1 as i64, idx.l2 as i64);
            up.push([pos(l1 + 1, l2), pos(l1, l2 + 1)]);
            down.push([pos(l1 - 1, l2), pos(l1, l2 - 1)]);
        }
        HierarchyTable { indices, up, down }
    }

    fn position(&self, idx: HierarchyIndex) -> Option<usize> {
        self.indices.iter().position(|&i| i == idx)
    }
}

/// The full family of auxiliary density operators at one instant.
/// ρ_(0,0) is the physical reduced density matrix; every other ADO starts
/// from zero.
#[derive(Debug, Clone)]
pub struct AdoStack {
    dim: usize,
    depth: u32,
    time: f64,
    table: HierarchyTable,
    data: Vec<C64>,
}

impl AdoStack {
    pub fn new(rho0: &DensityMatrix, depth: u32) -> Self {
        let dim = rho0.dim();
        let table = HierarchyTable::new(depth);
        let n = table.indices.len();
        let mut data = vec![ZERO; n * dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = rho0.mat()[(r, c)];
            }
        }
        AdoStack {
            dim,
            depth,
            time: 0.0,
            table,
            data,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn n_ados(&self) -> usize {
        self.table.indices.len()
    }

    pub fn indices(&self) -> impl Iterator<Item = HierarchyIndex> + '_ {
        self.table.indices.iter().copied()
    }

    fn block(&self, slot: usize) -> &[C64] {
        let dd = self.dim * self.dim;
        &self.data[slot * dd..(slot + 1) * dd]
    }

    fn matrix_at(&self, slot: usize) -> CMatrix {
        let b = self.block(slot);
        CMatrix::from_fn(self.dim, self.dim, |r, c| b[r * self.dim + c])
    }

    /// The physical reduced density matrix ρ_(0,0).
    pub fn physical(&self) -> CMatrix {
        self.matrix_at(0)
    }

    /// The ADO at a given hierarchy index, if retained by the truncation.
    pub fn ado(&self, idx: HierarchyIndex) -> Option<CMatrix> {
        self.table.position(idx).map(|slot| self.matrix_at(slot))
    }
}

/// Precomputed right-hand side of the hierarchy:
///
/// dρ_l/dt = (−i H_s^× − l·ν) ρ_l + Φ Σ_p ρ_{l+e_p} + Σ_p l_p Ψ_p ρ_{l−e_p}
///
/// with Φ X = −i(VX − XV), Ψ₁ X = iλ XV, Ψ₂ X = −iλ VX (the collapsed
/// forms of −(iλ/2)[V^× + (−1)^p V^∘]). Neighbors above the truncation are
/// zero.
#[derive(Debug, Clone)]
pub struct HeomGenerator {
    dim: usize,
    table: HierarchyTable,
    hs_diag: Vec<f64>,
    v_op: SparseOp,
    lambda: f64,
    /// Per-slot damping factor l·ν.
    decay: Vec<C64>,
}

impl HeomGenerator {
    pub fn new(bath: &BathSpec, depth: u32) -> Result<Self> {
        let n = bath.n_qubits();
        let hs = build_system_hamiltonian(bath.omega0, n)?;
        let v = build_coupling_operator(&bath.alphas)?;
        let decomp = correlation_decomposition(bath);
        let table = HierarchyTable::new(depth);
        let dim = 1 << n;
        let decay = table
            .indices
            .iter()
            .map(|idx| decomp.nu[0] * idx.l1 as f64 + decomp.nu[1] * idx.l2 as f64)
            .collect();
        Ok(HeomGenerator {
            dim,
            table,
            hs_diag: (0..dim).map(|k| hs[(k, k)].re).collect(),
            v_op: SparseOp::from_dense(&v, 1e-14),
            lambda: bath.lambda,
            decay,
        })
    }

    pub fn n_ados(&self) -> usize {
        self.table.indices.len()
    }

    pub(crate) fn rhs(&self, y: &[C64], out: &mut [C64]) {
        let d = self.dim;
        let dd = d * d;
        let im = C64::new(0.0, 1.0);
        for slot in 0..self.table.indices.len() {
            let idx = self.table.indices[slot];
            let y_block = &y[slot * dd..(slot + 1) * dd];
            // Free evolution and hierarchy damping, elementwise since H_s
            // is diagonal.
            for r in 0..d {
                for c in 0..d {
                    let k = r * d + c;
                    let f = -im * (self.hs_diag[r] - self.hs_diag[c]) - self.decay[slot];
                    out[slot * dd + k] = f * y_block[k];
                }
            }
            let out_block = &mut out[slot * dd..(slot + 1) * dd];
            for p in 0..2 {
                let u = self.table.up[slot][p];
                if u >= 0 {
                    let src = &y[u as usize * dd..(u as usize + 1) * dd];
                    self.v_op.acc_left(src, out_block, -im);
                    self.v_op.acc_right(src, out_block, im);
                }
                let dn = self.table.down[slot][p];
                if dn >= 0 {
                    let src = &y[dn as usize * dd..(dn as usize + 1) * dd];
                    if p == 0 {
                        let scale = im * (self.lambda * idx.l1 as f64);
                        self.v_op.acc_right(src, out_block, scale);
                    } else {
                        let scale = -im * (self.lambda * idx.l2 as f64);
                        self.v_op.acc_left(src, out_block, scale);
                    }
                }
            }
        }
    }

    /// Time derivative of a whole stack; the spec-level surface used by
    /// tests and benchmarks.
    pub fn rhs_stack(&self, stack: &AdoStack) -> AdoStack {
        let mut out = stack.clone();
        self.rhs(&stack.data, &mut out.data);
        out
    }
}

/// Knobs for a HEOM propagation.
#[derive(Debug, Clone, Copy)]
pub struct HeomConfig {
    /// Truncation depth L; every ADO with l₁ + l₂ > L is dropped.
    pub depth: u32,
    /// Upper bound on the RK4 step (each sampling interval is split into
    /// an integer number of equal steps no larger than this).
    pub dt: f64,
    pub t_final: f64,
    pub n_samples: usize,
    /// γ = 0 means the bath mode never decays and the hierarchy does not
    /// depopulate; such runs must opt in explicitly (and should raise L).
    pub allow_undamped: bool,
}

impl Default for HeomConfig {
    fn default() -> Self {
        HeomConfig {
            depth: 12,
            dt: 0.005,
            t_final: 50.0,
            n_samples: 1000,
            allow_undamped: false,
        }
    }
}

const BLOWUP_LIMIT: f64 = 1e6;

/// Propagate the hierarchy and return the physical reduced state on the
/// sample grid (n_samples points from 0 to t_final inclusive).
pub fn heom_propagate(
    rho0: &DensityMatrix,
    bath: &BathSpec,
    cfg: &HeomConfig,
) -> Result<StateSeries> {
    if cfg.depth < 2 {
        return Err(Error::invalid("hierarchy depth must be at least 2"));
    }
    if !(cfg.dt > 0.0) || !(cfg.t_final > 0.0) || cfg.n_samples < 2 {
        return Err(Error::invalid(
            "need dt > 0, t_final > 0 and at least 2 samples",
        ));
    }
    if rho0.dim() != 1 << bath.n_qubits() {
        return Err(Error::dimension(format!(
            "state dimension {} does not match {} bath couplings",
            rho0.dim(),
            bath.n_qubits()
        )));
    }
    if bath.gamma == 0.0 {
        if !cfg.allow_undamped {
            return Err(Error::invalid(
                "gamma = 0 (undamped single-mode limit) requires allow_undamped \
                 and a generous depth",
            ));
        }
        log::warn!(
            "HEOM with gamma = 0: hierarchy does not depopulate, depth {} must be large",
            cfg.depth
        );
    }

    let gen = HeomGenerator::new(bath, cfg.depth)?;
    let mut stack = AdoStack::new(rho0, cfg.depth);
    let n_total = stack.data.len();
    let mut k = [
        vec![ZERO; n_total],
        vec![ZERO; n_total],
        vec![ZERO; n_total],
        vec![ZERO; n_total],
    ];
    let mut scratch = vec![ZERO; n_total];

    let interval = cfg.t_final / (cfg.n_samples - 1) as f64;
    let (steps, dt) = steps_for(interval, cfg.dt);

    let mut times = Vec::with_capacity(cfg.n_samples);
    let mut states = Vec::with_capacity(cfg.n_samples);
    let mut record = |stack: &AdoStack| -> Result<()> {
        let rho = stack.physical();
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::solver(format!(
                "trace drifted to {tr} at t = {} (L = {}, dt = {dt})",
                stack.time, stack.depth
            )));
        }
        let peak = stack.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak > BLOWUP_LIMIT {
            return Err(Error::solver(format!(
                "hierarchy blow-up (entry {peak:.2e}) at t = {}: raise L from {} or \
                 shrink dt from {dt}",
                stack.time, stack.depth
            )));
        }
        times.push(stack.time);
        states.push(DensityMatrix::new(rho).map_err(|e| {
            Error::solver(format!("unphysical state at t = {}: {e}", stack.time))
        })?);
        Ok(())
    };

    record(&stack)?;
    let mut rhs = |y: &[C64], out: &mut [C64]| gen.rhs(y, out);
    for sample in 1..cfg.n_samples {
        for _ in 0..steps {
            rk4_step(&mut rhs, &mut stack.data, dt, &mut k, &mut scratch);
        }
        stack.time = interval * sample as f64;
        record(&stack)?;
    }
    Ok(StateSeries { times, states })
}

/// Truncation-convergence ladder: max-over-time trace distance between the
/// physical states of consecutive depths.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub depths: Vec<u32>,
    /// distances[i] compares depths[i] and depths[i+1].
    pub distances: Vec<f64>,
    pub tolerance: f64,
    pub converged: bool,
}

pub fn convergence_check(
    rho0: &DensityMatrix,
    bath: &BathSpec,
    cfg: &HeomConfig,
    depths: &[u32],
    tolerance: f64,
) -> Result<ConvergenceReport> {
    if depths.len() < 2 || depths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("depth ladder must be strictly ascending"));
    }
    let runs: Vec<StateSeries> = depths
        .iter()
        .map(|&depth| {
            heom_propagate(
                rho0,
                bath,
                &HeomConfig {
                    depth,
                    ..*cfg
                },
            )
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
    Ok(ConvergenceReport {
        depths: depths.to_vec(),
        distances,
        tolerance,
        converged,
    })
}
