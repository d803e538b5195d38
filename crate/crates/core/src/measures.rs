//! Correlation quantifiers for two- and three-qubit states: Wootters
//! concurrence, negativity, the π-tangle, the Horodecki CHSH maximum, and
//! the maximal Svetlichny value obtained by see-saw ascent over measurement
//! frames (with a brute-force grid as an independent lower-bound oracle).

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qstate::{
    self, eigvalsh, hermitize, kron, observable, partial_transpose, paulis, sqrt_psd, trace_norm,
    CMatrix, DensityMatrix, C64,
};

/// 3×3 correlation tensor T_jk = tr(σ_j ⊗ σ_k ρ) of a two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTensor(pub [[f64; 3]; 3]);

fn pauli_pairs() -> &'static Vec<CMatrix> {
    static CACHE: OnceLock<Vec<CMatrix>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let p = paulis();
        let mut out = Vec::with_capacity(9);
        for pj in &p {
            for pk in &p {
                out.push(kron(pj, pk));
            }
        }
        out
    })
}

fn pauli_triples() -> &'static Vec<CMatrix> {
    static CACHE: OnceLock<Vec<CMatrix>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let p = paulis();
        let mut out = Vec::with_capacity(27);
        for pj in &p {
            for pk in &p {
                for pl in &p {
                    out.push(kron(&kron(pj, pk), pl));
                }
            }
        }
        out
    })
}

fn real_trace_product(a: &CMatrix, rho: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * rho[(j, i)];
        }
    }
    debug_assert!(acc.im.abs() < 1e-9);
    acc.re
}

fn expect_dim(rho: &DensityMatrix, dim: usize, what: &str) -> Result<()> {
    if rho.dim() != dim {
        return Err(Error::dimension(format!(
            "{what} expects a {dim}x{dim} density matrix, got {}x{}",
            rho.dim(),
            rho.dim()
        )));
    }
    Ok(())
}

/// Correlation tensor of a two-qubit state.
pub fn correlation_tensor(rho: &DensityMatrix) -> Result<CorrelationTensor> {
    expect_dim(rho, 4, "correlation_tensor")?;
    let mut t = [[0.0; 3]; 3];
    let pairs = pauli_pairs();
    for j in 0..3 {
        for k in 0..3 {
            t[j][k] = real_trace_product(&pairs[3 * j + k], rho.mat());
        }
    }
    Ok(CorrelationTensor(t))
}

/// Wootters concurrence of a two-qubit state, in [0, 1].
///
/// C = max(0, √μ₁ − √μ₂ − √μ₃ − √μ₄) where the μ_i are the decreasing
/// eigenvalues of ρ(σy⊗σy)ρ*(σy⊗σy), obtained here through the Hermitian
/// similarity √ρ ρ̃ √ρ.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    expect_dim(rho, 4, "concurrence")?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-6 {
        return Err(Error::invalid(format!(
            "concurrence input trace {} deviates from 1",
            tr.re
        )));
    }
    let yy = kron(&qstate::pauli_y(), &qstate::pauli_y());
    let conj = rho.mat().map(|z| z.conj());
    let flipped = &yy * conj * &yy;
    let root = sqrt_psd(rho.mat());
    let m = &root * flipped * &root;
    let mus = eigvalsh(&m);
    let lambdas: Vec<f64> = mus.iter().map(|v| v.max(0.0).sqrt()).collect();
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Negativity ‖ρ^{T_sub}‖₁ − 1 across the given bipartition.
///
/// Exact arithmetic makes this nonnegative; eigensolver noise down to
/// −1e−10 is reported as 0 (with a diagnostic), anything below is returned
/// raw so a genuine defect stays visible.
pub fn negativity(rho: &DensityMatrix, subsystem: usize, dims: &[usize]) -> Result<f64> {
    let pt = partial_transpose(rho.mat(), subsystem, dims)?;
    let value = trace_norm(&pt) - 1.0;
    if value < 0.0 && value >= -1e-10 {
        log::debug!("negativity {value:.3e} truncated to 0");
        return Ok(0.0);
    }
    Ok(value)
}

/// All ingredients of the π-tangle of a three-qubit state.
#[derive(Debug, Clone, Copy)]
pub struct PiTangleBreakdown {
    pub pi_a: f64,
    pub pi_b: f64,
    pub pi_c: f64,
    pub pi_abc: f64,
    /// One-vs-rest negativities N_{a(bc)}, N_{b(ac)}, N_{c(ab)}.
    pub n_one_rest: [f64; 3],
    /// Pairwise negativities (N_ab, N_ba, N_ac, N_ca, N_bc, N_cb).
    pub n_pair: [f64; 6],
}

/// π-tangle of a three-qubit state: π_x = N²_{x(yz)} − N²_{xy} − N²_{xz},
/// averaged over the three single-out choices. Components are reported raw
/// (a π_x may be slightly negative for some mixed states).
pub fn pi_tangle(rho: &DensityMatrix) -> Result<PiTangleBreakdown> {
    expect_dim(rho, 8, "pi_tangle")?;
    let dims = [2usize, 2, 2];
    let n_a = negativity(rho, 0, &dims)?;
    let n_b = negativity(rho, 1, &dims)?;
    let n_c = negativity(rho, 2, &dims)?;

    let rho_ab = rho.reduce(&[0, 1], &dims)?;
    let rho_ac = rho.reduce(&[0, 2], &dims)?;
    let rho_bc = rho.reduce(&[1, 2], &dims)?;
    let two = [2usize, 2];
    let n_ab = negativity(&rho_ab, 0, &two)?;
    let n_ba = negativity(&rho_ab, 1, &two)?;
    let n_ac = negativity(&rho_ac, 0, &two)?;
    let n_ca = negativity(&rho_ac, 1, &two)?;
    let n_bc = negativity(&rho_bc, 0, &two)?;
    let n_cb = negativity(&rho_bc, 1, &two)?;

    let pi_a = n_a * n_a - n_ab * n_ab - n_ac * n_ac;
    let pi_b = n_b * n_b - n_ba * n_ba - n_bc * n_bc;
    let pi_c = n_c * n_c - n_ca * n_ca - n_cb * n_cb;
    Ok(PiTangleBreakdown {
        pi_a,
        pi_b,
        pi_c,
        pi_abc: (pi_a + pi_b + pi_c) / 3.0,
        n_one_rest: [n_a, n_b, n_c],
        n_pair: [n_ab, n_ba, n_ac, n_ca, n_bc, n_cb],
    })
}

/// Horodecki closed form for the maximal CHSH value of a two-qubit state:
/// 2√(λ₁+λ₂) with λ₁, λ₂ the two largest eigenvalues of TᵀT. Values above
/// 2 certify Bell nonlocality; the quantum ceiling is 2√2.
pub fn chsh_max(rho: &DensityMatrix) -> Result<f64> {
    let t = correlation_tensor(rho)?.0;
    let tm = nalgebra::Matrix3::from_fn(|r, c| t[r][c]);
    let tt = tm.transpose() * tm;
    let mut vals: Vec<f64> = tt.symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(2.0 * (vals[0] + vals[1]).max(0.0).sqrt())
}

// ---------------------------------------------------------------------------
// Svetlichny machinery
// ---------------------------------------------------------------------------

/// Six measurement directions (a, a′, b, b′, c, c′), one primed/unprimed
/// pair per qubit; each a unit 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementFrame {
    pub a: [f64; 3],
    pub a_prime: [f64; 3],
    pub b: [f64; 3],
    pub b_prime: [f64; 3],
    pub c: [f64; 3],
    pub c_prime: [f64; 3],
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn normalize3(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = norm3(v);
    if n < 1e-300 {
        None
    } else {
        Some([v[0] / n, v[1] / n, v[2] / n])
    }
}

fn random_unit(rng: &mut impl Rng) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

impl MeasurementFrame {
    pub fn new(vectors: [[f64; 3]; 6]) -> Result<Self> {
        for v in &vectors {
            if (norm3(*v) - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "frame vector {v:?} is not unit length"
                )));
            }
        }
        Ok(Self::from_array(vectors))
    }

    fn from_array(v: [[f64; 3]; 6]) -> Self {
        MeasurementFrame {
            a: v[0],
            a_prime: v[1],
            b: v[2],
            b_prime: v[3],
            c: v[4],
            c_prime: v[5],
        }
    }

    fn as_array(&self) -> [[f64; 3]; 6] {
        [self.a, self.a_prime, self.b, self.b_prime, self.c, self.c_prime]
    }

    pub fn random(rng: &mut impl Rng) -> Self {
        Self::from_array([
            random_unit(rng),
            random_unit(rng),
            random_unit(rng),
            random_unit(rng),
            random_unit(rng),
            random_unit(rng),
        ])
    }
}

/// The eight (x, y, z, sign) terms of S = M + M′ with Mermin operators
/// M = ABC′ + AB′C + A′BC − A′B′C′ and M′ = A′B′C + A′BC′ + AB′C′ − ABC;
/// x, y, z index the unprimed (0) or primed (1) vector of each qubit.
/// The sign is −1 exactly when x = y = z.
const SVETLICHNY_TERMS: [(usize, usize, usize, f64); 8] = [
    (0, 0, 1, 1.0),
    (0, 1, 0, 1.0),
    (1, 0, 0, 1.0),
    (1, 1, 1, -1.0),
    (1, 1, 0, 1.0),
    (1, 0, 1, 1.0),
    (0, 1, 1, 1.0),
    (0, 0, 0, -1.0),
];

/// Dense 8×8 Svetlichny operator for a frame. Hermitian, operator norm at
/// most 4√2.
pub fn svetlichny_operator(frame: &MeasurementFrame) -> CMatrix {
    let a = [observable(frame.a).unwrap(), observable(frame.a_prime).unwrap()];
    let b = [observable(frame.b).unwrap(), observable(frame.b_prime).unwrap()];
    let c = [observable(frame.c).unwrap(), observable(frame.c_prime).unwrap()];
    let mut s = CMatrix::zeros(8, 8);
    for &(x, y, z, sign) in &SVETLICHNY_TERMS {
        s += kron(&kron(&a[x], &b[y]), &c[z]).scale(sign);
    }
    s
}

/// Three-qubit Pauli correlation tensor W_jkl = tr(σ_j⊗σ_k⊗σ_l ρ).
#[derive(Debug, Clone)]
struct PauliTensor([[[f64; 3]; 3]; 3]);

impl PauliTensor {
    fn from_state(rho: &DensityMatrix) -> Self {
        let trip = pauli_triples();
        let mut w = [[[0.0; 3]; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    w[j][k][l] = real_trace_product(&trip[9 * j + 3 * k + l], rho.mat());
                }
            }
        }
        PauliTensor(w)
    }

    /// Σ_kl W_jkl y_k z_l — gradient direction for the first slot.
    fn slot1(&self, y: [f64; 3], z: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for j in 0..3 {
            let mut acc = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    acc += self.0[j][k][l] * y[k] * z[l];
                }
            }
            out[j] = acc;
        }
        out
    }

    /// Σ_jl W_jkl x_j z_l — gradient direction for the second slot.
    fn slot2(&self, x: [f64; 3], z: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for k in 0..3 {
            let mut acc = 0.0;
            for j in 0..3 {
                for l in 0..3 {
                    acc += self.0[j][k][l] * x[j] * z[l];
                }
            }
            out[k] = acc;
        }
        out
    }

    /// Σ_jk W_jkl x_j y_k — gradient direction for the third slot.
    fn slot3(&self, x: [f64; 3], y: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for l in 0..3 {
            let mut acc = 0.0;
            for j in 0..3 {
                for k in 0..3 {
                    acc += self.0[j][k][l] * x[j] * y[k];
                }
            }
            out[l] = acc;
        }
        out
    }

    fn contract(&self, x: [f64; 3], y: [f64; 3], z: [f64; 3]) -> f64 {
        let g = self.slot3(x, y);
        g[0] * z[0] + g[1] * z[1] + g[2] * z[2]
    }

    fn expectation(&self, f: &MeasurementFrame) -> f64 {
        let v = f.as_array();
        SVETLICHNY_TERMS
            .iter()
            .map(|&(x, y, z, s)| s * self.contract(v[x], v[2 + y], v[4 + z]))
            .sum()
    }
}

fn add4(
    s1: f64,
    u1: [f64; 3],
    s2: f64,
    u2: [f64; 3],
    s3: f64,
    u3: [f64; 3],
    s4: f64,
    u4: [f64; 3],
) -> [f64; 3] {
    [
        s1 * u1[0] + s2 * u2[0] + s3 * u3[0] + s4 * u4[0],
        s1 * u1[1] + s2 * u2[1] + s3 * u3[1] + s4 * u4[1],
        s1 * u1[2] + s2 * u2[2] + s3 * u3[2] + s4 * u4[2],
    ]
}

/// Tuning for the Svetlichny see-saw search.
#[derive(Debug, Clone, Copy)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub tol: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        SeesawOptions {
            restarts: 32,
            tol: 1e-9,
            max_sweeps: 500,
            seed: 0x5eed_cafe,
        }
    }
}

/// Result of a see-saw run: the best value found, the frame achieving it,
/// and whether every restart converged within the sweep cap.
#[derive(Debug, Clone, Copy)]
pub struct SvetlichnyOutcome {
    pub value: f64,
    pub frame: MeasurementFrame,
    pub converged: bool,
}

fn seesaw_from(
    w: &PauliTensor,
    start: MeasurementFrame,
    tol: f64,
    max_sweeps: usize,
) -> (f64, MeasurementFrame, bool) {
    let mut v = start.as_array();
    let mut prev = f64::NEG_INFINITY;
    for _ in 0..max_sweeps {
        // Qubit 1 pair: gradients from the fixed (b, b′, c, c′).
        let u1 = w.slot1(v[2], v[4]);
        let u2 = w.slot1(v[2], v[5]);
        let u3 = w.slot1(v[3], v[4]);
        let u4 = w.slot1(v[3], v[5]);
        if let Some(n) = normalize3(add4(-1.0, u1, 1.0, u2, 1.0, u3, 1.0, u4)) {
            v[0] = n;
        }
        if let Some(n) = normalize3(add4(1.0, u1, 1.0, u2, 1.0, u3, -1.0, u4)) {
            v[1] = n;
        }
        // Qubit 2 pair.
        let u1 = w.slot2(v[0], v[4]);
        let u2 = w.slot2(v[0], v[5]);
        let u3 = w.slot2(v[1], v[4]);
        let u4 = w.slot2(v[1], v[5]);
        if let Some(n) = normalize3(add4(-1.0, u1, 1.0, u2, 1.0, u3, 1.0, u4)) {
            v[2] = n;
        }
        if let Some(n) = normalize3(add4(1.0, u1, 1.0, u2, 1.0, u3, -1.0, u4)) {
            v[3] = n;
        }
        // Qubit 3 pair.
        let u1 = w.slot3(v[0], v[2]);
        let u2 = w.slot3(v[0], v[3]);
        let u3 = w.slot3(v[1], v[2]);
        let u4 = w.slot3(v[1], v[3]);
        if let Some(n) = normalize3(add4(-1.0, u1, 1.0, u2, 1.0, u3, 1.0, u4)) {
            v[4] = n;
        }
        if let Some(n) = normalize3(add4(1.0, u1, 1.0, u2, 1.0, u3, -1.0, u4)) {
            v[5] = n;
        }

        let frame = MeasurementFrame::from_array(v);
        let value = w.expectation(&frame);
        if value - prev < tol {
            return (value, frame, true);
        }
        prev = value;
    }
    let frame = MeasurementFrame::from_array(v);
    (w.expectation(&frame), frame, false)
}

/// Maximal Svetlichny value of a three-qubit state by see-saw ascent over
/// measurement frames, best of `opts.restarts` random starts. Values above
/// 4 certify genuine tripartite nonlocality; the quantum ceiling is 4√2.
pub fn svetlichny_max(rho: &DensityMatrix, opts: &SeesawOptions) -> Result<SvetlichnyOutcome> {
    svetlichny_max_warm(rho, opts, None)
}

/// Like [`svetlichny_max`] but additionally seeds the search with a warm
/// start frame (used along trajectories, where the optimum moves
/// continuously between neighbouring samples).
pub fn svetlichny_max_warm(
    rho: &DensityMatrix,
    opts: &SeesawOptions,
    warm: Option<&MeasurementFrame>,
) -> Result<SvetlichnyOutcome> {
    expect_dim(rho, 8, "svetlichny_max")?;
    if opts.restarts == 0 {
        return Err(Error::invalid("see-saw needs at least one restart"));
    }
    let w = PauliTensor::from_state(rho);
    let starts: Vec<MeasurementFrame> = warm
        .into_iter()
        .copied()
        .chain((0..opts.restarts).map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                opts.seed ^ (r as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            );
            MeasurementFrame::random(&mut rng)
        }))
        .collect();
    let best = starts
        .into_par_iter()
        .enumerate()
        .map(|(idx, start)| {
            let (value, frame, converged) = seesaw_from(&w, start, opts.tol, opts.max_sweeps);
            (idx, value, frame, converged)
        })
        .reduce_with(|x, y| {
            // Deterministic regardless of scheduling: higher value wins,
            // ties broken by restart index.
            if (y.1, x.0) > (x.1, y.0) {
                y
            } else {
                x
            }
        })
        .expect("at least one restart");
    Ok(SvetlichnyOutcome {
        value: best.1,
        frame: best.2,
        converged: best.3,
    })
}

/// Brute-force lower bound on [`svetlichny_max`]: b, b′, c, c′ range over a
/// spherical product grid with `resolution` azimuthal samples and
/// `resolution/2 + 1` polar samples, while the qubit-1 pair is maximized in
/// closed form (the objective is linear in each of a, a′ once the other
/// vectors are fixed). Exponentially slower than the see-saw; used as the
/// independent test oracle.
pub fn svetlichny_grid(rho: &DensityMatrix, resolution: usize) -> Result<f64> {
    expect_dim(rho, 8, "svetlichny_grid")?;
    if resolution < 8 {
        return Err(Error::invalid("grid resolution must be at least 8"));
    }
    let w = PauliTensor::from_state(rho);
    let dirs = sphere_grid(resolution);
    let nd = dirs.len();

    // T(y, z) for every direction pair, flattened as [y_idx * nd + z_idx].
    let table: Vec<[f64; 3]> = (0..nd * nd)
        .into_par_iter()
        .map(|i| w.slot1(dirs[i / nd], dirs[i % nd]))
        .collect();

    let best = (0..nd * nd)
        .into_par_iter()
        .map(|cc| {
            let (ci, cpi) = (cc / nd, cc % nd);
            // Contiguous per-b columns for this (c, c′) pair.
            let uc: Vec<[f64; 3]> = (0..nd).map(|b| table[b * nd + ci]).collect();
            let ucp: Vec<[f64; 3]> = (0..nd).map(|b| table[b * nd + cpi]).collect();
            let mut local = f64::NEG_INFINITY;
            for b in 0..nd {
                let (u1, u2) = (uc[b], ucp[b]);
                for bp in 0..nd {
                    let (u3, u4) = (uc[bp], ucp[bp]);
                    let ga = add4(-1.0, u1, 1.0, u2, 1.0, u3, 1.0, u4);
                    let gap = add4(1.0, u1, 1.0, u2, 1.0, u3, -1.0, u4);
                    let val = norm3(ga) + norm3(gap);
                    if val > local {
                        local = val;
                    }
                }
            }
            local
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(best)
}

fn sphere_grid(resolution: usize) -> Vec<[f64; 3]> {
    let n_theta = resolution / 2 + 1;
    let n_phi = resolution;
    let mut dirs = Vec::with_capacity((n_theta - 2) * n_phi + 2);
    dirs.push([0.0, 0.0, 1.0]);
    for i in 1..n_theta - 1 {
        let theta = std::f64::consts::PI * i as f64 / (n_theta - 1) as f64;
        let (st, ct) = theta.sin_cos();
        for j in 0..n_phi {
            let phi = std::f64::consts::TAU * j as f64 / n_phi as f64;
            dirs.push([st * phi.cos(), st * phi.sin(), ct]);
        }
    }
    dirs.push([0.0, 0.0, -1.0]);
    dirs
}

/// Direct see-saw maximization of the CHSH expression over its four unit
/// vectors; independent cross-check for [`chsh_max`].
pub fn chsh_seesaw(rho: &DensityMatrix, opts: &SeesawOptions) -> Result<f64> {
    let t = correlation_tensor(rho)?.0;
    let apply = |v: [f64; 3]| -> [f64; 3] {
        [
            t[0][0] * v[0] + t[0][1] * v[1] + t[0][2] * v[2],
            t[1][0] * v[0] + t[1][1] * v[1] + t[1][2] * v[2],
            t[2][0] * v[0] + t[2][1] * v[1] + t[2][2] * v[2],
        ]
    };
    let apply_t = |v: [f64; 3]| -> [f64; 3] {
        [
            t[0][0] * v[0] + t[1][0] * v[1] + t[2][0] * v[2],
            t[0][1] * v[0] + t[1][1] * v[1] + t[2][1] * v[2],
            t[0][2] * v[0] + t[1][2] * v[1] + t[2][2] * v[2],
        ]
    };
    let value_of = |a: [f64; 3], ap: [f64; 3], b: [f64; 3], bp: [f64; 3]| {
        let tb = apply(b);
        let tbp = apply(bp);
        let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
        dot(a, tb) + dot(a, tbp) + dot(ap, tb) - dot(ap, tbp)
    };

    let mut best = f64::NEG_INFINITY;
    for r in 0..opts.restarts.max(1) {
        let mut rng =
            ChaCha8Rng::seed_from_u64(opts.seed ^ (r as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9));
        let mut b = random_unit(&mut rng);
        let mut bp = random_unit(&mut rng);
        let mut a = random_unit(&mut rng);
        let mut ap = random_unit(&mut rng);
        let mut prev = f64::NEG_INFINITY;
        for _ in 0..opts.max_sweeps {
            let tb = apply(b);
            let tbp = apply(bp);
            if let Some(n) = normalize3([tb[0] + tbp[0], tb[1] + tbp[1], tb[2] + tbp[2]]) {
                a = n;
            }
            if let Some(n) = normalize3([tb[0] - tbp[0], tb[1] - tbp[1], tb[2] - tbp[2]]) {
                ap = n;
            }
            let ta = apply_t(a);
            let tap = apply_t(ap);
            if let Some(n) = normalize3([ta[0] + tap[0], ta[1] + tap[1], ta[2] + tap[2]]) {
                b = n;
            }
            if let Some(n) = normalize3([ta[0] - tap[0], ta[1] - tap[1], ta[2] - tap[2]]) {
                bp = n;
            }
            let val = value_of(a, ap, b, bp);
            if val - prev < opts.tol {
                break;
            }
            prev = val;
        }
        best = best.max(value_of(a, ap, b, bp));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{build_state, identity, PureState, StateKind, ONE, ZERO};
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bell_phi_plus() -> DensityMatrix {
        PureState::new(vec![ONE, ZERO, ZERO, ONE]).unwrap().density()
    }

    fn w_state() -> DensityMatrix {
        build_state(StateKind::W).unwrap().density()
    }

    fn ghz_state() -> DensityMatrix {
        build_state(StateKind::Ghz).unwrap().density()
    }

    fn random_density(rng: &mut impl Rng, dim: usize) -> DensityMatrix {
        let g = CMatrix::from_fn(dim, dim, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        DensityMatrix::new(m.scale(1.0 / tr)).unwrap()
    }

    fn random_qubit_unitary(rng: &mut impl Rng) -> CMatrix {
        let n = random_unit(rng);
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let ns = observable(n).unwrap();
        identity(2).scale((theta / 2.0).cos()) + ns.scale((theta / 2.0).sin()) * c(0.0, 1.0)
    }

    #[test]
    fn concurrence_fixed_points() {
        assert_abs_diff_eq!(concurrence(&bell_phi_plus()).unwrap(), 1.0, epsilon = 1e-10);
        let gg = PureState::new(vec![ZERO, ZERO, ZERO, ONE]).unwrap().density();
        assert_abs_diff_eq!(concurrence(&gg).unwrap(), 0.0, epsilon = 1e-12);
        // two-qubit marginal of W: concurrence 2/3
        let rho_ab = w_state().reduce(&[0, 1], &[2, 2, 2]).unwrap();
        assert_abs_diff_eq!(concurrence(&rho_ab).unwrap(), 2.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn concurrence_rejects_bad_trace() {
        let m = identity(4).scale(0.4);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn negativity_fixed_points() {
        // GHZ across a|(bc): partial-transpose spectrum ±1/2 → negativity 1
        assert_abs_diff_eq!(
            negativity(&ghz_state(), 0, &[2, 2, 2]).unwrap(),
            1.0,
            epsilon = 1e-10
        );
        // W across a|(bc): 2√2/3
        assert_abs_diff_eq!(
            negativity(&w_state(), 0, &[2, 2, 2]).unwrap(),
            2.0 * 2f64.sqrt() / 3.0,
            epsilon = 1e-10
        );
        // product state: zero
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_density(&mut rng, 2);
        let bc = random_density(&mut rng, 4);
        let prod = DensityMatrix::new(kron(a.mat(), bc.mat())).unwrap();
        assert_abs_diff_eq!(negativity(&prod, 0, &[2, 4]).unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn pi_tangle_fixed_points() {
        let ghz = pi_tangle(&ghz_state()).unwrap();
        assert_abs_diff_eq!(ghz.pi_abc, 1.0, epsilon = 1e-8);
        for n in ghz.n_pair {
            assert_abs_diff_eq!(n, 0.0, epsilon = 1e-10);
        }

        // W: N_{a(bc)} = 2√2/3, N_pair = (√5−1)/3 → π_abc = 4(√5−1)/9
        let w = pi_tangle(&w_state()).unwrap();
        let expect = 4.0 * (5f64.sqrt() - 1.0) / 9.0;
        assert_abs_diff_eq!(w.pi_abc, expect, epsilon = 1e-8);
        assert_abs_diff_eq!(w.n_pair[0], (5f64.sqrt() - 1.0) / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            w.pi_abc,
            (w.pi_a + w.pi_b + w.pi_c) / 3.0,
            epsilon = 0.0
        );

        let mixed = DensityMatrix::maximally_mixed(8);
        let m = pi_tangle(&mixed).unwrap();
        assert_abs_diff_eq!(m.pi_abc, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn chsh_fixed_points() {
        assert_abs_diff_eq!(
            chsh_max(&bell_phi_plus()).unwrap(),
            2.0 * 2f64.sqrt(),
            epsilon = 1e-9
        );
        let mixed = DensityMatrix::maximally_mixed(4);
        assert_abs_diff_eq!(chsh_max(&mixed).unwrap(), 0.0, epsilon = 1e-12);
        // two-qubit marginal of W: T = diag(2/3, 2/3, −1/3) → 2√(8/9)
        let rho_ab = w_state().reduce(&[0, 1], &[2, 2, 2]).unwrap();
        let t = correlation_tensor(&rho_ab).unwrap().0;
        assert_abs_diff_eq!(t[0][0], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t[1][1], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t[2][2], -1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            chsh_max(&rho_ab).unwrap(),
            2.0 * (8.0 / 9.0f64).sqrt(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn chsh_matches_seesaw_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let opts = SeesawOptions {
            restarts: 16,
            ..Default::default()
        };
        for _ in 0..25 {
            let rho = random_density(&mut rng, 4);
            let closed = chsh_max(&rho).unwrap();
            let iterated = chsh_seesaw(&rho, &opts).unwrap();
            assert_abs_diff_eq!(closed, iterated, epsilon = 1e-6);
        }
    }

    #[test]
    fn svetlichny_operator_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let frame = MeasurementFrame::random(&mut rng);
        let s = svetlichny_operator(&frame);
        assert!(crate::qstate::hermiticity_defect(&s) < 1e-12);
        let top = eigvalsh(&s)
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        assert!(top <= 4.0 * 2f64.sqrt() + 1e-9);

        // expectation on the maximally mixed state vanishes
        let mixed = DensityMatrix::maximally_mixed(8);
        let e = real_trace_product(&s, mixed.mat());
        assert_abs_diff_eq!(e, 0.0, epsilon = 1e-12);

        // degenerate frame on a product state stays within the hybrid bound
        let v = random_unit(&mut rng);
        let degenerate = MeasurementFrame::from_array([v; 6]);
        let sd = svetlichny_operator(&degenerate);
        let prod = build_state(StateKind::Ggg).unwrap().density();
        assert!(real_trace_product(&sd, prod.mat()).abs() <= 4.0 + 1e-12);
    }

    #[test]
    fn svetlichny_ghz_reaches_quantum_maximum() {
        let out = svetlichny_max(&ghz_state(), &SeesawOptions::default()).unwrap();
        assert_abs_diff_eq!(out.value, 4.0 * 2f64.sqrt(), epsilon = 1e-6);
        assert!(out.converged);
        // value agrees with the dense-operator route
        let direct = real_trace_product(&svetlichny_operator(&out.frame), ghz_state().mat());
        assert_abs_diff_eq!(out.value, direct, epsilon = 1e-9);
    }

    #[test]
    fn svetlichny_grid_confirms_ghz() {
        let grid = svetlichny_grid(&ghz_state(), 24).unwrap();
        assert!(grid >= 5.64, "grid value {grid}");
        assert!(grid <= 4.0 * 2f64.sqrt() + 1e-9);
        let mixed = DensityMatrix::maximally_mixed(8);
        assert_abs_diff_eq!(svetlichny_grid(&mixed, 8).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn seesaw_dominates_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let opts = SeesawOptions::default();
        for _ in 0..5 {
            let rho = random_density(&mut rng, 8);
            let sees = svetlichny_max(&rho, &opts).unwrap().value;
            let grid = svetlichny_grid(&rho, 8).unwrap();
            assert!(sees >= grid - 1e-9, "see-saw {sees} below grid {grid}");
        }
    }

    #[test]
    fn w_state_violates_svetlichny() {
        let out = svetlichny_max(&w_state(), &SeesawOptions::default()).unwrap();
        // the W state shows genuine tripartite nonlocality at t = 0
        assert!(out.value > 4.0, "W Svetlichny value {}", out.value);
        assert!(out.value <= 4.0 * 2f64.sqrt() + 1e-9);
    }

    #[test]
    fn measures_are_local_unitary_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..5 {
            let rho = random_density(&mut rng, 8);
            let u = kron(
                &kron(&random_qubit_unitary(&mut rng), &random_qubit_unitary(&mut rng)),
                &random_qubit_unitary(&mut rng),
            );
            let rotated = DensityMatrix::new(&u * rho.mat() * u.adjoint()).unwrap();

            let p0 = pi_tangle(&rho).unwrap().pi_abc;
            let p1 = pi_tangle(&rotated).unwrap().pi_abc;
            assert_abs_diff_eq!(p0, p1, epsilon = 1e-6);

            let m0 = rho.reduce(&[0, 1], &[2, 2, 2]).unwrap();
            let m1 = rotated.reduce(&[0, 1], &[2, 2, 2]).unwrap();
            assert_abs_diff_eq!(
                concurrence(&m0).unwrap(),
                concurrence(&m1).unwrap(),
                epsilon = 1e-6
            );
            assert_abs_diff_eq!(
                chsh_max(&m0).unwrap(),
                chsh_max(&m1).unwrap(),
                epsilon = 1e-6
            );

            let opts = SeesawOptions {
                restarts: 24,
                ..Default::default()
            };
            let s0 = svetlichny_max(&rho, &opts).unwrap().value;
            let s1 = svetlichny_max(&rotated, &opts).unwrap().value;
            assert_abs_diff_eq!(s0, s1, epsilon = 1e-6);
        }
    }

    #[test]
    fn mixing_with_identity_never_increases_measures() {
        let states = [ghz_state(), w_state()];
        let opts = SeesawOptions {
            restarts: 16,
            ..Default::default()
        };
        for rho in &states {
            let mut prev_pi = f64::INFINITY;
            let mut prev_chsh = f64::INFINITY;
            let mut prev_svet = f64::INFINITY;
            let mut prev_conc = f64::INFINITY;
            for step in 0..=5 {
                let p = step as f64 / 5.0;
                let m = rho.mat().scale(1.0 - p) + identity(8).scale(p / 8.0);
                let mixed = DensityMatrix::new(m).unwrap();
                let pi = pi_tangle(&mixed).unwrap().pi_abc;
                let marg = mixed.reduce(&[0, 1], &[2, 2, 2]).unwrap();
                let ch = chsh_max(&marg).unwrap();
                let sv = svetlichny_max(&mixed, &opts).unwrap().value;
                let co = concurrence(&marg).unwrap();
                assert!(pi <= prev_pi + 1e-9);
                assert!(ch <= prev_chsh + 1e-9);
                assert!(sv <= prev_svet + 1e-6);
                assert!(co <= prev_conc + 1e-9);
                prev_pi = pi;
                prev_chsh = ch;
                prev_svet = sv;
                prev_conc = co;
            }
        }
    }

    #[test]
    fn pure_product_states_have_zero_pi_tangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let q = |rng: &mut ChaCha8Rng| {
                let v = vec![
                    c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                    c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                ];
                PureState::new(v).unwrap()
            };
            let (qa, qb, qc) = (q(&mut rng), q(&mut rng), q(&mut rng));
            let prod = kron(
                &kron(qa.density().mat(), qb.density().mat()),
                qc.density().mat(),
            );
            let rho = DensityMatrix::new(prod).unwrap();
            let pt = pi_tangle(&rho).unwrap();
            assert_abs_diff_eq!(pt.pi_abc, 0.0, epsilon = 1e-9);
        }
    }
}
