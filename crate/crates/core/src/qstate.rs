//! Dense complex linear algebra and quantum-state utilities shared by all
//! solvers and measures: construction, tensor products, partial trace and
//! transpose, trace norm, Hermitian eigendecomposition, and the basis
//! convention used throughout.
//!
//! Basis convention: qubit 1 is the leftmost tensor factor and, per qubit,
//! `|e⟩` precedes `|g⟩`. For three qubits the computational basis is
//! therefore ordered
//! `|eee⟩, |eeg⟩, |ege⟩, |egg⟩, |gee⟩, |geg⟩, |gge⟩, |ggg⟩`
//! (zero-based indices 0..8, so `|egg⟩` sits at index 3 and `|ggg⟩` at 7).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Basis index of a product state given per-qubit excitation flags
/// (`true` = excited). Qubit 0 of the slice is the leftmost factor.
pub fn basis_index(excited: &[bool]) -> usize {
    excited
        .iter()
        .fold(0, |acc, &e| (acc << 1) | usize::from(!e))
}

/// Human-readable label (`"egg"`-style) of a computational basis index.
pub fn basis_label(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|bit| {
            if index >> bit & 1 == 0 {
                'e'
            } else {
                'g'
            }
        })
        .collect()
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// The three Pauli matrices in σ₁, σ₂, σ₃ order.
pub fn paulis() -> [CMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// Kronecker product; dimensions multiply.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        out = out.kronecker(f);
    }
    out
}

/// Spin observable n̂·σ⃗ for a (not necessarily normalized) direction `n`.
/// Hermitian with eigenvalues ±1; squares to the identity.
pub fn observable(n: [f64; 3]) -> Result<CMatrix> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if norm == 0.0 {
        return Err(Error::invalid("observable direction must be nonzero"));
    }
    let (x, y, z) = (n[0] / norm, n[1] / norm, n[2] / norm);
    Ok(CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(z, 0.0),
            C64::new(x, -y),
            C64::new(x, y),
            C64::new(-z, 0.0),
        ],
    ))
}

/// (M + M†)/2.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entrywise deviation from Hermiticity, max |M − M†|.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_dims(m: &CMatrix, dims: &[usize]) -> Result<()> {
    let total: usize = dims.iter().product();
    if m.nrows() != m.ncols() {
        return Err(Error::dimension(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    if total != m.nrows() {
        return Err(Error::dimension(format!(
            "factor dimensions {:?} give {}, matrix is {}x{}",
            dims,
            total,
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Decompose a flat index into per-factor indices (first factor most
/// significant, matching the tensor-product ordering).
fn unrank(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

fn rank(indices: &[usize], dims: &[usize]) -> usize {
    indices
        .iter()
        .zip(dims.iter())
        .fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Partial trace over every factor not listed in `keep`. The kept factors
/// stay in their original relative order.
pub fn partial_trace(m: &CMatrix, keep: &[usize], dims: &[usize]) -> Result<CMatrix> {
    check_dims(m, dims)?;
    if keep.is_empty() {
        return Err(Error::invalid("keep set must be nonempty"));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::dimension(format!(
            "keep set {:?} out of range for {} factors",
            keep,
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let keep_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let trace_dim: usize = traced.iter().map(|&k| dims[k]).product();
    let keep_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let trace_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();

    let mut out = CMatrix::zeros(keep_dim, keep_dim);
    let mut full_row = vec![0usize; dims.len()];
    let mut full_col = vec![0usize; dims.len()];
    let mut krow = vec![0usize; keep.len()];
    let mut kcol = vec![0usize; keep.len()];
    let mut tidx = vec![0usize; traced.len()];

    for r in 0..keep_dim {
        unrank(r, &keep_dims, &mut krow);
        for c in 0..keep_dim {
            unrank(c, &keep_dims, &mut kcol);
            let mut acc = ZERO;
            for t in 0..trace_dim {
                unrank(t, &trace_dims, &mut tidx);
                for (pos, &k) in keep.iter().enumerate() {
                    full_row[k] = krow[pos];
                    full_col[k] = kcol[pos];
                }
                for (pos, &k) in traced.iter().enumerate() {
                    full_row[k] = tidx[pos];
                    full_col[k] = tidx[pos];
                }
                acc += m[(rank(&full_row, dims), rank(&full_col, dims))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Transpose the indices of one factor, leaving the rest untouched.
/// Applying it twice returns the input exactly.
pub fn partial_transpose(m: &CMatrix, subsystem: usize, dims: &[usize]) -> Result<CMatrix> {
    check_dims(m, dims)?;
    if subsystem >= dims.len() {
        return Err(Error::dimension(format!(
            "subsystem {} out of range for {} factors",
            subsystem,
            dims.len()
        )));
    }
    let dim = m.nrows();
    let mut out = CMatrix::zeros(dim, dim);
    let mut row = vec![0usize; dims.len()];
    let mut col = vec![0usize; dims.len()];
    for r in 0..dim {
        unrank(r, dims, &mut row);
        for c in 0..dim {
            unrank(c, dims, &mut col);
            let (ri, ci) = (row[subsystem], col[subsystem]);
            row[subsystem] = ci;
            col[subsystem] = ri;
            out[(rank(&row, dims), rank(&col, dims))] = m[(r, c)];
            row[subsystem] = ri;
            col[subsystem] = ci;
        }
    }
    Ok(out)
}

/// Eigenvalues of a Hermitian matrix, descending. The input is hermitized
/// first, so anti-Hermitian noise at the 1e-12 scale is harmless.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let eig = hermitize(m).symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals
}

/// Hermitian eigendecomposition: (descending eigenvalues, matching columns).
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let dim = m.nrows();
    let mut vecs = CMatrix::zeros(dim, dim);
    for (j, &k) in order.iter().enumerate() {
        vecs.set_column(j, &eig.eigenvectors.column(k));
    }
    (vals, vecs)
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Small negative eigenvalues from floating-point noise are clamped to 0.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let dim = m.nrows();
    let mut d = CMatrix::zeros(dim, dim);
    for (k, &v) in vals.iter().enumerate() {
        d[(k, k)] = C64::new(v.max(0.0).sqrt(), 0.0);
    }
    &vecs * d * vecs.adjoint()
}

/// Trace norm ‖M‖₁ = Σ singular values. For Hermitian inputs this is the
/// sum of absolute eigenvalues, computed directly for accuracy.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        // Rectangular fall-through: singular values via M†M.
        let mtm = m.adjoint() * m;
        return eigvalsh(&mtm).iter().map(|v| v.max(0.0).sqrt()).sum();
    }
    if hermiticity_defect(m) < 1e-12 {
        eigvalsh(m).iter().map(|v| v.abs()).sum()
    } else {
        let mtm = m.adjoint() * m;
        eigvalsh(&mtm).iter().map(|v| v.max(0.0).sqrt()).sum()
    }
}

/// Trace distance ½‖ρ − σ‖₁.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * trace_norm(&(a - b))
}

/// Named pure states of the three-qubit register, or custom amplitudes in
/// the global basis convention.
#[derive(Debug, Clone, PartialEq)]
pub enum StateKind {
    W,
    Ghz,
    Ggg,
    Custom(Vec<C64>),
}

/// A normalized state vector.
#[derive(Debug, Clone)]
pub struct PureState {
    amps: CVector,
}

impl PureState {
    /// Normalizes the amplitudes; rejects the zero vector.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::invalid("state amplitudes must not all vanish"));
        }
        let v = CVector::from_iterator(amps.len(), amps.iter().map(|c| c / norm));
        Ok(PureState { amps: v })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            mat: &self.amps * self.amps.adjoint(),
        }
    }
}

/// Build one of the named register states (see module docs for the basis
/// ordering) or a custom normalized vector.
pub fn build_state(kind: StateKind) -> Result<PureState> {
    let inv_sqrt3 = C64::new(1.0 / 3f64.sqrt(), 0.0);
    let inv_sqrt2 = C64::new(1.0 / 2f64.sqrt(), 0.0);
    match kind {
        StateKind::W => {
            let mut amps = vec![ZERO; 8];
            amps[basis_index(&[true, false, false])] = inv_sqrt3; // |egg⟩
            amps[basis_index(&[false, true, false])] = inv_sqrt3; // |geg⟩
            amps[basis_index(&[false, false, true])] = inv_sqrt3; // |gge⟩
            PureState::new(amps)
        }
        StateKind::Ghz => {
            let mut amps = vec![ZERO; 8];
            amps[0] = inv_sqrt2;
            amps[7] = inv_sqrt2;
            PureState::new(amps)
        }
        StateKind::Ggg => {
            let mut amps = vec![ZERO; 8];
            amps[7] = ONE;
            PureState::new(amps)
        }
        StateKind::Custom(amps) => PureState::new(amps),
    }
}

/// A density matrix; square, Hermitian up to numerical noise, unit trace.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix after hermitizing it, rejecting inputs that are not
    /// square, not unit-trace within 1e-6, or badly non-Hermitian.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::dimension(format!(
                "density matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let defect = hermiticity_defect(&mat);
        if defect > 1e-6 {
            return Err(Error::invalid(format!(
                "density matrix is non-Hermitian (defect {defect:.3e})"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > 1e-6 || tr.im.abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "density matrix trace {tr} is not 1"
            )));
        }
        Ok(DensityMatrix {
            mat: hermitize(&mat),
        })
    }

    pub fn from_pure(state: &PureState) -> Self {
        state.density()
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            mat: identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Smallest eigenvalue; slightly negative values flag numerical
    /// positivity loss.
    pub fn min_eigenvalue(&self) -> f64 {
        eigvalsh(&self.mat).last().copied().unwrap_or(0.0)
    }

    /// Population of computational basis state `index`.
    pub fn population(&self, index: usize) -> f64 {
        self.mat[(index, index)].re
    }

    /// Reduced state on the kept factors.
    pub fn reduce(&self, keep: &[usize], dims: &[usize]) -> Result<DensityMatrix> {
        let m = partial_trace(&self.mat, keep, dims)?;
        Ok(DensityMatrix { mat: hermitize(&m) })
    }
}

/// A trajectory of density matrices on a strictly increasing time grid.
#[derive(Debug, Clone)]
pub struct StateSeries {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl StateSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}
