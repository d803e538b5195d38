//! Internal helpers for the propagators: sparse real operators applied to
//! flat row-major complex matrices, and a fixed-step classic RK4 driver.
//!
//! Density matrices and auxiliary operators are stored as `Vec<C64>` of
//! length `dim * dim` in row-major order; all system operators appearing in
//! the equations of motion (σx couplings, a + a†, Hamiltonians built from
//! them) are real, so sparse entries carry `f64` values.

use crate::qstate::{CMatrix, C64};

/// Real sparse matrix in triplet form.
#[derive(Debug, Clone)]
pub(crate) struct SparseOp {
    pub dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseOp {
    pub fn from_dense(m: &CMatrix, tol: f64) -> Self {
        let dim = m.nrows();
        let mut entries = Vec::new();
        for r in 0..dim {
            for c in 0..dim {
                let v = m[(r, c)];
                debug_assert!(v.im.abs() <= tol, "operator must be real");
                if v.re.abs() > tol {
                    entries.push((r, c, v.re));
                }
            }
        }
        SparseOp { dim, entries }
    }

    pub fn transpose(&self) -> Self {
        SparseOp {
            dim: self.dim,
            entries: self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect(),
        }
    }

    /// out += scale * (M x), with x and out row-major dim×dim.
    pub fn acc_left(&self, x: &[C64], out: &mut [C64], scale: C64) {
        let d = self.dim;
        for &(i, k, v) in &self.entries {
            let f = scale * v;
            let src = &x[k * d..(k + 1) * d];
            let dst = &mut out[i * d..(i + 1) * d];
            for (o, s) in dst.iter_mut().zip(src) {
                *o += f * s;
            }
        }
    }

    /// out += scale * (x M), with x and out row-major dim×dim.
    pub fn acc_right(&self, x: &[C64], out: &mut [C64], scale: C64) {
        let d = self.dim;
        for &(k, j, v) in &self.entries {
            let f = scale * v;
            for r in 0..d {
                out[r * d + j] += f * x[r * d + k];
            }
        }
    }
}

/// One classic fourth-order Runge–Kutta step of size `dt` for y' = f(y).
/// `stage` and `acc` are scratch buffers of the same length as `y`.
pub(crate) fn rk4_step<F>(
    f: &mut F,
    y: &mut [C64],
    dt: f64,
    k: &mut [Vec<C64>; 4],
    stage: &mut [C64],
) where
    F: FnMut(&[C64], &mut [C64]),
{
    let n = y.len();
    f(y, &mut k[0]);
    for i in 0..n {
        stage[i] = y[i] + k[0][i] * (dt * 0.5);
    }
    f(stage, &mut k[1]);
    for i in 0..n {
        stage[i] = y[i] + k[1][i] * (dt * 0.5);
    }
    f(stage, &mut k[2]);
    for i in 0..n {
        stage[i] = y[i] + k[2][i] * dt;
    }
    f(stage, &mut k[3]);
    let w = dt / 6.0;
    for i in 0..n {
        y[i] += (k[0][i] + (k[1][i] + k[2][i]) * 2.0 + k[3][i]) * w;
    }
}

/// Splits a sampling interval into an integer number of RK4 steps no larger
/// than `dt_max`, so sample times are hit exactly.
pub(crate) fn steps_for(interval: f64, dt_max: f64) -> (usize, f64) {
    let n = (interval / dt_max).ceil().max(1.0) as usize;
    (n, interval / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{pauli_x, ONE, ZERO};
    use approx::assert_abs_diff_eq;

    #[test]
    fn sparse_products_match_dense() {
        let x = pauli_x();
        let op = SparseOp::from_dense(&x, 1e-14);
        // rho = |e⟩⟨e| (row-major 2x2)
        let rho = vec![ONE, ZERO, ZERO, ZERO];
        let mut out = vec![ZERO; 4];
        op.acc_left(&rho, &mut out, ONE);
        // σx |e⟩⟨e| = |g⟩⟨e|
        assert_eq!(out, vec![ZERO, ZERO, ONE, ZERO]);
        let mut out = vec![ZERO; 4];
        op.acc_right(&rho, &mut out, ONE);
        // |e⟩⟨e| σx = |e⟩⟨g|
        assert_eq!(out, vec![ZERO, ONE, ZERO, ZERO]);
    }

    #[test]
    fn rk4_exponential_decay() {
        // y' = -y, scalar; fourth-order accuracy
        let mut y = vec![ONE];
        let mut k = [vec![ZERO], vec![ZERO], vec![ZERO], vec![ZERO]];
        let mut stage = vec![ZERO];
        let mut f = |y: &[C64], out: &mut [C64]| out[0] = -y[0];
        let dt = 0.01;
        for _ in 0..100 {
            rk4_step(&mut f, &mut y, dt, &mut k, &mut stage);
        }
        assert_abs_diff_eq!(y[0].re, (-1.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn step_splitting_hits_interval() {
        let (n, dt) = steps_for(0.05, 0.005);
        assert_eq!(n, 10);
        assert_abs_diff_eq!(dt * n as f64, 0.05, epsilon = 1e-15);
        let (n, dt) = steps_for(0.05, 0.004);
        assert_eq!(n, 13);
        assert!(dt <= 0.004 + 1e-12);
    }
}
