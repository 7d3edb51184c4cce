//! Full eigendecomposition of dense Hermitian operators.
//!
//! Every spectral and dynamical quantity in this crate runs through
//! [`diagonalize`]; the reconstruction residual ‖H·V − V·diag(E)‖_max is
//! checked against 1e-9·‖H‖_max so a silent solver failure cannot propagate.

use faer::{Col, Mat};
use num_complex::Complex64;

use crate::error::{Result, SynthDimError};
use crate::hamiltonian::HermitianOperator;

/// Relative residual tolerance for accepting an eigendecomposition.
const RESIDUAL_REL_TOL: f64 = 1e-9;

/// Eigenvalues (ascending) and eigenvectors (columns, unitary) of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<Complex64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Mat<Complex64> {
        &self.eigenvectors
    }

    /// Spectral width E_max − E_min.
    pub fn width(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    /// Heisenberg time 2π / (mean level spacing).
    pub fn heisenberg_time(&self) -> f64 {
        let d = self.dim();
        if d < 2 || self.width() == 0.0 {
            return f64::INFINITY;
        }
        let mean_spacing = self.width() / (d as f64 - 1.0);
        2.0 * std::f64::consts::PI / mean_spacing
    }

    /// Apply e^{−iHt} to `psi` via the eigenbasis.
    pub fn propagate(&self, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        let d = self.dim();
        debug_assert_eq!(psi.len(), d);
        let col = Col::<Complex64>::from_fn(d, |i| psi[i]);
        let mut coeffs = self.eigenvectors.adjoint() * &col;
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            coeffs[j] *= Complex64::from_polar(1.0, -e * t);
        }
        let out = &self.eigenvectors * &coeffs;
        (0..d).map(|i| out[i]).collect()
    }

    /// Diagonal element ⟨k|e^{−iHt}|k⟩ = Σ_j |V_kj|² e^{−iE_j t}.
    pub fn diagonal_evolution_element(&self, k: usize, t: f64) -> Complex64 {
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..d {
            let w = self.eigenvectors[(k, j)].norm_sqr();
            acc += w * Complex64::from_polar(1.0, -self.eigenvalues[j] * t);
        }
        acc
    }

    /// Tr e^{−iHt} = Σ_j e^{−iE_j t}.
    pub fn evolution_trace(&self, t: f64) -> Complex64 {
        self.eigenvalues
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * t))
            .sum()
    }
}

/// Full eigendecomposition with residual verification.
pub fn diagonalize(h: &HermitianOperator) -> Result<Spectrum> {
    let d = h.dim();
    let evd = h
        .matrix()
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| SynthDimError::ConvergenceFailure {
            residual: f64::INFINITY,
            tolerance: RESIDUAL_REL_TOL,
        })?;

    let raw_vals = evd.S();
    let raw_vecs = evd.U();

    // sort ascending (faer returns ascending already; enforce it regardless)
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| raw_vals[a].re.total_cmp(&raw_vals[b].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&j| raw_vals[j].re).collect();
    let eigenvectors = Mat::<Complex64>::from_fn(d, d, |i, j| raw_vecs[(i, order[j])]);

    let spectrum = Spectrum {
        eigenvalues,
        eigenvectors,
    };

    let scale = h.norm_max().max(f64::MIN_POSITIVE);
    let residual = reconstruction_residual(h, &spectrum);
    let tolerance = RESIDUAL_REL_TOL * scale;
    if residual > tolerance {
        return Err(SynthDimError::ConvergenceFailure {
            residual,
            tolerance,
        });
    }
    Ok(spectrum)
}

/// ‖H·V − V·diag(E)‖_max.
fn reconstruction_residual(h: &HermitianOperator, s: &Spectrum) -> f64 {
    let hv = h.matrix() * s.eigenvectors();
    let d = s.dim();
    let mut max_res = 0.0f64;
    for j in 0..d {
        let e = s.eigenvalues[j];
        for i in 0..d {
            let r = (hv[(i, j)] - s.eigenvectors[(i, j)] * e).norm();
            if r > max_res {
                max_res = r;
            }
        }
    }
    max_res
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;

    fn wrap(mat: Mat<Complex64>) -> HermitianOperator {
        HermitianOperator::new(mat).unwrap()
    }

    #[test]
    fn two_level_hopping() {
        let mut m = Mat::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(-1.0, 0.0);
        m[(1, 0)] = Complex64::new(-1.0, 0.0);
        let s = diagonalize(&wrap(m)).unwrap();
        assert_abs_diff_eq!(s.eigenvalues()[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalues()[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_matrix_sorts_its_diagonal() {
        let vals = [3.0, -1.0, 2.0, 0.5];
        let m = Mat::<Complex64>::from_fn(4, 4, |i, j| {
            if i == j {
                Complex64::new(vals[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let s = diagonalize(&wrap(m)).unwrap();
        assert_eq!(s.eigenvalues(), &[-1.0, 0.5, 2.0, 3.0]);
        // eigenvectors are unit basis vectors up to permutation and phase
        for j in 0..4 {
            let mut mags: Vec<f64> = (0..4).map(|i| s.eigenvectors()[(i, j)].norm()).collect();
            mags.sort_by(f64::total_cmp);
            assert_abs_diff_eq!(mags[3], 1.0, epsilon = 1e-12);
            assert!(mags[2] < 1e-12);
        }
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = StdRng::seed_from_u64(11);
        let d = 6;
        let mut m = Mat::<Complex64>::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let re = rng.gen::<f64>() - 0.5;
                let im = if i == j { 0.0 } else { rng.gen::<f64>() - 0.5 };
                m[(i, j)] = Complex64::new(re, im);
                m[(j, i)] = Complex64::new(re, -im);
            }
        }
        let h = wrap(m);
        let s = diagonalize(&h).unwrap();
        assert!(reconstruction_residual(&h, &s) < 1e-9 * h.norm_max());
    }

    #[test]
    fn propagation_is_unitary_and_matches_trace() {
        let mut rng = StdRng::seed_from_u64(3);
        let d = 8;
        let mut m = Mat::<Complex64>::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let re = rng.gen::<f64>() - 0.5;
                let im = if i == j { 0.0 } else { rng.gen::<f64>() - 0.5 };
                m[(i, j)] = Complex64::new(re, im);
                m[(j, i)] = Complex64::new(re, -im);
            }
        }
        let s = diagonalize(&wrap(m)).unwrap();
        let psi: Vec<Complex64> = (0..d)
            .map(|i| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .map(|z| z / (d as f64).sqrt())
            .collect();
        let norm0: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let out = s.propagate(&psi, 2.7);
        let norm1: f64 = out.iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(norm0, norm1, epsilon = 1e-12);

        // Σ_k ⟨k|e^{−iHt}|k⟩ over the full basis equals Σ_j e^{−iE_j t}
        let sum_diag: Complex64 = (0..d).map(|k| s.diagonal_evolution_element(k, 2.7)).sum();
        let tr = s.evolution_trace(2.7);
        assert_abs_diff_eq!(sum_diag.re, tr.re, epsilon = 1e-10);
        assert_abs_diff_eq!(sum_diag.im, tr.im, epsilon = 1e-10);
    }
}
