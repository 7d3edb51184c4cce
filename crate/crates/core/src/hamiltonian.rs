//! Dense assembly of the effective lattice Hamiltonian.
//!
//! ```text
//! H = − Σ_{μ=1..M} Σ_n K_μ w(n,μ) (e^{iφ_μ} â†_n â_{n+μ} + h.c.)
//!     − Σ_n n·Δ·n̂_n
//!     + H_int
//! ```
//!
//! with `w(n,μ)` the hopping weight of [`hopping_weight`] and `H_int` one of
//! the three [`InteractionMode`] representations. Photon number is conserved
//! term by term, so the operator acts within a single [`FockBasis`] sector.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Result, SynthDimError};
use crate::fock::FockBasis;
use crate::params::{InteractionMode, ModelParams, WeightMode};

/// Tolerance for the internal Hermiticity self-check (absolute).
const HERMITICITY_TOL: f64 = 1e-12;

/// A dense D×D Hermitian operator over a Fock sector.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    mat: Mat<Complex64>,
}

impl HermitianOperator {
    /// Wrap a matrix, verifying conjugate symmetry to 1e-12 (absolute).
    pub fn new(mat: Mat<Complex64>) -> Result<Self> {
        let max_dev = hermiticity_deviation(&mat);
        if max_dev > HERMITICITY_TOL {
            return Err(SynthDimError::HermiticityViolation { max_dev });
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.mat
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    /// Largest |entry|.
    pub fn norm_max(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.mat.ncols() {
            for i in 0..self.mat.nrows() {
                m = m.max(self.mat[(i, j)].norm());
            }
        }
        m
    }

    /// A copy with `shift[k]` added to diagonal entry `k` (e.g. onsite disorder).
    pub fn with_diagonal_shift(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim() {
            return Err(SynthDimError::BasisMismatch(format!(
                "diagonal shift length {} vs dimension {}",
                shift.len(),
                self.dim()
            )));
        }
        let mut mat = self.mat.clone();
        for (k, &s) in shift.iter().enumerate() {
            mat[(k, k)] += Complex64::new(s, 0.0);
        }
        Ok(Self { mat })
    }

    /// True when every entry is real to within `tol` (a real Hermitian matrix
    /// cannot break time-reversal symmetry).
    pub fn is_real(&self, tol: f64) -> bool {
        for j in 0..self.mat.ncols() {
            for i in 0..self.mat.nrows() {
                if self.mat[(i, j)].im.abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

pub(crate) fn hermiticity_deviation(mat: &Mat<Complex64>) -> f64 {
    let mut max_dev = 0.0f64;
    for j in 0..mat.ncols() {
        for i in 0..=j {
            let dev = (mat[(i, j)] - mat[(j, i)].conj()).norm();
            if dev > max_dev {
                max_dev = dev;
            }
        }
    }
    max_dev
}

/// Hopping prefactor between modes `n` and `n+mu` (0-based `n`).
///
/// Unit mode returns 1; frequency-weighted mode returns
/// 2√(ω_n ω_{n+μ})/(ω_n + ω_{n+μ}) ∈ (0, 1].
pub fn hopping_weight(n: usize, mu: usize, params: &ModelParams) -> Result<f64> {
    if n + mu >= params.n_modes {
        return Err(SynthDimError::ModeOutOfRange {
            mode: n + mu,
            n_modes: params.n_modes,
        });
    }
    match params.weight_mode {
        WeightMode::Unit => Ok(1.0),
        WeightMode::FrequencyWeighted => {
            let wa = params.omega_ratio(n);
            let wb = params.omega_ratio(n + mu);
            if wa <= 0.0 || wb <= 0.0 {
                return Err(SynthDimError::Domain(format!(
                    "non-positive mode frequency under frequency weighting (ω/Ω₀ = {wa}, {wb})"
                )));
            }
            Ok(2.0 * (wa * wb).sqrt() / (wa + wb))
        }
    }
}

/// sin(x)/x with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Four-wave-mixing amplitude of â†_n â†_m â_p â_q (0-based indices):
/// −(g/2)·e^{iθ}·sinc(θ) with θ = χ·(ñ² + m̃² − p̃² − q̃²), and 0 unless
/// n + m = p + q.
pub fn interaction_amplitude(
    n: usize,
    m: usize,
    p: usize,
    q: usize,
    params: &ModelParams,
) -> Complex64 {
    if n + m != p + q {
        return Complex64::new(0.0, 0.0);
    }
    let off = |i: usize| params.mode_offset(i);
    let mismatch = off(n).powi(2) + off(m).powi(2) - off(p).powi(2) - off(q).powi(2);
    let theta = params.gvd_phase_scale * mismatch;
    let kernel = Complex64::from_polar(sinc(theta), theta);
    -0.5 * params.interaction * kernel
}

/// Constant spectral shift between the `LocalLimit` and `LocalGauge`
/// interaction forms at photon number p: spec(local_limit) = spec(local_gauge)
/// − g·p(p−1). (The naive elimination of the cross term via N̂_p produces
/// −g·N_p² + g·N_p; only the combination is gauge-exact.)
pub fn diagonal_interaction_check(params: &ModelParams) -> f64 {
    let p = params.n_photons as f64;
    -params.interaction * p * (p - 1.0)
}

/// Assemble the dense Hamiltonian over `basis`.
pub fn build_hamiltonian(params: &ModelParams, basis: &FockBasis) -> Result<HermitianOperator> {
    params.validate()?;
    if basis.n_modes() != params.n_modes || basis.n_photons() != params.n_photons {
        return Err(SynthDimError::BasisMismatch(format!(
            "basis is (N={}, p={}), params are (N={}, p={})",
            basis.n_modes(),
            basis.n_photons(),
            params.n_modes,
            params.n_photons
        )));
    }
    let dim = basis.dim();
    let n_modes = params.n_modes;
    let mut mat = Mat::<Complex64>::zeros(dim, dim);

    // precomputed hopping amplitudes −K_μ w(n,μ) e^{iφ_μ} for each (n, μ)
    let mut hop_amp = vec![vec![Complex64::new(0.0, 0.0); params.hops.len()]; n_modes];
    for (mu_idx, hop) in params.hops.iter().enumerate() {
        let mu = mu_idx + 1;
        for n in 0..n_modes.saturating_sub(mu) {
            let w = hopping_weight(n, mu, params)?;
            hop_amp[n][mu_idx] =
                -hop.strength * w * Complex64::from_polar(1.0, hop.phase);
        }
    }

    for col in 0..dim {
        let occ = basis.state(col);

        // tilt: −Σ_n n·Δ·ν_n with 1-based n
        let mut diag = 0.0f64;
        for (i, &o) in occ.iter().enumerate() {
            diag -= (i + 1) as f64 * params.tilt * f64::from(o);
        }

        // interaction
        match params.interaction_mode {
            InteractionMode::LocalLimit => {
                // −(g/2) Σ ν(ν−1) − g Σ_{m≠n} ν_m ν_n  (ordered pairs)
                let p_tot = params.n_photons as f64;
                let sum_sq: f64 = occ.iter().map(|&o| f64::from(o).powi(2)).sum();
                let pair_on_site: f64 = occ.iter().map(|&o| f64::from(o) * (f64::from(o) - 1.0)).sum();
                diag += -0.5 * params.interaction * pair_on_site
                    - params.interaction * (p_tot * p_tot - sum_sq);
            }
            InteractionMode::LocalGauge => {
                let pair_on_site: f64 = occ.iter().map(|&o| f64::from(o) * (f64::from(o) - 1.0)).sum();
                diag += 0.5 * params.interaction * pair_on_site;
            }
            InteractionMode::FullFwm => {}
        }
        mat[(col, col)] += Complex64::new(diag, 0.0);

        // hopping: both directions of each link
        for (mu_idx, _) in params.hops.iter().enumerate() {
            let mu = mu_idx + 1;
            for n in 0..n_modes.saturating_sub(mu) {
                let amp = hop_amp[n][mu_idx];
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                // −K w e^{iφ} â†_n â_{n+μ}
                if occ[n + mu] > 0 {
                    let a = f64::from(occ[n + mu]).sqrt();
                    let c = f64::from(occ[n] + 1).sqrt();
                    let mut new_occ = occ.to_vec();
                    new_occ[n + mu] -= 1;
                    new_occ[n] += 1;
                    let row = basis.index_of(&new_occ).expect("photon number conserved");
                    mat[(row, col)] += amp * a * c;
                }
                // −K w e^{−iφ} â†_{n+μ} â_n
                if occ[n] > 0 {
                    let a = f64::from(occ[n]).sqrt();
                    let c = f64::from(occ[n + mu] + 1).sqrt();
                    let mut new_occ = occ.to_vec();
                    new_occ[n] -= 1;
                    new_occ[n + mu] += 1;
                    let row = basis.index_of(&new_occ).expect("photon number conserved");
                    mat[(row, col)] += amp.conj() * a * c;
                }
            }
        }

        // four-wave mixing over ordered quadruples with n+m = p+q
        if params.interaction_mode == InteractionMode::FullFwm && params.interaction != 0.0 {
            for p_mode in 0..n_modes {
                if occ[p_mode] == 0 {
                    continue;
                }
                for q_mode in 0..n_modes {
                    // â_q acts first (rightmost)
                    let occ_q = f64::from(occ[q_mode]);
                    if occ[q_mode] == 0 {
                        continue;
                    }
                    let occ_p_after = if p_mode == q_mode {
                        f64::from(occ[p_mode]) - 1.0
                    } else {
                        f64::from(occ[p_mode])
                    };
                    if occ_p_after <= 0.0 {
                        continue;
                    }
                    let ann_amp = occ_q.sqrt() * occ_p_after.sqrt();
                    let mut mid = occ.to_vec();
                    mid[q_mode] -= 1;
                    mid[p_mode] -= 1;

                    let sum = p_mode + q_mode;
                    let n_lo = sum.saturating_sub(n_modes - 1);
                    let n_hi = sum.min(n_modes - 1);
                    for n_mode in n_lo..=n_hi {
                        let m_mode = sum - n_mode;
                        let amp =
                            interaction_amplitude(n_mode, m_mode, p_mode, q_mode, params);
                        if amp.norm_sqr() == 0.0 {
                            continue;
                        }
                        // â†_m then â†_n
                        let c_m = f64::from(mid[m_mode] + 1).sqrt();
                        let mut fin = mid.clone();
                        fin[m_mode] += 1;
                        let c_n = f64::from(fin[n_mode] + 1).sqrt();
                        fin[n_mode] += 1;
                        let row = basis.index_of(&fin).expect("photon number conserved");
                        mat[(row, col)] += amp * ann_amp * c_m * c_n;
                    }
                }
            }
        }
    }

    HermitianOperator::new(mat)
}

/// Diagonal of the onsite potential Σ_n v_n n̂_n over `basis`.
pub fn onsite_potential_diagonal(basis: &FockBasis, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != basis.n_modes() {
        return Err(SynthDimError::BasisMismatch(format!(
            "potential has {} entries for {} modes",
            v.len(),
            basis.n_modes()
        )));
    }
    Ok((0..basis.dim())
        .map(|k| {
            basis
                .occupations_f64(k)
                .zip(v.iter())
                .map(|(o, &vn)| o * vn)
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_mode_single_photon() -> (ModelParams, FockBasis) {
        let mut params = ModelParams::new(2, 1);
        params.tilt = 0.5;
        let basis = FockBasis::new(2, 1).unwrap();
        (params, basis)
    }

    #[test]
    fn single_photon_two_modes_matches_hand_matrix() {
        // basis order: |1,0⟩, |0,1⟩; expect [[-0.5, -1], [-1, -1.0]]
        let (params, basis) = two_mode_single_photon();
        let h = build_hamiltonian(&params, &basis).unwrap();
        assert_abs_diff_eq!(h.entry(0, 0).re, -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(h.entry(1, 1).re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.entry(0, 1).re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.entry(1, 0).re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(h.entry(0, 1).im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn hopping_weight_unit_and_weighted() {
        let params = ModelParams::new(3, 1);
        assert_eq!(hopping_weight(0, 1, &params).unwrap(), 1.0);

        let mut params = params;
        params.weight_mode = WeightMode::FrequencyWeighted;
        params.center_frequency_ratio = 10.0;
        // ω₁ = 9Ω₀, ω₃ = 11Ω₀ -> 2√99/20
        let w = hopping_weight(0, 2, &params).unwrap();
        assert_abs_diff_eq!(w, 2.0 * 99.0f64.sqrt() / 20.0, epsilon = 1e-15);
        assert!(w < 1.0);
        // equal frequencies -> exactly 1 (arithmetic = geometric mean)
        let w_eq = 2.0 * (10.0f64 * 10.0).sqrt() / 20.0;
        assert_abs_diff_eq!(w_eq, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn fwm_amplitude_respects_frequency_conservation() {
        let mut params = ModelParams::new(3, 2);
        params.interaction = 1.0;
        params.gvd_phase_scale = 0.7;
        assert_eq!(
            interaction_amplitude(0, 1, 1, 1, &params),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn self_phase_modulation_amplitude_is_half_g() {
        let mut params = ModelParams::new(3, 2);
        params.interaction = 1.7;
        params.gvd_phase_scale = 123.0;
        let amp = interaction_amplitude(1, 1, 1, 1, &params);
        assert_abs_diff_eq!(amp.re, -0.85, epsilon = 1e-15);
        assert_abs_diff_eq!(amp.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn fwm_amplitude_matches_direct_evaluation() {
        // (n,m,p,q) = (1,3,2,2) 1-based with N=3: offsets (−1,+1,0,0), θ = 2χ
        let mut params = ModelParams::new(3, 2);
        params.interaction = 1.0;
        params.gvd_phase_scale = 0.7;
        let amp = interaction_amplitude(0, 2, 1, 1, &params);
        let theta = 1.4f64;
        let expected = -0.5 * Complex64::from_polar(theta.sin() / theta, theta);
        assert_abs_diff_eq!(amp.re, expected.re, epsilon = 1e-15);
        assert_abs_diff_eq!(amp.im, expected.im, epsilon = 1e-15);
        // spot value from independent evaluation: −(0.059823 + 0.346825 i)
        assert_abs_diff_eq!(amp.re, -0.059823, epsilon = 1e-6);
        assert_abs_diff_eq!(amp.im, -0.346825, epsilon = 1e-6);
    }

    #[test]
    fn local_gauge_diagonal_is_pair_energy() {
        // N=3, p=2, g=2: +2 on doubly occupied states, 0 on |1,1,·⟩-type states
        let mut params = ModelParams::new(3, 2);
        params.hops.clear();
        params.interaction = 2.0;
        params.interaction_mode = InteractionMode::LocalGauge;
        let basis = FockBasis::new(3, 2).unwrap();
        let h = build_hamiltonian(&params, &basis).unwrap();
        for k in 0..basis.dim() {
            let expected = if basis.state(k).contains(&2) { 2.0 } else { 0.0 };
            assert_abs_diff_eq!(h.entry(k, k).re, expected, epsilon = 1e-14);
            for j in 0..basis.dim() {
                if j != k {
                    assert_eq!(h.entry(j, k), Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn local_limit_shift_constant() {
        let mut params = ModelParams::new(4, 2);
        params.interaction = 1.0;
        assert_abs_diff_eq!(diagonal_interaction_check(&params), -2.0, epsilon = 1e-15);
        params.n_photons = 3;
        params.interaction = 1.5;
        assert_abs_diff_eq!(diagonal_interaction_check(&params), -9.0, epsilon = 1e-15);
        params.interaction = 0.0;
        assert_abs_diff_eq!(diagonal_interaction_check(&params), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn local_forms_differ_by_the_gauge_constant_entrywise() {
        let mut params = ModelParams::new(4, 3).with_hops3([1.0, 0.7, 0.2], [0.0, 0.4, 1.1]);
        params.interaction = 1.3;
        params.tilt = 0.6;
        let basis = FockBasis::new(4, 3).unwrap();
        params.interaction_mode = InteractionMode::LocalLimit;
        let h_limit = build_hamiltonian(&params, &basis).unwrap();
        params.interaction_mode = InteractionMode::LocalGauge;
        let h_gauge = build_hamiltonian(&params, &basis).unwrap();
        let shift = diagonal_interaction_check(&params);
        for k in 0..basis.dim() {
            for j in 0..basis.dim() {
                let expected = if j == k {
                    h_gauge.entry(j, k) + Complex64::new(shift, 0.0)
                } else {
                    h_gauge.entry(j, k)
                };
                let dev = (h_limit.entry(j, k) - expected).norm();
                assert!(dev < 1e-12, "entry ({j},{k}) deviates by {dev}");
            }
        }
    }

    #[test]
    fn degenerate_parameters_give_a_diagonal_matrix() {
        let mut params = ModelParams::new(3, 2);
        params.hops.clear();
        params.interaction = 0.0;
        let basis = FockBasis::new(3, 2).unwrap();
        let h = build_hamiltonian(&params, &basis).unwrap();
        for j in 0..basis.dim() {
            for i in 0..basis.dim() {
                if i != j {
                    assert_eq!(h.entry(i, j), Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn onsite_potential_diagonal_counts_occupations() {
        let basis = FockBasis::new(3, 2).unwrap();
        let v = vec![0.5, -1.0, 2.0];
        let diag = onsite_potential_diagonal(&basis, &v).unwrap();
        let k = basis.index_of(&[1, 0, 1]).unwrap();
        assert_abs_diff_eq!(diag[k], 2.5, epsilon = 1e-15);
        let k = basis.index_of(&[0, 2, 0]).unwrap();
        assert_abs_diff_eq!(diag[k], -2.0, epsilon = 1e-15);
    }

    #[test]
    fn is_real_detects_complex_phases() {
        let basis = FockBasis::new(4, 1).unwrap();
        let params = ModelParams::new(4, 1).with_hops3([1.0, 0.5, 0.0], [0.0, 0.0, 0.0]);
        let h = build_hamiltonian(&params, &basis).unwrap();
        assert!(h.is_real(1e-12));
        let params = ModelParams::new(4, 1).with_hops3([1.0, 0.5, 0.0], [0.0, 1.2, 0.0]);
        let h = build_hamiltonian(&params, &basis).unwrap();
        assert!(!h.is_real(1e-12));
    }
}
