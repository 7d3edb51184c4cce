//! Interferometric reconstruction of the spectral form factor.
//!
//! Two photons at frequencies (ω_α, ω_β) enter a balanced beam splitter; the
//! reflected arm evolves inside the ring, the transmitted arm picks up a delay
//! phase e^{iδ} per photon, and the arms recombine on a second beam splitter
//! in front of two detectors. With the diagonal evolution amplitudes
//! z_pair = ⟨ω_αω_β|e^{−iHt}|ω_αω_β⟩ and z_α = ⟨ω_α|e^{−iH₁t}|ω_α⟩, the exact
//! two-photon channel probabilities for α ≠ β are
//!
//! ```text
//! P(both reflected)    = |z_pair − e^{2iδ} − e^{iδ}(z_α − z_β)|² / 16
//! P(both transmitted)  = |z_pair − e^{2iδ} + e^{iδ}(z_α − z_β)|² / 16
//! P(α at r, β at t)    = |z_pair + e^{2iδ} + e^{iδ}(z_α + z_β)|² / 16
//! P(β at r, α at t)    = |z_pair + e^{2iδ} − e^{iδ}(z_α + z_β)|² / 16
//! ```
//!
//! and everything that scattered to other frequencies is lumped into a fifth
//! outcome so each setting is a proper distribution. For α = β the input pair
//! bunches at the first splitter (Hong–Ou–Mandel), both photons share one arm,
//! and only e^{2iδ} enters: P_rr = P_tt = |z − e^{2iδ}|²/8 and
//! P_coincidence = |z + e^{2iδ}|²/4. Off-diagonal pairs use delay settings
//! {0, π/2}; diagonal pairs use {0, π/4} so that e^{2iδ} still spans both
//! quadratures. Single-photon runs through the same interferometer give
//! P_r − P_t = Re(z_α e^{−iδ}), which calibrates z_α.
//!
//! Inverting the overdetermined channel equations per pair and summing
//! Σ_{α≤β} z_pair rebuilds Tr e^{−iHt} and hence K(t) = |Tr|²/D², either from
//! exact probabilities (an identity up to round-off) or from finite-shot
//! multinomial counts.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Result, SynthDimError};
use crate::fock::FockBasis;
use crate::hamiltonian::build_hamiltonian;
use crate::params::ModelParams;
use crate::rng::substream_rng2;
use crate::spectrum::{diagonalize, Spectrum};

/// Delay settings for off-diagonal pairs (δ per transmitted photon).
pub const OFFDIAG_DELAYS: [f64; 2] = [0.0, std::f64::consts::FRAC_PI_2];
/// Delay settings for diagonal (α = β) pairs; both photons are delayed, so
/// π/4 puts e^{2iδ} on the imaginary axis.
pub const DIAG_DELAYS: [f64; 2] = [0.0, std::f64::consts::FRAC_PI_4];

/// Diagonal evolution amplitudes feeding the protocol at one time.
#[derive(Debug, Clone)]
pub struct ProtocolAmplitudes {
    pub n_modes: usize,
    /// z_α from the single-photon sector, indexed by mode.
    pub single: Vec<Complex64>,
    /// z_{αβ} for α ≤ β, row-major upper triangle.
    pub pair: Vec<Complex64>,
}

impl ProtocolAmplitudes {
    pub fn pair_index(n_modes: usize, alpha: usize, beta: usize) -> usize {
        debug_assert!(alpha <= beta && beta < n_modes);
        alpha * n_modes - alpha * (alpha + 1) / 2 + beta
    }

    pub fn pair_amplitude(&self, alpha: usize, beta: usize) -> Complex64 {
        let (a, b) = if alpha <= beta { (alpha, beta) } else { (beta, alpha) };
        self.pair[Self::pair_index(self.n_modes, a, b)]
    }

    /// Σ_{α≤β} z_{αβ} = Tr e^{−iHt} on the two-photon space.
    pub fn trace(&self) -> Complex64 {
        self.pair.iter().sum()
    }
}

/// Compute z_α and z_{αβ} at time `t` from the two sector spectra.
pub fn unitary_diagonal_elements(
    pair_spectrum: &Spectrum,
    pair_basis: &FockBasis,
    single_spectrum: &Spectrum,
    t: f64,
) -> Result<ProtocolAmplitudes> {
    if pair_basis.n_photons() != 2 {
        return Err(SynthDimError::WrongSector {
            expected: 2,
            actual: pair_basis.n_photons(),
        });
    }
    let n = pair_basis.n_modes();
    if single_spectrum.dim() != n {
        return Err(SynthDimError::BasisMismatch(
            "single-photon spectrum dimension must equal the mode count".into(),
        ));
    }
    let single: Vec<Complex64> = (0..n)
        .map(|alpha| single_spectrum.diagonal_evolution_element(alpha, t))
        .collect();
    let mut pair = Vec::with_capacity(n * (n + 1) / 2);
    for alpha in 0..n {
        for beta in alpha..n {
            let k = pair_basis.index_of_modes(&[alpha, beta])?;
            pair.push(pair_spectrum.diagonal_evolution_element(k, t));
        }
    }
    Ok(ProtocolAmplitudes {
        n_modes: n,
        single,
        pair,
    })
}

/// The four signed offsets u_i with P_i = |z_pair + u_i|²/16 (α ≠ β).
fn offdiag_offsets(z_a: Complex64, z_b: Complex64, delta: f64) -> [Complex64; 4] {
    let w2 = Complex64::from_polar(1.0, 2.0 * delta);
    let w1 = Complex64::from_polar(1.0, delta);
    let diff = w1 * (z_a - z_b);
    let sum = w1 * (z_a + z_b);
    [-w2 - diff, -w2 + diff, w2 + sum, w2 - sum]
}

/// Outcome probabilities {both-r, both-t, α-r/β-t, β-r/α-t, other} for α ≠ β.
pub fn bs_outcome_probabilities(
    z_pair: Complex64,
    z_a: Complex64,
    z_b: Complex64,
    delta: f64,
) -> [f64; 5] {
    let offsets = offdiag_offsets(z_a, z_b, delta);
    let mut probs = [0.0f64; 5];
    let mut tracked = 0.0;
    for (k, u) in offsets.iter().enumerate() {
        probs[k] = (z_pair + u).norm_sqr() / 16.0;
        tracked += probs[k];
    }
    probs[4] = (1.0 - tracked).max(0.0);
    probs
}

/// Outcome probabilities {both-r, both-t, coincidence, other} for α = β.
pub fn bs_outcome_probabilities_diagonal(z_pair: Complex64, delta: f64) -> [f64; 4] {
    let w2 = Complex64::from_polar(1.0, 2.0 * delta);
    let p_rr = (z_pair - w2).norm_sqr() / 8.0;
    let p_coin = (z_pair + w2).norm_sqr() / 4.0;
    let other = (1.0 - 2.0 * p_rr - p_coin).max(0.0);
    [p_rr, p_rr, p_coin, other]
}

/// Single-photon channel probabilities {reflected, transmitted, other}.
pub fn single_photon_probabilities(z: Complex64, delta: f64) -> [f64; 3] {
    let w = Complex64::from_polar(1.0, delta);
    let p_r = (z + w).norm_sqr() / 4.0;
    let p_t = (z - w).norm_sqr() / 4.0;
    [p_r, p_t, (1.0 - p_r - p_t).max(0.0)]
}

/// Recover z_α from the reflected/transmitted probabilities at δ = 0 and π/2:
/// Re z = P_r(0) − P_t(0), Im z = P_r(π/2) − P_t(π/2).
pub fn calibrate_single_photon(
    p_r_0: f64,
    p_t_0: f64,
    p_r_quad: f64,
    p_t_quad: f64,
    magnitude_tol: f64,
) -> Result<Complex64> {
    let z = Complex64::new(p_r_0 - p_t_0, p_r_quad - p_t_quad);
    if z.norm() > 1.0 + magnitude_tol {
        return Err(SynthDimError::CalibrationError { magnitude: z.norm() });
    }
    Ok(z)
}

/// Least-squares inversion of the off-diagonal channel equations
/// |z + u_i|² = 16·P_i over both delay settings. Unknowns (Re z, Im z, |z|²);
/// returns z and the rms equation residual.
pub fn invert_pair_offdiag(
    measurements: &[(f64, [f64; 4])],
    z_a: Complex64,
    z_b: Complex64,
    residual_tol: f64,
) -> Result<(Complex64, f64)> {
    let mut rows: Vec<([f64; 3], f64)> = Vec::with_capacity(4 * measurements.len());
    for &(delta, probs) in measurements {
        for (k, u) in offdiag_offsets(z_a, z_b, delta).iter().enumerate() {
            // s + 2(x·Re u + y·Im u) = 16 P − |u|²
            rows.push((
                [2.0 * u.re, 2.0 * u.im, 1.0],
                16.0 * probs[k] - u.norm_sqr(),
            ));
        }
    }
    solve_z(&rows, residual_tol)
}

/// Least-squares inversion for a diagonal (α = β) pair from
/// {both-r, both-t, coincidence} at each delay setting.
pub fn invert_pair_diag(
    measurements: &[(f64, [f64; 3])],
    residual_tol: f64,
) -> Result<(Complex64, f64)> {
    let mut rows: Vec<([f64; 3], f64)> = Vec::with_capacity(3 * measurements.len());
    for &(delta, probs) in measurements {
        let w = Complex64::from_polar(1.0, 2.0 * delta);
        // |z − w|² = 8 P_rr = 8 P_tt, |z + w|² = 4 P_coin
        rows.push(([-2.0 * w.re, -2.0 * w.im, 1.0], 8.0 * probs[0] - 1.0));
        rows.push(([-2.0 * w.re, -2.0 * w.im, 1.0], 8.0 * probs[1] - 1.0));
        rows.push(([2.0 * w.re, 2.0 * w.im, 1.0], 4.0 * probs[2] - 1.0));
    }
    solve_z(&rows, residual_tol)
}

/// Solve rows (a·[x y s] = b) in least squares; consistency-check |z|² against s.
fn solve_z(rows: &[([f64; 3], f64)], residual_tol: f64) -> Result<(Complex64, f64)> {
    // normal equations AᵀA u = Aᵀb
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for (a, b) in rows {
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += a[i] * a[j];
            }
            atb[i] += a[i] * b;
        }
    }
    let u = solve3(ata, atb).ok_or(SynthDimError::InversionError {
        residual: f64::INFINITY,
        tolerance: residual_tol,
    })?;
    let z = Complex64::new(u[0], u[1]);
    let s = u[2];

    let mut ss = 0.0;
    for (a, b) in rows {
        let lhs = a[0] * u[0] + a[1] * u[1] + a[2] * u[2];
        ss += (lhs - b).powi(2);
    }
    let residual = (ss / rows.len() as f64).sqrt();
    // |z|² must agree with the independently fitted s
    let consistency = (s - z.norm_sqr()).abs();
    if residual > residual_tol || consistency > residual_tol.max(1e-6) * 16.0 {
        return Err(SynthDimError::InversionError {
            residual: residual.max(consistency / 16.0),
            tolerance: residual_tol,
        });
    }
    Ok((z, residual))
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for col in (0..3).rev() {
        let mut acc = b[col];
        for k in (col + 1)..3 {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Detector counts for one experiment (one pair or one single, all settings).
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    /// Delay setting per row of `counts`.
    pub settings: Vec<f64>,
    /// Counts per setting and outcome channel; rows sum to `shots`.
    pub counts: Vec<Vec<u64>>,
    pub shots: u64,
    pub seed: u64,
}

impl MeasurementRecord {
    pub fn estimated_probabilities(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&c| c as f64 / self.shots as f64)
                    .collect()
            })
            .collect()
    }
}

fn sample_multinomial<R: Rng>(rng: &mut R, probs: &[f64], shots: u64) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut p_rest = 1.0f64;
    for (k, &p) in probs.iter().enumerate() {
        if k + 1 == probs.len() || p_rest <= 0.0 {
            counts[k] = remaining;
            break;
        }
        let q = (p.max(0.0) / p_rest).clamp(0.0, 1.0);
        let c = if remaining == 0 {
            0
        } else {
            Binomial::new(remaining, q).unwrap().sample(rng)
        };
        counts[k] = c;
        remaining -= c;
        p_rest -= p;
    }
    // distribute any residue to the last bin
    let assigned: u64 = counts.iter().sum();
    if assigned < shots {
        *counts.last_mut().unwrap() += shots - assigned;
    }
    counts
}

fn sample_record<R: Rng>(
    rng: &mut R,
    settings: &[f64],
    probs_per_setting: &[Vec<f64>],
    shots: u64,
    seed: u64,
) -> MeasurementRecord {
    let counts = probs_per_setting
        .iter()
        .map(|p| sample_multinomial(rng, p, shots))
        .collect();
    MeasurementRecord {
        settings: settings.to_vec(),
        counts,
        shots,
        seed,
    }
}

/// Reconstructed SFF curve with per-point bookkeeping.
#[derive(Debug, Clone)]
pub struct ProtocolSffCurve {
    pub times: Vec<f64>,
    pub k_exact: Vec<f64>,
    /// NaN where any pair failed calibration or inversion.
    pub k_reconstructed: Vec<f64>,
    /// Bootstrap standard error (0 for the exact-probability path).
    pub stderr: Vec<f64>,
    pub n_invalid_pairs: Vec<usize>,
    pub dim: usize,
    pub heisenberg_time: f64,
}

/// Controls for [`sample_and_reconstruct_sff`].
#[derive(Debug, Clone, Copy)]
pub struct ProtocolOptions {
    /// Shots per delay setting; `None` feeds exact probabilities through the
    /// same calibration/inversion pipeline.
    pub shots: Option<u64>,
    pub seed: u64,
    /// Bootstrap resamples for the per-point standard error (0 disables).
    pub n_bootstrap: usize,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self {
            shots: None,
            seed: 0,
            n_bootstrap: 50,
        }
    }
}

/// Emulate the full protocol over a time grid and rebuild K(t).
pub fn sample_and_reconstruct_sff(
    params: &ModelParams,
    times: &[f64],
    opts: &ProtocolOptions,
) -> Result<ProtocolSffCurve> {
    if params.n_photons != 2 {
        return Err(SynthDimError::WrongSector {
            expected: 2,
            actual: params.n_photons,
        });
    }
    if let Some(0) = opts.shots {
        return Err(SynthDimError::InvalidParams("shots must be ≥ 1".into()));
    }
    let pair_basis = FockBasis::new(params.n_modes, 2)?;
    let single_basis = FockBasis::new(params.n_modes, 1)?;
    let pair_spectrum = diagonalize(&build_hamiltonian(params, &pair_basis)?)?;
    let single_params = {
        let mut p = params.clone();
        p.n_photons = 1;
        p
    };
    let single_spectrum = diagonalize(&build_hamiltonian(&single_params, &single_basis)?)?;

    let d = pair_basis.dim();
    let t_h = pair_spectrum.heisenberg_time();

    let points: Vec<(f64, f64, f64, f64, usize)> = times
        .par_iter()
        .enumerate()
        .map(|(ti, &t)| {
            let amps =
                unitary_diagonal_elements(&pair_spectrum, &pair_basis, &single_spectrum, t)
                    .expect("bases built above are consistent");
            let k_exact = pair_spectrum.evolution_trace(t).norm_sqr() / (d as f64 * d as f64);
            let (k_rec, stderr, invalid) = reconstruct_point(&amps, d, ti as u64, opts);
            (t, k_exact, k_rec, stderr, invalid)
        })
        .collect();

    let mut curve = ProtocolSffCurve {
        times: Vec::new(),
        k_exact: Vec::new(),
        k_reconstructed: Vec::new(),
        stderr: Vec::new(),
        n_invalid_pairs: Vec::new(),
        dim: d,
        heisenberg_time: t_h,
    };
    for (t, ke, kr, se, inv) in points {
        curve.times.push(t);
        curve.k_exact.push(ke);
        curve.k_reconstructed.push(kr);
        curve.stderr.push(se);
        curve.n_invalid_pairs.push(inv);
    }
    Ok(curve)
}

/// One time point: sample (or pass through), calibrate, invert, sum.
fn reconstruct_point(
    amps: &ProtocolAmplitudes,
    dim: usize,
    time_index: u64,
    opts: &ProtocolOptions,
) -> (f64, f64, usize) {
    match opts.shots {
        None => {
            let (k, invalid) = reconstruct_from_probabilities(amps, dim, None, time_index, opts.seed, 0);
            (k, 0.0, invalid)
        }
        Some(shots) => {
            let (k, invalid) =
                reconstruct_from_probabilities(amps, dim, Some(shots), time_index, opts.seed, 0);
            let stderr = if opts.n_bootstrap >= 2 && k.is_finite() {
                let mut ks = Vec::with_capacity(opts.n_bootstrap);
                for b in 1..=opts.n_bootstrap {
                    let (kb, _) = reconstruct_from_probabilities(
                        amps,
                        dim,
                        Some(shots),
                        time_index,
                        opts.seed,
                        b as u64,
                    );
                    if kb.is_finite() {
                        ks.push(kb);
                    }
                }
                if ks.len() >= 2 {
                    let mean = ks.iter().sum::<f64>() / ks.len() as f64;
                    (ks.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                        / (ks.len() as f64 - 1.0))
                        .sqrt()
                } else {
                    f64::NAN
                }
            } else {
                f64::NAN
            };
            (k, stderr, invalid)
        }
    }
}

fn reconstruct_from_probabilities(
    amps: &ProtocolAmplitudes,
    dim: usize,
    shots: Option<u64>,
    time_index: u64,
    seed: u64,
    resample: u64,
) -> (f64, usize) {
    let n = amps.n_modes;
    let (cal_tol, res_tol) = match shots {
        None => (1e-9, 1e-8),
        Some(s) => {
            let noise = 1.0 / (s as f64).sqrt();
            (10.0 * noise + 1e-9, 40.0 * noise + 1e-8)
        }
    };

    // single-photon calibrations
    let mut singles = Vec::with_capacity(n);
    let mut n_invalid = 0usize;
    for alpha in 0..n {
        let z = amps.single[alpha];
        let probs: Vec<Vec<f64>> = OFFDIAG_DELAYS
            .iter()
            .map(|&d| single_photon_probabilities(z, d).to_vec())
            .collect();
        let est = match shots {
            None => probs,
            Some(s) => {
                let mut rng =
                    substream_rng2(seed ^ resample.wrapping_mul(0x9E37), time_index, alpha as u64);
                sample_record(&mut rng, &OFFDIAG_DELAYS, &probs, s, seed).estimated_probabilities()
            }
        };
        match calibrate_single_photon(est[0][0], est[0][1], est[1][0], est[1][1], cal_tol) {
            Ok(z_hat) => singles.push(z_hat),
            Err(_) => {
                singles.push(Complex64::new(f64::NAN, f64::NAN));
                n_invalid += 1;
            }
        }
    }

    // pair inversions
    let mut trace = Complex64::new(0.0, 0.0);
    let mut valid = n_invalid == 0;
    for alpha in 0..n {
        for beta in alpha..n {
            let z_pair = amps.pair_amplitude(alpha, beta);
            let pair_stream = (n + ProtocolAmplitudes::pair_index(n, alpha, beta)) as u64;
            let result = if alpha == beta {
                let probs: Vec<Vec<f64>> = DIAG_DELAYS
                    .iter()
                    .map(|&d| bs_outcome_probabilities_diagonal(z_pair, d).to_vec())
                    .collect();
                let est = match shots {
                    None => probs,
                    Some(s) => {
                        let mut rng = substream_rng2(
                            seed ^ resample.wrapping_mul(0x9E37),
                            time_index,
                            pair_stream,
                        );
                        sample_record(&mut rng, &DIAG_DELAYS, &probs, s, seed)
                            .estimated_probabilities()
                    }
                };
                let meas: Vec<(f64, [f64; 3])> = DIAG_DELAYS
                    .iter()
                    .zip(est.iter())
                    .map(|(&d, p)| (d, [p[0], p[1], p[2]]))
                    .collect();
                invert_pair_diag(&meas, res_tol)
            } else {
                let (z_a, z_b) = (singles[alpha], singles[beta]);
                if !z_a.re.is_finite() || !z_b.re.is_finite() {
                    Err(SynthDimError::CalibrationError { magnitude: f64::NAN })
                } else {
                    let probs: Vec<Vec<f64>> = OFFDIAG_DELAYS
                        .iter()
                        .map(|&d| {
                            bs_outcome_probabilities(z_pair, amps.single[alpha], amps.single[beta], d)
                                .to_vec()
                        })
                        .collect();
                    let est = match shots {
                        None => probs,
                        Some(s) => {
                            let mut rng = substream_rng2(
                                seed ^ resample.wrapping_mul(0x9E37),
                                time_index,
                                pair_stream,
                            );
                            sample_record(&mut rng, &OFFDIAG_DELAYS, &probs, s, seed)
                                .estimated_probabilities()
                        }
                    };
                    let meas: Vec<(f64, [f64; 4])> = OFFDIAG_DELAYS
                        .iter()
                        .zip(est.iter())
                        .map(|(&d, p)| (d, [p[0], p[1], p[2], p[3]]))
                        .collect();
                    invert_pair_offdiag(&meas, z_a, z_b, res_tol)
                }
            };
            match result {
                Ok((z, _)) => trace += z,
                Err(_) => {
                    n_invalid += 1;
                    valid = false;
                }
            }
        }
    }

    let k = if valid {
        trace.norm_sqr() / (dim as f64 * dim as f64)
    } else {
        f64::NAN
    };
    (k, n_invalid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;

    fn chaotic_params(n: usize) -> ModelParams {
        let mut p = ModelParams::new(n, 2).with_hops3([1.0, 1.25, 1.25], [0.0, 0.3, 0.3]);
        p.interaction = 1.5;
        p.gvd_phase_scale = 5.0;
        p.tilt = 0.2;
        p
    }

    #[test]
    fn identity_evolution_routes_photons_deterministically() {
        // balanced interferometer: α exits reflected, β exits transmitted
        let one = Complex64::new(1.0, 0.0);
        let p = bs_outcome_probabilities(one, one, one, 0.0);
        assert_abs_diff_eq!(p[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[2], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[3], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[4], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn sign_flipped_pair_amplitude_reaches_both_reflected() {
        let one = Complex64::new(1.0, 0.0);
        let p = bs_outcome_probabilities(-one, one, one, 0.0);
        // |−1 − 1 − 1 + 1|²/16 = 1/4 in the both-reflected channel
        assert_abs_diff_eq!(p[0], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn probabilities_sum_to_one_for_unitary_amplitudes() {
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..200 {
            let z_a = Complex64::from_polar(rng.gen::<f64>(), rng.gen::<f64>() * 6.283);
            let z_b = Complex64::from_polar(rng.gen::<f64>(), rng.gen::<f64>() * 6.283);
            let z = Complex64::from_polar(rng.gen::<f64>(), rng.gen::<f64>() * 6.283);
            let delta = rng.gen::<f64>() * 3.14;
            let p = bs_outcome_probabilities(z, z_a, z_b, delta);
            let total: f64 = p.iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
            assert!(p.iter().all(|&x| x >= 0.0));
            // tracked channels: (|z|² + |z_a|² + |z_b|² + 1)/4
            let tracked = (z.norm_sqr() + z_a.norm_sqr() + z_b.norm_sqr() + 1.0) / 4.0;
            assert_abs_diff_eq!(1.0 - p[4], tracked, epsilon = 1e-12);
        }
    }

    #[test]
    fn hong_ou_mandel_channels() {
        let one = Complex64::new(1.0, 0.0);
        // identity evolution, no delay: the bunched pair interferes back to coincidence
        let p = bs_outcome_probabilities_diagonal(one, 0.0);
        assert_abs_diff_eq!(p[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[2], 1.0, epsilon = 1e-15);
        // z = −1: both photons bunch at one detector
        let p = bs_outcome_probabilities_diagonal(-one, 0.0);
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn single_photon_calibration_round_trip() {
        // identity: all reflected at δ = 0
        let p0 = single_photon_probabilities(Complex64::new(1.0, 0.0), 0.0);
        assert_abs_diff_eq!(p0[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p0[1], 0.0, epsilon = 1e-15);

        // z = i: balanced at δ = 0, fully split at δ = π/2
        let z = Complex64::new(0.0, 1.0);
        let p0 = single_photon_probabilities(z, 0.0);
        let pq = single_photon_probabilities(z, std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(p0[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p0[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(pq[0], 1.0, epsilon = 1e-15);
        let rec = calibrate_single_photon(p0[0], p0[1], pq[0], pq[1], 1e-9).unwrap();
        assert_abs_diff_eq!(rec.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rec.im, 1.0, epsilon = 1e-15);

        // 200 random points on the unit disk round-trip exactly
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..200 {
            let z = Complex64::from_polar(rng.gen::<f64>(), rng.gen::<f64>() * 6.283);
            let p0 = single_photon_probabilities(z, 0.0);
            let pq = single_photon_probabilities(z, std::f64::consts::FRAC_PI_2);
            let rec = calibrate_single_photon(p0[0], p0[1], pq[0], pq[1], 1e-9).unwrap();
            assert_abs_diff_eq!(rec.re, z.re, epsilon = 1e-12);
            assert_abs_diff_eq!(rec.im, z.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn pair_inversion_round_trips_on_random_inputs() {
        let mut rng = StdRng::seed_from_u64(12);
        for _ in 0..200 {
            let z_a = Complex64::from_polar(rng.gen::<f64>(), rng.gen::<f64>() * 6.283);
            let z_b = Complex64::from_polar(rng.gen::<f64>(), rng.gen::<f64>() * 6.283);
            let z = Complex64::from_polar(rng.gen::<f64>(), rng.gen::<f64>() * 6.283);
            let meas: Vec<(f64, [f64; 4])> = OFFDIAG_DELAYS
                .iter()
                .map(|&d| {
                    let p = bs_outcome_probabilities(z, z_a, z_b, d);
                    (d, [p[0], p[1], p[2], p[3]])
                })
                .collect();
            let (rec, residual) = invert_pair_offdiag(&meas, z_a, z_b, 1e-8).unwrap();
            assert!((rec - z).norm() < 1e-10, "offdiag {z} -> {rec}");
            assert!(residual < 1e-10);

            let meas: Vec<(f64, [f64; 3])> = DIAG_DELAYS
                .iter()
                .map(|&d| {
                    let p = bs_outcome_probabilities_diagonal(z, d);
                    (d, [p[0], p[1], p[2]])
                })
                .collect();
            let (rec, _) = invert_pair_diag(&meas, 1e-8).unwrap();
            assert!((rec - z).norm() < 1e-10, "diag {z} -> {rec}");
        }
    }

    #[test]
    fn inversion_rejects_inconsistent_probabilities() {
        let z_a = Complex64::new(0.4, 0.1);
        let z_b = Complex64::new(0.2, -0.3);
        let meas: Vec<(f64, [f64; 4])> = OFFDIAG_DELAYS
            .iter()
            .map(|&d| (d, [0.0, 0.0, 0.0, 0.0]))
            .collect();
        assert!(invert_pair_offdiag(&meas, z_a, z_b, 1e-8).is_err());
    }

    #[test]
    fn trace_identity_against_eigenvalue_sum() {
        let params = chaotic_params(3);
        let basis = FockBasis::new(3, 2).unwrap();
        let spectrum = diagonalize(&build_hamiltonian(&params, &basis).unwrap()).unwrap();
        let single_basis = FockBasis::new(3, 1).unwrap();
        let mut sp = params.clone();
        sp.n_photons = 1;
        let single = diagonalize(&build_hamiltonian(&sp, &single_basis).unwrap()).unwrap();
        for &t in &[0.0, 0.7, 3.1] {
            let amps = unitary_diagonal_elements(&spectrum, &basis, &single, t).unwrap();
            let tr = amps.trace();
            let direct = spectrum.evolution_trace(t);
            assert_abs_diff_eq!(tr.re, direct.re, epsilon = 1e-10);
            assert_abs_diff_eq!(tr.im, direct.im, epsilon = 1e-10);
            // unitarity bound on every diagonal amplitude
            assert!(amps.pair.iter().all(|z| z.norm() <= 1.0 + 1e-9));
        }
        // t = 0 is the identity: Σ z = D
        let amps = unitary_diagonal_elements(&spectrum, &basis, &single, 0.0).unwrap();
        assert_abs_diff_eq!(amps.trace().re, basis.dim() as f64, epsilon = 1e-10);
    }

    #[test]
    fn exact_path_reproduces_the_spectral_form_factor() {
        let params = chaotic_params(4);
        let times: Vec<f64> = (1..=12).map(|i| 0.4 * i as f64).collect();
        let curve =
            sample_and_reconstruct_sff(&params, &times, &ProtocolOptions::default()).unwrap();
        for (k_rec, k_exact) in curve.k_reconstructed.iter().zip(curve.k_exact.iter()) {
            assert!(
                (k_rec - k_exact).abs() < 1e-8,
                "protocol {k_rec} vs exact {k_exact}"
            );
        }
        assert!(curve.n_invalid_pairs.iter().all(|&n| n == 0));
    }

    #[test]
    fn reconstruction_is_equivariant_under_spectral_shift() {
        // shifting H by b·1 multiplies amplitudes by a phase; K(t) is unchanged
        let params = chaotic_params(3);
        let basis = FockBasis::new(3, 2).unwrap();
        let h = build_hamiltonian(&params, &basis).unwrap();
        let spectrum = diagonalize(&h).unwrap();
        let shifted = h.with_diagonal_shift(&vec![2.5; basis.dim()]).unwrap();
        let spectrum_shifted = diagonalize(&shifted).unwrap();
        for &t in &[0.9, 2.3] {
            let k0 = spectrum.evolution_trace(t).norm_sqr() / (basis.dim() as f64).powi(2);
            let k1 =
                spectrum_shifted.evolution_trace(t).norm_sqr() / (basis.dim() as f64).powi(2);
            assert_abs_diff_eq!(k0, k1, epsilon = 1e-10);
        }
    }

    #[test]
    fn sampled_counts_are_reproducible_and_consistent() {
        let params = chaotic_params(3);
        let times = vec![0.8, 1.9];
        let opts = ProtocolOptions {
            shots: Some(2000),
            seed: 99,
            n_bootstrap: 10,
        };
        let a = sample_and_reconstruct_sff(&params, &times, &opts).unwrap();
        let b = sample_and_reconstruct_sff(&params, &times, &opts).unwrap();
        assert_eq!(a.k_reconstructed, b.k_reconstructed);
        // finite-shot estimates stay in the right ballpark
        for (kr, ke) in a.k_reconstructed.iter().zip(a.k_exact.iter()) {
            assert!(kr.is_finite());
            assert!((kr - ke).abs() < 0.2, "sampled {kr} vs exact {ke}");
        }
        assert!(a.stderr.iter().all(|s| s.is_finite() && *s >= 0.0));
    }

    #[test]
    fn multinomial_sampler_matches_probabilities() {
        let mut rng = StdRng::seed_from_u64(5);
        let probs = [0.5, 0.3, 0.15, 0.04, 0.01];
        let shots = 200_000u64;
        let counts = sample_multinomial(&mut rng, &probs, shots);
        assert_eq!(counts.iter().sum::<u64>(), shots);
        for (c, p) in counts.iter().zip(probs.iter()) {
            let est = *c as f64 / shots as f64;
            assert!((est - p).abs() < 0.005, "{est} vs {p}");
        }
    }
}
