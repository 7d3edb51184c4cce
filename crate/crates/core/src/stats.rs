//! Level-spacing statistics, disorder ensembles, and the spectral form factor.
//!
//! The consecutive-spacing ratio ⟨r⟩ = ⟨min(s_i, s_{i+1})/max(s_i, s_{i+1})⟩ is
//! unfolding-free and pins the three reference classes:
//!
//! * Poisson / integrable: ⟨r⟩ = 2 ln 2 − 1 ≈ 0.3863
//! * GOE (chaotic, time-reversal symmetric): ⟨r⟩ ≈ 0.5307
//! * GUE (chaotic, broken time reversal):   ⟨r⟩ ≈ 0.5996
//!
//! The spectral form factor K(t) = |Tr e^{−iHt}|²/D², averaged over an onsite
//! disorder ensemble, shows the chaotic dip–ramp–plateau around the Heisenberg
//! time t_H = 2π/⟨spacing⟩; [`sff_theory`] supplies the GOE/GUE random-matrix
//! curves including the disconnected Bessel envelope r(t) = t_H·J₁(4Dt/t_H)/(2Dt).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SynthDimError};
use crate::fock::FockBasis;
use crate::hamiltonian::{build_hamiltonian, onsite_potential_diagonal, HermitianOperator};
use crate::params::ModelParams;
use crate::rng::substream_rng;
use crate::spectrum::{diagonalize, Spectrum};

/// ⟨r⟩ of a Poisson (integrable) spectrum: 2 ln 2 − 1.
pub const R_POISSON: f64 = 0.386_294_361_119_890_6;
/// ⟨r⟩ of the Gaussian orthogonal ensemble (large-D numerical value).
pub const R_GOE: f64 = 0.5307;
/// ⟨r⟩ of the Gaussian unitary ensemble (large-D numerical value).
pub const R_GUE: f64 = 0.5996;
/// A spectrum classifies as a phase only within this distance of its constant.
pub const CLASSIFY_MARGIN: f64 = 0.035;

/// Phase label attached to a mean spacing ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Integrable,
    Goe,
    Gue,
    Intermediate,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::Integrable => "integrable",
            Classification::Goe => "GOE",
            Classification::Gue => "GUE",
            Classification::Intermediate => "intermediate",
        };
        write!(f, "{s}")
    }
}

/// Nearest reference constant within [`CLASSIFY_MARGIN`], else intermediate.
pub fn classify(mean_r: f64) -> Classification {
    let candidates = [
        (R_POISSON, Classification::Integrable),
        (R_GOE, Classification::Goe),
        (R_GUE, Classification::Gue),
    ];
    let (dist, label) = candidates
        .iter()
        .map(|&(c, l)| ((mean_r - c).abs(), l))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    if dist <= CLASSIFY_MARGIN {
        label
    } else {
        Classification::Intermediate
    }
}

/// Options for [`r_statistic`].
#[derive(Debug, Clone, Copy)]
pub struct RStatOptions {
    /// Central fraction of the sorted spectrum used (edges discarded).
    pub window: f64,
    /// Spacings below this are treated as exact degeneracies and dropped.
    /// `None` uses 1e-10 × (spectral width of the windowed spectrum).
    pub degeneracy_tol: Option<f64>,
}

impl Default for RStatOptions {
    fn default() -> Self {
        Self {
            window: 0.8,
            degeneracy_tol: None,
        }
    }
}

/// Result of the consecutive-spacing-ratio statistic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RStatResult {
    pub mean_r: f64,
    pub n_spacings_used: usize,
    pub n_degenerate_dropped: usize,
    pub classification: Classification,
}

/// Mean ratio of consecutive level spacings over the windowed spectrum.
///
/// Degenerate spacings are dropped (and counted); classification is refused
/// with an error when more than 20% of spacings are degenerate.
pub fn r_statistic(eigenvalues: &[f64], opts: &RStatOptions) -> Result<RStatResult> {
    if !(opts.window > 0.0 && opts.window <= 1.0) {
        return Err(SynthDimError::InvalidParams(format!(
            "window fraction {} outside (0, 1]",
            opts.window
        )));
    }
    let mut eigs = eigenvalues.to_vec();
    eigs.sort_by(f64::total_cmp);

    let d = eigs.len();
    let drop_per_side = ((d as f64) * (1.0 - opts.window) / 2.0).floor() as usize;
    let windowed = &eigs[drop_per_side..d - drop_per_side];
    if windowed.len() < 4 {
        return Err(SynthDimError::TooFewLevels {
            needed: 4,
            have: windowed.len(),
        });
    }

    let width = windowed.last().unwrap() - windowed.first().unwrap();
    let tol = opts.degeneracy_tol.unwrap_or(1e-10 * width);
    if width <= 0.0 {
        return Err(SynthDimError::DegenerateSpectrum {
            dropped: windowed.len() - 1,
            total: windowed.len() - 1,
        });
    }

    let spacings: Vec<f64> = windowed.windows(2).map(|w| w[1] - w[0]).collect();
    let total = spacings.len();
    let kept: Vec<f64> = spacings.iter().copied().filter(|&s| s >= tol).collect();
    let dropped = total - kept.len();
    if dropped * 5 > total {
        return Err(SynthDimError::DegenerateSpectrum { dropped, total });
    }
    if kept.len() < 3 {
        return Err(SynthDimError::TooFewLevels {
            needed: 4,
            have: kept.len() + 1,
        });
    }

    let mut sum = 0.0;
    let mut count = 0usize;
    for w in kept.windows(2) {
        sum += w[0].min(w[1]) / w[0].max(w[1]);
        count += 1;
    }
    let mean_r = sum / count as f64;
    Ok(RStatResult {
        mean_r,
        n_spacings_used: count,
        n_degenerate_dropped: dropped,
        classification: classify(mean_r),
    })
}

/// Onsite disorder ensemble defining the ensemble average of spectral quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderEnsemble {
    pub kind: DisorderKind,
    /// Width W: δ_n ~ Uniform[−W/2, W/2].
    pub amplitude: f64,
    pub realizations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderKind {
    OnsiteUniform,
}

impl DisorderEnsemble {
    pub fn new(amplitude: f64, realizations: usize, seed: u64) -> Self {
        Self {
            kind: DisorderKind::OnsiteUniform,
            amplitude,
            realizations,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.amplitude < 0.0 || !self.amplitude.is_finite() {
            return Err(SynthDimError::InvalidParams(format!(
                "disorder amplitude {} must be finite and non-negative",
                self.amplitude
            )));
        }
        if self.realizations < 1 {
            return Err(SynthDimError::InvalidParams(
                "need at least one realization".into(),
            ));
        }
        Ok(())
    }

    /// Per-mode potential of realization `r` (added to H as −Σ δ_n n̂_n).
    pub fn draw(&self, n_modes: usize, realization: u64) -> Vec<f64> {
        let mut rng = substream_rng(self.seed, realization);
        (0..n_modes)
            .map(|_| (rng.gen::<f64>() - 0.5) * self.amplitude)
            .collect()
    }
}

/// Disordered copy of `h`: H − Σ_n δ_n n̂_n for realization `r`.
pub fn disordered_hamiltonian(
    h: &HermitianOperator,
    basis: &FockBasis,
    ensemble: &DisorderEnsemble,
    realization: u64,
) -> Result<HermitianOperator> {
    let delta = ensemble.draw(basis.n_modes(), realization);
    let mut diag = onsite_potential_diagonal(basis, &delta)?;
    diag.iter_mut().for_each(|v| *v = -*v);
    h.with_diagonal_shift(&diag)
}

/// Ensemble-averaged ⟨r⟩ with standard error over realizations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleRStat {
    pub mean_r: f64,
    pub stderr: f64,
    pub n_realizations: usize,
    pub n_degenerate_dropped: usize,
    pub classification: Classification,
    /// Set when the clean Hamiltonian is real yet classification came out GUE:
    /// a real Hermitian matrix cannot break time reversal, so a GUE label
    /// signals a parameter or statistics problem.
    pub real_matrix_gue_warning: bool,
}

/// Build the model once, then average [`r_statistic`] over disorder realizations.
pub fn ensemble_r_statistic(
    params: &ModelParams,
    ensemble: &DisorderEnsemble,
    opts: &RStatOptions,
) -> Result<EnsembleRStat> {
    ensemble.validate()?;
    let basis = FockBasis::new(params.n_modes, params.n_photons)?;
    let h = build_hamiltonian(params, &basis)?;

    let per: Vec<Result<RStatResult>> = (0..ensemble.realizations as u64)
        .into_par_iter()
        .map(|r| {
            let hr = disordered_hamiltonian(&h, &basis, ensemble, r)?;
            let spectrum = diagonalize(&hr)?;
            r_statistic(spectrum.eigenvalues(), opts)
        })
        .collect();

    let mut values = Vec::with_capacity(per.len());
    let mut dropped = 0usize;
    for res in per {
        let res = res?;
        dropped += res.n_degenerate_dropped;
        values.push(res.mean_r);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)
    } else {
        0.0
    };
    let stderr = (var / n as f64).sqrt();
    let classification = classify(mean);
    let real_matrix_gue_warning =
        classification == Classification::Gue && h.is_real(1e-12);
    Ok(EnsembleRStat {
        mean_r: mean,
        stderr,
        n_realizations: n,
        n_degenerate_dropped: dropped,
        classification,
        real_matrix_gue_warning,
    })
}

/// A sampled spectral-form-factor curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SffCurve {
    /// Sample times, in units of 1/Ω (all > 0; K(0) = 1 by normalization).
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub dim: usize,
    pub heisenberg_time: f64,
}

/// K(t) = |Σ_k e^{−iE_k t}|² / D² for a single spectrum.
pub fn sff_from_eigenvalues(eigenvalues: &[f64], times: &[f64]) -> Vec<f64> {
    let d = eigenvalues.len() as f64;
    times
        .iter()
        .map(|&t| {
            let mut re = 0.0;
            let mut im = 0.0;
            for &e in eigenvalues {
                let (s, c) = (e * t).sin_cos();
                re += c;
                im += s;
            }
            (re * re + im * im) / (d * d)
        })
        .collect()
}

/// Ensemble-averaged exact SFF of the model.
///
/// Each realization adds onsite disorder −Σ δ_n n̂_n, is diagonalized in full,
/// and contributes |Tr e^{−iHt}|²/D²; the Heisenberg time is taken from the
/// clean spectrum.
pub fn sff_exact(
    params: &ModelParams,
    ensemble: &DisorderEnsemble,
    times: &[f64],
) -> Result<SffCurve> {
    ensemble.validate()?;
    validate_times(times)?;
    let basis = FockBasis::new(params.n_modes, params.n_photons)?;
    let h = build_hamiltonian(params, &basis)?;
    let clean = diagonalize(&h)?;
    let t_h = clean.heisenberg_time();
    let d = basis.dim();

    let per: Vec<Result<Vec<f64>>> = (0..ensemble.realizations as u64)
        .into_par_iter()
        .map(|r| {
            let hr = disordered_hamiltonian(&h, &basis, ensemble, r)?;
            let spectrum = diagonalize(&hr)?;
            Ok(sff_from_eigenvalues(spectrum.eigenvalues(), times))
        })
        .collect();

    let mut mean = vec![0.0f64; times.len()];
    let mut n = 0usize;
    for res in per {
        let vals = res?;
        for (m, v) in mean.iter_mut().zip(vals.iter()) {
            *m += v;
        }
        n += 1;
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    Ok(SffCurve {
        times: times.to_vec(),
        values: mean,
        dim: d,
        heisenberg_time: t_h,
    })
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(SynthDimError::InvalidParams("empty time grid".into()));
    }
    let mut prev = 0.0;
    for &t in times {
        if !(t > 0.0) || t < prev {
            return Err(SynthDimError::InvalidParams(
                "times must be positive and ascending".into(),
            ));
        }
        prev = t;
    }
    Ok(())
}

/// Random-matrix ensemble for the SFF reference curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RmtKind {
    Goe,
    Gue,
}

/// Disconnected envelope r(t) = t_H · J₁(4Dt/t_H) / (2Dt); r(0⁺) → 1.
pub fn disconnected_envelope(dim: usize, t_h: f64, t: f64) -> f64 {
    let x = 4.0 * dim as f64 * t / t_h;
    if x.abs() < 1e-12 {
        return 1.0;
    }
    2.0 * libm::j1(x) / x
}

/// Closed-form GOE/GUE spectral form factor: K(t) = r(t)² + connected ramp/plateau.
pub fn sff_theory(kind: RmtKind, dim: usize, t_h: f64, times: &[f64]) -> Result<SffCurve> {
    if dim < 1 {
        return Err(SynthDimError::InvalidParams("dimension must be ≥ 1".into()));
    }
    if !(t_h > 0.0) {
        return Err(SynthDimError::InvalidParams(format!(
            "Heisenberg time {t_h} must be positive"
        )));
    }
    validate_times(times)?;
    let d = dim as f64;
    let values = times
        .iter()
        .map(|&t| {
            let tau = t / t_h;
            let connected = match kind {
                RmtKind::Goe => {
                    if tau <= 1.0 {
                        2.0 * tau - tau * (1.0 + 2.0 * tau).ln()
                    } else {
                        2.0 - tau * ((2.0 * tau + 1.0) / (2.0 * tau - 1.0)).ln()
                    }
                }
                RmtKind::Gue => {
                    if tau <= 1.0 {
                        tau
                    } else {
                        1.0
                    }
                }
            };
            let r = disconnected_envelope(dim, t_h, t);
            r * r + connected / d
        })
        .collect();
    Ok(SffCurve {
        times: times.to_vec(),
        values,
        dim,
        heisenberg_time: t_h,
    })
}

/// Log- or linearly-spaced time grid on [t_min, t_max].
pub fn time_grid(t_min: f64, t_max: f64, points: usize, log_spaced: bool) -> Result<Vec<f64>> {
    if !(t_min > 0.0) || t_max <= t_min || points < 2 {
        return Err(SynthDimError::InvalidParams(format!(
            "bad time grid: [{t_min}, {t_max}] with {points} points"
        )));
    }
    let n = points as f64 - 1.0;
    Ok((0..points)
        .map(|i| {
            let f = i as f64 / n;
            if log_spaced {
                (t_min.ln() + f * (t_max.ln() - t_min.ln())).exp()
            } else {
                t_min + f * (t_max - t_min)
            }
        })
        .collect())
}
