//! Model parameters for the synthetic-frequency-lattice Hamiltonian.
//!
//! All couplings are dimensionless multiples of the reference modulation scale
//! Ω; the lattice spacing Ω₀ enters only through the dispersion phase scale χ
//! and, optionally, the frequency-weighted hopping prefactor.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SynthDimError};

/// How the four-wave-mixing interaction is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionMode {
    /// Full phase-matched sum −(g/2) Σ e^{iθ} sinc(θ) â†â†ââ over ordered
    /// quadruples with n+m = p+q, θ = χ·(ñ²+m̃²−p̃²−q̃²).
    FullFwm,
    /// Large-dispersion limit: −(g/2) Σ n̂(n̂−1) − g Σ_{m≠n} n̂_m n̂_n.
    LocalLimit,
    /// Gauge-equivalent on-site form +(g/2) Σ n̂(n̂−1); differs from
    /// `LocalLimit` by the constant −g·p(p−1) at photon number p.
    LocalGauge,
}

/// Hopping prefactor convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Prefactor 1 (optical regime ω₀ ≫ NΩ₀).
    Unit,
    /// 2√(ω_n ω_{n+μ}) / (ω_n + ω_{n+μ}) with ω_n = ω₀ + ñ·Ω₀.
    FrequencyWeighted,
}

/// One modulation tone: hopping of range μ (index in the vector + 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopTerm {
    pub strength: f64,
    pub phase: f64,
}

/// Full parameter set of the effective lattice Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_modes: usize,
    pub n_photons: usize,
    /// Hoppings K_μ e^{iφ_μ}, μ = 1..=hops.len().
    pub hops: Vec<HopTerm>,
    /// Linear tilt Δ: on-site term −n·Δ·n̂_n with 1-based n.
    pub tilt: f64,
    /// Interaction strength g.
    pub interaction: f64,
    /// Dispersion phase scale χ (encodes β₂·L·Ω₀²/2).
    pub gvd_phase_scale: f64,
    pub interaction_mode: InteractionMode,
    pub weight_mode: WeightMode,
    /// ω₀/Ω₀; only used under `WeightMode::FrequencyWeighted`.
    pub center_frequency_ratio: f64,
}

impl ModelParams {
    /// A bare lattice: K₁ = 1, no longer-range hops, no tilt, no interaction.
    pub fn new(n_modes: usize, n_photons: usize) -> Self {
        let hops = if n_modes >= 2 {
            vec![HopTerm {
                strength: 1.0,
                phase: 0.0,
            }]
        } else {
            Vec::new()
        };
        Self {
            n_modes,
            n_photons,
            hops,
            tilt: 0.0,
            interaction: 0.0,
            gvd_phase_scale: 50.0,
            interaction_mode: InteractionMode::FullFwm,
            weight_mode: WeightMode::Unit,
            center_frequency_ratio: 1e5,
        }
    }

    /// Set hoppings from (K₁, K₂, K₃) with phases (φ₁, φ₂, φ₃).
    pub fn with_hops3(mut self, strengths: [f64; 3], phases: [f64; 3]) -> Self {
        self.hops = strengths
            .iter()
            .zip(phases.iter())
            .map(|(&strength, &phase)| HopTerm { strength, phase })
            .collect();
        self
    }

    pub fn max_hop_range(&self) -> usize {
        self.hops.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes < 1 {
            return Err(SynthDimError::InvalidParams(
                "need at least one mode".into(),
            ));
        }
        if self.hops.len() + 1 > self.n_modes {
            return Err(SynthDimError::InvalidParams(format!(
                "hop range {} needs at least {} modes, have {}",
                self.hops.len(),
                self.hops.len() + 1,
                self.n_modes
            )));
        }
        for (i, hop) in self.hops.iter().enumerate() {
            if hop.strength < 0.0 || !hop.strength.is_finite() {
                return Err(SynthDimError::InvalidParams(format!(
                    "K_{} = {} must be finite and non-negative",
                    i + 1,
                    hop.strength
                )));
            }
        }
        if self.gvd_phase_scale < 0.0 || !self.gvd_phase_scale.is_finite() {
            return Err(SynthDimError::InvalidParams(format!(
                "gvd_phase_scale = {} must be finite and non-negative",
                self.gvd_phase_scale
            )));
        }
        if !self.interaction.is_finite() || !self.tilt.is_finite() {
            return Err(SynthDimError::InvalidParams(
                "tilt and interaction must be finite".into(),
            ));
        }
        if self.weight_mode == WeightMode::FrequencyWeighted {
            // every ω_n = ω₀ + ñΩ₀ must stay positive
            let edge = self.mode_offset(0).abs().max(self.mode_offset(self.n_modes - 1).abs());
            if self.center_frequency_ratio <= edge {
                return Err(SynthDimError::Domain(format!(
                    "center_frequency_ratio {} leaves non-positive mode frequencies (need > {})",
                    self.center_frequency_ratio, edge
                )));
            }
        }
        Ok(())
    }

    /// Offset ñ = n − (N+1)/2 of 0-based mode `i` from the lattice center,
    /// in units of Ω₀ (integer for odd N, half-integer for even N).
    pub fn mode_offset(&self, i: usize) -> f64 {
        (i + 1) as f64 - (self.n_modes as f64 + 1.0) / 2.0
    }

    /// Mode frequency ω_n in units of Ω₀.
    pub fn omega_ratio(&self, i: usize) -> f64 {
        self.center_frequency_ratio + self.mode_offset(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_offsets_are_centered() {
        let p = ModelParams::new(21, 2);
        assert_eq!(p.mode_offset(10), 0.0); // mode 11 (1-based) is the center
        assert_eq!(p.mode_offset(0), -10.0);
        assert_eq!(p.mode_offset(20), 10.0);
        let p = ModelParams::new(4, 1);
        assert_eq!(p.mode_offset(1), -0.5);
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let mut p = ModelParams::new(3, 2).with_hops3([1.0, 0.5, 0.2], [0.0; 3]);
        assert!(p.validate().is_err()); // range 3 needs N >= 4
        p.n_modes = 4;
        assert!(p.validate().is_ok());
        p.hops[0].strength = -1.0;
        assert!(p.validate().is_err());
        p.hops[0].strength = 1.0;
        p.gvd_phase_scale = -0.1;
        assert!(p.validate().is_err());
    }

    #[test]
    fn frequency_weighted_needs_positive_frequencies() {
        let mut p = ModelParams::new(5, 1);
        p.weight_mode = WeightMode::FrequencyWeighted;
        p.center_frequency_ratio = 1.5;
        assert!(p.validate().is_err());
        p.center_frequency_ratio = 2.5;
        assert!(p.validate().is_ok());
    }
}
