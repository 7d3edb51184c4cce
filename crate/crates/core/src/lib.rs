//! Few-photon quantum dynamics on a synthetic frequency lattice.
//!
//! A ring resonator with third-order nonlinearity and electro-optic modulation
//! realizes a one-dimensional lattice of frequency modes: modulation tones give
//! hoppings `K_μ e^{iφ_μ}` up to range `M`, a modulation detuning gives a linear
//! tilt `Δ` per mode, and four-wave mixing gives a photon-photon interaction of
//! strength `g` whose non-phase-matched terms are suppressed by group-velocity
//! dispersion. This crate builds that effective Hamiltonian over a fixed-photon-
//! number Fock basis and provides the diagnostics used to map out its phases:
//!
//! * [`fock`] — bosonic occupation-number basis and ladder-operator matrix elements;
//! * [`hamiltonian`] — dense Hermitian assembly of the lattice model ([`params`]);
//! * [`spectrum`] — eigendecomposition with a reconstruction-residual guard;
//! * [`stats`] — level-spacing ratio ⟨r⟩, disorder ensembles, the spectral form
//!   factor and its GOE/GUE random-matrix reference curves;
//! * [`dynamics`] — closed/dissipative time evolution, quench schedules, and
//!   two-photon detection probabilities;
//! * [`lindblad`] — full master-equation reference integrator on mixed photon sectors;
//! * [`entangle`] — frequency-entanglement diagnostics (DI, weighted DI, Schmidt
//!   and half-chain entropies, three-photon correlations);
//! * [`protocol`] — the two-beam-splitter interferometric reconstruction of the
//!   spectral form factor, including finite-shot sampling.
//!
//! Conventions: ħ = 1; all energies are in units of the reference modulation
//! scale Ω and times in 1/Ω; mode indices are 0-based in the API (1-based in
//! file output); entropies use the natural logarithm.

pub mod dynamics;
pub mod entangle;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod lindblad;
pub mod params;
pub mod protocol;
pub mod rng;
pub mod spectrum;
pub mod stats;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use error::{Result, SynthDimError};
pub use fock::{FockBasis, LadderMonomial, DEFAULT_MAX_DIM};
pub use hamiltonian::HermitianOperator;
pub use params::{InteractionMode, ModelParams, WeightMode};
pub use spectrum::Spectrum;
