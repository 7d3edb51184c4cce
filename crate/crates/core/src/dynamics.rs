//! Time evolution of few-photon states and their detection observables.
//!
//! Propagation is exact per piecewise-constant tilt segment,
//! |Ψ(t)⟩ = V e^{−i diag(E)(t−t₀)} V† |Ψ(t₀)⟩, so there is no step-size error.
//! Uniform-rate photon loss Γ enters as the no-jump factor e^{−Γ·p·t/2} on the
//! fixed-photon-number sector: mode-annihilation jumps only depopulate the
//! sector, so every observable conditioned on detecting all p photons is
//! unchanged up to this overall norm (the full master-equation cross-check
//! lives in [`crate::lindblad`]).
//!
//! The quench schedule either lists explicit (t_start, Δ) segments or triggers
//! on the weighted-DI peak: the tilt switches at the first sample where the
//! running maximum of D̄ is at least one lookback window old.

use std::sync::Arc;

use num_complex::Complex64;

use crate::entangle;
use crate::error::{Result, SynthDimError};
use crate::fock::FockBasis;
use crate::hamiltonian::build_hamiltonian;
use crate::params::ModelParams;
use crate::spectrum::{diagonalize, Spectrum};

/// Pure state over a fixed-photon-number Fock basis.
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(basis: Arc<FockBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(SynthDimError::BasisMismatch(format!(
                "amplitude vector length {} vs basis dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(SynthDimError::InvalidParams(
                "non-finite amplitude".into(),
            ));
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Euclidean norm; < 1 signals dissipative loss out of the sector.
    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Unit-norm copy.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= 0.0 {
            return Err(SynthDimError::Domain("cannot normalize the zero state".into()));
        }
        let amplitudes = self.amplitudes.iter().map(|a| a / n).collect();
        Ok(Self {
            basis: Arc::clone(&self.basis),
            amplitudes,
        })
    }

    /// Per-mode occupation expectations ⟨n̂_i⟩ of the normalized state.
    pub fn occupation_expectations(&self) -> Vec<f64> {
        let n_modes = self.basis.n_modes();
        let norm_sq: f64 = self.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let mut dens = vec![0.0f64; n_modes];
        if norm_sq == 0.0 {
            return dens;
        }
        for (k, amp) in self.amplitudes.iter().enumerate() {
            let w = amp.norm_sqr() / norm_sq;
            if w == 0.0 {
                continue;
            }
            for (i, occ) in self.basis.occupations_f64(k).enumerate() {
                dens[i] += w * occ;
            }
        }
        dens
    }

    fn same_basis(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis)
            || (self.basis.n_modes() == other.basis.n_modes()
                && self.basis.n_photons() == other.basis.n_photons())
    }
}

/// Single Fock state |ν⟩.
pub fn initial_fock(basis: &Arc<FockBasis>, occupation: &[u8]) -> Result<StateVector> {
    let idx = basis.index_of(occupation).ok_or_else(|| {
        SynthDimError::BasisMismatch("occupation vector not in this sector".into())
    })?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dim()];
    amplitudes[idx] = Complex64::new(1.0, 0.0);
    StateVector::new(Arc::clone(basis), amplitudes)
}

/// Two identical Gaussian wave packets injected at `center_mode` (0-based).
///
/// The single-photon amplitude is f_i ∝ exp(−(i−c)²/(4σ²)) with σ in units of
/// the mode spacing Ω₀, so |f|² has standard deviation σ; the two-photon state
/// is the normalized (Σ_i f_i â†_i)²|0⟩. For σ = 0.01 the state is numerically
/// the doubly occupied center mode.
pub fn initial_gaussian_pair(
    basis: &Arc<FockBasis>,
    sigma: f64,
    center_mode: usize,
) -> Result<StateVector> {
    if basis.n_photons() != 2 {
        return Err(SynthDimError::WrongSector {
            expected: 2,
            actual: basis.n_photons(),
        });
    }
    if center_mode >= basis.n_modes() {
        return Err(SynthDimError::ModeOutOfRange {
            mode: center_mode,
            n_modes: basis.n_modes(),
        });
    }
    if !(sigma > 0.0) {
        return Err(SynthDimError::InvalidParams(format!(
            "wave-packet width {sigma} must be positive"
        )));
    }
    let n = basis.n_modes();
    let f: Vec<f64> = (0..n)
        .map(|i| {
            let d = i as f64 - center_mode as f64;
            (-d * d / (4.0 * sigma * sigma)).exp()
        })
        .collect();

    let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dim()];
    let sqrt2 = 2.0f64.sqrt();
    for a in 0..n {
        for b in a..n {
            let c = if a == b {
                sqrt2 * f[a] * f[a]
            } else {
                2.0 * f[a] * f[b]
            };
            if c == 0.0 {
                continue;
            }
            let idx = basis.index_of_modes(&[a, b])?;
            amplitudes[idx] = Complex64::new(c, 0.0);
        }
    }
    let state = StateVector::new(Arc::clone(basis), amplitudes)?;
    state.normalized()
}

/// Piecewise-constant tilt schedule; the first segment starts at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchSchedule {
    pub segments: Vec<QuenchSegment>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchSegment {
    pub t_start: f64,
    pub tilt: f64,
}

impl QuenchSchedule {
    pub fn constant(tilt: f64) -> Self {
        Self {
            segments: vec![QuenchSegment { t_start: 0.0, tilt }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(SynthDimError::InvalidParams("empty quench schedule".into()));
        }
        if self.segments[0].t_start != 0.0 {
            return Err(SynthDimError::InvalidParams(
                "first quench segment must start at t = 0".into(),
            ));
        }
        for w in self.segments.windows(2) {
            if w[1].t_start <= w[0].t_start {
                return Err(SynthDimError::InvalidParams(
                    "quench segment times must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }
}

/// How the tilt changes during evolution.
#[derive(Debug, Clone, PartialEq)]
pub enum QuenchSpec {
    /// Keep the model tilt for all times.
    None,
    /// Explicit segment list (first segment at t = 0 overrides the model tilt).
    Schedule(QuenchSchedule),
    /// Switch to `tilt` at the first sample where the running maximum of the
    /// weighted DI is at least `lookback` old (requires p = 2).
    DbarTrigger { tilt: f64, lookback: f64 },
}

/// Evolution controls beyond the model parameters.
#[derive(Debug, Clone)]
pub struct EvolveOptions {
    /// Uniform photon loss rate Γ.
    pub gamma: f64,
    pub quench: QuenchSpec,
    /// Record the half-chain entropy at this cut (left block = modes 0..cut).
    pub half_chain_cut: Option<usize>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            gamma: 0.0,
            quench: QuenchSpec::None,
            half_chain_cut: None,
        }
    }
}

/// Observable records along a trajectory. Pair probabilities are raw
/// (they sum to norm²); DI, weighted DI, and entropies use the normalized state.
#[derive(Debug, Clone)]
pub struct ObservableTrajectory {
    pub times: Vec<f64>,
    pub n_modes: usize,
    pub norms: Vec<f64>,
    pub imbalance: Vec<f64>,
    /// Upper triangle (n ≤ m, row-major) of P_nm per sample; p = 2 only.
    pub pair_probs: Option<Vec<Vec<f64>>>,
    pub marginals: Option<Vec<Vec<f64>>>,
    pub di: Option<Vec<f64>>,
    pub dbar: Option<Vec<f64>>,
    pub s_ph: Option<Vec<f64>>,
    pub s_sp: Option<Vec<f64>>,
    pub quench_time: Option<f64>,
}

/// Two-photon detection probabilities P_nm = |⟨0|â_n â_m|Ψ⟩|²/(1+δ_nm)
/// and the marginals P_n = P_nn + Σ_{m≠n} P_nm/2.
#[derive(Debug, Clone)]
pub struct TwoPhotonProbabilities {
    pub n_modes: usize,
    matrix: Vec<f64>,
    pub marginals: Vec<f64>,
}

impl TwoPhotonProbabilities {
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.matrix[n * self.n_modes + m]
    }

    /// Upper triangle (n ≤ m), row-major.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_modes * (self.n_modes + 1) / 2);
        for n in 0..self.n_modes {
            for m in n..self.n_modes {
                out.push(self.get(n, m));
            }
        }
        out
    }

    /// Σ_{n≤m} P_nm; equals the squared norm of the state.
    pub fn total(&self) -> f64 {
        (0..self.n_modes)
            .flat_map(|n| (n..self.n_modes).map(move |m| (n, m)))
            .map(|(n, m)| self.get(n, m))
            .sum()
    }

    pub fn diagonal_sum(&self) -> f64 {
        (0..self.n_modes).map(|n| self.get(n, n)).sum()
    }
}

/// Detection probabilities of a two-photon state. With the bosonic factors the
/// matrix entry reduces to the squared Fock amplitude of |1_n 1_m⟩ (or |2_n⟩).
pub fn two_photon_probabilities(state: &StateVector) -> Result<TwoPhotonProbabilities> {
    let basis = state.basis();
    if basis.n_photons() != 2 {
        return Err(SynthDimError::WrongSector {
            expected: 2,
            actual: basis.n_photons(),
        });
    }
    let n = basis.n_modes();
    let mut matrix = vec![0.0f64; n * n];
    for a in 0..n {
        for b in a..n {
            let idx = basis.index_of_modes(&[a, b])?;
            let p = state.amplitudes()[idx].norm_sqr();
            matrix[a * n + b] = p;
            matrix[b * n + a] = p;
        }
    }
    let probs = TwoPhotonProbabilities {
        n_modes: n,
        matrix,
        marginals: Vec::new(),
    };
    let marginals = (0..n)
        .map(|i| {
            probs.get(i, i)
                + 0.5
                    * (0..n)
                        .filter(|&m| m != i)
                        .map(|m| probs.get(i, m))
                        .sum::<f64>()
        })
        .collect();
    Ok(TwoPhotonProbabilities { marginals, ..probs })
}

/// Overlap of occupation profiles, I(t) = Σ_i ⟨n̂_i⟩₀ ⟨n̂_i⟩_t
/// (both states normalized before taking expectations).
pub fn imbalance(state0: &StateVector, statet: &StateVector) -> Result<f64> {
    if !state0.same_basis(statet) {
        return Err(SynthDimError::BasisMismatch(
            "imbalance requires matching bases".into(),
        ));
    }
    let d0 = state0.occupation_expectations();
    let dt = statet.occupation_expectations();
    Ok(d0.iter().zip(dt.iter()).map(|(a, b)| a * b).sum())
}

/// Evolve `state0` from t = 0 and record observables at each grid time.
pub fn evolve(
    state0: &StateVector,
    params: &ModelParams,
    opts: &EvolveOptions,
    times: &[f64],
) -> Result<ObservableTrajectory> {
    if opts.gamma < 0.0 || !opts.gamma.is_finite() {
        return Err(SynthDimError::InvalidParams(format!(
            "gamma {} must be finite and non-negative",
            opts.gamma
        )));
    }
    check_grid(times)?;
    let basis = state0.basis();
    if basis.n_modes() != params.n_modes || basis.n_photons() != params.n_photons {
        return Err(SynthDimError::BasisMismatch(
            "state basis does not match model parameters".into(),
        ));
    }
    let p = basis.n_photons();
    let is_pair_sector = p == 2;

    // tilt schedule: explicit segments, or base tilt with an optional trigger
    let mut schedule = match &opts.quench {
        QuenchSpec::None => QuenchSchedule::constant(params.tilt),
        QuenchSpec::Schedule(s) => {
            s.validate()?;
            s.clone()
        }
        QuenchSpec::DbarTrigger { lookback, .. } => {
            if !is_pair_sector {
                return Err(SynthDimError::WrongSector {
                    expected: 2,
                    actual: p,
                });
            }
            if !(lookback > &0.0) {
                return Err(SynthDimError::InvalidParams(
                    "trigger lookback must be positive".into(),
                ));
            }
            QuenchSchedule::constant(params.tilt)
        }
    };

    let mut spectra = SpectrumCache::new(params, basis);
    let mut trajectory = Recorder::new(basis.n_modes(), is_pair_sector, opts.half_chain_cut);

    let state0_normalized = state0.normalized()?;
    let mut psi = state0.amplitudes().to_vec(); // unitary part; damping applied analytically
    let mut t_now = 0.0f64;
    let mut seg_idx = 0usize;

    // weighted-DI trigger bookkeeping
    let mut armed = matches!(opts.quench, QuenchSpec::DbarTrigger { .. });
    let mut dbar_max = f64::NEG_INFINITY;
    let mut dbar_max_t = 0.0f64;
    let mut quench_time = None;
    if let QuenchSpec::Schedule(s) = &opts.quench {
        if s.segments.len() > 1 {
            quench_time = Some(s.segments[1].t_start);
        }
    }

    for &t in times {
        // cross explicit segment boundaries between samples
        while seg_idx + 1 < schedule.segments.len()
            && schedule.segments[seg_idx + 1].t_start <= t
        {
            let boundary = schedule.segments[seg_idx + 1].t_start;
            let spectrum = spectra.get(schedule.segments[seg_idx].tilt)?;
            psi = spectrum.propagate(&psi, boundary - t_now);
            t_now = boundary;
            seg_idx += 1;
        }
        let spectrum = spectra.get(schedule.segments[seg_idx].tilt)?;
        psi = spectrum.propagate(&psi, t - t_now);
        t_now = t;

        let damping = (-0.5 * opts.gamma * p as f64 * t).exp();
        let damped: Vec<Complex64> = psi.iter().map(|a| a * damping).collect();
        let state_t = StateVector::new(Arc::clone(basis), damped)?;
        let dbar = trajectory.record(t, &state_t, &state0_normalized)?;

        // peak-triggered quench: fire once the running max is `lookback` old
        if armed {
            if let (QuenchSpec::DbarTrigger { tilt, lookback }, Some(db)) = (&opts.quench, dbar)
            {
                if db.is_finite() && db > dbar_max {
                    dbar_max = db;
                    dbar_max_t = t;
                } else if dbar_max.is_finite() && t - dbar_max_t >= *lookback {
                    schedule.segments.push(QuenchSegment {
                        t_start: t,
                        tilt: *tilt,
                    });
                    quench_time = Some(t);
                    armed = false;
                }
            }
        }
    }

    Ok(trajectory.finish(times.to_vec(), quench_time))
}

/// Evolve and return the raw states at each grid time (no observables).
pub fn evolve_states(
    state0: &StateVector,
    params: &ModelParams,
    opts: &EvolveOptions,
    times: &[f64],
) -> Result<Vec<StateVector>> {
    check_grid(times)?;
    let basis = state0.basis();
    let schedule = match &opts.quench {
        QuenchSpec::None => QuenchSchedule::constant(params.tilt),
        QuenchSpec::Schedule(s) => {
            s.validate()?;
            s.clone()
        }
        QuenchSpec::DbarTrigger { .. } => {
            return Err(SynthDimError::InvalidParams(
                "evolve_states requires an explicit schedule".into(),
            ))
        }
    };
    let mut spectra = SpectrumCache::new(params, basis);
    let mut out = Vec::with_capacity(times.len());
    let mut psi = state0.amplitudes().to_vec();
    let mut t_now = 0.0f64;
    let mut seg_idx = 0usize;
    let p = basis.n_photons();
    for &t in times {
        while seg_idx + 1 < schedule.segments.len()
            && schedule.segments[seg_idx + 1].t_start <= t
        {
            let boundary = schedule.segments[seg_idx + 1].t_start;
            let spectrum = spectra.get(schedule.segments[seg_idx].tilt)?;
            psi = spectrum.propagate(&psi, boundary - t_now);
            t_now = boundary;
            seg_idx += 1;
        }
        let spectrum = spectra.get(schedule.segments[seg_idx].tilt)?;
        psi = spectrum.propagate(&psi, t - t_now);
        t_now = t;
        let damping = (-0.5 * opts.gamma * p as f64 * t).exp();
        let damped: Vec<Complex64> = psi.iter().map(|a| a * damping).collect();
        out.push(StateVector::new(Arc::clone(basis), damped)?);
    }
    Ok(out)
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(SynthDimError::InvalidParams("empty time grid".into()));
    }
    let mut prev = -1.0;
    for &t in times {
        if !(t >= 0.0) || t <= prev {
            return Err(SynthDimError::InvalidParams(
                "grid times must be non-negative and strictly ascending".into(),
            ));
        }
        prev = t;
    }
    Ok(())
}

/// Diagonalizations keyed by tilt value (quenches reuse the base spectrum).
struct SpectrumCache<'a> {
    params: &'a ModelParams,
    basis: &'a Arc<FockBasis>,
    entries: Vec<(u64, Spectrum)>,
}

impl<'a> SpectrumCache<'a> {
    fn new(params: &'a ModelParams, basis: &'a Arc<FockBasis>) -> Self {
        Self {
            params,
            basis,
            entries: Vec::new(),
        }
    }

    fn get(&mut self, tilt: f64) -> Result<&Spectrum> {
        let key = tilt.to_bits();
        if let Some(pos) = self.entries.iter().position(|(k, _)| *k == key) {
            return Ok(&self.entries[pos].1);
        }
        let mut params = self.params.clone();
        params.tilt = tilt;
        let h = build_hamiltonian(&params, self.basis)?;
        let spectrum = diagonalize(&h)?;
        self.entries.push((key, spectrum));
        Ok(&self.entries.last().unwrap().1)
    }
}

struct Recorder {
    n_modes: usize,
    pair_sector: bool,
    half_chain_cut: Option<usize>,
    norms: Vec<f64>,
    imbalance: Vec<f64>,
    pair_probs: Vec<Vec<f64>>,
    marginals: Vec<Vec<f64>>,
    di: Vec<f64>,
    dbar: Vec<f64>,
    s_ph: Vec<f64>,
    s_sp: Vec<f64>,
}

impl Recorder {
    fn new(n_modes: usize, pair_sector: bool, half_chain_cut: Option<usize>) -> Self {
        Self {
            n_modes,
            pair_sector,
            half_chain_cut,
            norms: Vec::new(),
            imbalance: Vec::new(),
            pair_probs: Vec::new(),
            marginals: Vec::new(),
            di: Vec::new(),
            dbar: Vec::new(),
            s_ph: Vec::new(),
            s_sp: Vec::new(),
        }
    }

    /// Returns the weighted DI at this sample when available (trigger input).
    fn record(
        &mut self,
        _t: f64,
        state: &StateVector,
        state0_normalized: &StateVector,
    ) -> Result<Option<f64>> {
        self.norms.push(state.norm());
        let normalized = state.normalized()?;
        self.imbalance
            .push(imbalance(state0_normalized, &normalized)?);

        if let Some(cut) = self.half_chain_cut {
            self.s_sp.push(entangle::half_chain_entropy(&normalized, cut)?);
        }

        if !self.pair_sector {
            return Ok(None);
        }
        let raw = two_photon_probabilities(state)?;
        let norm_probs = two_photon_probabilities(&normalized)?;
        let di = entangle::degree_of_independence(&norm_probs).unwrap_or(f64::NAN);
        let dbar = entangle::weighted_di(&norm_probs).unwrap_or(f64::NAN);
        let s_ph = entangle::TwoPhotonAmplitude::from_state(&normalized)
            .map(|amp| entangle::photon_entanglement_entropy(&amp))
            .unwrap_or(f64::NAN);
        self.pair_probs.push(raw.upper_triangle());
        self.marginals.push(raw.marginals.clone());
        self.di.push(di);
        self.dbar.push(dbar);
        self.s_ph.push(s_ph);
        Ok(Some(dbar))
    }

    fn finish(self, times: Vec<f64>, quench_time: Option<f64>) -> ObservableTrajectory {
        ObservableTrajectory {
            times,
            n_modes: self.n_modes,
            norms: self.norms,
            imbalance: self.imbalance,
            pair_probs: self.pair_sector.then_some(self.pair_probs),
            marginals: self.pair_sector.then_some(self.marginals),
            di: self.pair_sector.then_some(self.di),
            dbar: self.pair_sector.then_some(self.dbar),
            s_ph: self.pair_sector.then_some(self.s_ph),
            s_sp: self.half_chain_cut.map(|_| self.s_sp),
            quench_time,
        }
    }
}
