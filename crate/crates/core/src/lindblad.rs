//! Master-equation reference integrator on the direct sum of photon sectors.
//!
//! ρ̇ = −i[H, ρ] + Γ Σ_n (â_n ρ â†_n − ½{â†_n â_n, ρ})
//!
//! Uniform-rate mode annihilation moves weight down the photon-number ladder,
//! so the state lives on ⊕_{k=0..p} Fock(N, k). This integrator is the small-
//! instance cross-check for the no-jump evolution in [`crate::dynamics`]: the
//! top-sector block obeys ρ_p(t) = e^{−Γpt}·U ρ_p(0) U†, so normalized
//! detection probabilities are dissipation-independent. A classic fixed-step
//! fourth-order Runge-Kutta scheme is used, with the step refined until
//! halving it moves the final state by less than 1e-8 in trace distance.

use faer::Mat;
use num_complex::Complex64;

use crate::dynamics::StateVector;
use crate::error::{Result, SynthDimError};
use crate::fock::{fock_dimension, FockBasis};
use crate::hamiltonian::build_hamiltonian;
use crate::params::ModelParams;

/// Trace-distance convergence target for the step-halving loop.
const STEP_TOL: f64 = 1e-8;

/// Direct sum of Fock sectors with photon number 0..=max_photons.
#[derive(Debug, Clone)]
pub struct MixedBasis {
    sectors: Vec<FockBasis>,
    offsets: Vec<usize>,
    dim: usize,
}

impl MixedBasis {
    pub fn new(n_modes: usize, max_photons: usize, max_dim: usize) -> Result<Self> {
        let total: u128 = (0..=max_photons)
            .map(|k| fock_dimension(n_modes, k))
            .sum();
        if total > max_dim as u128 {
            return Err(SynthDimError::CapacityExceeded {
                dim: total,
                limit: max_dim,
            });
        }
        let mut sectors = Vec::with_capacity(max_photons + 1);
        let mut offsets = Vec::with_capacity(max_photons + 1);
        let mut dim = 0usize;
        for k in 0..=max_photons {
            let basis = FockBasis::with_limit(n_modes, k, max_dim)?;
            offsets.push(dim);
            dim += basis.dim();
            sectors.push(basis);
        }
        Ok(Self {
            sectors,
            offsets,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_photons(&self) -> usize {
        self.sectors.len() - 1
    }

    pub fn n_modes(&self) -> usize {
        self.sectors[0].n_modes()
    }

    pub fn sector(&self, k: usize) -> &FockBasis {
        &self.sectors[k]
    }

    pub fn offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    /// Photon number of each mixed-space index.
    pub fn sector_of_index(&self, idx: usize) -> usize {
        match self.offsets.binary_search(&idx) {
            Ok(k) => k,
            Err(k) => k - 1,
        }
    }
}

/// Dense â_n on the mixed space (sector k maps into sector k−1).
pub fn mixed_annihilator(mixed: &MixedBasis, mode: usize) -> Result<Mat<Complex64>> {
    if mode >= mixed.n_modes() {
        return Err(SynthDimError::ModeOutOfRange {
            mode,
            n_modes: mixed.n_modes(),
        });
    }
    let mut a = Mat::<Complex64>::zeros(mixed.dim(), mixed.dim());
    for k in 1..=mixed.max_photons() {
        let from = mixed.sector(k);
        let to = mixed.sector(k - 1);
        for col in 0..from.dim() {
            let occ = from.state(col);
            if occ[mode] == 0 {
                continue;
            }
            let mut new_occ = occ.to_vec();
            new_occ[mode] -= 1;
            let row = to.index_of(&new_occ).expect("one photon removed");
            a[(mixed.offset(k - 1) + row, mixed.offset(k) + col)] =
                Complex64::new(f64::from(occ[mode]).sqrt(), 0.0);
        }
    }
    Ok(a)
}

/// Block-diagonal Hamiltonian on the mixed space (photon number conserved).
pub fn mixed_hamiltonian(params: &ModelParams, mixed: &MixedBasis) -> Result<Mat<Complex64>> {
    let mut h = Mat::<Complex64>::zeros(mixed.dim(), mixed.dim());
    for k in 0..=mixed.max_photons() {
        let mut pk = params.clone();
        pk.n_photons = k;
        let block = build_hamiltonian(&pk, mixed.sector(k))?;
        let off = mixed.offset(k);
        for j in 0..block.dim() {
            for i in 0..block.dim() {
                h[(off + i, off + j)] = block.entry(i, j);
            }
        }
    }
    Ok(h)
}

/// Density operator |Ψ⟩⟨Ψ| of a pure sector state embedded in the mixed space.
pub fn pure_density(state: &StateVector, mixed: &MixedBasis) -> Result<Mat<Complex64>> {
    let p = state.basis().n_photons();
    if p > mixed.max_photons() || state.basis().n_modes() != mixed.n_modes() {
        return Err(SynthDimError::BasisMismatch(
            "state sector absent from the mixed basis".into(),
        ));
    }
    let off = mixed.offset(p);
    let mut rho = Mat::<Complex64>::zeros(mixed.dim(), mixed.dim());
    let amps = state.amplitudes();
    for (i, a) in amps.iter().enumerate() {
        for (j, b) in amps.iter().enumerate() {
            rho[(off + i, off + j)] = a * b.conj();
        }
    }
    Ok(rho)
}

/// Records along a master-equation trajectory.
#[derive(Debug, Clone)]
pub struct LindbladTrajectory {
    pub times: Vec<f64>,
    pub traces: Vec<f64>,
    /// Trace of each photon-number block per sample.
    pub sector_populations: Vec<Vec<f64>>,
    /// Normalized two-photon probabilities (upper triangle) from the p = 2
    /// block, when the top sector is two photons.
    pub pair_probs_normalized: Option<Vec<Vec<f64>>>,
    /// Step size accepted by the convergence loop.
    pub step: f64,
}

/// Integrate the master equation from `rho0` and record at each grid time.
///
/// The result is recomputed with halved steps until the final-state trace
/// distance between successive refinements drops below 1e-8.
pub fn lindblad_reference(
    rho0: &Mat<Complex64>,
    params: &ModelParams,
    mixed: &MixedBasis,
    gamma: f64,
    times: &[f64],
) -> Result<LindbladTrajectory> {
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(SynthDimError::InvalidParams(format!(
            "gamma {gamma} must be finite and non-negative"
        )));
    }
    if rho0.nrows() != mixed.dim() || rho0.ncols() != mixed.dim() {
        return Err(SynthDimError::BasisMismatch(format!(
            "density matrix is {}×{}, mixed space has dimension {}",
            rho0.nrows(),
            rho0.ncols(),
            mixed.dim()
        )));
    }
    if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SynthDimError::InvalidParams(
            "grid times must be non-negative and strictly ascending".into(),
        ));
    }

    let h = mixed_hamiltonian(params, mixed)?;
    let jumps: Vec<Mat<Complex64>> = (0..mixed.n_modes())
        .map(|n| mixed_annihilator(mixed, n))
        .collect::<Result<_>>()?;
    // Σ â†â is the total photon number: diagonal per sector
    let number_diag: Vec<f64> = (0..mixed.dim())
        .map(|i| mixed.sector_of_index(i) as f64)
        .collect();

    let generator = Generator {
        h: &h,
        jumps: &jumps,
        number_diag: &number_diag,
        gamma,
    };

    let h_scale = {
        let mut m = 0.0f64;
        for j in 0..h.ncols() {
            for i in 0..h.nrows() {
                m = m.max(h[(i, j)].norm());
            }
        }
        m.max(gamma).max(1.0)
    };
    let mut step = 0.05 / h_scale;

    let mut prev = integrate(&generator, rho0, times, step);
    loop {
        let half = integrate(&generator, rho0, times, step / 2.0);
        let dist = trace_distance(prev.last().unwrap(), half.last().unwrap());
        if dist < STEP_TOL {
            prev = half;
            step /= 2.0;
            break;
        }
        step /= 2.0;
        prev = half;
        if step < 1e-7 {
            return Err(SynthDimError::StepConvergence(dist));
        }
    }

    let mut traces = Vec::with_capacity(times.len());
    let mut sector_populations = Vec::with_capacity(times.len());
    let top_is_pair = mixed.max_photons() == 2;
    let mut pair_probs = Vec::with_capacity(times.len());
    for rho in &prev {
        let mut tr = 0.0;
        let mut pops = vec![0.0f64; mixed.max_photons() + 1];
        for i in 0..mixed.dim() {
            let d = rho[(i, i)].re;
            tr += d;
            pops[mixed.sector_of_index(i)] += d;
        }
        traces.push(tr);
        if top_is_pair {
            pair_probs.push(normalized_pair_probs(rho, mixed));
        }
        sector_populations.push(pops);
    }
    Ok(LindbladTrajectory {
        times: times.to_vec(),
        traces,
        sector_populations,
        pair_probs_normalized: top_is_pair.then_some(pair_probs),
        step,
    })
}

/// Upper-triangle two-photon probabilities from the p = 2 diagonal block,
/// normalized by the block trace.
fn normalized_pair_probs(rho: &Mat<Complex64>, mixed: &MixedBasis) -> Vec<f64> {
    let sector = mixed.sector(2);
    let off = mixed.offset(2);
    let n = mixed.n_modes();
    let block_trace: f64 = (0..sector.dim()).map(|i| rho[(off + i, off + i)].re).sum();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for a in 0..n {
        for b in a..n {
            let idx = sector
                .index_of_modes(&[a, b])
                .expect("pair state exists in the p=2 sector");
            let p = rho[(off + idx, off + idx)].re;
            out.push(if block_trace > 0.0 { p / block_trace } else { 0.0 });
        }
    }
    out
}

struct Generator<'a> {
    h: &'a Mat<Complex64>,
    jumps: &'a [Mat<Complex64>],
    number_diag: &'a [f64],
    gamma: f64,
}

impl Generator<'_> {
    fn rhs(&self, rho: &Mat<Complex64>) -> Mat<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        let commutator = self.h * rho - rho * self.h;
        let mut out = -i * commutator;
        if self.gamma > 0.0 {
            for a in self.jumps {
                let gain = a * rho * a.adjoint();
                out += Complex64::new(self.gamma, 0.0) * gain;
            }
            // −(Γ/2){N̂, ρ} with N̂ diagonal
            let d = rho.nrows();
            for jc in 0..d {
                for ir in 0..d {
                    let damp = 0.5 * self.gamma * (self.number_diag[ir] + self.number_diag[jc]);
                    out[(ir, jc)] -= damp * rho[(ir, jc)];
                }
            }
        }
        out
    }

    fn rk4_step(&self, rho: &Mat<Complex64>, dt: f64) -> Mat<Complex64> {
        let half = Complex64::new(dt / 2.0, 0.0);
        let full = Complex64::new(dt, 0.0);
        let k1 = self.rhs(rho);
        let k2 = self.rhs(&(rho + &k1 * half));
        let k3 = self.rhs(&(rho + &k2 * half));
        let k4 = self.rhs(&(rho + &k3 * full));
        let sixth = dt / 6.0;
        rho + (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
            * Complex64::new(sixth, 0.0)
    }
}

fn integrate(
    generator: &Generator<'_>,
    rho0: &Mat<Complex64>,
    times: &[f64],
    step: f64,
) -> Vec<Mat<Complex64>> {
    let mut out = Vec::with_capacity(times.len());
    let mut rho = rho0.clone();
    let mut t_now = 0.0f64;
    for &t in times {
        let span = t - t_now;
        if span > 0.0 {
            let n_steps = (span / step).ceil().max(1.0) as usize;
            let dt = span / n_steps as f64;
            for _ in 0..n_steps {
                rho = generator.rk4_step(&rho, dt);
            }
        }
        t_now = t;
        out.push(rho.clone());
    }
    out
}

/// Trace distance ½‖ρ₁ − ρ₂‖₁ of Hermitian matrices.
pub fn trace_distance(a: &Mat<Complex64>, b: &Mat<Complex64>) -> f64 {
    let d = a.nrows();
    let mut diff = Mat::<Complex64>::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            diff[(i, j)] = a[(i, j)] - b[(i, j)];
        }
    }
    // symmetrize rounding noise before the self-adjoint solve
    for j in 0..d {
        for i in 0..j {
            let avg = (diff[(i, j)] + diff[(j, i)].conj()) * Complex64::new(0.5, 0.0);
            diff[(i, j)] = avg;
            diff[(j, i)] = avg.conj();
        }
        diff[(j, j)] = Complex64::new(diff[(j, j)].re, 0.0);
    }
    let evd = diff
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("difference of density matrices is Hermitian");
    let s = evd.S();
    0.5 * (0..d).map(|k| s[k].re.abs()).sum::<f64>()
}
