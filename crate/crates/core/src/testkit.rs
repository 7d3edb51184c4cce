//! Reference implementations for tests: brute-force ladder-operator matrix
//! assembly and a symbolic beam-splitter expansion.
//!
//! Everything here is built from elementary annihilation blocks composed by
//! dense matrix products, independently of the per-column walking used by the
//! production assembly, so the two paths cross-check each other. Compiled only
//! for tests (feature `testkit`).

use std::collections::HashMap;

use faer::Mat;
use num_complex::Complex64;

use crate::error::Result;
use crate::hamiltonian::{hopping_weight, interaction_amplitude};
use crate::lindblad::{mixed_annihilator, MixedBasis};
use crate::params::{InteractionMode, ModelParams};

/// Naive Hamiltonian on the mixed space ⊕_k Fock(N, k), assembled purely from
/// products of dense ladder matrices.
pub fn oracle_mixed_hamiltonian(params: &ModelParams, mixed: &MixedBasis) -> Result<Mat<Complex64>> {
    let n = params.n_modes;
    let d = mixed.dim();
    let a: Vec<Mat<Complex64>> = (0..n)
        .map(|m| mixed_annihilator(mixed, m))
        .collect::<Result<_>>()?;
    let adag: Vec<Mat<Complex64>> = a.iter().map(|m| m.adjoint().to_owned()).collect();

    let mut h = Mat::<Complex64>::zeros(d, d);

    // hopping
    for (mu_idx, hop) in params.hops.iter().enumerate() {
        let mu = mu_idx + 1;
        for site in 0..n.saturating_sub(mu) {
            let w = hopping_weight(site, mu, params)?;
            let amp = -hop.strength * w * Complex64::from_polar(1.0, hop.phase);
            let term = &adag[site] * &a[site + mu];
            let term_hc = &adag[site + mu] * &a[site];
            h += term * amp;
            h += term_hc * amp.conj();
        }
    }

    // tilt
    for site in 0..n {
        let number = &adag[site] * &a[site];
        h += number * Complex64::new(-((site + 1) as f64) * params.tilt, 0.0);
    }

    // interaction
    match params.interaction_mode {
        InteractionMode::FullFwm => {
            for nn in 0..n {
                for mm in 0..n {
                    for pp in 0..n {
                        for qq in 0..n {
                            let amp = interaction_amplitude(nn, mm, pp, qq, params);
                            if amp.norm_sqr() == 0.0 {
                                continue;
                            }
                            let term = &adag[nn] * &adag[mm] * &a[pp] * &a[qq];
                            h += term * amp;
                        }
                    }
                }
            }
        }
        InteractionMode::LocalLimit => {
            let g = params.interaction;
            for mm in 0..n {
                let quad = &adag[mm] * &adag[mm] * &a[mm] * &a[mm];
                h += quad * Complex64::new(-0.5 * g, 0.0);
            }
            for mm in 0..n {
                for nn in 0..n {
                    if mm == nn {
                        continue;
                    }
                    let term = &adag[mm] * &a[mm] * &adag[nn] * &a[nn];
                    h += term * Complex64::new(-g, 0.0);
                }
            }
        }
        InteractionMode::LocalGauge => {
            let g = params.interaction;
            for mm in 0..n {
                let quad = &adag[mm] * &adag[mm] * &a[mm] * &a[mm];
                h += quad * Complex64::new(0.5 * g, 0.0);
            }
        }
    }
    Ok(h)
}

/// The fixed-photon-number block of the oracle Hamiltonian.
pub fn oracle_sector_hamiltonian(params: &ModelParams, mixed: &MixedBasis) -> Result<Mat<Complex64>> {
    let full = oracle_mixed_hamiltonian(params, mixed)?;
    let k = params.n_photons;
    let off = mixed.offset(k);
    let dim = mixed.sector(k).dim();
    Ok(Mat::from_fn(dim, dim, |i, j| full[(off + i, off + j)]))
}

/// Total photon number operator Σ â†â on the mixed space.
pub fn oracle_number_operator(mixed: &MixedBasis) -> Result<Mat<Complex64>> {
    let n = mixed.n_modes();
    let d = mixed.dim();
    let mut out = Mat::<Complex64>::zeros(d, d);
    for m in 0..n {
        let a = mixed_annihilator(mixed, m)?;
        out += a.adjoint() * &a;
    }
    Ok(out)
}

pub fn max_abs_diff(a: &Mat<Complex64>, b: &Mat<Complex64>) -> f64 {
    let mut max = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            max = max.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    max
}

pub fn commutator_norm(a: &Mat<Complex64>, b: &Mat<Complex64>) -> f64 {
    let ab = a * b;
    let ba = b * a;
    max_abs_diff(&ab, &ba)
}

/// Standard normal via Box–Muller (test-only; avoids a wider RNG dependency).
pub fn standard_normal<R: rand::Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// GOE sample: (G + Gᵀ)/2 with i.i.d. standard normal entries.
pub fn sample_goe<R: rand::Rng>(rng: &mut R, dim: usize) -> Mat<Complex64> {
    let g: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| standard_normal(rng)).collect())
        .collect();
    Mat::from_fn(dim, dim, |i, j| {
        Complex64::new(0.5 * (g[i][j] + g[j][i]), 0.0)
    })
}

// ---------------------------------------------------------------------------
// Symbolic two-beam-splitter expansion
// ---------------------------------------------------------------------------

/// A multiset of (port, frequency) photon labels; the key of one creation monomial.
pub type Ket = Vec<(u8, usize)>;

/// Polynomial of creation monomials applied to vacuum: Σ c · ∏ â†|0⟩.
#[derive(Debug, Clone, Default)]
pub struct CreationPoly {
    pub terms: HashMap<Ket, Complex64>,
}

impl CreationPoly {
    pub fn single(ket: Ket, coeff: Complex64) -> Self {
        let mut terms = HashMap::new();
        terms.insert(canonical(ket), coeff);
        Self { terms }
    }

    fn add(&mut self, ket: Ket, coeff: Complex64) {
        *self
            .terms
            .entry(canonical(ket))
            .or_insert(Complex64::new(0.0, 0.0)) += coeff;
    }

    /// Rewrite every photon label through a one-photon linear map.
    pub fn map_photons<F>(&self, f: F) -> Self
    where
        F: Fn(u8, usize) -> Vec<((u8, usize), Complex64)>,
    {
        let mut out = CreationPoly::default();
        for (ket, &coeff) in &self.terms {
            // expand the product over photons
            let mut partial: Vec<(Ket, Complex64)> = vec![(Vec::new(), coeff)];
            for &(port, freq) in ket {
                let images = f(port, freq);
                let mut next = Vec::with_capacity(partial.len() * images.len());
                for (prefix, c) in &partial {
                    for (label, amp) in &images {
                        let mut k = prefix.clone();
                        k.push(*label);
                        next.push((k, c * amp));
                    }
                }
                partial = next;
            }
            for (k, c) in partial {
                out.add(k, c);
            }
        }
        out
    }

    /// Probability of detecting the normalized outcome with the given photon
    /// content: |coeff|² · ∏ occupation! .
    pub fn outcome_probability(&self, outcome: Ket) -> f64 {
        let key = canonical(outcome);
        let coeff = match self.terms.get(&key) {
            Some(c) => *c,
            None => return 0.0,
        };
        let mut mult: HashMap<(u8, usize), u32> = HashMap::new();
        for label in &key {
            *mult.entry(*label).or_insert(0) += 1;
        }
        let factorials: f64 = mult
            .values()
            .map(|&k| (1..=k).map(f64::from).product::<f64>())
            .product();
        coeff.norm_sqr() * factorials
    }
}

fn canonical(mut ket: Ket) -> Ket {
    ket.sort_unstable();
    ket
}

pub mod ports {
    pub const IN: u8 = 0;
    pub const U: u8 = 1;
    pub const RING: u8 = 2; // reflected arm between the splitters
    pub const DELAY: u8 = 3; // transmitted arm between the splitters
    pub const DET_R: u8 = 4;
    pub const DET_T: u8 = 5;
}

/// Full symbolic run of the interferometer for input frequencies (α, β) at
/// delay δ, given the one- and two-photon ring evolution matrices in the mode
/// basis (u1[to][from], u2[pair-to][pair-from] over α ≤ β pairs with bosonic
/// normalization). Returns the final creation polynomial over detector ports.
#[allow(clippy::too_many_arguments)]
pub fn symbolic_protocol_state(
    n_modes: usize,
    alpha: usize,
    beta: usize,
    delta: f64,
    u1: &Mat<Complex64>,
    u2: &Mat<Complex64>,
    pair_index: &dyn Fn(usize, usize) -> usize,
) -> CreationPoly {
    use ports::*;
    let half = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);

    // input: â†_in(α) â†_u(β) |0⟩
    let state = CreationPoly::single(vec![(IN, alpha), (U, beta)], Complex64::new(1.0, 0.0));

    // first splitter: in → (ring + delay)/√2, u → (ring − delay)/√2
    let state = state.map_photons(|port, freq| match port {
        IN => vec![((RING, freq), half), ((DELAY, freq), half)],
        U => vec![((RING, freq), half), ((DELAY, freq), -half)],
        other => vec![(((other), freq), Complex64::new(1.0, 0.0))],
    });

    // evolution: ring pairs via u2, ring singles via u1, delay photons by e^{iδ}
    let phase = Complex64::from_polar(1.0, delta);
    let mut evolved = CreationPoly::default();
    for (ket, &coeff) in &state.terms {
        let ring: Vec<usize> = ket
            .iter()
            .filter(|(p, _)| *p == RING)
            .map(|&(_, f)| f)
            .collect();
        let delay: Vec<usize> = ket
            .iter()
            .filter(|(p, _)| *p == DELAY)
            .map(|&(_, f)| f)
            .collect();
        match ring.len() {
            0 => {
                let ket2: Ket = delay.iter().map(|&f| (DELAY, f)).collect();
                evolved.add(ket2, coeff * phase * phase);
            }
            1 => {
                let from = ring[0];
                for to in 0..n_modes {
                    let amp = u1[(to, from)];
                    if amp.norm_sqr() == 0.0 {
                        continue;
                    }
                    let mut ket2: Ket = vec![(RING, to)];
                    ket2.extend(delay.iter().map(|&f| (DELAY, f)));
                    evolved.add(ket2, coeff * amp * phase);
                }
            }
            2 => {
                // unnormalized â†â†|0⟩ carries √(1+δ) relative to the pair ket
                let (f1, f2) = (ring[0].min(ring[1]), ring[0].max(ring[1]));
                let from_norm = if f1 == f2 { 2.0f64.sqrt() } else { 1.0 };
                let from_idx = pair_index(f1, f2);
                for t1 in 0..n_modes {
                    for t2 in t1..n_modes {
                        let amp = u2[(pair_index(t1, t2), from_idx)];
                        if amp.norm_sqr() == 0.0 {
                            continue;
                        }
                        let to_norm = if t1 == t2 { 2.0f64.sqrt() } else { 1.0 };
                        let ket2: Ket = vec![(RING, t1), (RING, t2)];
                        evolved.add(ket2, coeff * amp * from_norm / to_norm);
                    }
                }
            }
            _ => unreachable!("two-photon protocol"),
        }
    }

    // second splitter: ring → (R + T)/√2, delay → (R − T)/√2
    evolved.map_photons(|port, freq| match port {
        RING => vec![((DET_R, freq), half), ((DET_T, freq), half)],
        DELAY => vec![((DET_R, freq), half), ((DET_T, freq), -half)],
        other => vec![((other, freq), Complex64::new(1.0, 0.0))],
    })
}
