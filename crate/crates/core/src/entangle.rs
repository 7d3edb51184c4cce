//! Frequency-entanglement diagnostics.
//!
//! * Degree of independence 𝒟 = Σ_n P_nn / Σ_n P_n²: exactly 1 for two
//!   independent photons, 2 for the diagonal Bell pair (|ω₁ω₁⟩+|ω_Nω_N⟩)/√2,
//!   0 for purely anti-correlated pairs.
//! * Weighted DI 𝒟̄ = Σ_n P_nn·|n − n_c| / Σ_n P_nn with n_c the lattice
//!   center: diagonal spread toward the maximally frequency-separated pair.
//! * Photon entanglement entropy S_ph: von Neumann entropy of the Schmidt
//!   decomposition of the symmetric two-photon amplitude C (eigenvalues of
//!   C·C†). Identical-particle caveat: a symmetrized product â†_nâ†_m|0⟩
//!   carries S_ph = ln 2 by this construction; we follow that convention
//!   rather than subtracting the exchange contribution.
//! * Half-chain entropy S_sp: von Neumann entropy of the reduced density
//!   operator after tracing out the modes right of a cut.
//!
//! All entropies use the natural logarithm.

use std::collections::HashMap;

use faer::Mat;
use num_complex::Complex64;

use crate::dynamics::{StateVector, TwoPhotonProbabilities};
use crate::error::{Result, SynthDimError};

/// 𝒟 = Σ_n P_nn / Σ_n P_n². Inputs are rescaled by the total pair weight, so
/// the value matches the normalized state regardless of uniform damping.
pub fn degree_of_independence(probs: &TwoPhotonProbabilities) -> Result<f64> {
    let total = probs.total();
    if total <= 0.0 {
        return Err(SynthDimError::Domain(
            "degree of independence undefined for zero weight".into(),
        ));
    }
    let num: f64 = probs.diagonal_sum() / total;
    let den: f64 = probs
        .marginals
        .iter()
        .map(|p| (p / total).powi(2))
        .sum();
    if den <= 0.0 {
        return Err(SynthDimError::Domain(
            "degree of independence undefined: zero marginals".into(),
        ));
    }
    Ok(num / den)
}

/// 𝒟̄ = Σ_n P_nn·|n − (N+1)/2| / Σ_n P_nn (1-based n; |ω_n − ω₀| in units of Ω₀).
pub fn weighted_di(probs: &TwoPhotonProbabilities) -> Result<f64> {
    let n = probs.n_modes;
    let center = (n as f64 - 1.0) / 2.0; // 0-based center
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let p = probs.get(i, i);
        num += p * (i as f64 - center).abs();
        den += p;
    }
    if den <= 0.0 {
        return Err(SynthDimError::ZeroDiagonalWeight);
    }
    Ok(num / den)
}

/// Mean and sample standard deviation over the trailing `window` fraction.
pub fn stable_value(series: &[f64], window: f64) -> Result<(f64, f64)> {
    if series.is_empty() || !(window > 0.0 && window <= 1.0) {
        return Err(SynthDimError::EmptyWindow);
    }
    let count = ((series.len() as f64 * window).ceil() as usize).max(1);
    let tail = &series[series.len() - count..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let std = if tail.len() > 1 {
        (tail.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (tail.len() as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok((mean, std))
}

/// Symmetric two-photon amplitude C_ij with unit Frobenius norm:
/// |Ψ⟩ = Σ_ij C_ij |i⟩⊗|j⟩, C_ij = C_ji.
#[derive(Debug, Clone)]
pub struct TwoPhotonAmplitude {
    psi: Mat<Complex64>,
}

impl TwoPhotonAmplitude {
    /// Build from a two-photon Fock state: C_nn = c(|2_n⟩), C_nm = c(|1_n1_m⟩)/√2.
    pub fn from_state(state: &StateVector) -> Result<Self> {
        let basis = state.basis();
        if basis.n_photons() != 2 {
            return Err(SynthDimError::WrongSector {
                expected: 2,
                actual: basis.n_photons(),
            });
        }
        let n = basis.n_modes();
        let inv_sqrt2 = Complex64::new(1.0 / 2.0f64.sqrt(), 0.0);
        let mut psi = Mat::<Complex64>::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let c = state.amplitudes()[basis.index_of_modes(&[a, b])?];
                if a == b {
                    psi[(a, a)] = c;
                } else {
                    psi[(a, b)] = c * inv_sqrt2;
                    psi[(b, a)] = c * inv_sqrt2;
                }
            }
        }
        Self::from_matrix(psi)
    }

    /// Wrap and normalize a symmetric matrix; rejects non-symmetric input.
    pub fn from_matrix(psi: Mat<Complex64>) -> Result<Self> {
        let n = psi.nrows();
        if psi.ncols() != n {
            return Err(SynthDimError::Domain("amplitude matrix must be square".into()));
        }
        let mut scale = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                scale = scale.max(psi[(i, j)].norm());
            }
        }
        if scale == 0.0 {
            return Err(SynthDimError::Domain("zero two-photon amplitude".into()));
        }
        for j in 0..n {
            for i in 0..j {
                if (psi[(i, j)] - psi[(j, i)]).norm() > 1e-10 * scale {
                    return Err(SynthDimError::Domain(
                        "two-photon amplitude must be symmetric".into(),
                    ));
                }
            }
        }
        let frob: f64 = (0..n)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .map(|(i, j)| psi[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        let mut normalized = psi;
        for j in 0..n {
            for i in 0..n {
                normalized[(i, j)] /= frob;
            }
        }
        Ok(Self { psi: normalized })
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.psi
    }
}

/// Schmidt entropy S_ph = −Σ λ_k ln λ_k with λ_k the eigenvalues of C·C†.
pub fn photon_entanglement_entropy(amp: &TwoPhotonAmplitude) -> f64 {
    let rho = amp.psi.as_ref() * amp.psi.adjoint();
    entropy_of_hermitian(&rho)
}

/// Half-chain entropy after tracing out modes `cut..N` (left block = 0..cut).
pub fn half_chain_entropy(state: &StateVector, cut: usize) -> Result<f64> {
    let basis = state.basis();
    let n = basis.n_modes();
    if cut == 0 || cut >= n {
        return Err(SynthDimError::ModeOutOfRange {
            mode: cut,
            n_modes: n,
        });
    }
    let normalized = state.normalized()?;

    // group amplitudes as M[left pattern, right pattern]
    let mut left_index: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut right_index: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();
    for (k, &c) in normalized.amplitudes().iter().enumerate() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let occ = basis.state(k);
        let (l, r) = occ.split_at(cut);
        let next_l = left_index.len();
        let li = *left_index.entry(l.to_vec()).or_insert(next_l);
        let next_r = right_index.len();
        let ri = *right_index.entry(r.to_vec()).or_insert(next_r);
        entries.push((li, ri, c));
    }
    let (nl, nr) = (left_index.len(), right_index.len());
    let mut m = Mat::<Complex64>::zeros(nl, nr);
    for (li, ri, c) in entries {
        m[(li, ri)] = c;
    }
    let rho_a = &m * m.adjoint();
    Ok(entropy_of_hermitian(&rho_a))
}

fn entropy_of_hermitian(rho: &Mat<Complex64>) -> f64 {
    let evd = rho
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigendecomposition of a small Hermitian matrix");
    let s = evd.S();
    let mut entropy = 0.0;
    for k in 0..rho.nrows() {
        let lambda = s[k].re;
        if lambda > 1e-300 {
            entropy -= lambda * lambda.ln();
        }
    }
    entropy
}

/// Three-photon detection probabilities P_nmk, stored per unordered triple.
///
/// P_nmk = |⟨0|â_n â_m â_k|Ψ⟩|² / ∏_j ν_j! where ν is the occupation multiset
/// of the index triple (the generalization of the two-photon 1+δ_nm divisor),
/// which reduces to the squared Fock amplitude; the tensor is fully symmetric
/// and sums to the squared norm over unordered triples.
#[derive(Debug, Clone)]
pub struct CorrelationTensor3 {
    n_modes: usize,
    entries: HashMap<(usize, usize, usize), f64>,
}

impl CorrelationTensor3 {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Symmetric accessor (indices in any order).
    pub fn get(&self, n: usize, m: usize, k: usize) -> f64 {
        let mut idx = [n, m, k];
        idx.sort_unstable();
        self.entries
            .get(&(idx[0], idx[1], idx[2]))
            .copied()
            .unwrap_or(0.0)
    }

    /// Entries over sorted triples n ≤ m ≤ k.
    pub fn sorted_entries(&self) -> Vec<((usize, usize, usize), f64)> {
        let mut v: Vec<_> = self.entries.iter().map(|(&k, &p)| (k, p)).collect();
        v.sort_by_key(|&(k, _)| k);
        v
    }

    /// Σ over unordered triples; equals the squared norm of the state.
    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }
}

/// Three-photon correlation tensor of a p = 3 state.
pub fn three_photon_correlation(state: &StateVector) -> Result<CorrelationTensor3> {
    let basis = state.basis();
    if basis.n_photons() != 3 {
        return Err(SynthDimError::WrongSector {
            expected: 3,
            actual: basis.n_photons(),
        });
    }
    let mut entries = HashMap::new();
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        let occ = basis.state(idx);
        let mut modes = Vec::with_capacity(3);
        for (i, &o) in occ.iter().enumerate() {
            for _ in 0..o {
                modes.push(i);
            }
        }
        let p = amp.norm_sqr();
        entries.insert((modes[0], modes[1], modes[2]), p);
    }
    Ok(CorrelationTensor3 {
        n_modes: basis.n_modes(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{initial_fock, initial_gaussian_pair, two_photon_probabilities};
    use crate::fock::FockBasis;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::prelude::*;
    use std::sync::Arc;

    fn basis(n: usize, p: usize) -> Arc<FockBasis> {
        Arc::new(FockBasis::new(n, p).unwrap())
    }

    fn bell_pair(n: usize) -> StateVector {
        let b = basis(n, 2);
        let mut amps = vec![Complex64::new(0.0, 0.0); b.dim()];
        let lo = b.index_of_modes(&[0, 0]).unwrap();
        let hi = b.index_of_modes(&[n - 1, n - 1]).unwrap();
        let w = Complex64::new(1.0 / 2.0f64.sqrt(), 0.0);
        amps[lo] = w;
        amps[hi] = w;
        StateVector::new(b, amps).unwrap()
    }

    #[test]
    fn di_reference_values() {
        // independent photons uniform over 2 modes
        let b = basis(2, 2);
        let product = initial_gaussian_pair(&b, 1e6, 0).unwrap();
        let p = two_photon_probabilities(&product).unwrap();
        assert_abs_diff_eq!(degree_of_independence(&p).unwrap(), 1.0, epsilon = 1e-9);

        // diagonal Bell pair
        let p = two_photon_probabilities(&bell_pair(5)).unwrap();
        assert_abs_diff_eq!(degree_of_independence(&p).unwrap(), 2.0, epsilon = 1e-12);

        // anti-correlated pair has no diagonal weight
        let b = basis(2, 2);
        let s = initial_fock(&b, &[1, 1]).unwrap();
        let p = two_photon_probabilities(&s).unwrap();
        assert_abs_diff_eq!(degree_of_independence(&p).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn di_is_invariant_under_uniform_damping() {
        let state = bell_pair(4);
        let p = two_photon_probabilities(&state).unwrap();
        let damped = StateVector::new(
            Arc::clone(state.basis()),
            state.amplitudes().iter().map(|a| a * 0.3).collect(),
        )
        .unwrap();
        let pd = two_photon_probabilities(&damped).unwrap();
        assert_abs_diff_eq!(
            degree_of_independence(&p).unwrap(),
            degree_of_independence(&pd).unwrap(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            weighted_di(&p).unwrap(),
            weighted_di(&pd).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn weighted_di_reference_values() {
        // all diagonal weight on the center mode
        let b = basis(21, 2);
        let s = initial_fock(&b, &{
            let mut occ = vec![0u8; 21];
            occ[10] = 2;
            occ
        })
        .unwrap();
        let p = two_photon_probabilities(&s).unwrap();
        assert_abs_diff_eq!(weighted_di(&p).unwrap(), 0.0, epsilon = 1e-12);

        // maximally separated Bell pair at N = 21
        let p = two_photon_probabilities(&bell_pair(21)).unwrap();
        assert_abs_diff_eq!(weighted_di(&p).unwrap(), 10.0, epsilon = 1e-12);

        // uniform diagonal over N = 3: (1 + 0 + 1)/3
        let b = basis(3, 2);
        let mut amps = vec![Complex64::new(0.0, 0.0); b.dim()];
        let w = Complex64::new(1.0 / 3.0f64.sqrt(), 0.0);
        for n in 0..3 {
            amps[b.index_of_modes(&[n, n]).unwrap()] = w;
        }
        let s = StateVector::new(b, amps).unwrap();
        let p = two_photon_probabilities(&s).unwrap();
        assert_abs_diff_eq!(weighted_di(&p).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn weighted_di_rejects_zero_diagonal() {
        let b = basis(2, 2);
        let s = initial_fock(&b, &[1, 1]).unwrap();
        let p = two_photon_probabilities(&s).unwrap();
        assert!(matches!(
            weighted_di(&p),
            Err(SynthDimError::ZeroDiagonalWeight)
        ));
    }

    #[test]
    fn stable_value_reference_behavior() {
        let constant = vec![3.5; 40];
        let (mean, std) = stable_value(&constant, 0.25).unwrap();
        assert_abs_diff_eq!(mean, 3.5, epsilon = 1e-15);
        assert_abs_diff_eq!(std, 0.0, epsilon = 1e-15);

        let n = 10_000;
        let sine: Vec<f64> = (0..n)
            .map(|i| (i as f64 / n as f64 * 200.0 * std::f64::consts::PI).sin())
            .collect();
        let (mean, _) = stable_value(&sine, 1.0).unwrap();
        assert!(mean.abs() < 1e-2, "sine mean {mean}");

        assert!(stable_value(&[], 0.5).is_err());
        assert!(stable_value(&constant, 0.0).is_err());
    }

    #[test]
    fn schmidt_entropy_reference_values() {
        // doubly occupied mode: rank one
        let b = basis(4, 2);
        let s = initial_fock(&b, &[0, 2, 0, 0]).unwrap();
        let amp = TwoPhotonAmplitude::from_state(&s).unwrap();
        assert_abs_diff_eq!(photon_entanglement_entropy(&amp), 0.0, epsilon = 1e-12);

        // diagonal Bell pair: ln 2
        let amp = TwoPhotonAmplitude::from_state(&bell_pair(4)).unwrap();
        assert_abs_diff_eq!(
            photon_entanglement_entropy(&amp),
            2.0f64.ln(),
            epsilon = 1e-12
        );

        // symmetrized product â†_0 â†_1 |0⟩: exchange contribution ln 2
        let b = basis(2, 2);
        let s = initial_fock(&b, &[1, 1]).unwrap();
        let amp = TwoPhotonAmplitude::from_state(&s).unwrap();
        assert_abs_diff_eq!(
            photon_entanglement_entropy(&amp),
            2.0f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn schmidt_entropy_bounded_by_ln_n() {
        let mut rng = StdRng::seed_from_u64(23);
        let n = 6;
        let b = basis(n, 2);
        for _ in 0..20 {
            let amps: Vec<Complex64> = (0..b.dim())
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let s = StateVector::new(Arc::clone(&b), amps).unwrap().normalized().unwrap();
            let amp = TwoPhotonAmplitude::from_state(&s).unwrap();
            let e = photon_entanglement_entropy(&amp);
            assert!(e >= -1e-12 && e <= (n as f64).ln() + 1e-12, "S_ph = {e}");
        }
    }

    #[test]
    fn non_symmetric_amplitude_is_rejected() {
        let mut m = Mat::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        m[(1, 0)] = Complex64::new(0.5, 0.0);
        assert!(TwoPhotonAmplitude::from_matrix(m).is_err());
    }

    #[test]
    fn half_chain_entropy_reference_values() {
        // product Fock state: zero at any cut
        let b = basis(4, 2);
        let s = initial_fock(&b, &[0, 1, 0, 1]).unwrap();
        for cut in 1..4 {
            assert_abs_diff_eq!(half_chain_entropy(&s, cut).unwrap(), 0.0, epsilon = 1e-12);
        }

        // (|2,0⟩ + |0,2⟩)/√2 across the cut: ln 2
        let s = bell_pair(2);
        assert_abs_diff_eq!(
            half_chain_entropy(&s, 1).unwrap(),
            2.0f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn half_chain_entropy_matches_dense_reshaping_oracle() {
        // oracle: dense bipartite matrix over all (left, right) patterns
        let mut rng = StdRng::seed_from_u64(31);
        let b = basis(4, 2);
        let amps: Vec<Complex64> = (0..b.dim())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let s = StateVector::new(Arc::clone(&b), amps).unwrap().normalized().unwrap();
        let cut = 2;

        // enumerate all left/right patterns with photon totals 0..=2
        let mut left_patterns = Vec::new();
        let mut right_patterns = Vec::new();
        for p in 0..=2usize {
            for lb in FockBasis::new(cut, p).unwrap().states() {
                left_patterns.push(lb.to_vec());
            }
            for rb in FockBasis::new(2, p).unwrap().states() {
                right_patterns.push(rb.to_vec());
            }
        }
        let mut m = Mat::<Complex64>::zeros(left_patterns.len(), right_patterns.len());
        for (k, &c) in s.amplitudes().iter().enumerate() {
            let occ = b.state(k);
            let li = left_patterns.iter().position(|p| p[..] == occ[..cut]).unwrap();
            let ri = right_patterns.iter().position(|p| p[..] == occ[cut..]).unwrap();
            m[(li, ri)] = c;
        }
        let rho = &m * m.adjoint();
        let oracle = entropy_of_hermitian(&rho);
        assert_abs_diff_eq!(
            half_chain_entropy(&s, cut).unwrap(),
            oracle,
            epsilon = 1e-10
        );
    }

    #[test]
    fn half_chain_entropy_invariant_under_within_side_permutation() {
        let mut rng = StdRng::seed_from_u64(57);
        let b = basis(5, 2);
        let amps: Vec<Complex64> = (0..b.dim())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let s = StateVector::new(Arc::clone(&b), amps).unwrap().normalized().unwrap();
        let cut = 2;
        let base = half_chain_entropy(&s, cut).unwrap();

        // permute modes 2..5 (right side): occupation remap 2->4, 3->2, 4->3
        let perm = [0usize, 1, 4, 2, 3];
        let mut permuted = vec![Complex64::new(0.0, 0.0); b.dim()];
        for (k, &c) in s.amplitudes().iter().enumerate() {
            let occ = b.state(k);
            let mut new_occ = vec![0u8; 5];
            for (i, &o) in occ.iter().enumerate() {
                new_occ[perm[i]] = o;
            }
            permuted[b.index_of(&new_occ).unwrap()] = c;
        }
        let sp = StateVector::new(Arc::clone(&b), permuted).unwrap();
        let after = half_chain_entropy(&sp, cut).unwrap();
        assert_abs_diff_eq!(base, after, epsilon = 1e-12);
    }

    #[test]
    fn metrics_invariant_under_mirror_reflection() {
        let mut rng = StdRng::seed_from_u64(77);
        let n = 5;
        let b = basis(n, 2);
        let amps: Vec<Complex64> = (0..b.dim())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let s = StateVector::new(Arc::clone(&b), amps).unwrap().normalized().unwrap();

        let mut mirrored = vec![Complex64::new(0.0, 0.0); b.dim()];
        for (k, &c) in s.amplitudes().iter().enumerate() {
            let occ = b.state(k);
            let rev: Vec<u8> = occ.iter().rev().copied().collect();
            mirrored[b.index_of(&rev).unwrap()] = c;
        }
        let sm = StateVector::new(Arc::clone(&b), mirrored).unwrap();

        let p = two_photon_probabilities(&s).unwrap();
        let pm = two_photon_probabilities(&sm).unwrap();
        assert_abs_diff_eq!(
            degree_of_independence(&p).unwrap(),
            degree_of_independence(&pm).unwrap(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            weighted_di(&p).unwrap(),
            weighted_di(&pm).unwrap(),
            epsilon = 1e-12
        );
        let a = TwoPhotonAmplitude::from_state(&s).unwrap();
        let am = TwoPhotonAmplitude::from_state(&sm).unwrap();
        assert_abs_diff_eq!(
            photon_entanglement_entropy(&a),
            photon_entanglement_entropy(&am),
            epsilon = 1e-12
        );
    }

    #[test]
    fn three_photon_reference_states() {
        let b = basis(3, 3);
        // (â†_0)³|0⟩/√6
        let s = initial_fock(&b, &[3, 0, 0]).unwrap();
        let t = three_photon_correlation(&s).unwrap();
        assert_abs_diff_eq!(t.get(0, 0, 0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.total(), 1.0, epsilon = 1e-12);
        // â†_0 â†_1 â†_2 |0⟩
        let s = initial_fock(&b, &[1, 1, 1]).unwrap();
        let t = three_photon_correlation(&s).unwrap();
        assert_abs_diff_eq!(t.get(2, 0, 1), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn three_photon_tensor_sums_to_norm_and_is_symmetric() {
        let mut rng = StdRng::seed_from_u64(19);
        let b = basis(3, 3);
        let amps: Vec<Complex64> = (0..b.dim())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let s = StateVector::new(Arc::clone(&b), amps).unwrap().normalized().unwrap();
        let t = three_photon_correlation(&s).unwrap();
        assert_abs_diff_eq!(t.total(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.get(0, 1, 2), t.get(2, 1, 0), epsilon = 1e-15);
        assert_abs_diff_eq!(t.get(1, 0, 0), t.get(0, 0, 1), epsilon = 1e-15);
    }
}
