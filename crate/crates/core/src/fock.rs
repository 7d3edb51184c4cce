//! Bosonic Fock basis at fixed photon number and ladder-operator matrix elements.
//!
//! The basis enumerates all occupation vectors of `N` modes summing to `p`,
//! in lexicographically descending order, so state 0 is always `(p, 0, …, 0)`.
//! The dimension is `binomial(N + p - 1, p)`. Enumeration is capped (default
//! [`DEFAULT_MAX_DIM`]) and refuses oversized spaces rather than truncating.
//!
//! Matrix elements of normally ordered ladder monomials `â†_{n₁}…â†_{nk} â_{m₁}…â_{ml}`
//! follow from `â_n|ν⟩ = √ν_n |ν - 1_n⟩`, `â†_n|ν⟩ = √(ν_n + 1)|ν + 1_n⟩`.

use std::collections::HashMap;

use crate::error::{Result, SynthDimError};

/// Default cap on the Fock-space dimension.
pub const DEFAULT_MAX_DIM: usize = 100_000;

/// Occupation-number basis for `n_modes` bosonic modes at exactly `n_photons` photons.
#[derive(Debug, Clone)]
pub struct FockBasis {
    n_modes: usize,
    n_photons: usize,
    states: Vec<Vec<u8>>,
    index_of: HashMap<Vec<u8>, usize>,
}

/// `binomial(n + k - 1, k)`, the number of occupation vectors, without overflow.
pub fn fock_dimension(n_modes: usize, n_photons: usize) -> u128 {
    // binomial(N + p - 1, p) computed multiplicatively in u128
    let n = (n_modes + n_photons - 1) as u128;
    let k = n_photons as u128;
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

impl FockBasis {
    /// Enumerate the basis with the default capacity limit.
    pub fn new(n_modes: usize, n_photons: usize) -> Result<Self> {
        Self::with_limit(n_modes, n_photons, DEFAULT_MAX_DIM)
    }

    /// Enumerate the basis, refusing dimensions above `max_dim`.
    pub fn with_limit(n_modes: usize, n_photons: usize, max_dim: usize) -> Result<Self> {
        if n_modes < 1 {
            return Err(SynthDimError::InvalidParams(
                "need at least one mode".into(),
            ));
        }
        if n_photons > u8::MAX as usize {
            return Err(SynthDimError::InvalidParams(format!(
                "photon number {n_photons} unsupported"
            )));
        }
        let dim = fock_dimension(n_modes, n_photons);
        if dim > max_dim as u128 {
            return Err(SynthDimError::CapacityExceeded {
                dim,
                limit: max_dim,
            });
        }

        let mut states = Vec::with_capacity(dim as usize);
        let mut current = vec![0u8; n_modes];
        enumerate_rec(&mut current, 0, n_photons as u8, &mut states);
        let index_of = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(Self {
            n_modes,
            n_photons,
            states,
            index_of,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Occupation vector of basis state `index`.
    pub fn state(&self, index: usize) -> &[u8] {
        &self.states[index]
    }

    pub fn states(&self) -> impl Iterator<Item = &[u8]> {
        self.states.iter().map(|s| s.as_slice())
    }

    /// Basis index of an occupation vector, if it belongs to this sector.
    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index_of.get(occ).copied()
    }

    /// Index of the Fock state with single occupations at the given modes
    /// (repeats allowed: `&[n, n]` is the doubly occupied mode `n`).
    pub fn index_of_modes(&self, modes: &[usize]) -> Result<usize> {
        let mut occ = vec![0u8; self.n_modes];
        for &m in modes {
            if m >= self.n_modes {
                return Err(SynthDimError::ModeOutOfRange {
                    mode: m,
                    n_modes: self.n_modes,
                });
            }
            occ[m] += 1;
        }
        self.index_of(&occ)
            .ok_or_else(|| SynthDimError::BasisMismatch("photon count mismatch".into()))
    }

    /// Apply a normally ordered ladder monomial to basis state `col`.
    ///
    /// Returns the unique nonzero column entry `(row, amplitude)` of the
    /// monomial's matrix, or `None` if an annihilator hits an empty mode or
    /// the monomial leaves the photon-number sector.
    pub fn monomial_matrix_element(
        &self,
        mono: &LadderMonomial,
        col: usize,
    ) -> Result<Option<(usize, f64)>> {
        if col >= self.dim() {
            return Err(SynthDimError::IndexOutOfRange {
                index: col,
                dim: self.dim(),
            });
        }
        mono.check_modes(self.n_modes)?;

        let mut occ = self.states[col].clone();
        let mut amp = 1.0f64;
        // rightmost operator acts first
        for &m in mono.annihilators.iter().rev() {
            if occ[m] == 0 {
                return Ok(None);
            }
            amp *= f64::from(occ[m]).sqrt();
            occ[m] -= 1;
        }
        for &m in mono.creators.iter().rev() {
            amp *= f64::from(occ[m] + 1).sqrt();
            occ[m] += 1;
        }
        match self.index_of(&occ) {
            Some(row) => Ok(Some((row, amp))),
            // photon number left the sector (unbalanced monomial)
            None => Ok(None),
        }
    }

    /// Per-mode occupations of state `index` as floats (for diagonal operators).
    pub fn occupations_f64(&self, index: usize) -> impl Iterator<Item = f64> + '_ {
        self.states[index].iter().map(|&o| f64::from(o))
    }
}

fn enumerate_rec(current: &mut [u8], mode: usize, remaining: u8, out: &mut Vec<Vec<u8>>) {
    if mode == current.len() - 1 {
        current[mode] = remaining;
        out.push(current.to_vec());
        return;
    }
    // descending occupation of the current mode gives lexicographic descending order
    for occ in (0..=remaining).rev() {
        current[mode] = occ;
        enumerate_rec(current, mode + 1, remaining - occ, out);
    }
    current[mode] = 0;
}

/// A normally ordered product of ladder operators: all creators to the left of
/// all annihilators. Mode indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LadderMonomial {
    pub creators: Vec<usize>,
    pub annihilators: Vec<usize>,
}

impl LadderMonomial {
    pub fn new(creators: Vec<usize>, annihilators: Vec<usize>) -> Self {
        Self {
            creators,
            annihilators,
        }
    }

    /// Number operator n̂_m.
    pub fn number(mode: usize) -> Self {
        Self::new(vec![mode], vec![mode])
    }

    /// Hopping â†_dst â_src.
    pub fn hop(dst: usize, src: usize) -> Self {
        Self::new(vec![dst], vec![src])
    }

    fn check_modes(&self, n_modes: usize) -> Result<()> {
        for &m in self.creators.iter().chain(self.annihilators.iter()) {
            if m >= n_modes {
                return Err(SynthDimError::ModeOutOfRange { mode: m, n_modes });
            }
        }
        Ok(())
    }
}
