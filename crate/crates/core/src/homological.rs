//! The operator `ρ: g ↦ α(X_g)`, a Hadamard multiplier with symbol
//! `-i<φ, I>`, and its truncated quasi-inverses `h_k` with symbol
//! `<φ, I>^{-1}` on `0 < |I|_1 <= 2^k`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{
    for_each_in_ball, sigma_profile, tau_for_frequency, FrequencyVector, LatticeNorm, SigmaOptions,
};
use crate::error::{KamError, Result};
use crate::symplectic::{SymplecticFieldDecomposition, SymplecticParameters};
use crate::torus::{MultiIndex, RelativeOneForm, Scale, TrigPolynomial};

/// Divisors below this magnitude are reported as resonances.
pub const DEFAULT_DIVISOR_FLOOR: f64 = 1e-14;

/// Truncation degree `2^k` of the level-`k` quasi-inverse.
pub fn truncation_degree(k: u32) -> Result<u64> {
    if k >= 40 {
        return Err(KamError::InvalidParameter(format!("truncation level {k} is too large")));
    }
    Ok(1u64 << k)
}

/// Small divisors `<φ, I>` for `0 < |I|_1 <= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisorSpectrum {
    frequency: FrequencyVector,
    entries: BTreeMap<MultiIndex, f64>,
}

impl DivisorSpectrum {
    pub fn new(frequency: &FrequencyVector, bound: u64) -> Self {
        let w = frequency.entries();
        let mut entries = BTreeMap::new();
        for_each_in_ball(w.len(), bound, LatticeNorm::L1, |i, _| {
            let index = MultiIndex::new(i.to_vec());
            if !index.is_zero() {
                let d = index.dot(w);
                entries.insert(index, d);
            }
        });
        DivisorSpectrum {
            frequency: frequency.clone(),
            entries,
        }
    }

    pub fn frequency(&self) -> &FrequencyVector {
        &self.frequency
    }

    pub fn entries(&self) -> &BTreeMap<MultiIndex, f64> {
        &self.entries
    }

    /// Smallest `|<φ, I>|` and the first mode attaining it.
    pub fn smallest(&self) -> Option<(MultiIndex, f64)> {
        self.entries
            .iter()
            .map(|(i, d)| (i, d.abs()))
            .fold(None, |best: Option<(&MultiIndex, f64)>, (i, d)| match best {
                Some((_, b)) if b <= d => best,
                _ => Some((i, d)),
            })
            .map(|(i, d)| (i.clone(), d))
    }
}

/// `ρ(g) = α(X_g)`: coefficientwise `c_I ↦ -i<φ, I> c_I`.
pub fn rho(g: &TrigPolynomial, phi: &FrequencyVector) -> Result<TrigPolynomial> {
    if g.dim() != phi.dim() {
        return Err(KamError::DimensionMismatch {
            expected: phi.dim(),
            found: g.dim(),
        });
    }
    let w = phi.entries();
    Ok(g.hadamard_with(|i| Complex64::new(0.0, -i.dot(w))))
}

/// `h_k ⋆ f`: divides `c_I` by `<φ, I>` for `0 < |I|_1 <= 2^k` and drops
/// every other mode.
pub fn h_k(f: &TrigPolynomial, k: u32, phi: &FrequencyVector, divisor_floor: f64) -> Result<TrigPolynomial> {
    if f.dim() != phi.dim() {
        return Err(KamError::DimensionMismatch {
            expected: phi.dim(),
            found: f.dim(),
        });
    }
    let bound = truncation_degree(k)?;
    let w = phi.entries();
    let mut terms = Vec::new();
    for (i, c) in f.terms() {
        let deg = i.l1_norm();
        if deg == 0 || deg > bound {
            continue;
        }
        let d = i.dot(w);
        if !(d.abs() >= divisor_floor) {
            return Err(KamError::Resonance {
                witness: i.clone(),
                divisor: d,
                floor: divisor_floor,
            });
        }
        terms.push((i.clone(), c / d));
    }
    TrigPolynomial::from_terms(f.dim(), terms)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiInverseNorm {
    pub k: u32,
    /// Operator norm of `h_k` on the scale-`s` majorant space.
    pub norm: f64,
    pub witness: MultiIndex,
    /// `Σ_{j<=k} ln(1/σ_j)/2^j`.
    pub tamedness_partial_sums: Vec<f64>,
}

/// Operator norm of `h_k` in the weighted-ℓ1 norm at scale `s`.
///
/// A diagonal multiplier on a weighted-ℓ1 space has norm equal to the
/// largest multiplier, so the norm is `max 1/|<φ, I>|` over the spectrum,
/// independent of `s`.
pub fn operator_norm_h(
    k: u32,
    phi: &FrequencyVector,
    _s: Scale,
    divisor_floor: f64,
    opts: &SigmaOptions,
) -> Result<QuasiInverseNorm> {
    let spectrum = DivisorSpectrum::new(phi, truncation_degree(k)?);
    let (witness, smallest) = spectrum
        .smallest()
        .ok_or_else(|| KamError::InvalidParameter("empty divisor spectrum".into()))?;
    if !(smallest >= divisor_floor) {
        let divisor = spectrum.entries()[&witness];
        return Err(KamError::Resonance {
            witness,
            divisor,
            floor: divisor_floor,
        });
    }
    let norm = spectrum
        .entries()
        .values()
        .map(|d| 1.0 / d.abs())
        .fold(0.0, f64::max);

    let sigmas = sigma_profile(phi, k, &SigmaOptions { norm: LatticeNorm::L1, ..*opts })?;
    let tamedness_partial_sums = sigmas
        .iter()
        .scan(0.0, |acc, s| {
            *acc += (1.0 / s.value).ln() / 2f64.powi(s.k as i32);
            Some(*acc)
        })
        .collect();
    Ok(QuasiInverseNorm {
        k,
        norm,
        witness,
        tamedness_partial_sums,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomologicalSolution {
    pub decomposition: SymplecticFieldDecomposition,
    pub truncation_level: u32,
    /// Part of the right-hand side left unsolved: its modes with
    /// `|I|_1 > 2^k`, coefficients unchanged.
    pub residual: RelativeOneForm,
}

/// Solves `L_{X_g} α + Σ m_k dx_k = R` up to modes above `2^k`.
///
/// `R` splits as `m + dG`; the counterterm is `m` and the potential is
/// `g = i h_k(G)`, so that `ρ(g)` reproduces `G` on `0 < |I|_1 <= 2^k`.
pub fn solve(
    rhs: &RelativeOneForm,
    k: u32,
    phi: &FrequencyVector,
    delta: &SymplecticParameters,
    tol: f64,
    divisor_floor: f64,
) -> Result<HomologicalSolution> {
    if rhs.dim() != phi.dim() || rhs.dim() != 2 * delta.half_dim() {
        return Err(KamError::DimensionMismatch {
            expected: phi.dim(),
            found: rhs.dim(),
        });
    }
    let (mean, primitive) = rhs.mean_exact_split(tol)?;
    let potential = h_k(&primitive, k, phi, divisor_floor)?.scaled(Complex64::new(0.0, 1.0));
    let (_, residual) = rhs.split_at_degree(truncation_degree(k)?);
    Ok(HomologicalSolution {
        decomposition: SymplecticFieldDecomposition {
            potential,
            counterterm: mean,
        },
        truncation_level: k,
        residual,
    })
}

/// `Σ τ_k dx_k` for the parameters with frequency `φ` and form `δ`.
pub fn standard_form(phi: &FrequencyVector, delta: &SymplecticParameters) -> Result<RelativeOneForm> {
    RelativeOneForm::constant_real(&tau_for_frequency(phi, delta.delta())?)
}
