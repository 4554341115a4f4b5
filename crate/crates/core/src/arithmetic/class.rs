use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sigma_profile, BrunoSequence, FrequencyVector, SigmaOptions, SigmaValue};
use crate::error::{KamError, Result};
use crate::torus::MultiIndex;

/// Which small-divisor indices `j` a level-`n` class check inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexConvention {
    /// `j <= 2^n`.
    Literal,
    /// `j <= n`.
    #[default]
    PerLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArithmeticClassSpec {
    pub bruno: BrunoSequence,
    pub level: u32,
    #[serde(default)]
    pub convention: IndexConvention,
}

impl ArithmeticClassSpec {
    pub fn new(bruno: BrunoSequence, level: u32, convention: IndexConvention) -> Self {
        ArithmeticClassSpec {
            bruno,
            level,
            convention,
        }
    }

    /// Largest index `j` constrained at this level.
    pub fn max_index(&self) -> Result<u32> {
        match self.convention {
            IndexConvention::PerLevel => Ok(self.level),
            IndexConvention::Literal => {
                if self.level >= 5 {
                    return Err(KamError::InvalidParameter(format!(
                        "literal convention at level {} needs σ_j for j up to 2^{}",
                        self.level, self.level
                    )));
                }
                Ok(1 << self.level)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassFailure {
    pub j: u32,
    pub sigma: f64,
    pub bound: f64,
    pub witness: MultiIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMembership {
    pub member: bool,
    pub failure: Option<ClassFailure>,
    pub sigmas: Vec<SigmaValue>,
}

/// Checks `σ_j(ω) > a_j` for every index the spec constrains.
pub fn class_membership(
    omega: &FrequencyVector,
    spec: &ArithmeticClassSpec,
    opts: &SigmaOptions,
) -> Result<ClassMembership> {
    spec.bruno.validate()?;
    let jmax = spec.max_index()?;
    let sigmas = sigma_profile(omega, jmax, opts)?;
    let mut failure = None;
    for s in &sigmas {
        let bound = spec.bruno.value(s.k as usize)?;
        if s.value <= bound {
            failure = Some(ClassFailure {
                j: s.k,
                sigma: s.value,
                bound,
                witness: s.witness.clone(),
            });
            break;
        }
    }
    Ok(ClassMembership {
        member: failure.is_none(),
        failure,
        sigmas,
    })
}

/// Axis-aligned box `Π [lo_k, hi_k]` of frequency vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBox {
    bounds: Vec<(f64, f64)>,
}

impl FrequencyBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.len() < 2 || !bounds.len().is_multiple_of(2) {
            return Err(KamError::InvalidParameter(format!(
                "box needs an even number >= 2 of sides, got {}",
                bounds.len()
            )));
        }
        if let Some((k, (lo, hi))) = bounds
            .iter()
            .enumerate()
            .find(|(_, (lo, hi))| !(lo.is_finite() && hi.is_finite() && lo < hi))
        {
            return Err(KamError::InvalidParameter(format!(
                "box side {k} = [{lo}, {hi}] is degenerate"
            )));
        }
        Ok(FrequencyBox { bounds })
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }
}

/// Monte-Carlo estimate of the fraction of the box inside the class.
///
/// Sample `j` is drawn from the ChaCha stream `j` of the generator seeded
/// with `seed`, so the estimate does not depend on evaluation order.
pub fn measure_estimate(
    spec: &ArithmeticClassSpec,
    frequency_box: &FrequencyBox,
    samples: u64,
    seed: u64,
    opts: &SigmaOptions,
) -> Result<f64> {
    if samples == 0 {
        return Err(KamError::InvalidParameter("samples must be >= 1".into()));
    }
    let hits = (0..samples)
        .into_par_iter()
        .map(|j| {
            let omega = sample_point(frequency_box, seed, j);
            class_membership(&omega, spec, opts).map(|m| m.member as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(hits as f64 / samples as f64)
}

pub(crate) fn sample_point(frequency_box: &FrequencyBox, seed: u64, index: u64) -> FrequencyVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let entries = frequency_box
        .bounds
        .iter()
        .map(|&(lo, hi)| rng.gen_range(lo..hi))
        .collect();
    FrequencyVector::new(entries).expect("box dimension is even and sides finite")
}
