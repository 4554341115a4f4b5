use serde::{Deserialize, Serialize};

use crate::error::{KamError, Result};

/// Frequency vector `ω ∈ R^{2n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyVector(Vec<f64>);

impl FrequencyVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 || !entries.len().is_multiple_of(2) {
            return Err(KamError::InvalidParameter(format!(
                "frequency vector needs an even length >= 2, got {}",
                entries.len()
            )));
        }
        if let Some(x) = entries.iter().find(|x| !x.is_finite()) {
            return Err(KamError::InvalidParameter(format!(
                "frequency entries must be finite, got {x}"
            )));
        }
        Ok(FrequencyVector(entries))
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        FrequencyVector::new(self.0.iter().map(|x| lambda * x).collect())
    }
}

impl TryFrom<Vec<f64>> for FrequencyVector {
    type Error = KamError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        FrequencyVector::new(v)
    }
}

impl From<FrequencyVector> for Vec<f64> {
    fn from(f: FrequencyVector) -> Vec<f64> {
        f.0
    }
}

/// Point `(δ, τ)` of the base `(R*)^n × R^{2n}` of the standard family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    delta: Vec<f64>,
    tau: Vec<f64>,
}

pub(crate) fn validate_delta(delta: &[f64]) -> Result<()> {
    if delta.is_empty() {
        return Err(KamError::InvalidParameter("delta must have n >= 1 entries".into()));
    }
    if let Some((i, d)) = delta
        .iter()
        .enumerate()
        .find(|(_, d)| **d == 0.0 || !d.is_finite())
    {
        return Err(KamError::InvalidParameter(format!(
            "delta[{i}] = {d} must be finite and nonzero"
        )));
    }
    Ok(())
}

impl ParameterPoint {
    pub fn new(delta: Vec<f64>, tau: Vec<f64>) -> Result<Self> {
        validate_delta(&delta)?;
        if tau.len() != 2 * delta.len() {
            return Err(KamError::InvalidParameter(format!(
                "tau needs 2n = {} entries, got {}",
                2 * delta.len(),
                tau.len()
            )));
        }
        if tau.iter().any(|t| !t.is_finite()) {
            return Err(KamError::InvalidParameter("tau entries must be finite".into()));
        }
        Ok(ParameterPoint { delta, tau })
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn half_dim(&self) -> usize {
        self.delta.len()
    }
}

/// `φ(τ, δ) = (τ_{n+1}/δ_1, …, τ_{2n}/δ_n, -τ_1/δ_1, …, -τ_n/δ_n)`.
pub fn frequency_map(p: &ParameterPoint) -> FrequencyVector {
    let n = p.half_dim();
    let mut out = Vec::with_capacity(2 * n);
    out.extend((0..n).map(|i| p.tau[i + n] / p.delta[i]));
    out.extend((0..n).map(|i| -p.tau[i] / p.delta[i]));
    FrequencyVector(out)
}

/// Parameters `τ` with `φ(τ, δ) = ω`.
pub fn tau_for_frequency(omega: &FrequencyVector, delta: &[f64]) -> Result<Vec<f64>> {
    validate_delta(delta)?;
    let n = delta.len();
    if omega.dim() != 2 * n {
        return Err(KamError::DimensionMismatch {
            expected: 2 * n,
            found: omega.dim(),
        });
    }
    let w = omega.entries();
    let mut tau = vec![0.0; 2 * n];
    for i in 0..n {
        tau[i + n] = w[i] * delta[i];
        tau[i] = -w[i + n] * delta[i];
    }
    Ok(tau)
}
