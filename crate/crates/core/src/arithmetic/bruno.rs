use serde::{Deserialize, Serialize};

use crate::error::{KamError, Result};

/// Last-increment threshold below which a geometrically decaying series is
/// declared convergent.
pub const CONVERGENCE_INCREMENT: f64 = 1e-12;

/// Number of trailing terms inspected by [`finite_horizon_verdict`].
const WINDOW: usize = 4;

/// Nonincreasing, nonnegative sequence `a_i` bounding `σ_i` from below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BrunoSequence {
    /// `a_i = c · r^i`.
    Geometric { c: f64, r: f64 },
    /// Explicit values `a_0, a_1, …`.
    Explicit { values: Vec<f64> },
    /// `a_i = exp(-c · b^i)`; logarithms are evaluated without underflow.
    Superexp { c: f64, b: f64 },
}

impl BrunoSequence {
    pub fn geometric(c: f64, r: f64) -> Result<Self> {
        let s = BrunoSequence::Geometric { c, r };
        s.validate()?;
        Ok(s)
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        let s = BrunoSequence::Explicit { values };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BrunoSequence::Geometric { c, r } => {
                if !(c.is_finite() && *c >= 0.0) {
                    return Err(KamError::InvalidSequence(format!("geometric scale c = {c} must be >= 0")));
                }
                if !(*r > 0.0 && *r <= 1.0) {
                    return Err(KamError::InvalidSequence(format!(
                        "geometric ratio r = {r} must lie in (0, 1]"
                    )));
                }
            }
            BrunoSequence::Superexp { c, b } => {
                if !(c.is_finite() && *c >= 0.0 && b.is_finite() && *b >= 1.0) {
                    return Err(KamError::InvalidSequence(format!(
                        "superexponential sequence needs c >= 0 and b >= 1, got c = {c}, b = {b}"
                    )));
                }
            }
            BrunoSequence::Explicit { values } => {
                if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
                    return Err(KamError::InvalidSequence(format!("a_{i} = {v} must be finite and >= 0")));
                }
                if let Some(i) = (1..values.len()).find(|&i| values[i] > values[i - 1]) {
                    return Err(KamError::InvalidSequence(format!(
                        "sequence increases at index {i}: {} > {}",
                        values[i],
                        values[i - 1]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> Result<f64> {
        match self {
            BrunoSequence::Geometric { c, r } => Ok(c * r.powi(i as i32)),
            BrunoSequence::Superexp { c, b } => Ok((-c * b.powi(i as i32)).exp()),
            BrunoSequence::Explicit { values } => values.get(i).copied().ok_or_else(|| {
                KamError::InvalidSequence(format!(
                    "explicit sequence has {} entries, a_{i} requested",
                    values.len()
                ))
            }),
        }
    }

    /// Pointwise scaling `λ a`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        let s = match self {
            BrunoSequence::Geometric { c, r } => BrunoSequence::Geometric { c: c * lambda, r: *r },
            BrunoSequence::Explicit { values } => BrunoSequence::Explicit {
                values: values.iter().map(|v| v * lambda).collect(),
            },
            BrunoSequence::Superexp { .. } => {
                return Err(KamError::InvalidSequence(
                    "superexponential sequences cannot be rescaled in closed form".into(),
                ))
            }
        };
        s.validate()?;
        Ok(s)
    }

    /// `ln a_i`, exact in closed form for the superexponential family.
    pub fn ln_value(&self, i: usize) -> Result<f64> {
        match self {
            BrunoSequence::Superexp { c, b } => Ok(-c * b.powi(i as i32)),
            _ => Ok(self.value(i)?.ln()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesVerdict {
    Converging,
    Diverging,
    Undecided,
}

/// Finite-horizon verdict on `Σ terms`.
///
/// Converging: the last term is below [`CONVERGENCE_INCREMENT`] and the
/// trailing terms shrink by at least a factor 0.9 per step (or vanish).
/// Diverging: at least three trailing terms, none shrinking below 0.99 of
/// its predecessor, and the last one not negligible. Anything else is
/// undecided.
pub fn finite_horizon_verdict(terms: &[f64]) -> SeriesVerdict {
    let Some(&last) = terms.last() else {
        return SeriesVerdict::Undecided;
    };
    let window = &terms[terms.len().saturating_sub(WINDOW)..];
    let pairs = || window.windows(2).map(|p| (p[0].abs(), p[1].abs()));

    let decaying = pairs().all(|(a, b)| b == 0.0 || (a > 0.0 && b <= 0.9 * a));
    if last.abs() < CONVERGENCE_INCREMENT && decaying {
        return SeriesVerdict::Converging;
    }
    let stalled = window.len() >= 3 && pairs().all(|(a, b)| b >= 0.99 * a);
    if last.abs() >= CONVERGENCE_INCREMENT && stalled {
        return SeriesVerdict::Diverging;
    }
    SeriesVerdict::Undecided
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrunoSummary {
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub verdict: SeriesVerdict,
}

/// `S_K = Σ_{i=0}^{K} ln(a_i) / 2^i` for `K = 0..=kmax`.
pub fn bruno_partial_sums(a: &BrunoSequence, kmax: usize) -> Result<BrunoSummary> {
    a.validate()?;
    let terms = (0..=kmax)
        .map(|i| {
            let ln = a.ln_value(i)?;
            if !ln.is_finite() {
                return Err(KamError::InvalidSequence(format!("a_{i} is not positive")));
            }
            Ok(ln / 2f64.powi(i as i32))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarise(terms))
}

pub(crate) fn summarise(terms: Vec<f64>) -> BrunoSummary {
    let partial_sums = terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let verdict = finite_horizon_verdict(&terms);
    BrunoSummary {
        terms,
        partial_sums,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_powers_converge_to_minus_four_ln2() {
        let a = BrunoSequence::geometric(1.0, 0.25).unwrap();
        let s = bruno_partial_sums(&a, 60).unwrap();
        assert!((s.partial_sums[40] + 4.0 * 2f64.ln()).abs() < 1e-9);
        assert_eq!(s.verdict, SeriesVerdict::Converging);
    }

    #[test]
    fn constant_one_converges_trivially() {
        let a = BrunoSequence::geometric(1.0, 1.0).unwrap();
        let s = bruno_partial_sums(&a, 10).unwrap();
        assert!(s.partial_sums.iter().all(|&x| x == 0.0));
        assert_eq!(s.verdict, SeriesVerdict::Converging);
    }

    #[test]
    fn doubly_exponential_diverges() {
        let a = BrunoSequence::Superexp { c: 1.0, b: 2.0 };
        let s = bruno_partial_sums(&a, 10).unwrap();
        for (k, v) in s.partial_sums.iter().enumerate() {
            assert!((v + (k as f64 + 1.0)).abs() < 1e-12);
        }
        assert_eq!(s.verdict, SeriesVerdict::Diverging);
    }

    #[test]
    fn nonpositive_terms_rejected() {
        let zero = BrunoSequence::geometric(0.0, 0.5).unwrap();
        assert!(matches!(bruno_partial_sums(&zero, 3), Err(KamError::InvalidSequence(_))));
        assert!(BrunoSequence::explicit(vec![1.0, -1.0]).is_err());
        assert!(BrunoSequence::explicit(vec![1.0, 2.0]).is_err());
        assert!(BrunoSequence::geometric(1.0, 1.5).is_err());
        let short = BrunoSequence::explicit(vec![1.0]).unwrap();
        assert!(short.value(3).is_err());
    }

    #[test]
    fn verdict_edge_cases() {
        assert_eq!(finite_horizon_verdict(&[]), SeriesVerdict::Undecided);
        assert_eq!(finite_horizon_verdict(&[-1.0, -1.0]), SeriesVerdict::Undecided);
        // harmonic-like tail: shrinking, but too slowly to call
        let slow: Vec<f64> = (1..50).map(|i| 1.0 / i as f64).collect();
        assert_eq!(finite_horizon_verdict(&slow), SeriesVerdict::Undecided);
    }

    #[test]
    fn json_shape() {
        let a: BrunoSequence = serde_json::from_str(r#"{"kind":"geometric","c":0.01,"r":0.5}"#).unwrap();
        assert_eq!(a, BrunoSequence::Geometric { c: 0.01, r: 0.5 });
        let b: BrunoSequence = serde_json::from_str(r#"{"kind":"explicit","values":[1.0,0.5]}"#).unwrap();
        assert_eq!(b.value(1).unwrap(), 0.5);
    }
}
