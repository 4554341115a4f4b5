use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{MultiIndex, TrigPolynomial};
use crate::error::{KamError, Result};
use crate::torus::poly::check_dim;

/// Relative 1-form `Σ_k β_k dx_k` with trigonometric-polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeOneForm {
    components: Vec<TrigPolynomial>,
}

/// 2-form `Σ_{k<l} γ_{kl} dx_k ∧ dx_l`, stored as the upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm {
    dim: usize,
    upper: Vec<TrigPolynomial>,
}

/// Worst closedness violation of a 1-form.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosednessDefect {
    pub defect: f64,
    pub mode: MultiIndex,
    pub k: usize,
    pub l: usize,
}

impl RelativeOneForm {
    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(RelativeOneForm {
            components: vec![TrigPolynomial::zero(dim)?; dim],
        })
    }

    /// The constant form `Σ τ_k dx_k`.
    pub fn constant(coeffs: &[Complex64]) -> Result<Self> {
        let dim = coeffs.len();
        check_dim(dim)?;
        let components = coeffs
            .iter()
            .map(|&c| TrigPolynomial::constant(dim, c))
            .collect::<Result<_>>()?;
        Ok(RelativeOneForm { components })
    }

    pub fn constant_real(coeffs: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::constant(&c)
    }

    pub fn from_components(components: Vec<TrigPolynomial>) -> Result<Self> {
        let dim = components.len();
        check_dim(dim)?;
        for c in &components {
            if c.dim() != dim {
                return Err(KamError::DimensionMismatch {
                    expected: dim,
                    found: c.dim(),
                });
            }
        }
        Ok(RelativeOneForm { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[TrigPolynomial] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &TrigPolynomial {
        &self.components[k]
    }

    pub fn into_components(self) -> Vec<TrigPolynomial> {
        self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(TrigPolynomial::is_zero)
    }

    pub fn max_degree(&self) -> u64 {
        self.components.iter().map(TrigPolynomial::max_degree).max().unwrap_or(0)
    }

    fn zip_with<F>(&self, other: &RelativeOneForm, f: F) -> Result<RelativeOneForm>
    where
        F: Fn(&TrigPolynomial, &TrigPolynomial) -> Result<TrigPolynomial>,
    {
        if self.dim() != other.dim() {
            return Err(KamError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| f(a, b))
            .collect::<Result<_>>()?;
        Ok(RelativeOneForm { components })
    }

    pub fn checked_add(&self, other: &RelativeOneForm) -> Result<RelativeOneForm> {
        self.zip_with(other, TrigPolynomial::checked_add)
    }

    pub fn checked_sub(&self, other: &RelativeOneForm) -> Result<RelativeOneForm> {
        self.zip_with(other, TrigPolynomial::checked_sub)
    }

    pub fn scaled(&self, factor: Complex64) -> RelativeOneForm {
        RelativeOneForm {
            components: self.components.iter().map(|c| c.scaled(factor)).collect(),
        }
    }

    /// Mean coefficients `β_{k,0}`, i.e. the de Rham class.
    pub fn mean(&self) -> Vec<Complex64> {
        self.components.iter().map(TrigPolynomial::constant_term).collect()
    }

    pub fn without_mean(&self) -> RelativeOneForm {
        RelativeOneForm {
            components: self.components.iter().map(TrigPolynomial::without_constant).collect(),
        }
    }

    /// Splits every component at ℓ1 degree `max_degree`.
    pub fn split_at_degree(&self, max_degree: u64) -> (RelativeOneForm, RelativeOneForm) {
        let (low, high) = self
            .components
            .iter()
            .map(|c| c.split_at_degree(max_degree))
            .unzip();
        (
            RelativeOneForm { components: low },
            RelativeOneForm { components: high },
        )
    }

    fn modes(&self) -> BTreeSet<MultiIndex> {
        self.components
            .iter()
            .flat_map(|c| c.terms().map(|(i, _)| i.clone()))
            .collect()
    }

    /// Largest `|I_k β_{l,I} - I_l β_{k,I}|` over modes and pairs `k < l`.
    pub fn closedness_defect(&self) -> Option<ClosednessDefect> {
        let n = self.dim();
        let mut worst: Option<ClosednessDefect> = None;
        for mode in self.modes() {
            for k in 0..n {
                for l in k + 1..n {
                    let v = self.components[l].coeff(&mode) * mode.get(k) as f64
                        - self.components[k].coeff(&mode) * mode.get(l) as f64;
                    let defect = v.norm();
                    if worst.as_ref().is_none_or(|w| defect > w.defect) {
                        worst = Some(ClosednessDefect {
                            defect,
                            mode: mode.clone(),
                            k,
                            l,
                        });
                    }
                }
            }
        }
        worst
    }

    /// Orthogonal split `β = closed + rest`, projecting each coefficient
    /// vector `β_I` onto the line spanned by `I` (the exact forms at mode
    /// `I`). The mean is kept in the closed part.
    pub fn closed_projection(&self) -> (RelativeOneForm, RelativeOneForm) {
        let n = self.dim();
        let mut closed: Vec<Vec<(MultiIndex, Complex64)>> = vec![Vec::new(); n];
        let mut rest: Vec<Vec<(MultiIndex, Complex64)>> = vec![Vec::new(); n];
        for mode in self.modes() {
            let b: Vec<Complex64> = self.components.iter().map(|c| c.coeff(&mode)).collect();
            if mode.is_zero() {
                for k in 0..n {
                    closed[k].push((mode.clone(), b[k]));
                }
                continue;
            }
            let norm2 = mode.entries().iter().map(|&e| (e as f64) * (e as f64)).sum::<f64>();
            let along = (0..n).fold(Complex64::new(0.0, 0.0), |acc, k| acc + b[k] * mode.get(k) as f64) / norm2;
            for k in 0..n {
                let p = along * mode.get(k) as f64;
                closed[k].push((mode.clone(), p));
                rest[k].push((mode.clone(), b[k] - p));
            }
        }
        let build = |parts: Vec<Vec<(MultiIndex, Complex64)>>| RelativeOneForm {
            components: parts
                .into_iter()
                .map(|t| TrigPolynomial::from_terms(n, t).expect("shared dimension"))
                .collect(),
        };
        (build(closed), build(rest))
    }

    pub fn is_closed(&self, tol: f64) -> bool {
        self.closedness_defect().is_none_or(|w| w.defect <= tol)
    }

    /// Splits a closed form as `Σ mean_k dx_k + d(primitive)` with a
    /// zero-mean primitive.
    pub fn mean_exact_split(&self, tol: f64) -> Result<(Vec<Complex64>, TrigPolynomial)> {
        if let Some(w) = self.closedness_defect() {
            if w.defect > tol {
                return Err(KamError::NotClosed {
                    mode: w.mode,
                    k: w.k,
                    l: w.l,
                    defect: w.defect,
                });
            }
        }
        let mean = self.mean();
        let mut terms = Vec::new();
        for mode in self.modes() {
            if mode.is_zero() {
                continue;
            }
            // divide by the largest |I_k| for conditioning
            let k = (0..self.dim())
                .max_by_key(|&k| (mode.get(k).unsigned_abs(), std::cmp::Reverse(k)))
                .expect("dimension >= 2");
            let divisor = Complex64::new(0.0, mode.get(k) as f64);
            let g = self.components[k].coeff(&mode) / divisor;
            terms.push((mode, g));
        }
        let primitive = TrigPolynomial::from_terms(self.dim(), terms)?;
        Ok((mean, primitive))
    }

    /// `dβ`, with `(dβ)_{kl} = ∂_k β_l - ∂_l β_k`.
    pub fn differential(&self) -> TwoForm {
        let n = self.dim();
        let mut upper = Vec::with_capacity(n * (n - 1) / 2);
        for k in 0..n {
            for l in k + 1..n {
                let a = self.components[l].partial_derivative(k);
                let b = self.components[k].partial_derivative(l);
                upper.push(a.checked_sub(&b).expect("shared dimension"));
            }
        }
        TwoForm { dim: n, upper }
    }
}

impl TwoForm {
    pub fn dim(&self) -> usize {
        self.dim
    }

    fn slot(&self, k: usize, l: usize) -> usize {
        // row-major upper triangle without diagonal
        k * self.dim - k * (k + 1) / 2 + (l - k - 1)
    }

    /// Coefficient of `dx_k ∧ dx_l` for `k < l`.
    pub fn upper(&self, k: usize, l: usize) -> &TrigPolynomial {
        assert!(k < l && l < self.dim);
        &self.upper[self.slot(k, l)]
    }

    pub fn components(&self) -> &[TrigPolynomial] {
        &self.upper
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(TrigPolynomial::is_zero)
    }
}

/// `df = Σ_k ∂_k f dx_k`.
pub fn exterior_derivative(f: &TrigPolynomial) -> RelativeOneForm {
    RelativeOneForm {
        components: (0..f.dim()).map(|k| f.partial_derivative(k)).collect(),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormRepr {
    dim: usize,
    components: Vec<TrigPolynomial>,
}

impl Serialize for RelativeOneForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FormRepr {
            dim: self.dim(),
            components: self.components.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RelativeOneForm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = FormRepr::deserialize(deserializer)?;
        if repr.components.len() != repr.dim {
            return Err(serde::de::Error::custom(format!(
                "form of dimension {} has {} components",
                repr.dim,
                repr.components.len()
            )));
        }
        RelativeOneForm::from_components(repr.components).map_err(serde::de::Error::custom)
    }
}
