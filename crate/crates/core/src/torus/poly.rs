use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::MultiIndex;
use crate::error::{KamError, Result};

/// Coefficients with both parts below this magnitude are not stored.
pub const PRUNE_THRESHOLD: f64 = 1e-300;

pub(crate) fn is_negligible(c: Complex64) -> bool {
    c.re.abs() < PRUNE_THRESHOLD && c.im.abs() < PRUNE_THRESHOLD
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 || !dim.is_multiple_of(2) {
        return Err(KamError::InvalidParameter(format!(
            "torus dimension must be even and at least 2, got {dim}"
        )));
    }
    Ok(())
}

/// Finite Fourier series `Σ_I c_I e^{i<I,x>}` on the torus `T^{2n}`.
///
/// Equivalently the Laurent polynomial `Σ c_I z^I` on `(C*)^{2n}` via
/// `z_k = e^{i x_k}`. Storage is sparse and canonical: no zero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl TrigPolynomial {
    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(TrigPolynomial {
            dim,
            terms: BTreeMap::new(),
        })
    }

    pub fn constant(dim: usize, c: Complex64) -> Result<Self> {
        Self::from_terms(dim, [(MultiIndex::zero(dim), c)])
    }

    pub fn monomial(index: MultiIndex, c: Complex64) -> Result<Self> {
        let dim = index.dim();
        Self::from_terms(dim, [(index, c)])
    }

    /// Builds a polynomial, summing repeated modes and dropping zeros.
    pub fn from_terms<T>(dim: usize, terms: T) -> Result<Self>
    where
        T: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        check_dim(dim)?;
        let mut map = BTreeMap::new();
        for (index, c) in terms {
            if index.dim() != dim {
                return Err(KamError::DimensionMismatch {
                    expected: dim,
                    found: index.dim(),
                });
            }
            *map.entry(index).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c| !is_negligible(*c));
        Ok(TrigPolynomial { dim, terms: map })
    }

    // Internal constructor for maps whose keys are known to have the right
    // dimension.
    pub(crate) fn from_map_unchecked(dim: usize, mut terms: BTreeMap<MultiIndex, Complex64>) -> Self {
        terms.retain(|_, c| !is_negligible(*c));
        TrigPolynomial { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored (nonzero) modes.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, index: &MultiIndex) -> Complex64 {
        self.terms.get(index).copied().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeff(&MultiIndex::zero(self.dim))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    /// Largest ℓ1 degree among stored modes (0 for the zero polynomial).
    pub fn max_degree(&self) -> u64 {
        self.terms.keys().map(MultiIndex::l1_norm).max().unwrap_or(0)
    }

    fn ensure_same_dim(&self, other: &TrigPolynomial) -> Result<()> {
        if self.dim != other.dim {
            return Err(KamError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &TrigPolynomial) -> Result<TrigPolynomial> {
        self.ensure_same_dim(other)?;
        let mut terms = self.terms.clone();
        for (index, c) in &other.terms {
            *terms.entry(index.clone()).or_default() += c;
        }
        Ok(Self::from_map_unchecked(self.dim, terms))
    }

    pub fn checked_sub(&self, other: &TrigPolynomial) -> Result<TrigPolynomial> {
        self.ensure_same_dim(other)?;
        let mut terms = self.terms.clone();
        for (index, c) in &other.terms {
            *terms.entry(index.clone()).or_default() -= c;
        }
        Ok(Self::from_map_unchecked(self.dim, terms))
    }

    pub fn scaled(&self, factor: Complex64) -> TrigPolynomial {
        let terms = self
            .terms
            .iter()
            .map(|(i, c)| (i.clone(), c * factor))
            .collect();
        Self::from_map_unchecked(self.dim, terms)
    }

    pub fn without_constant(&self) -> TrigPolynomial {
        let mut terms = self.terms.clone();
        terms.remove(&MultiIndex::zero(self.dim));
        TrigPolynomial {
            dim: self.dim,
            terms,
        }
    }

    /// Cauchy product: coefficient of `K` is `Σ_{I+J=K} f_I g_J`.
    pub fn multiply(&self, other: &TrigPolynomial) -> Result<TrigPolynomial> {
        self.ensure_same_dim(other)?;
        let (kept, _) = self.product_split(other, u64::MAX);
        Ok(kept)
    }

    /// Product restricted to modes of ℓ1 degree `<= max_degree`; the second
    /// polynomial holds the discarded high modes.
    pub fn multiply_truncated(
        &self,
        other: &TrigPolynomial,
        max_degree: u64,
    ) -> Result<(TrigPolynomial, TrigPolynomial)> {
        self.ensure_same_dim(other)?;
        Ok(self.product_split(other, max_degree))
    }

    fn product_split(&self, other: &TrigPolynomial, max_degree: u64) -> (TrigPolynomial, TrigPolynomial) {
        let mut kept: HashMap<MultiIndex, Complex64> =
            HashMap::with_capacity(self.terms.len().saturating_mul(other.terms.len()).min(1 << 16));
        let mut dropped: HashMap<MultiIndex, Complex64> = HashMap::new();
        // Summation order per output mode is fixed by the BTreeMap traversal,
        // so results do not depend on hash state.
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                let k = i.add(j);
                let target = if k.l1_norm() <= max_degree {
                    &mut kept
                } else {
                    &mut dropped
                };
                *target.entry(k).or_default() += a * b;
            }
        }
        (
            Self::from_map_unchecked(self.dim, kept.into_iter().collect()),
            Self::from_map_unchecked(self.dim, dropped.into_iter().collect()),
        )
    }

    /// `∂/∂x_k` (0-based `k`): coefficient `c_I ↦ i I_k c_I`.
    pub fn partial_derivative(&self, k: usize) -> TrigPolynomial {
        let terms = self
            .terms
            .iter()
            .filter(|(i, _)| i.get(k) != 0)
            .map(|(i, c)| (i.clone(), Complex64::new(0.0, i.get(k) as f64) * c))
            .collect();
        Self::from_map_unchecked(self.dim, terms)
    }

    /// Coefficientwise product with a multiplier; `c_I ↦ m(I) c_I`.
    pub fn hadamard_with<F>(&self, multiplier: F) -> TrigPolynomial
    where
        F: Fn(&MultiIndex) -> Complex64,
    {
        let terms = self
            .terms
            .iter()
            .map(|(i, c)| (i.clone(), multiplier(i) * c))
            .collect();
        Self::from_map_unchecked(self.dim, terms)
    }

    /// Hadamard product with an explicit multiplier table; modes missing
    /// from the table are multiplied by zero.
    pub fn hadamard(&self, multiplier: &BTreeMap<MultiIndex, Complex64>) -> TrigPolynomial {
        self.hadamard_with(|i| multiplier.get(i).copied().unwrap_or_default())
    }

    /// Splits into (modes with `|I|_1 <= max_degree`, the rest).
    pub fn split_at_degree(&self, max_degree: u64) -> (TrigPolynomial, TrigPolynomial) {
        let (low, high): (BTreeMap<_, _>, BTreeMap<_, _>) = self
            .terms
            .iter()
            .map(|(i, c)| (i.clone(), *c))
            .partition(|(i, _)| i.l1_norm() <= max_degree);
        (
            TrigPolynomial { dim: self.dim, terms: low },
            TrigPolynomial { dim: self.dim, terms: high },
        )
    }

    /// True iff `c_{-I} = conj(c_I)` for every mode, i.e. the function is
    /// real on the real torus.
    pub fn is_real(&self, tol: f64) -> bool {
        self.terms
            .iter()
            .all(|(i, c)| (self.coeff(&i.neg()) - c.conj()).norm() <= tol)
    }

    /// Value at a point `x` of the real torus.
    pub fn evaluate(&self, x: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(i, c)| c * Complex64::from_polar(1.0, i.dot(x)))
            .sum()
    }

    /// Sum of coefficient magnitudes; the majorant norm at scale 0.
    pub fn l1_coefficient_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRepr {
    #[serde(rename = "I")]
    index: Vec<i32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyRepr {
    dim: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for TrigPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(i, c)| TermRepr {
                    index: i.entries().to_vec(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TrigPolynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(deserializer)?;
        TrigPolynomial::from_terms(
            repr.dim,
            repr.terms
                .into_iter()
                .map(|t| (MultiIndex::new(t.index), Complex64::new(t.re, t.im))),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn mono(i: [i32; 2], v: f64) -> TrigPolynomial {
        TrigPolynomial::monomial(i.into(), c(v)).unwrap()
    }

    #[test]
    fn rejects_odd_or_empty_dimension() {
        assert!(TrigPolynomial::zero(0).is_err());
        assert!(TrigPolynomial::zero(3).is_err());
        assert!(TrigPolynomial::zero(2).is_ok());
    }

    #[test]
    fn product_of_exponentials_adds_modes() {
        let p = mono([1, 0], 1.0).multiply(&mono([0, 1], 1.0)).unwrap();
        assert_eq!(p, mono([1, 1], 1.0));
    }

    #[test]
    fn product_with_one_is_identity() {
        let f = mono([2, -1], 0.5)
            .checked_add(&mono([0, 3], -1.25))
            .unwrap();
        let one = TrigPolynomial::constant(2, c(1.0)).unwrap();
        assert_eq!(f.multiply(&one).unwrap(), f);
    }

    #[test]
    fn binomial_square() {
        let f = mono([1, 0], 1.0).checked_add(&mono([-1, 0], 1.0)).unwrap();
        let sq = f.multiply(&f).unwrap();
        let expected = TrigPolynomial::from_terms(
            2,
            [
                (MultiIndex::from([2, 0]), c(1.0)),
                (MultiIndex::from([0, 0]), c(2.0)),
                (MultiIndex::from([-2, 0]), c(1.0)),
            ],
        )
        .unwrap();
        assert_eq!(sq, expected);
    }

    #[test]
    fn multiply_dimension_mismatch() {
        let f = TrigPolynomial::zero(2).unwrap();
        let g = TrigPolynomial::zero(4).unwrap();
        assert!(matches!(
            f.multiply(&g),
            Err(KamError::DimensionMismatch { expected: 2, found: 4 })
        ));
    }

    #[test]
    fn truncated_product_partitions_the_full_product() {
        let f = mono([1, 0], 1.0).checked_add(&mono([0, 2], 2.0)).unwrap();
        let g = mono([1, 1], 3.0).checked_add(&mono([-1, 0], 1.0)).unwrap();
        let (kept, dropped) = f.multiply_truncated(&g, 2).unwrap();
        assert!(kept.terms().all(|(i, _)| i.l1_norm() <= 2));
        assert!(dropped.terms().all(|(i, _)| i.l1_norm() > 2));
        assert_eq!(kept.checked_add(&dropped).unwrap(), f.multiply(&g).unwrap());
    }

    #[test]
    fn hadamard_cases() {
        let f = mono([1, 0], 1.0)
            .checked_add(&TrigPolynomial::constant(2, c(4.0)).unwrap())
            .unwrap();
        assert_eq!(f.hadamard_with(|_| c(1.0)), f);

        let phi = [2.0 / 3.0, -1.0 / 3.0];
        let r = mono([1, 0], 1.0).hadamard_with(|i| Complex64::new(0.0, -i.dot(&phi)));
        assert!((r.coeff(&[1, 0].into()) - Complex64::new(0.0, -2.0 / 3.0)).norm() < 1e-15);

        let no_const = f.hadamard_with(|i| if i.is_zero() { c(0.0) } else { c(1.0) });
        assert_eq!(no_const, mono([1, 0], 1.0));

        let mut table = BTreeMap::new();
        table.insert(MultiIndex::from([1, 0]), c(2.0));
        assert_eq!(f.hadamard(&table), mono([1, 0], 2.0));
    }

    #[test]
    fn reality() {
        let cos = mono([1, 0], 1.0).checked_add(&mono([-1, 0], 1.0)).unwrap();
        assert!(cos.is_real(1e-14));
        let imag = TrigPolynomial::monomial([1, 0].into(), Complex64::new(0.0, 1.0)).unwrap();
        assert!(!imag.is_real(1e-14));
        assert!(TrigPolynomial::constant(2, c(3.5)).unwrap().is_real(0.0));
    }

    #[test]
    fn json_layout() {
        let f = TrigPolynomial::monomial([1, -2].into(), Complex64::new(0.5, -1.0)).unwrap();
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"dim": 2, "terms": [{"I": [1, -2], "re": 0.5, "im": -1.0}]})
        );
        let back: TrigPolynomial = serde_json::from_value(v).unwrap();
        assert_eq!(back, f);
        let bad = serde_json::json!({"dim": 2, "terms": [{"I": [1, 0, 0], "re": 1.0, "im": 0.0}]});
        assert!(serde_json::from_value::<TrigPolynomial>(bad).is_err());
    }
}
