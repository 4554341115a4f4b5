//! The symplectic form `ω = Σ δ_i dx_i ∧ dx_{i+n}` on `T^{2n}`, the
//! duality between vector fields and 1-forms it induces, Hamiltonian fields
//! and Lie derivatives of 1-forms.
//!
//! Duality (0-based, `i < n`): `∂_{x_i} ↦ -δ_i dx_{i+n}` and
//! `∂_{x_{i+n}} ↦ δ_i dx_i`. The Hamiltonian field of `g` is the field
//! whose dual form is `-dg`, which in coordinates reads
//! `X_g = Σ_i δ_i^{-1} (∂_{x_{i+n}} g ∂_{x_i} - ∂_{x_i} g ∂_{x_{i+n}})`.
//! With `α = Σ τ_k dx_k` this gives `α(X_g) = -i <φ, I> c_I` mode by mode.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arithmetic::validate_delta;
use crate::error::{KamError, Result};
use crate::torus::{exterior_derivative, RelativeOneForm, TrigPolynomial, TwoForm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SymplecticParameters(Vec<f64>);

impl SymplecticParameters {
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        validate_delta(&delta)?;
        Ok(SymplecticParameters(delta))
    }

    pub fn delta(&self) -> &[f64] {
        &self.0
    }

    pub fn half_dim(&self) -> usize {
        self.0.len()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != 2 * self.0.len() {
            return Err(KamError::DimensionMismatch {
                expected: 2 * self.0.len(),
                found: dim,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for SymplecticParameters {
    type Error = KamError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        SymplecticParameters::new(v)
    }
}

impl From<SymplecticParameters> for Vec<f64> {
    fn from(p: SymplecticParameters) -> Vec<f64> {
        p.0
    }
}

/// Vector field `Σ v_k ∂_{x_k}` tangent to the fibres.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldOnTorus {
    components: Vec<TrigPolynomial>,
}

impl VectorFieldOnTorus {
    pub fn from_components(components: Vec<TrigPolynomial>) -> Result<Self> {
        // same invariants as a 1-form
        let form = RelativeOneForm::from_components(components)?;
        Ok(VectorFieldOnTorus {
            components: form.into_components(),
        })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Ok(VectorFieldOnTorus {
            components: RelativeOneForm::zero(dim)?.into_components(),
        })
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

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(TrigPolynomial::is_zero)
    }

    pub fn checked_add(&self, other: &VectorFieldOnTorus) -> Result<VectorFieldOnTorus> {
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
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<_>>()?;
        Ok(VectorFieldOnTorus { components })
    }
}

impl Serialize for VectorFieldOnTorus {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RelativeOneForm::from_components(self.components.clone())
            .map_err(serde::ser::Error::custom)?
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for VectorFieldOnTorus {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let form = RelativeOneForm::deserialize(deserializer)?;
        Ok(VectorFieldOnTorus {
            components: form.into_components(),
        })
    }
}

/// `v ↦ i_v ω`, coefficientwise.
pub fn field_to_form(v: &VectorFieldOnTorus, delta: &SymplecticParameters) -> Result<RelativeOneForm> {
    delta.check_dim(v.dim())?;
    let n = delta.half_dim();
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        out.push(v.component(i + n).scaled(Complex64::new(delta.delta()[i], 0.0)));
    }
    for i in 0..n {
        out.push(v.component(i).scaled(Complex64::new(-delta.delta()[i], 0.0)));
    }
    RelativeOneForm::from_components(out)
}

/// Inverse of [`field_to_form`].
pub fn form_to_field(beta: &RelativeOneForm, delta: &SymplecticParameters) -> Result<VectorFieldOnTorus> {
    delta.check_dim(beta.dim())?;
    let n = delta.half_dim();
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        out.push(beta.component(i + n).scaled(Complex64::new(-1.0 / delta.delta()[i], 0.0)));
    }
    for i in 0..n {
        out.push(beta.component(i).scaled(Complex64::new(1.0 / delta.delta()[i], 0.0)));
    }
    VectorFieldOnTorus::from_components(out)
}

/// Hamiltonian field `X_g` with `i_{X_g} ω = -dg`.
pub fn hamiltonian_field(g: &TrigPolynomial, delta: &SymplecticParameters) -> Result<VectorFieldOnTorus> {
    delta.check_dim(g.dim())?;
    let n = delta.half_dim();
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let inv = Complex64::new(1.0 / delta.delta()[i], 0.0);
        out.push(g.partial_derivative(i + n).scaled(inv));
    }
    for i in 0..n {
        let inv = Complex64::new(-1.0 / delta.delta()[i], 0.0);
        out.push(g.partial_derivative(i).scaled(inv));
    }
    VectorFieldOnTorus::from_components(out)
}

fn check_pair(v: &VectorFieldOnTorus, dim: usize) -> Result<()> {
    if v.dim() != dim {
        return Err(KamError::DimensionMismatch {
            expected: v.dim(),
            found: dim,
        });
    }
    Ok(())
}

/// Accumulates `Σ a_k b_k` with products truncated at `max_degree`; returns
/// (kept, dropped).
fn truncated_pairing(
    a: &[TrigPolynomial],
    b: &[&TrigPolynomial],
    dim: usize,
    max_degree: u64,
) -> Result<(TrigPolynomial, TrigPolynomial)> {
    let mut kept = TrigPolynomial::zero(dim)?;
    let mut dropped = TrigPolynomial::zero(dim)?;
    for (x, y) in a.iter().zip(b) {
        if x.is_zero() || y.is_zero() {
            continue;
        }
        let (k, d) = x.multiply_truncated(y, max_degree)?;
        kept = kept.checked_add(&k)?;
        dropped = dropped.checked_add(&d)?;
    }
    Ok((kept, dropped))
}

/// `i_v β = Σ v_k β_k`.
pub fn interior_product(v: &VectorFieldOnTorus, beta: &RelativeOneForm) -> Result<TrigPolynomial> {
    check_pair(v, beta.dim())?;
    let b: Vec<&TrigPolynomial> = beta.components().iter().collect();
    Ok(truncated_pairing(v.components(), &b, v.dim(), u64::MAX)?.0)
}

/// `(i_v w)_l = Σ_k v_k w_{kl}`.
fn interior_two_form(
    v: &VectorFieldOnTorus,
    w: &TwoForm,
    max_degree: u64,
) -> Result<(RelativeOneForm, RelativeOneForm)> {
    let n = v.dim();
    let mut kept = Vec::with_capacity(n);
    let mut dropped = Vec::with_capacity(n);
    for l in 0..n {
        let mut k_acc = TrigPolynomial::zero(n)?;
        let mut d_acc = TrigPolynomial::zero(n)?;
        for k in 0..n {
            if k == l {
                continue;
            }
            let (coef, sign) = if k < l {
                (w.upper(k, l), 1.0)
            } else {
                (w.upper(l, k), -1.0)
            };
            if coef.is_zero() || v.component(k).is_zero() {
                continue;
            }
            let (a, b) = v.component(k).multiply_truncated(coef, max_degree)?;
            let s = Complex64::new(sign, 0.0);
            k_acc = k_acc.checked_add(&a.scaled(s))?;
            d_acc = d_acc.checked_add(&b.scaled(s))?;
        }
        kept.push(k_acc);
        dropped.push(d_acc);
    }
    Ok((
        RelativeOneForm::from_components(kept)?,
        RelativeOneForm::from_components(dropped)?,
    ))
}

/// `L_v β = d(i_v β) + i_v dβ` (Cartan).
pub fn lie_derivative(v: &VectorFieldOnTorus, beta: &RelativeOneForm) -> Result<RelativeOneForm> {
    Ok(lie_derivative_truncated(v, beta, u64::MAX)?.0)
}

/// Cartan's formula with every product truncated at ℓ1 degree
/// `max_degree`; the second form collects the discarded modes.
pub fn lie_derivative_truncated(
    v: &VectorFieldOnTorus,
    beta: &RelativeOneForm,
    max_degree: u64,
) -> Result<(RelativeOneForm, RelativeOneForm)> {
    check_pair(v, beta.dim())?;
    let b: Vec<&TrigPolynomial> = beta.components().iter().collect();
    let (contraction, contraction_dropped) = truncated_pairing(v.components(), &b, v.dim(), max_degree)?;
    let exact = exterior_derivative(&contraction);
    let exact_dropped = exterior_derivative(&contraction_dropped);

    let curvature = beta.differential();
    if curvature.is_zero() {
        return Ok((exact, exact_dropped));
    }
    let (rest, rest_dropped) = interior_two_form(v, &curvature, max_degree)?;
    Ok((exact.checked_add(&rest)?, exact_dropped.checked_add(&rest_dropped)?))
}

/// `Symp = Ham ⊕ Cas` split of a symplectic field.
///
/// The Casimir part is carried as the constant form `Σ c_k dx_k` it is dual
/// to; it acts on the standard family as the parameter shift `τ ↦ τ + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymplecticFieldDecomposition {
    pub potential: TrigPolynomial,
    pub counterterm: Vec<Complex64>,
}

pub fn decompose(
    v: &VectorFieldOnTorus,
    delta: &SymplecticParameters,
    tol: f64,
) -> Result<SymplecticFieldDecomposition> {
    let beta = field_to_form(v, delta)?;
    let (mean, primitive) = beta.mean_exact_split(tol)?;
    Ok(SymplecticFieldDecomposition {
        potential: primitive.scaled(Complex64::new(-1.0, 0.0)),
        counterterm: mean,
    })
}

pub fn recompose(
    parts: &SymplecticFieldDecomposition,
    delta: &SymplecticParameters,
) -> Result<VectorFieldOnTorus> {
    let ham = hamiltonian_field(&parts.potential, delta)?;
    let cas = form_to_field(&RelativeOneForm::constant(&parts.counterterm)?, delta)?;
    ham.checked_add(&cas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::MultiIndex;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_field(dim: usize, k: usize) -> VectorFieldOnTorus {
        let mut comps = vec![TrigPolynomial::zero(dim).unwrap(); dim];
        comps[k] = TrigPolynomial::constant(dim, c(1.0, 0.0)).unwrap();
        VectorFieldOnTorus::from_components(comps).unwrap()
    }

    #[test]
    fn coordinate_fields_map_to_dual_forms() {
        let delta = SymplecticParameters::new(vec![2.0]).unwrap();
        let f1 = field_to_form(&unit_field(2, 0), &delta).unwrap();
        assert_eq!(f1, RelativeOneForm::constant_real(&[0.0, -2.0]).unwrap());
        let f2 = field_to_form(&unit_field(2, 1), &delta).unwrap();
        assert_eq!(f2, RelativeOneForm::constant_real(&[2.0, 0.0]).unwrap());
    }

    #[test]
    fn hamiltonian_field_of_single_mode() {
        let delta = SymplecticParameters::new(vec![1.0]).unwrap();
        let g = TrigPolynomial::monomial([1, 0].into(), c(1.0, 0.0)).unwrap();
        let x = hamiltonian_field(&g, &delta).unwrap();
        assert!(x.component(0).is_zero());
        assert_eq!(x.component(1), &TrigPolynomial::monomial([1, 0].into(), c(0.0, -1.0)).unwrap());
        let dual = field_to_form(&x, &delta).unwrap();
        assert_eq!(dual, exterior_derivative(&g).scaled(c(-1.0, 0.0)));
        let constant = TrigPolynomial::constant(2, c(3.0, 0.0)).unwrap();
        assert!(hamiltonian_field(&constant, &delta).unwrap().is_zero());
    }

    #[test]
    fn dimension_mismatch() {
        let delta = SymplecticParameters::new(vec![1.0, 1.0]).unwrap();
        let g = TrigPolynomial::zero(2).unwrap();
        assert!(matches!(
            hamiltonian_field(&g, &delta),
            Err(KamError::DimensionMismatch { expected: 4, found: 2 })
        ));
    }

    #[test]
    fn lie_derivative_of_zero_field_vanishes() {
        let beta = exterior_derivative(&TrigPolynomial::monomial([2, 1].into(), c(1.0, 0.0)).unwrap());
        let zero = VectorFieldOnTorus::zero(2).unwrap();
        assert!(lie_derivative(&zero, &beta).unwrap().is_zero());
    }

    #[test]
    fn lie_derivative_of_non_closed_form_uses_curvature_term() {
        // β = e_{(0,1)} dx_1 is not closed; compare with the coordinate formula
        // (L_v β)_l = Σ_k v_k ∂_k β_l + β_k ∂_l v_k
        let beta = RelativeOneForm::from_components(vec![
            TrigPolynomial::monomial([0, 1].into(), c(1.0, 0.0)).unwrap(),
            TrigPolynomial::zero(2).unwrap(),
        ])
        .unwrap();
        let v = VectorFieldOnTorus::from_components(vec![
            TrigPolynomial::monomial([1, 0].into(), c(0.5, 0.0)).unwrap(),
            TrigPolynomial::monomial([1, 1].into(), c(0.0, 2.0)).unwrap(),
        ])
        .unwrap();
        let cartan = lie_derivative(&v, &beta).unwrap();
        for l in 0..2 {
            let mut coord = TrigPolynomial::zero(2).unwrap();
            for k in 0..2 {
                let t1 = v.component(k).multiply(&beta.component(l).partial_derivative(k)).unwrap();
                let t2 = beta.component(k).multiply(&v.component(k).partial_derivative(l)).unwrap();
                coord = coord.checked_add(&t1).unwrap().checked_add(&t2).unwrap();
            }
            let diff = cartan.component(l).checked_sub(&coord).unwrap();
            assert!(diff.l1_coefficient_norm() < 1e-14, "component {l}");
        }
    }

    #[test]
    fn decomposition_examples() {
        let delta = SymplecticParameters::new(vec![2.0]).unwrap();
        let d = decompose(&unit_field(2, 0), &delta, 1e-12).unwrap();
        assert!(d.potential.is_zero());
        assert_eq!(d.counterterm, vec![c(0.0, 0.0), c(-2.0, 0.0)]);

        let g = TrigPolynomial::from_terms(
            2,
            [
                (MultiIndex::from([1, -1]), c(0.5, 0.25)),
                (MultiIndex::from([0, 2]), c(-1.0, 0.0)),
            ],
        )
        .unwrap();
        let d = decompose(&hamiltonian_field(&g, &delta).unwrap(), &delta, 1e-12).unwrap();
        assert!(d.counterterm.iter().all(|x| x.norm() == 0.0));
        assert!(d.potential.checked_sub(&g).unwrap().l1_coefficient_norm() < 1e-15);
    }

    #[test]
    fn non_symplectic_field_rejected() {
        let delta = SymplecticParameters::new(vec![1.0]).unwrap();
        let v = VectorFieldOnTorus::from_components(vec![
            TrigPolynomial::monomial([1, 0].into(), c(1.0, 0.0)).unwrap(),
            TrigPolynomial::zero(2).unwrap(),
        ])
        .unwrap();
        assert!(matches!(decompose(&v, &delta, 1e-12), Err(KamError::NotClosed { .. })));
    }
}
