use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{RelativeOneForm, TrigPolynomial};
use crate::error::{KamError, Result};

/// Half-width `s` of the polyannulus `U_s = {1-s < |z_k| < 1+s}`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Scale(f64);

impl Scale {
    pub fn new(s: f64) -> Result<Self> {
        if s > 0.0 && s < 1.0 {
            Ok(Scale(s))
        } else {
            Err(KamError::ScaleOutOfRange(s))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `w_s = 1/(1-s)`, the bound of `|z_k|^{±1}` on `U_s`.
    pub fn weight(self) -> f64 {
        1.0 / (1.0 - self.0)
    }
}

impl TryFrom<f64> for Scale {
    type Error = KamError;
    fn try_from(s: f64) -> Result<Self> {
        Scale::new(s)
    }
}

impl From<Scale> for f64 {
    fn from(s: Scale) -> f64 {
        s.0
    }
}

/// Weighted-ℓ1 majorant `Σ |c_I| w_s^{|I|_1}`, an upper bound for the
/// supremum over `U_s` (each `|z^I| <= (1-s)^{-|I|_1}` there).
pub trait Majorant {
    fn majorant_norm(&self, s: Scale) -> f64;
}

impl Majorant for TrigPolynomial {
    fn majorant_norm(&self, s: Scale) -> f64 {
        let w = s.weight();
        self.terms()
            .map(|(i, c)| c.norm() * w.powi(i.l1_norm() as i32))
            .sum()
    }
}

impl Majorant for RelativeOneForm {
    fn majorant_norm(&self, s: Scale) -> f64 {
        self.components()
            .iter()
            .map(|c| c.majorant_norm(s))
            .fold(0.0, f64::max)
    }
}

impl Majorant for [TrigPolynomial] {
    fn majorant_norm(&self, s: Scale) -> f64 {
        self.iter().map(|c| c.majorant_norm(s)).fold(0.0, f64::max)
    }
}

/// `‖z_k^p‖²` over the annulus `1-s < |z_k| < 1+s`: `2π ∫ r^{2p+1} dr`.
pub fn annulus_moment(p: i32, s: Scale) -> f64 {
    let (lo, hi) = (1.0 - s.value(), 1.0 + s.value());
    if p == -1 {
        2.0 * PI * (hi / lo).ln()
    } else {
        let e = 2 * p + 2;
        2.0 * PI * (hi.powi(e) - lo.powi(e)) / e as f64
    }
}

/// L² norm on the polyannulus `U_s`, using orthogonality of monomials.
pub fn l2_norm(f: &TrigPolynomial, s: Scale) -> f64 {
    f.terms()
        .map(|(i, c)| {
            let weight: f64 = i.entries().iter().map(|&p| annulus_moment(p, s)).product();
            c.norm_sqr() * weight
        })
        .sum::<f64>()
        .sqrt()
}
