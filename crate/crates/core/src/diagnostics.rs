//! Scale-indexed norms, empirical locality constants and tamedness checks.
//!
//! An operator `u` is `k`-local with constant `C` when
//! `‖u(x)‖_s <= C (t-s)^{-k} ‖x‖_t` for all `s < t`. Sampled constants are
//! observed lower bounds on the true constant; composed constants are
//! analytic upper bounds.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{for_each_in_ball, summarise_series, BrunoSummary, FrequencyVector, LatticeNorm};
use crate::error::{KamError, Result};
use crate::homological::h_k;
use crate::torus::{exterior_derivative, l2_norm, Majorant, MultiIndex, RelativeOneForm, Scale, TrigPolynomial};

/// Norm families on tuples of trigonometric polynomials; the norm of a
/// tuple is the largest component norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleNormFamily {
    #[default]
    Majorant,
    L2,
}

impl ScaleNormFamily {
    pub const ALL: [ScaleNormFamily; 2] = [ScaleNormFamily::Majorant, ScaleNormFamily::L2];

    pub fn norm(self, x: &[TrigPolynomial], s: Scale) -> f64 {
        match self {
            ScaleNormFamily::Majorant => x.majorant_norm(s),
            ScaleNormFamily::L2 => x.iter().map(|c| l2_norm(c, s)).fold(0.0, f64::max),
        }
    }
}

/// Linear operator between tuples of trigonometric polynomials on `T^dim`.
pub trait ScaleMorphism: Sync {
    fn name(&self) -> String;
    fn input_components(&self, dim: usize) -> usize;
    fn apply(&self, x: &[TrigPolynomial]) -> Result<Vec<TrigPolynomial>>;
}

fn expect_components(x: &[TrigPolynomial], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(KamError::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct Identity {
    pub components: usize,
}

impl ScaleMorphism for Identity {
    fn name(&self) -> String {
        "identity".into()
    }
    fn input_components(&self, _dim: usize) -> usize {
        self.components
    }
    fn apply(&self, x: &[TrigPolynomial]) -> Result<Vec<TrigPolynomial>> {
        expect_components(x, self.components)?;
        Ok(x.to_vec())
    }
}

/// `∂/∂x_k` on functions.
#[derive(Debug, Clone, Copy)]
pub struct PartialDerivative {
    pub coordinate: usize,
}

impl ScaleMorphism for PartialDerivative {
    fn name(&self) -> String {
        format!("d/dx{}", self.coordinate + 1)
    }
    fn input_components(&self, _dim: usize) -> usize {
        1
    }
    fn apply(&self, x: &[TrigPolynomial]) -> Result<Vec<TrigPolynomial>> {
        expect_components(x, 1)?;
        if self.coordinate >= x[0].dim() {
            return Err(KamError::InvalidParameter(format!(
                "coordinate {} out of range for dimension {}",
                self.coordinate,
                x[0].dim()
            )));
        }
        Ok(vec![x[0].partial_derivative(self.coordinate)])
    }
}

/// `d` from functions to one-forms.
#[derive(Debug, Clone, Copy)]
pub struct FunctionDifferential;

impl ScaleMorphism for FunctionDifferential {
    fn name(&self) -> String {
        "d(function)".into()
    }
    fn input_components(&self, _dim: usize) -> usize {
        1
    }
    fn apply(&self, x: &[TrigPolynomial]) -> Result<Vec<TrigPolynomial>> {
        expect_components(x, 1)?;
        Ok(exterior_derivative(&x[0]).into_components())
    }
}

/// `d` from one-forms to two-forms (upper-triangular components).
#[derive(Debug, Clone, Copy)]
pub struct FormDifferential;

impl ScaleMorphism for FormDifferential {
    fn name(&self) -> String {
        "d(one-form)".into()
    }
    fn input_components(&self, dim: usize) -> usize {
        dim
    }
    fn apply(&self, x: &[TrigPolynomial]) -> Result<Vec<TrigPolynomial>> {
        let form = RelativeOneForm::from_components(x.to_vec())?;
        Ok(form.differential().components().to_vec())
    }
}

/// The truncated quasi-inverse `h_k` at a fixed frequency.
#[derive(Debug, Clone)]
pub struct QuasiInverse {
    pub k: u32,
    pub phi: FrequencyVector,
    pub divisor_floor: f64,
}

impl ScaleMorphism for QuasiInverse {
    fn name(&self) -> String {
        format!("h_{}", self.k)
    }
    fn input_components(&self, _dim: usize) -> usize {
        1
    }
    fn apply(&self, x: &[TrigPolynomial]) -> Result<Vec<TrigPolynomial>> {
        expect_components(x, 1)?;
        Ok(vec![h_k(&x[0], self.k, &self.phi, self.divisor_floor)?])
    }
}

/// `second ∘ first`.
pub struct Composed<A, B> {
    pub first: A,
    pub second: B,
}

impl<A: ScaleMorphism, B: ScaleMorphism> ScaleMorphism for Composed<A, B> {
    fn name(&self) -> String {
        format!("{} . {}", self.second.name(), self.first.name())
    }
    fn input_components(&self, dim: usize) -> usize {
        self.first.input_components(dim)
    }
    fn apply(&self, x: &[TrigPolynomial]) -> Result<Vec<TrigPolynomial>> {
        self.second.apply(&self.first.apply(x)?)
    }
}

/// Inputs and scale pairs for [`estimate_locality`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub dim: usize,
    /// Largest `|I|_1` of sampled modes.
    pub degree: u32,
    /// Modes per component of each random polynomial.
    pub terms: usize,
    pub polynomials: u64,
    /// Also probe every monomial `e_I`, `|I|_1 <= degree`, in each component.
    #[serde(default)]
    pub monomial_probes: bool,
    /// Decades of `t - s` covered by the scale grid.
    #[serde(default = "default_decades")]
    pub decades: u32,
    #[serde(default)]
    pub norm: ScaleNormFamily,
}

fn default_decades() -> u32 {
    3
}

/// Pairs of the grid per decade of `t - s`.
pub const GRID_PER_DECADE: u32 = 16;
const GRID_CENTRE: f64 = 0.5;

/// Geometric grid of `(s, t)` centred at 0.5 with `t - s = 0.5·10^{-j/16}`.
pub fn scale_grid(decades: u32) -> Vec<(Scale, Scale)> {
    (0..=decades * GRID_PER_DECADE)
        .map(|j| {
            let gap = 0.5 * 10f64.powf(-(j as f64) / GRID_PER_DECADE as f64);
            let s = Scale::new(GRID_CENTRE - gap / 2.0).expect("grid inside (0,1)");
            let t = Scale::new(GRID_CENTRE + gap / 2.0).expect("grid inside (0,1)");
            (s, t)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateSource {
    /// Observed lower bound on the true constant.
    Sampled,
    /// Upper bound from the composition rule.
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalityWitness {
    pub input: Vec<TrigPolynomial>,
    pub s: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalityEstimate {
    pub operator: String,
    pub k: u32,
    pub c_hat: f64,
    pub samples: u64,
    pub witness: Option<LocalityWitness>,
    pub source: EstimateSource,
}

/// `‖op(x)‖_s (t-s)^k / ‖x‖_t`, or `None` when `x` vanishes.
pub fn locality_ratio<M: ScaleMorphism + ?Sized>(
    op: &M,
    k: u32,
    family: ScaleNormFamily,
    x: &[TrigPolynomial],
    s: Scale,
    t: Scale,
) -> Result<Option<f64>> {
    let denom = family.norm(x, t);
    if denom == 0.0 {
        return Ok(None);
    }
    let out = op.apply(x)?;
    Ok(Some(family.norm(&out, s) * (t.value() - s.value()).powi(k as i32) / denom))
}

fn random_polynomial(rng: &mut ChaCha8Rng, dim: usize, degree: u32, terms: usize) -> Result<TrigPolynomial> {
    let d = degree as i32;
    let mut modes = Vec::with_capacity(terms);
    for _ in 0..terms {
        let index = loop {
            let entries: Vec<i32> = (0..dim).map(|_| rng.gen_range(-d..=d)).collect();
            if entries.iter().map(|e| e.unsigned_abs()).sum::<u32>() <= degree {
                break MultiIndex::new(entries);
            }
        };
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        modes.push((index, c));
    }
    TrigPolynomial::from_terms(dim, modes)
}

/// Input number `index`: random polynomials first (stream `index` of the
/// seeded generator), then monomial probes.
fn sample_inputs(spec: &SampleSpec, components: usize, seed: u64) -> Result<Vec<Vec<TrigPolynomial>>> {
    let mut inputs = Vec::new();
    for j in 0..spec.polynomials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j);
        let x = (0..components)
            .map(|_| random_polynomial(&mut rng, spec.dim, spec.degree, spec.terms))
            .collect::<Result<Vec<_>>>()?;
        inputs.push(x);
    }
    if spec.monomial_probes {
        let mut modes = Vec::new();
        for_each_in_ball(spec.dim, spec.degree as u64, LatticeNorm::L1, |i, _| {
            modes.push(MultiIndex::new(i.to_vec()))
        });
        let zero = TrigPolynomial::zero(spec.dim)?;
        for c in 0..components {
            for m in &modes {
                let mut x = vec![zero.clone(); components];
                x[c] = TrigPolynomial::monomial(m.clone(), Complex64::new(1.0, 0.0))?;
                inputs.push(x);
            }
        }
    }
    Ok(inputs)
}

/// `C_hat = max ‖op(x)‖_s (t-s)^k / ‖x‖_t` over the sampled inputs and the
/// fixed scale grid. Ties keep the earliest sample.
pub fn estimate_locality<M: ScaleMorphism + ?Sized>(
    op: &M,
    k: u32,
    spec: &SampleSpec,
    seed: u64,
) -> Result<LocalityEstimate> {
    if spec.dim < 2 || !spec.dim.is_multiple_of(2) {
        return Err(KamError::InvalidParameter(format!("dimension {} must be even and >= 2", spec.dim)));
    }
    let components = op.input_components(spec.dim);
    let inputs = sample_inputs(spec, components, seed)?;
    let grid = scale_grid(spec.decades);

    let per_input: Vec<Result<Option<(f64, usize)>>> = inputs
        .par_iter()
        .enumerate()
        .map(|(j, x)| {
            let mut best: Option<(f64, usize)> = None;
            for (g, &(s, t)) in grid.iter().enumerate() {
                let r = locality_ratio(op, k, spec.norm, x, s, t).map_err(|e| KamError::MorphismFailed {
                    sample: j as u64,
                    message: e.to_string(),
                })?;
                if let Some(r) = r {
                    if best.is_none_or(|(b, _)| r > b) {
                        best = Some((r, g));
                    }
                }
            }
            Ok(best)
        })
        .collect();

    let mut c_hat = 0.0;
    let mut witness = None;
    for (j, best) in per_input.into_iter().enumerate() {
        if let Some((r, g)) = best? {
            if witness.is_none() || r > c_hat {
                c_hat = r;
                witness = Some((j, g));
            }
        }
    }
    Ok(LocalityEstimate {
        operator: op.name(),
        k,
        c_hat,
        samples: (inputs.len() * grid.len()) as u64,
        witness: witness.map(|(j, g)| LocalityWitness {
            input: inputs[j].clone(),
            s: grid[g].0.value(),
            t: grid[g].1.value(),
        }),
        source: EstimateSource::Sampled,
    })
}

/// Analytic bound for `second ∘ first`: order `k1 + k2`, constant
/// `C1 C2 2^{k1+k2}` from splitting `(s, t)` at its midpoint.
pub fn compose_locality(first: &LocalityEstimate, second: &LocalityEstimate) -> LocalityEstimate {
    let k = first.k + second.k;
    LocalityEstimate {
        operator: format!("{} . {}", second.operator, first.operator),
        k,
        c_hat: first.c_hat * second.c_hat * 2f64.powi(k as i32),
        samples: 0,
        witness: None,
        source: EstimateSource::Analytic,
    }
}

/// Partial sums of `ln(norm_n) / 2^n` with the finite-horizon verdict used
/// for Bruno sums.
pub fn tamedness_verdict(norms: &[f64]) -> Result<BrunoSummary> {
    if let Some((n, v)) = norms.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(KamError::InvalidSequence(format!("norm_{n} = {v} must be positive and finite")));
    }
    Ok(summarise_series(
        norms
            .iter()
            .enumerate()
            .map(|(n, v)| v.ln() / 2f64.powi(n as i32))
            .collect(),
    ))
}
